import math

import numpy as np
import pytest

from linbsm.detector import (
    CountRecord,
    PnrConfig,
    _observed_counts,
    correct_counts,
    corrected_std,
    expected_raw,
    p_resolve,
    ppnr_factor,
    sample,
)
from linbsm.schemes import BellKind, SchemeKind, ideal_distribution

from oracles import routing_distinct_counts


def test_p_resolve_values():
    assert p_resolve(0, 8) == 1
    assert p_resolve(1, 8) == 1
    assert p_resolve(2, 8) == 0.875
    assert p_resolve(4, 8) == 1680 / 4096
    assert p_resolve(9, 8) == 0


@pytest.mark.parametrize("n,k", [(n, k) for k in range(1, 7) for n in range(0, 6)])
def test_p_resolve_matches_enumeration(n, k):
    assert p_resolve(n, k) == pytest.approx(routing_distinct_counts(n, k).get(n, 0.0), abs=1e-15)


def test_p_resolve_4_8_enumerated():
    assert routing_distinct_counts(4, 8)[4] * 8**4 == 1680


def test_p_resolve_monotone():
    for k in range(1, 12):
        vals = [p_resolve(n, k) for n in range(0, 14)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
    for n in range(2, 8):
        vals = [p_resolve(n, k) for k in range(n, 30)]
        assert all(a < b for a, b in zip(vals, vals[1:]))


def test_p_resolve_rejects_bad_input():
    with pytest.raises(ValueError):
        p_resolve(-1, 8)
    with pytest.raises(ValueError):
        p_resolve(1, 0)


def test_ppnr_factor():
    assert ppnr_factor((0, 0, 0, 0, 0, 0), 8) == 1
    assert ppnr_factor((1, 1, 1, 1, 0, 0), 8) == 1
    assert ppnr_factor((2, 0, 2, 0, 0, 0), 8) == 0.765625


def test_observed_count_distribution_matches_enumeration():
    # 3 photons into 4 detectors, many trials of a single mode
    rng = np.random.default_rng(5)
    occ = np.full((200_000, 1), 3)
    seen = _observed_counts(occ, 1.0, 4, rng)[:, 0]
    want = routing_distinct_counts(3, 4)
    for d, p in want.items():
        sigma = math.sqrt(p * (1 - p) / len(seen))
        assert abs(np.mean(seen == d) - p) < 4 * sigma


def test_sampling_is_deterministic_and_worker_independent():
    ideal = ideal_distribution(SchemeKind.ENHANCED, BellKind.PHI_MINUS)
    cfg = PnrConfig(k=8, eta=0.886, seed=1234)
    a = sample(ideal, cfg, 150_000)
    b = sample(ideal, cfg, 150_000, workers=3)
    assert a == b
    c = sample(ideal, PnrConfig(k=8, eta=0.886, seed=1235), 150_000)
    assert c.raw != a.raw


def test_eta_zero_keeps_nothing():
    rec = sample({(1, 1): 1.0}, PnrConfig(eta=0.0, seed=1), 1000)
    assert rec.post_selected == 0 and rec.raw == {}


def test_large_k_no_loss_is_ideal():
    ideal = ideal_distribution(SchemeKind.ENHANCED, BellKind.PSI_PLUS)
    rec = sample(ideal, PnrConfig(k=10**6, eta=1.0, seed=2), 10_000)
    assert rec.post_selected == rec.shots
    for p, q in ideal.items():
        f = rec.raw.get(p, 0) / rec.shots
        assert abs(f - q) < 4 * math.sqrt(q * (1 - q) / rec.shots)


def test_empty_distribution_rejected():
    with pytest.raises(ValueError):
        sample({}, PnrConfig(), 10)
    with pytest.raises(ValueError):
        sample({(1,): 1.0}, PnrConfig(), 0)


def test_mixed_photon_numbers_need_explicit_total():
    with pytest.raises(ValueError):
        sample({(1, 0): 0.5, (1, 1): 0.5}, PnrConfig(), 10)


def test_correct_counts_examples():
    cfg = PnrConfig(k=8)
    rec = CountRecord({(1, 1, 0, 0): 30, (0, 0, 1, 1): 10}, 40, 40, cfg)
    assert correct_counts(rec) == pytest.approx({(1, 1, 0, 0): 0.75, (0, 0, 1, 1): 0.25})
    rec = CountRecord({(2, 0): 7}, 10, 7, cfg)
    assert correct_counts(rec) == {(2, 0): 1.0}
    rec = CountRecord({(2, 0): 875, (1, 1): 1000}, 2000, 1875, cfg)
    assert correct_counts(rec) == pytest.approx({(2, 0): 0.5, (1, 1): 0.5})


def test_correct_counts_inconsistent():
    rec = CountRecord({(2, 0): 3}, 3, 3, PnrConfig(k=1))
    with pytest.raises(ValueError):
        correct_counts(rec)


def test_count_record_invariant():
    with pytest.raises(ValueError):
        CountRecord({(1,): 5}, 4, 5)


def test_expected_raw_is_fixed_point_of_correction():
    ideal = ideal_distribution(SchemeKind.ENHANCED, BellKind.PHI_PLUS)
    raw = expected_raw(ideal, 8)
    counts = {p: round(v * 10**9) for p, v in raw.items()}
    rec = CountRecord(counts, 10**9, sum(counts.values()), PnrConfig())
    corrected = correct_counts(rec)
    for p in ideal:
        assert corrected[p] == pytest.approx(ideal[p], abs=1e-8)


def test_corrected_std_against_resampling():
    # delta-method errors agree with the spread over independent seeds
    ideal = ideal_distribution(SchemeKind.STANDARD, BellKind.PHI_PLUS)
    runs = [correct_counts(sample(ideal, PnrConfig(k=8, eta=1.0, seed=s), 4000)) for s in range(150)]
    n = int(4000 * sum(v * ppnr_factor(p, 8) for p, v in ideal.items()))
    sigma = corrected_std(expected_raw(ideal, 8), 8, n)
    for p in ideal:
        spread = np.std([r.get(p, 0.0) for r in runs])
        assert spread == pytest.approx(sigma[p], rel=0.2)
