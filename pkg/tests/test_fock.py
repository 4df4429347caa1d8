import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linbsm.elements import BS_SYMMETRIC, balanced_bs
from linbsm.fock import (
    MixedState,
    Mode,
    ModeRegistry,
    ModeUnitary,
    PureState,
    RegistryError,
    ValidationError,
    apply_unitary,
    probability_distribution,
    tensor,
)
from linbsm.schemes import BellKind, SchemeKind, make_aux, make_bell, output_distribution

from oracles import occupations, permanent_transform, symbolic_transform

S2 = 1 / math.sqrt(2)


def random_unitary(n, rng):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(reg, n_photons, rng, n_terms=4):
    pool = list(occupations(n_photons, len(reg)))
    picks = rng.choice(len(pool), size=min(n_terms, len(pool)), replace=False)
    terms = {pool[i]: complex(rng.normal(), rng.normal()) for i in picks}
    return PureState(reg, terms, normalize=True)


def full_matrix(u, reg):
    m = np.eye(len(reg), dtype=complex)
    pos = reg.indices(u.targets)
    m[np.ix_(pos, pos)] = u.matrix
    return m


# --- registry ---------------------------------------------------------------


def test_registry_rejects_duplicates_and_unknown_modes():
    with pytest.raises(RegistryError):
        ModeRegistry([("a", "H"), ("a", "H")])
    reg = ModeRegistry.polarized("a")
    with pytest.raises(RegistryError):
        reg.index(("z", "H"))


def test_registry_concat_conflict():
    with pytest.raises(RegistryError):
        ModeRegistry.polarized("a", "b").concat(ModeRegistry.polarized("b"))


# --- states -----------------------------------------------------------------


def test_pure_state_validates_norm_and_prunes():
    reg = ModeRegistry.polarized("a")
    with pytest.raises(ValidationError):
        PureState(reg, {(1, 0): 0.5})
    s = PureState(reg, {(1, 0): 1.0, (0, 1): 1e-16})
    assert list(s.terms) == [(1, 0)]
    with pytest.raises(ValidationError):
        PureState(reg, {(1, 0, 0): 1.0})


def test_mixed_state_weights():
    reg = ModeRegistry.polarized("a")
    h = PureState.basis(reg, {("a", "H"): 1})
    with pytest.raises(ValidationError):
        MixedState([(0.5, h), (0.6, h)])
    with pytest.raises(ValidationError):
        MixedState([(-0.1, h), (1.1, h)])


# --- tensor -----------------------------------------------------------------


def test_tensor_with_vacuum_is_identity():
    s = make_bell(BellKind.PSI_PLUS)
    out = tensor(PureState.vacuum(), s)
    assert out.registry == s.registry
    assert out.terms == s.terms


def test_tensor_bell_aux_terms():
    # (1/sqrt2)(aH bH + aV bV) x (1/2)(eH^2 + eV^2): four operator products, coefficient 1/(2 sqrt 2) each
    out = tensor(make_bell(BellKind.PHI_PLUS), make_aux())
    assert len(out.terms) == 4
    assert sum(out.photon_numbers) == 4
    for occ, amp in out.terms.items():
        operator_coeff = amp / math.sqrt(math.prod(math.factorial(n) for n in occ))
        assert operator_coeff == pytest.approx(1 / (2 * math.sqrt(2)))
    assert out.norm2() == pytest.approx(1, abs=1e-12)


def test_tensor_two_single_photons():
    a = PureState.basis(ModeRegistry.polarized("a"), {("a", "H"): 1})
    b = PureState.basis(ModeRegistry.polarized("b"), {("b", "V"): 1})
    out = tensor(a, b)
    assert out.terms == {(1, 0, 0, 1): 1 + 0j}


def test_tensor_registry_conflict():
    a = PureState.basis(ModeRegistry.polarized("a"), {("a", "H"): 1})
    with pytest.raises(RegistryError):
        tensor(a, a)


# --- apply_unitary ----------------------------------------------------------


def test_identity_unitary():
    s = make_bell(BellKind.PHI_MINUS)
    u = ModeUnitary(np.eye(4), list(s.registry))
    assert apply_unitary(s, u).allclose(s)


def test_psi_plus_through_bs():
    s = apply_unitary(make_bell(BellKind.PSI_PLUS), balanced_bs("a", "b"))
    assert probability_distribution(s) == pytest.approx({(1, 1, 0, 0): 0.5, (0, 0, 1, 1): 0.5})


def test_hong_ou_mandel():
    reg = ModeRegistry.polarized("a", "b")
    s = PureState.basis(reg, {("a", "H"): 1, ("b", "H"): 1})
    out = apply_unitary(s, balanced_bs("a", "b"))
    dist = probability_distribution(out, [("a", "H"), ("b", "H")])
    assert dist.get((1, 1), 0.0) == pytest.approx(0, abs=1e-15)
    assert dist[(2, 0)] == pytest.approx(0.5)
    assert dist[(0, 2)] == pytest.approx(0.5)


def test_unknown_target_mode():
    s = make_bell(BellKind.PSI_PLUS)
    with pytest.raises(RegistryError):
        apply_unitary(s, balanced_bs("a", "z"))


def test_non_unitary_rejected():
    with pytest.raises(ValidationError):
        ModeUnitary([[1, 1], [0, 1]], [("a", "H"), ("a", "V")])


def test_untouched_modes_are_preserved():
    reg = ModeRegistry.polarized("a", "b", "e")
    s = PureState.basis(reg, {("a", "H"): 1, ("e", "V"): 2})
    out = apply_unitary(s, balanced_bs("a", "b"))
    assert all(occ[4:] == (0, 2) for occ in out.terms)


@pytest.mark.parametrize("kind", list(BellKind))
def test_oracles_agree_on_bell_through_bs(kind):
    s = make_bell(kind)
    u = balanced_bs("a", "b")
    got = apply_unitary(s, u).terms
    full = full_matrix(u, s.registry)
    for oracle in (permanent_transform, symbolic_transform):
        want = oracle(s.terms, full)
        assert set(got) == set(want)
        for k in got:
            assert got[k] == pytest.approx(want[k], abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_oracle_equivalence_random(seed):
    rng = np.random.default_rng(seed)
    n_modes = int(rng.integers(2, 9))
    n_photons = int(rng.integers(1, 5))
    reg = ModeRegistry([(f"s{i // 2}", "HV"[i % 2]) for i in range(n_modes)])
    s = random_state(reg, n_photons, rng, n_terms=3)
    width = int(rng.integers(2, n_modes + 1))
    targets = [reg.modes[i] for i in rng.choice(n_modes, size=width, replace=False)]
    u = ModeUnitary(random_unitary(width, rng), targets)
    got = apply_unitary(s, u).terms
    want = permanent_transform(s.terms, full_matrix(u, reg))
    for k in set(got) | set(want):
        assert got.get(k, 0) == pytest.approx(want.get(k, 0), abs=1e-10)


def test_symbolic_oracle_random_four_photons():
    rng = np.random.default_rng(11)
    reg = ModeRegistry.polarized("a", "b", "c")
    s = random_state(reg, 4, rng, n_terms=3)
    u = ModeUnitary(random_unitary(6, rng), list(reg))
    got = apply_unitary(s, u).terms
    want = symbolic_transform(s.terms, full_matrix(u, reg))
    for k in set(got) | set(want):
        assert got.get(k, 0) == pytest.approx(want.get(k, 0), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_photons=st.integers(0, 4))
def test_norm_and_photon_number_preserved(seed, n_photons):
    rng = np.random.default_rng(seed)
    reg = ModeRegistry.polarized("a", "b", "c")
    s = random_state(reg, n_photons, rng)
    u = ModeUnitary(random_unitary(6, rng), list(reg))
    out = apply_unitary(s, u)
    assert out.norm2() == pytest.approx(1, abs=1e-10)
    assert out.photon_numbers <= {n_photons}


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_composition(seed):
    rng = np.random.default_rng(seed)
    reg = ModeRegistry.polarized("a", "b", "c")
    s = random_state(reg, 3, rng)
    u1 = ModeUnitary(random_unitary(4, rng), reg.modes[:4])
    u2 = ModeUnitary(random_unitary(4, rng), reg.modes[2:])
    two_step = apply_unitary(apply_unitary(s, u1), u2)
    one_step = apply_unitary(s, u1.then(u2))
    assert two_step.allclose(one_step, atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(
    phases=st.lists(st.floats(0, 2 * math.pi), min_size=4, max_size=4),
    kind=st.sampled_from(list(BellKind)),
    scheme=st.sampled_from(list(SchemeKind)),
)
def test_phase_convention_invariance(phases, kind, scheme):
    d_out = np.diag(np.exp(1j * np.array(phases[:2])))
    d_in = np.diag(np.exp(1j * np.array(phases[2:])))
    ref = output_distribution(scheme, make_bell(kind))
    got = output_distribution(scheme, make_bell(kind), bs_matrix=d_out @ BS_SYMMETRIC @ d_in)
    assert set(got) == set(ref)
    for k in ref:
        assert got[k] == pytest.approx(ref[k], abs=1e-10)


@pytest.mark.parametrize("scheme", list(SchemeKind))
@pytest.mark.parametrize("kind", list(BellKind))
def test_real_and_symmetric_bs_agree(scheme, kind):
    real = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    ref = output_distribution(scheme, make_bell(kind))
    got = output_distribution(scheme, make_bell(kind), bs_matrix=real)
    assert set(got) == set(ref)
    for k in ref:
        assert got[k] == pytest.approx(ref[k], abs=1e-10)


# --- probability_distribution ----------------------------------------------


def test_basis_state_distribution():
    reg = ModeRegistry.polarized("a")
    assert probability_distribution(PureState.basis(reg, {("a", "V"): 2})) == {(0, 2): 1.0}


def test_mixed_distribution():
    reg = ModeRegistry.polarized("a")
    h = PureState.basis(reg, {("a", "H"): 1})
    v = PureState.basis(reg, {("a", "V"): 1})
    assert probability_distribution(MixedState([(0.5, h), (0.5, v)])) == {(0, 1): 0.5, (1, 0): 0.5}


def test_marginal_sums_over_unlisted_modes():
    s = make_bell(BellKind.PSI_PLUS)
    dist = probability_distribution(s, [Mode("a", "H")])
    assert dist == pytest.approx({(0,): 0.5, (1,): 0.5})
