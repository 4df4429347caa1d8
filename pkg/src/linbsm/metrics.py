"""Figures of merit for a Bell-state measurement."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .schemes import AMBIGUOUS, BellKind, ClassificationTable, Distribution, classify


def _outcome_mass(dist: Distribution, table: ClassificationTable, kind: BellKind) -> tuple[float, float, float]:
    correct = false = amb = 0.0
    for pattern, prob in dist.items():
        label = classify(pattern, table)
        if label == AMBIGUOUS:
            amb += prob
        elif label == kind:
            correct += prob
        else:
            false += prob
    return correct, false, amb


def p_correct(dists: Mapping[BellKind, Distribution], table: ClassificationTable) -> float:
    """Input-averaged probability of an unambiguous, correct label."""
    return sum(_outcome_mass(d, table, k)[0] for k, d in dists.items()) / len(dists)


def p_false(dists: Mapping[BellKind, Distribution], table: ClassificationTable) -> float:
    """Input-averaged probability of an unambiguous, wrong label."""
    return sum(_outcome_mass(d, table, k)[1] for k, d in dists.items()) / len(dists)


def p_ambiguous(dists: Mapping[BellKind, Distribution], table: ClassificationTable) -> float:
    return sum(_outcome_mass(d, table, k)[2] for k, d in dists.items()) / len(dists)


def mdf(p_c: float, p_f: float) -> Optional[float]:
    """Measurement discrimination fidelity p_c / (p_c + p_f); None when no label is ever unambiguous."""
    if p_c + p_f <= 0:
        return None
    return p_c / (p_c + p_f)


def tvd(measured: Distribution, expected: Distribution) -> float:
    """Total variation distance; patterns missing from either side count as 0."""
    keys = set(measured) | set(expected)
    return 0.5 * sum(abs(measured.get(k, 0.0) - expected.get(k, 0.0)) for k in keys)


def post_select(dist: Distribution, photon_number: int) -> Distribution:
    """Condition on patterns carrying exactly ``photon_number`` photons."""
    kept = {p: v for p, v in dist.items() if sum(p) == photon_number}
    total = sum(kept.values())
    if total <= 0:
        raise ValueError(f"no probability mass with {photon_number} photons")
    return {p: v / total for p, v in kept.items()}


@dataclass(frozen=True)
class StateMetrics:
    p_c: float
    p_f: float
    p_amb: float
    mdf: Optional[float]
    tvd: Optional[float] = None

    def to_dict(self) -> dict:
        return {"p_c": self.p_c, "p_f": self.p_f, "p_amb": self.p_amb, "mdf": self.mdf, "tvd": self.tvd}


@dataclass(frozen=True)
class MetricsReport:
    p_c: float
    p_f: float
    p_amb: float
    mdf: Optional[float]
    tvd: Optional[float]
    per_state: dict[BellKind, StateMetrics] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = StateMetrics(self.p_c, self.p_f, self.p_amb, self.mdf, self.tvd).to_dict()
        out["per_state"] = {k.value: m.to_dict() for k, m in self.per_state.items()}
        return out


def compute_metrics(
    dists: Mapping[BellKind, Distribution],
    table: ClassificationTable,
    reference: Optional[Mapping[BellKind, Distribution]] = None,
    photon_number: Optional[int] = None,
) -> MetricsReport:
    """Aggregate and per-input metrics.

    Args:
        dists: measured or simulated distribution per Bell input.
        table: pattern classifier.
        reference: expected distributions; enables the distance column.
        photon_number: if given, distributions are post-selected on it first.
    """
    if photon_number is not None:
        dists = {k: post_select(d, photon_number) for k, d in dists.items()}
    per_state = {}
    for kind, dist in dists.items():
        c, f, a = _outcome_mass(dist, table, kind)
        d = tvd(dist, reference[kind]) if reference is not None else None
        per_state[kind] = StateMetrics(c, f, a, mdf(c, f), d)
    n = len(per_state)
    p_c = sum(m.p_c for m in per_state.values()) / n
    p_f = sum(m.p_f for m in per_state.values()) / n
    p_amb = sum(m.p_amb for m in per_state.values()) / n
    dist_avg = sum(m.tvd for m in per_state.values()) / n if reference is not None else None
    return MetricsReport(p_c, p_f, p_amb, mdf(p_c, p_f), dist_avg, per_state)
