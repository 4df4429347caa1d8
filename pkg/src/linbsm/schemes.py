"""Standard and ancilla-enhanced Bell-state measurement circuits.

Standard: Bell pair on (a, b) -> balanced BS -> detect (c, d) in H/V.
Enhanced: output c of the first BS meets the ancilla pair on e at a second
balanced BS whose outputs are f and g; d, f and g are then split by PBSs,
giving the six detection modes dH, dV, fH, fV, gH, gV.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Optional, Sequence, Union

from .elements import BS_SYMMETRIC, WaveplateSpec, balanced_bs, pbs_split, rename, waveplate
from .fock import (
    H,
    V,
    Mode,
    ModeRegistry,
    Occupation,
    PureState,
    State,
    apply_unitary,
    probability_distribution,
    tensor_mixed,
)

Distribution = dict[Occupation, float]


class BellKind(enum.Enum):
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"

    @classmethod
    def parse(cls, text: str) -> "BellKind":
        key = text.strip().lower().replace("plus", "+").replace("minus", "-").replace("_", "")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown Bell state {text!r}; expected one of {[k.value for k in cls]}")


AMBIGUOUS = "ambiguous"
Label = Union[BellKind, str]


class SchemeKind(enum.Enum):
    STANDARD = "standard"
    ENHANCED = "enhanced"


BELL_REGISTRY = ModeRegistry.polarized("a", "b")
AUX_REGISTRY = ModeRegistry.polarized("e")

DETECTION_MODES: dict[SchemeKind, tuple[Mode, ...]] = {
    SchemeKind.STANDARD: (Mode("c", H), Mode("c", V), Mode("d", H), Mode("d", V)),
    SchemeKind.ENHANCED: (
        Mode("dH", H), Mode("dV", V),
        Mode("fH", H), Mode("fV", V),
        Mode("gH", H), Mode("gV", V),
    ),
}
DETECTION_LABELS: dict[SchemeKind, tuple[str, ...]] = {
    SchemeKind.STANDARD: ("cH", "cV", "dH", "dV"),
    SchemeKind.ENHANCED: ("dH", "dV", "fH", "fV", "gH", "gV"),
}
PHOTON_NUMBER = {SchemeKind.STANDARD: 2, SchemeKind.ENHANCED: 4}

_S2 = 1 / math.sqrt(2)

# (first product term, second product term, relative sign) in (aH, aV, bH, bV) order
_BELL_TERMS = {
    BellKind.PSI_PLUS: ((1, 0, 0, 1), (0, 1, 1, 0), 1),
    BellKind.PSI_MINUS: ((1, 0, 0, 1), (0, 1, 1, 0), -1),
    BellKind.PHI_PLUS: ((1, 0, 1, 0), (0, 1, 0, 1), 1),
    BellKind.PHI_MINUS: ((1, 0, 1, 0), (0, 1, 0, 1), -1),
}


def bell_terms(kind: BellKind) -> tuple[PureState, PureState]:
    """The two product states the Bell state superposes."""
    first, second, _ = _BELL_TERMS[kind]
    return PureState(BELL_REGISTRY, {first: 1}), PureState(BELL_REGISTRY, {second: 1})


def make_bell(kind: BellKind) -> PureState:
    first, second, sign = _BELL_TERMS[kind]
    return PureState(BELL_REGISTRY, {first: _S2, second: sign * _S2})


def make_aux(sign: int = 1) -> PureState:
    """(e_H^dag e_H^dag + sign * e_V^dag e_V^dag)|vac>/2, i.e. amplitude 1/sqrt 2 on |2,0> and |0,2>."""
    return PureState(AUX_REGISTRY, {(2, 0): _S2, (0, 2): sign * _S2})


AUX_RECIPE = (WaveplateSpec.degrees("quarter", 45.0), WaveplateSpec.degrees("half", 22.5))


def prepare_aux(recipe: Sequence[WaveplateSpec] = AUX_RECIPE) -> PureState:
    """Pass the pair e_H^dag e_V^dag |vac> through ``recipe`` waveplates in order.

    With the default recipe (QWP at 45 deg, then HWP at 22.5 deg) this yields
    :func:`make_aux` exactly. The reverse order gives the odd-parity ancilla
    (sign -1) up to a global phase, since +/- are eigen-axes of a QWP at 45 deg.
    """
    state = PureState.basis(AUX_REGISTRY, {("e", H): 1, ("e", V): 1})
    for spec in recipe:
        state = apply_unitary(state, waveplate("e", spec))
    return state


def run_circuit(scheme: SchemeKind, bell: State, aux: Optional[State] = None, bs_matrix=BS_SYMMETRIC) -> State:
    """Propagate a (possibly mixed) Bell input through ``scheme``.

    The returned state's registry contains :data:`DETECTION_MODES` for the scheme.
    ``bs_matrix`` is the 2x2 matrix used for every beam splitter.
    """
    state = apply_unitary(bell, balanced_bs("a", "b", bs_matrix))
    state = rename("b", "d").apply(rename("a", "c").apply(state))
    if scheme is SchemeKind.STANDARD:
        return state
    if aux is None:
        aux = make_aux()
    state = tensor_mixed(state, aux)
    state = apply_unitary(state, balanced_bs("c", "e", bs_matrix))
    state = rename("e", "g").apply(rename("c", "f").apply(state))
    for s in ("d", "f", "g"):
        state = pbs_split(s, s + H, s + V).apply(state)
    return state


def output_distribution(scheme: SchemeKind, bell: State, aux: Optional[State] = None, bs_matrix=BS_SYMMETRIC) -> Distribution:
    return probability_distribution(run_circuit(scheme, bell, aux, bs_matrix), DETECTION_MODES[scheme])


@lru_cache(maxsize=None)
def _ideal(scheme: SchemeKind, kind: BellKind) -> tuple[tuple[Occupation, float], ...]:
    return tuple(output_distribution(scheme, make_bell(kind)).items())


def ideal_distribution(scheme: SchemeKind, kind: BellKind) -> Distribution:
    """Exact detection-pattern distribution for a pure Bell input."""
    return dict(_ideal(scheme, kind))


def ideal_distributions(scheme: SchemeKind) -> dict[BellKind, Distribution]:
    return {k: ideal_distribution(scheme, k) for k in BellKind}


@dataclass(frozen=True)
class ClassificationTable:
    """Map from detection pattern to a Bell label or :data:`AMBIGUOUS`."""

    entries: Mapping[Occupation, Label]
    tolerance: float
    n_modes: int

    def labelled(self, label: Label) -> list[Occupation]:
        return [p for p, lab in self.entries.items() if lab == label]

    def __len__(self) -> int:
        return len(self.entries)


def classifier_from_distributions(dists: Mapping[BellKind, Distribution], tolerance: float = 1e-12) -> ClassificationTable:
    """Label a pattern K iff only input K reaches it with probability above ``tolerance``."""
    patterns = sorted({p for d in dists.values() for p in d})
    if not patterns:
        raise ValueError("no patterns to classify")
    entries: dict[Occupation, Label] = {}
    for p in patterns:
        above = [k for k in BellKind if dists.get(k, {}).get(p, 0.0) > tolerance]
        entries[p] = above[0] if len(above) == 1 else AMBIGUOUS
    return ClassificationTable(entries, tolerance, len(patterns[0]))


def build_classifier(scheme: SchemeKind, tolerance: float = 1e-12) -> ClassificationTable:
    return classifier_from_distributions(ideal_distributions(scheme), tolerance)


def classify(pattern: Sequence[int], table: ClassificationTable) -> Label:
    pattern = tuple(int(n) for n in pattern)
    if len(pattern) != table.n_modes:
        raise ValueError(f"pattern {pattern} has {len(pattern)} modes, table expects {table.n_modes}")
    return table.entries.get(pattern, AMBIGUOUS)
