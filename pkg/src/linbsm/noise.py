"""Visibility-driven degradation of the Bell and ancilla inputs.

This is a modelling choice, not a derived source model. A Bell state is first
dephased in the H/V basis:

    rho = v_pm |B><B| + (1 - v_pm) (|t1><t1| + |t2><t2|) / 2

and then photon b has its polarization flipped (H <-> V) with probability
(1 - v_hv) / 2. The simulated correlation visibilities are then exactly
V_{+/-} = v_pm and V_{H/V} = v_hv. The ancilla is dephased the same way.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

from .elements import WaveplateSpec, waveplate
from .fock import H, V, MixedState, Mode, PureState, State, apply_unitary, probability_distribution
from .schemes import AUX_REGISTRY, BellKind, Distribution, SchemeKind, bell_terms, make_aux, make_bell, output_distribution

# b-photon flip partner: X_b |Phi+-> = |Psi+->, X_b |Psi+-> = |Phi+->
_FLIP = {
    BellKind.PHI_PLUS: BellKind.PSI_PLUS,
    BellKind.PHI_MINUS: BellKind.PSI_MINUS,
    BellKind.PSI_PLUS: BellKind.PHI_PLUS,
    BellKind.PSI_MINUS: BellKind.PHI_MINUS,
}


def _check(v: float, name: str = "visibility") -> float:
    if not (0.0 <= v <= 1.0) or math.isnan(v):
        raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
    return float(v)


@dataclass(frozen=True)
class NoiseConfig:
    v_bell_hv: float = 0.975
    v_bell_pm: float = 0.954
    v_aux_hv: float = 0.9899

    def __post_init__(self):
        for name, value in asdict(self).items():
            _check(value, name)

    @classmethod
    def ideal(cls) -> "NoiseConfig":
        return cls(1.0, 1.0, 1.0)


def _dephased_components(kind: BellKind, v: float) -> list[tuple[float, PureState]]:
    t1, t2 = bell_terms(kind)
    return [(v, make_bell(kind)), ((1 - v) / 2, t1), ((1 - v) / 2, t2)]


def dephase_bell(kind: BellKind, v: float) -> MixedState:
    """v |B><B| plus (1 - v) times the equal mixture of the two product terms."""
    return MixedState(_dephased_components(kind, _check(v)))


def bell_noise(kind: BellKind, v_hv: float = 1.0, v_pm: float = 1.0) -> MixedState:
    """Dephasing (strength set by ``v_pm``) followed by a b-photon flip with probability (1 - v_hv)/2."""
    flip = (1 - _check(v_hv, "v_hv")) / 2
    comps = [((1 - flip) * w, s) for w, s in _dephased_components(kind, _check(v_pm, "v_pm"))]
    comps += [(flip * w, s) for w, s in _dephased_components(_FLIP[kind], v_pm)]
    return MixedState(comps)


def dephase_aux(v: float) -> MixedState:
    """v |Aux><Aux| plus (1 - v) times the equal mixture of |2H> and |2V>."""
    v = _check(v)
    return MixedState(
        [
            (v, make_aux()),
            ((1 - v) / 2, PureState(AUX_REGISTRY, {(2, 0): 1})),
            ((1 - v) / 2, PureState(AUX_REGISTRY, {(0, 2): 1})),
        ]
    )


def noisy_distribution(scheme: SchemeKind, kind: BellKind, config: Optional[NoiseConfig] = None) -> Distribution:
    config = config or NoiseConfig()
    bell = bell_noise(kind, config.v_bell_hv, config.v_bell_pm)
    aux = dephase_aux(config.v_aux_hv) if scheme is SchemeKind.ENHANCED else None
    return output_distribution(scheme, bell, aux)


def noisy_distributions(scheme: SchemeKind, config: Optional[NoiseConfig] = None) -> dict[BellKind, Distribution]:
    return {k: noisy_distribution(scheme, k, config) for k in BellKind}


def correlation_visibility(state: State, basis: str = "hv") -> float:
    """|P(equal outcomes) - P(different outcomes)| for single-photon polarization
    measurements on a and b, in the H/V (``"hv"``) or +/- (``"pm"``) basis.

    The +/- measurement is an HWP at 22.5 deg in front of each H/V analyser.
    """
    if basis == "pm":
        hwp = WaveplateSpec.degrees("half", 22.5)
        state = apply_unitary(apply_unitary(state, waveplate("a", hwp)), waveplate("b", hwp))
    elif basis != "hv":
        raise ValueError(f"unknown basis {basis!r}")
    modes = [Mode("a", H), Mode("a", V), Mode("b", H), Mode("b", V)]
    dist = probability_distribution(state, modes)
    same = dist.get((1, 0, 1, 0), 0.0) + dist.get((0, 1, 0, 1), 0.0)
    diff = dist.get((1, 0, 0, 1), 0.0) + dist.get((0, 1, 1, 0), 0.0)
    return abs(same - diff) / (same + diff)
