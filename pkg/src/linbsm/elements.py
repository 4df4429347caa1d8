"""Optical elements as mode unitaries and routing maps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Mapping

import numpy as np

from .fock import H, V, Mode, ModeRegistry, ModeUnitary, RegistryError, State

WaveplateKind = Literal["half", "quarter"]

RETARDANCE = {"half": math.pi, "quarter": math.pi / 2}


@dataclass(frozen=True)
class WaveplateSpec:
    kind: WaveplateKind
    angle: float  # fast-axis angle in radians, measured from H

    def __post_init__(self):
        if self.kind not in RETARDANCE:
            raise ValueError(f"unknown waveplate kind {self.kind!r}")
        if not math.isfinite(self.angle):
            raise ValueError("waveplate angle must be finite")

    @classmethod
    def degrees(cls, kind: WaveplateKind, angle_deg: float) -> "WaveplateSpec":
        return cls(kind, math.radians(angle_deg))

    @property
    def retardance(self) -> float:
        return RETARDANCE[self.kind]


BS_SYMMETRIC = np.array([[1, 1j], [1j, 1]]) / math.sqrt(2)


def balanced_bs(spatial1: str, spatial2: str, matrix: np.ndarray = BS_SYMMETRIC) -> ModeUnitary:
    """50:50 beam splitter between two spatial modes, acting identically on H and V.

    The default 2x2 matrix is the symmetric convention (1/sqrt 2)[[1, i], [i, 1]];
    any other 2x2 unitary can be passed to study convention dependence.
    Outputs keep the input spatial ids: port ``spatial1`` leaves on ``spatial1``.
    """
    if spatial1 == spatial2:
        raise RegistryError("beam splitter needs two distinct spatial modes")
    m = np.asarray(matrix, dtype=complex)
    targets = [Mode(spatial1, H), Mode(spatial1, V), Mode(spatial2, H), Mode(spatial2, V)]
    # ordering (s1H, s1V, s2H, s2V): polarization is the inner index
    return ModeUnitary(np.kron(m, np.eye(2)), targets)


def retarder_matrix(angle: float, retardance: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return rot @ np.diag([1, np.exp(1j * retardance)]) @ rot.T


def waveplate(spatial: str, spec: WaveplateSpec) -> ModeUnitary:
    """Linear retarder R(theta) diag(1, e^{i delta}) R(-theta) on (H, V) of one spatial mode."""
    return ModeUnitary(retarder_matrix(spec.angle, spec.retardance), [Mode(spatial, H), Mode(spatial, V)])


@dataclass(frozen=True)
class Routing:
    """Lossless relabelling of modes, e.g. the two ports of a polarizing beam splitter."""

    mapping: Mapping[Mode, Mode]

    def registry(self, registry: ModeRegistry) -> ModeRegistry:
        for src in self.mapping:
            if src not in registry:
                raise RegistryError(f"routing source {src} not in {registry.labels()}")
        untouched = {m for m in registry if m not in self.mapping}
        clash = untouched & set(self.mapping.values())
        if clash:
            raise RegistryError(f"routing targets collide with existing modes: {sorted(map(str, clash))}")
        return registry.relabel(self.mapping)

    def apply(self, state: State) -> State:
        self.registry(state.registry)
        return state.relabel(self.mapping)


def pbs_split(spatial_in: str, spatial_out_h: str, spatial_out_v: str) -> Routing:
    """Ideal PBS: (in, H) -> (out_H, H) and (in, V) -> (out_V, V)."""
    if spatial_out_h == spatial_out_v:
        raise RegistryError("PBS outputs must be distinct spatial modes")
    return Routing({Mode(spatial_in, H): Mode(spatial_out_h, H), Mode(spatial_in, V): Mode(spatial_out_v, V)})


def rename(spatial_from: str, spatial_to: str) -> Routing:
    """Relabel a spatial mode, both polarizations."""
    return Routing({Mode(spatial_from, p): Mode(spatial_to, p) for p in (H, V)})
