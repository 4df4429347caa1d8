"""Exact and sampled simulation of linear-optical Bell-state measurements,
with and without an ancilla photon pair."""

from .detector import CountRecord, PnrConfig, correct_counts, p_resolve, ppnr_factor, sample
from .elements import WaveplateSpec, balanced_bs, pbs_split, waveplate
from .fock import (
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
from .metrics import MetricsReport, compute_metrics, mdf, p_correct, p_false, tvd
from .noise import NoiseConfig, bell_noise, dephase_aux, dephase_bell
from .relay import RelayCurve, curve, relay_success
from .schemes import (
    AMBIGUOUS,
    BellKind,
    ClassificationTable,
    SchemeKind,
    build_classifier,
    classify,
    ideal_distribution,
    make_aux,
    make_bell,
)

__version__ = "0.1.0"
