"""Exact dynamics, current functionals and inverse field maps for qubit chains with 2-local couplings."""

__version__ = "0.1.0"

from .model import (
    Bond,
    ChainModel,
    ConfigError,
    Constant,
    ExperimentSpec,
    FieldSchedule,
    GlobalFieldShift,
    RecordFlags,
    Samples,
    SineSum,
    VLConfig,
    load_experiment,
    parse_experiment,
    serialize_experiment,
    state_from_amplitudes,
)
from .observables import (
    bond_observables,
    concurrence,
    entanglement_functional_single_excitation,
    local_polarizations,
    pairwise_concurrences,
    reduced_density_2q,
    two_excitation_spectrum,
)
from .propagator import NumericalAbort, Trajectory, propagate, propagate_state, rk4_step
from .verify import VerificationReport, run_suite
from .vlmap import IncompatibleInitialState, VLResult, vl_construct, vl_from_spec

__all__ = [
    "Bond",
    "ChainModel",
    "ConfigError",
    "Constant",
    "ExperimentSpec",
    "FieldSchedule",
    "GlobalFieldShift",
    "IncompatibleInitialState",
    "NumericalAbort",
    "RecordFlags",
    "Samples",
    "SineSum",
    "Trajectory",
    "VLConfig",
    "VLResult",
    "VerificationReport",
    "bond_observables",
    "concurrence",
    "entanglement_functional_single_excitation",
    "load_experiment",
    "local_polarizations",
    "pairwise_concurrences",
    "parse_experiment",
    "propagate",
    "propagate_state",
    "reduced_density_2q",
    "rk4_step",
    "run_suite",
    "serialize_experiment",
    "state_from_amplitudes",
    "two_excitation_spectrum",
    "vl_construct",
    "vl_from_spec",
    "__version__",
]
