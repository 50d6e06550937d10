"""Disorder-averaged light propagation in parity-symmetric waveguide arrays."""

from .lattice import (
    ArrayConfig,
    HamiltonianMatrix,
    SpectrumError,
    SpectrumInfo,
    TunnelingProfile,
    build_hamiltonian,
    build_tunneling,
    clean_bandwidth_scaling_check,
    clean_spectrum,
    spectrum,
)
from .disorder import (
    DisorderModel,
    DisorderSpec,
    Realization,
    SeedPolicy,
    box_muller,
    resolve_sigma,
    sample_realization,
)
from .evolve import (
    InputSpec,
    PTBrokenError,
    intensity,
    make_input,
    oracle_expm_taylor,
    propagate_hermitian,
    propagate_pt,
)
from .ensemble import (
    EnsembleConfig,
    EnsembleError,
    EnsembleResult,
    SteadyStateReport,
    correlation_function,
    correlation_matrix,
    detect_steady_state,
    localized_fraction,
    run_ensemble,
)

__version__ = "0.1.0"
