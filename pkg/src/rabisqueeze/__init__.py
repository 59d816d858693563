"""Squeezing of a qubit-coupled oscillator mode, far off resonance.

A small simulator for the regime where a two-level system shifts the
frequency and squeezes the quadratures of a bosonic mode it couples to.
The library covers the closed-form branch picture, exact numerics on a
truncated Fock space, a qubit-flip squeezing protocol, and its open
system behaviour under photon loss and flip-timing jitter.  The
``rabisqueeze`` command exposes the standard experiments as parameter
sweeps written to CSV/JSON (optionally with a rendered figure).
"""

__version__ = "0.1.0"

from .hilbert import FockSpace, QuantumState, TruncationRiskError
from .linalg import (
    EigenDecomposition,
    NonHermitianError,
    NonSquareError,
    eig_hermitian,
    expm_hermitian_propagator,
)
from .model import (
    BRANCH_MINUS,
    BRANCH_PLUS,
    DispersiveEigenvalue,
    HarmonicityError,
    ModelParams,
    approx_rabi_eigenstate,
    dispersive_ground_state,
    dispersive_spectrum,
    h_disp,
    h_disp_branch,
    h_jc,
    h_rabi,
    rabi_ground_state,
    rabi_spectrum,
)
from .openquantum import (
    EnsembleReport,
    IntegrationFailureError,
    NoiseConfig,
    lindblad_evolve,
    run_jitter_ensemble,
    run_noisy_protocol,
    sudden_flip_validity,
)
from .protocol import (
    DISPERSIVE_ANALYTIC,
    DISPERSIVE_NUMERIC,
    RABI_NUMERIC,
    ProtocolConfig,
    ProtocolTrace,
    heisenberg_one_cycle_ops,
    qubit_postselection,
    run_dispersive_analytic,
    run_dispersive_numeric,
    run_protocol,
    run_rabi_numeric,
)
from .squeezing import (
    QuadratureVariances,
    SqueezingReport,
    bare_mode_variances,
    quadrature_ops,
    squeeze_operator,
    squeezing_db,
    state_squeezing,
)

__all__ = [
    "__version__",
    "BRANCH_MINUS",
    "BRANCH_PLUS",
    "DISPERSIVE_ANALYTIC",
    "DISPERSIVE_NUMERIC",
    "RABI_NUMERIC",
    "DispersiveEigenvalue",
    "EigenDecomposition",
    "EnsembleReport",
    "FockSpace",
    "HarmonicityError",
    "IntegrationFailureError",
    "ModelParams",
    "NoiseConfig",
    "NonHermitianError",
    "NonSquareError",
    "ProtocolConfig",
    "ProtocolTrace",
    "QuadratureVariances",
    "QuantumState",
    "SqueezingReport",
    "TruncationRiskError",
    "approx_rabi_eigenstate",
    "bare_mode_variances",
    "dispersive_ground_state",
    "dispersive_spectrum",
    "eig_hermitian",
    "expm_hermitian_propagator",
    "h_disp",
    "h_disp_branch",
    "h_jc",
    "h_rabi",
    "heisenberg_one_cycle_ops",
    "lindblad_evolve",
    "quadrature_ops",
    "qubit_postselection",
    "rabi_ground_state",
    "rabi_spectrum",
    "run_dispersive_analytic",
    "run_dispersive_numeric",
    "run_jitter_ensemble",
    "run_noisy_protocol",
    "run_protocol",
    "run_rabi_numeric",
    "squeeze_operator",
    "squeezing_db",
    "state_squeezing",
    "sudden_flip_validity",
]
