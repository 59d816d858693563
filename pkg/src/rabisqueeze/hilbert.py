"""Truncated cavity-mode plus qubit Hilbert space.

Composite ordering is field (x) qubit: basis index 2*n + q with q = 0
for spin up and q = 1 for spin down, so the qubit index varies fastest.
The truncated annihilation operator satisfies [a, a^dag] = 1 everywhere
except the top Fock level, where the commutator element is 1 - D; any
state whose top two Fock levels carry more than ``TRUNCATION_THRESHOLD``
population is rejected by the guard below.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .linalg import kron

DEFAULT_FOCK_DIM = 60
TRUNCATION_THRESHOLD = 1e-6

NORM_TOL = 1e-9

QUBIT_UP = 0
QUBIT_DOWN = 1
_QUBIT_INDEX = {"up": QUBIT_UP, "down": QUBIT_DOWN}


class TruncationRiskError(RuntimeError):
    """Too much population near the top of the Fock ladder."""


@dataclass(frozen=True)
class FockSpace:
    """Truncated single-mode Fock space with dim levels (0 .. dim-1)."""

    dim: int = DEFAULT_FOCK_DIM

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError(f"Fock dimension must be >= 2, got {self.dim}")

    @property
    def joint_dim(self) -> int:
        return 2 * self.dim


@dataclass
class QuantumState:
    """Pure state vector or density matrix, field-only or field (x) qubit.

    ``data`` has length fock_dim (field-only) or 2*fock_dim (joint).
    Pure states must be normalized and density matrices Hermitian with
    unit trace, both within NORM_TOL.
    """

    data: np.ndarray
    fock_dim: int
    kind: str = "pure"

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=complex)
        if self.kind not in ("pure", "density"):
            raise ValueError(f"unknown state kind {self.kind!r}")
        dim = self.data.shape[0]
        if dim not in (self.fock_dim, 2 * self.fock_dim):
            raise ValueError(
                f"state dimension {dim} matches neither fock_dim={self.fock_dim} "
                "nor its joint extension"
            )
        if self.kind == "pure":
            if self.data.ndim != 1:
                raise ValueError("pure state data must be a vector")
            norm = np.linalg.norm(self.data)
            if abs(norm - 1.0) > NORM_TOL:
                raise ValueError(f"pure state norm {norm} is not 1")
        else:
            if self.data.ndim != 2 or self.data.shape[0] != self.data.shape[1]:
                raise ValueError("density matrix must be square")
            defect = float(np.abs(self.data - self.data.conj().T).max())
            if defect > NORM_TOL:
                raise ValueError(f"density matrix hermiticity defect {defect}")
            tr = self.data.trace()
            if abs(tr - 1.0) > NORM_TOL:
                raise ValueError(f"density matrix trace {tr} is not 1")

    @property
    def is_density(self) -> bool:
        return self.kind == "density"

    @property
    def is_joint(self) -> bool:
        return self.data.shape[0] == 2 * self.fock_dim

    def as_density(self) -> np.ndarray:
        if self.is_density:
            return self.data
        return np.outer(self.data, self.data.conj())

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the density matrix (positivity check)."""
        return float(np.linalg.eigvalsh(self.as_density())[0])


PauliOps = namedtuple("PauliOps", "sx sy sz sp sm")


def qubit_ops() -> PauliOps:
    """Pauli and ladder operators in the (up, down) basis, sz = diag(1, -1)."""
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    sm = np.array([[0, 0], [1, 0]], dtype=complex)
    sx = sp + sm
    sy = -1j * sp + 1j * sm
    sz = np.diag([1.0, -1.0]).astype(complex)
    return PauliOps(sx, sy, sz, sp, sm)


def annihilation(space: FockSpace) -> np.ndarray:
    """Truncated lowering operator, a|n> = sqrt(n)|n-1>."""
    return np.diag(np.sqrt(np.arange(1, space.dim, dtype=float)), 1).astype(complex)


def number_operator(space: FockSpace) -> np.ndarray:
    return np.diag(np.arange(space.dim, dtype=float)).astype(complex)


def lift_field(a: np.ndarray, space: FockSpace) -> np.ndarray:
    """Embed a field operator in the joint space (identity on the qubit)."""
    if a.shape != (space.dim, space.dim):
        raise ValueError(f"field operator shape {a.shape} != ({space.dim}, {space.dim})")
    return kron(a, np.eye(2, dtype=complex))


def lift_qubit(b: np.ndarray, space: FockSpace) -> np.ndarray:
    """Embed a qubit operator in the joint space (identity on the field)."""
    if b.shape != (2, 2):
        raise ValueError(f"qubit operator shape {b.shape} != (2, 2)")
    return kron(np.eye(space.dim, dtype=complex), b)


def basis_index(n: int, qubit: str) -> int:
    """Joint basis index of |n> (x) |qubit>, qubit in {'up', 'down'}."""
    return 2 * n + _QUBIT_INDEX[qubit]


def fock_state(n: int, space: FockSpace) -> QuantumState:
    """Field-only Fock state |n>."""
    if not 0 <= n < space.dim:
        raise ValueError(f"Fock level {n} outside [0, {space.dim})")
    vec = np.zeros(space.dim, dtype=complex)
    vec[n] = 1.0
    return QuantumState(vec, fock_dim=space.dim)


def qubit_vector(qubit) -> np.ndarray:
    if isinstance(qubit, str):
        vec = np.zeros(2, dtype=complex)
        vec[_QUBIT_INDEX[qubit]] = 1.0
        return vec
    vec = np.asarray(qubit, dtype=complex)
    if vec.shape != (2,):
        raise ValueError("qubit must be 'up', 'down', or a length-2 vector")
    return vec


def product_state(field, qubit) -> QuantumState:
    """Joint pure state field (x) qubit.

    ``field`` is a field-only QuantumState or amplitude vector; ``qubit``
    is 'up', 'down', or a normalized length-2 vector.
    """
    if isinstance(field, QuantumState):
        if field.is_density or field.is_joint:
            raise ValueError("field factor must be a field-only pure state")
        fvec = field.data
    else:
        fvec = np.asarray(field, dtype=complex)
    joint = kron(fvec.reshape(-1, 1), qubit_vector(qubit).reshape(-1, 1)).ravel()
    return QuantumState(joint, fock_dim=len(fvec))


def expectation(state: QuantumState, op: np.ndarray) -> complex:
    """<O> on a pure or density state; O must act on the state's space."""
    if op.shape[0] != state.data.shape[0]:
        raise ValueError(
            f"operator dim {op.shape[0]} != state dim {state.data.shape[0]}"
        )
    if state.is_density:
        return complex(np.einsum("ij,ji->", state.data, op))
    return complex(np.vdot(state.data, op @ state.data))


def expectation_real(state: QuantumState, op: np.ndarray) -> float:
    """Real expectation value of a Hermitian observable."""
    val = expectation(state, op)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val)):
        raise ValueError(f"expectation {val} has a non-negligible imaginary part")
    return val.real


def variance(state: QuantumState, op: np.ndarray) -> float:
    """<O^2> - <O>^2 for a Hermitian observable."""
    mean = expectation_real(state, op)
    second = expectation_real(state, op @ op)
    return second - mean * mean


def fock_populations(state: QuantumState) -> np.ndarray:
    """Population per Fock level, traced over the qubit when joint."""
    if state.is_density:
        pops = np.real(np.diag(state.data)).copy()
    else:
        pops = np.abs(state.data) ** 2
    if state.is_joint:
        pops = pops.reshape(state.fock_dim, 2).sum(axis=1)
    return pops


def top_fock_population(state: QuantumState, levels: int = 2) -> float:
    """Total population in the top ``levels`` Fock levels."""
    return float(fock_populations(state)[-levels:].sum())


def check_truncation(state: QuantumState, threshold: float = TRUNCATION_THRESHOLD,
                     context: str = "") -> None:
    """Raise TruncationRiskError if the top two Fock levels are populated."""
    pop = top_fock_population(state)
    if pop > threshold:
        where = f" during {context}" if context else ""
        raise TruncationRiskError(
            f"top two Fock levels hold population {pop:.3e} > {threshold:.1e}"
            f"{where}; raise the Fock dimension"
        )
