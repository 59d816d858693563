"""Dense Hermitian linear algebra with pinned output conventions.

Every operator in this package is a dense complex128 ndarray.  The
wrappers here fix the conventions the physics layers rely on:
eigenvalues ascending, a documented tie-break inside degenerate
subspaces, and propagators built exclusively from the
eigendecomposition (no Pade, no scaling-and-squaring).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Tolerance for accepting a matrix as Hermitian, relative to its
# largest entry magnitude.
HERMITICITY_TOL = 1e-9

# Eigenvalues closer than this are treated as one degenerate cluster
# for the tie-break below.
DEGENERACY_GAP = 1e-10


class NonSquareError(ValueError):
    """Operator is not a square 2-d matrix."""


class NonHermitianError(ValueError):
    """Matrix fails the Hermiticity tolerance."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending, real) and eigenvectors (columns)."""

    values: np.ndarray
    vectors: np.ndarray


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def hermiticity_defect(m: np.ndarray) -> float:
    """Largest entry magnitude of M - M^dag."""
    return float(np.abs(m - dagger(m)).max())


def _require_square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {m.shape}")
    return m.astype(complex, copy=False)


def _require_hermitian(m: np.ndarray) -> np.ndarray:
    m = _require_square(m)
    scale = max(1.0, float(np.abs(m).max()))
    defect = hermiticity_defect(m)
    if defect > HERMITICITY_TOL * scale:
        raise NonHermitianError(
            f"hermiticity defect {defect:.3e} exceeds tolerance "
            f"{HERMITICITY_TOL * scale:.3e}"
        )
    return m


def eig_hermitian(m: np.ndarray) -> EigenDecomposition:
    """Diagonalize a Hermitian matrix with deterministic conventions.

    Eigenvalues come back ascending.  Within any cluster of eigenvalues
    separated by less than ``DEGENERACY_GAP`` the eigenvectors are
    re-orthonormalized in index order, and every eigenvector's global
    phase is fixed so its largest-magnitude component is real and
    positive.  Repeated calls on the same matrix are bit-identical.
    """
    m = _require_hermitian(m)
    values, vectors = np.linalg.eigh(m)
    vectors = vectors.astype(complex, copy=True)

    n = len(values)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and values[stop] - values[stop - 1] < DEGENERACY_GAP:
            stop += 1
        if stop - start > 1:
            _orthonormalize_in_place(vectors, start, stop)
        start = stop

    for j in range(n):
        col = vectors[:, j]
        k = int(np.argmax(np.abs(col)))
        pivot = col[k]
        if pivot != 0:
            col *= np.abs(pivot) / pivot
        # keep the pivot exactly real
        col[k] = col[k].real
    return EigenDecomposition(values=values, vectors=vectors)


def _orthonormalize_in_place(vectors: np.ndarray, start: int, stop: int) -> None:
    # modified Gram-Schmidt over one degenerate cluster, in index order
    for j in range(start, stop):
        col = vectors[:, j]
        for i in range(start, j):
            col -= np.vdot(vectors[:, i], col) * vectors[:, i]
        col /= np.linalg.norm(col)


def expm_hermitian_propagator(h: np.ndarray, t: float) -> np.ndarray:
    """Unitary exp(-i*H*t) for Hermitian H, via the eigendecomposition."""
    decomp = eig_hermitian(h)
    phases = np.exp(-1j * decomp.values * t)
    return (decomp.vectors * phases) @ dagger(decomp.vectors)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two operators (dimensions multiply)."""
    return np.kron(np.asarray(a), np.asarray(b))
