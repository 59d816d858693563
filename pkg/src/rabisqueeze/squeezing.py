"""Quadrature variances, squeeze operators, and squeezing in decibels.

Conventions: X = a^dag + a and P = i(a^dag - a), so vacuum has unit
variance in both and [X, P] = 2i gives the uncertainty bound
var_x * var_p >= 1.  The squeeze operator S(r) = exp(r/2 (a^dag^2 - a^2))
sends vacuum to variances (e^{2r}, e^{-2r}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import (
    FockSpace,
    QuantumState,
    TruncationRiskError,
    annihilation,
    lift_field,
    variance,
)
from .linalg import dagger, expm_hermitian_propagator

# Allowance on the uncertainty product for round-off in honest states.
HEISENBERG_TOL = 1e-6

# Hard cap on the squeeze parameter; beyond this the default Fock space
# cannot hold the state anyway.
MAX_SQUEEZE_PARAM = 3.0


@dataclass(frozen=True)
class QuadratureVariances:
    """Variances of X and P; must respect var_x * var_p >= 1."""

    var_x: float
    var_p: float

    def __post_init__(self) -> None:
        if self.var_x <= 0 or self.var_p <= 0:
            raise ValueError(f"variances must be positive, got {self}")
        if self.var_x * self.var_p < 1.0 - HEISENBERG_TOL:
            raise ValueError(
                f"uncertainty product {self.var_x * self.var_p} below the "
                "Heisenberg bound; the state is unphysical"
            )


@dataclass(frozen=True)
class SqueezingReport:
    """Squeezing in dB, the squeezed quadrature tag, and the raw variances.

    s_db = max(0, -10*log10(min(var_x, var_p))); quadrature is 'x' or 'p'
    for whichever variance is smaller ('x' on ties) and 'none' when
    neither drops below vacuum.
    """

    s_db: float
    quadrature: str
    variances: QuadratureVariances


def quadrature_ops(space: FockSpace) -> tuple[np.ndarray, np.ndarray]:
    """Field-only quadratures (X, P)."""
    a = annihilation(space)
    ad = dagger(a)
    return ad + a, 1j * (ad - a)


def _squeezed_vacuum_tail(r: float, space: FockSpace) -> float:
    # Analytic Fock populations of squeezed vacuum,
    # P(2k) = (2k)! / (2^k k!)^2 * tanh(r)^{2k} / cosh(r),
    # summed over the top two levels of the truncated space.
    t = abs(math.tanh(r))
    if t == 0.0:
        return 0.0
    total = 0.0
    for n in (space.dim - 2, space.dim - 1):
        if n % 2:
            continue
        k = n // 2
        log_p = (
            math.lgamma(n + 1)
            - 2.0 * (k * math.log(2.0) + math.lgamma(k + 1))
            + n * math.log(t)
            - math.log(math.cosh(r))
        )
        total += math.exp(log_p)
    return total


def squeeze_operator(r: float, space: FockSpace) -> np.ndarray:
    """Unitary S(r) = exp(r/2 (a^dag^2 - a^2)) on the truncated space.

    Rejects |r| > MAX_SQUEEZE_PARAM outright, and any r whose squeezed
    vacuum would predictably populate the top two Fock levels beyond the
    truncation threshold for this space.
    """
    if abs(r) > MAX_SQUEEZE_PARAM:
        raise ValueError(
            f"squeeze parameter |r| = {abs(r)} exceeds {MAX_SQUEEZE_PARAM}"
        )
    tail = _squeezed_vacuum_tail(r, space)
    if tail > 1e-6:
        raise TruncationRiskError(
            f"squeezed vacuum at r = {r} would put population {tail:.3e} in "
            f"the top two Fock levels of dim {space.dim}; raise the dimension"
        )
    a = annihilation(space)
    generator = 0.5 * r * (dagger(a) @ dagger(a) - a @ a)
    # exp(G) for anti-Hermitian G, computed as the propagator of the
    # Hermitian matrix iG at unit time
    return expm_hermitian_propagator(1j * generator, 1.0)


def bare_mode_variances(state: QuantumState) -> QuadratureVariances:
    """Variances of the bare-mode quadratures on a field-only or joint state.

    For joint states the quadratures are lifted over the qubit, which is
    equivalent to tracing the qubit out first.
    """
    space = FockSpace(state.fock_dim)
    x_op, p_op = quadrature_ops(space)
    if state.is_joint:
        x_op = lift_field(x_op, space)
        p_op = lift_field(p_op, space)
    return QuadratureVariances(
        var_x=variance(state, x_op), var_p=variance(state, p_op)
    )


def squeezing_db(v: QuadratureVariances) -> SqueezingReport:
    """Squeezing report for a pair of quadrature variances."""
    smallest = min(v.var_x, v.var_p)
    s_db = max(0.0, -10.0 * math.log10(smallest))
    if smallest >= 1.0:
        quadrature = "none"
    elif v.var_x <= v.var_p:
        quadrature = "x"
    else:
        quadrature = "p"
    return SqueezingReport(s_db=s_db, quadrature=quadrature, variances=v)


def state_squeezing(state: QuantumState) -> SqueezingReport:
    """Convenience: bare-mode variances and dB report in one call."""
    return squeezing_db(bare_mode_variances(state))
