"""Qubit-cavity models in and out of the dispersive regime.

Three Hamiltonians on the joint field (x) qubit space: the full
two-level/single-mode model with the counter-rotating coupling kept
(h_rabi), its excitation-conserving rotating-wave cousin (h_jc, for
comparison only), and the dispersive-regime effective model (h_disp)
whose coupling is quadratic in the field and proportional to sigma_z.

The dispersive model splits into one quadratic field Hamiltonian per
qubit branch; a squeeze transformation diagonalizes each branch
exactly, giving closed-form spectra and squeezed-vacuum eigenstates.
All frequencies are in units of the cavity frequency unless a caller
says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import (
    FockSpace,
    QuantumState,
    annihilation,
    lift_field,
    lift_qubit,
    number_operator,
    product_state,
    qubit_ops,
    qubit_vector,
)
from .linalg import EigenDecomposition, dagger, eig_hermitian, kron
from .squeezing import squeeze_operator

BRANCH_PLUS = "+"
BRANCH_MINUS = "-"
BRANCHES = (BRANCH_PLUS, BRANCH_MINUS)

# Beyond this coupling-to-detuning ratio the dispersive expansion is
# shaky; params flag it instead of refusing.
DISPERSIVE_RATIO_LIMIT = 0.1


class HarmonicityError(ValueError):
    """The effective branch frequencies are no longer real and positive."""


@dataclass(frozen=True)
class ModelParams:
    """Model frequencies plus every derived dispersive quantity.

    Parameters
    ----------
    omega : cavity frequency (sets the unit system; default 1).
    omega_qubit : qubit splitting.
    g : coupling strength.

    Derived fields are filled in automatically: the detuning
    (omega_qubit - omega), the expansion parameters zeta = g/detuning and
    zeta_tilde = g/(omega_qubit + omega), the quadratic coupling phi with
    2*phi = g^2/detuning + g^2/(omega_qubit + omega), the branch
    frequencies omega_pm = sqrt(omega*(omega +- 4*phi)), the branch
    squeeze parameters r_pm = (1/4)*log(omega/(omega +- 4*phi)), and the
    quarter-period flip intervals dt_pm = pi/(2*omega_pm).

    Raises HarmonicityError when omega <= |4*phi|, where the branch
    frequencies stop being real and positive.  ``dispersive_ok`` is False
    when g/|detuning| exceeds 0.1; the model still runs but the
    dispersive picture is only indicative there.
    """

    omega: float = 1.0
    omega_qubit: float = 3.0
    g: float = 0.1

    detuning: float = field(init=False)
    zeta: float = field(init=False)
    zeta_tilde: float = field(init=False)
    phi: float = field(init=False)
    omega_plus: float = field(init=False)
    omega_minus: float = field(init=False)
    r_plus: float = field(init=False)
    r_minus: float = field(init=False)
    dt_plus: float = field(init=False)
    dt_minus: float = field(init=False)
    coupling_ratio: float = field(init=False)
    dispersive_ok: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.omega <= 0:
            raise ValueError(f"cavity frequency must be positive, got {self.omega}")
        if self.omega_qubit <= 0:
            raise ValueError(
                f"qubit splitting must be positive, got {self.omega_qubit}"
            )
        if self.g < 0:
            raise ValueError(f"coupling must be non-negative, got {self.g}")
        detuning = self.omega_qubit - self.omega
        if detuning == 0:
            raise ValueError("zero detuning: the dispersive expansion is undefined")
        set_ = object.__setattr__
        set_(self, "detuning", detuning)
        set_(self, "zeta", self.g / detuning)
        set_(self, "zeta_tilde", self.g / (self.omega_qubit + self.omega))
        phi = 0.5 * (self.g**2 / detuning + self.g**2 / (self.omega_qubit + self.omega))
        set_(self, "phi", phi)
        if self.omega - abs(4.0 * phi) <= 0:
            raise HarmonicityError(
                f"omega = {self.omega} does not exceed |4*phi| = {abs(4 * phi)}; "
                "the flipped-branch potential is no longer harmonic"
            )
        omega_plus = math.sqrt(self.omega * (self.omega + 4.0 * phi))
        omega_minus = math.sqrt(self.omega * (self.omega - 4.0 * phi))
        set_(self, "omega_plus", omega_plus)
        set_(self, "omega_minus", omega_minus)
        set_(self, "r_plus", 0.25 * math.log(self.omega / (self.omega + 4.0 * phi)))
        set_(self, "r_minus", 0.25 * math.log(self.omega / (self.omega - 4.0 * phi)))
        set_(self, "dt_plus", math.pi / (2.0 * omega_plus))
        set_(self, "dt_minus", math.pi / (2.0 * omega_minus))
        ratio = self.g / abs(detuning)
        set_(self, "coupling_ratio", ratio)
        set_(self, "dispersive_ok", ratio <= DISPERSIVE_RATIO_LIMIT)

    @classmethod
    def from_ratios(cls, g_over_omega: float, delta_over_omega: float,
                    omega: float = 1.0) -> "ModelParams":
        """Build params from the two ratios used throughout the CLI."""
        return cls(
            omega=omega,
            omega_qubit=omega * (1.0 + delta_over_omega),
            g=g_over_omega * omega,
        )

    def branch_sign(self, branch: str) -> int:
        if branch not in BRANCHES:
            raise ValueError(f"branch must be '+' or '-', got {branch!r}")
        return 1 if branch == BRANCH_PLUS else -1

    def squeeze_param(self, branch: str) -> float:
        return self.r_plus if branch == BRANCH_PLUS else self.r_minus

    def branch_frequency(self, branch: str) -> float:
        return self.omega_plus if branch == BRANCH_PLUS else self.omega_minus


@dataclass(frozen=True)
class DispersiveEigenvalue:
    """One closed-form level: Fock index, qubit branch, energy."""

    n: int
    branch: str
    energy: float


def h_rabi(p: ModelParams, space: FockSpace) -> np.ndarray:
    """Full model: omega*n + (Omega/2)*sigma_z + g*(a^dag + a)*sigma_x."""
    a = annihilation(space)
    pauli = qubit_ops()
    h = lift_field(self_energy(p, space), space)
    h += 0.5 * p.omega_qubit * lift_qubit(pauli.sz, space)
    h += p.g * kron(dagger(a) + a, pauli.sx)
    return h


def h_jc(p: ModelParams, space: FockSpace) -> np.ndarray:
    """Rotating-wave model: coupling a^dag sigma- + a sigma+ only."""
    a = annihilation(space)
    pauli = qubit_ops()
    h = lift_field(self_energy(p, space), space)
    h += 0.5 * p.omega_qubit * lift_qubit(pauli.sz, space)
    h += p.g * (kron(dagger(a), pauli.sm) + kron(a, pauli.sp))
    return h


def self_energy(p: ModelParams, space: FockSpace) -> np.ndarray:
    # field self-energy omega * n
    return p.omega * number_operator(space)


def h_disp(p: ModelParams, space: FockSpace) -> np.ndarray:
    """Dispersive model, grouped as a sigma_z-conditioned quadratic form.

    (omega + 2*phi*sigma_z) n + (Omega/2 + phi) sigma_z
    + phi * sigma_z * (a^2 + a^dag^2).
    Commutes with sigma_z by construction.
    """
    a = annihilation(space)
    num = number_operator(space)
    sz = qubit_ops().sz
    squeeze_term = a @ a + dagger(a) @ dagger(a)
    h = p.omega * kron(num, np.eye(2, dtype=complex))
    h += 2.0 * p.phi * kron(num, sz)
    h += (0.5 * p.omega_qubit + p.phi) * lift_qubit(sz, space)
    h += p.phi * kron(squeeze_term, sz)
    return h


def h_disp_quadratic(p: ModelParams, space: FockSpace) -> np.ndarray:
    """Dispersive model grouped around the squared quadrature instead.

    omega*n + (Omega/2)*sigma_z + (c/2)*sigma_z*(a^dag + a)^2 with
    c = g^2/detuning + g^2/(omega_qubit + omega), built directly from the
    couplings rather than from phi.  The squared quadrature is the
    projection of the exact operator, a^2 + a^dag^2 + 2n + 1; squaring
    the truncated matrix instead would add a spurious edge term of size
    c*D/2 at the top Fock level.
    """
    a = annihilation(space)
    num = number_operator(space)
    sz = qubit_ops().sz
    c = p.g**2 / p.detuning + p.g**2 / (p.omega_qubit + p.omega)
    x_squared = a @ a + dagger(a) @ dagger(a) + 2.0 * num + np.eye(space.dim)
    h = lift_field(self_energy(p, space), space)
    h += 0.5 * p.omega_qubit * lift_qubit(sz, space)
    h += 0.5 * c * kron(x_squared, sz)
    return h


def h_disp_branch(p: ModelParams, space: FockSpace, branch: str) -> np.ndarray:
    """Field-only dispersive Hamiltonian for one qubit branch.

    (omega +- 2*phi) n +- (Omega/2 + phi) +- phi*(a^2 + a^dag^2); the
    scalar offset is included so branch spectra line up with h_disp.
    """
    s = p.branch_sign(branch)
    a = annihilation(space)
    h = (p.omega + s * 2.0 * p.phi) * number_operator(space)
    h += s * (0.5 * p.omega_qubit + p.phi) * np.eye(space.dim, dtype=complex)
    h += s * p.phi * (a @ a + dagger(a) @ dagger(a))
    return h


def dispersive_spectrum(p: ModelParams, n_max: int) -> list[DispersiveEigenvalue]:
    """Closed-form levels omega_pm * n +- (Omega/2 + phi), sorted by energy.

    Returns both branches for n = 0 .. n_max - 1.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    offset = 0.5 * p.omega_qubit + p.phi
    levels = []
    for n in range(n_max):
        levels.append(DispersiveEigenvalue(n, BRANCH_MINUS, p.omega_minus * n - offset))
        levels.append(DispersiveEigenvalue(n, BRANCH_PLUS, p.omega_plus * n + offset))
    levels.sort(key=lambda lv: (lv.energy, lv.branch, lv.n))
    return levels


def rabi_spectrum(p: ModelParams, space: FockSpace) -> EigenDecomposition:
    """Numerically exact spectrum of the full model on this space."""
    return eig_hermitian(h_rabi(p, space))


def _phase_fixed(vec: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(vec)))
    pivot = vec[k]
    if pivot != 0:
        vec = vec * (np.abs(pivot) / pivot)
    return vec


def rabi_ground_state(p: ModelParams, space: FockSpace) -> QuantumState:
    """Numerically exact ground state of the full model (phase-fixed)."""
    decomp = rabi_spectrum(p, space)
    return QuantumState(decomp.vectors[:, 0].copy(), fock_dim=space.dim)


def approx_rabi_eigenstate(p: ModelParams, branch: str, space: FockSpace) -> QuantumState:
    """Squeezed-vacuum approximation to the low-lying full-model eigenstates.

    Branch '-': S(r_minus)|0>|down> plus the first-order admixture
    (zeta_tilde*cosh(r_minus) - zeta*sinh(r_minus)) * S(r_minus)|1>|up>.
    Branch '+': S(r_plus)|0>|up> plus
    (zeta*cosh(r_plus) - zeta_tilde*sinh(r_plus)) * S(r_plus)|1>|down>.
    Normalized and phase-fixed after construction.
    """
    r = p.squeeze_param(branch)
    squeezer = squeeze_operator(r, space)
    vac = np.zeros(space.dim, dtype=complex)
    vac[0] = 1.0
    one = np.zeros(space.dim, dtype=complex)
    one[1] = 1.0
    if branch == BRANCH_MINUS:
        base_qubit, partner_qubit = "down", "up"
        admix = p.zeta_tilde * math.cosh(r) - p.zeta * math.sinh(r)
    else:
        p.branch_sign(branch)  # validates
        base_qubit, partner_qubit = "up", "down"
        admix = p.zeta * math.cosh(r) - p.zeta_tilde * math.sinh(r)
    joint = kron((squeezer @ vac).reshape(-1, 1), qubit_vector(base_qubit).reshape(-1, 1)).ravel()
    joint = joint + admix * kron(
        (squeezer @ one).reshape(-1, 1), qubit_vector(partner_qubit).reshape(-1, 1)
    ).ravel()
    joint /= np.linalg.norm(joint)
    return QuantumState(_phase_fixed(joint), fock_dim=space.dim)


def dispersive_ground_state(p: ModelParams, space: FockSpace) -> QuantumState:
    """Exact dispersive ground state S(r_minus)|0>|down>."""
    squeezer = squeeze_operator(p.r_minus, space)
    vac = np.zeros(space.dim, dtype=complex)
    vac[0] = 1.0
    return product_state(squeezer @ vac, "down")
