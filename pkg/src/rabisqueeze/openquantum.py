"""Photon loss and flip-timing jitter for the squeezing protocol.

Zero-temperature Lindblad evolution with the field annihilation
operator as the single collapse channel,

    drho/dt = -i[H, rho] + gamma*(a rho a^dag - (a^dag a rho + rho a^dag a)/2),

integrated with fixed-step classical Runge-Kutta (RK4).  Each flip
interval is one integration segment; a halved-step Richardson check on
the first segment guards the step size.  Timing jitter draws Gaussian
offsets per interval (or one per run), with sampled negative durations
clamped to zero.  The ``steps`` argument fixes the step size per nominal
interval; a draw that runs longer than nominal gets proportionally more
steps so the resolution never degrades.  Ensembles evolve as one stacked
array so a fixed seed fully determines every draw and result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import FockSpace, QuantumState, TruncationRiskError, TRUNCATION_THRESHOLD
from .protocol import (
    DISPERSIVE_ANALYTIC,
    ProtocolConfig,
    ProtocolTrace,
    initial_state,
    protocol_hamiltonian,
)
from .squeezing import (
    QuadratureVariances,
    SqueezingReport,
    quadrature_ops,
    squeezing_db,
)

DEFAULT_STEPS_PER_INTERVAL = 200
RICHARDSON_TOL = 1e-6
TRACE_TOL = 1e-7
POSITIVITY_TOL = 1e-7


class IntegrationFailureError(RuntimeError):
    """The Lindblad integration cannot be trusted at this step size."""


@dataclass(frozen=True)
class NoiseConfig:
    """Loss and jitter settings.

    ``gamma`` is the photon loss rate in units of 1/dt_plus (0.01 means
    one percent of a photon lifetime per raised-branch dwell).
    ``jitter_rel`` scales the Gaussian timing noise: each dwell interval
    gets an offset with standard deviation jitter_rel times its nominal
    length, drawn independently per interval when
    ``jitter_per_interval`` is set and once per run otherwise.
    """

    gamma: float = 0.01
    jitter_rel: float = 0.0
    ensemble_size: int = 100
    rng_seed: int = 12345
    jitter_per_interval: bool = True

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ValueError(f"loss rate must be >= 0, got {self.gamma}")
        if self.jitter_rel < 0:
            raise ValueError(f"jitter must be >= 0, got {self.jitter_rel}")
        if self.ensemble_size < 1:
            raise ValueError(f"ensemble size must be >= 1, got {self.ensemble_size}")


@dataclass
class EnsembleReport:
    """Per-cycle ensemble statistics of the squeezing in dB.

    ``mean_s_db[k]`` and ``stderr_s_db[k]`` summarize cycle k across the
    ensemble (entry 0 is the shared initial state).  Per-run curves are
    retained only when the ensemble was run with ``keep_runs=True``.
    """

    cfg: ProtocolConfig
    noise: NoiseConfig
    mean_s_db: np.ndarray
    stderr_s_db: np.ndarray
    per_run_s_db: np.ndarray | None = None

    @property
    def cycles(self) -> int:
        return len(self.mean_s_db) - 1


class _PhotonLoss:
    """Reshaping helpers for a rho a^dag and the number-operator weights."""

    def __init__(self, fock_dim: int, joint: bool):
        self.dim = fock_dim
        self.joint = joint
        sq = np.sqrt(np.arange(1.0, fock_dim))
        self.w2 = np.outer(sq, sq)
        levels = np.arange(fock_dim, dtype=float)
        if joint:
            levels = np.repeat(levels, 2)
        self.half_sum = 0.5 * (levels[:, None] + levels[None, :])

    def jump(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho)
        d = self.dim
        if self.joint:
            r4 = rho.reshape(d, 2, d, 2)
            out.reshape(d, 2, d, 2)[: d - 1, :, : d - 1, :] = (
                r4[1:, :, 1:, :] * self.w2[:, None, :, None]
            )
        else:
            out[: d - 1, : d - 1] = rho[1:, 1:] * self.w2
        return out

    def jump_batched(self, stack: np.ndarray) -> np.ndarray:
        out = np.zeros_like(stack)
        d = self.dim
        runs = stack.shape[0]
        if self.joint:
            r5 = stack.reshape(runs, d, 2, d, 2)
            out.reshape(runs, d, 2, d, 2)[:, : d - 1, :, : d - 1, :] = (
                r5[:, 1:, :, 1:, :] * self.w2[None, :, None, :, None]
            )
        else:
            out[:, : d - 1, : d - 1] = stack[:, 1:, 1:] * self.w2[None]
        return out


def _loss_for(rho_dim: int, fock_dim: int) -> _PhotonLoss:
    if rho_dim == fock_dim:
        return _PhotonLoss(fock_dim, joint=False)
    if rho_dim == 2 * fock_dim:
        return _PhotonLoss(fock_dim, joint=True)
    raise ValueError(f"density dim {rho_dim} fits neither D={fock_dim} nor 2D")


def _evolve_matrix(rho: np.ndarray, h_mat: np.ndarray, gamma: float, t: float,
                   steps: int, loss: _PhotonLoss) -> np.ndarray:
    if t == 0.0:
        return rho.copy()
    dt = t / steps

    def rhs(r: np.ndarray) -> np.ndarray:
        prod = r @ h_mat
        out = 1j * (prod - prod.conj().T)
        if gamma:
            out += gamma * (loss.jump(r) - loss.half_sum * r)
        return out

    for _ in range(steps):
        k1 = rhs(rho)
        k2 = rhs(rho + (0.5 * dt) * k1)
        k3 = rhs(rho + (0.5 * dt) * k2)
        k4 = rhs(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    # fused-multiply-add kernels round the dissipator products a last ulp
    # off symmetric; the averaged form is Hermitian to the bit
    return 0.5 * (rho + rho.conj().T)


def lindblad_evolve(rho: QuantumState, h_mat: np.ndarray, gamma: float, t: float,
                    steps: int = DEFAULT_STEPS_PER_INTERVAL) -> QuantumState:
    """Evolve a density matrix for time t under H with photon loss gamma.

    ``gamma`` here is an absolute rate (same units as 1/t).  The state
    may live on the joint or the field-only space; the collapse operator
    is the (lifted) annihilation operator either way.
    """
    if not rho.is_density:
        raise ValueError("lindblad_evolve needs a density state; use as_density()")
    if gamma < 0:
        raise ValueError(f"loss rate must be >= 0, got {gamma}")
    if t < 0:
        raise ValueError(f"duration must be >= 0, got {t}")
    if steps < 1:
        raise IntegrationFailureError(f"step count underflow: {steps}")
    loss = _loss_for(rho.data.shape[0], rho.fock_dim)
    out = _evolve_matrix(rho.data, h_mat, gamma, t, steps, loss)
    return QuantumState(out, fock_dim=rho.fock_dim, kind="density")


def richardson_defect(rho: QuantumState, h_mat: np.ndarray, gamma: float, t: float,
                      steps: int = DEFAULT_STEPS_PER_INTERVAL) -> float:
    """Max-abs difference between one segment at ``steps`` and at twice that.

    An a posteriori step-size check: for RK4 the error of the halved-step
    result is roughly this defect over fifteen.
    """
    loss = _loss_for(rho.data.shape[0], rho.fock_dim)
    coarse = _evolve_matrix(rho.data, h_mat, gamma, t, steps, loss)
    fine = _evolve_matrix(rho.data, h_mat, gamma, t, 2 * steps, loss)
    return float(np.abs(coarse - fine).max())


def _flip_density(rho: np.ndarray, dim: int) -> np.ndarray:
    # sigma_x rho sigma_x by reindexing the qubit factor on both sides
    side = rho.shape[0]
    return rho.reshape(dim, 2, dim, 2)[:, ::-1, :, ::-1].reshape(side, side)


def _jitter_offsets(rng: np.random.Generator, noise: NoiseConfig, cycles: int,
                    runs: int, nominal: np.ndarray) -> np.ndarray:
    """Duration offsets of shape (runs, cycles, 2); draw order is run-major."""
    if noise.jitter_rel == 0.0:
        return np.zeros((runs, cycles, 2))
    scale = noise.jitter_rel * nominal  # (2,) per-interval standard deviations
    if noise.jitter_per_interval:
        return rng.normal(size=(runs, cycles, 2)) * scale
    return np.broadcast_to(rng.normal(size=(runs, 1, 1)) * scale, (runs, cycles, 2))


def _step_counts(durations: np.ndarray, nominal: np.ndarray, steps: int) -> np.ndarray:
    """Per-interval RK4 step counts keeping the step size <= nominal / steps."""
    return np.ceil(steps * np.maximum(durations / nominal, 1.0)).astype(int)


def _check_density(rho: np.ndarray, fock_dim: int, where: str) -> None:
    trace_err = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
    if trace_err > TRACE_TOL:
        raise IntegrationFailureError(f"trace drift {trace_err:.3e} {where}")
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    if min_eig < -POSITIVITY_TOL:
        raise IntegrationFailureError(f"negative eigenvalue {min_eig:.3e} {where}")
    pops = np.real(np.diagonal(rho))
    if rho.shape[0] == 2 * fock_dim:
        pops = pops.reshape(fock_dim, 2).sum(axis=1)
    if pops[-2:].sum() > TRUNCATION_THRESHOLD:
        raise TruncationRiskError(
            f"top two Fock levels hold population {pops[-2:].sum():.3e} {where}"
        )


def _density_report(rho: np.ndarray, x_op: np.ndarray, p_op: np.ndarray,
                    x_sq: np.ndarray, p_sq: np.ndarray) -> SqueezingReport:
    mean_x = np.einsum("ij,ji->", rho, x_op).real
    mean_p = np.einsum("ij,ji->", rho, p_op).real
    var_x = np.einsum("ij,ji->", rho, x_sq).real - mean_x**2
    var_p = np.einsum("ij,ji->", rho, p_sq).real - mean_p**2
    return squeezing_db(QuadratureVariances(var_x=var_x, var_p=var_p))


def _lifted_quadratures(space: FockSpace, joint: bool):
    x_op, p_op = quadrature_ops(space)
    if joint:
        eye2 = np.eye(2, dtype=complex)
        x_op = np.kron(x_op, eye2)
        p_op = np.kron(p_op, eye2)
    return x_op, p_op, x_op @ x_op, p_op @ p_op


def run_noisy_protocol(cfg: ProtocolConfig, noise: NoiseConfig, space: FockSpace,
                       steps: int = DEFAULT_STEPS_PER_INTERVAL,
                       richardson_check: bool = True) -> ProtocolTrace:
    """Single protocol run as a density matrix with loss (and jitter if set).

    The loss rate is noise.gamma / dt_plus.  Trace, positivity, and
    truncation are checked at every cycle boundary.
    """
    if cfg.variant == DISPERSIVE_ANALYTIC:
        raise ValueError("noisy runs need a numeric variant")
    dt_plus, dt_minus = cfg.resolved_timing()
    nominal = np.array([dt_plus, dt_minus])
    gamma_abs = noise.gamma / dt_plus
    h_mat = protocol_hamiltonian(cfg, space)
    rho = initial_state(cfg, space).as_density()
    loss = _loss_for(rho.shape[0], space.dim)

    rng = np.random.default_rng(noise.rng_seed)
    durations = np.clip(
        nominal + _jitter_offsets(rng, noise, cfg.cycles, 1, nominal)[0], 0.0, None
    )
    counts = _step_counts(durations, nominal, steps)

    if richardson_check and cfg.cycles > 0:
        first = QuantumState(_flip_density(rho, space.dim), fock_dim=space.dim,
                             kind="density")
        defect = richardson_defect(first, h_mat, gamma_abs, durations[0, 0],
                                   int(counts[0, 0]))
        if defect > RICHARDSON_TOL:
            raise IntegrationFailureError(
                f"halved-step check defect {defect:.3e} exceeds {RICHARDSON_TOL:.1e}; "
                "raise the per-interval step count"
            )

    x_op, p_op, x_sq, p_sq = _lifted_quadratures(space, joint=True)
    reports: list[SqueezingReport | None] = [_density_report(rho, x_op, p_op, x_sq, p_sq)]
    for k in range(1, cfg.cycles + 1):
        rho = _flip_density(rho, space.dim)
        rho = _evolve_matrix(rho, h_mat, gamma_abs, durations[k - 1, 0],
                             int(counts[k - 1, 0]), loss)
        rho = _flip_density(rho, space.dim)
        rho = _evolve_matrix(rho, h_mat, gamma_abs, durations[k - 1, 1],
                             int(counts[k - 1, 1]), loss)
        _check_density(rho, space.dim, f"after cycle {k}")
        if cfg.record_each_cycle or k == cfg.cycles:
            reports.append(_density_report(rho, x_op, p_op, x_sq, p_sq))
        else:
            reports.append(None)
    return ProtocolTrace(
        variant=cfg.variant,
        reports=reports,
        elapsed_time=float(durations.sum()),
        final_state=QuantumState(rho, fock_dim=space.dim, kind="density"),
    )


def _evolve_batched(stack: np.ndarray, h_mat: np.ndarray, gamma: float,
                    durations: np.ndarray, steps: int, loss: _PhotonLoss) -> np.ndarray:
    """RK4 on a (runs, M, M) stack, one duration per run."""
    runs, side, _ = stack.shape
    dt = (durations / steps).reshape(runs, 1, 1)

    def rhs(r: np.ndarray) -> np.ndarray:
        prod = (r.reshape(runs * side, side) @ h_mat).reshape(runs, side, side)
        out = 1j * (prod - prod.conj().transpose(0, 2, 1))
        if gamma:
            out += gamma * (loss.jump_batched(r) - loss.half_sum * r)
        return out

    for _ in range(steps):
        k1 = rhs(stack)
        k2 = rhs(stack + (0.5 * dt) * k1)
        k3 = rhs(stack + (0.5 * dt) * k2)
        k4 = rhs(stack + dt * k3)
        stack = stack + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return 0.5 * (stack + stack.conj().transpose(0, 2, 1))


def _flip_batched(stack: np.ndarray, dim: int) -> np.ndarray:
    runs, side, _ = stack.shape
    return stack.reshape(runs, dim, 2, dim, 2)[:, :, ::-1, :, ::-1].reshape(
        runs, side, side
    )


def _batched_s_db(stack: np.ndarray, x_op, p_op, x_sq, p_sq) -> np.ndarray:
    mean_x = np.einsum("rij,ji->r", stack, x_op).real
    mean_p = np.einsum("rij,ji->r", stack, p_op).real
    var_x = np.einsum("rij,ji->r", stack, x_sq).real - mean_x**2
    var_p = np.einsum("rij,ji->r", stack, p_sq).real - mean_p**2
    if np.any(var_x <= 0) or np.any(var_p <= 0):
        raise IntegrationFailureError("non-positive variance in ensemble run")
    if np.any(var_x * var_p < 1.0 - 1e-6):
        raise IntegrationFailureError("uncertainty product collapsed in ensemble run")
    smallest = np.minimum(var_x, var_p)
    return np.maximum(0.0, -10.0 * np.log10(smallest))


def _check_batched(stack: np.ndarray, fock_dim: int, where: str) -> None:
    traces = np.einsum("rii->r", stack)
    worst = float(np.max(np.abs(traces - 1.0)))
    if worst > TRACE_TOL:
        raise IntegrationFailureError(f"trace drift {worst:.3e} {where}")
    min_eig = float(np.linalg.eigvalsh(stack)[:, 0].min())
    if min_eig < -POSITIVITY_TOL:
        raise IntegrationFailureError(f"negative eigenvalue {min_eig:.3e} {where}")
    pops = np.real(np.diagonal(stack, axis1=1, axis2=2))
    if stack.shape[1] == 2 * fock_dim:
        pops = pops.reshape(stack.shape[0], fock_dim, 2).sum(axis=2)
    worst_top = float(pops[:, -2:].sum(axis=1).max())
    if worst_top > TRUNCATION_THRESHOLD:
        raise TruncationRiskError(
            f"top two Fock levels hold population {worst_top:.3e} {where}"
        )


def run_jitter_ensemble(cfg: ProtocolConfig, noise: NoiseConfig, space: FockSpace,
                        steps: int = DEFAULT_STEPS_PER_INTERVAL,
                        keep_runs: bool = False,
                        richardson_check: bool = True) -> EnsembleReport:
    """Ensemble of jittered noisy runs; reports mean and standard error.

    All runs share the initial state and Hamiltonian and differ only in
    their drawn dwell durations, so they evolve as one stacked RK4
    integration.  The seed fully determines the offsets (drawn run-major,
    then cycle, then interval).  With jitter_rel = 0 every run is
    identical and only one member is actually evolved.
    """
    if cfg.variant == DISPERSIVE_ANALYTIC:
        raise ValueError("noisy runs need a numeric variant")
    dt_plus, dt_minus = cfg.resolved_timing()
    nominal = np.array([dt_plus, dt_minus])
    gamma_abs = noise.gamma / dt_plus
    runs = noise.ensemble_size if noise.jitter_rel > 0 else 1

    rng = np.random.default_rng(noise.rng_seed)
    durations = np.clip(
        nominal + _jitter_offsets(rng, noise, cfg.cycles, runs, nominal), 0.0, None
    )
    # one count per column: the whole stack marches together, so the
    # longest draw in a column sets its step count
    counts = _step_counts(durations.max(axis=0), nominal, steps)

    h_mat = protocol_hamiltonian(cfg, space)
    rho0 = initial_state(cfg, space).as_density()
    loss = _loss_for(rho0.shape[0], space.dim)

    if richardson_check and cfg.cycles > 0:
        first = QuantumState(_flip_density(rho0, space.dim), fock_dim=space.dim,
                             kind="density")
        defect = richardson_defect(first, h_mat, gamma_abs,
                                   float(durations[0, 0, 0]), int(counts[0, 0]))
        if defect > RICHARDSON_TOL:
            raise IntegrationFailureError(
                f"halved-step check defect {defect:.3e} exceeds {RICHARDSON_TOL:.1e}; "
                "raise the per-interval step count"
            )

    x_op, p_op, x_sq, p_sq = _lifted_quadratures(space, joint=True)
    stack = np.broadcast_to(rho0, (runs, *rho0.shape)).copy()
    s_curves = np.empty((runs, cfg.cycles + 1))
    s_curves[:, 0] = _batched_s_db(stack, x_op, p_op, x_sq, p_sq)
    for k in range(1, cfg.cycles + 1):
        stack = _flip_batched(stack, space.dim)
        stack = _evolve_batched(stack, h_mat, gamma_abs, durations[:, k - 1, 0],
                                int(counts[k - 1, 0]), loss)
        stack = _flip_batched(stack, space.dim)
        stack = _evolve_batched(stack, h_mat, gamma_abs, durations[:, k - 1, 1],
                                int(counts[k - 1, 1]), loss)
        _check_batched(stack, space.dim, f"after cycle {k}")
        s_curves[:, k] = _batched_s_db(stack, x_op, p_op, x_sq, p_sq)

    if runs < noise.ensemble_size:
        s_curves = np.broadcast_to(s_curves, (noise.ensemble_size, cfg.cycles + 1)).copy()
    mean = s_curves.mean(axis=0)
    if noise.ensemble_size > 1 and noise.jitter_rel > 0:
        stderr = s_curves.std(axis=0, ddof=1) / math.sqrt(noise.ensemble_size)
    else:
        stderr = np.zeros_like(mean)
    return EnsembleReport(
        cfg=cfg,
        noise=noise,
        mean_s_db=mean,
        stderr_s_db=stderr,
        per_run_s_db=s_curves if keep_runs else None,
    )


def sudden_flip_validity(p, t_flip: float) -> float:
    """Dimensionless sudden-flip ratio; well below 1 means flips are sudden.

    The scale separating 'sudden' from 'slow' is
    min(omega_plus, omega_minus)/|omega_plus^2 - omega_minus^2|; this
    returns the flip duration over that scale.
    """
    if t_flip < 0:
        raise ValueError(f"flip duration must be >= 0, got {t_flip}")
    split = abs(p.omega_plus**2 - p.omega_minus**2)
    return t_flip * split / min(p.omega_plus, p.omega_minus)
