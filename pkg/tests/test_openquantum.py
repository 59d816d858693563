"""Tests for the zero-temperature photon-loss channel and jitter ensembles.

Decay oracle: under H = omega*n and loss rate gamma the mean photon
number of any initial state decays as e^{-gamma*t}; that closed form
pins the integrator before anything protocol-shaped runs on top of it.
"""

import math

import numpy as np
import pytest

from rabisqueeze.hilbert import (
    FockSpace,
    QuantumState,
    expectation_real,
    fock_state,
    lift_field,
    number_operator,
    product_state,
)
from rabisqueeze.linalg import expm_hermitian_propagator
from rabisqueeze.model import ModelParams, dispersive_ground_state, h_disp
from rabisqueeze.openquantum import (
    EnsembleReport,
    IntegrationFailureError,
    NoiseConfig,
    lindblad_evolve,
    richardson_defect,
    run_jitter_ensemble,
    run_noisy_protocol,
    sudden_flip_validity,
)
from rabisqueeze.protocol import (
    DISPERSIVE_NUMERIC,
    RABI_NUMERIC,
    ProtocolConfig,
    run_dispersive_numeric,
    run_rabi_numeric,
)


def loss_free_config(params, cycles, variant=DISPERSIVE_NUMERIC):
    return ProtocolConfig(params=params, cycles=cycles, variant=variant)


class TestLindbladEvolve:
    def test_photon_number_decay_oracle(self):
        space = FockSpace(12)
        rho = fock_state(1, space).as_density()
        state = QuantumState(rho, fock_dim=space.dim, kind="density")
        gamma, t = 0.3, 2.0
        out = lindblad_evolve(
            state, number_operator(space), gamma=gamma, t=t, steps=400
        )
        n_mean = expectation_real(out, number_operator(space))
        assert n_mean == pytest.approx(math.exp(-gamma * t), abs=1e-6)

    def test_zero_rate_matches_unitary_evolution(self, params, small_space):
        pure = dispersive_ground_state(params, small_space)
        h = h_disp(params, small_space)
        t = params.dt_plus
        evolved = lindblad_evolve(
            QuantumState(pure.as_density(), fock_dim=small_space.dim, kind="density"),
            h, gamma=0.0, t=t, steps=200,
        )
        u = expm_hermitian_propagator(h, t)
        reference = np.outer(u @ pure.data, (u @ pure.data).conj())
        assert np.abs(evolved.data - reference).max() <= 1e-8

    def test_joint_vacuum_is_near_fixed_point(self, params, small_space):
        # |0>|down> under the dispersive Hamiltonian with loss moves only
        # by the small squeezing drift, bounded by e^{2 r_minus} - 1
        vac = product_state(fock_state(0, small_space), "down")
        state = QuantumState(
            vac.as_density(), fock_dim=small_space.dim, kind="density"
        )
        h = h_disp(params, small_space)
        gamma = 0.01 / params.dt_plus
        out = lindblad_evolve(state, h, gamma=gamma, t=params.dt_plus, steps=200)
        drift = np.abs(out.data - state.data).max()
        assert drift <= math.exp(2 * abs(params.r_minus)) - 1.0

    def test_trace_and_hermiticity_preserved(self, params, small_space):
        state = QuantumState(
            dispersive_ground_state(params, small_space).as_density(),
            fock_dim=small_space.dim, kind="density",
        )
        h = h_disp(params, small_space)
        out = lindblad_evolve(state, h, gamma=0.5, t=1.0, steps=300)
        assert abs(np.trace(out.data).real - 1.0) <= 1e-7
        assert np.abs(out.data - out.data.conj().T).max() == 0.0
        assert out.min_eigenvalue() >= -1e-7

    def test_argument_validation(self, params, small_space):
        state = QuantumState(
            fock_state(0, small_space).as_density(),
            fock_dim=small_space.dim, kind="density",
        )
        n = number_operator(small_space)
        with pytest.raises(ValueError):
            lindblad_evolve(state, n, gamma=-0.1, t=1.0)
        with pytest.raises(ValueError):
            lindblad_evolve(state, n, gamma=0.1, t=-1.0)
        with pytest.raises(IntegrationFailureError):
            lindblad_evolve(state, n, gamma=0.1, t=1.0, steps=0)
        with pytest.raises(ValueError):
            lindblad_evolve(fock_state(0, small_space), n, gamma=0.1, t=1.0)

    def test_richardson_defect_is_small_at_default_resolution(self, params, small_space):
        state = QuantumState(
            dispersive_ground_state(params, small_space).as_density(),
            fock_dim=small_space.dim, kind="density",
        )
        defect = richardson_defect(
            state, h_disp(params, small_space),
            gamma=0.01 / params.dt_plus, t=params.dt_plus, steps=60,
        )
        assert defect < 1e-6


class TestNoisyProtocol:
    def test_noiseless_limit_matches_pure_state_runners(self, params, small_space):
        noise = NoiseConfig(gamma=0.0)
        for variant, runner in (
            (DISPERSIVE_NUMERIC, run_dispersive_numeric),
            (RABI_NUMERIC, run_rabi_numeric),
        ):
            cfg = loss_free_config(params, cycles=3, variant=variant)
            noisy = run_noisy_protocol(cfg, noise, small_space)
            pure = runner(cfg, small_space)
            diff = np.abs(noisy.s_db_curve() - pure.s_db_curve()).max()
            assert diff <= 1e-6, variant

    def test_loss_reduces_squeezing_every_cycle(self, params, small_space):
        cfg = loss_free_config(params, cycles=5)
        noisy = run_noisy_protocol(cfg, NoiseConfig(gamma=0.01), small_space, steps=60)
        pure = run_dispersive_numeric(cfg, small_space)
        noisy_curve = noisy.s_db_curve()[1:]
        pure_curve = pure.s_db_curve()[1:]
        assert np.all(noisy_curve < pure_curve)

    def test_final_state_is_valid_density(self, params, small_space):
        cfg = loss_free_config(params, cycles=4)
        trace = run_noisy_protocol(cfg, NoiseConfig(gamma=0.01), small_space, steps=60)
        final = trace.final_state
        assert final.is_density and final.is_joint
        assert abs(np.trace(final.data).real - 1.0) <= 1e-7
        assert final.min_eigenvalue() >= -1e-7

    def test_rejects_analytic_variant(self, params, small_space):
        cfg = ProtocolConfig(params=params, cycles=2)
        with pytest.raises(ValueError):
            run_noisy_protocol(cfg, NoiseConfig(), small_space)

    def test_too_coarse_integration_fails_loudly(self, params, small_space):
        cfg = loss_free_config(params, cycles=1)
        with pytest.raises(IntegrationFailureError):
            run_noisy_protocol(cfg, NoiseConfig(gamma=0.01), small_space, steps=2)


class TestNoiseConfig:
    def test_defaults(self):
        noise = NoiseConfig()
        assert noise.gamma == 0.01
        assert noise.jitter_rel == 0.0
        assert noise.ensemble_size == 100
        assert noise.jitter_per_interval

    def test_validation(self):
        with pytest.raises(ValueError):
            NoiseConfig(gamma=-0.01)
        with pytest.raises(ValueError):
            NoiseConfig(jitter_rel=-0.1)
        with pytest.raises(ValueError):
            NoiseConfig(ensemble_size=0)


class TestJitterEnsemble:
    def test_zero_jitter_collapses_to_single_run(self, params, small_space):
        cfg = loss_free_config(params, cycles=2)
        noise = NoiseConfig(gamma=0.01, jitter_rel=0.0, ensemble_size=8)
        report = run_jitter_ensemble(cfg, noise, small_space, steps=60, keep_runs=True)
        assert np.all(report.stderr_s_db == 0.0)
        assert report.per_run_s_db.shape == (8, 3)
        assert np.all(report.per_run_s_db == report.per_run_s_db[0])
        single = run_noisy_protocol(cfg, noise, small_space, steps=60)
        assert np.abs(report.mean_s_db - single.s_db_curve()).max() <= 1e-9

    def test_same_seed_is_bit_identical(self, params, small_space):
        cfg = loss_free_config(params, cycles=2)
        noise = NoiseConfig(gamma=0.01, jitter_rel=0.05, ensemble_size=6, rng_seed=7)
        first = run_jitter_ensemble(cfg, noise, small_space, steps=40)
        second = run_jitter_ensemble(cfg, noise, small_space, steps=40)
        assert np.array_equal(first.mean_s_db, second.mean_s_db)
        assert np.array_equal(first.stderr_s_db, second.stderr_s_db)

    def test_different_seeds_differ(self, params, small_space):
        cfg = loss_free_config(params, cycles=1)
        base = dict(gamma=0.01, jitter_rel=0.05, ensemble_size=6)
        a = run_jitter_ensemble(cfg, NoiseConfig(rng_seed=1, **base), small_space, steps=40)
        b = run_jitter_ensemble(cfg, NoiseConfig(rng_seed=2, **base), small_space, steps=40)
        assert not np.array_equal(a.mean_s_db, b.mean_s_db)

    def test_per_run_draw_mode(self, params, small_space):
        cfg = loss_free_config(params, cycles=2)
        per_interval = NoiseConfig(gamma=0.01, jitter_rel=0.05, ensemble_size=6)
        per_run = NoiseConfig(
            gamma=0.01, jitter_rel=0.05, ensemble_size=6, jitter_per_interval=False
        )
        a = run_jitter_ensemble(cfg, per_interval, small_space, steps=40)
        b = run_jitter_ensemble(cfg, per_run, small_space, steps=40)
        assert a.mean_s_db.shape == b.mean_s_db.shape == (3,)
        assert not np.array_equal(a.mean_s_db, b.mean_s_db)

    def test_wild_jitter_draws_are_clamped_not_fatal(self, params):
        # sigma = 5 * dt guarantees negative raw durations in the sample
        cfg = loss_free_config(params, cycles=2)
        space = FockSpace(20)
        noise = NoiseConfig(gamma=0.01, jitter_rel=5.0, ensemble_size=4, rng_seed=3)
        report = run_jitter_ensemble(cfg, noise, space, steps=40)
        assert np.all(np.isfinite(report.mean_s_db))

    def test_report_shape_and_cycles(self, params, small_space):
        cfg = loss_free_config(params, cycles=3)
        noise = NoiseConfig(gamma=0.01, jitter_rel=0.02, ensemble_size=5)
        report = run_jitter_ensemble(cfg, noise, small_space, steps=40)
        assert isinstance(report, EnsembleReport)
        assert report.cycles == 3
        assert report.mean_s_db.shape == (4,)
        assert report.stderr_s_db.shape == (4,)
        assert report.per_run_s_db is None

    def test_large_jitter_degrades_mean_squeezing(self, params, small_space):
        cfg = loss_free_config(params, cycles=5)
        lossy = NoiseConfig(gamma=0.01, jitter_rel=0.0, ensemble_size=1)
        jittered = NoiseConfig(gamma=0.01, jitter_rel=0.1, ensemble_size=40)
        clean = run_jitter_ensemble(cfg, lossy, small_space, steps=60)
        noisy = run_jitter_ensemble(cfg, jittered, small_space, steps=60)
        assert noisy.mean_s_db[-1] < clean.mean_s_db[-1]

    def test_doubling_ensemble_size_is_statistically_stable(self, params):
        space = FockSpace(24)
        cfg = loss_free_config(params, cycles=10)
        half = NoiseConfig(gamma=0.01, jitter_rel=0.1, ensemble_size=50)
        full = NoiseConfig(gamma=0.01, jitter_rel=0.1, ensemble_size=100)
        a = run_jitter_ensemble(cfg, half, space, steps=40)
        b = run_jitter_ensemble(cfg, full, space, steps=40)
        assert abs(a.mean_s_db[-1] - b.mean_s_db[-1]) < 2.0 * a.stderr_s_db[-1]

    def test_percent_level_jitter_shifts_mean_by_under_one_percent(self, params, small_space):
        # the physically meaningful reading of "1% timing error has little
        # effect": the ensemble mean stays within 1% relative of the
        # loss-only curve after 10 cycles
        cfg = loss_free_config(params, cycles=10)
        lossy = NoiseConfig(gamma=0.01, jitter_rel=0.0, ensemble_size=1)
        jittered = NoiseConfig(gamma=0.01, jitter_rel=0.01, ensemble_size=30)
        clean = run_jitter_ensemble(cfg, lossy, small_space, steps=60)
        noisy = run_jitter_ensemble(cfg, jittered, small_space, steps=60)
        rel = abs(noisy.mean_s_db[-1] - clean.mean_s_db[-1]) / clean.mean_s_db[-1]
        assert rel < 0.01


class TestSuddenFlipDiagnostic:
    def test_zero_time_is_zero(self, params):
        assert sudden_flip_validity(params, 0.0) == 0.0

    def test_reference_bound_value(self, params):
        # min(omega_pm)/|omega_plus^2 - omega_minus^2| = 0.992472/0.03
        bound = params.omega_minus / abs(params.omega_plus**2 - params.omega_minus**2)
        assert bound == pytest.approx(33.0824, abs=1e-4)
        assert sudden_flip_validity(params, bound) == pytest.approx(1.0, abs=1e-12)
        assert sudden_flip_validity(params, 1.0) == pytest.approx(1.0 / bound, abs=1e-12)

    def test_linear_in_flip_duration(self, params):
        assert sudden_flip_validity(params, 0.4) == pytest.approx(
            2.0 * sudden_flip_validity(params, 0.2), rel=1e-12
        )

    def test_frequency_split_scales_with_coupling_squared(self):
        p1 = ModelParams.from_ratios(g_over_omega=0.1, delta_over_omega=2.0)
        p2 = ModelParams.from_ratios(g_over_omega=0.2, delta_over_omega=2.0)
        split1 = p1.omega_plus**2 - p1.omega_minus**2
        split2 = p2.omega_plus**2 - p2.omega_minus**2
        assert split2 == pytest.approx(4.0 * split1, rel=1e-12)

    def test_negative_time_rejected(self, params):
        with pytest.raises(ValueError):
            sudden_flip_validity(params, -0.1)
