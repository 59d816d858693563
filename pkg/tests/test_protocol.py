"""Tests for the sudden-flip squeezing protocol.

Closed-form oracle at default quarter-period timing: after N cycles the
bare-mode variances are e^{2 r_minus} (omega_plus/omega_minus)^{2N} and
e^{-2 r_minus} (omega_minus/omega_plus)^{2N}.  The numeric runners must
reproduce that; the full-model runner must beat it by roughly a factor
of two in dB per cycle at the reference point.
"""

import math

import numpy as np
import pytest

from rabisqueeze.hilbert import FockSpace, basis_index, product_state, fock_state
from rabisqueeze.model import ModelParams, h_rabi
from rabisqueeze.protocol import (
    DISPERSIVE_ANALYTIC,
    DISPERSIVE_NUMERIC,
    RABI_NUMERIC,
    VARIANTS,
    ProtocolConfig,
    ProtocolTrace,
    flip_qubit,
    heisenberg_one_cycle_ops,
    initial_state,
    protocol_hamiltonian,
    qubit_postselection,
    run_dispersive_analytic,
    run_dispersive_numeric,
    run_protocol,
    run_rabi_numeric,
    timing_scan,
)

S_GROUND_DB = 0.032818847512
S_ONE_CYCLE_DB = 0.163116965028
VAR_P_ONE_CYCLE = 0.963137524269


def expected_variances(p, cycles):
    """The quarter-period variance law, straight from the map coefficients."""
    growth = (p.omega_plus / p.omega_minus) ** (2 * cycles)
    return (
        math.exp(2.0 * p.r_minus) * growth,
        math.exp(-2.0 * p.r_minus) / growth,
    )


class TestOneCycleCoefficients:
    def test_bogoliubov_normalization(self, params):
        ops = heisenberg_one_cycle_ops(params)
        assert ops.u_plus**2 - ops.u_minus**2 == pytest.approx(1.0, abs=1e-12)

    def test_variance_factors(self, params):
        ops = heisenberg_one_cycle_ops(params)
        ratio = params.omega_plus / params.omega_minus
        assert ops.var_x_factor == pytest.approx(ratio**2, abs=1e-12)
        assert ops.var_p_factor == pytest.approx(ratio**-2, abs=1e-12)

    def test_decoupled_limit(self):
        p = ModelParams.from_ratios(g_over_omega=1e-6, delta_over_omega=2.0)
        ops = heisenberg_one_cycle_ops(p)
        assert ops.u_plus == pytest.approx(1.0, abs=1e-9)
        assert ops.u_minus == pytest.approx(0.0, abs=1e-9)


class TestAnalyticRunner:
    def test_initial_report_is_branch_ground(self, params):
        trace = run_dispersive_analytic(ProtocolConfig(params=params, cycles=0))
        v = trace.reports[0].variances
        assert v.var_x == pytest.approx(math.exp(2 * params.r_minus), abs=1e-12)
        assert v.var_p == pytest.approx(math.exp(-2 * params.r_minus), abs=1e-12)
        assert trace.reports[0].s_db == pytest.approx(S_GROUND_DB, abs=1e-9)

    def test_one_cycle_anchor(self, params):
        trace = run_dispersive_analytic(ProtocolConfig(params=params, cycles=1))
        v = trace.reports[-1].variances
        assert v.var_p == pytest.approx(VAR_P_ONE_CYCLE, abs=1e-9)
        assert trace.reports[-1].s_db == pytest.approx(S_ONE_CYCLE_DB, abs=1e-9)

    @pytest.mark.parametrize("cycles", [1, 2, 5, 10, 20])
    def test_variance_law(self, params, cycles):
        trace = run_dispersive_analytic(ProtocolConfig(params=params, cycles=cycles))
        var_x, var_p = expected_variances(params, cycles)
        v = trace.reports[-1].variances
        assert v.var_x == pytest.approx(var_x, rel=1e-9)
        assert v.var_p == pytest.approx(var_p, rel=1e-9)

    def test_squeezing_grows_linearly_in_db(self, params):
        trace = run_dispersive_analytic(ProtocolConfig(params=params, cycles=10))
        curve = trace.s_db_curve()
        per_cycle = 20.0 * math.log10(params.omega_plus / params.omega_minus)
        gains = np.diff(curve)
        assert np.abs(gains - per_cycle).max() <= 1e-9

    def test_half_period_dwell_cancels_squeezing(self, params):
        # dt_plus = pi/omega_plus completes half a period in the raised
        # branch, so one cycle returns the initial variances
        cfg = ProtocolConfig(
            params=params,
            cycles=1,
            timing=(math.pi / params.omega_plus, params.dt_minus),
        )
        trace = run_dispersive_analytic(cfg)
        assert trace.reports[-1].s_db == pytest.approx(
            trace.reports[0].s_db, abs=1e-9
        )


class TestNumericRunners:
    def test_matches_analytic_per_cycle(self, params, space):
        cycles = 3
        numeric = run_dispersive_numeric(
            ProtocolConfig(params=params, cycles=cycles), space
        )
        analytic = run_dispersive_analytic(ProtocolConfig(params=params, cycles=cycles))
        diff = np.abs(numeric.s_db_curve() - analytic.s_db_curve()).max()
        assert diff <= 1e-6

    def test_half_period_dwell_numeric(self, params, space):
        cfg = ProtocolConfig(
            params=params,
            cycles=1,
            variant=DISPERSIVE_NUMERIC,
            timing=(math.pi / params.omega_plus, params.dt_minus),
        )
        trace = run_protocol(cfg, space)
        assert abs(trace.reports[-1].s_db - trace.reports[0].s_db) <= 1e-6

    def test_qubit_returns_to_down_each_cycle(self, params, space):
        trace = run_dispersive_numeric(ProtocolConfig(params=params, cycles=4), space)
        up_amplitudes = trace.final_state.data.reshape(space.dim, 2)[:, 0]
        assert np.abs(up_amplitudes).max() <= 1e-12

    def test_norm_preserved_over_many_cycles(self, params, space):
        trace = run_rabi_numeric(ProtocolConfig(params=params, cycles=20), space)
        assert abs(np.linalg.norm(trace.final_state.data) - 1.0) <= 1e-8

    @pytest.mark.parametrize("variant", VARIANTS)
    def test_squeezing_grows_every_cycle(self, params, space, variant):
        cfg = ProtocolConfig(params=params, cycles=10, variant=variant)
        curve = run_protocol(cfg, space).s_db_curve()
        assert np.all(np.diff(curve) > 0)

    def test_decoupled_full_model_generates_nothing(self, space):
        p = ModelParams(omega=1.0, omega_qubit=3.0, g=0.0)
        trace = run_rabi_numeric(ProtocolConfig(params=p, cycles=5), space)
        assert np.abs(trace.s_db_curve()).max() <= 1e-9

    def test_full_model_outpaces_dispersive(self, params, space):
        # roughly twice the dB per cycle at this operating point
        cycles = 10
        rabi = run_rabi_numeric(ProtocolConfig(params=params, cycles=cycles), space)
        disp = run_dispersive_numeric(ProtocolConfig(params=params, cycles=cycles), space)
        ratio = rabi.reports[-1].s_db / disp.reports[-1].s_db
        assert 1.5 <= ratio <= 2.5

    def test_initial_state_and_hamiltonian_dispatch(self, params, space):
        cfg_rabi = ProtocolConfig(params=params, cycles=1, variant=RABI_NUMERIC)
        assert np.abs(
            protocol_hamiltonian(cfg_rabi, space) - h_rabi(params, space)
        ).max() == 0.0
        state = initial_state(cfg_rabi, space)
        assert abs(np.linalg.norm(state.data) - 1.0) <= 1e-12

    def test_run_protocol_needs_space_for_numeric(self, params):
        cfg = ProtocolConfig(params=params, cycles=1, variant=DISPERSIVE_NUMERIC)
        with pytest.raises(ValueError):
            run_protocol(cfg)


class TestTraceAndConfig:
    def test_trace_shape(self, params):
        trace = run_dispersive_analytic(ProtocolConfig(params=params, cycles=7))
        assert isinstance(trace, ProtocolTrace)
        assert trace.cycles == 7
        assert len(trace.reports) == 8

    def test_elapsed_time(self, params):
        trace = run_dispersive_analytic(ProtocolConfig(params=params, cycles=4))
        expected = 4 * (params.dt_plus + params.dt_minus)
        assert trace.elapsed_time == pytest.approx(expected, abs=1e-12)

    def test_sparse_recording(self, params, space):
        cfg = ProtocolConfig(
            params=params, cycles=3, variant=DISPERSIVE_NUMERIC,
            record_each_cycle=False,
        )
        trace = run_protocol(cfg, space)
        assert trace.reports[1] is None and trace.reports[2] is None
        curve = trace.s_db_curve()
        assert math.isnan(curve[1]) and not math.isnan(curve[-1])

    def test_config_validation(self, params):
        with pytest.raises(ValueError):
            ProtocolConfig(params=params, cycles=-1)
        with pytest.raises(ValueError):
            ProtocolConfig(params=params, cycles=1, variant="heisenberg")
        with pytest.raises(ValueError):
            ProtocolConfig(params=params, cycles=1, timing=(-0.1, 1.0))

    def test_default_timing_is_quarter_period(self, params):
        cfg = ProtocolConfig(params=params, cycles=1)
        assert cfg.resolved_timing() == (params.dt_plus, params.dt_minus)


class TestFlipAndPostselection:
    def test_flip_is_involution(self, space):
        rng = np.random.default_rng(0)
        vec = rng.normal(size=2 * space.dim) + 1j * rng.normal(size=2 * space.dim)
        vec /= np.linalg.norm(vec)
        assert np.array_equal(flip_qubit(flip_qubit(vec, space.dim), space.dim), vec)

    def test_flip_swaps_sectors(self):
        space = FockSpace(4)
        state = product_state(fock_state(0, space), "down")
        flipped = flip_qubit(state.data, space.dim)
        assert flipped[basis_index(0, "up")] == 1.0
        assert flipped[basis_index(0, "down")] == 0.0

    def test_postselection_on_branch_ground(self, params, space):
        from rabisqueeze.model import BRANCH_MINUS, approx_rabi_eigenstate

        outcomes = qubit_postselection(approx_rabi_eigenstate(params, BRANCH_MINUS, space))
        assert outcomes["down"].probability + outcomes["up"].probability == pytest.approx(
            1.0, abs=1e-12
        )
        assert outcomes["down"].probability > 0.99
        # conditioned on down the field is the squeezed vacuum
        v = outcomes["down"].report.variances
        assert v.var_p == pytest.approx(math.exp(-2 * params.r_minus), abs=1e-6)

    def test_postselection_handles_empty_sector(self, params, space):
        trace = run_dispersive_numeric(ProtocolConfig(params=params, cycles=1), space)
        outcomes = qubit_postselection(trace.final_state)
        assert outcomes["down"].probability == pytest.approx(1.0, abs=1e-12)
        assert outcomes["up"].report is None

    def test_postselection_rejects_field_only_states(self, space):
        with pytest.raises(ValueError):
            qubit_postselection(fock_state(0, space))


class TestTimingScan:
    def test_quarter_period_wins(self, params):
        space = FockSpace(40)
        grid = [0.5 * params.dt_plus, params.dt_plus, 1.5 * params.dt_plus]
        pairs = timing_scan(params, space, grid)
        s_values = [s for _, s in pairs]
        assert len(pairs) == 3
        assert s_values[1] == max(s_values)
        assert pairs[1][0] == params.dt_plus
