import math

import numpy as np
import pytest

from cavswap import GaussianPacket, SystemParams, swap_configuration
from cavswap.oracle import (
    GridRecurrenceError,
    OracleError,
    OracleGrid,
    OracleResult,
    ScatteringIncompleteError,
    _check_residual,
    build_full_hamiltonian,
    build_hamiltonian,
    default_grid,
    oracle_packet,
    oracle_phase,
    oracle_transfer_check,
    propagate,
    scatter_packet_full,
)
from cavswap.scattering import coupling_amplitude, phase_factor


@pytest.fixture(scope="module")
def lossless_run():
    p = swap_configuration(3.0)
    w = oracle_packet(0.0, 1.0)
    return p, w, oracle_phase(p, default_grid(p, w), w)


class TestGrid:
    def test_centered(self):
        g = OracleGrid.centered(2.0, 10.0, 101, 5.0)
        assert g.k_min == -8.0 and g.k_max == 12.0 and g.spacing == 0.2
        assert 2.0 in g.k
        assert g.n_steps * g.step == pytest.approx(g.t_final)

    @pytest.mark.parametrize(
        "args",
        [(1.0, 1.0, 11, 0.1, 1.0), (0.0, 1.0, 10, 0.1, 1.0), (0.0, 1.0, 1, 0.1, 1.0),
         (0.0, 1.0, 11, 0.0, 1.0), (0.0, 1.0, 11, 0.1, -1.0)],
    )
    def test_invalid(self, args):
        with pytest.raises(OracleError):
            OracleGrid(*args)

    def test_recurrence_guard(self):
        OracleGrid(-1.0, 1.0, 201, 0.01, 0.99 * math.pi / 0.01)
        with pytest.raises(GridRecurrenceError):
            OracleGrid(-1.0, 1.0, 201, 0.01, math.pi / 0.01)

    def test_refined(self):
        g = OracleGrid.centered(0.0, 5.0, 51, 3.0).refined(4)
        assert g.n_modes == 201 and g.k_min == -5.0 and g.k_max == 5.0

    def test_must_bracket_resonance(self):
        g = OracleGrid(1.0, 3.0, 21, 0.01, 1.0)
        with pytest.raises(OracleError):
            build_hamiltonian(swap_configuration(1.0), g)


class TestHamiltonian:
    def test_uncoupled_is_diagonal(self):
        h = build_hamiltonian(SystemParams(gamma=0.3), OracleGrid.centered(0.0, 5.0, 21, 1.0)).to_dense()
        assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
        assert h[0, 0] == -0.3j

    def test_hermitian_lossless(self):
        p = SystemParams(delta_e=0.4, lambda_L=2.0, lambda_R=1.0, theta_R=0.7)
        for builder in (build_hamiltonian, build_full_hamiltonian):
            h = builder(p, OracleGrid.centered(0.0, 5.0, 51, 1.0)).to_dense()
            assert np.max(np.abs(h - h.conj().T)) == 0.0

    def test_lossy_diagonal(self):
        p = swap_configuration(2.0, delta_e=0.5, gamma=0.25)
        h = build_hamiltonian(p, OracleGrid.centered(0.0, 5.0, 51, 1.0))
        assert h.diag[0] == 0.5 - 0.25j and not h.lossless

    def test_discrete_lorentzian_sum(self):
        p = SystemParams(kappa=1.0, lambda_L=3.0, lambda_R=4.0)
        errs = []
        for half_span, n in ((50, 501), (500, 5001), (5000, 50001)):
            h = build_hamiltonian(p, OracleGrid.centered(0.0, half_span, n, 0.01))
            total = float(np.sum(np.abs(h.coupling[1:]) ** 2))
            truncated = p.coupling_sq * 2 / math.pi * math.atan(half_span)
            assert total == pytest.approx(truncated, rel=1e-4)
            errs.append(abs(total - p.coupling_sq))
        assert errs[0] > errs[1] > errs[2]
        assert errs[-1] / p.coupling_sq < 2e-4

    def test_full_model_couplings(self):
        p = SystemParams(lambda_L=2.0, lambda_R=1.0, theta_L=0.3, theta_R=-1.0)
        g = OracleGrid.centered(0.0, 5.0, 11, 1.0)
        h = build_full_hamiltonian(p, g)
        root = math.sqrt(g.spacing)
        np.testing.assert_allclose(h.coupling[1:12], coupling_amplitude(g.k, p, "L") * root)
        np.testing.assert_allclose(h.coupling[12:], coupling_amplitude(g.k, p, "R") * root)


class TestPropagate:
    def test_uncoupled_is_exact(self):
        g = OracleGrid.centered(0.0, 5.0, 101, 2.0)
        h = build_hamiltonian(SystemParams(), g)
        psi0 = np.exp(1j * np.arange(102)) / math.sqrt(102)
        res = propagate(psi0, h, g)
        np.testing.assert_array_equal(res.final_amplitudes, psi0[1:])
        np.testing.assert_allclose(res.norm_history, 1.0, atol=1e-15)

    def test_input_checks(self):
        g = OracleGrid.centered(0.0, 5.0, 11, 1.0)
        h = build_hamiltonian(swap_configuration(1.0), g)
        with pytest.raises(OracleError):
            propagate(np.ones(5) / math.sqrt(5), h, g)
        with pytest.raises(OracleError):
            propagate(np.ones(12), h, g)

    def test_norm_conserved_lossless(self, lossless_run):
        norms = lossless_run[2].result.norm_history
        assert np.max(np.abs(norms - norms[0])) < 1e-8

    def test_norm_decays_lossy(self):
        p = swap_configuration(3.0, gamma=0.5)
        w = oracle_packet(0.0, 1.0)
        norms = oracle_phase(p, default_grid(p, w, 20, 2001), w).result.norm_history
        assert np.all(np.diff(norms) <= 1e-15)
        assert norms[-1] < norms[0] - 1e-3

    def test_step_halving(self):
        p = swap_configuration(2.0)
        w = oracle_packet(0.0, 1.0)
        g = OracleGrid.centered(0.0, 10.0, 401, 2 * w.x_0 + 10, dt=0.0025)
        g2 = OracleGrid(g.k_min, g.k_max, g.n_modes, g.dt / 2, g.t_final)
        a = oracle_phase(p, g, w).ratio
        b = oracle_phase(p, g2, w).ratio
        assert np.max(np.abs(a - b)) < 1e-8


class TestOraclePhase:
    def test_uncoupled_ratios_are_one(self):
        p = SystemParams()
        w = oracle_packet(0.0, 1.0)
        cmp = oracle_phase(p, default_grid(p, w, 20, 2001), w)
        assert np.all(cmp.ratio == 1.0)
        assert cmp.max_abs_error == 0.0

    def test_pi_shift_on_resonance(self, lossless_run):
        _, _, cmp = lossless_run
        j = int(np.argmin(np.abs(cmp.k)))
        assert cmp.k[j] == 0.0
        assert abs(cmp.ratio[j] + 1) < 1e-3

    def test_matches_closed_form(self, lossless_run):
        p, _, cmp = lossless_run
        assert cmp.max_abs_error < 1e-3
        np.testing.assert_array_equal(cmp.analytic, phase_factor(cmp.k, p))

    def test_detuned_atom(self):
        p = SystemParams(delta_e=0.7, gamma=0.2, lambda_L=2.0, lambda_R=1.5, theta_L=0.4)
        w = oracle_packet(0.5, 1.0)
        assert oracle_phase(p, default_grid(p, w), w).max_abs_error < 1e-3

    def test_csv_audit(self, lossless_run):
        text = lossless_run[2].to_csv().splitlines()
        assert text[0] == "k,re_ratio,im_ratio,re_analytic,im_analytic,abs_error"
        assert len(text) == lossless_run[2].k.size + 1
        assert all(len(row.split(",")) == 6 for row in text[1:])

    def test_packet_preconditions(self):
        p = swap_configuration(3.0)
        g = OracleGrid.centered(0.0, 10.0, 501, 30.0)
        with pytest.raises(OracleError, match="x_0"):
            oracle_phase(p, g, GaussianPacket(0.0, 1.0, 2.0))
        with pytest.raises(OracleError, match="leaks"):
            oracle_phase(p, OracleGrid.centered(0.0, 10.0, 201, 30.0), GaussianPacket(0.0, 3.0, 5.0))
        with pytest.raises(OracleError, match="t_final"):
            oracle_phase(p, OracleGrid.centered(0.0, 10.0, 501, 12.0), GaussianPacket(0.0, 1.0, 5.0))
        with pytest.raises(OracleError, match="analytic"):
            oracle_phase(p, g, GaussianPacket(0.0, 1.0, 5.0).sample(g.k))

    def test_slow_polariton_flagged(self):
        # far-detuned atom: the atom-like pole is narrow and still populated at t_final
        p = SystemParams(delta_e=10.0, lambda_L=1.0)
        w = GaussianPacket(10.0, 0.5, 10.0)
        with pytest.raises(ScatteringIncompleteError, match="excited population"):
            oracle_phase(p, OracleGrid.centered(0.0, 40.0, 4001, 2 * w.x_0 + 10), w)

    def test_residual_guard(self):
        res = OracleResult(np.zeros(3), np.array([1.0, 2e-4]), np.ones(2), np.arange(2.0), 0j)
        with pytest.raises(ScatteringIncompleteError):
            _check_residual(res)


class TestTransferCheck:
    def test_swap_configuration(self):
        p = swap_configuration(3.0)
        w = oracle_packet(0.0, 1.0)
        check = oracle_transfer_check(p, default_grid(p, w), w)
        assert check.max_deviation < 1e-3
        assert check.oracle.shape == (check.k.size, 2, 2)

    def test_dark_packet_unchanged(self):
        p = swap_configuration(3.0, gamma=0.5)
        w = oracle_packet(0.0, 1.0)
        run = scatter_packet_full(p, default_grid(p, w, 20, 2001), w, 1 / math.sqrt(2), 1 / math.sqrt(2))
        assert np.max(np.abs(run.out_L - run.input_L)) < 1e-6
        assert np.max(np.abs(run.out_R - run.input_R)) < 1e-6

    def test_loss_bookkeeping(self):
        p = swap_configuration(3.0, gamma=0.5)
        w = oracle_packet(0.0, 1.0)
        run = scatter_packet_full(p, default_grid(p, w), w, 1.0, 0.0)
        weight = np.abs(run.input_L) ** 2
        # half of a pure |L;k_L> input lies along the bright vector
        expected = 0.5 * np.sum(weight * (1 - np.abs(phase_factor(run.k, p)) ** 2))
        assert abs((1 - run.result.final_norm) - expected) < 1e-3

    def test_generic_geometry(self):
        p = SystemParams(lambda_L=2.0, lambda_R=1.0, theta_L=0.3, theta_R=-1.0, gamma=0.1)
        w = oracle_packet(0.0, 1.0)
        assert oracle_transfer_check(p, default_grid(p, w), w).max_deviation < 1e-3
