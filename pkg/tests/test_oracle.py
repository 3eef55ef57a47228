"""ODE oracle: integration accuracy, residual evaluators, series cross-checks."""

import numpy as np
import pytest

import oracles
from expencil.adjoint import eval_adjoint, solve_adjoint_coefficients
from expencil.errors import StiffnessFailure, ToleranceNotMet
from expencil.model import build_potential, omega
from expencil.oracle import (
    compare,
    integrate_adjoint_ode,
    integrate_ode,
    residual_adjoint,
    residual_l,
)
from expencil.solver import eval_solution, solve_coefficients


class TestIntegration:
    def test_zero_potential_reproduces_exponential(self):
        pot = build_potential(2, [])
        k = 0.5 * np.exp(1j * np.pi / 8)
        grid = np.linspace(0, 5, 11)
        for tau in (0, 1):  # decaying carriers for this k
            sample = integrate_ode(pot, k, tau, grid=grid, rtol=1e-10, atol=1e-14)
            mu = 1j * k * omega(2, tau)
            for d in range(4):
                expect = mu ** d * np.exp(mu * grid)
                rel = np.abs(sample.values[d] - expect) / np.abs(expect)
                assert rel.max() < 1e-8

    def test_tolerance_scaling(self):
        pot = build_potential(1, [(0, 0, 1, 0.3)])
        k = 1 + 1j
        grid = np.linspace(0, 5, 6)
        errs = {}
        for rtol in (1e-6, 1e-9):
            sample = integrate_ode(pot, k, 0, grid=grid, rtol=rtol, atol=1e-14)
            closed = oracles.closed_f(0.3, grid, k, 0, levels=60)
            errs[rtol] = np.max(np.abs(sample.values[0] - closed) / np.abs(closed))
        assert errs[1e-9] * 4 <= errs[1e-6]

    def test_matches_series_one_mode(self):
        pot = build_potential(1, [(0, 0, 1, 0.3)])
        table = solve_coefficients(pot, truncation=25)
        k = 1 + 1j
        grid = np.linspace(0, 5, 21)
        sample = integrate_ode(pot, k, 0, grid=grid, rtol=1e-10, atol=1e-13)
        report = compare(lambda x, d: eval_solution(table, 0, x, k, d), sample)
        assert report.worst_rel < 1e-6

    def test_tail_premise_enforced(self):
        pot = build_potential(1, [(0, 0, 1, 0.3)])
        with pytest.raises(ToleranceNotMet):
            integrate_ode(pot, 1 + 1j, 0, x_far=5.0, rtol=1e-12)

    def test_integrator_failure_surfaces(self, monkeypatch):
        import expencil.oracle as oracle_mod

        class FailedResult:
            success = False
            message = "synthetic breakdown"
            y = np.zeros((2, 0))

        monkeypatch.setattr(oracle_mod, "solve_ivp",
                            lambda *a, **kw: FailedResult())
        with pytest.raises(StiffnessFailure):
            integrate_ode(build_potential(1, []), 1j, 0)

    def test_grid_validation(self):
        pot = build_potential(1, [])
        with pytest.raises(ValueError):
            integrate_ode(pot, 1j, 0, grid=np.array([0.0, 0.0, 1.0]))
        with pytest.raises(ValueError):
            integrate_ode(pot, 1j, 0, grid=np.array([0.0, 40.0]), x_far=30.0)


class TestResidualL:
    def test_zero_potential_plane_wave(self):
        pot = build_potential(2, [])
        k = 0.9 - 0.4j
        for tau in range(4):
            mu = 1j * k * omega(2, tau)
            ev = lambda x, d: mu ** d * np.exp(mu * x)
            assert abs(residual_l(pot, ev, 1.2, k)) < 1e-12

    def test_truncated_series_residual_small(self):
        pot = build_potential(1, [(0, 0, 1, 0.3)])
        table = solve_coefficients(pot, truncation=25)
        k = 1 + 1j
        ev = lambda x, d: eval_solution(table, 0, x, k, d)
        worst = max(abs(residual_l(pot, ev, x, k)) for x in np.linspace(0, 5, 11))
        assert worst < 1e-10

    def test_truncation_inflates_residual(self):
        pot = build_potential(1, [(0, 0, 1, 0.3)])
        coarse = solve_coefficients(pot, truncation=5)
        fine = solve_coefficients(pot, truncation=25)
        k, x = 0.8 + 0.6j, 0.1
        r_coarse = abs(residual_l(pot, lambda xx, d: eval_solution(coarse, 0, xx, k, d), x, k))
        r_fine = abs(residual_l(pot, lambda xx, d: eval_solution(fine, 0, xx, k, d), x, k))
        assert r_coarse > 100 * r_fine
        assert r_coarse < 1e-3

    def test_oracle_self_consistency(self):
        pot = build_potential(2, [(0, 0, 1, 0.05), (1, 1, 2, 0.02j)])
        k = 0.5 * np.exp(1j * np.pi / 8)
        grid = np.linspace(0, 4, 9)
        sample = integrate_ode(pot, k, 1, grid=grid, rtol=1e-9, atol=1e-12)
        ev = sample.evaluator()
        worst = max(abs(residual_l(pot, ev, x, k)) for x in grid)
        assert worst < 10 * 1e-9


class TestAdjoint:
    def test_zero_potential_reversed_carrier(self):
        pot = build_potential(1, [])
        k = 0.8 + 0.7j
        grid = np.linspace(0, 4, 9)
        # exp(-i k w_s x) decays at +inf when Im(k w_s) < 0: s = 1 for this k
        sample = integrate_adjoint_ode(pot, k, 1, grid=grid, rtol=1e-10)
        mu = -1j * k * omega(1, 1)
        rel = np.abs(sample.values[0] - np.exp(mu * grid)) / np.abs(np.exp(mu * grid))
        assert rel.max() < 1e-8

    def test_matches_adjoint_series(self):
        pot = build_potential(1, [(0, 0, 1, 0.3)])
        adj = solve_adjoint_coefficients(pot, truncation=25)
        k = 1 + 1j
        grid = np.linspace(0, 5, 11)
        sample = integrate_adjoint_ode(pot, k, 1, grid=grid, rtol=1e-10, atol=1e-13)
        report = compare(lambda x, d: eval_adjoint(adj, 1, x, k, d), sample)
        assert report.worst_rel < 1e-6

    def test_adjoint_residual_of_series(self):
        pot = build_potential(2, [(0, 0, 1, 0.05), (2, 1, 1, 0.03), (1, 0, 2, -0.02j)])
        adj = solve_adjoint_coefficients(pot, truncation=22)
        k = 0.55 * np.exp(1j * np.pi / 8)
        for s in range(4):
            ev = lambda x, d: eval_adjoint(adj, s, x, k, d)
            worst = max(abs(residual_adjoint(pot, ev, x, k))
                        for x in np.linspace(0, 5, 11))
            assert worst < 1e-8, s

    def test_adjoint_self_consistency(self):
        pot = build_potential(1, [(0, 0, 1, 0.2)])
        k = 0.9 + 0.8j
        grid = np.linspace(0, 4, 9)
        sample = integrate_adjoint_ode(pot, k, 1, grid=grid, rtol=1e-9)
        ev = sample.evaluator()
        worst = max(abs(residual_adjoint(pot, ev, x, k)) for x in grid)
        assert worst < 10 * 1e-9


class TestCompare:
    def test_identical_inputs_zero_error(self):
        pot = build_potential(1, [])
        k = 0.6 + 0.9j
        grid = np.linspace(0, 3, 7)
        sample = integrate_ode(pot, k, 0, grid=grid, rtol=1e-9)
        report = compare(lambda x, d: sample.values[d], sample)
        assert report.worst_abs == 0.0

    def test_mid_spectrum_contamination_budget(self):
        # m=2: the less-decaying carrier picks up error ~ rtol * exp(delta * x_far)
        pot = build_potential(2, [(0, 0, 1, 0.05), (1, 1, 1, 0.04j)])
        table = solve_coefficients(pot, truncation=25)
        k = 0.5 * np.exp(1j * np.pi / 8)
        grid = np.linspace(0, 5, 11)
        best = integrate_ode(pot, k, 1, grid=grid, rtol=1e-11, atol=1e-14)
        rep_best = compare(lambda x, d: eval_solution(table, 1, x, k, d), best)
        assert rep_best.worst_rel < 1e-8
        mid = integrate_ode(pot, k, 0, grid=grid, rtol=1e-11, atol=1e-14)
        rep_mid = compare(lambda x, d: eval_solution(table, 0, x, k, d), mid)
        assert rep_mid.worst_rel < 1e-6
