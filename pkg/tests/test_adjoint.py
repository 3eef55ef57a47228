"""Adjoint solutions: carrier reversal, m=1 swap symmetry, bilinear identity."""

import numpy as np
import pytest

from expencil.adjoint import eval_adjoint, solve_adjoint_coefficients
from expencil.model import build_potential, omega
from expencil.solver import eval_solution, series_diagnostics, solve_coefficients


class TestZeroPotential:
    def test_tables_vanish_and_carrier_reversed(self):
        table = solve_adjoint_coefficients(build_potential(2, []), truncation=4)
        assert np.all(table.vpoly == 0) and np.all(table.vpole == 0)
        k, x = 0.7 - 0.2j, 1.3
        for s in range(4):
            w = omega(2, s)
            assert eval_adjoint(table, s, x, k) == pytest.approx(
                np.exp(-1j * k * w * x), rel=1e-12)

    def test_derivative_factor(self):
        table = solve_adjoint_coefficients(build_potential(1, []), truncation=3)
        k, x = 1.1 + 0.6j, 0.8
        for s in (0, 1):
            w = omega(1, s)
            got = eval_adjoint(table, s, x, k, d=2)
            assert got == pytest.approx((-1j * k * w) ** 2 * np.exp(-1j * k * w * x),
                                        rel=1e-12)


class TestOrderOneSwap:
    """For m=1 and a gamma=0 potential the adjoint equation IS the direct
    equation, so phi_s must coincide with the direct solution whose carrier
    points the same way: phi_0 = f_1 and phi_1 = f_0."""

    def test_tables_coincide_after_reindexing(self):
        pot = build_potential(1, [(0, 0, 1, 0.3)])
        fwd = solve_coefficients(pot, truncation=15)
        adj = solve_adjoint_coefficients(pot, truncation=15)
        for s in (0, 1):
            other = (s + 1) % 2
            assert np.allclose(adj.vpoly[s], fwd.vpoly[other], atol=1e-15)
            assert np.allclose(adj.vpole[s], fwd.vpole[other], atol=1e-15)

    def test_values_coincide(self):
        pot = build_potential(1, [(0, 0, 1, 0.3)])
        fwd = solve_coefficients(pot, truncation=20)
        adj = solve_adjoint_coefficients(pot, truncation=20)
        xs = np.linspace(0, 3, 5)
        for k in (0.8 + 0.5j, -1.2 + 0.3j):
            assert np.allclose(eval_adjoint(adj, 0, xs, k),
                               eval_solution(fwd, 1, xs, k), rtol=1e-13)
            assert np.allclose(eval_adjoint(adj, 1, xs, k),
                               eval_solution(fwd, 0, xs, k), rtol=1e-13)


class TestBilinearIdentity:
    """sum_s i w_s phi_s f_s^(j) = (-1)^m 2m k^{2m-1} delta(j, 2m-1), in x."""

    @pytest.mark.parametrize("m,rows,tol", [
        (1, [(0, 0, 1, 0.3)], 1e-9),
        (1, [(0, 0, 1, 0.2), (0, 1, 2, 0.05j)], 1e-9),
        (2, [(0, 0, 1, 0.05), (1, 1, 1, 0.04j), (2, 0, 2, -0.03),
             (0, 2, 1, 0.02), (2, 1, 1, 0.01j)], 1e-8),
    ])
    def test_identity_on_grid(self, m, rows, tol):
        pot = build_potential(m, rows)
        fwd = solve_coefficients(pot, truncation=22)
        adj = solve_adjoint_coefficients(pot, truncation=22)
        xs = np.linspace(0.0, 4.0, 9)
        for k in (0.8 + 0.45j, -0.6 + 0.9j, 1.3 - 0.55j):
            for j in range(2 * m):
                acc = np.zeros(xs.shape, dtype=complex)
                for s in range(2 * m):
                    w = omega(m, s)
                    acc += 1j * w * eval_adjoint(adj, s, xs, k) \
                        * eval_solution(fwd, s, xs, k, d=j)
                expect = ((-1) ** m) * 2 * m * k ** (2 * m - 1) \
                    if j == 2 * m - 1 else 0.0
                scale = max(1.0, abs(k) ** (2 * m - 1))
                assert np.max(np.abs(acc - expect)) < tol * scale, (j, k)


class TestDiagnosticsReuse:
    def test_adjoint_tables_decay(self):
        pot = build_potential(1, [(0, 0, 1, 0.3)])
        adj = solve_adjoint_coefficients(pot, truncation=24)
        diag = series_diagnostics(adj)
        assert diag.decaying
        assert diag.max_tail_ratio < 0.5
