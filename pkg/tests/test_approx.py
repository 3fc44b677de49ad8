"""Tests for grids, residual assembly, norms and the convex reformulations."""

from __future__ import annotations

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from passive_bspline.approx import (
    ProblemOptions,
    ResidualSystem,
    SampleGrid,
    TargetSpec,
    assemble,
    build_basis_columns,
    make_grid,
    objective,
    permittivity_view,
    polygon_factor,
    polygonal_modulus,
    to_l1_lp,
    to_l2_problem,
    to_minimax_lp,
)
from passive_bspline.bspline import band_basis, prototype_bspline
from passive_bspline.cauchy import hilbert_pp
from passive_bspline.errors import InvalidArgumentError
from passive_bspline.herglotz import boundary_value
from passive_bspline.solver import solve_lp, solve_nnls

EPS_T = -1 + 0.05j
ABS_ONE_MINUS_EPS = 2.0006249023742555  # |1 - EPS_T|


def toy_system(A_re, A_im, F, w=None):
    A_re = np.atleast_2d(np.asarray(A_re, float))
    M = A_re.shape[0]
    F = np.asarray(F, complex)
    return ResidualSystem(
        x=np.arange(1.0, M + 1), A_re=A_re, A_im=np.atleast_2d(np.asarray(A_im, float)),
        F_re=F.real, F_im=F.imag, weights=np.ones(M) if w is None else np.asarray(w, float),
        dx=1.0, basis=band_basis(0.5, 1.5, 2, 2), n_splines=A_re.shape[1],
    )


@pytest.fixture(scope="module")
def small_fit_system():
    grid = make_grid(1.0, 0.1, 200)
    return assemble(ProblemOptions(N=40), None, grid, TargetSpec.permittivity(EPS_T))


class TestGrid:
    def test_band_01(self):
        g = make_grid(1.0, 0.1, 1000)
        assert g.dx == pytest.approx(0.0004, rel=1e-12)
        assert g.omega_mask.sum() == 250
        pts = g.omega_points
        assert pts.min() > 0.95 and pts.max() < 1.05
        assert pts.min() - 0.95 == pytest.approx(0.0002, rel=1e-9)

    def test_band_03(self):
        g = make_grid(1.0, 0.3, 1000)
        assert g.extended_band == pytest.approx((0.4, 1.6))
        assert g.omega == pytest.approx((0.85, 1.15))

    def test_tiny(self):
        assert make_grid(1.0, 0.1, 8).omega_mask.sum() == 2

    def test_scaled_omega0(self):
        g = make_grid(2.5, 0.2, 16)
        npt.assert_allclose(g.points, 2.5 * make_grid(1.0, 0.2, 16).points, rtol=1e-14)

    @pytest.mark.parametrize("args", [(0, 0.1, 8), (1, 0, 8), (1, 2, 8), (1, 0.1, 12), (1, 0.5, 8), (1, 0.1, 7.5)])
    def test_invalid(self, args):
        with pytest.raises(InvalidArgumentError):
            make_grid(*args)

    def test_grid_validation(self):
        with pytest.raises(InvalidArgumentError):
            SampleGrid(np.array([1.0, 0.5]), np.array([True, True]), (0.0, 2.0), (0.0, 2.0))
        with pytest.raises(InvalidArgumentError):
            SampleGrid(np.array([0.5, 1.0]), np.array([False, False]), (0.0, 2.0), (0.0, 2.0))


class TestTarget:
    def test_permittivity(self):
        t = TargetSpec.permittivity(EPS_T)
        npt.assert_allclose(t([1.0, 2.0]), [EPS_T, 2 * EPS_T])

    def test_negative_herglotz(self):
        t = TargetSpec("herglotz-negative", h0=lambda x: 2 * x, b1_0=2.0)
        assert t(1.5) == -3.0

    def test_tabulated(self):
        t = TargetSpec("tabulated", x=[0.0, 1.0], values=[0.0, 1 + 1j])
        assert t(0.5) == pytest.approx(0.5 + 0.5j)
        with pytest.raises(InvalidArgumentError):
            t(2.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(kind="permittivity"),
            dict(kind="permittivity", eps_t=complex(np.nan, 0)),
            dict(kind="herglotz-negative"),
            dict(kind="herglotz-negative", h0=abs, b1_0=-1.0),
            dict(kind="tabulated", x=[1.0, 0.0], values=[1, 2]),
            dict(kind="tabulated", x=[0.0, 1.0], values=[1, np.inf]),
            dict(kind="other"),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            TargetSpec(**kwargs)


class TestOptions:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(p=3), dict(m=0), dict(N=0), dict(K=6), dict(K=9), dict(fix_b1=-1.0), dict(weight="x")],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            ProblemOptions(**kwargs)

    @pytest.mark.parametrize("p, expected", [("inf", np.inf), (1, 1), (2.0, 2)])
    def test_p_parsed(self, p, expected):
        assert ProblemOptions(p=p).p == expected


class TestColumns:
    def test_single_hat(self):
        basis = band_basis(0.5, 1.5, 2, 2)
        x = np.array([0.7, 1.0, 1.3])
        A_im, A_re = build_basis_columns(basis, x)
        hat = prototype_bspline(2, 0.5).shifted(0.5)
        H = hilbert_pp(hat)
        npt.assert_allclose(A_im[:, 0], hat(x) + hat(-x))
        npt.assert_allclose(A_re[:, 0], H(x) - H(-x), atol=1e-14)

    def test_far_field_column(self):
        basis = band_basis(0.5, 1.5, 2, 2)
        x = np.array([50.0])
        _, A_re = build_basis_columns(basis, x)
        # hat of mass 0.5 at 1: (mass/pi)(1/(1-x) - 1/(1+x)) to leading order
        approx = 0.5 / np.pi * (1 / (1 - 50) - 1 / (1 + 50))
        assert A_re[0, 0] == pytest.approx(approx, rel=1e-3)

    def test_support_on_positive_axis(self):
        with pytest.raises(InvalidArgumentError):
            build_basis_columns(band_basis(-1.0, 1.0, 4, 2), np.array([0.5]))


class TestAssemble:
    def test_zero_variables_residual(self):
        grid = make_grid(1.0, 0.1, 1000)
        s = assemble(ProblemOptions(N=50), None, grid, TargetSpec.permittivity(EPS_T))
        assert s.n_vars == 49 + 1
        wr = s.weighted_residuals(np.zeros(s.n_vars))
        npt.assert_allclose(np.abs(wr), ABS_ONE_MINUS_EPS, rtol=1e-14)
        assert ABS_ONE_MINUS_EPS == pytest.approx(2.000625, abs=1e-6)

    def test_zero_target_zero_residual(self):
        grid = make_grid(1.0, 0.1, 80)
        s = assemble(ProblemOptions(N=10, fix_b1=0.0), None, grid, np.zeros(20))
        npt.assert_array_equal(s.residuals(np.zeros(s.n_vars)), 0)

    def test_free_slope_and_atom_columns(self):
        grid = make_grid(1.0, 0.2, 80)
        s = assemble(ProblemOptions(N=10, fix_b1=None), None, grid, TargetSpec.permittivity(EPS_T))
        assert (s.b1_index, s.atom_index, s.n_vars) == (9, 10, 11)
        npt.assert_allclose(s.A_re[:, 9], s.x)
        npt.assert_allclose(s.A_re[:, 10], -1 / s.x)
        npt.assert_array_equal(s.A_im[:, 9:], 0)

    def test_no_atom(self):
        grid = make_grid(1.0, 0.2, 80)
        s = assemble(ProblemOptions(N=10, allow_origin_atom=False), None, grid, TargetSpec.permittivity(EPS_T))
        assert s.atom_index is None and s.n_vars == 9

    def test_target_shape_checked(self):
        grid = make_grid(1.0, 0.2, 80)
        with pytest.raises(InvalidArgumentError):
            assemble(ProblemOptions(N=10), None, grid, np.zeros(3))
        with pytest.raises(InvalidArgumentError):
            assemble(ProblemOptions(N=10, weight=np.ones(3)), None, grid, np.zeros(20))

    def test_variable_count_checked(self, small_fit_system):
        with pytest.raises(InvalidArgumentError):
            small_fit_system.residuals(np.zeros(3))

    def test_measure_reproduces_h_values(self, small_fit_system):
        s = small_fit_system
        rng = np.random.default_rng(1)
        v = rng.uniform(0, 1, s.n_vars)
        m = s.measure(v)
        assert m.b1 == 1.0
        assert m.origin_weight == pytest.approx(v[-1])
        npt.assert_allclose(boundary_value(m, s.x), s.h_values(v), atol=1e-12)

    def test_split(self, small_fit_system):
        v = np.arange(small_fit_system.n_vars, dtype=float)
        parts = small_fit_system.split(v)
        assert parts["a_minus1"] == -v[-1]
        assert parts["b1"] == 1.0
        npt.assert_array_equal(parts["coeffs"], v[:-1])


class TestObjective:
    def test_zero(self, small_fit_system):
        s = toy_system([[1.0]], [[0.0]], [1.0])
        for p in (1, 2, np.inf):
            assert objective(s, [1.0], p) == 0.0

    def test_constant_residual(self):
        grid = make_grid(1.0, 0.1, 1000)
        s = assemble(ProblemOptions(N=50), None, grid, TargetSpec.permittivity(EPS_T))
        v = np.zeros(s.n_vars)
        assert objective(s, v, np.inf) == pytest.approx(ABS_ONE_MINUS_EPS, rel=1e-14)
        # 250 points of width 0.0004 cover a target set of length 0.1
        assert objective(s, v, 1) == pytest.approx(0.1 * ABS_ONE_MINUS_EPS, rel=1e-12)
        assert objective(s, v, 2) == pytest.approx(np.sqrt(0.1) * ABS_ONE_MINUS_EPS, rel=1e-12)

    def test_weighted_l2_matches_nnls_norm(self, small_fit_system):
        s = small_fit_system
        v = np.random.default_rng(0).uniform(0, 1, s.n_vars)
        prob = to_l2_problem(s)
        assert np.linalg.norm(prob.A @ v - prob.b) == pytest.approx(objective(s, v, 2), rel=1e-12)

    def test_invalid_p(self, small_fit_system):
        with pytest.raises(InvalidArgumentError):
            objective(small_fit_system, np.zeros(small_fit_system.n_vars), 3)


class TestPolygon:
    def test_square(self):
        assert polygonal_modulus(1 + 1j, 4) == pytest.approx(1.0)
        assert polygon_factor(4) == pytest.approx(np.sqrt(0.5))

    def test_axis_exact(self):
        npt.assert_allclose(polygonal_modulus(np.array([2.0, -3j]), 64), [2.0, 3.0], atol=1e-15)

    @pytest.mark.parametrize("K", [2, 5, 3.5])
    def test_invalid(self, K):
        with pytest.raises(InvalidArgumentError):
            polygonal_modulus(1.0, K)


@given(
    re=st.floats(-1e3, 1e3), im=st.floats(-1e3, 1e3), K=st.sampled_from([4, 8, 16, 64, 128])
)
@settings(max_examples=100, deadline=None)
def test_polygonal_modulus_brackets_abs(re, im, K):
    r = complex(re, im)
    t = polygonal_modulus(r, K)
    assert t <= abs(r) * (1 + 1e-12) + 1e-300
    assert t >= abs(r) * polygon_factor(K) * (1 - 1e-12)


class TestPrograms:
    def test_single_column_toy(self):
        s = toy_system([[1.0]], [[0.0]], [-1.0])
        res = solve_lp(to_minimax_lp(s, 8))
        assert res.ok
        assert res.x[0] == pytest.approx(0.0, abs=1e-8)
        assert res.objective == pytest.approx(1.0, abs=1e-8)

    def test_epigraph_single_residual(self):
        # one free-standing residual 0.5: min t with polygonal(0.5) <= t
        s = toy_system(np.zeros((1, 1)), np.zeros((1, 1)), [-0.5])
        res = solve_lp(to_minimax_lp(s, 8))
        assert res.objective == pytest.approx(0.5, abs=1e-8)

    def test_zero_target(self):
        grid = make_grid(1.0, 0.1, 80)
        s = assemble(ProblemOptions(N=8, fix_b1=0.0), None, grid, np.zeros(20))
        res = solve_lp(to_minimax_lp(s, 16))
        assert res.ok
        assert res.objective == pytest.approx(0.0, abs=1e-8)
        npt.assert_allclose(res.x[: s.n_vars], 0.0, atol=1e-8)

    @staticmethod
    def _cone_target(seed):
        # hats supported inside the target set keep the columns well separated
        grid = make_grid(1.0, 0.2, 160)
        basis = band_basis(0.9, 1.1, 8, 2)
        opts = ProblemOptions(N=8, fix_b1=0.0)
        s0 = assemble(opts, basis, grid, np.zeros(40))
        v_star = np.random.default_rng(seed).uniform(0.1, 1, s0.n_vars)
        return assemble(opts, basis, grid, s0.h_values(v_star)), v_star

    @pytest.mark.parametrize("seed", range(3))
    def test_cone_target_recovered_l2(self, seed):
        s, v_star = self._cone_target(seed)
        res = solve_nnls(to_l2_problem(s))
        assert objective(s, res.x, 2) <= 1e-9
        npt.assert_allclose(res.x, v_star, atol=1e-9)

    @pytest.mark.parametrize("seed", range(3))
    def test_cone_target_recovered_minimax(self, seed):
        s, _ = self._cone_target(seed)
        res = solve_lp(to_minimax_lp(s, 64))
        assert res.ok
        assert objective(s, np.maximum(res.x[: s.n_vars], 0), np.inf) <= 1e-9

    def test_minimax_bracket(self, small_fit_system):
        s = small_fit_system
        res = solve_lp(to_minimax_lp(s, 64))
        assert res.ok
        v = np.maximum(res.x[: s.n_vars], 0)
        E = objective(s, v, np.inf)
        t = res.objective
        assert t * (1 - 1e-7) <= E <= t / polygon_factor(64) * (1 + 1e-7)

    def test_l1_program(self, small_fit_system):
        s = small_fit_system
        res = solve_lp(to_l1_lp(s, 64))
        assert res.ok
        v = np.maximum(res.x[: s.n_vars], 0)
        E1 = objective(s, v, 1)
        assert res.objective * (1 - 1e-7) <= E1 <= res.objective / polygon_factor(64) * (1 + 1e-7)
        # the minimax solution is feasible for the L1 problem
        vinf = np.maximum(solve_lp(to_minimax_lp(s, 64)).x[: s.n_vars], 0)
        assert E1 <= objective(s, vinf, 1) / polygon_factor(64) * (1 + 1e-7)

    def test_polygon_order_checked(self, small_fit_system):
        with pytest.raises(InvalidArgumentError):
            to_minimax_lp(small_fit_system, 3)


class TestPermittivityView:
    def test_examples(self):
        x = np.array([0.5, 1.0, 2.0])
        npt.assert_allclose(permittivity_view(x, x), 1.0)
        npt.assert_allclose(permittivity_view((-1 + 0.05j) * x, x), -1 + 0.05j)
        assert permittivity_view(np.array([-0.01]), np.array([1.0]))[0] == -0.01

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            permittivity_view(np.ones(2), np.array([0.0, 1.0]))
        with pytest.raises(InvalidArgumentError):
            permittivity_view(np.ones(3), np.array([1.0, 2.0]))
