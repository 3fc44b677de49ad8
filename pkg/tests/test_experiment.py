"""Tests for the end-to-end fit driver."""

from __future__ import annotations

import numpy as np
import numpy.testing as npt
import pytest

from passive_bspline.approx import TargetSpec
from passive_bspline.bspline import PiecewisePolynomial
from passive_bspline.experiment import density_from_samples, error_of_measure, run_fit
from passive_bspline.herglotz import HerglotzMeasure, bound_chain, sum_rule

TARGET = TargetSpec.permittivity(-1 + 0.05j)


@pytest.fixture(scope="module")
def fit():
    return run_fit(TARGET, 0.1, 40, n_band=400)


class TestRunFit:
    def test_status_and_bound(self, fit):
        assert fit.ok and fit.status == "optimal"
        assert fit.E >= fit.bound
        assert fit.bracket[0] <= fit.E <= fit.bracket[1]
        assert fit.b1 == 1.0 and fit.a_minus1 <= 0
        assert fit.coeffs.shape == (39,)
        assert fit.iterations > 0

    def test_error_reproduced_by_measure(self, fit):
        s = fit.system
        E = error_of_measure(fit.measure(), s.x, TARGET(s.x), s.weights, np.inf)
        assert E == pytest.approx(fit.E, abs=1e-12)

    def test_sum_rule_and_chain(self, fit):
        m = fit.measure()
        lhs, rhs = sum_rule(m, 0)
        assert lhs == pytest.approx(rhs, abs=1e-10)
        report = bound_chain(m, lambda x: 1.0 * np.asarray(x) + 0j, 1.0, fit.grid.omega)
        assert report.holds

    @pytest.mark.parametrize("p", [1, 2])
    def test_other_norms(self, p):
        res = run_fit(TARGET, 0.1, 20, p=p, n_band=200)
        assert res.ok
        assert np.isnan(res.bound)
        s = res.system
        dx = res.grid.dx
        E = error_of_measure(res.measure(), s.x, TARGET(s.x), s.weights, p, dx)
        assert E == pytest.approx(res.E, rel=1e-10)
        assert res.bracket[0] <= res.E * (1 + 1e-12) and res.E <= res.bracket[1] * (1 + 1e-12)

    def test_free_slope_no_worse(self, fit):
        free = run_fit(TARGET, 0.1, 40, n_band=400, fix_b1=None)
        assert free.ok
        assert free.E <= fit.E + 1e-7

    def test_no_atom_no_better(self, fit):
        res = run_fit(TARGET, 0.1, 40, n_band=400, atom=False)
        assert res.a_minus1 == 0.0
        assert res.E >= fit.E - 1e-7


class TestHelpers:
    def test_density_from_samples_exact_for_hats(self):
        x = np.array([0.5, 0.75, 1.0, 1.25, 1.5])
        vals = np.array([0.0, 0.2, 0.7, 0.1, 0.0])
        dens = density_from_samples(x, vals)
        npt.assert_allclose(dens(x), vals, atol=1e-15)
        npt.assert_allclose(dens(-x), vals, atol=1e-15)
        assert dens(0.875) == pytest.approx(0.45)

    @pytest.mark.parametrize("p, expected", [(np.inf, 2.0), (1, 3.0 * 0.5), (2, np.sqrt(5.0 * 0.5))])
    def test_error_of_measure_norms(self, p, expected):
        m = HerglotzMeasure()
        x = np.array([1.0, 2.0])
        F = np.array([1.0, 2.0j])
        assert error_of_measure(m, x, F, np.ones(2), p, dx=0.5) == pytest.approx(expected)

    def test_error_of_zero_density(self):
        m = HerglotzMeasure(density=PiecewisePolynomial([0.5, 1.5], [[0.0]]))
        assert error_of_measure(m, [1.0], [0.0], [1.0]) == 0.0
