"""End-to-end passive fits of a permittivity target on a relative band.

:func:`run_fit` builds the sample grid and basis for one ``(B, N)`` pair,
solves the chosen norm problem and collects everything needed for
reporting: the error ``E``, the polygon bracket, the origin atom and a
:class:`~passive_bspline.herglotz.HerglotzMeasure` that reproduces the fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .approx import (
    ProblemOptions,
    ResidualSystem,
    SampleGrid,
    TargetSpec,
    assemble,
    make_grid,
    objective,
    polygon_factor,
    polygonal_modulus,
    to_l1_lp,
    to_l2_problem,
    to_minimax_lp,
)
from .bspline import PiecewisePolynomial
from .herglotz import HerglotzMeasure, boundary_value, metamaterial_bound
from .solver import SolveResult, solve_lp, solve_nnls

__all__ = ["FitResult", "run_fit", "error_of_measure", "density_from_samples"]


@dataclass(frozen=True, eq=False)
class FitResult:
    B: float
    N: int
    p: float
    E: float
    bracket: tuple[float, float]
    bound: float
    system: ResidualSystem
    grid: SampleGrid
    v: np.ndarray
    solve: SolveResult
    target: TargetSpec

    @property
    def status(self) -> str:
        return self.solve.status

    @property
    def ok(self) -> bool:
        return self.solve.ok

    @property
    def iterations(self) -> int:
        return self.solve.iterations

    @property
    def a_minus1(self) -> float:
        return self.system.split(self.v)["a_minus1"]

    @property
    def b1(self) -> float:
        return self.system.split(self.v)["b1"]

    @property
    def coeffs(self) -> np.ndarray:
        return self.system.split(self.v)["coeffs"]

    def measure(self) -> HerglotzMeasure:
        return self.system.measure(self.v)


def run_fit(
    target: TargetSpec,
    B: float,
    N: int,
    *,
    omega0: float = 1.0,
    m: int = 2,
    p=np.inf,
    K: int = 64,
    n_band: int = 1000,
    weight="1/x",
    atom: bool = True,
    fix_b1: float | None = 1.0,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> FitResult:
    """Fit ``target`` on ``omega0 * [1 - B/2, 1 + B/2]`` with ``N`` band subintervals.

    ``E`` is the weighted ``L^p`` error of the returned variables.  For the
    linear programs the bracket is ``[T, T / cos(pi/K)]`` where ``T`` is the
    polygonal objective of the returned point (the LP objective of a
    feasible point); the exact error always lies inside it.  For ``p = 2``
    the bracket collapses to ``[E, E]``.
    """
    opts = ProblemOptions(p=p, weight=weight, m=m, N=N, fix_b1=fix_b1, allow_origin_atom=atom, K=K)
    grid = make_grid(omega0, B, n_band)
    system = assemble(opts, None, grid, target)
    p = opts.p
    if p == 2:
        res = solve_nnls(to_l2_problem(system), tol=tol)
        v = np.maximum(res.x, 0.0)
        E = objective(system, v, 2)
        bracket = (E, E)
    else:
        lp = to_minimax_lp(system, K) if p == np.inf else to_l1_lp(system, K)
        res = solve_lp(lp, tol=tol, max_iter=max_iter)
        n = system.n_vars
        v = np.maximum(res.x[:n], 0.0)
        E = objective(system, v, p)
        if p == np.inf:
            T = float(np.max(polygonal_modulus(system.weighted_residuals(v), K)))
        else:
            T = float(np.sum(system.weights * polygonal_modulus(system.residuals(v), K)) * system.dx)
        bracket = (T, T / polygon_factor(K))
    # the sum-rule bound constrains the sup-norm error only
    bound = np.nan
    if target.kind == "permittivity" and p == np.inf:
        eps_inf = fix_b1 if fix_b1 is not None else 1.0
        try:
            bound = metamaterial_bound(eps_inf, target.eps_t, B)
        except ValueError:
            bound = np.nan
    return FitResult(
        B=float(B), N=int(N), p=p, E=E, bracket=bracket, bound=bound,
        system=system, grid=grid, v=v, solve=res, target=target,
    )


def error_of_measure(measure: HerglotzMeasure, x, F, weights, p=np.inf, dx: float = 1.0) -> float:
    """Weighted ``L^p`` error of a measure's boundary values against ``F``."""
    r = np.abs(boundary_value(measure, np.asarray(x, dtype=float)) - np.asarray(F, dtype=complex))
    w = np.asarray(weights, dtype=float)
    if p == np.inf:
        return float(np.max(w * r))
    if p == 1:
        return float(np.sum(w * r) * dx)
    return float(np.sqrt(np.sum(w * r**2) * dx))


def density_from_samples(x, values) -> PiecewisePolynomial:
    """Even density interpolating ``values`` linearly on positive ``x``.

    Exact for piecewise linear densities sampled at all their knots.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(values, dtype=float)
    slopes = np.diff(f) / np.diff(x)
    half = PiecewisePolynomial(x, np.column_stack([f[:-1], slopes]))
    return half + half.reflected()
