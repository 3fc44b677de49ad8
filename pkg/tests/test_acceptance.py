"""Acceptance criteria 1 to 11.

Each check returns ``(passed, detail)``; the test records one line per
criterion (shown in the terminal summary and printed directly when the
module is executed as a script) and then asserts the outcome.

    pytest tests/test_acceptance.py -v
    python tests/test_acceptance.py
"""

from __future__ import annotations

import sys
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES  # noqa: E402
from oracles import (  # noqa: E402
    lp_vertex_enumeration,
    nnls_enumeration,
    pv_quadrature,
    random_feasible_lp,
    random_piecewise,
)

from passive_bspline.approx import TargetSpec, polygon_factor  # noqa: E402
from passive_bspline.bspline import (  # noqa: E402
    BSplineBasis,
    PiecewisePolynomial,
    band_basis,
    expansion,
    interpolation_coeffs,
    make_partition,
    prototype_bspline,
)
from passive_bspline.cauchy import hilbert_pp, rooftop_hilbert_reference  # noqa: E402
from passive_bspline.experiment import run_fit  # noqa: E402
from passive_bspline.herglotz import (  # noqa: E402
    HerglotzMeasure,
    bound_chain,
    boundary_value,
    eval_upper,
    lower_bound_generic,
    metamaterial_bound,
    stieltjes_invert,
    sum_rule,
    symmetric_spline_density,
)
from passive_bspline.solver import LpStandardForm, NnlsProblem, solve_lp, solve_nnls  # noqa: E402

BS = (0.1, 0.2, 0.3)
NS = (20, 50, 100, 200, 500)
IM_SWEEP = (0.0, 0.05, 0.1, 0.2)
K = 64


def record(n: int, passed: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)


@lru_cache(maxsize=None)
def fit(B: float, N: int, im: float = 0.05):
    return run_fit(TargetSpec.permittivity(complex(-1.0, im)), B, N, m=2, K=K, n_band=1000)


def all_fits():
    keys = [(B, N, 0.05) for B in BS for N in NS] + [(B, 500, im) for B in BS for im in IM_SWEEP if im != 0.05]
    return {k: fit(*k) for k in keys}


def check_1():
    t0 = time.perf_counter()
    roof = prototype_bspline(2, 1.0).shifted(-1.0)
    x = np.linspace(-3.0, 3.0, 10_000)
    x = x[np.min(np.abs(x[:, None] - np.array([-1.0, 0.0, 1.0])[None, :]), axis=1) > 1e-6]
    got = hilbert_pp(roof)(x)
    elapsed = time.perf_counter() - t0
    err = float(np.max(np.abs(got - rooftop_hilbert_reference(x, 1.0))))
    return err <= 1e-10 and elapsed < 1.0, f"roof-top transform: max err {err:.2e} at {x.size} points, {elapsed:.3f} s"


def check_2():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        f = random_piecewise(rng, int(rng.integers(1, 6)), int(rng.integers(0, 5)))
        x = rng.uniform(-3, 3, 6)
        x = x[np.min(np.abs(x[:, None] - f.breakpoints[None, :]), axis=1) > 1e-4]
        H = hilbert_pp(f)(x)
        ref = np.array([pv_quadrature(f, xi) for xi in x]) / np.pi
        worst = max(worst, float(np.max(np.abs(H - ref), initial=0.0)))
    elapsed = time.perf_counter() - t0
    return worst <= 1e-7 and elapsed < 30, f"50 random piecewise polynomials: max err {worst:.2e}, {elapsed:.1f} s"


def random_bspline_measure(rng):
    basis = band_basis(0.5, 1.5, int(rng.integers(6, 16)), int(rng.integers(2, 5)))
    dens = symmetric_spline_density(rng.uniform(0, 1, basis.size), basis)
    return HerglotzMeasure(b1=float(rng.uniform(0, 1)), point_masses=((0.0, float(rng.uniform(0, 0.3))),),
                           density=dens, symmetric=True)


def check_3():
    rng = np.random.default_rng(3)
    m = random_bspline_measure(rng)
    t = m.density.breakpoints
    x = np.sort(rng.uniform(0.55, 1.45, 60))
    x = x[np.min(np.abs(x[:, None] - t[None, :]), axis=1) > 5e-3][:20]
    bv = boundary_value(m, x)
    ys = 10.0 ** -np.arange(1, 6)
    errs = np.array([np.abs(eval_upper(m, x + 1j * y) - bv) for y in ys])
    monotone = bool(np.all(np.diff(errs, axis=0) < 0))
    final = float(errs[-1].max())
    ok = x.size == 20 and monotone and final <= 1e-3
    return ok, f"{x.size} points, monotone={monotone}, max err at y=1e-5 {final:.2e}"


def check_4():
    inside = stieltjes_invert(HerglotzMeasure(point_masses=((0.0, 0.3),)), -1, 1, [1e-2, 1e-4, 1e-6])[-1]
    edge = stieltjes_invert(HerglotzMeasure(point_masses=((1.0, 0.3),)), -1, 1, [1e-2, 1e-4, 1e-6])[-1]
    ok = abs(inside - 0.3) <= 1e-4 and abs(edge - 0.15) <= 1e-4
    return ok, f"interior atom {inside:.7f} (0.3), endpoint atom {edge:.7f} (0.15)"


def check_5():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(20):
        pairs = []
        for xi, w in zip(rng.uniform(0.1, 3, 2), rng.uniform(0, 1, 2)):
            pairs += [(xi, w), (-xi, w)]
        half = random_piecewise(rng, int(rng.integers(1, 4)), int(rng.integers(0, 3)), lo=0.2, hi=2.5)
        half = PiecewisePolynomial(half.breakpoints, np.abs(half.coeffs) * (np.arange(half.coeffs.shape[1]) == 0))
        dens = half + half.reflected()
        m = HerglotzMeasure(b1=float(rng.uniform(0, 2)), point_masses=tuple(pairs) + ((0.0, float(rng.uniform(0.01, 1))),),
                            density=dens, symmetric=True)
        lhs, rhs = sum_rule(m, 0)
        worst = max(worst, abs(lhs - rhs))
    chains_ok, n_chain, worst_ratio = True, 0, np.inf
    for (B, N, im), res in all_fits().items():
        if im != 0.05:
            continue
        rep = bound_chain(res.measure(), lambda x: 1.0 * np.asarray(x) + 0j, 1.0, res.grid.omega)
        chains_ok &= rep.holds
        n_chain += 1
        worst_ratio = min(worst_ratio, rep.middle / rep.lower, rep.upper / rep.middle)
    ok = worst <= 1e-10 and chains_ok
    return ok, f"sum rule max |lhs-rhs| {worst:.1e} on 20 measures; chain holds for {n_chain} fits (min ratio {worst_ratio:.4f})"


def check_6():
    generic = lower_bound_generic(1.0, 0.0, 1.0)
    exact = [2 * (B / 2) / (1 + B / 2) - 0.05 for B in BS]
    got = [metamaterial_bound(1.0, -1 + 0.05j, B) for B in BS]
    err = max(abs(a - b) for a, b in zip(got, exact))
    rounded = [round(v, 6) for v in got]
    ok = generic == 0.5 and err <= 1e-12 and rounded == [0.045238, 0.131818, 0.21087]
    return ok, f"generic {generic}, metamaterial {', '.join(f'{v:.6f}' for v in got)} (max err {err:.1e})"


def convergence_slope(m: int):
    f = lambda x: np.sqrt(np.abs(x - 0.5))  # noqa: E731
    xs = np.union1d(np.linspace(0, 1, 200_001)[:-1], 0.5 + np.array([-1e-9, 0, 1e-9]))
    Ns = 2 ** np.arange(4, 11)
    errs = []
    for N in Ns:
        part = make_partition(0.0, 1.0, int(N), m)
        g = expansion(interpolation_coeffs(f, part), BSplineBasis(part))
        errs.append(float(np.max(np.abs(g(xs) - f(xs)))))
    slope = float(np.polyfit(np.log(Ns), np.log(errs), 1)[0])
    return slope, errs


def check_7():
    slopes = {m: convergence_slope(m)[0] for m in (2, 3, 4)}
    ok = all(-0.65 <= s <= -0.40 for s in slopes.values())
    return ok, "slopes " + ", ".join(f"m={m}: {s:.3f}" for m, s in slopes.items())


def check_8():
    t0 = time.perf_counter()
    E = {(B, N): fit(B, N) for B in BS for N in NS}
    elapsed = time.perf_counter() - t0
    a = all(r.status == "optimal" for r in E.values())
    steps = {B: max(E[B, N2].E - E[B, N1].E for N1, N2 in zip(NS, NS[1:])) for B in BS}
    b = all(s <= 1e-4 for s in steps.values())
    c = all(E[B, 500].E >= E[B, 500].bound for B in BS)
    d = E[0.1, 500].E < E[0.2, 500].E < E[0.3, 500].E
    e = all(abs(E[B, 500].E - E[B, 200].E) <= 0.05 * E[B, 500].E for B in BS)
    table = "; ".join(f"B={B}: " + " ".join(f"{E[B, N].E:.5f}" for N in NS) for B in BS)
    detail = (f"(a) {a} (b) {b} max step {max(steps.values()):+.2e} (c) {c} (d) {d} (e) {e}; "
              f"E(N={','.join(map(str, NS))}) {table}; {elapsed:.1f} s")
    return a and b and c and d and e, detail


def check_9():
    rows, ok = [], True
    for B in BS:
        for im in IM_SWEEP:
            r = fit(B, 500, im)
            ok &= r.ok and r.E >= r.bound
            rows.append(f"B={B} Im={im}: E={r.E:.5f} bound={r.bound:.5f}")
    return ok, "; ".join(rows)


def check_10():
    rng = np.random.default_rng(10)
    lp_worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, 16 - n))
        c, G, h = random_feasible_lp(rng, n, m)
        ref, _ = lp_vertex_enumeration(c, G, h)
        res = solve_lp(LpStandardForm(c=c, G=G, h=h, nonneg=np.ones(n, bool)))
        lp_worst = max(lp_worst, abs(res.objective - ref) if res.ok else np.inf)
    nnls_worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 13))
        A = rng.normal(size=(n + int(rng.integers(0, 6)), n))
        b = rng.normal(size=A.shape[0])
        x_ref, r_ref = nnls_enumeration(A, b)
        res = solve_nnls(NnlsProblem(A, b))
        nnls_worst = max(nnls_worst, abs(res.objective - r_ref), float(np.max(np.abs(res.x - x_ref))))
    ok = lp_worst <= 1e-7 and nnls_worst <= 1e-9
    return ok, f"LP max objective gap {lp_worst:.1e} (100 problems); NNLS max deviation {nnls_worst:.1e} (100 problems)"


def check_11():
    worst_lo, worst_hi, count = np.inf, np.inf, 0
    for r in all_fits().values():
        t = r.solve.objective
        worst_lo = min(worst_lo, r.E - t)
        worst_hi = min(worst_hi, t / polygon_factor(K) - r.E)
        count += 1
    ok = worst_lo >= 0 and worst_hi >= 0
    return ok, f"{count} fits: min(E - t) {worst_lo:.2e}, min(t/cos(pi/K) - E) {worst_hi:.2e}"


CHECKS = {n: globals()[f"check_{n}"] for n in range(1, 12)}


@pytest.mark.parametrize("n", sorted(CHECKS))
def test_criterion(n):
    passed, detail = CHECKS[n]()
    record(n, passed, detail)
    assert passed, detail


if __name__ == "__main__":
    failures = 0
    for n, check in CHECKS.items():
        passed, detail = check()
        record(n, passed, detail)
        failures += not passed
    sys.exit(1 if failures else 0)
