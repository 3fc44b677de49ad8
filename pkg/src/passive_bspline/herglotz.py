"""Herglotz functions generated by a linear term, atoms and a spline density.

A measure here is ``beta = sum_i w_i delta_{xi_i} + density(xi) dxi`` and the
associated function is

    h(z) = b1 * z + c + sum_i w_i / (xi_i - z) + int density(xi) / (xi - z) dxi.

In symmetric mode ``c = 0`` and ``beta`` is even, so that
``h(-conj(z)) = -conj(h(z))``.  On the real axis

    h(x) = b1 * x + c + sum_i w_i / (xi_i - x) + PV int density / (xi - x) + i*pi*density(x).

The module also provides the auxiliary function of a slit,
``h_delta(z) = (1/pi) Log((z - delta)/(z + delta))``, the composition used to
prove sum-rule lower bounds, and the bounds themselves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .bspline import BSplineBasis, PiecewisePolynomial, expansion, taylor_shift
from .cauchy import cauchy_integral, hilbert_pp
from .errors import InvalidArgumentError, NumericalFailure, PoleError, SingularEvaluationError

__all__ = [
    "HerglotzMeasure",
    "Asymptotics",
    "symmetric_spline_density",
    "eval_upper",
    "boundary_value",
    "stieltjes_invert",
    "sum_rule",
    "aux_hdelta",
    "composed_h1",
    "bound_chain",
    "ChainReport",
    "lower_bound_generic",
    "metamaterial_bound",
]

QUAD_EPSABS = 1e-9
_SYM_RTOL = 1e-10


def _sample_density(f: PiecewisePolynomial, per_piece: int = 9) -> tuple[np.ndarray, np.ndarray]:
    t = f.breakpoints
    s = np.linspace(0.0, 1.0, per_piece)
    x = (t[:-1, None] + np.diff(t)[:, None] * s[None, :]).ravel()
    x = x[x < t[-1]]
    return x, f(x)


@dataclass(frozen=True, eq=False)
class HerglotzMeasure:
    """Generating data ``(b1, c, atoms, density)`` of a Herglotz function.

    Parameters
    ----------
    b1 : float
        Slope of the linear term, ``>= 0``.
    c : float
        Real constant; must be 0 in symmetric mode.
    point_masses : sequence of (location, weight)
        Atoms of the measure, weights ``>= 0``.
    density : PiecewisePolynomial or None
        Absolutely continuous part, ``>= 0``.
    symmetric : bool
        Require an even measure and ``c = 0``.
    """

    b1: float = 0.0
    c: float = 0.0
    point_masses: tuple = ()
    density: PiecewisePolynomial | None = None
    symmetric: bool = False
    atoms_xi: np.ndarray = field(init=False, repr=False)
    atoms_w: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        b1, c = float(self.b1), float(self.c)
        if not (np.isfinite(b1) and np.isfinite(c)):
            raise InvalidArgumentError("b1 and c must be finite")
        if b1 < 0:
            raise InvalidArgumentError("b1 must be nonnegative")
        pm = tuple((float(x), float(w)) for x, w in self.point_masses)
        xi = np.array([p[0] for p in pm], dtype=float)
        w = np.array([p[1] for p in pm], dtype=float)
        if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(w))):
            raise InvalidArgumentError("atom locations and weights must be finite")
        if np.any(w < 0):
            raise InvalidArgumentError("atom weights must be nonnegative")
        dens = self.density
        if dens is not None:
            if not isinstance(dens, PiecewisePolynomial):
                raise InvalidArgumentError("density must be a PiecewisePolynomial")
            _, vals = _sample_density(dens)
            scale = max(np.max(np.abs(dens.coeffs)), 1e-300)
            if np.min(vals) < -1e-12 * scale:
                raise InvalidArgumentError("density must be nonnegative")
        if self.symmetric:
            if c != 0.0:
                raise InvalidArgumentError("symmetric measures require c = 0")
            order = np.lexsort((w, xi))
            mirror = np.lexsort((w, -xi))
            if not (np.allclose(xi[order], -xi[mirror], rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(xi), initial=0.0)))
                    and np.allclose(w[order], w[mirror], rtol=_SYM_RTOL, atol=0)):
                raise InvalidArgumentError("symmetric measures need atoms in +/- pairs or at 0")
            if dens is not None:
                # interior points of the pieces avoid one-sided values at knots
                t = dens.breakpoints
                x = (t[:-1, None] + np.diff(t)[:, None] * np.array([0.25, 0.5, 0.75])).ravel()
                vals = dens(x)
                scale = max(np.max(np.abs(vals)), 1e-300)
                if np.max(np.abs(vals - dens(-x))) > 1e-9 * scale:
                    raise InvalidArgumentError("symmetric measures need an even density")
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "point_masses", pm)
        object.__setattr__(self, "atoms_xi", xi)
        object.__setattr__(self, "atoms_w", w)

    @property
    def origin_weight(self) -> float:
        return float(np.sum(self.atoms_w[self.atoms_xi == 0.0]))

    @property
    def density_mass(self) -> float:
        return 0.0 if self.density is None else self.density.integral()

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.atoms_w)) + self.density_mass

    def asymptotics(self) -> "Asymptotics":
        return asymptotics(self)


@dataclass(frozen=True)
class Asymptotics:
    """Leading coefficients ``h ~ a_m1/z + a_1 z`` at 0 and ``h ~ b1 z + b_m1/z`` at infinity.

    ``a_1`` is ``None`` when the measure has mass at or arbitrarily close to
    the origin.
    """

    a_m1: float
    b1: float
    b_m1: float
    a_1: float | None = None


def symmetric_spline_density(coeffs, basis: BSplineBasis) -> PiecewisePolynomial:
    """Even density ``(1/pi) * sum_n c_n (p_n(x) + p_n(-x))`` for a basis on ``x > 0``."""
    if basis.support[0] < 0:
        raise InvalidArgumentError("basis must be supported on the positive axis")
    f = expansion(coeffs, basis)
    return (f + f.reflected()) * (1.0 / np.pi)


def _check_upper(z):
    za = np.asarray(z, dtype=complex)
    if np.any(~np.isfinite(za)):
        raise InvalidArgumentError("evaluation point must be finite")
    if np.any(za.imag <= 0):
        raise InvalidArgumentError("eval_upper needs Im z > 0")
    return za


def eval_upper(m: HerglotzMeasure, z):
    """``h(z)`` for ``Im z > 0`` (scalar or array)."""
    za = _check_upper(z)
    out = m.b1 * za + m.c
    if m.atoms_w.size:
        out = out + np.sum(m.atoms_w / (m.atoms_xi - za[..., None]), axis=-1)
    if m.density is not None:
        out = out + cauchy_integral(m.density, za)
    return complex(out) if np.ndim(z) == 0 else out


def boundary_value(m: HerglotzMeasure, x):
    """Nontangential boundary value ``h(x + i0)`` for real ``x``.

    Raises :class:`PoleError` at an atom and
    :class:`SingularEvaluationError` at a jump of the density.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xa)):
        raise InvalidArgumentError("evaluation point must be finite")
    flat = xa.reshape(-1)
    if m.atoms_w.size:
        hit = flat[:, None] == m.atoms_xi[None, :]
        if np.any(hit & (m.atoms_w[None, :] > 0)):
            raise PoleError("boundary value requested at an atom")
    re = m.b1 * flat + m.c
    im = np.zeros_like(flat)
    if m.atoms_w.size:
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(m.atoms_w[None, :] > 0, m.atoms_w[None, :] / (m.atoms_xi[None, :] - flat[:, None]), 0.0)
        re = re + np.sum(terms, axis=1)
    if m.density is not None:
        H = hilbert_pp(m.density)
        re = re + np.pi * H(flat)
        im = np.pi * m.density(flat)
    out = re + 1j * im
    return complex(out[0]) if xa.ndim == 0 else out.reshape(xa.shape)


def stieltjes_invert(m: HerglotzMeasure, x1: float, x2: float, y_seq) -> np.ndarray:
    """``(1/pi) int_{x1}^{x2} Im h(xi + i y) dxi`` for each ``y`` in ``y_seq``.

    As ``y -> 0+`` the values tend to ``beta((x1, x2))`` plus half the
    atom weights sitting exactly at ``x1`` or ``x2``.
    """
    if not x1 < x2:
        raise InvalidArgumentError("need x1 < x2")
    ys = np.asarray(y_seq, dtype=float).reshape(-1)
    if ys.size == 0 or np.any(ys <= 0) or np.any(np.diff(ys) >= 0):
        raise InvalidArgumentError("y_seq must be positive and strictly decreasing")
    pts = list(m.atoms_xi[(m.atoms_xi > x1) & (m.atoms_xi < x2)])
    if m.density is not None:
        t = m.density.breakpoints
        pts += list(t[(t > x1) & (t < x2)])
    pts = sorted(set(pts))
    out = np.empty(ys.size)
    for k, y in enumerate(ys):
        def f(s, y=y):
            return eval_upper(m, complex(s, y)).imag / np.pi

        # split at interior features and pad each side of an atom by a few y
        edges = [x1]
        for p in pts:
            for q in (p - 8 * y, p, p + 8 * y):
                if edges[-1] < q < x2:
                    edges.append(q)
        for e in (x1 + 8 * y, x2 - 8 * y):
            if x1 < e < x2:
                edges.append(e)
        edges = sorted(set(edges + [x2]))
        total = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                for a, b in zip(edges[:-1], edges[1:]):
                    total += integrate.quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=1e-10, limit=500)[0]
            except integrate.IntegrationWarning as exc:
                raise NumericalFailure(f"Stieltjes quadrature did not converge at y={y:g}: {exc}") from None
        out[k] = total
    return out


def _positive_part(f: PiecewisePolynomial) -> PiecewisePolynomial | None:
    t = f.breakpoints
    if t[-1] <= 0:
        return None
    if t[0] >= 0:
        return f
    j = int(np.searchsorted(t, 0.0, side="right")) - 1
    head = taylor_shift(f.coeffs[j], -t[j])
    bps = np.concatenate([[0.0], t[j + 1:]])
    rows = np.vstack([head, f.coeffs[j + 1:]])
    if bps[1] == 0.0:  # zero falls on a breakpoint
        bps, rows = bps[1:], rows[1:]
    return PiecewisePolynomial(bps, rows)


def _inverse_square_integral(f: PiecewisePolynomial) -> float:
    """Exact ``int f(x) / x**2 dx`` for ``f`` supported in ``x > 0``."""
    total = 0.0
    for j in range(f.n_pieces):
        c = f.coeffs[j]
        if not np.any(c):
            continue
        a, b = f.breakpoints[j], f.breakpoints[j + 1]
        # coefficients in x
        g = taylor_shift(c, -a)
        total += g[0] * (1.0 / a - 1.0 / b)
        if g.size > 1:
            total += g[1] * np.log(b / a)
        for k in range(2, g.size):
            total += g[k] * (b ** (k - 1) - a ** (k - 1)) / (k - 1)
    return float(total)


def _inverse_square_moment(m: HerglotzMeasure) -> float:
    """``int d beta / xi**2`` by adaptive quadrature over the density pieces."""
    val = float(np.sum(m.atoms_w / m.atoms_xi**2)) if m.atoms_w.size else 0.0
    if m.density is None:
        return val
    t = m.density.breakpoints
    for j in range(m.density.n_pieces):
        c = m.density.coeffs[j]
        if not np.any(c):
            continue
        a = t[j]
        val += integrate.quad(lambda s: np.polynomial.polynomial.polyval(s - a, c) / s**2, a, t[j + 1],
                              epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return val


def _has_mass_near_origin(m: HerglotzMeasure) -> bool:
    if np.any((m.atoms_xi == 0) & (m.atoms_w > 0)):
        return True
    if m.density is None:
        return False
    t = m.density.breakpoints
    live = np.any(m.density.coeffs != 0, axis=1)
    return bool(np.any(live & (t[:-1] <= 0) & (t[1:] >= 0)))


def asymptotics(m: HerglotzMeasure) -> Asymptotics:
    a_1 = None if _has_mass_near_origin(m) else m.b1 + _inverse_square_moment(m)
    return Asymptotics(a_m1=-m.origin_weight, b1=m.b1, b_m1=-m.total_mass, a_1=a_1)


def sum_rule(m: HerglotzMeasure, k: int) -> tuple[float, float]:
    """Both sides of the sum rule of order ``k`` in {0, 1}.

    ``lhs = (2/pi) int_{0+}^inf Im h(x) / x**(2k) dx`` from the positive half
    of the measure; ``rhs`` from the asymptotic coefficients
    (``a_{-1} - b_{-1}`` for ``k = 0`` and ``int d beta / xi**2`` for ``k = 1``).
    """
    if not m.symmetric:
        raise InvalidArgumentError("sum rules need a symmetric measure")
    if k not in (0, 1):
        raise InvalidArgumentError("only k = 0 and k = 1 are supported")
    pos = m.atoms_xi > 0
    if k == 0:
        lhs = 2.0 * float(np.sum(m.atoms_w[pos]))
        if m.density is not None:
            half = _positive_part(m.density)
            lhs += 0.0 if half is None else 2.0 * half.integral()
        a = asymptotics(m)
        return lhs, a.a_m1 - a.b_m1
    if _has_mass_near_origin(m):
        raise InvalidArgumentError("the k = 1 moment needs the measure to vanish near the origin")
    lhs = 2.0 * float(np.sum(m.atoms_w[pos] / m.atoms_xi[pos] ** 2))
    if m.density is not None:
        half = _positive_part(m.density)
        lhs += 0.0 if half is None else 2.0 * _inverse_square_integral(half)
    a = asymptotics(m)
    return lhs, a.a_1 - a.b1


def aux_hdelta(z, delta: float):
    """``(1/pi) Log((z - delta)/(z + delta))`` on the closed upper half-plane.

    Real ``z`` with ``|z| < delta`` is taken as the limit from above, where
    the imaginary part equals 1.
    """
    if not delta > 0:
        raise InvalidArgumentError("delta must be positive")
    za = np.asarray(z, dtype=complex) + 0.0  # turn -0.0 imaginary parts into +0.0
    if np.any(~np.isfinite(za)):
        raise InvalidArgumentError("evaluation point must be finite")
    if np.any(za.imag < 0):
        raise InvalidArgumentError("aux_hdelta is defined on Im z >= 0")
    if np.any((za.imag == 0) & (np.abs(za.real) == delta)):
        raise PoleError("branch point of h_delta")
    # difference of logs keeps the cut of the quotient on the slit (-delta, delta)
    out = (np.log(za - delta) - np.log(za + delta)) / np.pi
    return complex(out) if np.ndim(z) == 0 else out


def composed_h1(h: Callable, h0: Callable, delta: float, z):
    """``h_delta(h(z) + h0(z))``; a Herglotz function when ``h`` and ``h0`` are."""
    w = np.asarray(h(z), dtype=complex) + np.asarray(h0(z), dtype=complex)
    if np.any(w.imag < 0):
        # round-off on the boundary; the exact value has Im >= 0
        scale = np.maximum(np.abs(w), 1.0)
        if np.any(w.imag < -1e-10 * scale):
            raise InvalidArgumentError("inner function left the closed upper half-plane")
        w = w.real + 1j * np.maximum(w.imag, 0.0)
    return aux_hdelta(w if np.ndim(z) else complex(w), delta)


@dataclass(frozen=True)
class ChainReport:
    """Numeric form of ``|Omega|/pi <= (2/pi) int_Omega Im h1 <= 2 delta / (pi (b1 + b1_0))``."""

    lower: float
    middle: float
    upper: float
    delta: float
    rtol: float = 0.01

    @property
    def holds(self) -> bool:
        return self.lower <= self.middle * (1 + self.rtol) and self.middle <= self.upper * (1 + self.rtol)


def bound_chain(
    m: HerglotzMeasure,
    h0: Callable,
    b1_0: float,
    omega: tuple[float, float],
    n_sup: int = 20001,
    rtol: float = 0.01,
) -> ChainReport:
    """Evaluate the lower-bound chain for ``h`` (from ``m``) against ``h0``.

    ``delta`` is the largest ``|h + h0|`` on a dense sample of ``omega``;
    the middle term is integrated adaptively between the knots of the
    density.
    """
    lo, hi = map(float, omega)
    if not (0 < lo < hi):
        raise InvalidArgumentError("omega must be an interval on the positive axis")
    if m.b1 + b1_0 <= 0:
        raise InvalidArgumentError("need b1 + b1_0 > 0")

    def inner(x):
        return boundary_value(m, x) + np.asarray(h0(x), dtype=complex)

    xs = np.linspace(lo, hi, n_sup)
    delta = float(np.max(np.abs(inner(xs))))
    # the sample maximum may miss the true supremum slightly; pad by round-off
    delta *= 1 + 1e-12

    def f(x):
        return composed_h1(lambda s: boundary_value(m, s), h0, delta, x).imag

    pts = []
    if m.density is not None:
        t = m.density.breakpoints
        pts = t[(t > lo) & (t < hi)]
    edges = np.concatenate([[lo], pts, [hi]])
    # vectorized Gauss-Legendre per knot interval, refined until stable
    total_prev = None
    order = 8
    while True:
        nodes, weights = np.polynomial.legendre.leggauss(order)
        a, b = edges[:-1, None], edges[1:, None]
        xq = 0.5 * (a + b) + 0.5 * (b - a) * nodes[None, :]
        vals = f(xq.ravel()).reshape(xq.shape)
        total = float(np.sum(0.5 * (b - a) * weights[None, :] * vals))
        if total_prev is not None and abs(total - total_prev) <= max(QUAD_EPSABS, 1e-10 * abs(total)):
            break
        if order >= 256:
            raise NumericalFailure("chain quadrature did not settle")
        total_prev = total
        order *= 2
    middle = 2.0 / np.pi * total
    return ChainReport(
        lower=(hi - lo) / np.pi,
        middle=middle,
        upper=2.0 * delta / (np.pi * (m.b1 + b1_0)),
        delta=delta,
        rtol=rtol,
    )


def lower_bound_generic(b1: float, b1_0: float, omega_len: float) -> float:
    """``(b1 + b1_0) * |Omega| / 2``."""
    if b1 < 0 or b1_0 < 0:
        raise InvalidArgumentError("slopes must be nonnegative")
    if not omega_len > 0:
        raise InvalidArgumentError("omega_len must be positive")
    return (b1 + b1_0) * omega_len / 2.0


def metamaterial_bound(eps_inf: float, eps_t: complex, B: float) -> float:
    """``max((eps_inf - Re eps_t) (B/2)/(1 + B/2) - Im eps_t, 0)``."""
    eps_t = complex(eps_t)
    if not 0 < B < 2:
        raise InvalidArgumentError("relative bandwidth B must lie in (0, 2)")
    if eps_t.imag < 0:
        raise InvalidArgumentError("Im eps_t must be nonnegative")
    if not eps_inf > eps_t.real:
        raise InvalidArgumentError("need eps_inf > Re eps_t")
    return max((eps_inf - eps_t.real) * (B / 2) / (1 + B / 2) - eps_t.imag, 0.0)
