"""Principal-value Cauchy integrals of piecewise polynomials in closed form.

The integral of a polynomial ``q`` against ``1/(xi - x)`` over ``[a, b]`` is

    q(x) * ln|(b - x)/(a - x)| + P(x),

with ``P`` a polynomial of one degree less.  Summed over the pieces of a
compactly supported piecewise polynomial this gives a *log-polynomial*:
a polynomial plus ``r_j(x) * ln|x - t_j|`` at every breakpoint, where
``r_j`` is the jump of the piece polynomials across ``t_j``.  When the
density is continuous ``r_j(t_j) = 0`` and the logarithmic singularities
cancel.

Numerically, each piece is evaluated in one of two ways.  Close to the
piece the polynomial is re-expanded about the evaluation point, which keeps
every term of moderate size.  Far away (``|x - c| > 4 * halfwidth``) a
multipole series in ``halfwidth / (x - c)`` built from exact moments is used
instead, which avoids the cancellation that the global closed form suffers
from for narrow, high-degree pieces.  Both routes evaluate the same closed
form; :meth:`LogPolynomial.closed_form` evaluates the grouped expression
directly and serves as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np
from numpy.polynomial import Polynomial

from .bspline import PiecewisePolynomial, taylor_shift
from .errors import InvalidArgumentError, SingularEvaluationError

__all__ = [
    "LogPolynomial",
    "pv_segment_integral",
    "cauchy_integral",
    "hilbert_pp",
    "eval_logpoly",
    "rooftop_hilbert_reference",
    "MAX_DEGREE",
]

MAX_DEGREE = 10
_FAR_RATIO = 4.0
_GUARD = 1e-12


def _xlogabs(t):
    """``t * ln|t|`` with the limit 0 at ``t = 0``."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = t * np.log(np.abs(t))
    return np.where(t == 0, 0.0, out)


def _segment_near(c, a, b, z):
    """Closed form with ``q`` re-expanded about each ``z``.

    For real ``z`` the logarithm of an exactly vanishing distance is
    dropped (its coefficient is reported separately by the caller).
    """
    d = taylor_shift(c, z - a)
    ub = b - z
    ua = a - z
    if np.iscomplexobj(z):
        logs = np.log(ub) - np.log(ua)
    else:
        with np.errstate(divide="ignore"):
            lb = np.where(ub == 0, 0.0, np.log(np.abs(ub)))
            la = np.where(ua == 0, 0.0, np.log(np.abs(ua)))
        logs = lb - la
    out = d[..., 0] * logs
    pb = np.ones_like(ub)
    pa = np.ones_like(ua)
    for k in range(1, c.size):
        pb = pb * ub
        pa = pa * ua
        out = out + d[..., k] * (pb - pa) / k
    return out


def _moments(c, a, b, nterms):
    """Scaled moments ``int q(xi) ((xi - c)/hw)**n dxi / hw`` about the midpoint."""
    hw = 0.5 * (b - a)
    e = taylor_shift(c, hw) * hw ** np.arange(c.size)  # q in the scaled variable u on [-1, 1]
    p = np.arange(nterms)[:, None] + np.arange(c.size)[None, :]
    even = (p % 2) == 0
    table = np.where(even, 2.0 / (p + 1), 0.0)
    return table @ e


def _segment_far(c, a, b, z):
    mid = 0.5 * (a + b)
    hw = 0.5 * (b - a)
    w = hw / (z - mid)
    rho = float(np.max(np.abs(w))) if np.size(w) else 0.0
    if rho == 0.0:
        nterms = 1
    else:
        nterms = int(min(60, max(2, np.ceil(np.log(1e-17) / np.log(rho)))))
    mom = _moments(c, a, b, nterms)
    acc = np.zeros_like(w) + mom[-1]
    for n in range(nterms - 2, -1, -1):
        acc = acc * w + mom[n]
    return -w * acc


def _segment_integral(c, a, b, z):
    c = np.asarray(c, dtype=float)
    z = np.asarray(z)
    mid = 0.5 * (a + b)
    hw = 0.5 * (b - a)
    far = np.abs(z - mid) > _FAR_RATIO * hw
    out = np.zeros(z.shape, dtype=np.result_type(z, float))
    if np.any(far):
        out[far] = _segment_far(c, a, b, z[far])
    near = ~far
    if np.any(near):
        out[near] = _segment_near(c, a, b, z[near])
    return out


def pv_segment_integral(poly_coeffs, a: float, b: float, x):
    """``PV int_a^b q(xi) / (xi - x) dxi`` for one polynomial piece.

    ``poly_coeffs`` are ascending coefficients in ``xi - a``.  At an endpoint
    the one-sided improper integral exists only if ``q`` vanishes there;
    otherwise :class:`SingularEvaluationError` is raised.
    """
    if not a < b:
        raise InvalidArgumentError("need a < b")
    c = np.atleast_1d(np.asarray(poly_coeffs, dtype=float))
    xa = np.asarray(x, dtype=float)
    if np.any(np.isnan(xa)):
        raise InvalidArgumentError("cannot evaluate at NaN")
    q_a = c[0]
    q_b = float(np.polyval(c[::-1], b - a))
    scale = max(np.max(np.abs(c)), 1e-300)
    if (np.any(xa == a) and abs(q_a) > 1e-12 * scale) or (np.any(xa == b) and abs(q_b) > 1e-12 * scale):
        raise SingularEvaluationError("principal value diverges at an endpoint where the density is nonzero")
    out = _segment_integral(c, a, b, np.atleast_1d(xa))
    return float(out[0]) if xa.ndim == 0 else out.reshape(xa.shape)


def _jump_knots(f: PiecewisePolynomial, rtol=1e-9):
    jumps = f.jumps(0, include_ends=True)
    scale = max(np.max(np.abs(f.coeffs[:, 0])), np.max(np.abs(jumps)), 1e-300)
    return f.breakpoints[np.abs(jumps) > rtol * scale]


def cauchy_integral(f: PiecewisePolynomial, z):
    """``int f(xi) / (xi - z) dxi`` over the support of ``f``.

    For complex ``z`` off the real axis the principal complex logarithm is
    used; for real ``z`` the principal value is returned.  Real evaluation
    exactly at a jump of ``f`` raises :class:`SingularEvaluationError`.
    """
    if f.degree > MAX_DEGREE:
        raise InvalidArgumentError(f"degree {f.degree} exceeds the supported maximum {MAX_DEGREE}")
    za = np.asarray(z)
    if np.iscomplexobj(za) and np.any(za.imag == 0):
        raise InvalidArgumentError("complex evaluation points must lie off the real axis; pass real x for the principal value")
    if not np.iscomplexobj(za):
        za = za.astype(float)
        if np.any(np.isnan(za)):
            raise InvalidArgumentError("cannot evaluate at NaN")
        bad = _jump_knots(f)
        if bad.size:
            scale = max(np.max(np.abs(f.breakpoints)), np.ptp(f.breakpoints))
            hit = np.abs(za.reshape(-1)[:, None] - bad[None, :]) <= _GUARD * scale
            if np.any(hit):
                raise SingularEvaluationError(
                    f"logarithmic singularity at a jump of the density (x = {bad[np.any(hit, axis=0)][0]!r})"
                )
    flat = np.atleast_1d(za).reshape(-1)
    out = np.zeros(flat.shape, dtype=np.result_type(flat, float))
    t = f.breakpoints
    for j in range(f.n_pieces):
        c = f.coeffs[j]
        if not np.any(c):
            continue
        out += _segment_integral(c, t[j], t[j + 1], flat)
    return out[0] if za.ndim == 0 else out.reshape(za.shape)


@dataclass(frozen=True, eq=False)
class LogPolynomial:
    """``poly(x - origin) + sum_j r_j(x - t_j) * ln|x - t_j|``.

    ``poly`` holds ascending coefficients; each log term is a pair
    ``(t_j, r_j)`` with ``r_j`` ascending in the local variable ``x - t_j``.
    ``singular_knots`` lists the ``t_j`` whose ``r_j(t_j)`` does not vanish.
    When ``source`` is set (the density the object is the transform of),
    calls are evaluated piece by piece, which is the numerically stable
    route; :meth:`closed_form` always uses the grouped expression.
    """

    poly: np.ndarray
    log_terms: tuple
    origin: float = 0.0
    singular_knots: np.ndarray = None
    source: PiecewisePolynomial | None = None
    scale: float = 1.0 / np.pi

    def __post_init__(self):
        object.__setattr__(self, "poly", np.atleast_1d(np.asarray(self.poly, dtype=float)))
        sk = np.zeros(0) if self.singular_knots is None else np.asarray(self.singular_knots, dtype=float)
        object.__setattr__(self, "singular_knots", sk)

    @classmethod
    def zero(cls):
        return cls(np.zeros(1), ())

    @property
    def is_singular(self) -> bool:
        return self.singular_knots.size > 0

    def __call__(self, x):
        return eval_logpoly(self, x)

    def _check_singular(self, x):
        if self.is_singular:
            span = max(np.max(np.abs(self.singular_knots)), 1.0)
            if np.any(np.abs(np.reshape(x, (-1, 1)) - self.singular_knots[None, :]) <= _GUARD * span):
                raise SingularEvaluationError("evaluation at a genuine logarithmic singularity")

    def closed_form(self, x):
        xa = np.asarray(x, dtype=float)
        if np.any(np.isnan(xa)):
            raise InvalidArgumentError("cannot evaluate at NaN")
        self._check_singular(xa)
        out = np.polynomial.polynomial.polyval(xa - self.origin, self.poly)
        for t, r in self.log_terms:
            y = xa - t
            with np.errstate(divide="ignore", invalid="ignore"):
                logs = np.where(y == 0, 0.0, np.log(np.abs(np.where(y == 0, 1.0, y))))
            out = out + np.polynomial.polynomial.polyval(y, r) * logs
        return float(out) if xa.ndim == 0 else out


def eval_logpoly(g: LogPolynomial, x):
    """Evaluate a log-polynomial, taking ``0 * ln 0 = 0`` at knots.

    Raises :class:`SingularEvaluationError` at flagged knots.
    """
    if g.source is None:
        return g.closed_form(x)
    xa = np.asarray(x, dtype=float)
    if np.any(np.isnan(xa)):
        raise InvalidArgumentError("cannot evaluate at NaN")
    g._check_singular(xa)
    out = g.scale * cauchy_integral(g.source, xa)
    return float(out) if xa.ndim == 0 else out


def hilbert_pp(f: PiecewisePolynomial) -> LogPolynomial:
    """``x -> (1/pi) PV int f(xi) / (xi - x) dxi`` as a :class:`LogPolynomial`.

    With this sign the unit roof-top of half-width ``delta`` maps to
    ``(2x ln|x| - (x-delta) ln|x-delta| - (x+delta) ln|x+delta|) / (pi delta)``.
    Discontinuous ``f`` is accepted; its jump points are recorded in
    ``singular_knots``.
    """
    if f.degree > MAX_DEGREE:
        raise InvalidArgumentError(f"degree {f.degree} exceeds the supported maximum {MAX_DEGREE}")
    t = f.breakpoints
    lo, hi = f.support
    origin = 0.5 * (lo + hi)
    scale = 1.0 / np.pi
    poly = Polynomial([0.0])
    for j in range(f.n_pieces):
        c = f.coeffs[j]
        if not np.any(c):
            continue
        a, b = t[j], t[j + 1]
        qx = Polynomial(c)(Polynomial([origin - a, 1.0]))
        ub = Polynomial([b - origin, -1.0])
        ua = Polynomial([a - origin, -1.0])
        for k in range(1, c.size):
            poly = poly + qx.deriv(k) / factorial(k) * (ub**k - ua**k) / k
    deg = f.degree
    left = np.vstack([np.zeros(deg + 1), taylor_shift(f.coeffs, f.widths)])  # piece ending at t_j
    right = np.vstack([f.coeffs, np.zeros(deg + 1)])  # piece starting at t_j
    terms = []
    for j, tj in enumerate(t):
        r = (left[j] - right[j]) * scale
        if np.any(r):
            terms.append((float(tj), r))
    return LogPolynomial(
        poly=poly.coef * scale,
        log_terms=tuple(terms),
        origin=origin,
        singular_knots=_jump_knots(f),
        source=f,
        scale=scale,
    )


def rooftop_hilbert_reference(x, delta: float):
    """Direct formula for the transform of the roof-top ``max(1 - |x|/delta, 0)``."""
    if not delta > 0:
        raise InvalidArgumentError("delta must be positive")
    x = np.asarray(x, dtype=float)
    val = (2 * _xlogabs(x) - _xlogabs(x - delta) - _xlogabs(x + delta)) / (np.pi * delta)
    return float(val) if val.ndim == 0 else val
