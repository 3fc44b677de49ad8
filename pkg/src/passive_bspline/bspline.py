"""Uniform B-splines as exact piecewise polynomials.

Every spline object in the package is a :class:`PiecewisePolynomial`: a
strictly increasing breakpoint vector plus one row of power-basis
coefficients per interval, written in the local variable ``x - t_j``.
Prototype B-splines of order ``m`` are generated from the unit square pulse
by repeated convolution with the normalized box of width ``h``, so their
coefficients are exact up to floating point rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "PiecewisePolynomial",
    "Partition",
    "BSplineBasis",
    "taylor_shift",
    "make_partition",
    "prototype_bspline",
    "box_convolve",
    "eval_pp",
    "interpolation_coeffs",
    "expansion",
    "interior_basis",
    "band_basis",
    "holder_seminorm_estimate",
]


def taylor_shift(coeffs, delta):
    """Re-expand ascending polynomial coefficients about a shifted origin.

    Given ``q(y) = sum_k c_k y**k`` return ``d`` with
    ``q(y + delta) = sum_k d_k y**k``.  ``coeffs`` has shape ``(..., d+1)``
    and ``delta`` broadcasts against the leading dimensions.
    """
    c = np.array(coeffs, dtype=np.result_type(coeffs, delta, float), copy=True)
    if np.ndim(delta):
        delta = np.asarray(delta)[..., None]
        c = np.broadcast_to(c, np.broadcast_shapes(c.shape[:-1], delta.shape[:-1]) + c.shape[-1:]).copy()
    deg = c.shape[-1] - 1
    # repeated synthetic division
    for i in range(deg):
        for k in range(deg - 1, i - 1, -1):
            c[..., k : k + 1] = c[..., k : k + 1] + delta * c[..., k + 1 : k + 2]
    return c


def _merge_breakpoints(*arrays, rtol=1e-12):
    pts = np.sort(np.concatenate([np.asarray(a, dtype=float) for a in arrays]))
    if pts.size == 0:
        return pts
    tol = rtol * max(np.max(np.abs(pts)), np.ptp(pts), np.finfo(float).tiny)
    keep = np.ones(pts.size, dtype=bool)
    keep[1:] = np.diff(pts) > tol
    return pts[keep]


@dataclass(frozen=True, eq=False)
class PiecewisePolynomial:
    """Compactly supported piecewise polynomial.

    Parameters
    ----------
    breakpoints : array_like, shape (J+1,)
        Strictly increasing ``t_0 < ... < t_J``.
    coeffs : array_like, shape (J, d+1)
        Row ``j`` holds the ascending coefficients of the polynomial on
        ``[t_j, t_{j+1})`` in the local variable ``x - t_j``.

    The function is zero outside ``[t_0, t_J)``; intervals are right-open.
    """

    breakpoints: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        t = np.array(self.breakpoints, dtype=float)
        c = np.array(self.coeffs, dtype=float)
        if c.ndim == 1:
            c = c[None, :]
        if t.ndim != 1 or t.size < 2:
            raise InvalidArgumentError("need at least two breakpoints")
        if not np.all(np.isfinite(t)) or np.any(np.diff(t) <= 0):
            raise InvalidArgumentError("breakpoints must be finite and strictly increasing")
        if c.ndim != 2 or c.shape[0] != t.size - 1 or c.shape[1] < 1:
            raise InvalidArgumentError(
                f"coeffs must have shape ({t.size - 1}, d+1), got {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise InvalidArgumentError("coefficients must be finite")
        t.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "breakpoints", t)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, a=0.0, b=1.0):
        return cls([a, b], [[0.0]])

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def n_pieces(self) -> int:
        return self.coeffs.shape[0]

    @property
    def support(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def __call__(self, x):
        return eval_pp(self, x)

    def derivative(self, k: int = 1) -> "PiecewisePolynomial":
        c = self.coeffs
        for _ in range(k):
            if c.shape[1] == 1:
                c = np.zeros_like(c)
                break
            c = c[:, 1:] * np.arange(1, c.shape[1])
        return PiecewisePolynomial(self.breakpoints, c)

    def piece_integrals(self) -> np.ndarray:
        h = self.widths[:, None]
        k = np.arange(self.degree + 1)
        return np.sum(self.coeffs * h ** (k + 1) / (k + 1), axis=1)

    def integral(self) -> float:
        """Exact integral over the real line."""
        return float(np.sum(self.piece_integrals()))

    def local_coeffs_at(self, s: float) -> np.ndarray:
        """Coefficients, in ``x - s``, of the piece that contains ``[s, s+)``."""
        t = self.breakpoints
        tol = 1e-12 * max(np.max(np.abs(t)), np.ptp(t))
        j = int(np.searchsorted(t, s + tol, side="right")) - 1
        if j < 0 or j >= self.n_pieces:
            return np.zeros(self.degree + 1)
        return taylor_shift(self.coeffs[j], s - t[j])

    def shifted(self, s: float) -> "PiecewisePolynomial":
        """The function ``x -> f(x - s)``."""
        return PiecewisePolynomial(self.breakpoints + s, self.coeffs)

    def reflected(self) -> "PiecewisePolynomial":
        """The function ``x -> f(-x)``."""
        t = self.breakpoints
        h = np.diff(t)
        # piece j on [t_j, t_j+1) maps to [-t_j+1, -t_j); local y = x + t_j+1,
        # value q_j(h_j - y)
        deg = self.degree
        sign = (-1.0) ** np.arange(deg + 1)
        rows = taylor_shift(self.coeffs, h) * sign
        return PiecewisePolynomial(-t[::-1], rows[::-1])

    def _binary(self, other, op):
        t = _merge_breakpoints(self.breakpoints, other.breakpoints)
        deg = max(self.degree, other.degree)
        rows = np.zeros((t.size - 1, deg + 1))
        for j, s in enumerate(t[:-1]):
            a = self.local_coeffs_at(s)
            b = other.local_coeffs_at(s)
            rows[j, : a.size] += a
            rows[j, : b.size] = op(rows[j, : b.size], b)
        return PiecewisePolynomial(t, rows)

    def __add__(self, other):
        if not isinstance(other, PiecewisePolynomial):
            return NotImplemented
        return self._binary(other, np.add)

    def __sub__(self, other):
        if not isinstance(other, PiecewisePolynomial):
            return NotImplemented
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        if isinstance(scalar, PiecewisePolynomial):
            return NotImplemented
        return PiecewisePolynomial(self.breakpoints, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def jumps(self, order: int = 0, include_ends: bool = True) -> np.ndarray:
        """Jumps of the ``order``-th derivative at the breakpoints.

        With ``include_ends`` the zero continuation outside the support is
        taken into account, giving ``J+1`` entries; otherwise only the
        ``J-1`` interior breakpoints are reported.
        """
        d = self.derivative(order)
        h = self.widths
        k = np.arange(d.degree + 1)
        left_end = np.sum(d.coeffs * h[:, None] ** k, axis=1)  # value at t_{j+1}-
        right_start = d.coeffs[:, 0]  # value at t_j+
        left = np.concatenate([[0.0], left_end])
        right = np.concatenate([right_start, [0.0]])
        jumps = right - left
        return jumps if include_ends else jumps[1:-1]

    def continuity_order(self, rtol: float = 1e-10, include_ends: bool = True) -> int:
        """Largest ``r`` such that derivatives ``0..r`` are continuous.

        Returns ``-1`` for a discontinuous function and ``degree`` (or more
        precisely, infinity capped at ``degree``) when every derivative
        matches.  Derivative ``r`` is compared relative to the largest
        magnitude of that derivative over the breakpoints.
        """
        for r in range(self.degree + 1):
            d = self.derivative(r)
            scale = max(np.max(np.abs(d.coeffs[:, 0])), np.max(np.abs(d(d.breakpoints[:-1]))), 1e-300)
            if np.max(np.abs(self.jumps(r, include_ends))) > rtol * scale:
                return r - 1
        return self.degree


def eval_pp(f: PiecewisePolynomial, x):
    """Horner evaluation of ``f`` at ``x`` (scalar or array).

    Zero outside the support, right-continuous at breakpoints.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(np.isnan(xa)):
        raise InvalidArgumentError("cannot evaluate at NaN")
    t = f.breakpoints
    idx = np.searchsorted(t, xa, side="right") - 1
    inside = (idx >= 0) & (idx < f.n_pieces)
    j = np.clip(idx, 0, f.n_pieces - 1)
    y = xa - t[j]
    c = f.coeffs[j]
    out = c[..., -1].copy()
    for k in range(f.degree - 1, -1, -1):
        out = out * y + c[..., k]
    out = np.where(inside, out, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def _antiderivative_at(f: PiecewisePolynomial, s: float, cumulative: np.ndarray, tol: float):
    """Coefficients in ``x - s`` of ``F(x) = int_{-inf}^x f`` near ``s+``."""
    t = f.breakpoints
    out = np.zeros(f.degree + 2)
    if s < t[0] - tol:
        return out
    if s >= t[-1] - tol:
        out[0] = cumulative[-1]
        return out
    j = int(np.searchsorted(t, s + tol, side="right")) - 1
    c = f.coeffs[j]
    out[0] = cumulative[j]
    out[1:] = c / np.arange(1, c.size + 1)
    return taylor_shift(out, s - t[j])


def box_convolve(f: PiecewisePolynomial, h: float) -> PiecewisePolynomial:
    """Convolve with the normalized square pulse of width ``h``.

    Returns ``x -> (1/h) * int_0^h f(x - u) du``: degree rises by one, the
    support widens by ``h`` on the right and the integral is preserved.
    """
    if not h > 0:
        raise InvalidArgumentError("box width must be positive")
    t = f.breakpoints
    cumulative = np.concatenate([[0.0], np.cumsum(f.piece_integrals())])
    tol = 1e-12 * max(np.max(np.abs(t)), np.ptp(t) + h)
    s = _merge_breakpoints(t, t + h)
    rows = np.empty((s.size - 1, f.degree + 2))
    for j, sj in enumerate(s[:-1]):
        rows[j] = (_antiderivative_at(f, sj, cumulative, tol) - _antiderivative_at(f, sj - h, cumulative, tol)) / h
    return PiecewisePolynomial(s, rows)


def prototype_bspline(m: int, h: float) -> PiecewisePolynomial:
    """Order-``m`` uniform B-spline supported on ``[0, m*h]``.

    ``m = 1`` is the unit square pulse on ``[0, h)``; ``m = 2`` is the hat
    with apex value 1 at ``h``; higher orders follow by box convolution.
    """
    if int(m) != m or m < 1:
        raise InvalidArgumentError("order m must be an integer >= 1")
    if not h > 0:
        raise InvalidArgumentError("knot spacing must be positive")
    p = PiecewisePolynomial([0.0, h], [[1.0]])
    for order in range(2, int(m) + 1):
        p = box_convolve(p, h)
        # breakpoints are exactly k*h; remove rounding from the merge
        p = PiecewisePolynomial(h * np.arange(order + 1), p.coeffs)
    return p


@dataclass(frozen=True)
class Partition:
    """Uniform partition of ``[omega_start, omega_start + omega_len]``.

    ``N`` subintervals, order ``m`` and ``m - 1`` external knots per side,
    ``x_k = omega_start + k * omega_len / N`` for ``k = 1-m, ..., N+m-1``.
    """

    omega_start: float
    omega_len: float
    N: int
    m: int

    @property
    def spacing(self) -> float:
        return self.omega_len / self.N

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1 - self.m, self.N + self.m)

    @property
    def knots(self) -> np.ndarray:
        return self.knot(self.indices)

    def knot(self, k):
        # from the integer index, no accumulated drift
        return self.omega_start + np.asarray(k) * self.omega_len / self.N


def make_partition(omega_start: float, omega_len: float, N: int, m: int) -> Partition:
    if not omega_len > 0:
        raise InvalidArgumentError("omega_len must be positive")
    if int(N) != N or N < 1:
        raise InvalidArgumentError("N must be a positive integer")
    if int(m) != m or m < 2:
        raise InvalidArgumentError("order m must be an integer >= 2")
    return Partition(float(omega_start), float(omega_len), int(N), int(m))


@dataclass(frozen=True, eq=False)
class BSplineBasis:
    """Translates ``p^(m)(x - x_{k-1})`` of the order-``m`` prototype.

    ``ks`` selects the knot indices ``k``; the full basis uses
    ``k = 2-m, ..., N`` (``N + m - 1`` functions).
    """

    partition: Partition
    ks: np.ndarray = field(default=None)
    prototype: PiecewisePolynomial = field(default=None)

    def __post_init__(self):
        part = self.partition
        ks = np.arange(2 - part.m, part.N + 1) if self.ks is None else np.asarray(self.ks, dtype=int)
        if ks.ndim != 1 or ks.size == 0:
            raise InvalidArgumentError("basis needs at least one function")
        if np.any(np.diff(ks) <= 0):
            raise InvalidArgumentError("knot indices must be strictly increasing")
        ks.setflags(write=False)
        object.__setattr__(self, "ks", ks)
        if self.prototype is None:
            object.__setattr__(self, "prototype", prototype_bspline(part.m, part.spacing))

    @property
    def m(self) -> int:
        return self.partition.m

    @property
    def size(self) -> int:
        return self.ks.size

    def __len__(self):
        return self.size

    @property
    def shifts(self) -> np.ndarray:
        """Left support ends ``x_{k-1}``."""
        return self.partition.knot(self.ks - 1)

    @property
    def centers(self) -> np.ndarray:
        return self.shifts + 0.5 * self.m * self.partition.spacing

    @property
    def support(self) -> tuple[float, float]:
        h = self.partition.spacing
        return float(self.shifts[0]), float(self.shifts[-1] + self.m * h)

    def function(self, n: int) -> PiecewisePolynomial:
        return self.prototype.shifted(self.shifts[n])

    def evaluate(self, x) -> np.ndarray:
        """Matrix ``B[i, n] = p_n(x_i)``."""
        x = np.asarray(x, dtype=float)
        return eval_pp(self.prototype, x[:, None] - self.shifts[None, :])


def interior_basis(lo: float, hi: float, n_funcs: int, m: int) -> BSplineBasis:
    """``n_funcs`` order-``m`` B-splines whose supports tile ``[lo, hi]``.

    The partition of ``[lo, hi]`` has ``n_funcs + m - 1`` subintervals and
    only the translates with full support inside the interval are kept, so
    the expansion vanishes at both ends.  For ``m = 2`` this places hats of
    half-width ``(hi - lo) / (n_funcs + 1)`` at the interior knots.
    """
    if int(n_funcs) != n_funcs or n_funcs < 1:
        raise InvalidArgumentError("need at least one basis function")
    part = make_partition(lo, hi - lo, int(n_funcs) + int(m) - 1, m)
    return BSplineBasis(part, np.arange(1, int(n_funcs) + 1))


def band_basis(lo: float, hi: float, N: int, m: int) -> BSplineBasis:
    """Order-``m`` B-splines on ``N`` equal subintervals of ``[lo, hi]``.

    Only translates supported inside the interval are kept
    (``N - m + 1`` functions), so the expansion vanishes at both ends.
    Doubling ``N`` refines the knots and nests the spanned spaces.
    """
    part = make_partition(lo, hi - lo, N, m)
    if part.N < part.m:
        raise InvalidArgumentError(f"need N >= m to fit a B-spline inside the band (N={N}, m={m})")
    return BSplineBasis(part, np.arange(1, part.N - part.m + 2))


def interpolation_coeffs(samples, partition: Partition) -> np.ndarray:
    """Coefficients ``f_k`` for the uniform expansions, ``k = 2-m, ..., N``.

    ``samples`` is either a callable, evaluated at the knots ``x_k`` with the
    constant extension ``f(x) = f(x_0)`` below the interval, or a sequence of
    the ``N + m - 1`` knot samples already extended.
    """
    ks = np.arange(2 - partition.m, partition.N + 1)
    if callable(samples):
        x = np.maximum(partition.knot(ks), partition.omega_start)
        return np.asarray(samples(x), dtype=float) * np.ones(ks.size)
    f = np.asarray(samples, dtype=float)
    if f.shape != (ks.size,):
        raise InvalidArgumentError(
            f"expected {ks.size} samples at knots k={2 - partition.m}..{partition.N}, got {f.shape}"
        )
    return f.copy()


def expansion(coeffs, basis: BSplineBasis) -> PiecewisePolynomial:
    """Exact piecewise polynomial ``sum_n coeffs[n] * p_n``."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (basis.size,):
        raise InvalidArgumentError(f"expected {basis.size} coefficients, got {c.shape}")
    m = basis.m
    start = basis.ks - 1  # global knot index of each support start
    g0 = int(start[0])
    n_int = int(start[-1]) + m - g0
    rows = np.zeros((n_int, basis.prototype.degree + 1))
    for r in range(m):
        rows[start - g0 + r] += c[:, None] * basis.prototype.coeffs[r]
    t = basis.partition.knot(np.arange(g0, g0 + n_int + 1))
    return PiecewisePolynomial(t, rows)


def holder_seminorm_estimate(x, f, alpha: float) -> float:
    """Largest ``|f_i - f_j| / |x_i - x_j|**alpha`` over sample pairs.

    A grid lower bound for the Hölder seminorm with exponent ``alpha``.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f)
    if x.shape != f.shape or x.ndim != 1:
        raise InvalidArgumentError("x and f must be one-dimensional and equally long")
    if np.unique(x).size < 2:
        raise InvalidArgumentError("need at least two distinct sample points")
    if not 0 < alpha < 1:
        raise InvalidArgumentError("alpha must lie in (0, 1)")
    dx = np.abs(x[:, None] - x[None, :])
    df = np.abs(f[:, None] - f[None, :])
    mask = dx > 0
    return float(np.max(df[mask] / dx[mask] ** alpha))
