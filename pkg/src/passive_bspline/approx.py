"""Passive approximation problems on a sampled band.

The approximant is a symmetric Herglotz function

    h(x) = b1 * x - u / x + sum_n c_n * (phat_n(x) - phat_n(-x) + i (p_n(x) + p_n(-x)))

with B-spline translates ``p_n`` on the positive axis, their transforms
``phat_n`` (see :func:`~passive_bspline.cauchy.hilbert_pp`), an optional
origin atom of weight ``u = -a_{-1}`` and a slope ``b1``.  All variables are
nonnegative.  Sampling ``h - F`` on the target band gives an affine map
from variables to complex residuals, stored as a :class:`ResidualSystem`
and turned into a linear program (``p = inf`` or ``p = 1``) or a
nonnegative least-squares problem (``p = 2``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .bspline import BSplineBasis, band_basis
from .cauchy import hilbert_pp
from .errors import InvalidArgumentError
from .herglotz import HerglotzMeasure, symmetric_spline_density
from .solver import LpStandardForm, NnlsProblem, ProductMatrix

__all__ = [
    "SampleGrid",
    "TargetSpec",
    "ProblemOptions",
    "ResidualSystem",
    "make_grid",
    "build_basis_columns",
    "assemble",
    "objective",
    "to_minimax_lp",
    "to_l1_lp",
    "to_l2_problem",
    "permittivity_view",
    "polygon_factor",
]

P_VALUES = (1, 2, np.inf)


def _parse_p(p):
    if isinstance(p, str):
        p = {"1": 1, "2": 2, "inf": np.inf}.get(p.strip().lower(), p)
    if p not in P_VALUES:
        raise InvalidArgumentError(f"p must be 1, 2 or inf, got {p!r}")
    return p


@dataclass(frozen=True, eq=False)
class SampleGrid:
    """Uniform midpoint grid on a band with a mask for the target set."""

    points: np.ndarray
    omega_mask: np.ndarray
    extended_band: tuple[float, float]
    omega: tuple[float, float]

    def __post_init__(self):
        x = np.asarray(self.points, dtype=float)
        mask = np.asarray(self.omega_mask, dtype=bool)
        if x.ndim != 1 or x.size < 2 or mask.shape != x.shape:
            raise InvalidArgumentError("grid needs at least two points and a matching mask")
        if np.any(np.diff(x) <= 0):
            raise InvalidArgumentError("grid points must be increasing")
        if not np.any(mask):
            raise InvalidArgumentError("target set contains no grid point")
        lo, hi = map(float, self.extended_band)
        if not (lo <= x[0] and x[-1] <= hi):
            raise InvalidArgumentError("grid must lie inside the extended band")
        for name, val in (("points", x), ("omega_mask", mask)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "extended_band", (lo, hi))
        object.__setattr__(self, "omega", tuple(map(float, self.omega)))

    @property
    def dx(self) -> float:
        return float(self.points[1] - self.points[0])

    @property
    def omega_points(self) -> np.ndarray:
        return self.points[self.omega_mask]


def make_grid(omega0: float, B: float, n_band: int) -> SampleGrid:
    """Midpoint grid of ``n_band`` points on ``omega0 * [1 - 2B, 1 + 2B]``.

    The target set is ``omega0 * [1 - B/2, 1 + B/2]``, which holds exactly
    ``n_band / 4`` of the points when ``n_band`` is a multiple of 8.
    """
    if not omega0 > 0:
        raise InvalidArgumentError("omega0 must be positive")
    if not 0 < B < 2:
        raise InvalidArgumentError("relative bandwidth B must lie in (0, 2)")
    if int(n_band) != n_band or n_band < 8 or n_band % 8:
        raise InvalidArgumentError("n_band must be a multiple of 8")
    n_band = int(n_band)
    lo, hi = omega0 * (1 - 2 * B), omega0 * (1 + 2 * B)
    if lo <= 0:
        raise InvalidArgumentError("band must stay on the positive axis (B < 0.5)")
    dx = (hi - lo) / n_band
    j = np.arange(n_band)
    x = lo + (j + 0.5) * dx
    mask = (j >= 3 * n_band // 8) & (j < 5 * n_band // 8)
    return SampleGrid(x, mask, (lo, hi), (omega0 * (1 - B / 2), omega0 * (1 + B / 2)))


@dataclass(frozen=True)
class TargetSpec:
    """Target function ``F`` on the real axis.

    ``kind`` is ``"permittivity"`` (``F(x) = x * eps_t``),
    ``"herglotz-negative"`` (``F = -h0`` for a callable ``h0`` with slope
    ``b1_0``) or ``"tabulated"`` (complex samples ``values`` at abscissae
    ``x``, linearly interpolated).
    """

    kind: str
    eps_t: complex | None = None
    h0: Callable | None = None
    b1_0: float = 0.0
    x: np.ndarray | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "permittivity":
            if self.eps_t is None or not np.isfinite(complex(self.eps_t)):
                raise InvalidArgumentError("permittivity target needs a finite eps_t")
            object.__setattr__(self, "eps_t", complex(self.eps_t))
        elif self.kind == "herglotz-negative":
            if self.h0 is None:
                raise InvalidArgumentError("herglotz-negative target needs h0")
            if self.b1_0 < 0:
                raise InvalidArgumentError("b1_0 must be nonnegative")
        elif self.kind == "tabulated":
            x = np.asarray(self.x, dtype=float)
            v = np.asarray(self.values, dtype=complex)
            if x.ndim != 1 or x.shape != v.shape or x.size < 2 or np.any(np.diff(x) <= 0):
                raise InvalidArgumentError("tabulated target needs increasing x and matching values")
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
                raise InvalidArgumentError("tabulated values must be finite")
            object.__setattr__(self, "x", x)
            object.__setattr__(self, "values", v)
        else:
            raise InvalidArgumentError(f"unknown target kind {self.kind!r}")

    @classmethod
    def permittivity(cls, eps_t: complex) -> "TargetSpec":
        return cls("permittivity", eps_t=eps_t)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "permittivity":
            return x * self.eps_t
        if self.kind == "herglotz-negative":
            return -np.asarray(self.h0(x), dtype=complex)
        if np.any((x < self.x[0]) | (x > self.x[-1])):
            raise InvalidArgumentError("grid extends beyond the tabulated target")
        return np.interp(x, self.x, self.values.real) + 1j * np.interp(x, self.x, self.values.imag)


@dataclass(frozen=True)
class ProblemOptions:
    """Problem settings.

    ``weight`` is ``"unit"``, ``"1/x"`` or an array of weights on the
    target points.  ``fix_b1=None`` makes ``b1`` a variable.
    """

    p: object = np.inf
    weight: object = "1/x"
    m: int = 2
    N: int = 500
    extended_band: tuple[float, float] | None = None
    fix_b1: float | None = 1.0
    allow_origin_atom: bool = True
    K: int = 64

    def __post_init__(self):
        object.__setattr__(self, "p", _parse_p(self.p))
        if int(self.m) != self.m or self.m < 1:
            raise InvalidArgumentError("order m must be a positive integer")
        if int(self.N) != self.N or self.N < 1:
            raise InvalidArgumentError("N must be a positive integer")
        if int(self.K) != self.K or self.K < 8 or self.K % 2:
            raise InvalidArgumentError("K must be an even integer >= 8")
        if self.fix_b1 is not None and not (np.isfinite(self.fix_b1) and self.fix_b1 >= 0):
            raise InvalidArgumentError("fix_b1 must be a nonnegative number")
        if isinstance(self.weight, str) and self.weight not in ("unit", "1/x"):
            raise InvalidArgumentError(f"unknown weight kind {self.weight!r}")


@dataclass(frozen=True, eq=False)
class ResidualSystem:
    """Affine map ``v -> h(x_i) - F(x_i)`` on the target points.

    Variables are ``[c_1 .. c_N, (b1), (u)]``, all ``>= 0``; ``b1_index``
    and ``atom_index`` are ``None`` when absent.  With a fixed slope the
    term ``fix_b1 * x_i`` is already subtracted from ``F_re``.
    """

    x: np.ndarray
    A_re: np.ndarray
    A_im: np.ndarray
    F_re: np.ndarray
    F_im: np.ndarray
    weights: np.ndarray
    dx: float
    basis: BSplineBasis
    n_splines: int
    b1_index: int | None = None
    atom_index: int | None = None
    fix_b1: float | None = None

    def __post_init__(self):
        M = self.x.size
        n = self.A_re.shape[1]
        if self.A_re.shape != (M, n) or self.A_im.shape != (M, n):
            raise InvalidArgumentError("A_re and A_im must both be (points, variables)")
        if self.F_re.shape != (M,) or self.F_im.shape != (M,) or self.weights.shape != (M,):
            raise InvalidArgumentError("targets and weights must have one entry per point")
        if not (np.all(np.isfinite(self.weights)) and np.all(self.weights > 0)):
            raise InvalidArgumentError("weights must be finite and positive")

    @property
    def n_vars(self) -> int:
        return self.A_re.shape[1]

    def residuals(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n_vars,):
            raise InvalidArgumentError(f"expected {self.n_vars} variables, got {v.shape}")
        return (self.A_re @ v - self.F_re) + 1j * (self.A_im @ v - self.F_im)

    def weighted_residuals(self, v) -> np.ndarray:
        return self.weights * self.residuals(v)

    def h_values(self, v) -> np.ndarray:
        """``h(x_i)`` including a fixed slope."""
        v = np.asarray(v, dtype=float)
        h = self.A_re @ v + 1j * (self.A_im @ v)
        return h + (0.0 if self.fix_b1 is None else self.fix_b1 * self.x)

    def split(self, v) -> dict:
        """Named parts of a variable vector."""
        v = np.asarray(v, dtype=float)
        b1 = self.fix_b1 if self.b1_index is None else float(v[self.b1_index])
        u = 0.0 if self.atom_index is None else float(v[self.atom_index])
        return {"coeffs": v[: self.n_splines].copy(), "b1": float(b1 or 0.0), "a_minus1": -u}

    def measure(self, v) -> HerglotzMeasure:
        """The Herglotz measure described by ``v``."""
        parts = self.split(v)
        atoms = ((0.0, -parts["a_minus1"]),) if parts["a_minus1"] != 0 else ()
        dens = symmetric_spline_density(np.maximum(parts["coeffs"], 0.0), self.basis)
        return HerglotzMeasure(b1=parts["b1"], point_masses=atoms, density=dens, symmetric=True)


def build_basis_columns(basis: BSplineBasis, x) -> tuple[np.ndarray, np.ndarray]:
    """``(A_im, A_re)`` with ``A_im[i, n] = p_n(x_i) + p_n(-x_i)`` and
    ``A_re[i, n] = phat_n(x_i) - phat_n(-x_i)``.

    ``x`` may be a :class:`SampleGrid` (all its points are used) or an array.
    """
    if basis.support[0] < 0:
        raise InvalidArgumentError("basis support must lie on the positive axis")
    x = np.asarray(x.points if isinstance(x, SampleGrid) else x, dtype=float)
    proto = basis.prototype
    H = hilbert_pp(proto)
    s = basis.shifts[None, :]
    xp = x[:, None] - s
    xm = -x[:, None] - s
    A_im = proto(xp) + proto(xm)
    A_re = H(xp) - H(xm)
    return A_im, A_re


def _weights(kind, x):
    if isinstance(kind, str):
        if kind == "unit":
            return np.ones_like(x)
        if np.any(x <= 0):
            raise InvalidArgumentError("weight 1/x needs positive abscissae")
        return 1.0 / x
    w = np.asarray(kind, dtype=float)
    if w.shape != x.shape:
        raise InvalidArgumentError(f"tabulated weights need {x.size} entries, got {w.shape}")
    return w


def assemble(options: ProblemOptions, basis: BSplineBasis | None, grid: SampleGrid, target) -> ResidualSystem:
    """Residual system on the target points of ``grid``.

    ``basis=None`` splits the extended band into ``options.N`` equal
    subintervals and keeps the order-``m`` B-splines inside it, so the
    density vanishes at the band ends.  ``target`` is a
    :class:`TargetSpec` or an array of complex samples on the target points.
    """
    if basis is None:
        lo, hi = options.extended_band or grid.extended_band
        basis = band_basis(lo, hi, options.N, options.m)
    x = grid.omega_points
    if isinstance(target, TargetSpec):
        F = np.asarray(target(x), dtype=complex)
    else:
        F = np.asarray(target, dtype=complex)
        if F.shape != x.shape:
            raise InvalidArgumentError(f"target needs {x.size} samples on the target set, got {F.shape}")
    if not np.all(np.isfinite(F)):
        raise InvalidArgumentError("target values must be finite")
    w = _weights(options.weight, x)
    A_im, A_re = build_basis_columns(basis, x)
    cols_re, cols_im = [A_re], [A_im]
    n = basis.size
    b1_index = atom_index = None
    F_re = F.real.copy()
    if options.fix_b1 is None:
        b1_index = n
        cols_re.append(x[:, None])
        cols_im.append(np.zeros((x.size, 1)))
        n += 1
    else:
        F_re = F_re - options.fix_b1 * x
    if options.allow_origin_atom:
        if np.any(x == 0):
            raise InvalidArgumentError("origin atom needs nonzero abscissae")
        atom_index = n
        cols_re.append(-1.0 / x[:, None])
        cols_im.append(np.zeros((x.size, 1)))
        n += 1
    return ResidualSystem(
        x=x,
        A_re=np.hstack(cols_re),
        A_im=np.hstack(cols_im),
        F_re=F_re,
        F_im=F.imag.copy(),
        weights=w,
        dx=grid.dx,
        basis=basis,
        n_splines=basis.size,
        b1_index=b1_index,
        atom_index=atom_index,
        fix_b1=options.fix_b1,
    )


def objective(system: ResidualSystem, v, p) -> float:
    """Weighted ``L^p`` norm of ``h - F`` as a Riemann sum on the target points."""
    p = _parse_p(p)
    a = np.abs(system.residuals(v))
    w = system.weights
    if p == np.inf:
        return float(np.max(w * a))
    if p == 1:
        return float(np.sum(w * a) * system.dx)
    return float(np.sqrt(np.sum(w * a**2) * system.dx))


def polygon_factor(K: int) -> float:
    """``cos(pi/K)``: the polygonal modulus is at least this fraction of ``|r|``."""
    return float(np.cos(np.pi / K))


def _polygon(K: int):
    if int(K) != K or K < 4 or K % 2:
        raise InvalidArgumentError("K must be an even integer >= 4")
    theta = 2 * np.pi * np.arange(K) / K
    return np.cos(theta), np.sin(theta)


def polygonal_modulus(r, K: int) -> np.ndarray:
    """``max_k Re(exp(-i theta_k) r)``, the support function of the K-gon."""
    cs, sn = _polygon(K)
    r = np.asarray(r, dtype=complex)
    return np.max(np.multiply.outer(r.real, cs) + np.multiply.outer(r.imag, sn), axis=-1)


def _polygon_rows(M: int, K: int, cols_t, n_cols: int):
    """Sparse ``P`` with rows ``cos * e_re_i + sin * e_im_i - e_t(i)``."""
    cs, sn = _polygon(K)
    rows = np.arange(M * K)
    i = np.repeat(np.arange(M), K)
    k = np.tile(np.arange(K), M)
    data = np.concatenate([cs[k], sn[k], -np.ones(M * K)])
    r = np.concatenate([rows, rows, rows])
    c = np.concatenate([i, M + i, cols_t(i)])
    return sp.csr_matrix((data, (r, c)), shape=(M * K, n_cols))


def to_minimax_lp(system: ResidualSystem, K: int = 64) -> LpStandardForm:
    """Epigraph LP ``min t`` with ``polygonal(w_i r_i) <= t``.

    Variables are ``(v, t)``.  The polygonal modulus underestimates ``|r|``
    by at most the factor ``cos(pi/K)``, so the optimal ``t`` brackets the
    minimax error in ``[t, t / cos(pi/K)]``.
    """
    M, n = system.A_re.shape
    w = system.weights[:, None]
    # Q maps (v, t) to (w*A_re v, w*A_im v, t)
    Q = np.zeros((2 * M + 1, n + 1))
    Q[:M, :n] = w * system.A_re
    Q[M:2 * M, :n] = w * system.A_im
    Q[2 * M, n] = 1.0
    P = _polygon_rows(M, K, lambda i: np.full_like(i, 2 * M), 2 * M + 1)
    target = np.concatenate([system.weights * system.F_re, system.weights * system.F_im, [0.0]])
    h = P @ target
    c = np.zeros(n + 1)
    c[n] = 1.0
    nonneg = np.ones(n + 1, dtype=bool)
    nonneg[n] = False
    return LpStandardForm(c=c, G=ProductMatrix(P, Q), h=h, nonneg=nonneg)


def to_l1_lp(system: ResidualSystem, K: int = 64) -> LpStandardForm:
    """``min sum_i w_i dx s_i`` with ``polygonal(r_i) <= s_i``; variables ``(v, s)``."""
    M, n = system.A_re.shape
    Q = np.zeros((3 * M, n + M))
    Q[:M, :n] = system.A_re
    Q[M:2 * M, :n] = system.A_im
    Q[2 * M:, n:] = np.eye(M)
    P = _polygon_rows(M, K, lambda i: 2 * M + i, 3 * M)
    h = P @ np.concatenate([system.F_re, system.F_im, np.zeros(M)])
    c = np.concatenate([np.zeros(n), system.weights * system.dx])
    nonneg = np.ones(n + M, dtype=bool)
    return LpStandardForm(c=c, G=ProductMatrix(P, Q), h=h, nonneg=nonneg)


def to_l2_problem(system: ResidualSystem) -> NnlsProblem:
    """Stacked real least squares with rows scaled by ``sqrt(w_i dx)``."""
    s = np.sqrt(system.weights * system.dx)[:, None]
    A = np.vstack([s * system.A_re, s * system.A_im])
    b = np.concatenate([s[:, 0] * system.F_re, s[:, 0] * system.F_im])
    return NnlsProblem(A, b)


def permittivity_view(h_values, x) -> np.ndarray:
    """``eps(x_i) = h(x_i) / x_i``."""
    x = np.asarray(x.points if isinstance(x, SampleGrid) else x, dtype=float)
    h = np.asarray(h_values, dtype=complex)
    if h.shape != x.shape:
        raise InvalidArgumentError("h_values and abscissae must match")
    if np.any(x == 0):
        raise InvalidArgumentError("permittivity is undefined at x = 0")
    return h / x
