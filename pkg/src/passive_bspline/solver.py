"""Dense convex solvers: an interior-point LP method and active-set NNLS.

The LP solver handles

    minimize    c @ x
    subject to  G @ x <= h,   A @ x == b,   x[j] >= 0 for flagged j,

with a homogeneous self-dual embedding and Mehrotra predictor-corrector
steps.  Each iteration factors the ``n x n`` matrix ``G.T @ W @ G`` once;
``G`` may be given as a :class:`ProductMatrix` ``P @ Q`` with sparse ``P``
(the polygonal modulus constraints have this shape) so that the Gram
product never touches the full row count.

Nonnegative least squares follows Lawson and Hanson.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import InvalidArgumentError

__all__ = [
    "ProductMatrix",
    "LpStandardForm",
    "NnlsProblem",
    "SolveResult",
    "solve_lp",
    "solve_nnls",
]

OPTIMAL = "optimal"
MAX_ITER = "max-iter"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical-failure"


class ProductMatrix:
    """Linear operator ``G = P @ Q`` with sparse ``P`` (m x r) and dense ``Q`` (r x n)."""

    def __init__(self, P, Q):
        self.P = sp.csr_matrix(P)
        self.Q = np.asarray(Q, dtype=float)
        if self.P.shape[1] != self.Q.shape[0]:
            raise InvalidArgumentError("inner dimensions of P and Q differ")
        self.shape = (self.P.shape[0], self.Q.shape[1])

    def __matmul__(self, x):
        return self.P @ (self.Q @ x)

    def rmatvec(self, z):
        return self.Q.T @ (self.P.T @ z)

    def gram(self, w):
        M = (self.P.T @ sp.diags(w) @ self.P).toarray()
        return self.Q.T @ M @ self.Q

    def toarray(self):
        return np.asarray(self.P @ self.Q)

    def all_finite(self):
        return bool(np.all(np.isfinite(self.P.data)) and np.all(np.isfinite(self.Q)))


def _rmatvec(G, z):
    return G.rmatvec(z) if isinstance(G, ProductMatrix) else G.T @ z


def _gram(G, w):
    if isinstance(G, ProductMatrix):
        return G.gram(w)
    return G.T @ (w[:, None] * G)


@dataclass(frozen=True, eq=False)
class LpStandardForm:
    """``min c@x  s.t.  G@x <= h, A@x == b, x[nonneg] >= 0``."""

    c: np.ndarray
    G: object
    h: np.ndarray
    A: np.ndarray | None = None
    b: np.ndarray | None = None
    nonneg: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        n = c.size
        if n == 0:
            raise InvalidArgumentError("LP needs at least one variable")
        G = self.G if isinstance(self.G, ProductMatrix) else np.atleast_2d(np.asarray(self.G, dtype=float))
        h = np.asarray(self.h, dtype=float)
        if G.shape != (h.size, n):
            raise InvalidArgumentError(f"G has shape {G.shape}, expected ({h.size}, {n})")
        A = np.zeros((0, n)) if self.A is None else np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.zeros(0) if self.b is None else np.asarray(self.b, dtype=float)
        if A.shape != (b.size, n):
            raise InvalidArgumentError(f"A has shape {A.shape}, expected ({b.size}, {n})")
        nonneg = np.zeros(n, dtype=bool) if self.nonneg is None else np.asarray(self.nonneg, dtype=bool)
        if nonneg.shape != (n,):
            raise InvalidArgumentError("nonneg mask must have one flag per variable")
        finite = G.all_finite() if isinstance(G, ProductMatrix) else bool(np.all(np.isfinite(G)))
        if not (finite and np.all(np.isfinite(c)) and np.all(np.isfinite(h)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InvalidArgumentError("LP data must be finite")
        for name, val in (("c", c), ("G", G), ("h", h), ("A", A), ("b", b), ("nonneg", nonneg)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.c.size


@dataclass(frozen=True, eq=False)
class NnlsProblem:
    """``min ||A x - b||_2  s.t.  x >= 0``."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float)
        if A.shape[0] != b.size:
            raise InvalidArgumentError(f"design has {A.shape[0]} rows but target has {b.size}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InvalidArgumentError("NNLS data must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)


@dataclass
class SolveResult:
    status: str
    x: np.ndarray
    objective: float
    gap: float
    iterations: int
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    z: np.ndarray | None = None
    y: np.ndarray | None = None
    history: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def _step_to_boundary(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def solve_lp(p: LpStandardForm, tol: float = 1e-8, max_iter: int = 200, step_fraction: float = 0.99, reg: float = 1e-12) -> SolveResult:
    """Homogeneous self-dual primal-dual interior-point method.

    Terminates with ``optimal`` when the relative primal and dual residuals
    and the relative duality gap are all below ``tol``; reports
    ``infeasible`` or ``unbounded`` from the corresponding Farkas
    certificates, ``numerical-failure`` when the normal equations cannot be
    factored, and ``max-iter`` otherwise.
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    c, G, h, A, b = p.c, p.G, p.h, p.A, p.b
    n = p.n
    bidx = np.flatnonzero(p.nonneg)
    mg, mb, me = h.size, bidx.size, b.size
    m = mg + mb
    hfull = np.concatenate([h, np.zeros(mb)])

    def gx(x):  # full inequality operator [G; -I_B]
        return np.concatenate([G @ x, -x[bidx]])

    def gtz(z):
        out = _rmatvec(G, z[:mg]) if mg else np.zeros(n)
        out[bidx] -= z[mg:]
        return out

    nc, nh, nb = max(1.0, np.linalg.norm(c)), max(1.0, np.linalg.norm(hfull)), max(1.0, np.linalg.norm(b))

    x = np.zeros(n)
    y = np.zeros(me)
    s = np.ones(m)
    z = np.ones(m)
    tau = kappa = 1.0
    history = []
    status = MAX_ITER
    it = 0
    pres = dres = gap = np.inf

    for it in range(max_iter + 1):
        rx = A.T @ y + gtz(z) + c * tau
        ry = -A @ x + b * tau
        rz = -gx(x) - s + hfull * tau
        rt = -c @ x - b @ y - hfull @ z - kappa
        mu = (s @ z + tau * kappa) / (m + 1)

        xb, yb, zb, sb = x / tau, y / tau, z / tau, s / tau
        pobj = c @ xb
        dobj = -hfull @ zb - b @ yb
        pres = max(np.linalg.norm(gx(xb) + sb - hfull) / nh, np.linalg.norm(A @ xb - b) / nb if me else 0.0)
        dres = np.linalg.norm(A.T @ yb + gtz(zb) + c) / nc
        gap = sb @ zb
        relgap = min(gap, abs(pobj - dobj)) / max(1.0, abs(pobj), abs(dobj))
        history.append(dict(pobj=pobj, dobj=dobj, pres=pres, dres=dres, gap=gap, tau=tau, kappa=kappa,
                            xnorm=np.linalg.norm(xb), znorm=np.linalg.norm(zb), ynorm=np.linalg.norm(yb)))
        if pres <= tol and dres <= tol and relgap <= tol:
            status = OPTIMAL
            break
        # Farkas certificates from the unnormalized iterate
        hz = hfull @ z + b @ y
        if hz < 0:
            pinf = np.linalg.norm(A.T @ y + gtz(z)) / nc / (-hz)
            if pinf <= tol:
                status = INFEASIBLE
                break
        cx = c @ x
        if cx < 0:
            dinf = max(np.linalg.norm(gx(x) + s) / nh, np.linalg.norm(A @ x) / nb if me else 0.0) / (-cx)
            if dinf <= tol:
                status = UNBOUNDED
                break
        if it == max_iter:
            break

        W = z / s
        H = _gram(G, W[:mg]) if mg else np.zeros((n, n))
        H[bidx, bidx] += W[mg:]
        H[np.diag_indices(n)] += reg * max(1.0, float(np.max(np.abs(np.diag(H)))))
        try:
            L = scipy.linalg.cho_factor(H, lower=True, check_finite=True)
            if me:
                HiAt = scipy.linalg.cho_solve(L, A.T)
                S = A @ HiAt
                LS = scipy.linalg.cho_factor(S + reg * max(1.0, np.max(np.abs(np.diag(S)))) * np.eye(me), lower=True)
        except (np.linalg.LinAlgError, ValueError):
            status = NUMERICAL_FAILURE
            break

        def kkt(r1, r2, r3):
            # A'dy + G'dz = r1 ; -A dx = r2 ; -G dx + (S/Z) dz = r3
            g = r1 - gtz(W * r3)
            if me:
                dy = scipy.linalg.cho_solve(LS, A @ scipy.linalg.cho_solve(L, g) + r2)
                dx = scipy.linalg.cho_solve(L, g - A.T @ dy)
            else:
                dy = np.zeros(0)
                dx = scipy.linalg.cho_solve(L, g)
            dz = W * (r3 + gx(dx))
            return dx, dy, dz

        dx2, dy2, dz2 = kkt(-c, -b, -hfull)
        denom = kappa / tau - (c @ dx2 + b @ dy2 + hfull @ dz2)

        def direction(eta, gamma, corr_s, corr_k):
            rs = -s * z + gamma * mu - corr_s
            rk = -tau * kappa + gamma * mu - corr_k
            dx1, dy1, dz1 = kkt(-eta * rx, -eta * ry, -eta * rz + rs / z)
            rhs_t = -eta * rt + rk / tau
            dtau = (rhs_t + c @ dx1 + b @ dy1 + hfull @ dz1) / denom
            dx = dx1 + dtau * dx2
            dy = dy1 + dtau * dy2
            dz = dz1 + dtau * dz2
            ds = (rs - s * dz) / z
            dkappa = (rk - kappa * dtau) / tau
            return dx, dy, dz, ds, dtau, dkappa

        def max_step(dz, ds, dtau, dkappa):
            return min(
                _step_to_boundary(s, ds),
                _step_to_boundary(z, dz),
                _step_to_boundary(np.array([tau]), np.array([dtau])),
                _step_to_boundary(np.array([kappa]), np.array([dkappa])),
            )

        dxa, dya, dza, dsa, dta, dka = direction(1.0, 0.0, 0.0, 0.0)
        alpha_aff = min(1.0, max_step(dza, dsa, dta, dka))
        mu_aff = ((s + alpha_aff * dsa) @ (z + alpha_aff * dza) + (tau + alpha_aff * dta) * (kappa + alpha_aff * dka)) / (m + 1)
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3
        dx, dy, dz, ds, dt, dk = direction(1.0 - sigma, sigma, dsa * dza, dta * dka)
        alpha = min(1.0, step_fraction * max_step(dz, ds, dt, dk))
        if not np.isfinite(alpha) or alpha <= 0:
            status = NUMERICAL_FAILURE
            break
        x = x + alpha * dx
        y = y + alpha * dy
        z = z + alpha * dz
        s = s + alpha * ds
        tau = tau + alpha * dt
        kappa = kappa + alpha * dk
        if not (np.all(np.isfinite(x)) and np.isfinite(tau)):
            status = NUMERICAL_FAILURE
            break

    if status in (INFEASIBLE, UNBOUNDED):
        xo, objective = x, np.nan
    else:
        xo = x / tau
        objective = float(c @ xo)
    return SolveResult(
        status=status,
        x=xo,
        objective=objective,
        gap=float(gap),
        iterations=it,
        primal_residual=float(pres),
        dual_residual=float(dres),
        z=z / tau,
        y=y / tau,
        history=history,
    )


def solve_nnls(p: NnlsProblem, tol: float = 1e-10, max_iter: int | None = None) -> SolveResult:
    """Lawson-Hanson active-set NNLS.

    On return the gradient ``w = A.T (b - A x)`` satisfies ``w <= tol`` on
    the bound set and ``|w| <= tol`` on the free set, both relative to
    ``max(1, ||A.T b||)``.  ``history`` records the residual norm after each
    outer iteration.
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    A, b = p.A, p.b
    n = A.shape[1]
    max_iter = 3 * n + 10 if max_iter is None else max_iter
    scale = max(1.0, float(np.linalg.norm(A.T @ b, np.inf)))
    atol = tol * scale
    x = np.zeros(n)
    free = np.zeros(n, dtype=bool)
    w = A.T @ (b - A @ x)
    history = [float(np.linalg.norm(b - A @ x))]
    it = 0
    status = OPTIMAL
    while True:
        cand = np.where(~free, w, -np.inf)
        if n == 0 or np.max(cand) <= atol:
            break
        if it >= max_iter:
            status = NUMERICAL_FAILURE
            break
        it += 1
        j = int(np.argmax(cand))
        free[j] = True
        while True:
            zf = np.zeros(n)
            idx = np.flatnonzero(free)
            zf[idx] = np.linalg.lstsq(A[:, idx], b, rcond=None)[0]
            if np.all(zf[idx] > 0):
                x = zf
                break
            neg = free & (zf <= 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = x[neg] / (x[neg] - zf[neg])
            alpha = float(np.min(ratios)) if ratios.size else 0.0
            x = x + alpha * (zf - x)
            drop = free & (x <= 1e-14 * max(1.0, np.max(np.abs(x))))
            if not np.any(drop):
                drop[np.flatnonzero(neg)[np.argmin(ratios)]] = True
            x[drop] = 0.0
            free &= ~drop
            if not np.any(free):
                break
        w = A.T @ (b - A @ x)
        history.append(float(np.linalg.norm(b - A @ x)))
        if not free[j] and np.all(x == 0) and it > 1 and history[-1] >= history[-2]:
            # newly freed column rejected at once: its gradient is a rounding artifact
            w[j] = min(w[j], 0.0)
    kkt = max(
        float(np.max(np.abs(w[free]))) if np.any(free) else 0.0,
        float(np.max(w[~free])) if np.any(~free) else 0.0,
        0.0,
    ) / scale
    r = b - A @ x
    return SolveResult(
        status=status,
        x=x,
        objective=float(np.linalg.norm(r)),
        gap=kkt,
        iterations=it,
        history=history,
    )
