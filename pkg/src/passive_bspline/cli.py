"""Command-line experiment runner.

Subcommands
-----------
fit      solve passive fits for every (B, N) pair and write CSV results
bound    print sum-rule lower bounds for each B
sumrule  check the k = 0 sum rule and the lower-bound chain of a fit
basis    write a centered prototype B-spline and its Hilbert transform

Settings come from defaults, then an optional ``key = value`` file given by
``--config``, then the command line.  Exit codes: 0 success, 2 usage error,
3 solver failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .approx import TargetSpec
from .bspline import prototype_bspline
from .cauchy import hilbert_pp
from .errors import InvalidArgumentError, SingularEvaluationError
from .experiment import FitResult, density_from_samples, error_of_measure, run_fit
from .herglotz import (
    HerglotzMeasure,
    bound_chain,
    boundary_value,
    lower_bound_generic,
    metamaterial_bound,
    sum_rule,
)

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

SUMMARY_COLUMNS = [
    "B", "N", "p", "E", "bound", "bracket_lo", "bracket_hi", "a_minus1", "iterations", "status",
    "eps_t_re", "eps_t_im", "b1", "m", "K", "omega0", "n_band", "weight", "atom", "run_dir",
]

DEFAULTS = {
    "eps_t": "-1,0.05",
    "target_file": None,
    "omega0": "1",
    "B": "0.1",
    "N": "500",
    "m": "2",
    "p": "inf",
    "K": "64",
    "grid": None,
    "weight": "1/x",
    "atom": "on",
    "fix_b1": "1",
    "tol": "1e-8",
    "max_iter": "200",
    "out": ".",
    "delta": "1",
    "fit": None,
    "rooftops": "",
    "atom_weight": "0",
}


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "on" if v else "off"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise UsageError(f"{path} is empty")
    return rows[0], rows[1:]


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes equal underscores."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def _floats(text: str, name: str) -> list[float]:
    try:
        vals = [float(s) for s in str(text).split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"{name}: expected a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise UsageError(f"{name}: empty list")
    return vals


def _ints(text: str, name: str) -> list[int]:
    vals = _floats(text, name)
    if any(v != int(v) for v in vals):
        raise UsageError(f"{name}: expected integers, got {text!r}")
    return [int(v) for v in vals]


def _one(text, name, kind=float):
    vals = _floats(text, name)
    if len(vals) != 1:
        raise UsageError(f"{name}: expected a single value")
    return kind(vals[0]) if kind is float else _ints(text, name)[0]


def _eps_t(text) -> complex:
    vals = _floats(text, "eps-t")
    if len(vals) == 1:
        vals.append(0.0)
    if len(vals) != 2:
        raise UsageError("eps-t: expected RE,IM")
    return complex(vals[0], vals[1])


def _p(text):
    t = str(text).strip().lower()
    if t not in ("1", "2", "inf"):
        raise UsageError(f"p must be 1, 2 or inf, got {text!r}")
    return np.inf if t == "inf" else int(t)


def _onoff(text) -> bool:
    t = str(text).strip().lower()
    if t not in ("on", "off"):
        raise UsageError(f"atom must be on or off, got {text!r}")
    return t == "on"


def _fix_b1(text):
    t = str(text).strip().lower()
    if t in ("free", "none"):
        return None
    return _one(t, "fix-b1")


def load_target_file(path) -> TargetSpec:
    """Permittivity samples as ``x, value`` with a complex literal or ``x, re, im``.

    The fitted function is ``F(x) = x * eps(x)``.
    """
    xs, vals = [], []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [s for s in line.replace(",", " ").split() if s]
            try:
                if len(parts) == 2:
                    xs.append(float(parts[0]))
                    vals.append(complex(parts[1].replace("i", "j")))
                elif len(parts) == 3:
                    xs.append(float(parts[0]))
                    vals.append(complex(float(parts[1]), float(parts[2])))
                else:
                    raise ValueError
            except ValueError:
                if not xs:  # header line
                    continue
                raise UsageError(f"{path}: cannot parse line {line!r}") from None
    x = np.array(xs)
    return TargetSpec("tabulated", x=x, values=x * np.array(vals))


class Settings(dict):
    """Merged string settings with typed accessors."""

    def __getattr__(self, key):
        try:
            return self[key]
        except KeyError:
            raise AttributeError(key) from None


def merge_settings(args: argparse.Namespace) -> Settings:
    s = dict(DEFAULTS)
    if args.config:
        s.update(read_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            s[key] = val
    return Settings(s)


def _target(s: Settings) -> TargetSpec:
    if s.target_file:
        return load_target_file(s.target_file)
    return TargetSpec.permittivity(_eps_t(s.eps_t))


def _run_name(B, N, many: bool) -> str:
    return f"B{B:g}_N{N}" if many else ""


def cmd_fit(s: Settings) -> int:
    target = _target(s)
    Bs, Ns = _floats(s.B, "B"), _ints(s.N, "N")
    kw = dict(
        omega0=_one(s.omega0, "omega0"), m=_one(s.m, "m", int), p=_p(s.p), K=_one(s.K, "K", int),
        n_band=_one(s.grid or "1000", "grid", int), weight=s.weight, atom=_onoff(s.atom), fix_b1=_fix_b1(s.fix_b1),
        tol=_one(s.tol, "tol"), max_iter=_one(s.max_iter, "max-iter", int),
    )
    if s.weight not in ("unit", "1/x"):
        raise UsageError("weight must be unit or 1/x")
    if not kw["tol"] > 0:
        raise UsageError("tol must be positive")
    out = Path(s.out)
    out.mkdir(parents=True, exist_ok=True)
    many = len(Bs) * len(Ns) > 1
    rows, failed = [], False
    for B in Bs:
        for N in Ns:
            res = run_fit(target, B, N, **kw)
            name = _run_name(B, N, many)
            run_dir = out / name
            run_dir.mkdir(exist_ok=True)
            write_fit_files(res, run_dir)
            failed |= not res.ok
            eps = target.eps_t if target.kind == "permittivity" else complex(np.nan, np.nan)
            rows.append([
                B, N, "inf" if res.p == np.inf else int(res.p), res.E, res.bound, res.bracket[0], res.bracket[1],
                res.a_minus1, res.iterations, res.status, eps.real, eps.imag, res.b1, kw["m"], kw["K"],
                kw["omega0"], kw["n_band"], kw["weight"], kw["atom"], name or ".",
            ])
            print(f"B={B:g} N={N} status={res.status} E={res.E:.6g} bound={res.bound:.6g}", file=sys.stderr)
    write_csv(out / "fit_summary.csv", SUMMARY_COLUMNS, rows)
    return EXIT_SOLVER if failed else EXIT_OK


def write_fit_files(res: FitResult, run_dir: Path) -> None:
    grid = res.grid
    meas = res.measure()
    x = grid.points
    eps = boundary_value(meas, x) / x
    tgt = res.target(x) / x
    write_csv(run_dir / "fit_eps.csv", ["x", "eps_re", "eps_im", "target_re", "target_im"],
              zip(x, eps.real, eps.imag, tgt.real, tgt.imag))
    knots = res.system.basis.partition.knots
    lo, hi = grid.extended_band
    xd = np.union1d(knots[(knots >= lo) & (knots <= hi)], x)
    write_csv(run_dir / "fit_density.csv", ["x", "beta_prime"], zip(xd, meas.density(xd)))
    basis = res.system.basis
    write_csv(run_dir / "fit_coeffs.csv", ["n", "left_knot", "spacing", "m", "coeff"],
              ((n, basis.shifts[n], basis.partition.spacing, basis.m, c) for n, c in enumerate(res.coeffs)))


def load_fit_measure(run_dir: Path, b1: float, a_minus1: float) -> HerglotzMeasure:
    """Rebuild a fitted measure from ``fit_density.csv`` (piecewise linear densities)."""
    header, rows = read_csv(Path(run_dir) / "fit_density.csv")
    if header != ["x", "beta_prime"]:
        raise UsageError(f"{run_dir}/fit_density.csv has unexpected columns {header}")
    data = np.array(rows, dtype=float)
    atoms = ((0.0, -a_minus1),) if a_minus1 != 0 else ()
    return HerglotzMeasure(b1=b1, point_masses=atoms, density=density_from_samples(data[:, 0], data[:, 1]),
                           symmetric=True)


def recompute_summary_error(out_dir, row: dict) -> float:
    """``E`` of a summary row recomputed from its ``fit_density.csv``."""
    from .approx import make_grid

    meas = load_fit_measure(Path(out_dir) / row["run_dir"], float(row["b1"]), float(row["a_minus1"]))
    grid = make_grid(float(row["omega0"]), float(row["B"]), int(row["n_band"]))
    x = grid.omega_points
    F = x * complex(float(row["eps_t_re"]), float(row["eps_t_im"]))
    w = 1.0 / x if row["weight"] == "1/x" else np.ones_like(x)
    p = np.inf if row["p"] == "inf" else int(row["p"])
    return error_of_measure(meas, x, F, w, p=p, dx=grid.dx)


def cmd_bound(s: Settings) -> int:
    eps_t = _eps_t(s.eps_t)
    eps_inf = _fix_b1(s.fix_b1)
    eps_inf = 1.0 if eps_inf is None else eps_inf
    omega0 = _one(s.omega0, "omega0")
    rows = []
    for B in _floats(s.B, "B"):
        if not 0 < B < 2:
            raise UsageError(f"B must lie in (0, 2), got {B:g}")
        try:
            meta = metamaterial_bound(eps_inf, eps_t, B)
        except InvalidArgumentError as exc:
            raise UsageError(str(exc)) from None
        b1_0 = -eps_t.real
        generic = lower_bound_generic(eps_inf, b1_0, B * omega0) if b1_0 >= 0 else float("nan")
        rows.append((B, eps_t.real, eps_t.imag, eps_inf, generic, meta))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["B", "eps_t_re", "eps_t_im", "eps_inf", "generic", "metamaterial"])
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return EXIT_OK


def _synthetic_measure(s: Settings) -> HerglotzMeasure:
    """Origin atom plus symmetric roof-top pairs given as ``center:halfwidth:mass``."""
    w0 = _one(s.atom_weight, "atom-weight")
    dens = None
    for item in filter(None, (t.strip() for t in str(s.rooftops).split(","))):
        try:
            c, d, mass = (float(t) for t in item.split(":"))
        except ValueError:
            raise UsageError(f"rooftop {item!r}: expected center:halfwidth:mass") from None
        if not (d > 0 and c - d >= 0 and mass >= 0):
            raise UsageError(f"rooftop {item!r}: need halfwidth > 0, support in x >= 0, mass >= 0")
        hat = prototype_bspline(2, d) * (mass / d)
        pair = hat.shifted(c - d) + hat.shifted(-c - d)
        dens = pair if dens is None else dens + pair
    atoms = ((0.0, w0),) if w0 else ()
    return HerglotzMeasure(point_masses=atoms, density=dens, symmetric=True)


def cmd_sumrule(s: Settings) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    if s.fit is None:
        if not (s.rooftops or float(s.atom_weight)) and not getattr(s, "synthetic", False):
            raise UsageError("sumrule needs --fit DIR or a synthetic measure (--synthetic, --rooftops, --atom-weight)")
        lhs, rhs = sum_rule(_synthetic_measure(s), 0)
        w.writerow(["source", "lhs", "rhs", "difference"])
        w.writerow(["synthetic", _fmt(lhs), _fmt(rhs), _fmt(lhs - rhs)])
        return EXIT_OK
    out = Path(s.fit)
    header, rows = read_csv(out / "fit_summary.csv")
    w.writerow(["B", "N", "lhs", "rhs", "difference", "chain_lower", "chain_middle", "chain_upper", "delta", "chain"])
    for raw in rows:
        row = dict(zip(header, raw))
        b1 = float(row["b1"])
        meas = load_fit_measure(out / row["run_dir"], b1, float(row["a_minus1"]))
        lhs, rhs = sum_rule(meas, 0)
        re_t = float(row["eps_t_re"])
        b1_0 = -re_t
        B, omega0 = float(row["B"]), float(row["omega0"])
        if np.isfinite(re_t) and b1_0 >= 0 and b1 + b1_0 > 0:
            omega = (omega0 * (1 - B / 2), omega0 * (1 + B / 2))
            ch = bound_chain(meas, lambda x, a=b1_0: a * np.asarray(x, dtype=float) + 0j, b1_0, omega)
            chain = [ch.lower, ch.middle, ch.upper, ch.delta, "ok" if ch.holds else "VIOLATED"]
        else:
            chain = [np.nan] * 4 + ["n/a"]
        w.writerow([_fmt(v) for v in [B, int(row["N"]), lhs, rhs, lhs - rhs] + chain])
    return EXIT_OK


def cmd_basis(s: Settings) -> int:
    m = _one(s.m, "m", int)
    h = _one(s.delta, "delta")
    n = _one(s.grid or "2001", "grid", int)
    if m < 1 or not h > 0:
        raise UsageError("need m >= 1 and delta > 0")
    if n < 2:
        raise UsageError("grid must have at least 2 points")
    proto = prototype_bspline(m, h).shifted(-m * h / 2)
    H = hilbert_pp(proto)
    half = (m / 2 + 2) * h
    x = np.linspace(-half, half, n)
    # exact knot abscissae keep the singular points recognizable
    k = np.round(x / h * 2) / 2 * h
    x = np.where(np.abs(x - k) < 1e-12 * h, k, x)
    p = proto(x)
    phat = np.empty_like(x)
    for i, xi in enumerate(x):
        try:
            phat[i] = H(xi)
        except SingularEvaluationError:
            phat[i] = np.nan
    out = Path(s.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "basis.csv", ["x", "p", "p_hat"], zip(x, p, phat))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value settings file")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--eps-t", dest="eps_t", metavar="RE,IM", help="target permittivity")
    common.add_argument("--target-file", dest="target_file", metavar="PATH", help="tabulated target permittivity")
    common.add_argument("--omega0", metavar="FLOAT")
    common.add_argument("--B", metavar="LIST", help="relative bandwidths")
    common.add_argument("--N", metavar="LIST", help="band subinterval counts")
    common.add_argument("--m", metavar="INT", help="B-spline order")
    common.add_argument("--p", choices=["1", "2", "inf"])
    common.add_argument("--K", metavar="INT", help="polygon directions")
    common.add_argument("--grid", metavar="INT", help="sample points on the band (basis: points on the plot grid)")
    common.add_argument("--weight", choices=["unit", "1/x"])
    common.add_argument("--atom", choices=["on", "off"])
    common.add_argument("--fix-b1", dest="fix_b1", metavar="FLOAT", help="fixed slope, or 'free'")
    common.add_argument("--tol", metavar="FLOAT")
    common.add_argument("--max-iter", dest="max_iter", metavar="INT")

    parser = argparse.ArgumentParser(prog="passive-bspline", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fit", parents=[common], help="solve passive fits")
    sub.add_parser("bound", parents=[common], help="print lower bounds")
    sr = sub.add_parser("sumrule", parents=[common], help="check sum rule and bound chain")
    sr.add_argument("--fit", metavar="DIR", help="output directory of a fit run")
    sr.add_argument("--synthetic", action="store_true", help="use a synthetic measure")
    sr.add_argument("--rooftops", metavar="LIST", help="center:halfwidth:mass,...")
    sr.add_argument("--atom-weight", dest="atom_weight", metavar="FLOAT")
    bs = sub.add_parser("basis", parents=[common], help="write prototype and transform")
    bs.add_argument("--delta", metavar="FLOAT", help="knot spacing")
    return parser


COMMANDS = {"fit": cmd_fit, "bound": cmd_bound, "sumrule": cmd_sumrule, "basis": cmd_basis}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # "--eps-t -1,0" would otherwise be read as an option
    for i, tok in enumerate(argv[:-1]):
        if tok == "--eps-t" and argv[i + 1].startswith("-"):
            argv[i : i + 2] = [f"--eps-t={argv[i + 1]}"]
            break
    args = parser.parse_args(argv)
    try:
        s = merge_settings(args)
        s["synthetic"] = getattr(args, "synthetic", False)
        return COMMANDS[args.command](s)
    except (UsageError, InvalidArgumentError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"{parser.prog}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
