"""Command-line interface: ``hjsde <subcommand> ...``.

Exit codes: 0 success / verdict pass, 1 verification failure, 2 usage or
construction error.  Reports are JSON (default) or CSV; output is
deterministic for a given configuration, independent of the worker count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .curvature import GUARD_RHO, curvature_report, verify_sde, verify_sfk
from .errors import HJSDEError
from .halfplane import grid, laplacian_residual
from .joyce import (
    det_identity_residual,
    eval_F_jet,
    joyce_residual,
    joyce_scale,
    phi_from_potential,
)
from .metrics import (
    HYPERBOLIC_HOMOTHETY,
    closed_form_oracle,
    conformal_infinity_odd,
    extension_residuals,
    metric_sde,
)
from .parallel import pmap, worker_count
from .profiles import (
    BoundaryProfile,
    boundary_value,
    boundary_zero,
    canonical_profile,
    canonical_ys,
    ch_profile,
    format_number,
    odd_extension,
    parse_number,
    trace_zero,
    validate_inf1,
)
from .resolution import (
    QuotientData,
    blow_up,
    c1_class,
    cf_expand,
    conjugate_q,
    intersection_matrix,
    leading_minors,
    minimal_sequence,
    self_intersections,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

HYPERBOLIC = BoundaryProfile((Fraction(-1), Fraction(1)), (Fraction(-1), Fraction(1)),
                             kind="hyperbolic")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    p: int | None = None
    q: int | None = None
    kind: str = "canonical"
    profile_file: str | None = None
    rho_range: tuple = (0.1, 3.0)
    eta_range: tuple = (-2.0, 2.0)
    n: int = 15
    tol: float = 1e-6
    fmt: str = "json"
    output: str | None = None
    workers: int = 1
    extra: dict = field(default_factory=dict)


# -- formatting ---------------------------------------------------------------

def _plain(x):
    """Convert to JSON-ready values; rationals become "num/den" strings."""
    if isinstance(x, Fraction):
        return format_number(x)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if x is None or isinstance(x, str):
        return x
    return str(x)


def _cell(x) -> str:
    if isinstance(x, Fraction):
        return format_number(x) if x.denominator != 1 else str(x.numerator)
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def render(report, fmt: str, rows=None, header=None) -> str:
    if fmt == "csv":
        if rows is None:
            raise UsageError("this subcommand has no tabular output; use --format json")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()
    return json.dumps(_plain(report), indent=2) + "\n"


def _emit(text: str, cfg: RunConfig):
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- construction helpers -----------------------------------------------------

def _quotient(cfg: RunConfig) -> QuotientData:
    if cfg.p is None or cfg.q is None:
        raise UsageError("--p and --q are required")
    return QuotientData(cfg.p, cfg.q)


def build_profile(cfg: RunConfig) -> BoundaryProfile:
    if cfg.profile_file:
        with open(cfg.profile_file, encoding="utf-8") as fh:
            return BoundaryProfile.from_json(fh.read())
    kind = cfg.kind
    if kind == "hyperbolic":
        return HYPERBOLIC
    data = _quotient(cfg)
    if kind == "ch":
        return ch_profile(data)
    prof = canonical_profile(minimal_sequence(data))
    if kind == "odd":
        return odd_extension(prof)
    if kind != "canonical":
        raise UsageError(f"unknown profile kind {kind!r}")
    return prof


def _grid(cfg: RunConfig):
    rho, eta = grid(cfg.rho_range, cfg.eta_range, cfg.n)
    return rho, eta


def _chunks(rho, eta, workers):
    k = max(1, min(workers, len(rho)))
    return [(r, e) for r, e in zip(np.array_split(rho, k), np.array_split(eta, k))]


# -- subcommands --------------------------------------------------------------

def run_resolve(cfg: RunConfig):
    data = _quotient(cfg)
    seq = minimal_sequence(data)
    chain = []
    for j in cfg.extra.get("blowup") or []:
        seq = blow_up(seq, j)
        chain.append(j)
    e = self_intersections(seq)
    rep = {
        "p": data.p,
        "q": data.q,
        "continued_fraction": cf_expand(data),
        "blowups": chain,
        "e": e,
        "sequence": seq.to_json(),
        "intersection_matrix": intersection_matrix(seq).tolist(),
        "leading_minors": leading_minors(intersection_matrix(seq)),
        "c1": str(c1_class(seq)),
        "conjugate_q": conjugate_q(data),
    }
    rows = [(j, ej) for j, ej in enumerate(e, start=1)]
    return EXIT_OK, rep, rows, ["j", "e"]


def run_profile(cfg: RunConfig):
    prof = build_profile(cfg)
    rep = prof.to_dict()
    rep["violations"] = [{"clause": v.clause, "detail": v.detail} for v in validate_inf1(prof)]
    try:
        rep["boundary_zero"] = boundary_zero(prof)
    except HJSDEError:
        rep["boundary_zero"] = None
    rows = list(zip(prof.breakpoints, prof.values))
    return EXIT_OK, rep, rows, ["y", "f0"]


def _eval_chunk(args):
    prof, rho, eta = args
    fj = eval_F_jet(prof, (rho, eta))
    ph = phi_from_potential(fj)
    return fj.F.value, fj.f.value, ph.det, ph.v1, ph.v2


def run_eval(cfg: RunConfig):
    prof = build_profile(cfg)
    pts = cfg.extra.get("points")
    if pts:
        rho = np.array([r for r, _ in pts], dtype=float)
        eta = np.array([e for _, e in pts], dtype=float)
    else:
        rho, eta = _grid(cfg)
    parts = pmap(_eval_chunk, [(prof, r, e) for r, e in _chunks(rho, eta, cfg.workers)], cfg.workers)
    F = np.concatenate([p[0] for p in parts])
    f = np.concatenate([p[1] for p in parts])
    det = np.concatenate([p[2] for p in parts])
    v1 = np.concatenate([p[3] for p in parts], axis=-1)
    v2 = np.concatenate([p[4] for p in parts], axis=-1)
    rows = [(rho[i], eta[i], F[i], f[i], det[i], v1[0, i], v1[1, i], v2[0, i], v2[1, i])
            for i in range(len(rho))]
    header = ["rho", "eta", "F", "f", "det_phi", "v1_0", "v1_1", "v2_0", "v2_1"]
    rep = {"points": [dict(zip(header, r)) for r in rows]}
    return EXIT_OK, rep, rows, header


def run_trace_zero(cfg: RunConfig):
    prof = build_profile(cfg)
    b_lo, b_hi = cfg.extra.get("b_range") or (0.05, 2.0)
    bs = np.linspace(b_lo, b_hi, cfg.n)
    tr = trace_zero(prof, bs, workers=cfg.workers)
    rows = [(tr.b[i], tr.t[i], tr.polyline[i, 0], tr.polyline[i, 1], tr.residuals[i])
            for i in range(len(tr.b))]
    header = ["b", "t", "rho", "eta", "residual"]
    rep = {"boundary_zero": tr.boundary_zero, "orthogonality_defect": tr.orthogonality_defect,
           "arcs": [dict(zip(header, r)) for r in rows]}
    return EXIT_OK, rep, rows, header


def run_plot_data(cfg: RunConfig):
    mode = cfg.extra.get("mode", "f0")
    if mode == "f0":
        prof = build_profile(cfg)
        lo, hi = cfg.eta_range
        etas = np.linspace(lo, hi, cfg.n)
        vals = boundary_value(prof, etas)
        rows = list(zip(etas, np.asarray(vals, dtype=float)))
        return EXIT_OK, {"eta": etas, "f0": [r[1] for r in rows]}, rows, ["eta", "f0"]
    if mode == "zero":
        return run_trace_zero(cfg)
    if mode == "infinity":
        seq = minimal_sequence(_quotient(cfg))
        canonical_profile(seq)
        rhos = np.geomspace(max(cfg.rho_range[0], 1e-6), cfg.rho_range[1], cfg.n)
        bs = conformal_infinity_odd(seq, rhos)
        keys = list(bs.components)
        rows = [[rhos[i]] + [float(np.asarray(bs.components[k])[i]) for k in keys]
                for i in range(len(rhos))]
        rep = {"center": bs.extras["center"], "rho": rhos,
               **{k: np.asarray(v) for k, v in bs.components.items()}}
        return EXIT_OK, rep, rows, ["rho"] + keys
    raise UsageError(f"unknown plot-data mode {mode!r}")


# -- verification -------------------------------------------------------------

def _sde_chunk(args):
    prof, rho, eta, tol = args
    v = verify_sde(prof, (rho, eta), tol=tol)
    return v.per_point, v.vanishing_half


def _default_box(cfg: RunConfig, target: str, prof=None):
    if not cfg.extra.get("box_given"):
        if target == "hyperbolic":
            return (0.1, 2.0), (0.1, 2.0)
        if target == "sde":
            c = float(boundary_zero(prof))
            return (0.05, 1.0), (c + 0.15, c + 1.0)
        if target == "bergman":
            return (0.3, 2.0), (0.2, 1.3)
        if target == "sfk":
            return (0.2, 2.0), (-1.0, 2.0)
    return cfg.rho_range, cfg.eta_range


def _verify_sde(cfg: RunConfig, prof, target="sde"):
    rr, er = _default_box(cfg, target, prof)
    if rr[0] < GUARD_RHO:
        raise UsageError(f"curvature grids need rho >= {GUARD_RHO}")
    rho, eta = grid(rr, er, cfg.n)
    parts = pmap(_sde_chunk, [(prof, r, e, cfg.tol) for r, e in _chunks(rho, eta, cfg.workers)],
                 cfg.workers)
    per = [pt for p in parts for pt in p[0]]
    halves = {p[1] for p in parts}
    half = halves.pop() if len(halves) == 1 else None
    passed = all(pt["passed"] for pt in per) and half is not None
    return passed, {"vanishing_half": half, "points": per}


def _verify_hyperbolic(cfg: RunConfig):
    passed, rep = _verify_sde(cfg, HYPERBOLIC, "hyperbolic")
    rr, er = _default_box(cfg, "hyperbolic")
    rho, eta = grid(rr, er, cfg.n)
    fj = eval_F_jet(HYPERBOLIC, (rho, eta))
    det = phi_from_potential(fj).det
    exact = -rho / (np.hypot(rho, eta - 1) * np.hypot(rho, eta + 1))
    g, _ = metric_sde(HYPERBOLIC, (rho, eta), fjet=fj)
    oracle = closed_form_oracle("hyperbolic", None, (rho, eta))
    g_err = float(np.max(np.abs(g.g - HYPERBOLIC_HOMOTHETY * oracle.g)))
    s_or = curvature_report(oracle).scalar
    s = np.array([pt["scalar"] for pt in rep["points"]])
    expected = float(np.mean(s_or)) / HYPERBOLIC_HOMOTHETY
    checks = {
        "det_phi_error": float(np.max(np.abs(det - exact))),
        "metric_error": g_err,
        "scalar_spread": float(np.ptp(s)),
        "scalar_expected": expected,
        "scalar_error": float(np.max(np.abs(s - expected))),
    }
    ok = (passed and checks["det_phi_error"] <= 1e-12 and g_err <= 1e-10
          and checks["scalar_error"] <= 1e-7)
    rep.update(checks)
    return ok, rep


def _verify_bergman(cfg: RunConfig):
    p = cfg.p or 1
    rr, er = _default_box(cfg, "bergman")
    t, th = grid(rr, er, cfg.n)
    rep = curvature_report(closed_form_oracle("bergman", {"p": p}, (t, th)))
    ok = bool(np.all(rep.einstein_residual <= cfg.tol))
    return ok, {"p": p, "max_einstein_residual": float(rep.einstein_residual.max()),
                "scalar": [float(s) for s in rep.scalar]}


def _verify_sfk(cfg: RunConfig):
    seq = minimal_sequence(_quotient(cfg))
    ys = cfg.extra.get("ys") or canonical_ys(seq)
    rr, er = _default_box(cfg, "sfk")
    rho, eta = grid(rr, er, cfg.n)
    expect = None
    if cfg.extra.get("expect_einstein") is not None:
        expect = cfg.extra["expect_einstein"]
    v = verify_sfk(seq, ys, (rho, eta), tol=cfg.tol, expect_einstein=expect)
    return v.passed, {"ys": ys, "c1": str(c1_class(seq)), "vanishing_half": v.vanishing_half,
                      "points": v.per_point}


def _verify_joyce(cfg: RunConfig, eigen_only: bool):
    prof = build_profile(cfg)
    rho, eta = _grid(cfg)
    fj = eval_F_jet(prof, (rho, eta))
    lap = np.abs(laplacian_residual(fj.F)) / np.abs(fj.F.value)
    rep = {"max_laplacian_relative": float(lap.max())}
    ok = rep["max_laplacian_relative"] <= 1e-11
    if not eigen_only:
        ph = phi_from_potential(fj)
        jr = joyce_residual(ph)
        rep["max_joyce_residual"] = float(np.max(jr))
        rep["max_joyce_relative"] = float(np.max(jr / joyce_scale(ph)))
        rep["max_det_identity"] = float(np.max(det_identity_residual(ph, fj)))
        ok = ok and rep["max_joyce_residual"] <= 1e-10 and rep["max_det_identity"] <= 1e-12
    return ok, rep


def _verify_extension(cfg: RunConfig):
    seq = minimal_sequence(_quotient(cfg))
    prof = canonical_profile(seq)
    ys = canonical_ys(seq)
    out, ok = {}, True
    for j in range(len(ys) - 1):
        lo, hi = sorted((float(ys[j]), float(ys[j + 1])))
        r = extension_residuals(seq, ys, ("edge", (lo + hi) / 2))
        out[f"edge_{j}"] = {"orders": r.orders, "limits": r.limits, "ok": r.ok}
        ok &= r.ok
    for j in range(len(ys) - 1):
        r = extension_residuals(seq, ys, ("corner", j))
        out[f"corner_{j}"] = {"limits": r.limits, "ok": r.ok}
        ok &= r.ok
    c = float(boundary_zero(prof))
    r = extension_residuals(seq, prof, ("ratio", (c + float(ys[0])) / 2))
    out["ratio"] = {"limits": r.limits, "ok": r.ok}
    ok &= r.ok
    return ok, out


def run_verify(cfg: RunConfig):
    target = cfg.extra.get("target")
    if target == "sde":
        prof = build_profile(cfg)
        ok, rep = _verify_sde(cfg, prof)
        rep["scalar_negative"] = all(pt["scalar"] < 0 for pt in rep["points"])
    elif target == "hyperbolic":
        ok, rep = _verify_hyperbolic(cfg)
    elif target == "bergman":
        ok, rep = _verify_bergman(cfg)
    elif target == "sfk":
        ok, rep = _verify_sfk(cfg)
    elif target in ("joyce", "eigen"):
        ok, rep = _verify_joyce(cfg, target == "eigen")
    elif target == "extension":
        ok, rep = _verify_extension(cfg)
    else:
        raise UsageError(f"unknown verify target {target!r}")
    rep = {"target": target, "verdict": "pass" if ok else "fail", **rep}
    rows = None
    header = None
    if "points" in rep:
        header = list(rep["points"][0]) if rep["points"] else []
        rows = [[pt[k] for k in header] for pt in rep["points"]]
    return (EXIT_OK if ok else EXIT_FAIL), rep, rows, header


COMMANDS = {
    "resolve": run_resolve,
    "profile": run_profile,
    "eval": run_eval,
    "trace-zero": run_trace_zero,
    "verify": run_verify,
    "plot-data": run_plot_data,
}


# -- argument parsing ---------------------------------------------------------

def _range(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected LO,HI") from exc
    return lo, hi


def _point(text):
    try:
        r, e = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected RHO,ETA") from exc
    return r, e


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hjsde", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int)
    common.add_argument("--q", type=int)
    common.add_argument("--kind", default="canonical", choices=["canonical", "odd", "ch", "hyperbolic"])
    common.add_argument("--profile", dest="profile_file", help="profile JSON file")
    common.add_argument("--format", dest="fmt", default="json", choices=["json", "csv"])
    common.add_argument("--output", "-o")
    common.add_argument("--workers", type=int, help="worker processes (default: HJSDE_WORKERS or CPU count)")
    common.add_argument("--grid", dest="n", type=int, help="points per axis")
    common.add_argument("--rho-range", type=_range)
    common.add_argument("--eta-range", type=_range)
    common.add_argument("--tol", type=float, default=1e-6)

    sub = ap.add_subparsers(dest="subcommand", required=True)
    r = sub.add_parser("resolve", parents=[common], help="continued fraction and resolution data")
    r.add_argument("--blowup", type=int, action="append", help="blow up at index j (repeatable)")
    sub.add_parser("profile", parents=[common], help="boundary profile and hypothesis check")
    e = sub.add_parser("eval", parents=[common], help="evaluate F, f and Phi")
    e.add_argument("--point", type=_point, action="append", help="RHO,ETA (repeatable)")
    t = sub.add_parser("trace-zero", parents=[common], help="trace the zero set on half circles")
    t.add_argument("--b-range", type=_range)
    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--target", required=True,
                   choices=["sde", "sfk", "hyperbolic", "bergman", "joyce", "eigen", "extension"])
    v.add_argument("--ys", help="comma-separated support points for sfk")
    v.add_argument("--expect-einstein", choices=["yes", "no"])
    pd = sub.add_parser("plot-data", parents=[common], help="data for the f0, zero-set and infinity plots")
    pd.add_argument("--mode", default="f0", choices=["f0", "zero", "infinity"])
    pd.add_argument("--b-range", type=_range)
    return ap


_DEFAULT_N = {"verify": 5, "trace-zero": 20, "plot-data": 201, "eval": 15}


def config_from_args(ns) -> RunConfig:
    cfg = RunConfig(ns.subcommand, p=ns.p, q=ns.q, kind=ns.kind, profile_file=ns.profile_file,
                    fmt=ns.fmt, output=ns.output, tol=ns.tol, workers=worker_count(ns.workers))
    cfg.n = ns.n or _DEFAULT_N.get(ns.subcommand, 15)
    if ns.subcommand == "plot-data" and ns.mode == "zero" and not ns.n:
        cfg.n = 20
    if ns.subcommand == "plot-data" and ns.mode == "f0" and not ns.eta_range:
        cfg.eta_range = (-1.0, 2.0)
    if ns.rho_range:
        cfg.rho_range = ns.rho_range
    if ns.eta_range:
        cfg.eta_range = ns.eta_range
    cfg.extra["box_given"] = bool(ns.rho_range or ns.eta_range)
    if cfg.n < 1:
        raise UsageError("--grid must be positive")
    for key in ("blowup", "target", "mode", "b_range"):
        if hasattr(ns, key):
            cfg.extra[key] = getattr(ns, key)
    if getattr(ns, "point", None):
        cfg.extra["points"] = ns.point
    if getattr(ns, "ys", None):
        cfg.extra["ys"] = [parse_number(s.strip()) for s in ns.ys.split(",")]
    if getattr(ns, "expect_einstein", None):
        cfg.extra["expect_einstein"] = ns.expect_einstein == "yes"
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        code, rep, rows, header = COMMANDS[cfg.subcommand](cfg)
        _emit(render(rep, cfg.fmt, rows, header), cfg)
    except (UsageError, HJSDEError, OSError, ValueError) as exc:
        print(f"hjsde: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if code == EXIT_FAIL:
        print("hjsde: verification failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
