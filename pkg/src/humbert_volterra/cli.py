"""Command-line front end.

Every command writes a report holding the resolved configuration, one row
per evaluated point and a summary.  JSON reports have the shape
``{"config", "rows", "summary", "status"}``; CSV reports carry the
configuration and summary as ``#`` comment lines above the table.  Floats
are written with 17 significant digits, so identical inputs give identical
files.

Exit status is 0 on success, 1 on a numerical or input error, 2 on an
invalid configuration and 3 when a verification command ran but its check
failed.  Errors are reported as ``{"error": {"type", "message"}, "config"}``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import epd, kernel, operators, special
from .errors import ConfigError, HumbertVolterraError
from .operators import DegeneracyInput, GridFunction, Parameters, QuadratureSpec
from .special import SeriesControl

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_CHECK_FAILED = 3

PARAM_COMMANDS = {
    "apply-forward", "apply-inverse", "roundtrip", "verify-kernel-lemma", "tau-prime-check",
    "solve-cauchy", "solve-goursat", "recover-density", "fundamental-relation", "check-pde",
    "verify-cauchy-data",
}


@dataclass
class RunConfig:
    command: str
    params: Parameters | None
    degeneracy: DegeneracyInput | None
    series: SeriesControl
    quadrature: QuadratureSpec
    in_path: str | None
    out_path: str | None
    fmt: str
    sign_convention: str
    grid: int | None
    dstep: float | None
    options: dict = field(default_factory=dict)

    def to_dict(self):
        params = None
        if self.params is not None:
            params = {
                "alpha": self.params.alpha,
                "beta": self.params.beta,
                "lambda": self.params.lam,
                "regime": self.params.regime.value,
            }
        return {
            "command": self.command,
            "params": params,
            "degeneracy": None if self.degeneracy is None else asdict(self.degeneracy),
            "series": asdict(self.series),
            "quadrature": asdict(self.quadrature),
            "io": {"in": self.in_path, "out": self.out_path, "format": self.fmt},
            "sign_convention": self.sign_convention,
            "grid": self.grid,
            "dstep": self.dstep,
            "options": self.options,
        }

    @property
    def operator_params(self):
        """Parameters as fed to the operators under the selected sign convention."""
        if self.sign_convention == "applications":
            return self.params.with_lam(-self.params.lam)
        return self.params


@dataclass
class Report:
    rows: list
    summary: dict
    ok: bool = True


# ---------------------------------------------------------------- formatting

def _fmt_float(x):
    x = float(x)
    if not math.isfinite(x):
        return None
    return f"{x:.17g}"


def _json(obj):
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = _fmt_float(obj)
        return "null" if s is None else s
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_json(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        s = _fmt_float(v)
        return "nan" if s is None else s
    return str(v)


def render(report, config, fmt):
    status = "ok" if report.ok else "check_failed"
    if fmt == "json":
        body = {"config": config.to_dict(), "rows": report.rows, "summary": report.summary,
                "status": status}
        return _json(body) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + _json(config.to_dict()) + "\n")
    buf.write("# summary: " + _json(report.summary) + "\n")
    buf.write("# status: " + status + "\n")
    if report.rows:
        cols = list(report.rows[0])
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in report.rows:
            writer.writerow([_csv_cell(row[c]) for c in cols])
    return buf.getvalue()


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- input

def read_grid_function(path):
    """Read a CSV file with header ``t,value`` into a :class:`GridFunction`."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(row for row in fh if not row.startswith("#"))
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["t", "value"]:
                raise ConfigError(f"{path}: expected header 't,value'")
            data = [(float(a), float(b)) for a, b in reader]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: malformed row ({exc})") from exc
    if not data:
        raise ConfigError(f"{path}: no samples")
    t, v = np.array(data).T
    try:
        return GridFunction(t, v)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _threads():
    raw = os.environ.get("HV_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"HV_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def _pmap(fn, items):
    items = list(items)
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def interior_grid(n):
    return np.linspace(0.05, 0.95, n)


# ---------------------------------------------------------------- commands

def _hv_rows(name_values, values):
    rows = []
    for inputs, hv in zip(name_values, values):
        row = dict(inputs)
        row.update(output=hv.value, est_error=hv.est_error, converged=hv.converged,
                   terms_used=hv.terms_used)
        rows.append(row)
    return rows


def _pairs(xs, ys, xname, yname):
    if len(ys) == 1:
        ys = ys * len(xs)
    if len(xs) == 1:
        xs = xs * len(ys)
    if len(xs) != len(ys):
        raise ConfigError(f"--{xname} and --{yname} need equal lengths or a single value")
    return list(zip(xs, ys))


def _series_summary(rows):
    return {"max_abs_err": max((r["est_error"] for r in rows), default=0.0),
            "sup_residual": None}


def cmd_eval_2f1(cfg):
    o = cfg.options
    inputs = [{"a": o["a"], "b": o["b"], "c": o["c"], "z": z} for z in o["z"]]
    vals = _pmap(lambda z: special.gauss_2f1(o["a"], o["b"], o["c"], z, cfg.series), o["z"])
    rows = _hv_rows(inputs, vals)
    return Report(rows, _series_summary(rows), all(r["converged"] for r in rows))


def cmd_eval_xi2(cfg):
    o = cfg.options
    pts = _pairs(o["u"], o["w"], "u", "w")
    inputs = [{"a": o["a"], "b": o["b"], "d": o["d"], "u": u, "w": w} for u, w in pts]
    vals = _pmap(lambda p: special.humbert_xi2(o["a"], o["b"], o["d"], *p, cfg.series), pts)
    rows = _hv_rows(inputs, vals)
    return Report(rows, _series_summary(rows), all(r["converged"] for r in rows))


def cmd_eval_f0211(cfg):
    o = cfg.options
    pts = _pairs(o["x"], o["y"], "x", "y")
    keys = ("b", "c", "d", "e", "g")
    inputs = [dict({k: o[k] for k in keys}, x=x, y=y) for x, y in pts]
    vals = _pmap(lambda p: special.f0211(*(o[k] for k in keys), *p, cfg.series), pts)
    rows = _hv_rows(inputs, vals)
    return Report(rows, _series_summary(rows), all(r["converged"] for r in rows))


def cmd_convergence(cfg):
    o = cfg.options
    keys = ("p", "q", "k", "l", "m", "n")
    res = special.convergence_classification(*(o[k] for k in keys), o["x"], o["y"])
    row = dict({k: o[k] for k in keys}, x=o["x"], y=o["y"], output=res.value)
    return Report([row], {"max_abs_err": None, "sup_residual": None})


def _eval_points(cfg, f, stencil=False):
    if cfg.grid:
        pts = interior_grid(cfg.grid)
    elif f.nodes is not None:
        pts = f.nodes[f.nodes > 0]
    else:
        pts = interior_grid(17)
    if stencil:
        h = 1e-3 * pts if cfg.dstep is None else cfg.dstep
        pts = pts[(pts - 2 * h > 0) & (pts + 2 * h <= 1)]
    return pts


def _require_input(cfg):
    if not cfg.in_path:
        raise ConfigError(f"{cfg.command} needs --in")
    return read_grid_function(cfg.in_path)


def cmd_apply_forward(cfg):
    v = _require_input(cfg)
    pts = _eval_points(cfg, v)
    out = operators.forward_N(v, pts, cfg.operator_params, cfg.quadrature, cfg.series)
    rows = [{"t": t, "input": float(v(t)), "output": y} for t, y in zip(pts, out)]
    return Report(rows, {"max_abs_err": None, "sup_residual": None})


def cmd_apply_inverse(cfg):
    tau = _require_input(cfg)
    pts = _eval_points(cfg, tau, stencil=True)
    out = operators.inverse_T(tau, pts, cfg.operator_params, cfg.quadrature, cfg.series,
                              cfg.dstep)
    rows = [{"t": t, "input": float(tau(t)), "output": y} for t, y in zip(pts, out)]
    return Report(rows, {"max_abs_err": None, "sup_residual": None})


FIXTURES = {
    "TN": GridFunction.from_callable(lambda t: 1 + t**2, lambda t: 2 * t),
    "NT": GridFunction.from_callable(lambda t: t**2, lambda t: 2 * t),
}


def cmd_roundtrip(cfg):
    direction = cfg.options["direction"]
    seed = read_grid_function(cfg.in_path) if cfg.in_path else FIXTURES[direction]
    grid = interior_grid(cfg.grid or 17)
    rep = operators.roundtrip_check(seed, direction, grid, cfg.operator_params,
                                    cfg.quadrature, cfg.series, cfg.dstep)
    rows = [{"t": t, "expected": e, "recovered": r, "residual": r - e}
            for t, e, r in zip(rep.grid, rep.expected, rep.recovered)]
    sup = rep.sup_residual
    return Report(rows, {"max_abs_err": sup, "sup_residual": sup}, sup < cfg.options["tol"])


def lemma_samples(count, lam):
    """Deterministic ``(x, s, lam)`` samples with ``z`` in [0.05, 0.7]."""
    nx = math.ceil(math.sqrt(count))
    nz = math.ceil(count / nx)
    xs = np.linspace(0.3, 0.95, nx)
    zs = np.linspace(0.05, 0.7, nz)
    pts = [(x, x * (1 - z), lam) for x in xs for z in zs]
    return pts[:count]


def cmd_verify_kernel_lemma(cfg):
    p = cfg.params
    samples = lemma_samples(cfg.grid or 25, p.lam)
    rep = kernel.verify_lemma(p, samples, cfg.series, k_max=cfg.options["k_max"])
    rows = [{"x": s.x, "s": s.s, "z": s.z, "lambda": s.lam, "w_value": s.w_value,
             "target": s.target, "abs_err": s.abs_err, "condition": s.condition,
             "tolerance": s.tolerance, "passed": s.passed} for s in rep.samples]
    return Report(rows, {"max_abs_err": rep.max_abs_err, "sup_residual": None}, rep.passed)


def _derivative_fd(fn, t):
    h = 1e-3 * t
    d1 = (fn(t + h) - fn(t - h)) / (2 * h)
    d2 = (fn(t + 2 * h) - fn(t - 2 * h)) / (4 * h)
    return (4 * d1 - d2) / 3


def cmd_tau_prime_check(cfg):
    v = read_grid_function(cfg.in_path) if cfg.in_path else FIXTURES["TN"]
    p = cfg.operator_params
    pts = interior_grid(cfg.grid or 10)
    exp = kernel.tau_prime_expansion(v, pts, p, cfg.quadrature, cfg.series)
    fd = _derivative_fd(lambda t: operators.forward_N(v, t, p, cfg.quadrature, cfg.series), pts)
    err = np.abs(exp - fd)
    rows = [{"t": t, "expansion": a, "finite_difference": b, "abs_err": e}
            for t, a, b, e in zip(pts, exp, fd, err)]
    worst = float(err.max())
    return Report(rows, {"max_abs_err": worst, "sup_residual": None}, worst < cfg.options["tol"])


RECOVERY_GRID = np.linspace(0.01, 0.99, 50)


def _fixture_density():
    return GridFunction.from_callable(lambda t: 1 + t**2, lambda t: 2 * t)


def _fixture_nu():
    return GridFunction.from_callable(lambda t: 1 + 0.5 * t, lambda t: 0.5 + 0 * t)


def _cauchy_data(cfg):
    o = cfg.options
    p = cfg.params
    nu = read_grid_function(o["nu"]) if o.get("nu") else _fixture_nu()
    T = read_grid_function(o["T"]) if o.get("T") else None
    if o.get("tau"):
        tau = read_grid_function(o["tau"])
        if T is None:
            T = epd.recover_T_from_tau(tau, p, cfg.quadrature, cfg.series, cfg.dstep,
                                       grid=RECOVERY_GRID)
    else:
        if T is None:
            T = _fixture_density()
        tau = epd.use_site_tau(T, p, cfg.quadrature, cfg.series)
    return epd.CauchyData(tau, nu, T)


def _triangle(n):
    return [epd.CharPoint(i / n, j / n) for j in range(1, n + 1) for i in range(j)]


def cmd_solve_cauchy(cfg):
    data = _cauchy_data(cfg)
    pts = _triangle(cfg.grid or 8)
    vals = _pmap(lambda q: epd.cauchy_solution(q, data, cfg.params, cfg.quadrature, cfg.series),
                 pts)
    rows = [{"xi": q.xi, "eta": q.eta, "u": u} for q, u in zip(pts, vals)]
    return Report(rows, {"max_abs_err": None, "sup_residual": None})


def cmd_solve_goursat(cfg):
    o = cfg.options
    p = cfg.params
    phi = read_grid_function(o["phi"]) if o.get("phi") else GridFunction.zero()
    nu = read_grid_function(o["nu"]) if o.get("nu") else _fixture_nu()
    Phi = read_grid_function(o["Phi"]) if o.get("Phi") else GridFunction.zero()
    data = epd.GoursatData(phi, nu, Phi, p.beta)
    pts = _triangle(cfg.grid or 8)
    vals = _pmap(lambda q: epd.goursat_solution(q, data, p, cfg.quadrature, cfg.series), pts)
    rows = [{"xi": q.xi, "eta": q.eta, "u": u} for q, u in zip(pts, vals)]
    return Report(rows, {"max_abs_err": None, "sup_residual": None})


def _tau_or_fixture(cfg, scale=1.0):
    if cfg.in_path:
        return read_grid_function(cfg.in_path), None
    seed = GridFunction.from_callable(lambda t: scale * (1 + t**2), lambda t: scale * 2 * t)
    return epd.use_site_tau(seed, cfg.params, cfg.quadrature, cfg.series), seed


def _recovery_report(pts, got, seed, name, factor=1.0):
    rows = []
    for t, g in zip(pts, got):
        row = {"t": t, name: g}
        if seed is not None:
            row["expected"] = float(seed(t)) * factor
            row["residual"] = g - row["expected"]
        rows.append(row)
    sup = max((abs(r["residual"]) for r in rows), default=0.0) if seed is not None else None
    return Report(rows, {"max_abs_err": sup, "sup_residual": sup})


def cmd_recover_density(cfg):
    tau, seed = _tau_or_fixture(cfg)
    pts = interior_grid(cfg.grid or 17)
    T = epd.recover_T_from_tau(tau, cfg.params, cfg.quadrature, cfg.series, cfg.dstep)
    return _recovery_report(pts, T(pts), seed, "T")


def cmd_fundamental_relation(cfg):
    p = cfg.params
    c = 2 * epd.gamma2(p.beta) * math.cos(p.beta * math.pi)
    tau, seed = _tau_or_fixture(cfg, scale=c)
    pts = interior_grid(cfg.grid or 17)
    nu = epd.fundamental_relation(tau, p, cfg.quadrature, cfg.series, cfg.dstep)
    return _recovery_report(pts, nu(pts), seed, "nu", factor=1.0 / c)


def cmd_check_pde(cfg):
    data = _cauchy_data(cfg)
    p = cfg.params
    n = cfg.grid or 5
    hs = sorted(cfg.options["h"], reverse=True)
    pts = [epd.CharPoint(i / n, j / n) for j in range(1, n) for i in range(1, j)]

    def u_eval(q):
        return epd.cauchy_solution(q, data, p, cfg.quadrature, cfg.series)

    def one(q):
        return [epd.pde9_residual(u_eval, q, p, h) for h in hs]

    res = _pmap(one, pts)
    rows, ok = [], True
    for q, rs in zip(pts, res):
        for k, (h, r) in enumerate(zip(hs, rs)):
            ratio = rs[k - 1] / r if k > 0 and r != 0 else None
            rows.append({"xi": q.xi, "eta": q.eta, "h": h, "residual": r, "ratio": ratio})
        if len(rs) > 1 and rs[-1] != 0:
            ok &= 3.5 <= rs[-2] / rs[-1] <= 4.5
    sup = max((abs(rs[-1]) for rs in res), default=0.0)
    return Report(rows, {"max_abs_err": None, "sup_residual": sup}, ok)


def cmd_verify_cauchy_data(cfg):
    data = _cauchy_data(cfg)
    o = cfg.options
    checks = epd.verify_cauchy_data(data, cfg.params, cfg.quadrature, cfg.series,
                                    eps_list=o["eps"], xi_grid=o["xi"])
    rows = [{"xi": c.xi, "tau": c.tau, "u_limit": c.u_limit, "tau_deviation": c.tau_deviation,
             "nu": c.nu, "nu_limit": c.nu_limit, "nu_deviation": c.nu_deviation,
             "nu_ratio": c.nu_ratio} for c in checks]
    tau_dev = max(c.tau_deviation for c in checks)
    nu_dev = max(c.nu_deviation for c in checks)
    ok = tau_dev < o["tau_tol"] and nu_dev < o["nu_tol"]
    summary = {"max_abs_err": max(tau_dev, nu_dev), "sup_residual": tau_dev,
               "max_tau_deviation": tau_dev, "max_nu_deviation": nu_dev}
    return Report(rows, summary, ok)


COMMANDS = {
    "eval-2f1": cmd_eval_2f1,
    "eval-xi2": cmd_eval_xi2,
    "eval-f0211": cmd_eval_f0211,
    "convergence": cmd_convergence,
    "apply-forward": cmd_apply_forward,
    "apply-inverse": cmd_apply_inverse,
    "roundtrip": cmd_roundtrip,
    "verify-kernel-lemma": cmd_verify_kernel_lemma,
    "tau-prime-check": cmd_tau_prime_check,
    "solve-cauchy": cmd_solve_cauchy,
    "solve-goursat": cmd_solve_goursat,
    "recover-density": cmd_recover_density,
    "fundamental-relation": cmd_fundamental_relation,
    "check-pde": cmd_check_pde,
    "verify-cauchy-data": cmd_verify_cauchy_data,
}


# ---------------------------------------------------------------- parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _common_parent():
    p = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    p.add_argument("--rel-tol", type=float, default=1e-12, help="relative series tolerance")
    p.add_argument("--max-terms", type=int, default=10000, help="term cap per series")
    p.add_argument("--nodes", type=int, default=64, help="Gauss-Jacobi nodes per integral")
    p.add_argument("--grid", type=int, default=None, help="number of evaluation points")
    p.add_argument("--dstep", type=float, default=None, help="finite-difference step")
    p.add_argument("--in", dest="in_path", default=None, help="input CSV with header t,value")
    p.add_argument("--out", dest="out_path", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--sign-convention", choices=("paper2", "applications"), default="paper2",
                   help="second kernel argument lam (x-t)^2 or -lam (x-t)^2 for operator commands")
    return p


def _param_parent():
    p = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--m", type=float, help="degeneracy exponent of (-y)")
    p.add_argument("--n", type=float, help="degeneracy exponent of x")
    p.add_argument("--mu", type=float, help="spectral constant; lambda = mu/4")
    return p


def _floats(s):
    return float(s)


def build_parser():
    parser = _Parser(prog="humbert-volterra", allow_abbrev=False,
                     description="Humbert-kernel Volterra operators and their applications.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common_parent()
    params = _param_parent()

    def add(name, help_text, with_params=False):
        parents = [common, params] if with_params else [common]
        return sub.add_parser(name, parents=parents, help=help_text, allow_abbrev=False)

    p = add("eval-2f1", "Gauss function 2F1(a, b; c; z)")
    for k in ("a", "b", "c"):
        p.add_argument(f"--{k}", type=float, required=True)
    p.add_argument("--z", type=_floats, nargs="+", required=True)

    p = add("eval-xi2", "Humbert function Xi2(a, b; d; u, w)")
    for k in ("a", "b", "d"):
        p.add_argument(f"--{k}", type=float, required=True)
    p.add_argument("--u", type=_floats, nargs="+", required=True)
    p.add_argument("--w", type=_floats, nargs="+", required=True)

    p = add("eval-f0211", "F0211(b, c, d; e; g; x, y)")
    for k in ("b", "c", "d", "e", "g"):
        p.add_argument(f"--{k}", type=float, required=True)
    p.add_argument("--x", type=_floats, nargs="+", required=True)
    p.add_argument("--y", type=_floats, nargs="+", required=True)

    p = add("convergence", "convergence region of a double series signature")
    for k in ("p", "q", "k", "l", "m", "n"):
        p.add_argument(f"--{k}", type=int, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)

    add("apply-forward", "forward operator on sampled data", True)
    add("apply-inverse", "inverse operator on sampled data", True)

    p = add("roundtrip", "T[N[v]] = v or N[T[tau]] = tau on a grid", True)
    p.add_argument("--direction", choices=("TN", "NT"), required=True)
    p.add_argument("--tol", type=float, default=1e-4)

    p = add("verify-kernel-lemma", "composed kernel against (1 - z)^alpha", True)
    p.add_argument("--k-max", type=int, default=12)

    p = add("tau-prime-check", "closed-form tau' against a difference quotient", True)
    p.add_argument("--tol", type=float, default=1e-5)

    def cauchy_inputs(q):
        q.add_argument("--tau", default=None, help="tau CSV (default: manufactured)")
        q.add_argument("--nu", default=None, help="nu CSV (default: 1 + t/2)")
        q.add_argument("--T", default=None, help="density CSV (default: recovered or 1 + t^2)")

    p = add("solve-cauchy", "Cauchy solution on a triangle lattice", True)
    cauchy_inputs(p)
    p = add("solve-goursat", "Cauchy-Goursat solution on a triangle lattice", True)
    p.add_argument("--phi", default=None)
    p.add_argument("--nu", default=None)
    p.add_argument("--Phi", default=None)
    add("recover-density", "density T from tau", True)
    add("fundamental-relation", "nu from tau when u(0, eta) = 0", True)
    p = add("check-pde", "finite-difference residual of the Cauchy solution", True)
    cauchy_inputs(p)
    p.add_argument("--h", type=_floats, nargs="+", default=[1e-2, 5e-3, 2.5e-3])
    p = add("verify-cauchy-data", "diagonal conditions of the Cauchy solution", True)
    cauchy_inputs(p)
    p.add_argument("--eps", type=_floats, nargs="+", default=list(epd.DEFAULT_EPS))
    p.add_argument("--xi", type=_floats, nargs="+", default=[0.25, 0.5, 0.75])
    p.add_argument("--tau-tol", type=float, default=1e-4)
    p.add_argument("--nu-tol", type=float, default=1e-3)
    return parser


_GENERIC = {"command", "rel_tol", "max_terms", "nodes", "grid", "dstep", "in_path", "out_path",
            "format", "sign_convention"}
_PARAM_FLAGS = {"alpha", "beta", "lam", "m", "n", "mu"}


def _resolve_params(args):
    direct = args.alpha is not None or args.beta is not None
    degenerate = args.m is not None or args.n is not None
    if direct and degenerate:
        raise ConfigError("give either --alpha/--beta or --m/--n, not both")
    if degenerate:
        if args.m is None or args.n is None:
            raise ConfigError("--m and --n must be given together")
        if args.lam is not None:
            raise ConfigError("use --mu with --m/--n")
        d = DegeneracyInput(args.m, args.n, args.mu or 0.0)
        return operators.params_from_degeneracy(d), d
    if args.alpha is None or args.beta is None:
        raise ConfigError("--alpha and --beta are required")
    if args.mu is not None:
        raise ConfigError("use --lambda with --alpha/--beta")
    return Parameters(args.alpha, args.beta, args.lam or 0.0), None


def resolve_config(args):
    if not args.rel_tol > 0:
        raise ConfigError("--rel-tol must be positive")
    if args.max_terms < 1 or args.nodes < 1:
        raise ConfigError("--max-terms and --nodes must be positive")
    if args.grid is not None and args.grid < 1:
        raise ConfigError("--grid must be positive")
    if args.dstep is not None and not args.dstep > 0:
        raise ConfigError("--dstep must be positive")
    params = degeneracy = None
    if args.command in PARAM_COMMANDS:
        params, degeneracy = _resolve_params(args)
        params.require_theorem_regime()
    series = SeriesControl(rel_tol=args.rel_tol, max_outer_terms=args.max_terms,
                           max_inner_terms=args.max_terms)
    skip = _GENERIC | _PARAM_FLAGS if args.command in PARAM_COMMANDS else _GENERIC
    options = {k: v for k, v in vars(args).items() if k not in skip}
    return RunConfig(args.command, params, degeneracy, series, QuadratureSpec(args.nodes),
                     args.in_path, args.out_path, args.format, args.sign_convention, args.grid,
                     args.dstep, options)


def _error_record(exc, cfg):
    return {"error": {"type": type(exc).__name__, "message": str(exc)},
            "config": None if cfg is None else cfg.to_dict()}


def run(argv=None):
    """Parse ``argv``, run the command and write its report; returns the exit status."""
    cfg = None
    out_path = None
    try:
        args = build_parser().parse_args(argv)
        out_path = args.out_path
        cfg = resolve_config(args)
        report = COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        _emit(_json(_error_record(exc, cfg)) + "\n", out_path)
        return EXIT_CONFIG
    except (HumbertVolterraError, ValueError, ArithmeticError) as exc:
        _emit(_json(_error_record(exc, cfg)) + "\n", out_path)
        return EXIT_ERROR
    _emit(render(report, cfg, cfg.fmt), cfg.out_path)
    return EXIT_OK if report.ok else EXIT_CHECK_FAILED


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
