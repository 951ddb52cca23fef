"""Batch command-line front end.

``mdlt <command> --input cfg.json --output out.csv [--format csv|json] [--seed N]``

Exit codes: 0 success, 1 configuration or schema error, 2 numerical-quality
failure.  Output tables are deterministic for a given input and seed.
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from .errors import ConfigurationError, DomainError, MDLTError
from .inversion import ContourConfig, PostWidderConfig, bromwich_invert_many, post_widder_invert
from .registry import get_function, get_pair, get_transform
from .solvers import (
    FractionalProblem2D,
    SecondOrderProblem,
    VolterraProblem,
    fractional_transform,
    initial_condition_schedule,
    second_order_transform,
    solve_fractional_2d,
    solve_second_order,
    solve_volterra,
    volterra_transform,
)
from .transform import QuadratureConfig, classify_point, convergence_report, laplace_nd, norm

COMMANDS = ("transform", "invert", "region", "pairs", "solve", "schedule")
SIG = 12
PAIR_TOLERANCE = {"ml": 1e-6, "wright": 1e-3}


class InputError(ConfigurationError):
    """Malformed command input."""


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    exit_code: int = 0


# ---------------------------------------------------------------- input parsing


def load_schema(name):
    text = resources.files("mdlt").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc, name):
    try:
        jsonschema.validate(doc, load_schema(name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"{name} input invalid at {where}: {exc.message}") from None


def to_complex(x):
    if isinstance(x, dict):
        return complex(x["re"], x.get("im", 0.0))
    return complex(x)


def to_matrix(x):
    if x is None:
        return None
    if isinstance(x, list):
        return [[to_complex(v) for v in row] for row in x]
    return to_complex(x)


def points(spec, dims, seed, real=False):
    """Explicit points, a tensor grid of ``{start, stop, count}`` axes, or a seeded random sample."""
    if isinstance(spec, dict):
        r = spec["random"]
        low, high = np.asarray(r["low"], float), np.asarray(r["high"], float)
        if low.shape != (dims,) or high.shape != (dims,):
            raise InputError(f"random grid bounds need {dims} entries")
        rng = np.random.default_rng(seed)
        return rng.uniform(low, high, size=(int(r["count"]), dims))
    if isinstance(spec[0], dict):
        if len(spec) != dims:
            raise InputError(f"grid needs {dims} axes, got {len(spec)}")
        axes = [np.linspace(a["start"], a["stop"], int(a["count"])) for a in spec]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)
    conv = float if real else to_complex
    pts = [[conv(x) for x in p] for p in spec]
    if any(len(p) != dims for p in pts):
        raise InputError(f"every point needs {dims} coordinates")
    return np.array(pts, dtype=float if real else complex)


def quad_config(doc):
    q = dict(doc.get("quadrature", {}))
    return QuadratureConfig(**q)


def contour_config(doc):
    c = dict(doc.get("contour", {}))
    for key in ("offsets", "half_length"):
        if key in c and not isinstance(c[key], list):
            c[key] = [c[key]]
    return ContourConfig(**c)


# ---------------------------------------------------------------- formatting


def fmt(x):
    """12 significant digits; non-finite values as strings."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if x is None or isinstance(x, str):
        return x
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return float(f"{x:.{SIG}g}")


def _csv_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.{SIG}g}"
    return str(v)


def render(table, command, fmt_name):
    rows = [{c: fmt(r.get(c)) for c in table.columns} for r in table.rows]
    if fmt_name == "json":
        doc = {
            "command": command,
            "columns": table.columns,
            "rows": rows,
            "summary": {k: fmt(v) if not isinstance(v, (list, dict)) else v for k, v in table.summary.items()},
            "exit_code": table.exit_code,
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in rows:
        w.writerow([_csv_cell(r[c]) for c in table.columns])
    return buf.getvalue()


def lam_columns(n):
    return [f"lam{j}_{part}" for j in range(1, n + 1) for part in ("re", "im")]


def value_columns(m, prefix="value"):
    return [f"{prefix}{i}_{part}" for i in range(1, m + 1) for part in ("re", "im")]


def lam_cells(lam):
    out = {}
    for j, z in enumerate(lam, 1):
        out[f"lam{j}_re"], out[f"lam{j}_im"] = complex(z).real, complex(z).imag
    return out


def value_cells(v, prefix="value"):
    out = {}
    for i, z in enumerate(np.atleast_1d(v), 1):
        out[f"{prefix}{i}_re"], out[f"{prefix}{i}_im"] = complex(z).real, complex(z).imag
    return out


# ---------------------------------------------------------------- commands


def cmd_transform(doc, seed):
    dims = int(doc.get("dims", 2))
    f = get_function(doc["function"], dims)
    cfg = quad_config(doc)
    lams = points(doc["lambda"], dims, seed)
    table = Table(lam_columns(dims) + value_columns(f.codim) + ["mode", "tail_estimate", "converged"])
    for lam in lams:
        row = lam_cells(lam)
        try:
            res = laplace_nd(f, lam, cfg)
            row.update(value_cells(res.value))
            row.update(mode=res.mode_used, tail_estimate=norm(np.atleast_1d(res.tail_estimate)), converged=bool(res.converged))
            if not res.converged:
                table.exit_code = 2
        except ArithmeticError as exc:
            row.update(value_cells([math.nan] * f.codim))
            row.update(mode=cfg.mode, tail_estimate=math.nan, converged=False)
            table.summary.setdefault("diagnostics", []).append(f"{tuple(map(str, lam))}: {exc}")
            table.exit_code = 2
        table.rows.append(row)
    return table


def build_problem(doc):
    """Problem object from a solve document (shared with ``invert``)."""
    kind = doc["problem"]
    data = doc.get("data", {})
    mats = {k: to_matrix(doc.get(k)) for k in "ABCDEF"}
    common = {}
    for key in ("omega", "eps"):
        if key in doc:
            common[key] = tuple(np.atleast_1d(np.asarray(doc[key], float)))
    if kind == "second_order":
        if "f" in data or "h" in data:
            raise InputError("second-order data keys are f1, f2, f3, g1, g2")
        return SecondOrderProblem(
            **mats, f=doc.get("source"), **{k: data.get(k) for k in ("f1", "f2", "f3", "g1", "g2")}, **common
        )
    if kind == "volterra":
        if any(mats[k] is not None for k in "DEF") or data:
            raise InputError("the Volterra problem takes A, B, C, kernel and source only")
        dims = int(doc.get("dims", 2))
        if "omega" not in common:
            common["omega"] = (0.0,) * dims
        if "eps" not in common:
            common["eps"] = (0.05,) * dims
        return VolterraProblem(
            mats["A"], mats["B"], mats["C"], a=doc.get("kernel", "one"), f=doc.get("source"), dims=dims, **common
        )
    if any(mats[k] is not None for k in "BCDEF"):
        raise InputError("the fractional problem takes a single matrix A")
    if "alpha1" not in doc or "alpha2" not in doc:
        raise InputError("the fractional problem needs alpha1 and alpha2")
    extra = set(data) - {"f", "h"}
    if extra:
        raise InputError(f"fractional data keys are f and h, got {sorted(extra)}")
    return FractionalProblem2D(
        doc["alpha1"],
        doc["alpha2"],
        doc.get("kind", "riemann_liouville"),
        mats["A"],
        doc.get("source"),
        tuple(data.get("f", ())),
        tuple(data.get("h", ())),
        **common,
    )


def _resolvent(prob):
    if isinstance(prob, SecondOrderProblem):
        return second_order_transform(prob)
    if isinstance(prob, VolterraProblem):
        return volterra_transform(prob)
    return fractional_transform(prob)


def cmd_invert(doc, seed):
    method = doc["method"]
    if method not in ("bromwich", "post_widder"):
        raise InputError(f"method must be 'bromwich' or 'post_widder', got {method!r}")
    if "problem_definition" in doc:
        pdoc = doc["problem_definition"]
        validate(pdoc, "problem")
        F = _resolvent(build_problem(pdoc))
    else:
        F = get_transform(doc["transform"], int(doc.get("dims", 2)))
    ts = points(doc["t"], F.dims, seed, real=True)
    table = Table([f"t{j}" for j in range(1, F.dims + 1)] + value_columns(F.codim) + ["error_estimate"])
    if method == "bromwich":
        results = bromwich_invert_many(F, ts, contour_config(doc))
    else:
        pw = dict(doc.get("post_widder", {}))
        if "k" in pw:
            pw["k"] = tuple(np.atleast_1d(pw["k"]))
        cfg = PostWidderConfig(**pw)
        if cfg.derivative_source != "analytic_callback":
            raise InputError("the CLI supports Post-Widder with analytic partials only")
        results = [post_widder_invert(F, t, cfg) for t in ts]
    for t, r in zip(ts, results):
        row = {f"t{j}": x for j, x in enumerate(t, 1)}
        row.update(value_cells(r.value))
        row["error_estimate"] = r.error_estimate
        table.rows.append(row)
    return table


def cmd_region(doc, seed):
    dims = int(doc.get("dims", 2))
    f = get_function(doc["function"], dims)
    probes = points(doc["probes"], dims, seed)
    cfg = QuadratureConfig(**{"rel_tol": 1e-6, **doc.get("quadrature", {})})
    table = Table(lam_columns(dims) + ["verdict"])
    grid = doc.get("abscissa_probes")
    if grid is not None:
        report = convergence_report(f, probes, grid, cfg)
        table.summary["abs_abscissa"] = [fmt(a) for a in report.abs_abscissa]
        verdicts = [v for _, v in report.memberships]
    else:
        verdicts = [classify_point(f, p, cfg) for p in probes]
    for verdict, lam in zip(verdicts, probes):
        row = lam_cells(lam)
        row["verdict"] = verdict
        table.rows.append(row)
    return table


def _pair_ref(pair, params, dims):
    if pair == "ml":
        try:
            alpha, beta, omega = (float(params[k]) for k in ("alpha", "beta", "omega"))
        except KeyError as exc:
            raise InputError(f"ml pair needs alpha, beta and omega; missing {exc}") from None
        return {"name": "ml_pair", "params": {"alpha": alpha, "beta": beta, "omega": omega}}, alpha, omega
    try:
        gamma = float(params["gamma"])
    except KeyError:
        raise InputError("wright pair needs gamma") from None
    s = params.get("s", 1.0)
    return {"name": "wright_pair", "params": {"gamma": gamma, "s": s}}, None, None


def cmd_pairs(doc, seed):
    pair = doc["pair"]
    dims = int(doc.get("dims", 2))
    ref, alpha, omega = _pair_ref(pair, doc["params"], dims)
    f, F = get_pair(ref, dims)
    lams = points(doc["lambda"], dims, seed)
    if pair == "ml":
        if alpha <= 0:
            raise InputError("alpha must be positive")
        bound = abs(omega) ** (1.0 / alpha) if omega != 0 else 0.0
        bad = [tuple(float(x) for x in l.real) for l in lams if np.any(l.real <= bound)]
        if bad:
            raise InputError(f"Re lambda must exceed |omega|^(1/alpha) = {bound:.6g}; offending points {bad}")
    elif np.any(lams.real <= 0):
        raise InputError("the Wright pair needs Re lambda_j > 0")
    tol = float(doc.get("tolerance", PAIR_TOLERANCE[pair]))
    cfg = QuadratureConfig(**{"rel_tol": 1e-9, **doc.get("quadrature", {})})
    table = Table(lam_columns(dims) + ["numeric_re", "numeric_im", "closed_re", "closed_im", "rel_error"])
    for lam in lams:
        num = complex(laplace_nd(f, lam, cfg).value[0])
        closed = complex(F(lam[None, :])[0, 0])
        err = abs(num - closed) / max(abs(closed), 1e-300)
        row = lam_cells(lam)
        row.update(numeric_re=num.real, numeric_im=num.imag, closed_re=closed.real, closed_im=closed.imag, rel_error=err)
        table.rows.append(row)
        if not err <= tol:
            table.exit_code = 2
    table.summary["tolerance"] = tol
    table.summary["max_rel_error"] = max(r["rel_error"] for r in table.rows)
    return table


def cmd_solve(doc, seed):
    prob = build_problem(doc)
    dims = 2 if not isinstance(prob, VolterraProblem) else prob.dims
    grid = points(doc["grid"], dims, seed, real=True)
    cfg = contour_config(doc)
    if isinstance(prob, SecondOrderProblem):
        res = solve_second_order(prob, grid, cfg, doc.get("residual_step", 0.05))
    elif isinstance(prob, VolterraProblem):
        res = solve_volterra(prob, grid, cfg, doc.get("residual_points", 1))
    else:
        res = solve_fractional_2d(prob, grid, cfg)
    cols = [f"t{j}" for j in range(1, dims + 1)] + value_columns(prob.m, "u") + ["error_estimate", "residual"]
    table = Table(cols)
    resid = {}
    if res.residuals is not None:
        resid = {tuple(p): r for p, r in zip(res.residual_points, res.residuals)}
    for t, v, e in zip(res.t, res.values, res.error_estimates):
        row = {f"t{j}": x for j, x in enumerate(t, 1)}
        row.update(value_cells(v, "u"))
        row["error_estimate"] = e
        row["residual"] = resid.get(tuple(t))
        table.rows.append(row)
    table.summary.update(
        problem=doc["problem"],
        max_residual=res.max_residual,
        max_error_estimate=float(np.max(res.error_estimates)),
        decay_ok=res.decay_ok,
        decay_growth=res.check.growth,
        min_singular_value=res.check.min_singular,
    )
    if not res.decay_ok:
        table.exit_code = 2
    return table


def cmd_schedule(doc, seed):
    sched = initial_condition_schedule(tuple(doc["alpha"]), doc.get("axis_order"))
    table = Table(["entry", "zeroed_axis"])
    for e in sched:
        table.rows.append({"entry": e.text(), "zeroed_axis": str(e.zeroed)})
    table.summary["count"] = len(sched)
    return table


HANDLERS = {
    "transform": cmd_transform,
    "invert": cmd_invert,
    "region": cmd_region,
    "pairs": cmd_pairs,
    "solve": cmd_solve,
    "schedule": cmd_schedule,
}


# ---------------------------------------------------------------- entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def parser():
    p = _Parser(prog="mdlt", description="Multidimensional Laplace transform toolkit")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", required=True, help="JSON configuration")
    p.add_argument("--output", required=True, help="output path ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=0, help="seed for random grids")
    return p


def run(argv):
    """Execute one command and return its exit code."""
    args = parser().parse_args(argv)
    try:
        with open(args.input, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.input} is not valid JSON: {exc}") from None
    validate(doc, args.command)
    table = HANDLERS[args.command](doc, args.seed)
    text = render(table, args.command, args.format)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return table.exit_code


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(argv)
    except (ConfigurationError, DomainError) as exc:
        print(f"mdlt: configuration error: {exc}", file=sys.stderr)
        return 1
    except (MDLTError, ArithmeticError) as exc:
        print(f"mdlt: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (TypeError, ValueError, KeyError) as exc:
        print(f"mdlt: invalid input: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # never surface a traceback to batch callers
        print(f"mdlt: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
