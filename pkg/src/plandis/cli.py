"""Command-line driver.

Every subcommand is translated into a scenario dictionary and executed by
:func:`run`, so ``plandis run scenario.json`` and the flag-based commands
produce identical artifacts.  A scenario looks like::

    {"task": "landis-tree",
     "graph": {"kind": "tree", "d": 3, "R": 30},
     "operator": {"p": 2, "V": 0},
     "params": {"u": "d^(-2|x|)"},
     "output": {"json": "report.json", "csv": "trace.csv"},
     "seed": 0}

Exit codes: 0 on success, 2 on precondition errors, 3 on convergence failure.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import operator as _op
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .criticality import hardy_weight, nonnegativity_probe
from .errors import ConvergenceError, InvalidSpec, ParseError, PreconditionError
from .graph import WeightedGraph, dumps_graph, read_graph, vertex_function
from .landis import (
    landis_check_general,
    landis_check_model,
    landis_check_negative_potential,
    landis_check_recurrent,
    landis_check_tree,
)
from .model import (
    ModelGraphSpec,
    green0_profile,
    radial_graph,
    realize,
    spec_from_dict,
    spherical_flux_solve,
    spherical_values,
)
from .operators import SchrodingerOperator
from .solvers import (
    SolveConfig,
    ball_green,
    dirichlet_solve,
    green_function,
    tree_beta,
    tree_beta_residual,
)
from .trends import jsonable

TASKS = ("build", "validate", "solve", "green", "beta", "hardy", "energy-probe",
         "landis-general", "landis-negative", "landis-model", "landis-tree",
         "landis-recurrent")
SAMPLED = ("energy-probe", "landis-general", "landis-negative", "landis-model")


# -- radial expressions ----------------------------------------------------------

_BINOPS = {ast.Add: _op.add, ast.Sub: _op.sub, ast.Mult: _op.mul,
           ast.Div: _op.truediv, ast.Pow: np.power}
_UNOPS = {ast.USub: _op.neg, ast.UAdd: _op.pos}
_FUNCS = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs,
          "cos": np.cos, "sin": np.sin}


def _normalize(expr: str) -> str:
    expr = re.sub(r"(?<=[\d.)])\s*\|x\|", "*r", expr)
    expr = expr.replace("|x|", "r").replace("^", "**")
    return re.sub(r"(?<=\d)\s*(?=[a-zA-Z(])", "*", expr)


def eval_radial(expr: str, r, names: dict) -> np.ndarray:
    """Evaluate a radial closed form such as ``"2*d^(-2|x|) + |x|^-1"``.

    ``|x|`` is the distance to the root, ``^`` is a power and a number
    directly followed by a name or parenthesis is a product.  Only
    arithmetic, the names in ``names`` and a few elementwise functions are
    allowed.
    """
    try:
        tree = ast.parse(_normalize(expr), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse expression {expr!r}: {exc.msg}") from exc
    r = np.asarray(r, dtype=float)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id == "r":
                return r
            if node.id in names:
                value = names[node.id]
                return float(value() if callable(value) else value)
            raise ParseError(f"unknown name {node.id!r} in {expr!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ParseError(f"unsupported construct in {expr!r}")

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = ev(tree)
    return np.broadcast_to(np.asarray(out, dtype=float), r.shape).copy()


def _load_values(ref: str) -> np.ndarray:
    path = Path(ref[1:] if ref.startswith("@") else ref)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read per-vertex data from {path}: {exc}") from exc
    if isinstance(doc, dict):
        doc = doc.get("values")
    if not isinstance(doc, list):
        raise ParseError(f"{path}: expected a list or an object with 'values'")
    return np.asarray(doc, dtype=float)


# -- scenario resolution ---------------------------------------------------------

def _resolve_graph(desc: dict):
    """Return ``(graph, spec or None)`` for a scenario's graph section."""
    if not isinstance(desc, dict):
        raise InvalidSpec("scenario needs a 'graph' object")
    if "file" in desc:
        path = Path(desc["file"])
        if not path.exists():
            raise ParseError(f"graph file {path} does not exist")
        return read_graph(path), None
    spec = spec_from_dict({k: v for k, v in desc.items() if k != "realize"})
    g = realize(spec) if desc.get("realize") else radial_graph(spec)
    return g, spec


def _names(scn: dict, spec: ModelGraphSpec | None) -> dict:
    p = scn.get("operator", {}).get("p")
    params = spec.params if spec is not None else {}
    names = {k: v for k, v in params.items() if k in ("d", "gamma", "R")}
    if p is not None:
        names["p"] = p
        if "d" in names:
            names["beta"] = lambda: tree_beta(p, int(names["d"]))
    return names


def _vertex_data(value, g: WeightedGraph, names: dict, what: str) -> np.ndarray:
    if isinstance(value, (int, float)):
        return np.full(g.n, float(value))
    if isinstance(value, list):
        return vertex_function(g, value)
    if isinstance(value, str):
        if value.startswith("@"):
            data = _load_values(value)
            if data.shape == (g.radius + 1,) and g.n != g.radius + 1:
                data = data[g.depth]
            return vertex_function(g, data)
        m = re.fullmatch(r"\s*(.+?)\s+outside\s+B_?(\d+)\s*", value)
        if m:
            c = eval_radial(m.group(1), g.depth, names)
            return np.where(g.depth > int(m.group(2)), c, 0.0)
        return eval_radial(value, g.depth, names)
    raise ParseError(f"cannot interpret {what} description {value!r}")


def _potential(scn, g, names):
    return _vertex_data(scn.get("operator", {}).get("V", 0.0), g, names, "potential")


def _p(scn) -> float:
    try:
        return float(scn["operator"]["p"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec("scenario needs operator.p") from exc


def _solve_config(params: dict) -> SolveConfig:
    cfg = params.get("config") or {}
    if isinstance(cfg, str):
        try:
            cfg = json.loads(Path(cfg).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read solver config {cfg}: {exc}") from exc
    try:
        return SolveConfig(**cfg)
    except TypeError as exc:
        raise InvalidSpec(f"bad solver config: {exc}") from exc


def _need_spec(spec, task):
    if spec is None:
        raise InvalidSpec(f"task {task!r} needs a model graph description")
    return spec


def _radial(g: WeightedGraph, f: np.ndarray) -> np.ndarray:
    return f if g.n == g.radius + 1 else spherical_values(g, f, atol=1e-9)


def _annuli(params, lo, hi):
    a = params.get("annuli")
    if a is None:
        return list(range(lo, hi + 1))
    if isinstance(a, dict):
        return list(range(int(a["start"]), int(a["stop"]) + 1))
    return [int(r) for r in a]


# -- tasks -----------------------------------------------------------------------

def _task_build(scn, g, spec):
    summary = {"n": g.n, "edges": int(g.edge_x.size), "radius": g.radius,
               "boundary": len(g.boundary)}
    return {"summary": summary}, None, dumps_graph(g)


def _task_validate(scn, g, spec):
    return {"valid": True, "n": g.n, "edges": int(g.edge_x.size),
            "radius": g.radius, "boundary": len(g.boundary),
            "interior": len(g.interior)}, None, None


def _task_solve(scn, g, spec):
    params = scn.get("params", {})
    names = _names(scn, spec)
    op = SchrodingerOperator(g, _p(scn), _potential(scn, g, names))
    bdata = _vertex_data(params.get("boundary", 0.0), g, names, "boundary data")
    source = params.get("source")
    if source is not None:
        source = _vertex_data(source, g, names, "source")
    cfg = _solve_config(params)
    sol = dirichlet_solve(op, bdata, cfg, source=source)
    report = {"solution": sol.to_dict(), "solver_config": cfg.to_dict()}
    rows = [("radius", "value")]
    if g.n == g.radius + 1:
        rows += [(r, v) for r, v in enumerate(sol.u.tolist())]
    else:
        rows += [(int(g.depth[x]), float(sol.u[x])) for x in range(g.n)]
    return report, rows, None


def _task_green(scn, g, spec):
    params = scn.get("params", {})
    p = _p(scn)
    alpha = float(params.get("alpha", 0.0))
    method = params.get("method") or ("exhaustion" if spec is not None else "ball")
    cfg = _solve_config(params)
    report = {"alpha": alpha, "method": method}
    if method == "closed":
        if alpha != 0:
            raise InvalidSpec("the closed form is only available at alpha = 0")
        g0 = green0_profile(_need_spec(spec, "green"), p)
        profile = g0.value
        report["tail_exact"] = g0.tail_exact
        report["lower"] = g0.lower.tolist()
        report["upper"] = g0.upper.tolist()
    elif method == "flux":
        spec = _need_spec(spec, "green")
        if alpha != 0:
            raise InvalidSpec("the flux recurrence needs G(o); use alpha = 0")
        profile = spherical_flux_solve(spec, p, 0.0, green0_profile(spec, p).value[0])
    elif method == "exhaustion":
        spec = _need_spec(spec, "green")
        R = spec.R
        step = int(params.get("step", 1))
        count = int(params.get("balls", 9))
        radii = [R - step * (count - 1 - i) for i in range(count)]
        if radii[0] < 2:
            raise InvalidSpec("radius too small for the exhaustion schedule")
        res = green_function(spec, p, alpha, radii, cfg,
                             realized=bool(scn["graph"].get("realize")))
        gl = realize(spec.truncate(radii[0])) if scn["graph"].get("realize") \
            else radial_graph(spec.truncate(radii[0]))
        lim = res.limit[:gl.n]
        profile = _radial(gl, lim)
        report.update(res.to_dict())
        report.pop("limit")
    elif method == "ball":
        sol = ball_green(g, p, alpha, cfg)
        profile = _radial(g, sol.u)
        report.update({"sweeps": sol.sweeps, "residual": sol.residual})
    else:
        raise InvalidSpec(f"unknown green method {method!r}")
    report["solver_config"] = cfg.to_dict()
    report["profile"] = np.asarray(profile).tolist()
    rows = [("radius", "value")] + list(enumerate(np.asarray(profile).tolist()))
    return report, rows, None


def _task_beta(scn, g, spec):
    params = scn.get("params", {})
    p = _p(scn)
    d = int(params.get("d", (spec.params.get("d") if spec else None) or 0))
    beta = tree_beta(p, d)
    return {"p": p, "d": d, "beta": beta,
            "residual": abs(tree_beta_residual(beta, p, d))}, None, None


def _hardy(scn, g, spec, task):
    spec = _need_spec(spec, task)
    p = _p(scn)
    G0 = green0_profile(spec, p).value[g.depth]
    return hardy_weight(g, p, G0), G0


def _task_hardy(scn, g, spec):
    pkg, _ = _hardy(scn, g, spec, "hardy")
    rows = [("radius", "phi", "weight")]
    rows += [(int(g.depth[x]), float(pkg.phi[x]), float(pkg.weight[x]))
             for x in range(g.n)]
    return {"phi": pkg.phi.tolist(), "weight": pkg.weight.tolist(),
            "residual": pkg.residual}, rows, None


def _task_energy_probe(scn, g, spec):
    params = scn.get("params", {})
    names = _names(scn, spec)
    op = SchrodingerOperator(g, _p(scn), _potential(scn, g, names))
    support = params.get("support_radius")
    support = None if support is None else \
        [x for x in g.interior if g.depth[x] <= int(support)]
    probe = nonnegativity_probe(op, int(params.get("n_samples", 500)),
                                int(scn["seed"]), support)
    return {"probe": probe.to_dict(),
            "nonnegative": probe.nonnegative()}, None, None


def _u(scn, g, spec):
    params = scn.get("params", {})
    if "u" not in params:
        raise InvalidSpec("landis tasks need params.u")
    return _vertex_data(params["u"], g, _names(scn, spec), "u")


def _landis_rows(rep):
    return [("series", "radius", "sup", "min", "ratio")] + rep.csv_rows()


def _task_landis_tree(scn, g, spec):
    spec = _need_spec(spec, "landis-tree")
    if spec.kind != "tree":
        raise InvalidSpec("landis-tree needs a tree graph description")
    params = scn.get("params", {})
    u = _u(scn, g, spec)
    V = scn.get("operator", {}).get("V")
    V = None if V is None else _potential(scn, g, _names(scn, spec))
    annuli = params.get("annuli")
    rep = landis_check_tree(_p(scn), spec.params["d"], u, V,
                            None if annuli is None else _annuli(params, 0, 0),
                            radial=not scn["graph"].get("realize"))
    return rep.to_dict(), _landis_rows(rep), None


def _task_landis_model(scn, g, spec):
    spec = _need_spec(spec, "landis-model")
    params = scn.get("params", {})
    u = _u(scn, g, spec)
    annuli = None if params.get("annuli") is None else _annuli(params, 0, 0)
    rep = landis_check_model(spec, _p(scn), _potential(scn, g, _names(scn, spec)),
                             u, annuli, int(params.get("n_samples", 200)),
                             int(scn["seed"]))
    return rep.to_dict(), _landis_rows(rep), None


def _comparison_setup(scn, g, spec, task):
    params = scn.get("params", {})
    p = _p(scn)
    H = SchrodingerOperator(g, p, _potential(scn, g, _names(scn, spec)))
    pkg, G0 = _hardy(scn, g, spec, task)
    u = _u(scn, g, spec)
    region = None
    if not params.get("include_root", False):
        region = [x for x in g.interior if x != g.root]
    annuli = _annuli(params, max(1, g.radius // 2), g.radius - 1)
    return params, H, pkg, G0, u, region, annuli


def _task_landis_general(scn, g, spec):
    params, H, pkg, _, u, region, annuli = _comparison_setup(
        scn, g, spec, "landis-general")
    cfg = _solve_config(params)
    G1 = ball_green(g, H.p, 1.0, cfg).u
    rep = landis_check_general(
        H, u, pkg, G1, annuli, region,
        check_harmonic=bool(params.get("check_harmonic", True)),
        also_negative=bool(params.get("also_negative", False)),
        n_samples=int(params.get("n_samples", 200)), seed=int(scn["seed"]),
        provenance={"G1": "zero-Dirichlet ball solve with alpha = 1",
                    "reference": "optimal Hardy weight from the closed-form G0"})
    return rep.to_dict(), _landis_rows(rep), None


def _task_landis_negative(scn, g, spec):
    params, H, pkg, G0, u, region, annuli = _comparison_setup(
        scn, g, spec, "landis-negative")
    rep = landis_check_negative_potential(
        H, u, pkg, G0, annuli, region,
        check_subharmonic=bool(params.get("check_subharmonic", True)),
        n_samples=int(params.get("n_samples", 200)), seed=int(scn["seed"]),
        provenance={"g": "closed-form G0",
                    "reference": "optimal Hardy weight from the closed-form G0"})
    return rep.to_dict(), _landis_rows(rep), None


def _task_landis_recurrent(scn, g, spec):
    params = scn.get("params", {})
    u = _u(scn, g, spec)
    V = _potential(scn, g, _names(scn, spec))
    annuli = None if params.get("annuli") is None else _annuli(params, 0, 0)
    target = g if spec is None or scn["graph"].get("realize") else spec
    rep = landis_check_recurrent(target, _p(scn), V, u,
                                 params.get("compact_set", []),
                                 params.get("recurrent"), annuli)
    return rep.to_dict(), _landis_rows(rep), None


_DISPATCH = {
    "build": _task_build,
    "validate": _task_validate,
    "solve": _task_solve,
    "green": _task_green,
    "beta": _task_beta,
    "hardy": _task_hardy,
    "energy-probe": _task_energy_probe,
    "landis-general": _task_landis_general,
    "landis-negative": _task_landis_negative,
    "landis-model": _task_landis_model,
    "landis-tree": _task_landis_tree,
    "landis-recurrent": _task_landis_recurrent,
}


# -- running -------------------------------------------------------------------

def _dump(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v)
                    for v in row])
    return buf.getvalue()


def validate_scenario(scn: dict) -> dict:
    """Check the scenario shape and fill defaults; returns a resolved copy."""
    if not isinstance(scn, dict):
        raise InvalidSpec("a scenario must be a JSON object")
    task = scn.get("task")
    if task not in TASKS:
        raise InvalidSpec(f"unknown task {task!r}; expected one of {TASKS}")
    if task in SAMPLED and "seed" not in scn:
        raise InvalidSpec(f"task {task!r} samples test functions and needs a seed")
    out = {"task": task, "graph": scn.get("graph"),
           "operator": dict(scn.get("operator") or {}),
           "params": dict(scn.get("params") or {}),
           "output": dict(scn.get("output") or {}),
           "seed": int(scn.get("seed", 0))}
    return out


def execute(scn: dict) -> tuple[dict, list | None, str | None]:
    """Run a scenario and return ``(report, csv rows, graph text)`` in memory."""
    scn = validate_scenario(scn)
    if scn["task"] == "beta" and scn["graph"] is None:
        g, spec = None, None
    else:
        g, spec = _resolve_graph(scn["graph"])
    report, rows, graph_text = _DISPATCH[scn["task"]](scn, g, spec)
    report = dict(report)
    report["scenario"] = scn
    return report, rows, graph_text


def run(scn: dict, stdout=None) -> int:
    """Execute a scenario, write its artifacts and return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    try:
        report, rows, graph_text = execute(scn)
    except PreconditionError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    out = scn.get("output") or {}
    text = _dump(report)
    if out.get("json"):
        Path(out["json"]).write_text(text)
    elif graph_text is None:
        stdout.write(text)
    if graph_text is not None:
        if out.get("graph"):
            Path(out["graph"]).write_text(graph_text)
        else:
            stdout.write(graph_text)
    if rows is not None and out.get("csv"):
        Path(out["csv"]).write_text(_csv_text(rows))
    return 0


def _run_isolated(scn: dict) -> int:
    return run(scn, stdout=io.StringIO())


def run_batch(scenarios: list, outdir: str | None = None,
              workers: int | None = None) -> int:
    """Run independent scenarios concurrently; returns the worst exit code.

    Scenarios without explicit output paths write to
    ``outdir/scenario_<i>.json`` (and ``.csv``).
    """
    resolved = []
    for i, scn in enumerate(scenarios):
        scn = dict(scn)
        out = dict(scn.get("output") or {})
        if outdir is not None:
            base = Path(outdir) / f"scenario_{i:03d}"
            out.setdefault("json", str(base.with_suffix(".json")))
            out.setdefault("csv", str(base.with_suffix(".csv")))
            if scn.get("task") == "build":
                out.setdefault("graph", str(base) + ".graph.json")
        scn["output"] = out
        resolved.append(scn)
    if outdir is not None:
        Path(outdir).mkdir(parents=True, exist_ok=True)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        codes = list(pool.map(_run_isolated, resolved))
    return max(codes, default=0)


# -- argument parsing ----------------------------------------------------------

def _graph_args(ap, required=True):
    grp = ap.add_argument_group("graph")
    kind = grp.add_mutually_exclusive_group(required=required)
    kind.add_argument("--graph", metavar="FILE", help="graph JSON file")
    kind.add_argument("--tree", action="store_const", const="tree", dest="kind")
    kind.add_argument("--antitree", action="store_const", const="antitree",
                      dest="kind")
    kind.add_argument("--path", action="store_const", const="path", dest="kind")
    kind.add_argument("--model", metavar="FILE", help="model spec JSON file")
    grp.add_argument("--d", type=int, help="tree degree")
    grp.add_argument("--gamma", type=float, help="anti-tree exponent")
    grp.add_argument("--R", type=int, help="truncation radius")
    grp.add_argument("--realize", action="store_true",
                     help="use the full ball instead of the radial quotient")


def _common(ap, p=True, V=True, seed=False):
    if p:
        ap.add_argument("--p", type=float, required=True)
    if V:
        ap.add_argument("--V", default="0",
                        help="number, '@file', 'c outside B_k' or radial expression")
    if seed:
        ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", metavar="FILE", help="write the JSON report here")
    ap.add_argument("--csv", metavar="FILE", help="write the CSV trace here")


def _graph_desc(args) -> dict:
    if getattr(args, "graph", None):
        return {"file": args.graph}
    if getattr(args, "model", None):
        try:
            doc = json.loads(Path(args.model).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read model spec {args.model}: {exc}") from exc
        return dict(doc, realize=args.realize)
    desc = {"kind": args.kind, "realize": args.realize}
    for key in ("d", "gamma", "R"):
        if getattr(args, key, None) is not None:
            desc[key] = getattr(args, key)
    return desc


def _number(text):
    try:
        return float(text)
    except (TypeError, ValueError):
        return text


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plandis", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    gp = sub.add_parser("graph", help="validate or build graph files")
    gsub = gp.add_subparsers(dest="action", required=True)
    v = gsub.add_parser("validate")
    v.add_argument("file")
    b = gsub.add_parser("build")
    _graph_args(b)
    b.add_argument("-o", "--output", metavar="FILE")

    mp = sub.add_parser("model", help="build model graphs")
    msub = mp.add_subparsers(dest="action", required=True)
    mb = msub.add_parser("build")
    _graph_args(mb)
    mb.add_argument("-o", "--output", metavar="FILE")

    s = sub.add_parser("solve", help="Dirichlet problem on a ball")
    _graph_args(s)
    _common(s)
    s.add_argument("--boundary", default="0")
    s.add_argument("--source", default=None)
    s.add_argument("--config", metavar="FILE", help="solver config JSON")

    gr = sub.add_parser("green", help="minimal Green function at the root")
    _graph_args(gr)
    _common(gr, V=False)
    gr.add_argument("--alpha", type=float, default=0.0)
    gr.add_argument("--method", choices=("exhaustion", "closed", "flux", "ball"))
    gr.add_argument("--config", metavar="FILE")

    be = sub.add_parser("beta", help="decay rate of G_1 on the d-regular tree")
    be.add_argument("--p", type=float, required=True)
    be.add_argument("--d", type=int, required=True)
    be.add_argument("--json", metavar="FILE")

    h = sub.add_parser("hardy", help="optimal Hardy weight of a model graph")
    _graph_args(h)
    _common(h, V=False)

    e = sub.add_parser("energy-probe", help="sample the energy functional")
    _graph_args(e)
    _common(e, seed=True)
    e.add_argument("--samples", type=int, default=500)
    e.add_argument("--support-radius", type=int)

    la = sub.add_parser("landis", help="Landis-type criteria")
    lsub = la.add_subparsers(dest="regime", required=True)
    for regime in ("general", "negative", "model", "tree", "recurrent"):
        lp = lsub.add_parser(regime)
        _graph_args(lp, required=regime not in ("tree",))
        _common(lp, seed=regime in ("general", "negative", "model"))
        lp.add_argument("--u", required=True,
                        help="radial expression in |x|, d, p, beta, gamma or '@file'")
        lp.add_argument("--annuli", metavar="A:B", help="inclusive radius range")
        if regime in ("general", "negative", "model"):
            lp.add_argument("--samples", type=int, default=200)
        if regime in ("general", "negative"):
            lp.add_argument("--include-root", action="store_true")
            lp.add_argument("--assume-hypothesis", action="store_true",
                            help="record harmonicity/subharmonicity as assumed")
        if regime == "general":
            lp.add_argument("--also-negative", action="store_true")
        if regime == "recurrent":
            lp.add_argument("--compact", default="",
                            help="comma-separated vertex ids")
            lp.add_argument("--recurrent", choices=("yes", "no"))

    bt = sub.add_parser("batch", help="run a list of scenarios concurrently")
    bt.add_argument("file")
    bt.add_argument("--outdir", default=None)
    bt.add_argument("--workers", type=int, default=None)

    r = sub.add_parser("run", help="run one scenario file")
    r.add_argument("scenario")
    return ap


def scenario_from_args(args) -> dict:
    """Translate parsed flags into a scenario dictionary."""
    cmd = args.command
    out = {}
    if getattr(args, "json", None):
        out["json"] = args.json
    if getattr(args, "csv", None):
        out["csv"] = args.csv
    if cmd in ("graph", "model") and args.action == "build":
        if args.output:
            out["graph"] = args.output
        return {"task": "build", "graph": _graph_desc(args), "output": out}
    if cmd == "beta":
        return {"task": "beta", "operator": {"p": args.p},
                "params": {"d": args.d}, "output": out}
    scn = {"graph": _graph_desc(args), "operator": {"p": args.p}, "params": {},
           "output": out, "seed": getattr(args, "seed", 0)}
    if getattr(args, "V", None) is not None:
        scn["operator"]["V"] = _number(args.V)
    params = scn["params"]
    if getattr(args, "config", None):
        params["config"] = args.config
    if cmd == "solve":
        scn["task"] = "solve"
        params["boundary"] = _number(args.boundary)
        if args.source is not None:
            params["source"] = _number(args.source)
    elif cmd == "green":
        scn["task"] = "green"
        params["alpha"] = args.alpha
        if args.method:
            params["method"] = args.method
    elif cmd == "hardy":
        scn["task"] = "hardy"
    elif cmd == "energy-probe":
        scn["task"] = "energy-probe"
        params["n_samples"] = args.samples
        if args.support_radius is not None:
            params["support_radius"] = args.support_radius
    elif cmd == "landis":
        scn["task"] = f"landis-{args.regime}"
        if args.regime == "tree" and scn["graph"].get("kind") is None \
                and "file" not in scn["graph"]:
            scn["graph"]["kind"] = "tree"
        params["u"] = args.u if args.u.startswith("@") else str(args.u)
        if args.regime == "tree" and args.V == "0":
            scn["operator"].pop("V")
        if args.annuli:
            try:
                lo, hi = (int(t) for t in args.annuli.split(":"))
            except ValueError as exc:
                raise ParseError("--annuli expects A:B") from exc
            params["annuli"] = {"start": lo, "stop": hi}
        if hasattr(args, "samples"):
            params["n_samples"] = args.samples
        if getattr(args, "include_root", False):
            params["include_root"] = True
        if getattr(args, "assume_hypothesis", False):
            key = "check_harmonic" if args.regime == "general" else "check_subharmonic"
            params[key] = False
        if getattr(args, "also_negative", False):
            params["also_negative"] = True
        if args.regime == "recurrent":
            params["compact_set"] = [int(t) for t in args.compact.split(",") if t]
            if args.recurrent:
                params["recurrent"] = args.recurrent == "yes"
    return scn


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "graph" and args.action == "validate":
            scn = {"task": "validate", "graph": {"file": args.file}}
        elif args.command == "run":
            scn = _read_json(args.scenario)
        elif args.command == "batch":
            doc = _read_json(args.file)
            scenarios = doc.get("scenarios") if isinstance(doc, dict) else doc
            if not isinstance(scenarios, list):
                raise InvalidSpec("batch file must hold a list of scenarios")
            return run_batch(scenarios, args.outdir, args.workers)
        else:
            scn = scenario_from_args(args)
    except PreconditionError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return run(scn)


if __name__ == "__main__":
    sys.exit(main())
