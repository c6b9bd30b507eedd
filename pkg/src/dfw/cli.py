"""``dfw`` command-line front end.

Every run reads one JSON config (validated before any data is touched),
optional CSV inputs, and writes CSV/JSON outputs atomically into ``--out``.
Exit status: 0 success, 1 numeric or I/O failure, 2 invalid input.
"""
import argparse
import copy
import csv
import io
import json
import math
import os
import sys
import tempfile
import time

import jsonschema
import numpy as np

from . import geometry as geo
from .diffusion import DiffusionProblem, solve_diffusion
from .eigensolver import EigenProblem, eigen_scan, worker_count
from .hfseries import HFSeries, evaluate_series, fit_hf_series
from .kernels import ConvectionParams, KernelFamily, KernelSpec
from .ridgelets import RidgeletDictionary, build_direction_sweep, fit_ridgelet, scale_parameters
from .transforms import forward_transform, lambda_grid, make_plan

COMMANDS = ("kernel-table", "eigen", "fit", "transform", "diffuse", "ridge")


class InputError(Exception):
    """Bad config or data: exit status 2."""


# ---------------------------------------------------------------------------
# schemas and defaults
# ---------------------------------------------------------------------------

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_INT1 = {"type": "integer", "minimum": 1}
_POINT = {"type": "array", "items": _NUM, "minItems": 1, "maxItems": 2}
_POINTS = {"type": "array", "items": _POINT, "minItems": 1}
_RANGE = {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2}

_DOMAIN = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": list(geo.KINDS)},
        "a": _NUM, "b": _NUM,
        "center": _POINT, "radius": _POS,
        "corners": {"type": "array", "items": _POINT, "minItems": 2, "maxItems": 2},
        "vertices": _POINTS,
    },
}
_CONVECTION = {
    "type": ["object", "null"],
    "additionalProperties": False,
    "required": ["velocity", "diffusivity"],
    "properties": {"velocity": _POINT, "diffusivity": _POS, "reaction": {"type": "number", "minimum": 0}},
}
_CONDITION = {"enum": ["dirichlet", "neumann", "mixed"]}
_MASK = {"type": ["array", "null"], "items": {"type": "boolean"}}


def _obj(props, **extra):
    props = dict(props, command={"enum": list(COMMANDS)})
    return {"type": "object", "additionalProperties": False, "properties": props, **extra}


SCHEMAS = {
    "kernel-table": _obj({
        "kernel": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "family": {"enum": [f.value for f in KernelFamily]},
                "n": {"type": "integer", "minimum": 1, "maximum": 5},
                "scale": {"type": "number", "minimum": 0},
                "normalization": {"enum": ["shape", "printed"]},
                "convection": _CONVECTION,
                "direction": {"type": ["array", "null"], "items": _NUM},
            },
        },
        "r": {
            "type": "object", "additionalProperties": False,
            "properties": {"start": {"type": "number", "minimum": 0}, "stop": _POS, "count": _INT1},
        },
    }),
    "eigen": _obj({
        "domain": _DOMAIN,
        "condition": _CONDITION,
        "neumann_mask": _MASK,
        "flavor": {"enum": ["phi", "dphi", "both"]},
        "boundary_count": {"type": "integer", "minimum": 4},
        "lam_range": _RANGE,
        "grid": {"type": "integer", "minimum": 50},
        "threshold": _POS,
    }),
    "fit": _obj({
        "domain": {"oneOf": [_DOMAIN, {"type": "null"}]},
        "eigenvalues": {"type": ["array", "null"], "items": _POS, "minItems": 1},
        "lam_range": {"oneOf": [_RANGE, {"type": "null"}]},
        "scan_grid": {"type": "integer", "minimum": 50},
        "condition": _CONDITION,
        "boundary_count": {"type": "integer", "minimum": 4},
        "max_scales": {"type": ["integer", "null"], "minimum": 1},
        "centers": {"oneOf": [_POINTS, {"type": "null"}]},
        "center_count": {"type": ["integer", "null"], "minimum": 1},
        "flavor": {"enum": ["phi", "dphi", "both"]},
        "method": {"enum": ["least_squares", "orthogonality"]},
        "constant": {"type": "boolean"},
        "ridge": {"type": ["number", "null"], "minimum": 0},
        "series": {"type": ["string", "null"]},
    }),
    "transform": _obj({
        "kind": {"enum": ["hft", "j", "y", "psi", "convdiff"]},
        "lambdas": {"oneOf": [
            {"type": "array", "items": _POS, "minItems": 1},
            {"type": "object", "additionalProperties": False, "required": ["max", "count"],
             "properties": {"max": _POS, "count": _INT1}},
        ]},
        "xi": {"oneOf": [
            _POINTS,
            {"type": "object", "additionalProperties": False, "required": ["start", "stop", "count"],
             "properties": {"start": _NUM, "stop": _NUM, "count": {"type": "integer", "minimum": 2}}},
        ]},
        "finite": {"type": "boolean"},
        "orientation": {"enum": ["outgoing", "incoming"]},
        "convection": _CONVECTION,
        "directions": {"oneOf": [_POINTS, {"type": "null"}]},
    }),
    "diffuse": _obj({
        "domain": _DOMAIN,
        "kappa": _POS,
        "condition": _CONDITION,
        "neumann_mask": _MASK,
        "boundary_count": {"type": "integer", "minimum": 4},
        "initial": {
            "type": "object", "additionalProperties": False, "required": ["kind"],
            "properties": {
                "kind": {"enum": ["sine_product", "data"]},
                "amplitude": _NUM,
                "frequencies": {"type": "array", "items": _NUM, "minItems": 1, "maxItems": 2},
            },
        },
        "lam_range": {"oneOf": [_RANGE, {"type": "null"}]},
        "eigenvalues": {"type": ["array", "null"], "items": _POS, "minItems": 1},
        "modes": {"type": ["integer", "null"], "minimum": 1},
        "method": {"enum": ["orthogonality", "least_squares"]},
        "grid": {"type": "integer", "minimum": 50},
        "times": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        "probes": {"oneOf": [
            _POINTS,
            {"type": "object", "additionalProperties": False, "required": ["count"],
             "properties": {"count": {"type": "integer", "minimum": 2}}},
        ]},
    }),
    "ridge": _obj({
        "directions": {"oneOf": [_INT1, _POINTS]},
        "scales": {"type": "array", "items": _POS, "minItems": 1},
        "params": {"type": ["array", "null"], "items": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}},
        "speed": {"type": "number", "minimum": 0},
        "diffusivity": _POS,
        "centers": {"oneOf": [_POINTS, {"type": "null"}]},
        "domain": {"oneOf": [_DOMAIN, {"type": "null"}]},
        "center_count": _INT1,
        "branch": {"enum": ["rapid", "general"]},
        "ridge": {"type": "number", "minimum": 0},
        "constant": {"type": "boolean"},
    }),
}

DEFAULTS = {
    "kernel-table": {
        "kernel": {"family": "helmholtz_regular", "n": 3, "scale": math.pi, "normalization": "shape",
                   "convection": None, "direction": None},
        "r": {"start": 0.0, "stop": 10.0, "count": 101},
    },
    "eigen": {
        "domain": {"kind": "interval", "a": 0.0, "b": 1.0},
        "condition": "dirichlet", "neumann_mask": None, "flavor": "phi", "boundary_count": 40,
        "lam_range": [1.0, 10.0], "grid": 200, "threshold": 1e-6,
    },
    "fit": {
        "domain": None, "eigenvalues": None, "lam_range": None, "scan_grid": 200, "condition": "dirichlet",
        "boundary_count": 40, "max_scales": None, "centers": None, "center_count": None, "flavor": "phi",
        "method": "least_squares", "constant": False, "ridge": None, "series": None,
    },
    "transform": {
        "kind": "j", "lambdas": {"max": 10.0, "count": 64}, "xi": {"start": -5.0, "stop": 5.0, "count": 65},
        "finite": True, "orientation": "outgoing", "convection": None, "directions": None,
    },
    "diffuse": {
        "domain": {"kind": "interval", "a": 0.0, "b": 1.0},
        "kappa": 1.0, "condition": "dirichlet", "neumann_mask": None, "boundary_count": 40,
        "initial": {"kind": "sine_product", "amplitude": 1.0, "frequencies": [math.pi]},
        "lam_range": [1.0, 20.0], "eigenvalues": None, "modes": None, "method": "orthogonality", "grid": 200,
        "times": [0.05, 0.1], "probes": {"count": 50},
    },
    "ridge": {
        "directions": 4, "scales": [1.0, 2.0], "params": None, "speed": 1.0, "diffusivity": 1.0,
        "centers": None, "domain": None, "center_count": 12, "branch": "rapid", "ridge": 1e-12, "constant": True,
    },
}

# nested objects whose missing keys are filled from the defaults
_NESTED = {"kernel-table": ("kernel", "r"), "diffuse": ("initial",)}


def effective_config(command, raw):
    """Validate ``raw`` against the command's schema and fill in defaults."""
    try:
        jsonschema.validate(raw, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"config invalid at {where}: {exc.message}") from None
    if raw.get("command", command) != command:
        raise InputError(f"config is for {raw['command']!r}, not {command!r}")
    cfg = copy.deepcopy(DEFAULTS[command])
    for key, val in raw.items():
        if key == "command":
            continue
        if key in _NESTED.get(command, ()) and isinstance(val, dict):
            cfg[key] = {**cfg[key], **val}
        else:
            cfg[key] = val
    return cfg


def _reject_constant(name):
    raise InputError(f"config contains non-finite number {name}")


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh, parse_constant=_reject_constant)
    except FileNotFoundError:
        raise InputError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON (line {exc.lineno}): {exc.msg}") from None


# ---------------------------------------------------------------------------
# CSV in and out
# ---------------------------------------------------------------------------

def _fmt(x):
    return repr(float(x))


def read_csv(path, trailing):
    """Read ``x1[,x2],<trailing...>`` numeric columns; returns (points, columns)."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise InputError(f"data file not found: {path}") from None
    except UnicodeDecodeError:
        raise InputError(f"{path}: not UTF-8 text") from None
    if not rows:
        raise InputError(f"{path}: line 1: empty file")
    header = [h.strip() for h in rows[0]]
    allowed = [["x1"] + list(trailing), ["x1", "x2"] + list(trailing)]
    if header not in allowed:
        raise InputError(f"{path}: line 1: header must be one of {[','.join(h) for h in allowed]}")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise InputError(f"{path}: line {lineno}: expected {len(header)} fields, found {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise InputError(f"{path}: line {lineno}: non-numeric field") from None
        if not all(math.isfinite(v) for v in vals):
            raise InputError(f"{path}: line {lineno}: NaN or infinite value")
        data.append(vals)
    if not data:
        raise InputError(f"{path}: no data rows")
    arr = np.array(data)
    n = len(header) - len(trailing)
    return arr[:, :n], arr[:, n:]


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dfw-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _coord_names(n):
    return [f"x{i + 1}" for i in range(n)]


def _one_data(data, command):
    if len(data) != 1:
        raise InputError(f"{command} needs exactly one --data CSV")
    return data[0]


def _domain(cfg):
    d = dict(cfg)
    try:
        return geo.build_domain(d.pop("kind"), **d)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"domain invalid: {exc}") from None


def _convection(cfg):
    if cfg is None:
        return None
    return ConvectionParams(tuple(cfg["velocity"]), cfg["diffusivity"], cfg.get("reaction", 0.0))


# ---------------------------------------------------------------------------
# commands: each returns (outputs, diagnostics); outputs maps file name -> text
# ---------------------------------------------------------------------------

def cmd_kernel_table(cfg, data):
    k = cfg["kernel"]
    try:
        spec = KernelSpec(k["family"], k["n"], k["scale"], _convection(k["convection"]), k["normalization"])
    except (ValueError, TypeError) as exc:
        raise InputError(f"kernel invalid: {exc}") from None
    rc = cfg["r"]
    if rc["stop"] <= rc["start"]:
        raise InputError("r.stop must exceed r.start")
    r = np.linspace(rc["start"], rc["stop"], rc["count"])
    if spec.family.anisotropic:
        direction = np.asarray(k["direction"] or np.eye(k["n"])[0], dtype=float)
        if direction.shape != (k["n"],) or not np.linalg.norm(direction) > 0:
            raise InputError("kernel.direction must be a nonzero vector of length n")
        vals = spec(r[:, None] * (direction / np.linalg.norm(direction)))
    else:
        vals = spec.radial(r)
    vals = np.atleast_1d(vals)
    if np.iscomplexobj(vals):
        text = csv_text(["r", "re", "im"], zip(r, vals.real, vals.imag))
    else:
        text = csv_text(["r", "value"], zip(r, vals))
    return {"kernel_table.csv": text}, {"rows": len(r)}


def _eigen_problem(cfg, dom):
    try:
        return EigenProblem(dom, cfg["condition"], cfg.get("flavor", "phi"), cfg["boundary_count"],
                            neumann_mask=cfg.get("neumann_mask"))
    except ValueError as exc:
        raise InputError(f"eigen problem invalid: {exc}") from None


def cmd_eigen(cfg, data):
    prob = _eigen_problem(cfg, _domain(cfg["domain"]))
    res = eigen_scan(prob, cfg["lam_range"], grid=cfg["grid"], threshold=cfg["threshold"])
    doc = {"eigenvalues": res.eigenvalues.tolist(), "residuals": res.residuals.tolist(),
           "rejected": [[float(a), float(b)] for a, b in res.rejected]}
    return ({"eigenvalues.json": json.dumps(doc, indent=2, sort_keys=True) + "\n",
             "indicator.csv": csv_text(["lambda", "indicator"], zip(res.grid, res.curve))},
            {"eigenvalues": doc["eigenvalues"]})


def _residual_map(points, f, fitted):
    n = points.shape[1]
    return csv_text(_coord_names(n) + ["f", "fitted", "residual"],
                    (list(p) + [a, b, a - b] for p, a, b in zip(points, f, fitted)))


def cmd_fit(cfg, data):
    if cfg["series"] is not None:
        try:
            with open(cfg["series"], encoding="utf-8") as fh:
                series = HFSeries.from_json(fh.read())
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"cannot load series: {exc}") from None
        pts, cols = read_csv(_one_data(data, "fit"), ["f"])
        f = cols[:, 0]
        fitted = evaluate_series(series, pts)
        num, den = float(np.sum((f - fitted) ** 2)), float(np.sum(f**2))
        resid = math.sqrt(num / den) if den > 0 else (0.0 if num == 0 else math.inf)
        return {"residuals.csv": _residual_map(pts, f, fitted)}, {"residual": resid, "stored_residual": series.residual}
    dom = _domain(cfg["domain"]) if cfg["domain"] is not None else None
    centers = cfg["centers"]
    if centers is None and cfg["center_count"] is not None:
        if dom is None:
            raise InputError("center_count needs a domain")
        centers = geo.default_centers(dom, cfg["center_count"])
    if cfg["eigenvalues"] is None and (cfg["lam_range"] is None or dom is None):
        raise InputError("give eigenvalues, or a domain with lam_range to scan")
    pts, cols = read_csv(_one_data(data, "fit"), ["f"])
    if cfg["eigenvalues"] is not None:
        lams = cfg["eigenvalues"]
    else:
        prob = _eigen_problem({**cfg, "flavor": cfg["flavor"] if cfg["flavor"] != "both" else "phi"}, dom)
        lams = eigen_scan(prob, cfg["lam_range"], grid=cfg["scan_grid"]).eigenvalues
        if len(lams) == 0:
            raise RuntimeError("no eigenvalues found in lam_range")
    if cfg["max_scales"] is not None:
        lams = lams[: cfg["max_scales"]]
    try:
        series = fit_hf_series(pts, cols[:, 0], lams, centers=centers, flavor=cfg["flavor"], method=cfg["method"],
                               domain=dom, constant=cfg["constant"], ridge=cfg["ridge"])
    except ValueError as exc:
        raise InputError(str(exc)) from None
    fitted = evaluate_series(series, pts)
    return ({"series.json": series.to_json() + "\n", "residuals.csv": _residual_map(pts, cols[:, 0], fitted)},
            {"residual": series.residual, "scales": [float(x) for x in series.scales]})


def cmd_transform(cfg, data):
    lc = cfg["lambdas"]
    if isinstance(lc, dict):
        lams, lw = lambda_grid(lc["max"], lc["count"])
    else:
        lams, lw = np.asarray(lc, dtype=float), None
    pts, cols = read_csv(_one_data(data, "transform"), ["w", "f"])
    n = pts.shape[1]
    xc = cfg["xi"]
    if isinstance(xc, dict):
        if n != 1:
            raise InputError("xi as a range is only valid in 1D; list the points instead")
        xi = np.linspace(xc["start"], xc["stop"], xc["count"])[:, None]
    else:
        xi = np.asarray(xc, dtype=float)
        if xi.shape[1] != n:
            raise InputError("xi points must have the data's dimension")
    kw = {"finite": cfg["finite"], "orientation": cfg["orientation"]}
    if cfg["kind"] == "convdiff":
        kw["convection"] = _convection(cfg["convection"])
        kw["directions"] = cfg["directions"]
    try:
        plan = make_plan(cfg["kind"], geo.QuadratureRule(pts, cols[:, 0]), lams, xi, lambda_weights=lw, **kw)
    except (ValueError, TypeError) as exc:
        raise InputError(f"transform plan invalid: {exc}") from None
    field_ = forward_transform(cols[:, 1], plan)
    return {"field.csv": field_.to_csv()}, {"shape": list(plan.shape)}


def _initial(cfg, dom, data):
    init = cfg["initial"]
    if init["kind"] == "sine_product":
        freqs = np.asarray(init.get("frequencies", [math.pi]), dtype=float)
        if len(freqs) != dom.n:
            raise InputError("initial.frequencies needs one entry per dimension")
        amp = float(init.get("amplitude", 1.0))

        def R(x):
            x = np.asarray(x, dtype=float).reshape(len(x), -1)
            return amp * np.prod(np.sin(x * freqs), axis=1)
        return R
    from scipy.interpolate import RBFInterpolator
    pts, cols = read_csv(_one_data(data, "diffuse"), ["f"])
    if pts.shape[1] != dom.n:
        raise InputError("initial data dimension differs from the domain")
    interp = RBFInterpolator(pts, cols[:, 0], kernel="thin_plate_spline", degree=1)
    return lambda x: interp(np.asarray(x, dtype=float).reshape(len(x), -1))


def _probes(cfg, dom):
    pc = cfg["probes"]
    if isinstance(pc, dict):
        if dom.kind == "interval":
            return np.linspace(dom.params[0], dom.params[1], pc["count"])[:, None]
        return geo.default_centers(dom, pc["count"])
    p = np.asarray(pc, dtype=float)
    if p.shape[1] != dom.n:
        raise InputError("probe points must match the domain dimension")
    return p


def cmd_diffuse(cfg, data):
    dom = _domain(cfg["domain"])
    R = _initial(cfg, dom, data)
    try:
        prob = DiffusionProblem(dom, cfg["kappa"], R, cfg["condition"], neumann_mask=cfg["neumann_mask"],
                                boundary_count=cfg["boundary_count"])
    except ValueError as exc:
        raise InputError(f"diffusion problem invalid: {exc}") from None
    if cfg["eigenvalues"] is None and cfg["lam_range"] is None:
        raise InputError("give lam_range or eigenvalues")
    sol = solve_diffusion(prob, cfg["lam_range"], cfg["modes"], eigenvalues=cfg["eigenvalues"],
                          method=cfg["method"], grid=cfg["grid"])
    probes = _probes(cfg, dom)
    rows = []
    for t in cfg["times"]:
        u = sol(probes, t)
        rows.extend(list(p) + [t, v] for p, v in zip(probes, u))
    text = csv_text(_coord_names(dom.n) + ["t", "u"], rows)
    return ({"solution.csv": text, "diffusion.json": sol.to_json() + "\n"},
            {"gammas": sol.gammas.tolist(), "amplitudes": sol.amplitudes.tolist(), "residual": sol.residual})


def cmd_ridge(cfg, data):
    pts, cols = read_csv(_one_data(data, "ridge"), ["f"])
    n = pts.shape[1]
    centers = cfg["centers"]
    if centers is None:
        if cfg["domain"] is None:
            raise InputError("give centers or a domain to place them in")
        centers = geo.default_centers(_domain(cfg["domain"]), cfg["center_count"])
    try:
        params = (np.asarray(cfg["params"], dtype=float) if cfg["params"] is not None
                  else scale_parameters(cfg["scales"], cfg["speed"], cfg["diffusivity"]))
        if isinstance(cfg["directions"], int):
            if n != 2:
                raise ValueError("a direction count needs 2D data; list the directions instead")
            dic = build_direction_sweep(cfg["directions"], params, centers, branch=cfg["branch"])
        else:
            dic = RidgeletDictionary(cfg["directions"], params, centers, cfg["branch"])
        if dic.n != n:
            raise ValueError("dictionary dimension differs from the data")
    except ValueError as exc:
        raise InputError(f"dictionary invalid: {exc}") from None
    series = fit_ridgelet((pts, cols[:, 0]), dic, cfg["ridge"], constant=cfg["constant"])
    fitted = series(pts)
    return ({"ridgelet.json": series.to_json() + "\n", "residuals.csv": _residual_map(pts, cols[:, 0], fitted)},
            {"residual": series.residual, "size": dic.size})


HANDLERS = {
    "kernel-table": cmd_kernel_table,
    "eigen": cmd_eigen,
    "fit": cmd_fit,
    "transform": cmd_transform,
    "diffuse": cmd_diffuse,
    "ridge": cmd_ridge,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _rows(name, text):
    if name.endswith(".csv"):
        return text.count("\n") - 1
    return 1


def run(command, config_path, data=(), out="."):
    """Run one command; returns (exit status, report dict)."""
    report = {"command": command, "files": [], "diagnostics": {}, "timings": {}}
    t0 = time.perf_counter()
    try:
        try:
            worker_count()
        except ValueError as exc:
            raise InputError(str(exc)) from None
        cfg = effective_config(command, load_config(config_path))
        report["config"] = cfg
        report["timings"]["validate"] = time.perf_counter() - t0
        t1 = time.perf_counter()
        outputs, diag = HANDLERS[command](cfg, list(data))
        report["diagnostics"] = diag
        report["timings"]["compute"] = time.perf_counter() - t1
    except InputError as exc:
        print(f"dfw {command}: {exc}", file=sys.stderr)
        return 2, report
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"dfw {command}: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1, report
    try:
        os.makedirs(out, exist_ok=True)
        for name in sorted(outputs):
            write_atomic(os.path.join(out, name), outputs[name])
            report["files"].append({"path": name, "rows": _rows(name, outputs[name])})
        stable = {k: report[k] for k in ("command", "config", "diagnostics", "files")}
        stable["files"] = stable["files"] + [{"path": "report.json", "rows": 1}]
        write_atomic(os.path.join(out, "report.json"), json.dumps(stable, indent=2, sort_keys=True) + "\n")
        report["files"] = stable["files"]
    except OSError as exc:
        print(f"dfw {command}: cannot write outputs: {exc}", file=sys.stderr)
        return 1, report
    return 0, report


def build_parser():
    p = argparse.ArgumentParser(prog="dfw", description="Distance-function kernels, series, transforms and solvers.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--data", action="append", default=[], help="input CSV (repeatable)")
    p.add_argument("--out", default=".", help="output directory (default: current directory)")
    p.add_argument("--print-defaults", action="store_true", help="print the full default config and exit")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.print_defaults:
        doc = {"command": args.command, **DEFAULTS[args.command]}
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return 0
    if not args.config:
        print(f"dfw {args.command}: --config is required", file=sys.stderr)
        return 2
    status, report = run(args.command, args.config, args.data, args.out)
    if status == 0:
        sys.stdout.write(json.dumps({k: report[k] for k in ("command", "files", "diagnostics", "timings")},
                                    indent=2, sort_keys=True) + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
