"""Batch command-line front end.

    vexlab [command] [--config PATH] [--out DIR] [--jobs N] [--seed U64] [--quad-panels N] [--tol FLOAT]

Exit status: 0 success, 1 invalid configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import inspect
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import jsonschema

from . import catalog, lab
from .approximation import best_approximation, default_space
from .descent import SolverOptions
from .errors import ConfigurationError, ExprSyntaxError, VexlabError
from .kfunctional import k_functional
from .norms import luxemburg_norm, modular, INFINITE
from .numerics import QuadratureConfig
from .weights import classify_weight, log_holder_profile

__all__ = ["main", "run", "CONFIG_SCHEMA", "validate_config", "atomic_write"]

log = logging.getLogger("vexlab")

COMMANDS = ("norm", "apweight", "approx", "kfunc", "suite", "catalog")

_POS = {"type": "number", "exclusiveMinimum": 0}
_POS_INT = {"type": "integer", "minimum": 1}
_EXPR = {"type": "string", "minLength": 1}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "f": _EXPR,
        "p": {"anyOf": [_EXPR, {"type": "number", "minimum": 1}]},
        "w": {"anyOf": [_EXPR, {"type": "number", "exclusiveMinimum": 0}]},
        "n": {"type": "integer", "minimum": 0},
        "r": _POS_INT,
        "M": _POS_INT,
        "delta": _POS,
        "levels": {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 16}, "minItems": 2},
        "suite": {"anyOf": [{"type": "string"}, {"type": "array", "items": {"type": "string"}, "minItems": 1}]},
        "suite_params": {"type": "object", "additionalProperties": {"type": "object"}},
        "quadrature": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rule": {"enum": ["trapezoid", "gauss"]},
                "panels": _POS_INT,
                "refinement": {"type": "integer", "minimum": 2},
                "tol": _POS,
                "order": {"type": "integer", "minimum": 2, "maximum": 64},
                "max_refinements": {"type": "integer", "minimum": 0, "maximum": 30},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "method": {"enum": ["coordinate", "lbfgs"]},
                "tol": _POS,
                "max_cycles": _POS_INT,
                "max_iter": _POS_INT,
                "line_tol": _POS,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string", "minLength": 1},
                "csv": {"type": "boolean"},
                "plot_data": {"type": "boolean"},
                "figures": {"type": "boolean"},
            },
        },
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "jobs": _POS_INT,
    },
}

_REQUIRED = {"norm": ("f",), "approx": ("f", "n"), "kfunc": ("f", "delta", "r"), "apweight": ("w",)}


class _Invalid(Exception):
    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer


def _pointer(path):
    return "/" + "/".join(str(p) for p in path) if path else ""


def validate_config(config: dict) -> None:
    """Raise with a JSON pointer for the first schema violation (deterministic order)."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        e = errors[0]
        path = list(e.absolute_path)
        if e.validator == "additionalProperties":
            extra = sorted(set(e.instance) - set(e.schema.get("properties", {})))
            if extra:
                path = path + [extra[0]]
        raise _Invalid(e.message, _pointer(path))
    for key in _REQUIRED.get(config.get("command"), ()):
        if key not in config:
            raise _Invalid(f"command {config['command']!r} needs {key!r}", _pointer([key]))


def atomic_write(path: Path, data) -> Path:
    """Write through a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


# ===================================================================== commands


def _at(key, resolver, value):
    try:
        return resolver(value)
    except (ConfigurationError, ExprSyntaxError) as exc:
        raise _Invalid(str(exc), _pointer([key])) from exc


def _function(cfg):
    return _at("f", catalog.resolve_function, cfg["f"])


def _ids(cfg):
    """Exponent and weight ids as strings, so numeric and textual forms get the same names."""
    p, w = cfg.get("p", "2"), cfg.get("w", "1")
    p = p if isinstance(p, str) else repr(p)
    w = w if isinstance(w, str) else repr(w)
    return _at("p", catalog.resolve_exponent, p), _at("w", catalog.resolve_weight, w)


def _quad(cfg):
    q = dict(cfg.get("quadrature", {}))
    return QuadratureConfig(**q)


def _solver(cfg, default="coordinate"):
    s = dict(cfg.get("solver", {}))
    s.setdefault("method", default)
    return SolverOptions(**s)


def _space(cfg, p, w, degree):
    panels = cfg.get("quadrature", {}).get("panels")
    return default_space(p, w, degree, nodes=panels if panels and panels >= 64 else None)


def _cmd_norm(cfg, out):
    f = _function(cfg)
    p, w = _ids(cfg)
    tol = cfg.get("solver", {}).get("tol", 1e-10)
    res = luxemburg_norm(f, p, w, quad=_quad(cfg), tol=tol)
    rho = modular(f, p, w, quad=_quad(cfg))
    doc = {"command": "norm", "f": str(cfg["f"]), "p": p.name, "w": w.name, **res.to_dict(),
           "modular": None if rho is INFINITE else float(rho), "modular_infinite": rho is INFINITE}
    return {"norm.json": doc}


def _cmd_apweight(cfg, out):
    p, w = _ids(cfg)
    levels = tuple(cfg.get("levels", (8, 10, 12)))
    cls = classify_weight(w, p, levels=levels)
    prof = log_holder_profile(p)
    doc = {"command": "apweight", "w": w.name, "p": p.name, **cls.to_dict(),
           "p_minus": p.p_minus, "p_plus": p.p_plus,
           "log_holder": {"estimates": [e.value for e in prof.estimates], "growth": prof.growth,
                          "is_log_holder": prof.is_log_holder}}
    return {"apweight.json": doc}


def _cmd_approx(cfg, out):
    f = _function(cfg)
    n = int(cfg["n"])
    p, w = _ids(cfg)
    deg = max(n, getattr(f, "degree", n))
    res = best_approximation(f, n, p, w, space=_space(cfg, p, w, deg), options=_solver(cfg))
    doc = {"command": "approx", "f": str(cfg["f"]), "p": p.name, "w": w.name, "n": n, **res.to_dict()}
    return {"approx.json": doc}


def _cmd_kfunc(cfg, out):
    f = _function(cfg)
    p, w = _ids(cfg)
    res = k_functional(f, float(cfg["delta"]), int(cfg["r"]), p, w, M=cfg.get("M"),
                       options=_solver(cfg, default="lbfgs"))
    doc = {"command": "kfunc", "f": str(cfg["f"]), "p": p.name, "w": w.name, "delta": float(cfg["delta"]),
           "r": int(cfg["r"]), **res.to_dict()}
    return {"kfunc.json": doc}


def _cmd_catalog(cfg, out):
    return {"catalog.json": {"command": "catalog", **catalog.listing(), "suites": sorted(lab.SUITES)}}


def _suite_names(cfg):
    s = cfg.get("suite", "all")
    names = [s] if isinstance(s, str) else list(s)
    if names == ["all"]:
        names = list(lab.SUITES)
    for i, name in enumerate(names):
        if name not in lab.SUITES:
            ptr = "/suite" if isinstance(cfg.get("suite"), str) else f"/suite/{i}"
            raise _Invalid(f"unknown suite {name!r}; choose from {sorted(lab.SUITES)}", ptr)
    return names


def _suite_params(cfg, name):
    fn = lab.SUITES[name]
    params = dict(cfg.get("suite_params", {}).get(name, {}))
    sig = inspect.signature(fn).parameters
    for key in params:
        if key not in sig:
            raise _Invalid(f"suite {name!r} has no parameter {key!r}", f"/suite_params/{name}/{key}")
    if "seed" in sig and "seed" in cfg and "seed" not in params:
        params["seed"] = int(cfg["seed"])
    return params


def _cmd_suite(cfg, out):
    names = _suite_names(cfg)
    params = {name: _suite_params(cfg, name) for name in names}
    jobs = int(cfg.get("jobs", 1))
    opts = cfg.get("output", {})
    files = {}

    def one(name):
        return lab.run_suite(name, **params[name])

    if jobs > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(one, names))
    else:
        results = [one(n) for n in names]
    summary = []
    for reports in results:
        for rep in reports:
            stem = f"suite_{rep.suite}"
            files[f"{stem}.json"] = rep.to_json()
            if opts.get("csv", True):
                files[f"{stem}.csv"] = rep.to_csv()
            if opts.get("plot_data", True):
                files[f"{stem}.tsv"] = rep.to_tsv()
            if opts.get("figures", True):
                files[f"{stem}.png"] = rep
            summary.append({"suite": rep.suite, "verdict": rep.verdict, "max_ratio": rep.max_ratio,
                            "slope": rep.slope, "checks": rep.checks, "file": f"{stem}.json",
                            "cases": len(rep.cases)})
    summary.sort(key=lambda s: s["suite"])
    files["suite_summary.json"] = {"command": "suite", "reports": summary}
    return files


_HANDLERS = {
    "norm": _cmd_norm,
    "apweight": _cmd_apweight,
    "approx": _cmd_approx,
    "kfunc": _cmd_kfunc,
    "suite": _cmd_suite,
    "catalog": _cmd_catalog,
}


def _emit(files: dict, out: Path):
    from .plotting import plot_report

    written = []
    for name in sorted(files):
        data = files[name]
        target = out / name
        if isinstance(data, lab.SuiteReport):
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", suffix=".png", dir=out)
            os.close(fd)
            try:
                plot_report(data, tmp)
                os.replace(tmp, target)
            finally:
                if os.path.exists(tmp):
                    os.unlink(tmp)
        else:
            atomic_write(target, data if isinstance(data, str) else _dumps(data))
        written.append(str(target))
    return written


def run(config: dict, out_dir=None) -> int:
    """Validate ``config``, run its command and write the artifacts; returns the exit status."""
    try:
        validate_config(config)
        cmd = config.get("command")
        if cmd is None:
            raise _Invalid("no command given", "/command")
        out = Path(out_dir or config.get("output", {}).get("dir") or "vexlab_out")
        out.mkdir(parents=True, exist_ok=True)
        files = _HANDLERS[cmd](config, out)
    except _Invalid as exc:
        print(f"error: {exc} (at {exc.pointer or '/'})", file=sys.stderr)
        return 1
    except (ConfigurationError, ExprSyntaxError) as exc:
        ptr = getattr(exc, "pointer", None)
        print(f"error: {exc}" + (f" (at {ptr})" if ptr else ""), file=sys.stderr)
        return 1
    except (VexlabError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    written = _emit(files, out)
    main_doc = next((v for k, v in sorted(files.items()) if k.endswith(".json") and isinstance(v, dict)), None)
    if main_doc is not None:
        sys.stdout.write(_dumps(main_doc))
    for path in written:
        log.info("wrote %s", path)
    return 0


def _parser():
    ap = argparse.ArgumentParser(prog="vexlab", description="Weighted variable-exponent approximation toolkit.")
    ap.add_argument("command", nargs="?", choices=COMMANDS, help="overrides the command in the config")
    ap.add_argument("--config", type=Path, help="JSON run configuration")
    ap.add_argument("--out", type=Path, help="output directory (VEXLAB_OUT takes precedence)")
    ap.add_argument("--jobs", type=int, help="concurrent suites")
    ap.add_argument("--seed", type=int, help="seed for random polynomials")
    ap.add_argument("--quad-panels", type=int, dest="quad_panels", help="base quadrature panels")
    ap.add_argument("--tol", type=float, help="solver / norm tolerance")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    config = {}
    if args.config is not None:
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 1
        if not isinstance(config, dict):
            print("error: config must be a JSON object (at /)", file=sys.stderr)
            return 1
    config = copy.deepcopy(config)
    if args.command:
        config["command"] = args.command
    if args.jobs is not None:
        config["jobs"] = args.jobs
    if args.seed is not None:
        config["seed"] = args.seed
    if args.quad_panels is not None:
        config.setdefault("quadrature", {})["panels"] = args.quad_panels
    if args.tol is not None:
        config.setdefault("solver", {})["tol"] = args.tol
    out = os.environ.get("VEXLAB_OUT") or args.out
    return run(config, out)


if __name__ == "__main__":
    sys.exit(main())
