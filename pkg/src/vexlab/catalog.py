"""Named test functions, exponents and weights addressable by string IDs.

IDs look like ``exp_cos``, ``lacunary(sigma=0.5)``, ``p=2+cos(x)`` or
``power_weight(gamma=0.5)``; anything else is parsed as an expression.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .errors import ConfigurationError, ExprSyntaxError
from .numerics import PeriodicFunction, TrigPolynomial, to_trig
from .weights import ExponentFunction, Weight

__all__ = [
    "FUNCTIONS",
    "EXPONENTS",
    "WEIGHTS",
    "SMOOTH_FUNCTIONS",
    "resolve_function",
    "resolve_exponent",
    "resolve_weight",
    "lacunary",
    "compatible_pairs",
    "is_compatible",
    "listing",
]

SMOOTH_FUNCTIONS = ("exp_cos", "trig_mix", "smooth_abs")
FUNCTIONS = SMOOTH_FUNCTIONS + ("lacunary(sigma=0.5)", "lacunary(sigma=1)")
EXPONENTS = ("p=2", "p=2+cos(x)", "p=1.2+0.5*abs(sin(x))")
WEIGHTS = ("1", "power_weight(gamma=0.5)", "power_weight(gamma=-0.3)")

SMOOTH_ABS_EPS = 0.05
LACUNARY_TERMS = 12

_EXPRESSIONS = {
    "exp_cos": "exp(cos(x))",
    "trig_mix": "cos(3*x) + 0.5*sin(7*x)",
    "smooth_abs": f"(sin(x/2)^2 + {SMOOTH_ABS_EPS!r}^2)^0.75",
}

_CALL = re.compile(r"^\s*([A-Za-z_]\w*)\s*\((.*)\)\s*$")


_CONSTRUCTORS = ("lacunary", "trig_random", "power_weight")


def _parse_call(text):
    m = _CALL.match(text)
    if not m or m.group(1) not in _CONSTRUCTORS:
        return None, {}
    args = {}
    body = m.group(2).strip()
    if body:
        for part in body.split(","):
            if "=" not in part:
                raise ConfigurationError(f"bad catalog argument {part!r} in {text!r}")
            k, v = part.split("=", 1)
            try:
                args[k.strip()] = float(v)
            except ValueError:
                raise ConfigurationError(f"non-numeric catalog argument {part!r}") from None
    return m.group(1), args


def lacunary(sigma: float, terms: int = LACUNARY_TERMS) -> TrigPolynomial:
    """f_sigma(x) = sum_{j=0}^{J} 2^{-sigma j} cos(2^j x)."""
    c = np.zeros(2**terms + 1, dtype=complex)
    for j in range(terms + 1):
        c[2**j] = 0.5 * 2.0 ** (-sigma * j)
    return TrigPolynomial(c, name=f"lacunary(sigma={sigma!r})")


_cache = {}


def resolve_function(fid) -> PeriodicFunction:
    """Catalog function by ID, or an expression.  Smooth entries come back as trig polynomials."""
    if isinstance(fid, PeriodicFunction):
        return fid
    key = str(fid).strip()
    if key in _cache:
        return _cache[key]
    if key.startswith("f="):
        key = key[2:]
    if key in _EXPRESSIONS:
        out = to_trig(PeriodicFunction.from_expr(_EXPRESSIONS[key]))
        out.name = key
    else:
        name, args = _parse_call(key)
        if name == "lacunary":
            out = lacunary(args.get("sigma", 1.0), int(args.get("J", LACUNARY_TERMS)))
        elif name == "trig_random":
            from .lab import random_trig

            out = random_trig(int(args.get("n", 8)), int(args.get("seed", 0)))
        else:
            out = PeriodicFunction.from_expr(key)
    _cache[str(fid).strip()] = out
    return out


def resolve_exponent(pid) -> ExponentFunction:
    if isinstance(pid, ExponentFunction):
        return pid
    if isinstance(pid, (int, float)):
        return ExponentFunction(float(pid))
    key = str(pid).strip()
    if key.startswith("p="):
        key = key[2:]
    e = ExponentFunction(key, name=f"p={key}")
    if not e.in_class_P:
        raise ConfigurationError(f"exponent {pid!r} leaves [1, inf)")
    return e


def resolve_weight(wid) -> Weight:
    if isinstance(wid, Weight):
        return wid
    if wid is None:
        return Weight(1.0, name="1")
    if isinstance(wid, (int, float)):
        return Weight(float(wid))
    key = str(wid).strip()
    name, args = _parse_call(key)
    if name == "power_weight":
        return Weight.power(args.get("gamma", 0.0), args.get("center", 0.0))
    if key.startswith("w="):
        key = key[2:]
    try:
        return Weight(key, name=key)
    except ExprSyntaxError:
        raise
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def is_compatible(p, w) -> bool:
    """Whether a catalog power weight lies in the variable Muckenhoupt class for p.

    |sin(x/2)|^g belongs to it exactly when -1 < g < p(0) - 1.
    """
    p = resolve_exponent(p)
    w = resolve_weight(w)
    if w.gamma is None:
        return True
    return -1.0 < w.gamma < float(p(np.array([0.0]))[0]) - 1.0


def compatible_pairs(exponents=EXPONENTS, weights=WEIGHTS):
    return [(p, w) for p in exponents for w in weights if is_compatible(p, w)]


def listing() -> dict:
    return {
        "functions": list(FUNCTIONS),
        "exponents": list(EXPONENTS),
        "weights": list(WEIGHTS),
        "pairs": [list(pw) for pw in compatible_pairs()],
        "kernels": ["bump", "poisson", "gauss"],
    }
