"""Modular, Luxemburg norm and duality estimates in weighted variable-exponent spaces."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ConvergenceError, DivergenceError
from .numerics import (
    TORUS,
    QuadratureConfig,
    QuadRule,
    TrigPolynomial,
    as_function,
    build_rule,
    integrate,
)
from .weights import as_exponent, as_weight, conjugate_exponent, dual_weight

__all__ = [
    "INFINITE",
    "NormResult",
    "LebesgueSpace",
    "modular",
    "luxemburg_norm",
    "gauge",
    "dual_norm_estimate",
]

log = logging.getLogger(__name__)


class _InfiniteModular:
    """Tagged value for an infinite modular; refuses to take part in arithmetic."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE"

    def __float__(self):
        raise TypeError("INFINITE modular has no float value")

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("INFINITE")


INFINITE = _InfiniteModular()


@dataclass(frozen=True)
class NormResult:
    value: float
    tolerance: float
    modular_at_solution: float
    iterations: int

    def __float__(self):
        return self.value

    def to_dict(self):
        return {
            "value": self.value,
            "tolerance": self.tolerance,
            "modular_at_solution": self.modular_at_solution,
            "iterations": self.iterations,
        }


# ===================================================================== discrete core


def _modular_discrete(absv, pv, W, inf_mask, alpha=1.0):
    """sum W |v/alpha|^p on finite-exponent nodes, INFINITE if |v| > alpha on the inf part."""
    if inf_mask is not None and np.any(inf_mask):
        if np.any(absv[inf_mask] > alpha):
            return INFINITE
        fin = ~inf_mask
        absv, pv, W = absv[fin], pv[fin], W[fin]
    pos = absv > 0
    if not np.all(pos):
        absv, pv, W = absv[pos], pv[pos], W[pos]
    if absv.size == 0:
        return 0.0
    with np.errstate(over="ignore"):
        return float(np.sum(W * np.exp(pv * (np.log(absv) - math.log(alpha)))))


def gauge(values, pv, W, inf_mask=None, tol=1e-12, constant_p=None):
    """Luxemburg gauge of discrete data: (alpha, modular at alpha, iterations).

    Data are scaled to max |v| = 1 first.  For variable exponents, Newton steps on
    h(t) = log rho(v / e^t) are safeguarded by a bracket (h' is minus a weighted
    mean of p, so it lies in [-p+, -p-]).  The returned alpha satisfies
    rho(v/alpha) <= 1.
    """
    absv = np.abs(np.asarray(values, dtype=float))
    if not np.all(np.isfinite(absv)):
        raise DivergenceError("function values are not finite on the quadrature nodes")
    if not np.any(absv > 0):
        return 0.0, 0.0, 0
    m = float(absv.max())  # scale out first so tiny or huge data cannot under/overflow
    if constant_p is not None and (inf_mask is None or not np.any(inf_mask)):
        alpha = m * _modular_discrete(absv / m, pv, W, None) ** (1.0 / constant_p)
        it = 0
        while _modular_discrete(absv, pv, W, None, alpha) > 1.0:
            alpha = np.nextafter(alpha, math.inf)
            it += 1
        return float(alpha), _modular_discrete(absv, pv, W, None, alpha), it
    u = absv / m
    a_min = 0.0  # |v|/alpha <= 1 is forced on infinite-exponent nodes
    fin = np.ones(u.shape, dtype=bool)
    if inf_mask is not None and np.any(inf_mask):
        a_min = float(u[inf_mask].max())
        fin = ~inf_mask
    keep = fin & (u > 0) & (W > 0)
    if not np.any(keep):
        return a_min * m, _modular_discrete(absv, pv, W, inf_mask, a_min * m), 0
    lw = np.log(W[keep]) + pv[keep] * np.log(u[keep])
    pk = pv[keep]

    def h(t):
        z = lw - pk * t
        zmax = z.max()
        e = np.exp(z - zmax)
        se = e.sum()
        return zmax + math.log(se), -float(pk @ e) / se

    t_min = math.log(a_min) if a_min > 0 else -math.inf
    h0, d0 = h(0.0)
    p_lo, p_hi = float(pk.min()), float(pk.max())
    # h is decreasing with slope in [-p_hi, -p_lo]
    if h0 > 0:
        lo, hi = h0 / p_hi, h0 / p_lo
    else:
        lo, hi = h0 / p_lo, h0 / p_hi
    lo = max(lo, t_min)
    if t_min > -math.inf and h(t_min)[0] <= 0:
        t = t_min
        it = 0
    else:
        t, (ht, dt) = 0.0, (h0, d0)
        if not lo <= t <= hi:
            t = 0.5 * (lo + hi)
            ht, dt = h(t)
        it = 0
        while True:
            it += 1
            if ht > 0:
                lo = max(lo, t)
            else:
                hi = min(hi, t)
            step = -ht / dt if dt < 0 else math.inf
            nt = t + step
            if not lo < nt < hi:
                nt = 0.5 * (lo + hi)
            if abs(nt - t) <= 0.25 * tol or hi - lo <= 0.25 * tol or it > 200:
                t = nt
                break
            t = nt
            ht, dt = h(t)
    alpha = math.exp(t) * m
    rho = _modular_discrete(absv, pv, W, inf_mask, alpha)
    while rho > 1.0:
        alpha *= 1.0 + 0.25 * tol
        rho = _modular_discrete(absv, pv, W, inf_mask, alpha)
        it += 1
    return float(alpha), rho, it


def gauge_gradient(values, pv, W, alpha):
    """d alpha / d values for the implicit equation rho(v/alpha) = 1 (finite exponents)."""
    v = np.asarray(values, dtype=float)
    if alpha == 0:
        return np.zeros_like(v)
    t = np.abs(v) / alpha
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        tp = np.where(t > 0, np.exp(pv * np.log(np.where(t > 0, t, 1.0))), 0.0)
        a = np.where(t > 0, W * pv * tp / np.where(t > 0, t, 1.0), 0.0) * np.sign(v)
    b = float(np.sum(W * pv * tp))
    return a / b


# ===================================================================== spaces


class LebesgueSpace:
    """Discretized L^{p(.)}_omega(B): a fixed quadrature rule with cached p and omega values.

    Singular weights get graded Gauss-Legendre panels; otherwise the whole torus
    uses the periodic trapezoid rule with ``nodes`` points.
    """

    def __init__(self, p=2.0, weight=None, B=TORUS, nodes: int = 1024, order: int = 8,
                 extra_singular=(), tol: float = 1e-12):
        self.p = as_exponent(p)
        self.weight = as_weight(weight)
        self.B = (float(B[0]), float(B[1]))
        self.resolution = int(nodes)
        self.order = order
        self.tol = tol
        sing = tuple(self.weight.singular_points) + tuple(extra_singular)
        self.singular = tuple(sorted(set(sing)))
        rule_kind = "gauss" if self.singular else "trapezoid"
        panels = max(8, self.resolution // order) if self.singular else self.resolution
        self.rule: QuadRule = build_rule(self.B, panels, order, rule_kind, self.singular)
        self.trapezoid = rule_kind == "trapezoid" and self.B == TORUS
        x = self.rule.nodes
        self.nodes = x
        self.pv = self.p(x)
        self.inf_mask = np.isinf(self.pv)
        if not np.any(self.inf_mask):
            self.inf_mask = None
        self.wv = np.asarray(self.weight(x), dtype=float)
        self.W = self.rule.weights * self.wv
        self.constant_p = self.p.constant if self.p.is_constant else None

    def __repr__(self):
        return f"LebesgueSpace(p={self.p.name}, weight={self.weight.name}, nodes={self.nodes.size})"

    def refined(self, factor: int = 2) -> "LebesgueSpace":
        return LebesgueSpace(self.p, self.weight, self.B, self.resolution * factor, self.order,
                             tuple(set(self.singular) - set(self.weight.singular_points)), self.tol)

    def values(self, f) -> np.ndarray:
        if isinstance(f, np.ndarray):
            return f
        f = as_function(f)
        if self.trapezoid and isinstance(f, TrigPolynomial):
            return f.grid_values(self.nodes.size)
        return np.asarray(f(self.nodes), dtype=float)

    def modular(self, f, alpha: float = 1.0):
        v = self.values(f)
        return _modular_discrete(np.abs(v), self.pv, self.W, self.inf_mask, alpha)

    def norm_result(self, f, tol=None) -> NormResult:
        v = self.values(f)
        tol = self.tol if tol is None else tol
        a, r, it = gauge(v, self.pv, self.W, self.inf_mask, tol, self.constant_p)
        return NormResult(a, tol, r if r is not INFINITE else math.inf, it)

    def norm(self, f, tol=None) -> float:
        return self.norm_result(f, tol).value

    def norm_and_gradient(self, v):
        """Norm of nodal values and its gradient with respect to them."""
        a, _, _ = gauge(v, self.pv, self.W, self.inf_mask, self.tol, self.constant_p)
        if self.constant_p is not None and a > 0:
            p = self.constant_p
            t = np.abs(v) / a
            g = self.W * t ** (p - 1.0) * np.sign(v)  # rho(v/a) = 1 at the solution
            return a, g / np.sum(self.W * t**p)
        return a, gauge_gradient(v, self.pv, self.W, a)

    def integral(self, f):
        return self.rule.integrate(self.values(f))


# ===================================================================== adaptive entry points


def _rule_for(f, w, B, panels, quad):
    sing = tuple(getattr(f, "singular_points", ())) + tuple(w.singular_points)
    brk = tuple(getattr(f, "breakpoints", ()))
    kind = quad.rule if not sing else "gauss"
    return build_rule(B, panels, quad.order, kind, sing, brk, quad.grading_levels)


def modular(f, p, w=None, B=TORUS, quad: QuadratureConfig | None = None):
    """rho(f) = int_B |f|^{p(x)} omega dx; on inf-exponent regions 0 if |f| <= 1 there, else INFINITE."""
    f = as_function(f)
    p = as_exponent(p)
    w = as_weight(w)
    quad = quad or QuadratureConfig()
    prev = None
    for level in range(quad.max_refinements + 1):
        rule = _rule_for(f, w, B, quad.panels * quad.refinement**level, quad)
        x = rule.nodes
        pv = p(x)
        inf = np.isinf(pv)
        val = _modular_discrete(np.abs(f(x)), pv, rule.weights * w(x), inf if inf.any() else None)
        if val is INFINITE:
            return INFINITE
        if prev is not None and abs(val - prev) <= quad.tol * max(abs(val), 1e-300):
            return val
        prev = val
    raise ConvergenceError("modular did not converge", (prev, val))


def luxemburg_norm(f, p, w=None, B=TORUS, quad: QuadratureConfig | None = None,
                   tol: float = 1e-10) -> NormResult:
    """inf{alpha > 0 : rho(f/alpha) <= 1} with quadrature refined until the norm settles."""
    if not (0 < tol <= 1e-3):
        raise ConfigurationError("tol must lie in (0, 1e-3]", "/solver/tol")
    f = as_function(f)
    p = as_exponent(p)
    w = as_weight(w)
    quad = quad or QuadratureConfig()
    cp = p.constant if p.is_constant else None
    prev = None
    total_it = 0
    for level in range(quad.max_refinements + 1):
        rule = _rule_for(f, w, B, quad.panels * quad.refinement**level, quad)
        x = rule.nodes
        pv = p(x)
        inf = np.isinf(pv)
        a, r, it = gauge(f(x), pv, rule.weights * w(x), inf if inf.any() else None, tol, cp)
        total_it += it
        if prev is not None:
            err = abs(a - prev)
            if err <= max(quad.tol, tol) * max(a, 1e-300) or a == prev:
                rr = r if r is not INFINITE else math.inf
                return NormResult(a, max(tol, err / max(a, 1e-300)), rr, it)
        prev = a
    raise ConvergenceError("norm did not settle under quadrature refinement", (prev, a))


def dual_norm_estimate(f, p, w=None, testers=(), quad: QuadratureConfig | None = None) -> float:
    """max over testers g of int |f||g| / ||g||_{p', omega'}."""
    f = as_function(f)
    p = as_exponent(p)
    w = as_weight(w)
    quad = quad or QuadratureConfig(rule="gauss", tol=1e-9)
    pc = conjugate_exponent(p)
    wd = dual_weight(w, p)
    best = 0.0
    for g in testers:
        g = as_function(g)
        n = luxemburg_norm(g, pc, wd, quad=quad, tol=1e-10).value
        if n == 0:
            log.warning("tester %s has zero dual norm; skipped", g.name)
            continue
        sing = tuple(f.singular_points) + tuple(g.singular_points) + tuple(w.singular_points)
        pair = integrate(lambda x: np.abs(f(x) * g(x)), quad=quad, singular_points=sing)
        best = max(best, pair / n)
    return best
