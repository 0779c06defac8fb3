"""Variable exponents, weights, interval families and Muckenhoupt-type constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize_scalar

from . import exprdsl
from .errors import CapabilityError, ConfigurationError
from .numerics import (
    TORUS,
    TWO_PI,
    QuadratureConfig,
    as_function,
    gauss_legendre,
    integrate,
    periodic_grid,
    PeriodicFunction,
)

__all__ = [
    "ExponentFunction",
    "Weight",
    "IntervalFamily",
    "SamplingPlan",
    "LogHolderEstimate",
    "as_exponent",
    "as_weight",
    "log_holder_constant",
    "log_holder_profile",
    "conjugate_exponent",
    "dual_weight",
    "harmonic_mean_exponent",
    "muckenhoupt_constant",
    "classical_ap_constant",
    "MuckenhouptResult",
    "classify_weight",
    "Classification",
]


# ===================================================================== exponents


class ExponentFunction:
    """Exponent p(.) on the torus; values may be ``inf`` where flagged (conjugates of p=1)."""

    def __init__(self, source, name=None, grid_size=4096):
        self.constant = None
        self.expr = None
        if isinstance(source, ExponentFunction):
            source = source._func
        if isinstance(source, (int, float, np.floating)):
            self.constant = float(source)
            self._func = lambda x, c=self.constant: np.full(np.shape(x), c)
        elif isinstance(source, (str, exprdsl.Expr)):
            e = exprdsl.parse(source) if isinstance(source, str) else source
            if not exprdsl.depends_on_x(e):
                self.constant = exprdsl.evaluate(e, 0.0)
            self.expr = e
            self._func = lambda x, _e=e: exprdsl.evaluate_array(_e, x)
        elif callable(source):
            self._func = source
        else:
            raise TypeError(f"cannot build an exponent from {source!r}")
        if name is None:
            if self.constant is not None:
                name = repr(self.constant)
            elif self.expr is not None:
                name = exprdsl.to_string(self.expr)
            else:
                name = "<callable>"
        self.name = name
        self.grid_size = grid_size
        if self.constant is not None and not (self.constant >= 1 or math.isinf(self.constant)):
            raise ConfigurationError(f"exponent must be >= 1, got {self.constant}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self._func(x), dtype=float) * np.ones(x.shape)

    def __repr__(self):
        return f"ExponentFunction({self.name})"

    @property
    def is_constant(self):
        return self.constant is not None

    def _extreme(self, sign):
        if self.constant is not None:
            return self.constant
        x = periodic_grid(self.grid_size)
        v = sign * self(x)
        i = int(np.argmin(v))
        best = v[i]
        h = TWO_PI / self.grid_size
        res = minimize_scalar(lambda t: sign * float(self(np.array([t]))[0]),
                              bounds=(x[i] - h, x[i] + h), method="bounded",
                              options={"xatol": 1e-12})
        if res.success and res.fun < best:
            best = res.fun
        return float(sign * best)

    @cached_property
    def p_minus(self):
        return self._extreme(1.0)

    @cached_property
    def p_plus(self):
        return self._extreme(-1.0)

    @property
    def in_class_P(self):
        return self.p_minus >= 1.0 and math.isfinite(self.p_plus)

    def reciprocal(self):
        return lambda x: 1.0 / self(x)


def as_exponent(p) -> ExponentFunction:
    if isinstance(p, ExponentFunction):
        return p
    if isinstance(p, str) and p.startswith("p="):
        p = p[2:]
    return ExponentFunction(p)


@dataclass(frozen=True)
class SamplingPlan:
    """Random point pairs with log-uniform separations plus pairs focused on steep spots."""

    n_pairs: int = 10_000
    min_sep: float = 1e-6
    max_sep: float = TWO_PI
    focus: int = 16
    seed: int = 0

    def refined(self, level: int) -> "SamplingPlan":
        return SamplingPlan(self.n_pairs * 2**level, self.min_sep * 1e-4**level, self.max_sep,
                            self.focus, self.seed + level)

    def pairs(self, func):
        rng = np.random.default_rng(self.seed)
        lo, hi = math.log(self.min_sep), math.log(min(self.max_sep, TWO_PI))
        d = np.exp(rng.uniform(lo, hi, self.n_pairs))
        x = -math.pi + rng.uniform(0.0, 1.0, self.n_pairs) * (TWO_PI - d)
        xs, ys = [x], [x + d]
        grid = periodic_grid(4096)
        g = func(grid)
        jump = np.abs(np.diff(np.append(g, g[0])))
        jump[~np.isfinite(jump)] = 0.0
        h = TWO_PI / grid.size
        a = grid[np.argsort(jump)[::-1][: self.focus]]
        b = a + h
        # home in on the steepest point of each candidate cell
        for _ in range(60):
            m = 0.5 * (a + b)
            fa, fm, fb = func(a), func(m), func(b)
            left = np.abs(fm - fa) >= np.abs(fb - fm)
            a, b = np.where(left, a, m), np.where(left, m, b)
        centers = 0.5 * (a + b)
        seps = np.geomspace(self.min_sep, 1e-1, 24)
        for c in centers:
            a = np.clip(c - seps / 2, -math.pi, math.pi)
            b = np.clip(c + seps / 2, -math.pi, math.pi)
            xs.append(a)
            ys.append(b)
        x = np.concatenate(xs)
        y = np.concatenate(ys)
        ok = y > x
        return x[ok], y[ok]


@dataclass(frozen=True)
class LogHolderEstimate:
    value: float
    value_reciprocal: float
    pairs: int
    min_sep: float


def _log_holder_stat(func, x, y):
    d = y - x
    w = np.log(math.e + 1.0 / d)
    return float(np.max(np.abs(func(x) - func(y)) * w))


def log_holder_constant(p, plan: SamplingPlan | None = None) -> LogHolderEstimate:
    """max over sampled pairs of |p(x)-p(y)| ln(e + 1/|x-y|), and the same for 1/p."""
    p = as_exponent(p)
    plan = plan or SamplingPlan()
    if plan.n_pairs < 10_000 or plan.min_sep > 1e-6:
        raise ConfigurationError("sampling plan needs >= 1e4 pairs reaching separation 1e-6")
    if p.is_constant:
        return LogHolderEstimate(0.0, 0.0, plan.n_pairs, plan.min_sep)
    x, y = plan.pairs(p)
    return LogHolderEstimate(_log_holder_stat(p, x, y), _log_holder_stat(p.reciprocal(), x, y),
                             x.size, plan.min_sep)


@dataclass(frozen=True)
class LogHolderProfile:
    estimates: tuple
    growth: float

    @property
    def is_log_holder(self):
        return self.growth < 2.0


def log_holder_profile(p, levels: int = 3, plan: SamplingPlan | None = None) -> LogHolderProfile:
    """Estimates over refining plans; growth >= 2x from first to last flags a non-log-Hoelder exponent."""
    plan = plan or SamplingPlan()
    est = tuple(log_holder_constant(p, plan.refined(k)) for k in range(levels))
    first = max(est[0].value, est[0].value_reciprocal)
    last = max(est[-1].value, est[-1].value_reciprocal)
    growth = last / first if first > 0 else (1.0 if last == 0 else math.inf)
    return LogHolderProfile(est, growth)


def conjugate_exponent(p) -> ExponentFunction:
    """p' = p/(p-1), with value inf where p = 1."""
    p = as_exponent(p)

    def conj(x):
        v = p(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = v / (v - 1.0)
        return np.where(v <= 1.0, np.inf, out)

    if p.is_constant:
        c = p.constant
        return ExponentFunction(math.inf if c <= 1.0 else c / (c - 1.0))
    return ExponentFunction(conj, name=f"conj({p.name})")


# ===================================================================== weights


class Weight:
    """Positive periodic weight, possibly with integrable singularities at declared points.

    ``gamma`` records the power-type exponent at the singular points when known.
    """

    def __init__(self, source, singular_points=(), gamma=None, name=None, check=True):
        if isinstance(source, Weight):
            source = source.function
        if isinstance(source, (int, float, np.floating)):
            c = float(source)
            self.function = as_function(c)
            self.constant = c
        else:
            fn = source if isinstance(source, PeriodicFunction) else None
            if fn is None and isinstance(source, (str, exprdsl.Expr)):
                fn = PeriodicFunction.from_expr(source, singular_points=singular_points)
            elif fn is None and callable(source):
                fn = PeriodicFunction(source, singular_points=singular_points,
                                      smoothness="singular" if singular_points else "smooth")
            elif fn is None:
                raise TypeError(f"cannot build a weight from {source!r}")
            if singular_points and not fn.singular_points:
                fn = PeriodicFunction(fn, singular_points=singular_points, smoothness="singular",
                                      name=fn.name)
            self.function = fn
            self.constant = None
            if fn.expr is not None and not exprdsl.depends_on_x(fn.expr):
                self.constant = exprdsl.evaluate(fn.expr, 0.0)
        self.singular_points = self.function.singular_points
        self.gamma = gamma
        self.name = name or (repr(self.constant) if self.constant is not None else self.function.name)
        if check:
            self._check_positive()

    @classmethod
    def power(cls, gamma, center=0.0):
        """|sin((x - center)/2)|^gamma."""
        gamma = float(gamma)
        if gamma == 0:
            return cls(1.0, name="1")
        c = float(center)
        inner = "x" if c == 0 else f"(x - {c!r})"
        expr = f"abs(sin({inner}/2))^{gamma!r}"
        return cls(expr, singular_points=(c,), gamma=gamma, name=f"power_weight(gamma={gamma!r})")

    def __call__(self, x):
        return self.function(x)

    def __repr__(self):
        return f"Weight({self.name})"

    def _check_positive(self):
        x = periodic_grid(4096) + 0.5 * TWO_PI / 4096
        with np.errstate(all="ignore"):
            v = self(x)
        near = np.zeros(x.shape, dtype=bool)
        for s in self.singular_points:
            near |= np.abs(np.mod(x - s + math.pi, TWO_PI) - math.pi) < 1e-9
        bad = ~(v > 0) & ~near
        if np.any(bad):
            raise ConfigurationError(f"weight {self.name!r} is not positive at x={float(x[bad][0])!r}")

    @property
    def is_constant(self):
        return self.constant is not None

    @cached_property
    def total(self):
        """omega(T) = int_T omega."""
        if self.constant is not None:
            return self.constant * TWO_PI
        return float(integrate(self.function, quad=QuadratureConfig(rule="gauss", tol=1e-9)))

    def measure(self, B):
        if self.constant is not None:
            return self.constant * (B[1] - B[0])
        return float(integrate(self.function, B, QuadratureConfig(rule="gauss", tol=1e-9)))


def as_weight(w) -> Weight:
    if isinstance(w, Weight):
        return w
    if w is None:
        return Weight(1.0)
    if isinstance(w, str):
        from .catalog import resolve_weight

        return resolve_weight(w)
    return Weight(w)


def dual_weight(w, p) -> Weight:
    """omega' = omega^{1 - p'}; evaluating where p = 1 raises :class:`CapabilityError`."""
    w = as_weight(w)
    p = as_exponent(p)
    pc = conjugate_exponent(p)
    if p.is_constant and p.constant <= 1.0:
        raise CapabilityError("dual weight undefined for p = 1")
    if w.is_constant and p.is_constant:
        return Weight(w.constant ** (1.0 - pc.constant))
    if w.is_constant and w.constant == 1.0:
        return Weight(1.0, name="1")

    def dual(x):
        x = np.asarray(x, dtype=float)
        q = pc(x)
        wv = w(x)
        inf = np.isinf(q)
        if np.any(inf):
            # 1^{-inf} is read as 1; any other base has no limit
            bad = inf & (wv != 1.0)
            if np.any(bad):
                xb = np.broadcast_to(x, q.shape)[bad]
                raise CapabilityError(f"dual weight undefined where p(x)=1, e.g. x={float(xb.flat[0])!r}")
            return np.where(inf, 1.0, wv ** (1.0 - np.where(inf, 1.0, q)))
        return wv ** (1.0 - q)

    gamma = None
    if w.gamma is not None and p.is_constant:
        gamma = w.gamma * (1.0 - pc.constant)
    fn = PeriodicFunction(dual, singular_points=w.singular_points,
                          smoothness="singular" if w.singular_points else "smooth",
                          name=f"dual({w.name})")
    return Weight(fn, gamma=gamma, name=f"dual({w.name}, {p.name})", check=False)


def harmonic_mean_exponent(p, B=TORUS, quad: QuadratureConfig | None = None) -> float:
    """p_B = |B| / int_B dx/p(x)."""
    p = as_exponent(p)
    a, b = float(B[0]), float(B[1])
    if not b > a:
        raise ConfigurationError("|B| must be positive")
    if p.is_constant:
        return p.constant
    quad = quad or QuadratureConfig(rule="gauss", tol=1e-12)
    inv = integrate(lambda x: 1.0 / p(x), (a, b), quad)
    return (b - a) / inv


# ===================================================================== families


@dataclass
class IntervalFamily:
    """Finite family of subintervals of T.

    Scans integrate on a uniform cell rule: ``2**level`` cells of T with
    ``order`` Gauss-Legendre nodes each, so every interval is a union of cells.
    """

    intervals: np.ndarray
    rule: str
    level: int
    order: int = 4

    def __post_init__(self):
        iv = np.asarray(self.intervals, dtype=float).reshape(-1, 2)
        if iv.size == 0:
            raise ConfigurationError("interval family is empty")
        if np.any(iv[:, 1] <= iv[:, 0]) or np.any(iv[:, 0] < -math.pi - 1e-12) or np.any(
            iv[:, 1] > math.pi + 1e-12
        ):
            raise ConfigurationError("intervals must have positive length and lie in T")
        self.intervals = iv

    def __len__(self):
        return len(self.intervals)

    @classmethod
    def dyadic(cls, level: int, shifted: bool = True, min_level: int = 0, order: int = 4):
        """Dyadic intervals of T of lengths 2*pi/2^l, l = min_level..level.

        With ``shifted`` the intervals of levels below ``level`` are repeated with
        a half-length offset (those staying inside T), so every family lives on
        the cell grid of its finest level.
        """
        out = []
        for lvl in range(min_level, level + 1):
            m = 2**lvl
            h = TWO_PI / m
            left = -math.pi + h * np.arange(m)
            out.append(np.stack([left, left + h], axis=1))
            if shifted and 1 <= lvl < level:
                left2 = left[:-1] + h / 2
                out.append(np.stack([left2, left2 + h], axis=1))
        return cls(np.concatenate(out), "dyadic", level, order)

    @classmethod
    def sliding(cls, level: int, cells_per_window: int, step_cells: int = 1, order: int = 4):
        """Windows of ``cells_per_window`` cells sliding by ``step_cells`` at the given cell level."""
        m = 2**level
        h = TWO_PI / m
        starts = np.arange(0, m - cells_per_window + 1, step_cells)
        left = -math.pi + h * starts
        return cls(np.stack([left, left + h * cells_per_window], axis=1), "sliding", level, order)

    def cell_rule(self):
        """Nodes/weights of the level cell rule, shaped (cells, order)."""
        m = 2**self.level
        h = TWO_PI / m
        t, w = gauss_legendre(self.order)
        left = -math.pi + h * np.arange(m)
        return left[:, None] + h * t[None, :], np.broadcast_to(h * w, (m, self.order)), h

    def cell_index(self):
        """Start cell and number of cells of every interval on the level grid."""
        m = 2**self.level
        h = TWO_PI / m
        start = np.rint((self.intervals[:, 0] + math.pi) / h).astype(int)
        stop = np.rint((self.intervals[:, 1] + math.pi) / h).astype(int)
        if np.any(np.abs(start * h - math.pi - self.intervals[:, 0]) > 1e-9 * h) or np.any(
            np.abs(stop * h - math.pi - self.intervals[:, 1]) > 1e-9 * h
        ):
            raise ConfigurationError("interval ends must lie on the family cell grid")
        return start, stop - start


@dataclass(frozen=True)
class MuckenhouptResult:
    value: float
    interval: tuple
    per_interval: np.ndarray = field(repr=False)

    def __float__(self):
        return self.value


def _cell_sums(vals_cells, start, count):
    """Sum of per-cell values over each interval via cumulative sums (pairwise within cells)."""
    cum = np.concatenate(([0.0], np.cumsum(vals_cells)))
    return cum[start + count] - cum[start]


def _group_by_count(count):
    groups = {}
    for i, c in enumerate(count):
        groups.setdefault(int(c), []).append(i)
    return {c: np.array(ix) for c, ix in groups.items()}


def _inner_norms(inv_w, q, cw, start, count, tol=1e-10):
    """Luxemburg norm of 1/omega on each interval with exponent q = p'/p (inf allowed).

    ``inv_w``, ``q``, ``cw`` are (cells, order) arrays; intervals sharing a cell
    count are solved together by vectorized bisection.
    """
    out = np.empty(len(start))
    for c, ix in _group_by_count(count).items():
        rows = start[ix][:, None] + np.arange(c)[None, :]
        v = inv_w[rows].reshape(len(ix), -1)
        qq = q[rows].reshape(len(ix), -1)
        ww = cw[rows].reshape(len(ix), -1)
        out[ix] = _batch_gauge(v, qq, ww, tol)
    return out


def _batch_gauge(v, q, w, tol):
    """Row-wise Luxemburg gauge of values v with exponents q (inf = sup part) and quadrature weights w."""
    inf = np.isinf(q)
    sup_part = np.where(inf, v, 0.0).max(axis=1)
    fin = ~inf
    logv = np.log(np.where(fin & (v > 0), v, 1.0))
    qf = np.where(fin, q, 0.0)
    wf = np.where(fin & (v > 0), w, 0.0)

    def rho(alpha):
        la = np.log(alpha)[:, None]
        with np.errstate(over="ignore"):
            return np.sum(wf * np.exp(qf * (logv - la)), axis=1)

    const_rows = np.all(inf | (q == q[:, :1]), axis=1) & np.any(fin, axis=1)
    if np.all(const_rows) and not np.any(inf):
        qq = q[:, 0]
        s = np.sum(wf * np.exp(qf * logv), axis=1)
        return s ** (1.0 / qq)
    hi = np.maximum(np.maximum(1.0, sup_part), 1e-300)
    for _ in range(4000):
        bad = rho(hi) > 1
        if not np.any(bad):
            break
        hi = np.where(bad, hi * 2.0, hi)
    lo = hi.copy()
    for _ in range(4000):
        r = rho(lo)
        good = (r <= 1) & (lo > sup_part) & (lo > 1e-300)
        if not np.any(good):
            break
        lo = np.where(good, lo / 2.0, lo)
    lo = np.maximum(lo, sup_part)
    for _ in range(200):
        if np.all(hi - lo <= tol * hi):
            break
        mid = 0.5 * (lo + hi)
        ok = (rho(mid) <= 1) & (mid >= sup_part)
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return hi


def muckenhoupt_constant(w, p, fam: IntervalFamily, quad: QuadratureConfig | None = None,
                         tol: float = 1e-10) -> MuckenhouptResult:
    """max over B of (omega(B)/|B|^{p_B}) * ||1/omega||_{B, p'/p}."""
    w = as_weight(w)
    p = as_exponent(p)
    nodes, cw, h = fam.cell_rule()
    start, count = fam.cell_index()
    wv = np.asarray(w(nodes), dtype=float)
    pv = p(nodes)
    length = count * h
    omega_B = _cell_sums(np.sum(cw * wv, axis=1), start, count)
    inv_p = _cell_sums(np.sum(cw / pv, axis=1), start, count)
    p_B = length / inv_p
    with np.errstate(divide="ignore"):
        q = np.where(pv <= 1.0, np.inf, 1.0 / (pv - 1.0))
    inner = _inner_norms(1.0 / wv, q, cw, start, count, tol)
    vals = omega_B / length**p_B * inner
    i = int(np.argmax(vals))
    return MuckenhouptResult(float(vals[i]), tuple(fam.intervals[i]), vals)


def classical_ap_constant(w, p: float, fam: IntervalFamily) -> MuckenhouptResult:
    """max over B of (omega(B)/|B|^p) (int_B omega^{-1/(p-1)})^{p-1}; A_1 form for p = 1."""
    w = as_weight(w)
    p = float(p)
    if p < 1:
        raise ConfigurationError("classical A_p needs p >= 1")
    nodes, cw, h = fam.cell_rule()
    start, count = fam.cell_index()
    wv = np.asarray(w(nodes), dtype=float)
    length = count * h
    omega_B = _cell_sums(np.sum(cw * wv, axis=1), start, count)
    if p == 1.0:
        cell_max = np.max(1.0 / wv, axis=1)
        inner = np.array([cell_max[s : s + c].max() for s, c in zip(start, count)])
        vals = omega_B / length * inner
    else:
        dual = _cell_sums(np.sum(cw * wv ** (-1.0 / (p - 1.0)), axis=1), start, count)
        vals = omega_B / length**p * dual ** (p - 1.0)
    i = int(np.argmax(vals))
    return MuckenhouptResult(float(vals[i]), tuple(fam.intervals[i]), vals)


@dataclass(frozen=True)
class Classification:
    verdict: str  # "in", "not-in" or "inconclusive"
    levels: tuple
    estimates: tuple
    growth: float
    last_change: float

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "levels": list(self.levels),
            "estimates": list(self.estimates),
            "growth": self.growth,
            "last_change": self.last_change,
        }


def classify_weight(w, p, levels=(8, 10, 12), order: int = 4) -> Classification:
    """Scan dyadic families at increasing levels.

    "in" when the last two estimates differ by < 25%, "not-in" when the estimate
    grows >= 4x from the first to the last level, otherwise "inconclusive".
    """
    est = tuple(muckenhoupt_constant(w, p, IntervalFamily.dyadic(L, order=order)).value for L in levels)
    growth = est[-1] / est[0]
    change = abs(est[-1] - est[-2]) / est[-2]
    if change < 0.25:
        verdict = "in"
    elif growth >= 4.0:
        verdict = "not-in"
    else:
        verdict = "inconclusive"
    return Classification(verdict, tuple(levels), est, growth, change)
