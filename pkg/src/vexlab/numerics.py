"""Periodic functions, trigonometric polynomials, quadrature and differentiation on T = [-pi, pi]."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import exprdsl
from .errors import CapabilityError, ConfigurationError, ConvergenceError

__all__ = [
    "TWO_PI",
    "TORUS",
    "QuadratureConfig",
    "QuadRule",
    "QuadResult",
    "PeriodicFunction",
    "TrigPolynomial",
    "as_function",
    "build_rule",
    "gauss_legendre",
    "graded_reference_rule",
    "integrate",
    "differentiate",
    "to_trig",
    "periodic_grid",
    "wrap",
    "Primitive",
    "Tabulated",
]

TWO_PI = 2.0 * math.pi
TORUS = (-math.pi, math.pi)
_SMOOTHNESS = ("smooth", "piecewise", "singular")


def wrap(x):
    """Map reals into [-pi, pi)."""
    return np.mod(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi


def periodic_grid(n: int) -> np.ndarray:
    """Uniform grid -pi + 2*pi*j/n, j = 0..n-1."""
    return -math.pi + TWO_PI * np.arange(n) / n


def _normalize_points(points):
    out = sorted({float(wrap(p)) for p in points})
    return tuple(out)


# ===================================================================== quadrature


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings for adaptive integration.

    ``rule`` is ``"trapezoid"`` (periodic, used on the whole torus when no split
    points are present) or ``"gauss"`` (composite Gauss-Legendre panels).
    """

    rule: str = "trapezoid"
    panels: int = 64
    refinement: int = 2
    tol: float = 1e-10
    split_singular: bool = True
    order: int = 8
    max_refinements: int = 12
    grading_levels: int = 60

    def __post_init__(self):
        if self.rule not in ("trapezoid", "gauss"):
            raise ConfigurationError(f"unknown quadrature rule {self.rule!r}", "/quadrature/rule")
        if self.panels < 8:
            raise ConfigurationError("panel count must be >= 8", "/quadrature/panels")
        if not (0 < self.tol <= 1e-2):
            raise ConfigurationError("tolerance must lie in (0, 1e-2]", "/quadrature/tol")
        if self.refinement < 2:
            raise ConfigurationError("refinement factor must be >= 2", "/quadrature/refinement")
        if self.order < 2:
            raise ConfigurationError("order must be >= 2", "/quadrature/order")


@dataclass(frozen=True)
class QuadRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values):
        values = np.asarray(values)
        if values.ndim == 1:
            return float(np.sum(self.weights * values))
        w = self.weights.reshape((-1,) + (1,) * (values.ndim - 1))
        return np.sum(w * values, axis=0)

    def __len__(self):
        return self.nodes.size


@dataclass(frozen=True)
class QuadResult:
    value: object
    error: float
    nodes: int
    levels: int


@functools.lru_cache(maxsize=64)
def gauss_legendre(order: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    t, w = np.polynomial.legendre.leggauss(order)
    return (t + 1.0) / 2.0, w / 2.0


@functools.lru_cache(maxsize=64)
def graded_reference_rule(order: int, levels: int = 60, ratio: float = 0.3):
    """Composite rule on [0, 1] with panels shrinking geometrically toward 0."""
    t, w = gauss_legendre(order)
    edges = np.concatenate(([0.0], ratio ** np.arange(levels, -1, -1.0)))
    a, b = edges[:-1], edges[1:]
    nodes = (a[:, None] + (b - a)[:, None] * t[None, :]).ravel()
    weights = ((b - a)[:, None] * w[None, :]).ravel()
    keep = nodes > 0
    return nodes[keep], weights[keep]


def _segment_rule(a, b, panels, order, grade_left, grade_right, levels):
    t, w = gauss_legendre(order)
    panels = max(int(panels), 1)
    if (grade_left or grade_right) and panels < 2 and grade_left and grade_right:
        panels = 2
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1], edges[1:]
    mask = np.ones(panels, dtype=bool)
    parts_n, parts_w = [], []
    if grade_left:
        mask[0] = False
        gt, gw = graded_reference_rule(order, levels)
        width = hi[0] - lo[0]
        parts_n.append(lo[0] + width * gt)
        parts_w.append(width * gw)
    if grade_right:
        mask[-1] = False
        gt, gw = graded_reference_rule(order, levels)
        width = hi[-1] - lo[-1]
        parts_n.append(hi[-1] - width * gt)
        parts_w.append(width * gw)
    lo, hi = lo[mask], hi[mask]
    parts_n.append((lo[:, None] + (hi - lo)[:, None] * t[None, :]).ravel())
    parts_w.append(((hi - lo)[:, None] * w[None, :]).ravel())
    nodes = np.concatenate(parts_n)
    weights = np.concatenate(parts_w)
    # nodes that round onto a singular endpoint carry negligible weight
    keep = np.ones(nodes.size, dtype=bool)
    if grade_left:
        keep &= nodes != a
    if grade_right:
        keep &= nodes != b
    return nodes[keep], weights[keep]


def _points_in(points, a, b):
    """Images of torus points (mod 2pi) lying in [a, b]."""
    out = []
    for s in points:
        k0 = math.floor((a - s) / TWO_PI)
        for k in range(k0, k0 + 3 + int((b - a) // TWO_PI)):
            y = s + k * TWO_PI
            if a - 1e-15 <= y <= b + 1e-15:
                out.append(min(max(y, a), b))
    return sorted(set(out))


def build_rule(interval=TORUS, panels=64, order=8, rule="trapezoid", singular=(), breakpoints=(),
               grading_levels=60) -> QuadRule:
    """Quadrature rule on ``interval``.

    Singular points become graded panel ends, breakpoints plain panel ends.  The
    periodic trapezoid rule is used only on the whole torus with no split points.
    """
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise ConfigurationError(f"empty interval [{a}, {b}]")
    sing = _points_in(singular, a, b)
    brk = _points_in(breakpoints, a, b)
    full = abs(a + math.pi) < 1e-15 and abs(b - math.pi) < 1e-15
    if rule == "trapezoid" and full and not sing and not brk:
        n = 1 << max(3, math.ceil(math.log2(max(panels, 8))))
        x = periodic_grid(n)
        return QuadRule(x, np.full(n, TWO_PI / n))
    cuts = sorted(set([a, b] + sing + brk))
    sing_set = set(sing)
    nodes, weights = [], []
    total = b - a
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 0:
            continue
        p = max(1, round(panels * (hi - lo) / total))
        gl, gr = lo in sing_set, hi in sing_set
        if gl and gr:
            p = max(p, 2)
        n_, w_ = _segment_rule(lo, hi, p, order, gl, gr, grading_levels)
        nodes.append(n_)
        weights.append(w_)
    return QuadRule(np.concatenate(nodes), np.concatenate(weights))


def _zeros_on_torus(e, n=4096):
    """Sign changes and touch-downs of an expression's values on T, refined by bisection."""
    x = np.linspace(-math.pi, math.pi, n + 1)
    with np.errstate(all="ignore"):
        try:
            v = exprdsl.evaluate_array(e, x)
        except Exception:
            return ()
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        return ()
    scale = float(np.max(np.abs(v))) or 1.0
    out = []
    for i in np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]:
        a, b = x[i], x[i + 1]
        fa = v[i]
        for _ in range(60):
            m = 0.5 * (a + b)
            fm = float(exprdsl.evaluate_array(e, np.array([m]))[0])
            if np.sign(fm) == np.sign(fa):
                a, fa = m, fm
            else:
                b = m
        out.append(0.5 * (a + b))
    av = np.abs(v)
    # exact zeros on the grid and tangential minima (sin(x)^2-like)
    for i in range(1, n):
        if av[i] <= 1e-12 * scale and av[i] <= av[i - 1] and av[i] <= av[i + 1]:
            out.append(x[i])
    if av[0] <= 1e-12 * scale:
        out.append(-math.pi)
    pts = sorted(float(wrap(np.array([t]))[0]) for t in out)
    merged = []
    for t in pts:
        if not merged or t - merged[-1] > 1e-9:
            merged.append(t)
    return tuple(merged)


def _expr_special_points(e):
    """(singular points, breakpoints) implied by non-smooth operations in an expression tree."""
    sing, brk = set(), set()

    def visit(node):
        for a in node.args:
            visit(a)
        if node.kind == "call" and node.value == "abs":
            brk.update(_zeros_on_torus(node.args[0]))
        elif node.kind == "call" and node.value in ("min", "max"):
            brk.update(_zeros_on_torus(exprdsl.Expr("bin", "-", node.args)))
        elif node.kind == "call" and node.value in ("sqrt", "log"):
            sing.update(_zeros_on_torus(node.args[0]))
        elif (node.kind == "call" and node.value == "pow") or (node.kind == "bin" and node.value == "^"):
            base, ex = node.args
            if not (ex.kind == "num" and float(ex.value).is_integer() and ex.value >= 0):
                sing.update(_zeros_on_torus(base))

    visit(e)
    brk -= sing
    return tuple(sorted(sing)), tuple(sorted(brk))


def _special_points(f):
    return (tuple(getattr(f, "singular_points", ()) or ()), tuple(getattr(f, "breakpoints", ()) or ()))


def integrate(f, B=TORUS, quad: QuadratureConfig | None = None, *, full_output=False,
              singular_points=None, breakpoints=None):
    """Integrate ``f`` over ``B`` with refinement until successive estimates agree.

    ``f`` may be any vectorized callable; :class:`PeriodicFunction` instances supply
    their own singular points and breakpoints.  Vector-valued integrands (extra
    trailing axes) are supported.  Convergence is measured relative to the
    integral of ``|f|``.
    """
    quad = quad or QuadratureConfig()
    sing, brk = _special_points(f)
    if singular_points is not None:
        sing = tuple(singular_points)
    if breakpoints is not None:
        brk = tuple(breakpoints)
    a, b = float(B[0]), float(B[1])
    if a < -math.pi - 1e-12 or b > math.pi + 1e-12:
        raise ConfigurationError(f"interval [{a}, {b}] is not inside T")
    if sing and not quad.split_singular and _points_in(sing, a, b):
        raise ConfigurationError("singular points inside B require split_singular=True")
    prev = None
    history = []
    for level in range(quad.max_refinements + 1):
        panels = quad.panels * quad.refinement ** level
        rule = build_rule((a, b), panels, quad.order, quad.rule, sing, brk, quad.grading_levels)
        vals = np.asarray(f(rule.nodes))
        val = rule.integrate(vals)
        scale = rule.integrate(np.abs(vals))
        history.append(val)
        if prev is not None:
            err = float(np.max(np.abs(np.asarray(val) - np.asarray(prev))))
            if err <= quad.tol * max(float(np.max(scale)), 1e-300):
                if full_output:
                    return QuadResult(val, err, len(rule), level)
                return val
        prev = val
    raise ConvergenceError(
        f"quadrature did not reach tol={quad.tol} after {quad.max_refinements} refinements",
        history[-2:],
    )


# ===================================================================== functions


class PeriodicFunction:
    """A 2*pi-periodic real function.

    Sources: an expression tree (``expr``), samples on :func:`periodic_grid`
    (``samples``) or an arbitrary vectorized callable.  ``smoothness`` is one of
    ``smooth``, ``piecewise`` or ``singular``; singular points are where the
    function may blow up or lose integrability, breakpoints where it has kinks
    or jumps.
    """

    def __init__(self, func, *, smoothness="smooth", singular_points=(), breakpoints=(),
                 derivative=None, expr=None, samples=None, name=None):
        if smoothness not in _SMOOTHNESS:
            raise ConfigurationError(f"unknown smoothness tag {smoothness!r}")
        self._func = func
        self.smoothness = smoothness
        self.singular_points = _normalize_points(singular_points)
        self.breakpoints = _normalize_points(breakpoints)
        if self.singular_points and smoothness != "singular":
            self.smoothness = "singular"
        self._derivative = derivative
        self.expr = expr
        self.samples = samples
        self.name = name
        self._primitive = None

    # ---- constructors
    @classmethod
    def from_expr(cls, source, *, derivative=None, smoothness=None, singular_points=(),
                  breakpoints=(), name=None, check_periodic=True):
        """Function given by an expression string or :class:`~vexlab.exprdsl.Expr`."""
        e = exprdsl.parse(source) if isinstance(source, str) else source
        if smoothness is None:
            if not singular_points and not breakpoints:
                singular_points, breakpoints = _expr_special_points(e)
            smoothness = "singular" if singular_points else ("piecewise" if breakpoints else "smooth")
        if derivative is not None and not isinstance(derivative, PeriodicFunction):
            derivative = cls.from_expr(derivative, check_periodic=False)
        f = cls(lambda x, _e=e: exprdsl.evaluate_array(_e, x), smoothness=smoothness,
                singular_points=singular_points, breakpoints=breakpoints,
                derivative=derivative, expr=e, name=name or exprdsl.to_string(e))
        if check_periodic:
            f._check_periodic()
        return f

    @classmethod
    def from_samples(cls, values, smoothness="smooth", name=None):
        """Function sampled on ``periodic_grid(len(values))``.

        Smooth samples are interpolated trigonometrically, others linearly.
        """
        v = np.asarray(values, dtype=float)
        n = v.size
        if v.ndim != 1 or n < 16 or n & (n - 1):
            raise ConfigurationError("sample vectors need power-of-two length >= 16")
        if smoothness == "smooth":
            return TrigPolynomial.from_samples(v)
        grid = periodic_grid(n)

        def interp(x):
            x = np.asarray(x, dtype=float)
            return np.interp(wrap(x).ravel(), grid, v, period=TWO_PI).reshape(x.shape)

        return cls(interp, smoothness="piecewise", samples=v, name=name,
                   breakpoints=())

    @classmethod
    def constant(cls, c):
        return TrigPolynomial([float(c)])

    def _check_periodic(self):
        x = np.linspace(-math.pi, math.pi, 17)[:-1] + 0.123
        a, b = self(x), self(x + TWO_PI)
        scale = max(1.0, float(np.max(np.abs(a))))
        if not np.all(np.abs(a - b) <= 1e-12 * scale * 10):
            raise ConfigurationError(f"function {self.name!r} is not 2*pi-periodic")

    # ---- evaluation
    def __call__(self, x):
        if self.samples is not None:
            return self._func(x)
        return np.asarray(self._func(np.asarray(x, dtype=float)), dtype=float)

    def __repr__(self):
        return f"{type(self).__name__}({self.name or '<callable>'}, {self.smoothness})"

    # ---- derivative
    @property
    def has_derivative(self):
        if self._derivative is not None:
            return True
        return self.expr is not None and self.smoothness != "singular"

    def derivative(self):
        """First derivative as a :class:`PeriodicFunction`."""
        if self._derivative is not None:
            return self._derivative
        if self.smoothness == "singular":
            raise CapabilityError(f"cannot differentiate singular function {self.name!r}")
        if self.expr is not None:
            d = exprdsl.diff(self.expr)
            self._derivative = PeriodicFunction.from_expr(d, smoothness=self.smoothness,
                                                          breakpoints=self.breakpoints,
                                                          check_periodic=False)
            return self._derivative
        if self.smoothness == "smooth":
            return to_trig(self).derivative()
        raise CapabilityError(f"no derivative available for {self.name!r}")

    # ---- arithmetic
    def _combine(self, other, op, name):
        if isinstance(other, PeriodicFunction):
            g = other
            tags = max(_SMOOTHNESS.index(self.smoothness), _SMOOTHNESS.index(g.smoothness))
            d = None
            if op in ("+", "-") and self.has_derivative and g.has_derivative:
                d = _LazyDerivative(self, g, op)
            return PeriodicFunction(
                lambda x: _apply(op, self(x), g(x)), smoothness=_SMOOTHNESS[tags],
                singular_points=self.singular_points + g.singular_points,
                breakpoints=self.breakpoints + g.breakpoints, derivative=d, name=name)
        c = float(other)
        d = None
        if op == "*" and self.has_derivative:
            d = _LazyScaled(self, c)
        return PeriodicFunction(lambda x: _apply(op, self(x), c), smoothness=self.smoothness,
                                singular_points=self.singular_points,
                                breakpoints=self.breakpoints, derivative=d, name=name)

    def __add__(self, other):
        if not isinstance(other, PeriodicFunction):
            other = TrigPolynomial([float(other)])
        return self._combine(other, "+", f"({self.name} + {other.name})")

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, PeriodicFunction):
            other = TrigPolynomial([float(other)])
        return self._combine(other, "-", f"({self.name} - {other.name})")

    def __mul__(self, other):
        if isinstance(other, PeriodicFunction):
            return self._combine(other, "*", f"({self.name} * {other.name})")
        return self._combine(other, "*", f"({other!r} * {self.name})")

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def primitive(self):
        if self._primitive is None:
            self._primitive = Primitive(self)
        return self._primitive


def _apply(op, a, b):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    return a * b


class _LazyDerivative(PeriodicFunction):
    def __init__(self, f, g, op):
        self._parts = (f, g, op)
        super().__init__(self._eval, smoothness="smooth")

    def _resolved(self):
        f, g, op = self._parts
        return f.derivative(), g.derivative(), op

    def _eval(self, x):
        df, dg, op = self._resolved()
        return _apply(op, df(x), dg(x))

    def derivative(self):
        df, dg, op = self._resolved()
        return df._combine(dg, op, None)

    @property
    def has_derivative(self):
        return True


class _LazyScaled(PeriodicFunction):
    def __init__(self, f, c):
        self._parts = (f, c)
        super().__init__(self._eval, smoothness="smooth")

    def _eval(self, x):
        f, c = self._parts
        return c * f.derivative()(x)

    def derivative(self):
        f, c = self._parts
        return f.derivative().derivative() * c

    @property
    def has_derivative(self):
        return True


class TrigPolynomial(PeriodicFunction):
    """Real trigonometric polynomial sum_{|k|<=n} c_k e^{ikx} with c_{-k} = conj(c_k).

    Stored as the complex coefficients ``c[0..n]``.  In the real form
    a_0/2 + sum a_k cos kx + b_k sin kx one has a_k = 2 Re c_k, b_k = -2 Im c_k.
    """

    def __init__(self, coeffs, name=None):
        c = np.array(coeffs, dtype=complex).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        c[0] = c[0].real
        self.c = c
        self.c.setflags(write=False)
        super().__init__(self._eval, smoothness="smooth", name=name or f"trig[{c.size - 1}]")

    # ---- construction
    @classmethod
    def from_real(cls, a, b=()):
        """From real coefficients a_0..a_n and b_1..b_n (a_0 enters halved)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        n = max(a.size - 1, b.size)
        c = np.zeros(n + 1, dtype=complex)
        c[: a.size] += a / 2.0
        c[0] = a[0] / 2.0 if a.size else 0.0
        c[1 : b.size + 1] += -0.5j * b
        return cls(c)

    @classmethod
    def from_vector(cls, v):
        """From the flat vector (a_0, a_1, b_1, ..., a_n, b_n)."""
        v = np.asarray(v, dtype=float)
        return cls.from_real(np.concatenate(([v[0]], v[1::2])), v[2::2])

    @classmethod
    def from_samples(cls, values):
        v = np.asarray(values, dtype=float)
        n = v.size
        X = np.fft.rfft(v) / n
        k = np.arange(X.size)
        c = X * np.where(k % 2 == 0, 1.0, -1.0)  # grid starts at -pi
        if n % 2 == 0:
            c[-1] = c[-1].real / 2.0
        return cls(c)

    @classmethod
    def monomial(cls, k, kind="cos", amplitude=1.0):
        c = np.zeros(abs(k) + 1, dtype=complex)
        if k == 0:
            c[0] = amplitude
        elif kind == "cos":
            c[k] = amplitude / 2
        else:
            c[k] = -0.5j * amplitude
        return cls(c)

    # ---- views
    @property
    def n(self):
        return self.c.size - 1

    @property
    def degree(self):
        nz = np.nonzero(self.c)[0]
        return int(nz[-1]) if nz.size else 0

    @property
    def a(self):
        return 2.0 * self.c.real

    @property
    def b(self):
        return -2.0 * self.c.imag[1:]

    def to_vector(self, n=None):
        """Flat coefficient vector (a_0, a_1, b_1, ..., a_n, b_n)."""
        t = self.padded(self.n if n is None else n)
        out = np.empty(2 * t.n + 1)
        out[0] = t.a[0]
        out[1::2] = t.a[1:]
        out[2::2] = t.b
        return out

    def complex_coefficients(self, n=None):
        """c_{-n..n} as an array indexed by k + n."""
        t = self.padded(self.n if n is None else n)
        return np.concatenate((np.conj(t.c[:0:-1]), t.c))

    def padded(self, n):
        if n == self.n:
            return self
        c = np.zeros(n + 1, dtype=complex)
        m = min(n, self.n)
        c[: m + 1] = self.c[: m + 1]
        return TrigPolynomial(c)

    truncate = padded

    # ---- evaluation
    def _eval(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        idx = np.nonzero(self.c[1:])[0] + 1
        out = np.full(flat.shape, self.c[0].real)
        if idx.size >= 16 and 4 * idx.size >= self.n:
            # dense: Horner in z = e^{ix} (|z| = 1, so stable)
            z = np.exp(1j * flat)
            acc = np.full(flat.shape, self.c[-1])
            for ck in self.c[-2:0:-1]:
                acc = acc * z + ck
            out += 2.0 * (acc * z).real
        elif idx.size:
            ck = self.c[idx]
            chunk = max(1, (1 << 22) // idx.size)
            for s in range(0, flat.size, chunk):
                xs = flat[s : s + chunk]
                ph = np.exp(1j * np.outer(xs, idx))
                out[s : s + chunk] += 2.0 * (ph @ ck).real
        return out.reshape(x.shape)

    def grid_values(self, n):
        """Values on ``periodic_grid(n)``."""
        if self.n >= n // 2:
            return self._eval(periodic_grid(n))
        X = np.zeros(n // 2 + 1, dtype=complex)
        k = np.arange(self.c.size)
        X[: self.c.size] = n * self.c * np.where(k % 2 == 0, 1.0, -1.0)
        return np.fft.irfft(X, n)

    # ---- algebra
    def apply_multiplier(self, mu):
        """Multiply c_k by mu(k) for k >= 0 (mu must satisfy mu(-k) = conj mu(k))."""
        k = np.arange(self.c.size)
        m = np.asarray(mu(k), dtype=complex)
        return TrigPolynomial(self.c * m)

    def derivative(self, r=1):
        k = np.arange(self.c.size)
        return TrigPolynomial(self.c * (1j * k) ** r)

    @property
    def has_derivative(self):
        return True

    def __add__(self, other):
        if isinstance(other, TrigPolynomial):
            n = max(self.n, other.n)
            return TrigPolynomial(self.padded(n).c + other.padded(n).c)
        if isinstance(other, PeriodicFunction):
            return PeriodicFunction.__add__(self, other)
        c = self.c.copy()
        c[0] += float(other)
        return TrigPolynomial(c)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, TrigPolynomial):
            return self + (-other)
        if isinstance(other, PeriodicFunction):
            return PeriodicFunction.__sub__(self, other)
        return self + (-float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PeriodicFunction):
            if isinstance(other, TrigPolynomial):
                return _trig_product(self, other)
            return PeriodicFunction.__mul__(self, other)
        return TrigPolynomial(self.c * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return TrigPolynomial(-self.c)

    def equals(self, other, tol=0.0):
        n = max(self.n, other.n)
        return bool(np.max(np.abs(self.padded(n).c - other.padded(n).c)) <= tol)


def _trig_product(p, q):
    a = p.complex_coefficients()
    b = q.complex_coefficients()
    full = np.convolve(a, b)
    n = p.n + q.n
    return TrigPolynomial(full[n:])


def as_function(f) -> PeriodicFunction:
    """Coerce strings, numbers and Exprs into a :class:`PeriodicFunction`."""
    if isinstance(f, PeriodicFunction):
        return f
    if isinstance(f, (int, float, np.floating)):
        return PeriodicFunction.constant(float(f))
    if isinstance(f, (str, exprdsl.Expr)):
        return PeriodicFunction.from_expr(f)
    if callable(f):
        return PeriodicFunction(f)
    raise TypeError(f"cannot interpret {f!r} as a periodic function")


# ===================================================================== spectral tools


def to_trig(f, tol: float = 1e-15, max_size: int = 1 << 16, min_size: int = 64) -> TrigPolynomial:
    """Spectral projection of a smooth function onto a trigonometric polynomial.

    Samples are doubled until the top quarter of the spectrum is below
    ``tol`` times the largest coefficient; coefficients below that level are
    dropped.
    """
    if isinstance(f, TrigPolynomial):
        return f
    f = as_function(f)
    if f.smoothness != "smooth":
        raise CapabilityError(f"spectral projection needs a smooth function, got {f.smoothness}")
    n = min_size
    while True:
        t = TrigPolynomial.from_samples(f(periodic_grid(n)))
        mag = np.abs(t.c)
        top = float(np.max(mag)) if mag.size else 0.0
        tail = float(np.max(mag[3 * (mag.size // 4) :]))
        if top == 0.0:
            return TrigPolynomial([0.0])
        if tail <= tol * top or n >= max_size:
            if tail > tol * top * 1e3:
                raise ConvergenceError(f"spectrum of {f.name!r} not resolved with {n} samples")
            c = np.where(mag > tol * top, t.c, 0.0)
            c = c[: n // 2]
            deg = np.nonzero(c)[0]
            return TrigPolynomial(c[: (deg[-1] + 1) if deg.size else 1], name=f.name)
        n *= 2


def differentiate(f, r: int = 1) -> PeriodicFunction:
    """r-th derivative: exact for trig polynomials and expressions, spectral for smooth samples."""
    if r < 0:
        raise ConfigurationError("derivative order must be >= 0")
    f = as_function(f)
    if r == 0:
        return f
    if isinstance(f, TrigPolynomial):
        return f.derivative(r)
    if f.smoothness == "singular":
        raise CapabilityError(f"cannot differentiate singular function {f.name!r}")
    for _ in range(r):
        f = f.derivative()
    return f


# ===================================================================== primitives


class Primitive:
    """Antiderivative P(y) = int_{-pi}^{y} f of a periodic function, any real y.

    Built from Gauss-Legendre cell integrals; cells containing singular points
    or breakpoints use split (and graded) rules.
    """

    def __init__(self, f, cells: int = 2048, order: int = 10):
        self.f = f
        self.cells = cells
        self.order = order
        self.h = TWO_PI / cells
        self.edges = -math.pi + self.h * np.arange(cells + 1)
        self.special = tuple(f.singular_points) + tuple(f.breakpoints)
        t, w = gauss_legendre(order)
        self._t, self._w = t, w
        lo = self.edges[:-1]
        vals = f(lo[:, None] + self.h * t[None, :])
        cell = self.h * (vals @ w)
        self.special_cells = set()
        for s in self.special:
            j = int(math.floor((s + math.pi) / self.h))
            for jj in (j - 1, j, j + 1):
                jj %= cells
                a, b = self.edges[jj], self.edges[jj + 1]
                if _points_in([s], a, b):
                    self.special_cells.add(jj)
        for j in self.special_cells:
            cell[j] = self._exact(self.edges[j], self.edges[j + 1])
        self.cum = np.concatenate(([0.0], np.cumsum(cell)))
        self.total = float(self.cum[-1])

    def _exact(self, a, b):
        if b <= a:
            return 0.0
        rule = build_rule((a, b), 4, self.order, "gauss", self.f.singular_points, self.f.breakpoints)
        return rule.integrate(self.f(rule.nodes))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        flat = y.ravel()
        k = np.floor((flat + math.pi) / TWO_PI)
        y0 = flat - k * TWO_PI
        j = np.clip(np.floor((y0 + math.pi) / self.h).astype(int), 0, self.cells - 1)
        lo = self.edges[j]
        width = y0 - lo
        nodes = lo[:, None] + width[:, None] * self._t[None, :]
        part = width * (self.f(nodes) @ self._w)
        if self.special_cells:
            sel = np.nonzero(np.isin(j, list(self.special_cells)))[0]
            for i in sel:
                part[i] = self._exact(lo[i], y0[i])
        out = k * self.total + self.cum[j] + part
        return out.reshape(y.shape)

    def integral(self, a, b):
        """int_a^b f for arrays a, b (periodic extension)."""
        return self(b) - self(a)


class Tabulated(PeriodicFunction):
    """f sampled once at the Gauss-Legendre nodes of equal cells, evaluated by per-cell interpolation.

    Used to cut nested evaluation chains (each layer of an iterated integral
    operator would otherwise re-evaluate every layer below it).
    """

    def __init__(self, f, cells: int = 2048, order: int = 10, chunk: int = 1024):
        self.cells, self.order = cells, order
        self.h = TWO_PI / cells
        t, _ = gauss_legendre(order)
        self._t = t
        # barycentric weights of the reference nodes
        diff = t[:, None] - t[None, :]
        np.fill_diagonal(diff, 1.0)
        self._bw = 1.0 / np.prod(diff, axis=1)
        lo = -math.pi + self.h * np.arange(cells)
        nodes = (lo[:, None] + self.h * t[None, :]).ravel()
        vals = np.concatenate([np.asarray(f(nodes[i : i + chunk]), dtype=float)
                               for i in range(0, nodes.size, chunk)])
        self.table = vals.reshape(cells, order)
        super().__init__(self._interp, smoothness=f.smoothness, breakpoints=f.breakpoints,
                         singular_points=f.singular_points, name=f"tab({f.name})")

    def primitive(self):
        if self._primitive is None:
            self._primitive = _TabulatedPrimitive(self)
        return self._primitive

    def _interp(self, x):
        x = np.asarray(x, dtype=float)
        flat = wrap(x.ravel())
        u = (flat + math.pi) / self.h
        j = np.clip(np.floor(u).astype(int), 0, self.cells - 1)
        s = u - j
        d = s[:, None] - self._t[None, :]
        hit = d == 0.0
        d = np.where(hit, 1.0, d)
        c = self._bw[None, :] / d
        out = np.sum(c * self.table[j], axis=1) / np.sum(c, axis=1)
        rows = np.nonzero(hit.any(axis=1))[0]
        if rows.size:
            out[rows] = self.table[j[rows], np.argmax(hit[rows], axis=1)]
        return out.reshape(x.shape)


class _TabulatedPrimitive:
    """Exact antiderivative of a :class:`Tabulated` interpolant (Horner per cell)."""

    def __init__(self, tab: Tabulated):
        z = 2.0 * tab._t - 1.0
        V = np.vander(z, tab.order, increasing=True)
        c = np.linalg.solve(V, tab.table.T).T  # cell polynomials in z on [-1, 1]
        k = np.arange(1, tab.order + 1)
        self.q = np.concatenate((np.zeros((tab.cells, 1)), c / k), axis=1)  # Q(z) = int_0^z
        self.q0 = self.q @ (-1.0) ** np.arange(tab.order + 1)  # Q(-1)
        self.h = tab.h
        self.cells = tab.cells
        cell = (self.h / 2.0) * (self.q.sum(axis=1) - self.q0)
        self.cum = np.concatenate(([0.0], np.cumsum(cell)))
        self.total = float(self.cum[-1])

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        flat = y.ravel()
        k = np.floor((flat + math.pi) / TWO_PI)
        u = (flat - k * TWO_PI + math.pi) / self.h
        j = np.clip(np.floor(u).astype(int), 0, self.cells - 1)
        z = 2.0 * (u - j) - 1.0
        q = self.q[j]
        acc = q[:, -1].copy()
        for i in range(q.shape[1] - 2, -1, -1):
            acc = acc * z + q[:, i]
        out = k * self.total + self.cum[j] + (self.h / 2.0) * (acc - self.q0[j])
        return out.reshape(y.shape)

    def integral(self, a, b):
        return self(b) - self(a)
