"""Smoothing operators: Steklov means, averaging, R_delta, differences, moduli, convolutions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate as sp_integrate
from scipy.special import comb, sici

from .errors import ConfigurationError
from .numerics import (
    TORUS,
    TWO_PI,
    PeriodicFunction,
    QuadratureConfig,
    Tabulated,
    TrigPolynomial,
    as_function,
    build_rule,
    gauss_legendre,
    integrate,
    wrap,
)

__all__ = [
    "steklov_multiplier",
    "r_delta_multiplier",
    "steklov",
    "steklov_translated",
    "OpenSetFamily",
    "averaging",
    "r_delta",
    "r_delta_derivative",
    "difference",
    "shift_difference",
    "modulus",
    "convolve",
    "Kernel",
    "KERNELS",
    "get_kernel",
    "approx_identity",
    "transfer_function",
    "grid_modulus_of_continuity",
]

log = logging.getLogger(__name__)


# ===================================================================== multipliers


def steklov_multiplier(k, h):
    """m_k(h) = (e^{ikh} - 1)/(ikh), m_0 = 1."""
    th = np.asarray(k, dtype=float) * h
    return np.sinc(th / TWO_PI) * np.exp(0.5j * th)


def r_delta_multiplier(k, delta):
    """mu_k = (2/delta) int_{delta/2}^{delta} m_k(h) dh, via sine/cosine integrals (series near 0)."""
    k = np.asarray(k, dtype=float)
    x = np.abs(k) * delta
    out = np.empty(x.shape, dtype=complex)
    small = x < 0.5
    if np.any(small):
        z = 1j * x[small]
        acc = np.zeros(z.shape, dtype=complex)
        term = np.ones(z.shape, dtype=complex)
        fact = 1.0
        for j in range(30):
            fact *= j + 1
            acc += term * 2.0 * (1.0 - 2.0 ** (-(j + 1))) / (fact * (j + 1))
            term = term * z
        out[small] = acc
    big = ~small
    if np.any(big):
        xb = x[big]
        si1, ci1 = sici(xb)
        si2, ci2 = sici(xb / 2)
        out[big] = (2.0 / (1j * xb)) * (ci1 - ci2 + 1j * (si1 - si2) - math.log(2.0))
    return np.where(k < 0, np.conj(out), out)


# ===================================================================== helpers


def _shifted_points(points, shifts):
    return tuple(float(s - t) for s in points for t in shifts)


def _special(f):
    return tuple(f.singular_points) + tuple(f.breakpoints)


def _derived(func, f, shifts, name, smooth_keeps=True):
    """PeriodicFunction built from f whose special points move by -shift for each shift."""
    pts = _shifted_points(_special(f), shifts)
    smooth = f.smoothness == "smooth" and smooth_keeps
    return PeriodicFunction(func, smoothness="smooth" if smooth else "piecewise",
                            breakpoints=pts, name=name)


# ===================================================================== Steklov family


def steklov(f, h: float) -> PeriodicFunction:
    """(T_h f)(x) = (1/h) int_x^{x+h} f."""
    if not (0 < h <= TWO_PI + 1e-12):
        raise ConfigurationError("h must lie in (0, 2*pi]")
    f = as_function(f)
    if isinstance(f, TrigPolynomial):
        return f.apply_multiplier(lambda k: steklov_multiplier(k, h))
    P = f.primitive()
    return _derived(lambda x: (P(np.asarray(x) + h) - P(x)) / h, f, (0.0, h), f"T_{h}({f.name})")


def steklov_translated(f, lam: float, tau: float) -> PeriodicFunction:
    """S_{lam,tau} f(x) = lam * int over [x + tau - 1/(2 lam), x + tau + 1/(2 lam)]."""
    if lam <= 0:
        raise ConfigurationError("lambda must be positive")
    f = as_function(f)
    half = 1.0 / (2.0 * lam)
    if isinstance(f, TrigPolynomial):
        return f.apply_multiplier(
            lambda k: np.exp(1j * k * tau) * np.sinc(np.asarray(k, float) * half / math.pi)
        )
    P = f.primitive()
    a, b = tau - half, tau + half
    return _derived(lambda x: lam * (P(np.asarray(x) + b) - P(np.asarray(x) + a)), f, (a, b),
                    f"S_{lam},{tau}({f.name})")


@dataclass
class OpenSetFamily:
    """Open bounded intervals of the real line; ``finiteness`` bounds the overlap count."""

    intervals: np.ndarray
    finiteness: int = 1

    def __post_init__(self):
        iv = np.asarray(self.intervals, dtype=float).reshape(-1, 2)
        if np.any(iv[:, 1] <= iv[:, 0]):
            raise ConfigurationError("open sets must be non-empty intervals")
        self.intervals = iv
        if iv.size:
            pts = np.sort(np.concatenate([iv[:, 0], iv[:, 1]]))
            mids = 0.5 * (pts[:-1] + pts[1:])
            depth = np.max(np.sum((iv[:, 0][None, :] < mids[:, None]) & (mids[:, None] < iv[:, 1][None, :]), axis=1), initial=0)
            if depth > self.finiteness:
                raise ConfigurationError(f"family is {depth}-overlapping, declared {self.finiteness}-finite")

    def __len__(self):
        return len(self.intervals)

    @classmethod
    def unit_cover(cls, offset: float = 0.0):
        """Pairwise disjoint unit intervals covering T (up to endpoints), shifted by ``offset``."""
        start = -math.pi + (offset % 1.0) - 1.0
        left = start + np.arange(0, 9)
        left = left[(left + 1 > -math.pi) & (left < math.pi)]
        return cls(np.stack([left, left + 1.0], axis=1), 1)


def averaging(f, Q: OpenSetFamily, quad: QuadratureConfig | None = None) -> PeriodicFunction:
    """T_Q f = sum_U chi_{U cap T} A_U f with A_U f = (1/|U|) int_{U cap T} |f|."""
    f = as_function(f)
    quad = quad or QuadratureConfig(rule="gauss", tol=1e-10)
    if len(Q) == 0:
        log.warning("empty open-set family; averaging gives the zero function")
        return TrigPolynomial([0.0])
    pieces = []
    absf = PeriodicFunction(lambda x: np.abs(f(x)), smoothness="piecewise" if f.smoothness == "smooth" else f.smoothness,
                            singular_points=f.singular_points, breakpoints=f.breakpoints)
    for a, b in Q.intervals:
        lo, hi = max(a, -math.pi), min(b, math.pi)
        if hi <= lo:
            continue
        avg = float(integrate(absf, (lo, hi), quad)) / (b - a)
        pieces.append((lo, hi, avg))

    def tq(x):
        x = np.asarray(x, dtype=float)
        y = wrap(x)
        out = np.zeros(x.shape)
        for lo, hi, avg in pieces:
            out += np.where((y > lo) & (y < hi), avg, 0.0)
        return out

    brk = [lo for lo, _, _ in pieces] + [hi for _, hi, _ in pieces]
    g = PeriodicFunction(tq, smoothness="piecewise", breakpoints=brk, name=f"T_Q({f.name})")
    g.averages = tuple(p[2] for p in pieces)
    return g


# ===================================================================== R_delta


def _r_delta_once(f, delta):
    if isinstance(f, TrigPolynomial):
        return f.apply_multiplier(lambda k: r_delta_multiplier(k, delta))
    P = f.primitive()
    t, w = gauss_legendre(24)
    a, b = delta / 2.0, delta
    special = np.array(_special(f))

    def rd(x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        if flat.size > 512:
            return np.concatenate([rd(flat[i : i + 512]) for i in range(0, flat.size, 512)]).reshape(x.shape)
        split = np.full(flat.shape, b)
        for s in special:
            hs = np.mod(s - flat, TWO_PI)
            inside = (hs > a) & (hs < b)
            split = np.where(inside & (hs < split), hs, split)
        Px = P(flat)
        total = np.zeros(flat.shape)
        for lo, hi in ((np.full(flat.shape, a), split), (split, np.full(flat.shape, b))):
            hh = lo[:, None] + (hi - lo)[:, None] * t[None, :]
            vals = (P(flat[:, None] + hh) - Px[:, None]) / hh
            total += (hi - lo) * (vals @ w)
        return (2.0 / delta * total).reshape(x.shape)

    return _derived(rd, f, (0.0, a, b), f"R_{delta}({f.name})")


def r_delta(f, delta: float, r: int = 1) -> PeriodicFunction:
    """R_delta f(x) = (2/delta) int_{delta/2}^{delta} (1/h) int_0^h f(x+t) dt dh, iterated r times."""
    if not (0 < delta <= TWO_PI + 1e-12):
        raise ConfigurationError("delta must lie in (0, 2*pi]")
    if r < 1:
        raise ConfigurationError("iteration count must be >= 1")
    f = as_function(f)
    if isinstance(f, TrigPolynomial):
        return f.apply_multiplier(lambda k: r_delta_multiplier(k, delta) ** r)
    for i in range(r):
        f = _r_delta_once(f, delta)
        if i < r - 1:
            f = Tabulated(f)  # keeps the next layer from re-running this one per node
    return f


def r_delta_derivative(f, delta: float, order: int = 32) -> PeriodicFunction:
    """(R_delta f)'(x) = (2/delta) int_{delta/2}^{delta} (f(x+s) - f(x))/s ds, with no derivative of f."""
    if not (0 < delta <= TWO_PI + 1e-12):
        raise ConfigurationError("delta must lie in (0, 2*pi]")
    f = as_function(f)
    t, w = gauss_legendre(order)
    s = delta / 2.0 + (delta / 2.0) * t
    ws = (delta / 2.0) * w / s

    def d(x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        fx = f(flat)
        out = (f(flat[:, None] + s[None, :]) - fx[:, None]) @ ws
        return (2.0 / delta * out).reshape(x.shape)

    return _derived(d, f, (0.0, delta / 2.0, delta), f"dR_{delta}({f.name})")


# ===================================================================== differences


def difference(f, h: float, r: int = 1) -> PeriodicFunction:
    """Delta_h^r = (T_h - I)^r."""
    f = as_function(f)
    if r < 0:
        raise ConfigurationError("order must be >= 0")
    if isinstance(f, TrigPolynomial):
        return f.apply_multiplier(lambda k: (steklov_multiplier(k, h) - 1.0) ** r)
    for _ in range(r):
        f = steklov(f, h) - f
    return f


def shift_difference(f, h: float, r: int = 1, method: str = "binomial") -> PeriodicFunction:
    """sum_{v=0}^r C(r,v) (-1)^{r-v} f(. + v h); ``method='compose'`` applies (shift - I) r times."""
    f = as_function(f)
    if isinstance(f, TrigPolynomial) and method == "multiplier":
        return f.apply_multiplier(lambda k: (np.exp(1j * np.asarray(k) * h) - 1.0) ** r)
    if method == "compose":
        g = f
        for _ in range(r):
            prev = g
            g = PeriodicFunction(lambda x, q=prev: q(np.asarray(x) + h) - q(x),
                                 smoothness="smooth" if prev.smoothness == "smooth" else "piecewise",
                                 breakpoints=_shifted_points(_special(prev), (0.0, h)))
        return g
    coef = [comb(r, v, exact=True) * (-1) ** (r - v) for v in range(r + 1)]
    if isinstance(f, TrigPolynomial):
        return f.apply_multiplier(lambda k: sum(c * np.exp(1j * np.asarray(k) * v * h) for v, c in enumerate(coef)))

    def sd(x):
        x = np.asarray(x, dtype=float)
        return sum(c * f(x + v * h) for v, c in enumerate(coef))

    return _derived(sd, f, tuple(v * h for v in range(r + 1)), f"Dshift_{h}^{r}({f.name})")


def modulus(f, delta: float, r: int, p=2.0, weight=None, space=None) -> float:
    """Omega_r(f, delta) = ||(I - T_delta)^r f||; Omega_0 = ||f||, Omega_r(f, 0) = 0."""
    from .norms import LebesgueSpace

    space = space or LebesgueSpace(p, weight)
    f = as_function(f)
    if r == 0:
        return space.norm(f)
    if delta == 0:
        return 0.0
    return space.norm(difference(f, delta, r))


# ===================================================================== convolution


def _fourier_quad(f, n):
    from .approximation import fourier_coeffs

    return fourier_coeffs(f, n)


def convolve(f, g, grid: int = 1024) -> PeriodicFunction:
    """(f*g)(x) = int_T f(y) g(x-y) dy."""
    f, g = as_function(f), as_function(g)
    if isinstance(f, TrigPolynomial) and isinstance(g, TrigPolynomial):
        n = min(f.n, g.n)
        return TrigPolynomial(TWO_PI * f.c[: n + 1] * g.c[: n + 1])
    if isinstance(g, TrigPolynomial) or isinstance(f, TrigPolynomial):
        t, other = (f, g) if isinstance(f, TrigPolynomial) else (g, f)
        c = _fourier_quad(other, t.n)[t.n :]
        return TrigPolynomial(TWO_PI * t.c * c)
    rule = build_rule(TORUS, 256, 8, "gauss", f.singular_points, f.breakpoints)
    fy = f(rule.nodes) * rule.weights

    def conv(x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape)
        for s in range(0, flat.size, 256):
            out[s : s + 256] = g(flat[s : s + 256, None] - rule.nodes[None, :]) @ fy
        return out.reshape(x.shape)

    return PeriodicFunction(conv, smoothness="piecewise", name=f"({f.name} * {g.name})")


class Kernel:
    """Approximate-identity kernel phi on the real line with its Fourier transform."""

    def __init__(self, name, func, fourier, support=math.inf, radial_decreasing=True, check=True):
        self.name = name
        self.func = func
        self.fourier = fourier
        self.support = support
        self.radial_decreasing = radial_decreasing
        if check:
            total = self.integral()
            if abs(total - 1.0) > 1e-8:
                raise ConfigurationError(f"kernel {name!r} integrates to {total!r}, not 1")

    def integral(self):
        if math.isfinite(self.support):
            val, _ = sp_integrate.quad(self.func, -self.support, self.support, epsabs=1e-13, epsrel=1e-13, limit=200)
        else:
            val, _ = sp_integrate.quad(self.func, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13, limit=200)
        return val

    @cached_property
    def majorant_l1(self):
        """||phi~||_1 for the least radially decreasing majorant phi~(x) = sup_{|y|>=|x|} |phi(y)|."""
        if self.radial_decreasing:
            return 1.0
        R = self.support if math.isfinite(self.support) else 200.0
        x = np.linspace(0.0, R, 400_001)
        v = np.abs(self.func(x))
        m = np.maximum.accumulate(v[::-1])[::-1]
        return 2.0 * float(np.trapezoid(m, x))

    def periodized(self, t):
        """x -> sum_n phi_t(x + 2 pi n) on T."""
        def per(x):
            x = wrap(x)
            if math.isfinite(self.support):
                reach = int(math.ceil(self.support * t / TWO_PI)) + 1
            else:
                reach = int(math.ceil(40.0 * t / TWO_PI)) + 1
            out = np.zeros(np.shape(x))
            for n in range(-reach, reach + 1):
                out += self.func((x + TWO_PI * n) / t) / t
            return out

        if self.name == "poisson":
            return lambda x: np.sinh(t) / (TWO_PI * (np.cosh(t) - np.cos(x)))
        return per


def _bump(x):
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1
    out = np.zeros(x.shape)
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out / _BUMP_MASS


_BUMP_MASS = sp_integrate.quad(lambda x: math.exp(-1.0 / (1.0 - x * x)), -1, 1, epsabs=1e-14, epsrel=1e-13)[0]
_GL64 = np.polynomial.legendre.leggauss(128)


def _bump_fourier(xi):
    xi = np.asarray(xi, dtype=float)
    t, w = _GL64
    return (np.cos(np.multiply.outer(xi, t)) * _bump(t)) @ w


KERNELS = {
    "bump": lambda: Kernel("bump", _bump, _bump_fourier, support=1.0),
    "poisson": lambda: Kernel("poisson", lambda x: 1.0 / (math.pi * (1.0 + np.asarray(x) ** 2)),
                              lambda xi: np.exp(-np.abs(xi))),
    "gauss": lambda: Kernel("gauss", lambda x: np.exp(-np.asarray(x) ** 2 / 2) / math.sqrt(TWO_PI),
                            lambda xi: np.exp(-np.asarray(xi) ** 2 / 2)),
}


def get_kernel(kernel) -> Kernel:
    if isinstance(kernel, Kernel):
        return kernel
    try:
        return KERNELS[kernel]()
    except KeyError:
        raise ConfigurationError(f"unknown kernel {kernel!r}; choose from {sorted(KERNELS)}") from None


def approx_identity(f, kernel="poisson", t: float = 0.1) -> PeriodicFunction:
    """f * phi_t with phi_t(x) = phi(x/t)/t; the result carries ``majorant_l1``."""
    if t <= 0:
        raise ConfigurationError("t must be positive")
    K = get_kernel(kernel)
    f = as_function(f)
    if isinstance(f, TrigPolynomial):
        out = f.apply_multiplier(lambda k: K.fourier(np.asarray(k, dtype=float) * t))
    else:
        per = K.periodized(t)
        brk = [s * t * 2.0**j for j in range(-3, 40) for s in (-1, 1) if t * 2.0**j < math.pi]
        rule = build_rule(TORUS, 256, 8, "gauss", (), brk)
        wy = rule.weights * per(rule.nodes)

        def conv(x):
            x = np.asarray(x, dtype=float)
            flat = x.ravel()
            out = np.empty(flat.shape)
            for s in range(0, flat.size, 256):
                out[s : s + 256] = f(flat[s : s + 256, None] - rule.nodes[None, :]) @ wy
            return out.reshape(x.shape)

        out = PeriodicFunction(conv, smoothness="piecewise", name=f"{K.name}_{t}({f.name})")
    out.majorant_l1 = K.majorant_l1
    return out


# ===================================================================== transference


def transfer_function(f, F) -> PeriodicFunction:
    """u -> int_T f(x+u) |F(x)| dx, evaluated as int_T f(y) |F(y-u)| dy on a fixed rule."""
    f, F = as_function(f), as_function(F)
    rule = build_rule(TORUS, 512, 8, "gauss", f.singular_points, f.breakpoints)
    fy = f(rule.nodes) * rule.weights
    y = rule.nodes

    def U(u):
        u = np.asarray(u, dtype=float)
        flat = u.ravel()
        out = np.empty(flat.shape)
        for s in range(0, flat.size, 128):
            out[s : s + 128] = np.abs(F(y[None, :] - flat[s : s + 128, None])) @ fy
        return out.reshape(u.shape)

    return PeriodicFunction(U, smoothness="piecewise", name=f"U[{f.name},{F.name}]")


def grid_modulus_of_continuity(g, n: int) -> float:
    """max |g(u_{j+1}) - g(u_j)| over the periodic n-grid."""
    u = -math.pi + TWO_PI * np.arange(n + 1) / n
    v = g(u)
    return float(np.max(np.abs(np.diff(v))))
