"""Fourier analysis on T, de la Vallee Poussin means, Jackson kernels and best approximation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import comb

from .descent import NormSumProblem, NormTerm, SolverOptions, solve
from .errors import ConfigurationError
from .numerics import (
    TWO_PI,
    QuadratureConfig,
    TrigPolynomial,
    as_function,
    build_rule,
    integrate,
    periodic_grid,
)

__all__ = [
    "fourier_coeffs",
    "partial_sum",
    "vallee_poussin",
    "JacksonKernel",
    "jackson_kernel",
    "jackson_stechkin",
    "jackson_multipliers",
    "BestApproxResult",
    "best_approximation",
    "trig_basis",
    "default_space",
]


def fourier_coeffs(f, n: int, quad: QuadratureConfig | None = None) -> np.ndarray:
    """c_k = (1/2pi) int_T f(t) e^{-ikt} dt for |k| <= n, returned indexed by k + n."""
    f = as_function(f)
    if isinstance(f, TrigPolynomial):
        return f.complex_coefficients(n)
    quad = quad or QuadratureConfig(tol=1e-12, panels=max(64, 4 * n))
    k = np.arange(n + 1)

    def integrand(t):
        t = np.asarray(t, dtype=float)
        return f(t)[:, None] * np.exp(-1j * np.outer(t, k)) / TWO_PI

    c = np.asarray(integrate(integrand, quad=quad, singular_points=f.singular_points,
                             breakpoints=f.breakpoints), dtype=complex)
    return np.concatenate((np.conj(c[:0:-1]), c))


def _positive(c):
    n = (len(c) - 1) // 2
    return c[n:]


def partial_sum(f, n: int) -> TrigPolynomial:
    """S_n f = sum_{|k| <= n} c_k e^{ikx}."""
    if n < 0:
        raise ConfigurationError("n must be >= 0")
    return TrigPolynomial(_positive(fourier_coeffs(f, n)))


def vallee_poussin(f, n: int) -> TrigPolynomial:
    """W_n f = (1/(n+1)) sum_{v=n}^{2n} S_v f, a polynomial of degree 2n."""
    if n < 0:
        raise ConfigurationError("n must be >= 0")
    c = _positive(fourier_coeffs(f, 2 * n))
    k = np.arange(2 * n + 1)
    factor = np.where(k <= n, 1.0, (2 * n + 1 - k) / (n + 1.0))
    return TrigPolynomial(c * factor)


# ===================================================================== Jackson kernel


@dataclass
class JacksonKernel:
    """J(u) = (1/kappa) (sin(mu/2)/sin(u/2))^{2r}, normalized so (1/pi) int_T J = 1.

    ``t`` holds the cosine coefficients of (sin(mu/2)/sin(u/2))^{2r}: the r-fold
    self-convolution of the triangle (m - |k|), so kappa = 2 t_0 and the
    normalized transform (1/pi) int J(u) e^{iku} du equals t_k / t_0.
    """

    r: int
    n: int
    m: int
    t: np.ndarray = field(repr=False)

    @property
    def kappa(self):
        return 2.0 * float(self.t[0])

    @property
    def degree(self):
        return self.r * (self.m - 1)

    def hat(self, k):
        """(1/pi) int_T J(u) e^{iku} du (real, even)."""
        k = np.abs(np.asarray(k, dtype=int))
        out = np.zeros(k.shape)
        ok = k <= self.degree
        out[ok] = self.t[k[ok]] / self.t[0]
        return out

    def __call__(self, u):
        """Kernel values from the closed-form ratio (limit m^{2r} at u = 0 mod 2pi)."""
        u = np.asarray(u, dtype=float)
        s = np.sin(u / 2.0)
        tiny = np.abs(s) < 1e-7
        safe = np.where(tiny, 1.0, s)
        base = np.where(tiny, float(self.m), np.sin(self.m * u / 2.0) / safe)
        return base ** (2 * self.r) / self.kappa

    def kappa_quadrature(self):
        """(1/pi) int_T (sin(mt/2)/sin(t/2))^{2r} dt by the trapezoid rule, exact for its degree."""
        N = 1 << max(4, math.ceil(math.log2(2 * self.degree + 2)))
        u = periodic_grid(N)
        vals = self(u) * self.kappa
        return float(np.sum(vals) * TWO_PI / N / math.pi)

    def integral(self):
        """(1/pi) int_T J by quadrature."""
        return self.kappa_quadrature() / self.kappa

    def moment(self, i: int) -> float:
        """(1/pi) int_T |u|^i J(u) du by composite Gauss-Legendre on [0, pi]."""
        rule = build_rule((0.0, math.pi), 8 * (self.degree + 1), 16, "gauss")
        return 2.0 / math.pi * rule.integrate(rule.nodes**i * self(rule.nodes))


def jackson_kernel(r: int, n: int, m: int | None = None) -> JacksonKernel:
    """Jackson kernel with m = floor(n/r) + 1 unless ``m`` is given; requires r <= 2m - 2."""
    if r < 1 or n < 1:
        raise ConfigurationError("need r >= 1 and n >= 1")
    if m is None:
        m = n // r + 1
    if r > 2 * m - 2:
        raise ConfigurationError(f"Jackson kernel needs r <= 2m-2 (r={r}, m={m})")
    tri = (m - np.abs(np.arange(-(m - 1), m))).astype(float)
    full = np.array([1.0])
    for _ in range(r):
        full = np.convolve(full, tri)
    deg = r * (m - 1)
    return JacksonKernel(r, n, m, full[deg:].copy())


def jackson_multipliers(n: int, r: int, kmax: int | None = None) -> np.ndarray:
    """d_k = -sum_{v=1}^r C(r,v)(-1)^v jhat(kv) for k = 0..kmax."""
    J = jackson_kernel(r, n)
    kmax = n if kmax is None else kmax
    k = np.arange(kmax + 1)
    d = np.zeros(k.size)
    for v in range(1, r + 1):
        d -= comb(r, v, exact=True) * (-1) ** v * J.hat(k * v)
    return d


def jackson_stechkin(f, n: int, r: int) -> TrigPolynomial:
    """D_{n,r} f through its Fourier multipliers; degree <= n."""
    if n < r:
        raise ConfigurationError("D_{n,r} needs n >= r")
    c = _positive(fourier_coeffs(f, n))
    return TrigPolynomial(c * jackson_multipliers(n, r, n))


# ===================================================================== best approximation


def trig_basis(x, n: int) -> np.ndarray:
    """Columns 1/2, cos x, sin x, ..., cos nx, sin nx (matching the flat coefficient vector)."""
    x = np.asarray(x, dtype=float)
    B = np.empty((x.size, 2 * n + 1))
    B[:, 0] = 0.5
    k = np.arange(1, n + 1)
    ang = np.outer(x, k)
    B[:, 1::2] = np.cos(ang)
    B[:, 2::2] = np.sin(ang)
    return B


def default_space(p, weight, degree: int, nodes: int | None = None):
    from .norms import LebesgueSpace

    if nodes is None:
        nodes = max(1024, 1 << math.ceil(math.log2(8 * (degree + 1))))
    return LebesgueSpace(p, weight, nodes=nodes)


@dataclass
class BestApproxResult:
    value: float
    polynomial: TrigPolynomial
    iterations: int
    step_size: float
    converged: bool
    method: str = "coordinate"
    evaluations: int = 0

    def to_dict(self):
        return {
            "E_n": self.value,
            "coefficients": [float(v) for v in self.polynomial.to_vector()],
            "iterations": self.iterations,
            "step_size": self.step_size,
            "converged": self.converged,
            "method": self.method,
        }


def best_approximation(f, n: int, p=2.0, weight=None, *, space=None,
                       options: SolverOptions | None = None) -> BestApproxResult:
    """E_n(f) = min over T in T_n of ||f - T||, warm-started at W_n f truncated to degree n."""
    if n < 0:
        raise ConfigurationError("n must be >= 0")
    f = as_function(f)
    options = options or SolverOptions()
    fdeg = f.n if isinstance(f, TrigPolynomial) else n
    space = space or default_space(p, weight, max(n, fdeg))
    fv = space.values(f)
    scale = space.norm(fv)
    if scale == 0:
        return BestApproxResult(0.0, TrigPolynomial(np.zeros(n + 1)), 0, 0.0, True, options.method)
    B = trig_basis(space.nodes, n)
    start = vallee_poussin(f, n).padded(n)
    # residuals are taken relative to the warm start, formed from coefficients when
    # possible, so tiny errors are not swamped by rounding in the values of f
    base = space.values(f - start) / scale
    problem = NormSumProblem([NormTerm(space, base, B, 1.0)])
    res = solve(problem, np.zeros(2 * n + 1), options)
    poly = start + TrigPolynomial.from_vector(res.x * scale)
    return BestApproxResult(res.value * scale, poly, res.iterations, res.step_size * scale,
                            res.converged, res.method, res.evaluations)
