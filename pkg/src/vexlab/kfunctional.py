"""Peetre K-functional over trigonometric polynomials and the realization operator A_delta^r."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb

from .approximation import default_space, trig_basis
from .descent import NormSumProblem, NormTerm, SolverOptions, solve
from .errors import ConfigurationError
from .numerics import Tabulated, TrigPolynomial, as_function, differentiate, to_trig
from .smoothing import r_delta, r_delta_multiplier

__all__ = ["KResult", "k_functional", "realization_operator", "realization_coefficients"]

MAX_DEGREE = 128  # cap on the default M; the doubling check may go to 2 * MAX_DEGREE


def realization_coefficients(r: int):
    """Pairs (power, coefficient) with A_delta^r = sum coefficient * R_delta^power."""
    return [(r * (r - j), (-1) ** (r - j + 1) * comb(r, j, exact=True)) for j in range(r)]


def realization_operator(f, delta: float, r: int):
    """A_delta^r f = sum_{j<r} (-1)^{r-j+1} C(r,j) R_delta^{r(r-j)} f  (= f - (I - R_delta^r)^r f)."""
    if delta <= 0 or r < 1:
        raise ConfigurationError("need delta > 0 and r >= 1")
    f = as_function(f)
    terms = realization_coefficients(r)
    if isinstance(f, TrigPolynomial):
        def mult(k):
            mu = r_delta_multiplier(k, delta)
            return sum(c * mu**pw for pw, c in terms)

        return f.apply_multiplier(mult)
    out = None
    current, done = f, 0
    for pw, c in sorted(terms):
        current = Tabulated(r_delta(current, delta, pw - done))
        done = pw
        out = current * float(c) if out is None else out + current * float(c)
    return out


def _derivative_basis(x, n, r):
    """r-th derivatives of the trig_basis columns."""
    x = np.asarray(x, dtype=float)
    B = np.zeros((x.size, 2 * n + 1))
    k = np.arange(1, n + 1)
    ang = np.outer(x, k) + r * math.pi / 2
    B[:, 1::2] = np.cos(ang) * k**r
    B[:, 2::2] = np.sin(ang) * k**r
    return B


@dataclass
class KResult:
    value: float
    g: TrigPolynomial
    M: int
    upper_bounds: dict
    converged: bool
    accepted: bool = True
    value_doubled: float | None = None
    iterations: int = 0
    method: str = "lbfgs"
    extra: dict = field(default_factory=dict)

    def __float__(self):
        return self.value

    def to_dict(self):
        return {
            "K": self.value,
            "M": self.M,
            "upper_bounds": dict(self.upper_bounds),
            "converged": self.converged,
            "accepted": self.accepted,
            "K_doubled_M": self.value_doubled,
            "iterations": self.iterations,
        }


def _solve_k(f, fv_fn, delta, r, M, space, options, extra_starts=()):
    dr = delta**r
    x = space.nodes
    # column scaling 1/(1 + (delta k)^r) balances the two terms for each frequency
    k = np.concatenate(([0.0], np.repeat(np.arange(1, M + 1), 2)))
    D = 1.0 / (1.0 + (delta * k) ** r)
    B = trig_basis(x, M) * D
    Br = _derivative_basis(x, M, r) * D
    scale = space.norm(fv_fn(f)) or 1.0

    def objective(g):
        return space.norm(fv_fn(f - g)) + dr * space.norm(space.values(differentiate(g, r)))

    starts = [TrigPolynomial(np.zeros(M + 1))]
    if isinstance(f, TrigPolynomial):
        starts.append(f.padded(M))
    starts += [s.padded(M) for s in extra_starts]
    values = [objective(s) for s in starts]
    i0 = int(np.argmin(values))
    g0 = starts[i0]
    terms = [
        NormTerm(space, fv_fn(f - g0) / scale, B, 1.0),
        NormTerm(space, space.values(differentiate(g0, r)) / scale, -Br, dr),
    ]
    res = solve(NormSumProblem(terms), np.zeros(2 * M + 1), options)
    g = g0 + TrigPolynomial.from_vector(res.x * D * scale)
    val = res.value * scale
    if values[i0] <= val:
        g, val = g0, values[i0]
    return val, g, res


def k_functional(f, delta: float, r: int, p=2.0, weight=None, M: int | None = None, *, space=None,
                 options: SolverOptions | None = None, check_degree: bool = True) -> KResult:
    """K_r(f, delta) = inf over g in T_M of ||f - g|| + delta^r ||g^{(r)}||."""
    if delta < 0 or r < 1:
        raise ConfigurationError("need delta >= 0 and r >= 1")
    f = as_function(f)
    if f.smoothness == "smooth" and not isinstance(f, TrigPolynomial):
        f = to_trig(f)
    fdeg = f.degree if isinstance(f, TrigPolynomial) else 16
    if M is None:
        M = min(max(4 * r, 2 * fdeg), MAX_DEGREE)
    if M < 2 * r:
        raise ConfigurationError("need M >= 2r")
    options = options or SolverOptions(method="lbfgs")
    space = space or default_space(p, weight, 2 * M if check_degree else M)
    fv_fn = space.values
    norm_f = space.norm(fv_fn(f))
    upper = {"norm_f": norm_f}
    if isinstance(f, TrigPolynomial):
        upper["smooth"] = delta**r * space.norm(space.values(f.derivative(r)))
    extra = []
    if delta > 0 and isinstance(f, TrigPolynomial):
        A = realization_operator(f, delta, r)
        extra.append(A)
        upper["realization"] = space.norm(fv_fn(f - A)) + delta**r * space.norm(space.values(A.derivative(r)))
    val, g, res = _solve_k(f, fv_fn, delta, r, M, space, options, extra)
    val = min(val, *upper.values())
    out = KResult(val, g, M, upper, res.converged, True, None, res.iterations, res.method)
    if check_degree:
        v2, g2, _ = _solve_k(f, fv_fn, delta, r, 2 * M, space, options, extra + [g])
        v2 = min(v2, val)
        out.value_doubled = v2
        out.accepted = abs(val - v2) <= 0.01 * max(val, 1e-300)
    return out
