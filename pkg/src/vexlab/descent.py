"""Minimizers for sums of scaled Luxemburg norms of affine maps of a coefficient vector.

The objective is  F(c) = sum_i s_i * N_i(b_i - M_i c),  convex in c.  Two engines:
cyclic coordinate descent with golden-section line searches (derivative free),
and L-BFGS using the implicit-function gradient of the Luxemburg gauge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

__all__ = ["NormTerm", "NormSumProblem", "SolverOptions", "SolveResult", "solve", "golden_line_search"]

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class NormTerm:
    space: object  # LebesgueSpace
    base: np.ndarray
    matrix: np.ndarray
    scale: float = 1.0


@dataclass(frozen=True)
class SolverOptions:
    method: str = "coordinate"  # or "lbfgs"
    tol: float = 1e-9
    max_cycles: int = 200
    line_tol: float = 1e-4
    pattern: bool = True
    max_iter: int = 2000
    polish_cycles: int = 0

    def __post_init__(self):
        if self.method not in ("coordinate", "lbfgs"):
            raise ValueError(f"unknown solver method {self.method!r}")
        if not self.tol > 0:
            raise ValueError("solver tol must be positive")


@dataclass
class SolveResult:
    x: np.ndarray
    value: float
    iterations: int
    step_size: float
    converged: bool
    evaluations: int
    method: str
    history: list = field(default_factory=list)


class NormSumProblem:
    def __init__(self, terms):
        self.terms = list(terms)
        self.dim = self.terms[0].matrix.shape[1]
        self.evaluations = 0

    def residuals(self, c):
        return [t.base - t.matrix @ c for t in self.terms]

    def value_of(self, residuals):
        self.evaluations += 1
        return float(sum(t.scale * t.space.norm(r) for t, r in zip(self.terms, residuals) if t.scale))

    def value(self, c):
        return self.value_of(self.residuals(c))

    def value_and_grad(self, c):
        self.evaluations += 1
        total = 0.0
        grad = np.zeros(self.dim)
        for t, r in zip(self.terms, self.residuals(c)):
            if not t.scale:
                continue
            a, g = t.space.norm_and_gradient(r)
            total += t.scale * a
            if a > 0:
                grad -= t.scale * (t.matrix.T @ g)
        return total, grad

    def column_scale(self, j):
        return sum(t.scale * t.space.norm(t.matrix[:, j]) for t in self.terms if t.scale)


def golden_line_search(phi, f0, step, xtol, max_expand=80):
    """Minimize a convex scalar function near t=0 (phi(0) = f0).

    Returns (t, phi(t)) with phi(t) <= f0.
    """
    step = max(step, xtol)
    best_t, best_f = 0.0, f0
    fp, fm = phi(step), phi(-step)
    if fp < best_f:
        best_t, best_f = step, fp
    if fm < best_f:
        best_t, best_f = -step, fm
    if fp >= f0 and fm >= f0:
        lo, hi = -step, step
    else:
        sign = 1.0 if fp < fm else -1.0
        a, b, fb = 0.0, step, min(fp, fm)
        for _ in range(max_expand):
            c = b + (b - a) / _GOLD
            fc = phi(sign * c)
            if fc < best_f:
                best_t, best_f = sign * c, fc
            if fc >= fb:
                break
            a, b, fb = b, c, fc
        else:
            return best_t, best_f
        lo, hi = sorted((sign * a, sign * c))
    x1 = hi - _GOLD * (hi - lo)
    x2 = lo + _GOLD * (hi - lo)
    f1, f2 = phi(x1), phi(x2)
    while hi - lo > xtol:
        if f1 < best_f:
            best_t, best_f = x1, f1
        if f2 < best_f:
            best_t, best_f = x2, f2
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLD * (hi - lo)
            f1 = phi(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLD * (hi - lo)
            f2 = phi(x2)
    for t, f in ((x1, f1), (x2, f2)):
        if f < best_f:
            best_t, best_f = t, f
    return best_t, best_f


def _coordinate(problem: NormSumProblem, x0, opts: SolverOptions, start_cycle=0):
    c = np.array(x0, dtype=float)
    R = problem.residuals(c)
    fx = problem.value_of(R)
    scales = np.array([problem.column_scale(j) for j in range(problem.dim)])
    steps = np.where(scales > 0, 0.1 * max(fx, 1e-300) / np.where(scales > 0, scales, 1.0), 0.0)
    last_step = 0.0
    converged = False
    history = [fx]
    cycle = 0
    if fx == 0.0:  # the objective is a norm: zero is optimal
        return SolveResult(c, fx, 0, 0.0, True, problem.evaluations, "coordinate", history)
    for cycle in range(start_cycle, opts.max_cycles):
        f_start = fx
        c_start = c.copy()
        for j in range(problem.dim):
            if scales[j] == 0:
                continue
            cols = [t.matrix[:, j] for t in problem.terms]
            xtol = opts.line_tol * max(fx, 1e-300) / scales[j]
            xtol = max(xtol, 4e-16 * max(abs(c[j]), 1e-300))

            def phi(t, R=R, cols=cols):
                return problem.value_of([r - t * col for r, col in zip(R, cols)])

            t, ft = golden_line_search(phi, fx, steps[j], xtol)
            if ft < fx and t != 0.0:
                c[j] += t
                R = [r - t * col for r, col in zip(R, cols)]
                fx = ft
                steps[j] = max(2.0 * abs(t), 10.0 * xtol)
                last_step = abs(t)
            else:
                steps[j] = max(steps[j] / 2.0, 10.0 * xtol)
        if opts.pattern:
            d = c - c_start
            if np.any(d):
                moves = [t.matrix @ d for t in problem.terms]
                dn = sum(t.scale * t.space.norm(m) for t, m in zip(problem.terms, moves) if t.scale)

                def psi(t, R=R, moves=moves):
                    return problem.value_of([r - t * m for r, m in zip(R, moves)])

                if dn > 0:
                    t, ft = golden_line_search(psi, fx, 1.0, opts.line_tol * max(fx, 1e-300) / dn)
                    if ft < fx and t != 0.0:
                        c += t * d
                        R = [r - t * m for r, m in zip(R, moves)]
                        fx = ft
        history.append(fx)
        if f_start - fx < opts.tol * (1.0 + fx):
            converged = True
            break
    return SolveResult(c, fx, cycle + 1, last_step, converged, problem.evaluations, "coordinate", history)


def _lbfgs(problem: NormSumProblem, x0, opts: SolverOptions):
    res = minimize(problem.value_and_grad, np.array(x0, dtype=float), jac=True, method="L-BFGS-B",
                   options={"maxiter": opts.max_iter, "ftol": opts.tol * 1e-3, "gtol": 1e-12,
                            "maxcor": 30})
    x = res.x
    fx = problem.value(x)
    f0 = problem.value(np.asarray(x0, dtype=float))
    if f0 < fx:
        x, fx = np.asarray(x0, dtype=float), f0
    step = float(np.max(np.abs(x - x0))) if np.size(x) else 0.0
    out = SolveResult(x, fx, int(res.nit), step, bool(res.success) or res.status == 2,
                      problem.evaluations, "lbfgs", [f0, fx])
    if opts.polish_cycles:
        polish = SolverOptions("coordinate", opts.tol, opts.polish_cycles, opts.line_tol, opts.pattern)
        pr = _coordinate(problem, x, polish)
        if pr.value <= out.value:
            out = SolveResult(pr.x, pr.value, out.iterations + pr.iterations, pr.step_size,
                              out.converged or pr.converged, problem.evaluations, "lbfgs", out.history + pr.history)
    return out


def solve(problem: NormSumProblem, x0, opts: SolverOptions | None = None) -> SolveResult:
    opts = opts or SolverOptions()
    if opts.method == "lbfgs":
        return _lbfgs(problem, x0, opts)
    return _coordinate(problem, x0, opts)
