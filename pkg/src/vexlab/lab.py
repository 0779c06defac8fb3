"""Empirical inequality suites: measured constants, trends and verdicts.

Each suite evaluates LHS/RHS ratios over a grid of (function, exponent,
weight, parameters) and summarizes them in a :class:`SuiteReport`.  Reports
serialize to JSON (sorted keys, repr-exact floats), CSV and two-column TSV.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import catalog
from .approximation import best_approximation, default_space, jackson_stechkin, vallee_poussin
from .descent import SolverOptions
from .errors import ConfigurationError, VexlabError
from .kfunctional import k_functional, realization_operator
from .norms import INFINITE, LebesgueSpace
from .numerics import TORUS, TWO_PI, PeriodicFunction, TrigPolynomial, differentiate
from .smoothing import (
    OpenSetFamily,
    approx_identity,
    averaging,
    difference,
    r_delta,
    r_delta_derivative,
    shift_difference,
    steklov,
    steklov_translated,
)
from .weights import conjugate_exponent, dual_weight

__all__ = [
    "OK",
    "SKIPPED",
    "FLAGGED",
    "FAILED",
    "SuiteCase",
    "SuiteReport",
    "random_trig",
    "make_case",
    "loglog_slope",
    "SUITES",
    "run_suite",
    "run_jackson_suite",
    "run_bernstein_suite",
    "run_kfunc_jackson_suite",
    "run_inverse_suite",
    "run_simultaneous_suite",
    "run_lipschitz_suite",
    "run_boundedness_suite",
    "run_realization_suite",
    "run_invariants_suite",
    "clear_caches",
]

log = logging.getLogger(__name__)

OK = "ok"
SKIPPED = "skipped-degenerate"
FLAGGED = "solver-flagged"
FAILED = "failed"
EPS = np.finfo(float).eps

LBFGS = SolverOptions(method="lbfgs")
# K-functional objectives converge slowly in their last digits; 1e-6 relative is ample for ratios
LBFGS_K = SolverOptions(method="lbfgs", tol=1e-6, max_iter=500)

# pairs used where every case needs an optimization per parameter value
LIGHT_PAIRS = (
    ("p=2", "1"),
    ("p=2+cos(x)", "power_weight(gamma=0.5)"),
    ("p=1.2+0.5*abs(sin(x))", "power_weight(gamma=-0.3)"),
)


# ===================================================================== records


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v


@dataclass
class SuiteCase:
    suite: str
    id: str
    params: dict
    lhs: float | None
    rhs: float | None
    ratio: float | None
    status: str = OK

    def to_dict(self):
        return {
            "id": self.id,
            "params": dict(self.params),
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "ratio": _num(self.ratio),
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, suite, d):
        return cls(suite, d["id"], dict(d["params"]), d["lhs"], d["rhs"], d["ratio"], d["status"])


def make_case(suite, cid, params, lhs, rhs, scale=1.0, *, flagged=False, bound=None, lower=None):
    """Ratio case; RHS at or below 10 eps * scale makes it skipped-degenerate.

    ``bound``/``lower`` turn an out-of-range ratio into a failed case.
    """
    lhs = float(lhs)
    rhs = float(rhs)
    scale = abs(float(scale)) if scale else 1.0
    if not math.isfinite(rhs) or rhs <= 10.0 * EPS * scale:
        return SuiteCase(suite, cid, params, lhs, rhs, None, SKIPPED)
    ratio = lhs / rhs
    status = FLAGGED if flagged else OK
    if not math.isfinite(ratio):
        status = FAILED
    if bound is not None and ratio > bound:
        status = FAILED
    if lower is not None and ratio < lower:
        status = FAILED
    return SuiteCase(suite, cid, params, lhs, rhs, ratio, status)


def loglog_slope(x, y):
    """Least-squares slope of log y against log x (positive entries only); None below 3 points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(y)
    if np.count_nonzero(keep) < 3 or np.unique(x[keep]).size < 2:
        return None
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


@dataclass
class SuiteReport:
    suite: str
    cases: list
    max_ratio: float | None
    slope: float | None
    verdict: str
    band: list | None = None
    groups: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    xvar: str | None = None

    # ------------------------------------------------------------------ building
    @classmethod
    def build(cls, suite, cases, *, xvar="n", group_keys=None, band=(-0.15, 0.15), target=0.0,
              spread_limit=None, checks=None, group_filter=None):
        """Summarize cases.

        Cases are grouped by every parameter except ``xvar`` (or by ``group_keys``);
        each group gets the log-log slope of ratio against ``xvar`` and the
        spread max/min.  The verdict requires: no failed case, a finite max ratio,
        every group slope within ``target + band`` and spread below ``spread_limit``.
        """
        cases = sorted(cases, key=lambda c: c.id)
        live = [c for c in cases if c.status in (OK, FLAGGED, FAILED) and c.ratio is not None]
        max_ratio = max((c.ratio for c in live), default=None)
        groups = {}
        for c in live:
            if group_filter is not None and not group_filter(c):
                continue
            if group_keys is not None:
                key = tuple((k, c.params.get(k)) for k in group_keys)
            else:
                key = tuple(sorted((k, v) for k, v in c.params.items() if k != xvar))
            groups.setdefault(key, []).append(c)
        summary = []
        worst = None
        ok = True
        for key in sorted(groups, key=repr):
            g = groups[key]
            ratios = [c.ratio for c in g]
            xs = [c.params.get(xvar, i + 1) if xvar else i + 1 for i, c in enumerate(g)]
            slope = loglog_slope(xs, ratios) if xvar else None
            pos = [r for r in ratios if r > 0]
            spread = (max(pos) / min(pos)) if pos else None
            entry = {"group": {k: v for k, v in key}, "slope": slope, "spread": spread,
                     "max_ratio": max(ratios), "count": len(g)}
            if band is not None and slope is not None:
                lo, hi = target + band[0], target + band[1]
                entry["in_band"] = lo <= slope <= hi
                ok &= entry["in_band"]
                if worst is None or abs(slope - target) > abs(worst - target):
                    worst = slope
            elif slope is not None and (worst is None or abs(slope - target) > abs(worst - target)):
                worst = slope
            if spread_limit is not None and spread is not None:
                entry["spread_ok"] = spread < spread_limit
                ok &= entry["spread_ok"]
            summary.append(entry)
        ok &= not any(c.status == FAILED for c in cases)
        ok &= max_ratio is None or math.isfinite(max_ratio)
        checks = dict(checks or {})
        ok &= all(checks.values())
        bandv = None if band is None else [target + band[0], target + band[1]]
        return cls(suite, cases, max_ratio, worst, "pass" if ok else "fail", bandv, summary, checks, xvar)

    # ------------------------------------------------------------------ serialization
    def to_dict(self):
        return {
            "suite": self.suite,
            "cases": [c.to_dict() for c in self.cases],
            "max_ratio": _num(self.max_ratio),
            "slope": _num(self.slope),
            "verdict": self.verdict,
            "band": self.band,
            "groups": self.groups,
            "checks": dict(self.checks),
            "xvar": self.xvar,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=True) + "\n"

    @classmethod
    def from_dict(cls, d):
        suite = d["suite"]
        return cls(suite, [SuiteCase.from_dict(suite, c) for c in d["cases"]], d["max_ratio"], d["slope"],
                   d["verdict"], d.get("band"), d.get("groups", []), d.get("checks", {}), d.get("xvar"))

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        keys = sorted({k for c in self.cases for k in c.params})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", *keys, "lhs", "rhs", "ratio", "status"])
        for c in self.cases:
            w.writerow([c.id, *[c.params.get(k, "") for k in keys],
                        *[("" if v is None else repr(float(v))) for v in (c.lhs, c.rhs, c.ratio)], c.status])
        return buf.getvalue()

    def plot_series(self):
        """[(label, xs, ys)] of ratio against the trend variable per group."""
        out = []
        for entry in self.groups:
            grp = entry["group"]
            pts = [(c.params.get(self.xvar, i + 1) if self.xvar else i + 1, c.ratio)
                   for i, c in enumerate(c for c in self.cases
                                         if c.ratio is not None
                                         and all(c.params.get(k) == v for k, v in grp.items()))]
            pts.sort()
            label = ",".join(f"{k}={v}" for k, v in grp.items())
            out.append((label, [p[0] for p in pts], [p[1] for p in pts]))
        return out

    def to_tsv(self) -> str:
        """Two-column (x, ratio) blocks, one per group, separated by blank lines and labelled by comments."""
        lines = [f"# suite {self.suite}; x = {self.xvar or 'index'}, y = ratio"]
        for label, xs, ys in self.plot_series():
            lines.append(f"# {label}")
            lines += [f"{x!r}\t{y!r}" for x, y in zip(xs, ys)]
            lines.append("")
        return "\n".join(lines) + "\n"

    def failed_cases(self):
        return [c for c in self.cases if c.status == FAILED]


# ===================================================================== shared computations


_lock = threading.Lock()
_memo: dict = {}


def clear_caches():
    with _lock:
        _memo.clear()


def _cached(key, compute):
    with _lock:
        if key in _memo:
            return _memo[key]
    val = compute()
    with _lock:
        _memo.setdefault(key, val)
        return _memo[key]


def random_trig(n: int, seed: int = 0) -> TrigPolynomial:
    """Degree-n polynomial with independent standard normal a_k, b_k scaled by 1/sqrt(2n+1)."""
    if n < 0:
        raise ConfigurationError("n must be >= 0")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2 * n + 1) / math.sqrt(2 * n + 1)
    out = TrigPolynomial.from_vector(v)
    out.name = f"trig_random(n={n},seed={seed})"
    return out


def _fn(fid, order=0):
    f = catalog.resolve_function(fid)
    return f if order == 0 else differentiate(f, order)


def _degree(f):
    return f.degree if isinstance(f, TrigPolynomial) else 64


def _space(pid, wid, degree, factor=1):
    def build():
        s = default_space(catalog.resolve_exponent(pid), catalog.resolve_weight(wid), degree)
        return s if factor == 1 else s.refined(factor)

    return _cached(("space", pid, wid, _space_nodes(degree), factor), build)


def _space_nodes(degree):
    return max(1024, 1 << math.ceil(math.log2(8 * (degree + 1))))


def _fspace(fid, pid, wid, factor=1):
    return _space(pid, wid, _degree(_fn(fid)), factor)


def _norm(fid, order, pid, wid):
    return _cached(("norm", fid, order, pid, wid),
                   lambda: _fspace(fid, pid, wid).norm(_fn(fid, order)))


def _best(fid, order, n, pid, wid):
    def compute():
        return best_approximation(_fn(fid, order), n, pid, wid, space=_fspace(fid, pid, wid), options=LBFGS)

    return _cached(("E", fid, order, n, pid, wid), compute)


def _E(fid, order, n, pid, wid):
    return _best(fid, order, n, pid, wid).value


def _K(fid, order, r, delta, pid, wid, check=True):
    def compute():
        return k_functional(_fn(fid, order), delta, r, catalog.resolve_exponent(pid),
                            catalog.resolve_weight(wid), options=LBFGS_K, check_degree=check)

    return _cached(("K", fid, order, r, float(delta), pid, wid, check), compute)


def _k_flag(res):
    return not (res.converged and res.accepted)


def _run(tasks, jobs):
    """Evaluate callables (each returning a list of cases), concurrently up to ``jobs``."""
    out = []
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            for part in ex.map(lambda t: t(), tasks):
                out.extend(part)
    else:
        for t in tasks:
            out.extend(t())
    return out


def _pairs(pairs):
    if pairs is None:
        return catalog.compatible_pairs()
    return [tuple(p) for p in pairs]


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return f"{int(v):04d}"
    return f"{float(v):.6g}"


def _cid(*parts):
    return "/".join(_fmt(p) if isinstance(p, (int, float, np.integer, np.floating)) else str(p) for p in parts)


# ===================================================================== direct theorems


def run_jackson_suite(functions=catalog.SMOOTH_FUNCTIONS, pairs=None, n_grid=(4, 8, 16, 32, 64),
                      r_set=(1, 2), alpha_set=(0,), band=0.15, jobs=1) -> SuiteReport:
    """||f^(a) - D_{n,r} f^(a)|| n^r / ||f^(a+r)||  and  E_n(f^(a)) n^r / E_n(f^(a+r))."""
    suite = "jackson"
    tasks = []
    for fid in functions:
        for pid, wid in _pairs(pairs):
            for r in r_set:
                for a in alpha_set:
                    def task(fid=fid, pid=pid, wid=wid, r=r, a=a):
                        fa = _fn(fid, a)
                        space = _fspace(fid, pid, wid)
                        rhs0 = _norm(fid, a + r, pid, wid)
                        scale = _norm(fid, a, pid, wid)
                        out = []
                        for n in n_grid:
                            base = {"f": fid, "p": pid, "w": wid, "r": r, "alpha": a, "n": n}
                            if n < r:
                                continue
                            lhs = space.norm(fa - jackson_stechkin(fa, n, r)) * n**r
                            out.append(make_case(suite, _cid(suite, "EqnTUR", fid, pid, wid, r, a, n),
                                                 {**base, "kind": "EqnTUR"}, lhs, rhs0, scale))
                            e_lo = _best(fid, a, n, pid, wid)
                            e_hi = _best(fid, a + r, n, pid, wid)
                            out.append(make_case(suite, _cid(suite, "Eqn11", fid, pid, wid, r, a, n),
                                                 {**base, "kind": "Eqn11"}, e_lo.value * n**r, e_hi.value,
                                                 rhs0, flagged=not (e_lo.converged and e_hi.converged)))
                        return out

                    tasks.append(task)
    cases = _run(tasks, jobs)
    return SuiteReport.build(suite, cases, band=(-band, band))


def run_bernstein_suite(pairs=None, n_grid=(4, 8, 16, 32, 64), alpha_set=(1, 2), h_factors=(1.0, 0.5),
                        samples=3, seed=0, drift_limit=2.0, jobs=1) -> SuiteReport:
    """||T^(a)|| (2 sin(nh/2))^a / (n^a ||Delta_h^a T||) for random T in T_n and cos(nx); h = factor * pi/n."""
    suite = "bernstein"
    seeds = range(seed, seed + samples)
    tasks = []
    for pid, wid in _pairs(pairs):
        for a in alpha_set:
            for hf in h_factors:
                def task(pid=pid, wid=wid, a=a, hf=hf):
                    out = []
                    for n in n_grid:
                        space = _space(pid, wid, n)
                        h = hf * math.pi / n
                        polys = [(f"trig_random(n={n},seed={s})", random_trig(n, s)) for s in seeds]
                        polys.append(("cos(nx)", TrigPolynomial.monomial(n)))
                        for tid, T in polys:
                            lhs = space.norm(T.derivative(a)) * (2.0 * math.sin(n * h / 2.0)) ** a
                            rhs = n**a * space.norm(shift_difference(T, h, a, method="multiplier"))
                            params = {"p": pid, "w": wid, "alpha": a, "h_factor": hf, "n": n,
                                      "T": tid.replace(f"n={n},", "")}
                            out.append(make_case(suite, _cid(suite, pid, wid, a, hf, params["T"], n), params,
                                                 lhs, rhs, space.norm(T) * n**a))
                    return out

                tasks.append(task)
    cases = _run(tasks, jobs)
    # drift of the per-n maximum ratio across the n grid, for each (p, w, alpha, h)
    drift = {}
    for c in cases:
        if c.ratio is None:
            continue
        key = (c.params["p"], c.params["w"], c.params["alpha"], c.params["h_factor"])
        per_n = drift.setdefault(key, {})
        per_n[c.params["n"]] = max(per_n.get(c.params["n"], 0.0), c.ratio)
    worst = max((max(v.values()) / min(v.values()) for v in drift.values()), default=1.0)
    return SuiteReport.build(suite, cases, band=None,
                             group_keys=("p", "w", "alpha", "h_factor", "T"),
                             checks={f"max-ratio drift across n < {drift_limit:g}x (worst {worst:.4g})": worst < drift_limit})


def run_kfunc_jackson_suite(functions=catalog.SMOOTH_FUNCTIONS, pairs=None, n_grid=(4, 8, 16, 32),
                            mr_set=((1, 1), (2, 2)), alpha=0, jobs=1) -> SuiteReport:
    """Direct estimates against K_m(f^(a+r), 1/n), including the geometric-mean refinement."""
    suite = "kfunc_jackson"
    tasks = []
    for fid in functions:
        for pid, wid in _pairs(pairs):
            for m, r in mr_set:
                def task(fid=fid, pid=pid, wid=wid, m=m, r=r):
                    out = []
                    fa = _fn(fid, alpha)
                    space = _fspace(fid, pid, wid)
                    scale = _norm(fid, alpha, pid, wid)
                    for n in n_grid:
                        if n < r:
                            continue
                        base = {"f": fid, "p": pid, "w": wid, "m": m, "r": r, "alpha": alpha, "n": n}
                        k_lo = _K(fid, alpha, m, 1.0 / n, pid, wid, check=False)
                        k_hi = _K(fid, alpha + r, m, 1.0 / n, pid, wid, check=False)
                        lhs = space.norm(fa - jackson_stechkin(fa, n, r))
                        out.append(make_case(suite, _cid(suite, "b3", fid, pid, wid, m, r, n), {**base, "kind": "b3"},
                                             lhs, k_lo.value, scale, flagged=_k_flag(k_lo)))
                        en = _best(fid, alpha, n, pid, wid)
                        out.append(make_case(suite, _cid(suite, "Eqn12", fid, pid, wid, m, r, n),
                                             {**base, "kind": "Eqn12"}, en.value * n**r, k_hi.value, scale,
                                             flagged=_k_flag(k_hi) or not en.converged))
                        es = np.array([_E(fid, alpha, s, pid, wid) for s in range(1, n + 1)])
                        gm = 0.0 if np.any(es <= 0) else float(np.exp(np.mean(np.log(es))))
                        case = make_case(suite, _cid(suite, "IJ1", fid, pid, wid, m, r, n), {**base, "kind": "IJ1"},
                                         gm * n**r, k_hi.value, scale, flagged=_k_flag(k_hi))
                        # E_s is non-increasing, so the geometric mean cannot exceed E_1
                        if gm > es[0] * (1 + 1e-9):
                            case.status = FAILED
                        out.append(case)
                    return out

                tasks.append(task)
    return SuiteReport.build(suite, _run(tasks, jobs), band=None)


# ===================================================================== inverse theorems


def _tail_sum(fid, pid, wid, start, power, nu_max):
    """sum_{nu=start}^{nu_max} nu^power E_nu; beyond the degree of f every E_nu vanishes."""
    return sum(nu**power * _E(fid, 0, nu, pid, wid) for nu in range(max(start, 1), nu_max + 1))


def _log_integral(func, a, b, nodes=12):
    """int_a^b func(u) du by Gauss-Legendre in log u."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    la, lb = math.log(a), math.log(b)
    s = 0.5 * (la + lb) + 0.5 * (lb - la) * t
    u = np.exp(s)
    return 0.5 * (lb - la) * float(sum(wi * ui * func(ui) for wi, ui in zip(w, u)))


def run_inverse_suite(functions=("exp_cos", "trig_mix"), pairs=LIGHT_PAIRS, n_grid=(2, 4, 8, 16),
                      r_set=(1, 2), t_grid=(0.05, 0.1, 0.2, 0.4), k=1, nu_cap=128, jobs=1):
    """Four reports: K-sum bound, Marchaud inequality, derivative bound and its corollary."""
    names = ("inverse.tters", "inverse.marchaud", "inverse.tersturv", "inverse.corollary")
    tasks = []
    for fid in functions:
        f = _fn(fid)
        nu_max = min(_degree(f), nu_cap)
        for pid, wid in _pairs(pairs):
            for r in r_set:
                def task(fid=fid, pid=pid, wid=wid, r=r, nu_max=nu_max):
                    out = []
                    scale = _norm(fid, 0, pid, wid)
                    for n in n_grid:
                        base = {"f": fid, "p": pid, "w": wid, "r": r, "n": n}
                        kr = _K(fid, 0, r, 1.0 / n, pid, wid, check=False)
                        rhs = sum((nu + 1) ** (r - 1) * _E(fid, 0, nu, pid, wid) for nu in range(n + 1))
                        out.append(make_case(names[0], _cid(names[0], fid, pid, wid, r, n), base,
                                             kr.value * n**r, rhs, scale, flagged=_k_flag(kr)))
                        tail = _tail_sum(fid, pid, wid, n + 1, r - 1, nu_max)
                        lhs = _E(fid, r, n, pid, wid)
                        rhs = (n + 1) ** r * _E(fid, 0, n, pid, wid) + tail
                        out.append(make_case(names[2], _cid(names[2], fid, pid, wid, r, n), {**base, "nu_max": nu_max},
                                             lhs, rhs, scale))
                        kk = _K(fid, r, k, 1.0 / n, pid, wid, check=False)
                        head = sum((nu + 1) ** (k + r - 1) * _E(fid, 0, nu, pid, wid) for nu in range(n + 1))
                        rhs = n ** (-k) * head + tail
                        out.append(make_case(names[3], _cid(names[3], fid, pid, wid, r, n),
                                             {**base, "k": k, "nu_max": nu_max}, kk.value, rhs, scale,
                                             flagged=_k_flag(kk)))
                    for t in t_grid:
                        kt = _K(fid, 0, r, t, pid, wid, check=False)
                        integral = _log_integral(
                            lambda u: _K(fid, 0, r + k, round(float(u), 12), pid, wid, check=False).value
                            / u ** (r + 1), t, 1.0)
                        out.append(make_case(names[1], _cid(names[1], fid, pid, wid, r, t),
                                             {"f": fid, "p": pid, "w": wid, "r": r, "k": k, "t": t},
                                             kt.value, t**r * integral, scale, flagged=_k_flag(kt)))
                    return out

                tasks.append(task)
    cases = _run(tasks, jobs)
    reports = []
    for name in names:
        sub = [c for c in cases if c.suite == name]
        reports.append(SuiteReport.build(name, sub, band=None, xvar="t" if name.endswith("marchaud") else "n"))
    return reports


def run_simultaneous_suite(functions=catalog.SMOOTH_FUNCTIONS, pairs=None, n_grid=(4, 8, 16, 32), r_set=(1, 2),
                           s=1, jobs=1) -> SuiteReport:
    """||f^(k) - (t_n*)^(k)|| n^(r-k) / E_n(f^(r)) and ||f^(k) - T^(k)|| n^(r-k) / Omega_s(f^(r), 1/n), T = W_n f."""
    suite = "simultaneous"
    tasks = []
    for fid in functions:
        for pid, wid in _pairs(pairs):
            for r in r_set:
                def task(fid=fid, pid=pid, wid=wid, r=r):
                    out = []
                    f = _fn(fid)
                    space = _fspace(fid, pid, wid)
                    fr = _fn(fid, r)
                    for n in n_grid:
                        best = _best(fid, 0, n, pid, wid)
                        t_star = best.polynomial
                        W = vallee_poussin(f, n)
                        en_r = _E(fid, r, n, pid, wid)
                        om = space.norm(difference(fr, 1.0 / n, s))
                        for kk in range(r + 1):
                            base = {"f": fid, "p": pid, "w": wid, "r": r, "k": kk, "n": n}
                            scale = _norm(fid, kk, pid, wid)
                            lhs = space.norm(differentiate(f, kk) - differentiate(t_star, kk)) * n ** (r - kk)
                            out.append(make_case(suite, _cid(suite, "fc", fid, pid, wid, r, kk, n),
                                                 {**base, "kind": "fc"}, lhs, en_r, scale,
                                                 flagged=not best.converged))
                            lhs = space.norm(differentiate(f, kk) - differentiate(W, kk)) * n ** (r - kk)
                            out.append(make_case(suite, _cid(suite, "uc", fid, pid, wid, r, kk, n),
                                                 {**base, "kind": "uc", "s": s}, lhs, om, scale))
                    return out

                tasks.append(task)
    return SuiteReport.build(suite, _run(tasks, jobs), band=None)


# ===================================================================== Lipschitz classes


def run_lipschitz_suite(sigma_set=(0.5, 1.0), pairs=(("p=2", "1", 0.1), ("p=2+cos(x)", "power_weight(gamma=0.5)", 0.2)),
                        n_grid=(2, 4, 8, 16, 32), jobs=1) -> SuiteReport:
    """E_n(f_sigma) n^sigma and Omega_rbar(f_sigma, 1/n) n^sigma must be flat in n.

    A flat ratio is the same as E_n having slope -sigma and Omega slope +sigma in delta.
    """
    suite = "lipschitz"
    tasks = []
    for sigma in sigma_set:
        rbar = math.floor(sigma / 2) + 1
        fid = f"lacunary(sigma={sigma!r})"
        for pid, wid, tol in pairs:
            def task(sigma=sigma, rbar=rbar, fid=fid, pid=pid, wid=wid, tol=tol):
                out = []
                f = _fn(fid)
                space = _fspace(fid, pid, wid)
                scale = _norm(fid, 0, pid, wid)
                for n in n_grid:
                    base = {"f": fid, "p": pid, "w": wid, "sigma": sigma, "band": tol, "n": n}
                    e = _best(fid, 0, n, pid, wid)
                    out.append(make_case(suite, _cid(suite, "E", fid, pid, wid, n), {**base, "kind": "E_n", "rbar": rbar},
                                         e.value, float(n) ** (-sigma), scale, flagged=not e.converged))
                    om = space.norm(difference(f, 1.0 / n, rbar))
                    out.append(make_case(suite, _cid(suite, "Omega", fid, pid, wid, n),
                                         {**base, "kind": "Omega", "rbar": rbar}, om, float(n) ** (-sigma), scale))
                return out

            tasks.append(task)
    cases = _run(tasks, jobs)
    reports = []
    # bands differ per case family; build one report per band and merge
    verdict = True
    groups = []
    worst = None
    for tol in sorted({c.params["band"] for c in cases}):
        sub = SuiteReport.build(suite, [c for c in cases if c.params["band"] == tol], band=(-tol, tol))
        reports.append(sub)
        verdict &= sub.verdict == "pass"
        groups += sub.groups
        if sub.slope is not None and (worst is None or abs(sub.slope) > abs(worst)):
            worst = sub.slope
    out = SuiteReport.build(suite, cases, band=None)
    out.groups = groups
    out.slope = worst
    out.band = None
    out.verdict = "pass" if verdict and out.verdict == "pass" else "fail"
    return out


# ===================================================================== boundedness


def _operator_family(f, n_grid):
    """(operator id, params, callable f -> Op f) for the bounded-operator battery."""
    ops = []
    for off in (0.0, 0.25, 0.5):
        ops.append(("T_Q", {"offset": off}, lambda g, off=off: averaging(g, OpenSetFamily.unit_cover(off))))
    for h in (0.01, 0.1, 1.0, math.pi):
        ops.append(("T_h", {"h": h}, lambda g, h=h: steklov(g, h)))
    for lam in (0.5, 1.0, 4.0):
        for tau in (0.0, 1.0):
            ops.append(("S_lambda_tau", {"lambda": lam, "tau": tau},
                        lambda g, lam=lam, tau=tau: steklov_translated(g, lam, tau)))
    for n in n_grid:
        for kk in (1, 2, 3):
            m = n // kk + 1
            if n >= kk and kk <= 2 * m - 2:
                ops.append(("D_nk", {"n": n, "k": kk}, lambda g, n=n, kk=kk: jackson_stechkin(g, n, kk)))
    for n in n_grid:
        ops.append(("W_n", {"n": n}, lambda g, n=n: vallee_poussin(g, n)))
    for kern in ("bump", "poisson", "gauss"):
        for t in (0.01, 0.1, 1.0):
            ops.append(("convolution", {"kernel": kern, "t": t}, lambda g, kern=kern, t=t: approx_identity(g, kern, t)))
    return ops


def _dual_estimate(f, space, dual_space, testers):
    """max over testers g of int |f g| / ||g||_{p',w'} on the shared nodes."""
    fv = space.values(f)
    best = 0.0
    for g in testers:
        gv = g if isinstance(g, np.ndarray) else dual_space.values(g)
        ng = dual_space.norm(gv)
        if ng > 0:
            best = max(best, float(np.sum(space.rule.weights * np.abs(fv * gv))) / ng)
    return best


def _norming_tester(f, space):
    """omega |f/||f|||^{p-1}: attains the duality pairing."""
    fv = space.values(f)
    lam = space.norm(fv)
    return space.wv * np.abs(fv / lam) ** (space.pv - 1.0)


def _dual_space(space):
    p = conjugate_exponent(space.p)
    w = dual_weight(space.weight, space.p)
    return LebesgueSpace(p, w, nodes=space.resolution, extra_singular=space.singular)


def run_boundedness_suite(functions=catalog.SMOOTH_FUNCTIONS + ("trig_random(n=8,seed=0)",), pairs=None,
                          n_grid=(2, 4, 8, 16, 32, 64), drift_limit=0.25, jobs=1) -> SuiteReport:
    """||Op f|| / ||f|| on the base rule and on a refined rule; drift between the two must stay below 25%."""
    suite = "boundedness"
    tasks = []
    for fid in functions:
        for pid, wid in _pairs(pairs):
            def task(fid=fid, pid=pid, wid=wid):
                out = []
                f = _fn(fid)
                s1 = _fspace(fid, pid, wid)
                s2 = _fspace(fid, pid, wid, 2)
                nf1, nf2 = s1.norm(f), s2.norm(f)
                for name, params, op in _operator_family(f, n_grid):
                    key = ("op", name, tuple(sorted(params.items())), fid)
                    g = _cached(key, lambda op=op: op(f))
                    r1 = s1.norm(g) / nf1
                    r2 = s2.norm(g) / nf2
                    drift = abs(r2 - r1) / max(r1, 1e-300)
                    case = make_case(suite, _cid(suite, name, *[f"{k}={v}" for k, v in sorted(params.items())],
                                                 fid, pid, wid),
                                     {"op": name, **params, "f": fid, "p": pid, "w": wid,
                                      "ratio_refined": r2, "drift": drift},
                                     s1.norm(g), nf1, nf1)
                    if drift >= drift_limit:
                        case.status = FAILED
                    out.append(case)
                # L^1 embedding on T and on a subset with 1/4 < |B| <= 2
                l1 = float(np.sum(s1.rule.weights * np.abs(s1.values(f))))
                out.append(make_case(suite, _cid(suite, "L1", "T", fid, pid, wid),
                                     {"op": "L1_embedding", "B": "T", "f": fid, "p": pid, "w": wid}, l1, nf1, nf1))
                B = (-1.0, 1.0)
                sb = LebesgueSpace(s1.p, s1.weight, B=B, nodes=s1.resolution)
                fb = sb.values(f)
                out.append(make_case(suite, _cid(suite, "L1", "B", fid, pid, wid),
                                     {"op": "L1_embedding", "B": "[-1,1]", "f": fid, "p": pid, "w": wid},
                                     float(np.sum(sb.rule.weights * np.abs(fb))), sb.norm(fb), nf1))
                # duality sandwich: ||f||/2 <= sup <= 2||f||
                ds = _dual_space(s1)
                testers = [_norming_tester(f, s1), np.ones(s1.nodes.size), np.cos(s1.nodes), np.sin(s1.nodes)]
                est = _dual_estimate(f, s1, ds, testers)
                out.append(make_case(suite, _cid(suite, "duality", fid, pid, wid),
                                     {"op": "duality", "f": fid, "p": pid, "w": wid}, est, nf1, nf1,
                                     bound=2.0, lower=0.5))
                return out

            tasks.append(task)
    cases = _run(tasks, jobs)
    worst_drift = max((c.params.get("drift", 0.0) for c in cases), default=0.0)
    th = [c.ratio for c in cases if c.params.get("op") == "T_h" and c.params["p"] == "p=2" and c.params["w"] == "1"
          and c.ratio is not None]
    checks = {
        f"refinement drift < {drift_limit:g} (worst {worst_drift:.3g})": worst_drift < drift_limit,
        f"T_h ratio <= 1+1e-6 at p=2, w=1 (max {max(th, default=0.0):.12g})": max(th, default=0.0) <= 1 + 1e-6,
    }
    return SuiteReport.build(suite, cases, band=None, xvar=None, group_keys=("op", "p", "w"), checks=checks)


# ===================================================================== realization and K-functional


def run_realization_suite(functions=catalog.SMOOTH_FUNCTIONS, pairs=None, delta_grid=(1.0, 0.3, 0.1, 0.03),
                          r_set=(1, 2), spread_limit=100.0, tend_grid=(1.0, 0.3, 0.1, 0.03, 0.01),
                          random_n=(4, 8, 16), seed=0, jobs=1) -> SuiteReport:
    """Omega_r/K_r over (f, delta) per (r, p, w); s1, s2, realization bounds and K monotonicity."""
    suite = "realization"
    tasks = []
    for fid in functions:
        for pid, wid in _pairs(pairs):
            for r in r_set:
                def task(fid=fid, pid=pid, wid=wid, r=r):
                    out = []
                    f = _fn(fid)
                    space = _fspace(fid, pid, wid)
                    scale = _norm(fid, 0, pid, wid)
                    fr_norm = _norm(fid, r, pid, wid)
                    ks = []
                    for d in sorted(set(delta_grid) | set(tend_grid), reverse=True):
                        kres = _K(fid, 0, r, d, pid, wid)
                        ks.append((d, kres.value))
                        if d not in delta_grid:
                            continue
                        base = {"f": fid, "p": pid, "w": wid, "r": r, "delta": d}
                        om = space.norm(difference(f, d, r))
                        out.append(make_case(suite, _cid(suite, "s3", fid, pid, wid, r, d), {**base, "kind": "s3"},
                                             om, kres.value, scale, flagged=_k_flag(kres)))
                        out.append(make_case(suite, _cid(suite, "s1", fid, pid, wid, r, d), {**base, "kind": "s1"},
                                             om, d**r * fr_norm, scale))
                        A = realization_operator(f, d, r)
                        out.append(make_case(suite, _cid(suite, "A-error", fid, pid, wid, r, d),
                                             {**base, "kind": "realization-error"}, space.norm(f - A), om, scale))
                        out.append(make_case(suite, _cid(suite, "A-deriv", fid, pid, wid, r, d),
                                             {**base, "kind": "realization-derivative"},
                                             d**r * space.norm(A.derivative(r)), om, scale))
                    # K non-decreasing in delta, and small for the smallest delta
                    ks.sort()
                    vals = [v for _, v in ks]
                    mono = all(b >= a * (1 - 1e-6) - 1e-12 for a, b in zip(vals, vals[1:]))
                    strict = all(b > a for a, b in zip(vals, vals[1:]))
                    c = make_case(suite, _cid(suite, "kftend", fid, pid, wid, r),
                                  {"f": fid, "p": pid, "w": wid, "r": r, "kind": "kftend",
                                   "monotone": mono, "strict": strict}, vals[0], 0.05 * scale, scale, bound=1.0)
                    if not mono:
                        c.status = FAILED
                    out.append(c)
                    return out

                tasks.append(task)
    for pid, wid in _pairs(pairs):
        for r in r_set:
            def s2_task(pid=pid, wid=wid, r=r):
                out = []
                for n in random_n:
                    fid = f"trig_random(n={n},seed={seed})"
                    T = _fn(fid)
                    space = _fspace(fid, pid, wid)
                    kres = _K(fid, 0, r, math.pi / n, pid, wid)
                    lhs = space.norm(T.derivative(r)) / n**r
                    out.append(make_case(suite, _cid(suite, "s2", fid, pid, wid, r, n),
                                         {"f": f"trig_random(seed={seed})", "p": pid, "w": wid, "r": r, "n": n, "kind": "s2"},
                                         lhs, kres.value, _norm(fid, 0, pid, wid), flagged=_k_flag(kres)))
                return out

            tasks.append(s2_task)
    cases = _run(tasks, jobs)
    return SuiteReport.build(suite, cases, band=None, xvar="delta", group_keys=("kind", "r", "p", "w"),
                             spread_limit=None, checks=_realization_checks(cases, spread_limit))


def _realization_checks(cases, spread_limit):
    groups = {}
    for c in cases:
        if c.params.get("kind") == "s3" and c.ratio is not None and c.ratio > 0:
            groups.setdefault((c.params["r"], c.params["p"], c.params["w"]), []).append(c.ratio)
    worst = max((max(v) / min(v) for v in groups.values()), default=1.0)
    return {f"Omega/K spread c2/c1 < {spread_limit:g} per (r, p, w) (worst {worst:.4g})": worst < spread_limit}


# ===================================================================== invariants


def _generic(f: TrigPolynomial) -> PeriodicFunction:
    """The same function without its coefficient representation, forcing the quadrature paths."""
    return PeriodicFunction(lambda x: f(x), smoothness="smooth", name=f"generic({f.name})")


def run_invariants_suite(functions=catalog.SMOOTH_FUNCTIONS, pairs=None, jobs=1, tol=1e-9) -> SuiteReport:
    """Exact norm identities and inequalities, plus recorded constants of the auxiliary lemmas."""
    suite = "invariants"
    tasks = []
    for pid, wid in _pairs(pairs):
        def task(pid=pid, wid=wid):
            out = []
            fids = list(functions)
            for i, fid in enumerate(fids):
                f = _fn(fid)
                space = _fspace(fid, pid, wid)
                nf = space.norm(f)
                base = {"f": fid, "p": pid, "w": wid}

                def add(kind, lhs, rhs, bound=None, lower=None, **extra):
                    out.append(make_case(suite, _cid(suite, kind, fid, pid, wid,
                                                     *[f"{k}={v}" for k, v in sorted(extra.items())]),
                                         {**base, "kind": kind, **extra}, lhs, rhs, nf, bound=bound, lower=lower))

                for c in (-3.0, 0.5, 7.0):
                    add("homogeneity", space.norm(f * c), abs(c) * nf, 1 + tol, 1 - tol, c=c)
                g = _fn(fids[(i + 1) % len(fids)])
                add("triangle", space.norm(f + g), nf + space.norm(g), 1 + tol, pair=fids[(i + 1) % len(fids)])
                rho = space.modular(space.values(f), nf)
                rho = math.inf if rho is INFINITE else rho
                add("unit-ball", rho, 1.0, 1.0 + 1e-12, 1.0 - 1e-6)
                ds = _dual_space(space)
                for gid in fids:
                    gv = ds.values(_fn(gid))
                    lhs = float(np.sum(space.rule.weights * np.abs(space.values(f) * gv)))
                    add("hoelder", lhs, 2.0 * nf * ds.norm(gv), 1.0, tester=gid)
                # embedding: p <= q = p + 1 with constant (omega(T) + 1)
                q = LebesgueSpace(_shift_exponent(space.p, 1.0), space.weight, nodes=space.resolution)
                add("embedding", nf, (space.weight.total + 1.0) * q.norm(f), 1.0, q="p+1")
                l1 = float(np.sum(space.rule.weights * np.abs(space.values(f))))
                add("onL1", l1, nf)
                est = _dual_estimate(f, space, ds, [_norming_tester(f, space), np.ones(space.nodes.size)])
                add("duality", est, nf, 2.0, 0.5)
                for d in (0.1, 0.5):
                    for r in (1, 2):
                        add("modprop-bounded", space.norm(difference(f, d, r)), nf, None, delta=d, r=r)
                        om_sum = space.norm(difference(f + g, d, r))
                        add("modprop-subadditive", om_sum,
                            space.norm(difference(f, d, r)) + space.norm(difference(g, d, r)), 1 + tol, delta=d, r=r)
                    omd = space.norm(difference(f, d, 1))
                    for h in (d / 4, d / 2, d):
                        add("bukun", space.norm(difference(f, h, 1)), omd, None, delta=d, h=h)
                    add("bukunA", space.norm(f - r_delta(f, d)), omd, None, delta=d)
                    add("lm05", d * space.norm(r_delta(f, d).derivative()), omd, None, delta=d)
                    # commutation checks: exact multiplier path vs quadrature path
                    fd = f.derivative()
                    lhs = space.norm(r_delta_derivative(f, d) - r_delta(fd, d))
                    add("akgunArx-R", lhs, space.norm(r_delta(fd, d)), 1e-8, delta=d)
                    gen = _generic(fd)
                    lhs = space.norm(steklov(f, d).derivative() - steklov(gen, d))
                    add("akgunArx-T", lhs, space.norm(steklov(fd, d)), 1e-8, delta=d)
                    for r in (2, 3):
                        inner = r_delta(f, d, r - 1).derivative(r - 1)
                        lhs = space.norm(r_delta(f, d, r).derivative(r) - r_delta_derivative(inner, d))
                        add("da", lhs, space.norm(r_delta(f, d, r).derivative(r)), 1e-8, delta=d, r=r)
            return out

        tasks.append(task)
    return SuiteReport.build(suite, _run(tasks, jobs), band=None, xvar=None, group_keys=("kind",))


def _shift_exponent(p, c):
    from .weights import ExponentFunction

    return ExponentFunction(lambda x: p(x) + c, name=f"{p.name}+{c:g}")


# ===================================================================== registry


SUITES = {
    "jackson": run_jackson_suite,
    "bernstein": run_bernstein_suite,
    "kfunc_jackson": run_kfunc_jackson_suite,
    "inverse": run_inverse_suite,
    "simultaneous": run_simultaneous_suite,
    "lipschitz": run_lipschitz_suite,
    "boundedness": run_boundedness_suite,
    "realization": run_realization_suite,
    "invariants": run_invariants_suite,
}


def run_suite(name: str, **params) -> list:
    """Run a suite by name; always returns a list of reports."""
    try:
        fn = SUITES[name]
    except KeyError:
        raise ConfigurationError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    try:
        out = fn(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for suite {name!r}: {exc}") from exc
    return out if isinstance(out, list) else [out]
