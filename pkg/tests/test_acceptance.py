"""Acceptance criteria, one pass/fail line each (printed in the terminal summary).

Heavy suites run once per session through the ``suites`` fixture; their
wall-clock times add up to the full-run budget checked by criterion 10.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from vexlab import Weight, best_approximation, classify_weight, jackson_kernel, lab, luxemburg_norm
from vexlab.catalog import SMOOTH_FUNCTIONS, resolve_function
from vexlab.errors import ConfigurationError

FULL_RUN_BUDGET = 600.0  # seconds, all suites


def report(key, passed, detail):
    ACCEPTANCE_LINES.append((key, passed, detail))
    print(f"criterion {key}: {'PASS' if passed else 'FAIL'} {detail}")


class _Suites:
    def __init__(self):
        self.reports = {}
        self.seconds = {}

    def __call__(self, name):
        if name not in self.reports:
            t = time.perf_counter()
            reps = lab.run_suite(name)
            self.seconds[name] = time.perf_counter() - t
            self.reports[name] = {r.suite: r for r in reps}
        return self.reports[name]


@pytest.fixture(scope="module")
def suites():
    return _Suites()


# ---------------------------------------------------------------- 1


def test_criterion_1_closed_form_norms():
    t = time.perf_counter()
    one = luxemburg_norm(1.0, 2).value
    sin = luxemburg_norm("sin(x)", 2).value
    dt = time.perf_counter() - t
    e1, e2 = abs(one - math.sqrt(2 * math.pi)), abs(sin - math.sqrt(math.pi))
    ok = e1 <= 1e-8 and e2 <= 1e-8 and dt < 1.0
    report("1", ok, f"|err 1|={e1:.1e} |err sin|={e2:.1e} time={dt:.3f}s (tol 1e-8, < 1 s)")
    assert ok


# ---------------------------------------------------------------- 2


def _kappa_facts(m_of):
    bad_kappa, bad_moment, bad_norm, invalid = [], [], [], []
    worst_norm = 0.0
    for r in (1, 2, 3):
        for n in range(2, 33):
            try:
                J = jackson_kernel(r, n, m_of(r, n))
            except ConfigurationError:
                invalid.append((r, n))
                continue
            lo, hi = 1.5 / math.sqrt(r) * n ** (2 * r - 1), 2.5 / math.sqrt(r) * n ** (2 * r - 1)
            if not lo <= J.kappa <= hi:
                bad_kappa.append((r, n, round(J.kappa / n ** (2 * r - 1) * math.sqrt(r), 3)))
            err = abs(J.integral() - 1.0)
            worst_norm = max(worst_norm, err)
            if err > 1e-8:
                bad_norm.append((r, n))
            for i in range(1, 2 * r - 1):
                if not J.moment(i) < n ** (-i):
                    bad_moment.append((r, n, i))
    return bad_kappa, bad_moment, bad_norm, invalid, worst_norm


def test_criterion_2_jackson_kernel_facts():
    t = time.perf_counter()
    bk, bm, bn, inv, worst = _kappa_facts(lambda r, n: n // r + 1)
    dt = time.perf_counter() - t
    report("2.kappa", not bk and not inv,
           f"kappa in [3/(2 sqrt r), 5/(2 sqrt r)] n^(2r-1) with m=floor(n/r)+1: {len(bk)} of 93 (r,n) outside,"
           f" {len(inv)} violate r <= 2m-2; first {bk[:3]}")
    report("2.norm", not bn, f"(1/pi) int J = 1: worst |err| {worst:.1e} (tol 1e-8)")
    report("2.moment", not bm, f"(1/pi) int |u|^i J < n^-i, 1 <= i <= 2r-2: {len(bm)} violations; first {bm[:3]}")
    report("2.time", dt < 30, f"{dt:.1f}s (< 30 s)")
    bk2, bm2, _, inv2, _ = _kappa_facts(lambda r, n: n)
    ACCEPTANCE_LINES.append(("2.info", None, f"with kernel parameter m = n: kappa outside band for {len(bk2)} (r,n), "
                                             f"moment violations {len(bm2)}"))
    assert not bn and dt < 30
    assert not bk and not inv and not bm


# ---------------------------------------------------------------- 3


def test_criterion_3_parseval_oracle():
    worst, where = 0.0, None
    for fid in SMOOTH_FUNCTIONS:
        f = resolve_function(fid)
        scale = float(np.linalg.norm(f.c))
        for n in range(1, 17):
            tail = math.sqrt(2 * math.pi * 2 * float(np.sum(np.abs(f.c[n + 1 :]) ** 2)))
            e = best_approximation(f, n, 2.0).value
            # tails below 1e-12 ||c|| are compared at that absolute floor
            err = abs(e - tail) / max(tail, 1e-12 * scale)
            if err > worst:
                worst, where = err, (fid, n)
    ok = worst <= 1e-4
    report("3", ok, f"max relative |E_n - Parseval tail| = {worst:.1e} at {where} (tol 1e-4)")
    assert ok


# ---------------------------------------------------------------- 4


def test_criterion_4_jackson_direct(suites):
    rep = suites("jackson")["jackson"]
    ok_all = True
    for r in (1, 2):
        groups = [g for g in rep.groups if g["group"].get("r") == r and g["group"].get("kind") == "EqnTUR"]
        slopes = [g["slope"] for g in groups]
        spreads = [g["spread"] for g in groups]
        ok = all(abs(s) <= 0.15 for s in slopes) and all(sp < 10 for sp in spreads)
        ok_all &= ok
        report(f"4.r{r}", ok, f"EqnTUR slopes in [{min(slopes):+.3f}, {max(slopes):+.3f}] (band +-0.15),"
                              f" max spread {max(spreads):.2f} (< 10), {len(groups)} groups")
    assert ok_all


# ---------------------------------------------------------------- 5


def test_criterion_5_bernstein(suites):
    rep = suites("bernstein")["bernstein"]
    drift = [v for k, v in rep.checks.items() if "drift" in k]
    ok = rep.max_ratio is not None and math.isfinite(rep.max_ratio) and all(rep.checks.values()) \
        and not rep.failed_cases()
    report("5", ok, f"max ratio {rep.max_ratio:.3f}; checks {sorted(rep.checks)} -> {sorted(rep.checks.values())}")
    assert ok and drift


# ---------------------------------------------------------------- 6


def test_criterion_6_realization(suites):
    rep = suites("realization")["realization"]
    spreads = [g["spread"] for g in rep.groups if g.get("spread") is not None]
    check = {k: v for k, v in rep.checks.items() if "spread" in k}
    ok = bool(check) and all(check.values())
    report("6", ok, f"{next(iter(check), 'no spread check')}; {len(spreads)} groups")
    assert ok


# ---------------------------------------------------------------- 7


def test_criterion_7_lipschitz(suites):
    rep = suites("lipschitz")["lipschitz"]
    ok_all = True
    for sigma in (0.5, 1.0):
        groups = [g for g in rep.groups if g["group"].get("sigma") == sigma]
        parts = []
        ok = True
        for g in groups:
            kind = g["group"]["kind"]
            target = -sigma if kind == "E_n" else sigma
            measured = g["slope"] + target  # ratios carry n^sigma
            band = g["group"]["band"]
            good = abs(measured - target) <= band
            ok &= good
            parts.append(f"{kind}@{g['group']['p']}: {measured:+.3f} (target {target:+.1f} +-{band})")
        ok_all &= ok
        report(f"7.sigma={sigma:g}", ok, "; ".join(parts))
    assert ok_all


# ---------------------------------------------------------------- 8


def test_criterion_8_boundedness(suites):
    rep = suites("boundedness")["boundedness"]
    finite = rep.max_ratio is not None and math.isfinite(rep.max_ratio)
    ok = finite and all(rep.checks.values()) and not rep.failed_cases()
    report("8", ok, f"max ratio {rep.max_ratio:.3f}; " + "; ".join(f"{k}: {v}" for k, v in sorted(rep.checks.items())))
    assert ok


# ---------------------------------------------------------------- 9


def test_criterion_9_weight_classification():
    good = classify_weight(Weight.power(0.5), 2.0)
    bad = classify_weight(Weight.power(-1.5), 2.0)
    ok = good.verdict == "in" and bad.verdict == "not-in" and bad.growth >= 4.0
    report("9", ok, f"gamma=0.5: {good.verdict} (estimates {[round(e, 3) for e in good.estimates]});"
                    f" gamma=-1.5: {bad.verdict} (growth {bad.growth:.2f}x, levels 8->12)")
    assert ok


# ---------------------------------------------------------------- 10


def test_criterion_10_invariants_and_full_run(suites):
    names = ("invariants", "inverse", "simultaneous", "kfunc_jackson")
    bad = []
    for name in names:
        for rep in suites(name).values():
            failed = rep.failed_cases()
            nonfinite = [c for c in rep.cases if c.ratio is not None and not math.isfinite(c.ratio)]
            if failed or nonfinite:
                bad.append(f"{rep.suite}: {len(failed)} failed, {len(nonfinite)} non-finite")
    for name in lab.SUITES:
        suites(name)
    total = sum(suites.seconds.values())
    ok_cases = not bad
    ok_time = total < FULL_RUN_BUDGET
    times = ", ".join(f"{k} {v:.0f}s" for k, v in sorted(suites.seconds.items()))
    report("10.cases", ok_cases, "zero failed non-degenerate cases" if ok_cases else "; ".join(bad))
    report("10.time", ok_time, f"full run {total:.0f}s (< {FULL_RUN_BUDGET:.0f} s): {times}")
    assert ok_cases and ok_time
