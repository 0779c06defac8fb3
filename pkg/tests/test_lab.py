import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from vexlab import lab
from vexlab.errors import ConfigurationError
from vexlab.lab import FAILED, OK, SKIPPED, SuiteReport, loglog_slope, make_case


def test_degenerate_rhs_is_skipped():
    c = make_case("s", "a", {}, 1.0, 1e-20, scale=1.0)
    assert c.status == SKIPPED and c.ratio is None
    c = make_case("s", "b", {}, 1.0, 1e-10, scale=1.0)
    assert c.status == OK


def test_bounds_fail_cases():
    assert make_case("s", "a", {}, 3.0, 1.0, bound=2.0).status == FAILED
    assert make_case("s", "a", {}, 0.1, 1.0, lower=0.5).status == FAILED
    assert make_case("s", "a", {}, 1.0, 1.0, bound=2.0, lower=0.5).status == OK


def test_loglog_slope():
    assert loglog_slope([1, 2, 4, 8], [3, 6, 12, 24]) == pytest.approx(1.0)
    assert loglog_slope([1, 2], [1, 2]) is None


def _cases(slope):
    return [make_case("demo", f"demo/n={n:03d}", {"n": n, "f": "a"}, 2.0 * n**slope, 1.0) for n in (4, 8, 16, 32)]


def test_report_verdict_follows_band():
    assert SuiteReport.build("demo", _cases(0.05)).verdict == "pass"
    bad = SuiteReport.build("demo", _cases(0.5))
    assert bad.verdict == "fail"
    assert bad.groups[0]["in_band"] is False
    assert SuiteReport.build("demo", _cases(0.0), checks={"extra": False}).verdict == "fail"


def test_failed_case_fails_report():
    cases = _cases(0.0) + [make_case("demo", "demo/x", {"n": 64, "f": "a"}, 5.0, 1.0, bound=1.0)]
    rep = SuiteReport.build("demo", cases)
    assert rep.verdict == "fail" and len(rep.failed_cases()) == 1


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 100), st.floats(1e-6, 1e6), st.floats(1e-6, 1e6)), min_size=1, max_size=8))
def test_json_round_trip_is_byte_identical(rows):
    cases = [make_case("demo", f"demo/{i}", {"n": n, "f": "a"}, a, b) for i, (n, a, b) in enumerate(rows)]
    rep = SuiteReport.build("demo", cases)
    text = rep.to_json()
    back = SuiteReport.from_json(text)
    assert back.to_json() == text
    assert back.to_csv() == rep.to_csv()
    assert back.to_tsv() == rep.to_tsv()


def test_json_keeps_non_finite_values():
    rep = SuiteReport.build("demo", [make_case("demo", "x", {"n": 1}, math.inf, 1.0)])
    d = json.loads(rep.to_json())
    assert d["cases"][0]["ratio"] == math.inf
    assert rep.verdict == "fail"


def test_csv_and_tsv_layout():
    rep = SuiteReport.build("demo", _cases(0.0))
    lines = rep.to_csv().splitlines()
    assert lines[0] == "id,f,n,lhs,rhs,ratio,status"
    assert len(lines) == 5
    blocks = [b for b in rep.to_tsv().split("\n\n") if b.strip()]
    assert all(len(row.split("\t")) == 2 for row in blocks[0].splitlines() if not row.startswith("#"))


def test_random_trig_is_seeded():
    a, b = lab.random_trig(6, seed=3), lab.random_trig(6, seed=3)
    assert a.equals(b)
    assert not a.equals(lab.random_trig(6, seed=4))
    assert a.degree == 6


def test_unknown_suite():
    with pytest.raises(ConfigurationError):
        lab.run_suite("nope")


def test_small_bernstein_run():
    (rep,) = lab.run_suite("bernstein", n_grid=(4, 8, 16), samples=2, pairs=[("p=2", "1")])
    assert rep.cases and rep.max_ratio is not None and math.isfinite(rep.max_ratio)
    assert {c.status for c in rep.cases} <= {OK, SKIPPED}


def test_small_jackson_run_deterministic():
    kw = dict(functions=("exp_cos",), pairs=[("p=2", "1")], n_grid=(4, 8, 16))
    a = lab.run_suite("jackson", **kw)[0].to_json()
    lab.clear_caches()
    b = lab.run_suite("jackson", **kw)[0].to_json()
    assert a == b
