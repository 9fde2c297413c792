import json

import pytest

from prismlab.suites import SCHEMA_VERSION, SUITES, SuiteConfig, _Collector, run_suite


def test_unknown_suite_rejected():
    with pytest.raises(ValueError):
        run_suite(SuiteConfig("nope"))


@pytest.mark.parametrize("kw", [{"M": 0}, {"L": -1}, {"E": "u-3"}, {"p": 3, "E": "u-2"}])
def test_bad_config_rejected(kw):
    with pytest.raises(ValueError):
        SuiteConfig("negative-control", **kw).validate()


def test_grid():
    grid = SuiteConfig("frobenius-unit", p=3).grid()
    assert [str(E) for E in grid] == [str(E) for E in SuiteConfig("x", p=3, E=None).grid()]
    assert len(grid) == 3 and all(E.p == 3 for E in grid)
    assert len(SuiteConfig("frobenius-unit", p=5, E="u-5").grid()) == 1


def test_crash_becomes_error_record():
    col = _Collector()
    col.run("boom", lambda: 1 / 0)
    col.run("fine", lambda: (True, {"big": 2**80}))
    assert [r.status for r in col.records] == ["error", "pass"]
    assert "ZeroDivisionError" in col.records[0].detail["error"]
    assert col.records[1].detail["big"] == str(2**80)


def test_report_shape_and_determinism():
    docs = [run_suite(SuiteConfig("negative-control", p=2, seed=3)).to_json(timings=False) for _ in range(2)]
    assert json.dumps(docs[0], sort_keys=True) == json.dumps(docs[1], sort_keys=True)
    d = docs[0]
    assert d["schema"] == SCHEMA_VERSION and d["passed"] and d["suite"] in SUITES
    names = [c["name"] for c in d["checks"]]
    assert names == sorted(names) and len(names) == 12
    assert set(d["checks"][0]) == {"name", "status", "detail"}
