import json

import pytest

from synergy import report
from synergy.decomposition import decompose

from conftest import COPY, XOR, records_from


def test_fmt_rules():
    assert report.fmt(-0.0001, 2) == "0.00"
    assert report.fmt(None, 2) == ""
    assert report.fmt_mbits(-1.0) == "-1000.0"
    assert report.fmt_pct(179.7279) == "179.73"


def test_decomposition_csv_footer():
    res = decompose(records_from([("X", c) for c in XOR] + [("C", c) for c in COPY * 2]), "state")
    lines = report.decomposition_csv(res).splitlines()
    assert lines[0] == "key,n,t_mbits,weighted_mbits,percent"
    assert lines[-2].startswith("T0,,-278.2,-278.2,100.00")
    assert lines[-1] == "TOTAL,8,-278.2,-278.2,100.00"
    assert len(report.decomposition_csv(res, top=1).splitlines()) == 4


def test_json_rejects_nan():
    with pytest.raises(ValueError):
        report.json_text({"x": float("nan")})


def test_atomic_write_replaces_and_cleans_up(tmp_path):
    target = tmp_path / "r.csv"
    report.atomic_write(str(target), "a\n")
    assert target.read_text() == "a\n"
    with pytest.raises(RuntimeError):
        with report.atomic_open(str(target)) as fh:
            fh.write("partial")
            raise RuntimeError
    assert target.read_text() == "a\n"
    assert [p.name for p in tmp_path.iterdir()] == ["r.csv"]


def test_manifest(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    src = tmp_path / "in.csv"
    src.write_text("x\n")
    man = report.manifest("compute", {"level": "state"}, [str(src)], {"state": 3})
    assert man["timestamp"] == "1970-01-01T00:00:00+00:00"
    assert man["inputs"][str(src)] == "73cb3858a687a8494ca3323053016282f3dad39d42cf62ca4e79dda2aac7d9ac"
    assert json.loads(report.json_text(man)) == man
