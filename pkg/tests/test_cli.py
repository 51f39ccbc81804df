import csv
import io
import json

import pytest

from synergy.cli import main
from synergy.report import fmt, fmt_mbits, fmt_pct

from conftest import DATA

FIX = DATA / "fixture"
SAMPLE = str(FIX / "sample.csv")
OVERSHOOT = str(DATA / "overshoot_sample.csv")


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return rc, out, err


def test_ingest_writes_sample_stats_and_manifest(tmp_path, capsys):
    out, stats = tmp_path / "s.csv", tmp_path / "st.json"
    rc, _, _ = run(capsys, "ingest", "--companies", FIX / "companies.csv", "--concordance", FIX / "concordance.csv",
                   "--out", out, "--stats", stats)
    assert rc == 0
    s = json.loads(stats.read_text())
    assert s["downloaded"] == 10000
    assert s["downloaded"] == s["usable_state"] + sum(v for k, v in s.items()
                                                      if k.startswith(("dropped_", "skipped_")))
    assert len(s["diagnostics"]) == s["skipped_malformed"]
    man = json.loads((tmp_path / "s.csv.manifest.json").read_text())
    assert man["command"] == "ingest" and man["n_per_scale"]["state"] == s["usable_state"]
    assert len(man["inputs"]) == 2 and all(len(d) == 64 for d in man["inputs"].values())


def test_ingest_filters(tmp_path, capsys):
    out, stats = tmp_path / "s.csv", tmp_path / "st.json"
    rc, _, _ = run(capsys, "ingest", "--companies", FIX / "companies.csv", "--concordance", FIX / "concordance.csv",
                   "--out", out, "--stats", stats, "--exclude-nace", "84,47", "--year-min", "2012")
    assert rc == 0
    s = json.loads(stats.read_text())
    assert s["dropped_excluded_nace"] > 0 and s["dropped_before_year_min"] > 0
    nace = {row["nace3"][:2] for row in csv.DictReader(out.open())}
    assert not nace & {"84", "47"}


def test_ingest_with_rules_and_aliases(tmp_path, capsys):
    rules = tmp_path / "rules.csv"
    rules.write_text("code,flags\n47,kis\n")
    aliases = tmp_path / "aliases.csv"
    aliases.write_text("old_cbsa_code,new_cbsa_code\n10002,10001\n")
    out, stats = tmp_path / "s.csv", tmp_path / "st.json"
    rc, _, _ = run(capsys, "ingest", "--companies", FIX / "companies.csv", "--concordance", FIX / "concordance.csv",
                   "--out", out, "--stats", stats, "--nace-rules", rules, "--aliases", aliases)
    assert rc == 0
    rows = list(csv.DictReader(out.open()))
    assert all(r["kis"] == "1" for r in rows if r["nace3"].startswith("47"))
    assert "10002" not in {r["cbsa_code"] for r in rows}


def test_missing_concordance_exit_2(tmp_path, capsys):
    rc, _, err = run(capsys, "ingest", "--companies", FIX / "companies.csv", "--concordance", tmp_path / "nope.csv",
                     "--out", tmp_path / "s.csv", "--stats", tmp_path / "st.json")
    assert rc == 2 and "nope.csv" in err
    assert not (tmp_path / "s.csv").exists()


def test_empty_companies_exit_2(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    rc, _, err = run(capsys, "ingest", "--companies", empty, "--concordance", FIX / "concordance.csv",
                     "--out", tmp_path / "s.csv", "--stats", tmp_path / "st.json")
    assert rc == 2 and "empty-file" in err
    assert list(tmp_path.iterdir()) == [empty]


def test_csa_without_assignments_exit_3(tmp_path, capsys):
    rc, _, err = run(capsys, "compute", "--sample", OVERSHOOT, "--level", "csa")
    assert rc == 3 and "csa" in err


def test_empty_sector_exit_3(capsys):
    rc, _, _ = run(capsys, "compute", "--sample", OVERSHOOT, "--sector", "htm")
    assert rc == 3


@pytest.mark.parametrize("argv", [
    ["compute", "--sample", SAMPLE, "--level", "county"],
    ["compute", "--sample", SAMPLE, "--format", "xml"],
    ["compute", "--sample", SAMPLE, "--top", "0"],
    ["specialize", "--sample", SAMPLE, "--sectors", "htm,biotech"],
    ["compute", "--sample", SAMPLE, "--within", "state"],
    ["compute"],
    ["frobnicate"],
])
def test_bad_flags_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_malformed_sample_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("id,zip3,state,cbsa_code,csa_code,nace3,size_class,htm,mhtm,kis,htkis\nx,9,CA,,,620,0,0,0,0,0\n")
    rc, _, err = run(capsys, "compute", "--sample", bad)
    assert rc == 2 and "line 2" in err


def test_compute_csv_is_json_rounded(capsys):
    _, text, _ = run(capsys, "compute", "--sample", SAMPLE, "--level", "cbsa")
    _, js, _ = run(capsys, "compute", "--sample", SAMPLE, "--level", "cbsa", "--format", "json")
    data = json.loads(js)
    rows = list(csv.DictReader(io.StringIO(text)))
    for row, g in zip(rows, data["groups"]):
        assert row["key"] == g["key"] and int(row["n"]) == g["n"]
        assert row["t_mbits"] == fmt_mbits(g["t_bits"]) == fmt(g["t_mbits"], 1)
        assert row["weighted_mbits"] == fmt_mbits(g["weighted_bits"])
        assert row["percent"] == fmt_pct(100 * g["weighted_bits"] / data["t_total_bits"])
    assert rows[-2]["key"] == "T0" and rows[-2]["percent"] == fmt_pct(data["percent_t0"])
    assert rows[-1]["key"] == "TOTAL" and int(rows[-1]["n"]) == data["n"]
    percents = [row["percent"] for row in rows[:-2]]
    assert [float(p) for p in percents] == sorted((float(p) for p in percents), reverse=True)


def test_compute_top_and_within(capsys):
    _, text, _ = run(capsys, "compute", "--sample", SAMPLE, "--level", "cbsa", "--top", "2")
    assert len(text.splitlines()) == 1 + 2 + 2
    _, text, _ = run(capsys, "compute", "--sample", SAMPLE, "--level", "zip3", "--within", "cbsa=10001")
    keys = [r["key"] for r in csv.DictReader(io.StringIO(text))][:-2]
    assert sorted(keys) == ["940", "941", "943"]


def test_compute_entropy(capsys):
    rc, text, _ = run(capsys, "compute", "--sample", SAMPLE, "--level", "state", "--entropy", "g")
    assert rc == 0
    rows = {r["key"]: r for r in csv.DictReader(io.StringIO(text))}
    assert float(rows["H0"]["h_bits"]) > 0
    rc, js, _ = run(capsys, "compute", "--sample", SAMPLE, "--entropy", "gto", "--format", "json")
    d = json.loads(js)
    assert abs(d["h_total_bits"] - d["h0_bits"] - sum(g["weighted_bits"] for g in d["groups"])) <= 1e-9


def test_correlate_diagonal_is_one(capsys):
    _, text, _ = run(capsys, "correlate", "--sample", SAMPLE, "--level", "cbsa")
    rows = list(csv.reader(io.StringIO(text)))
    labels = rows[0][2:]
    for row in rows[1:]:
        assert row[2 + labels.index(row[1])] == "1.000"
    assert {r[0] for r in rows[1:]} == {"pearson", "spearman"}


def test_correlate_too_few_groups(capsys):
    rc, _, _ = run(capsys, "correlate", "--sample", SAMPLE, "--level", "state", "--sectors", "all,htm")
    assert rc == 0
    rc, _, _ = run(capsys, "correlate", "--sample", SAMPLE, "--level", "csa", "--within", "csa=501")
    assert rc == 2


def test_tally_matches_sample(capsys):
    _, text, _ = run(capsys, "tally", "--sample", SAMPLE, "--level", "state", "--format", "json")
    d = json.loads(text)
    rows = list(csv.DictReader(open(SAMPLE)))
    assert d["total"]["all"] == len(rows)
    assert d["total"]["htm"] == sum(r["htm"] == "1" for r in rows)
    assert d["rows"]["CA"]["all"] == sum(r["state"] == "CA" for r in rows)


def test_oracle_agrees(capsys):
    rc, text, _ = run(capsys, "oracle", "--sample", SAMPLE, "--level", "cbsa", "--format", "json")
    assert rc == 0
    rows = json.loads(text)
    assert rows[-1]["key"] == "TOTAL"
    assert all(r["abs_diff"] <= 1e-10 for r in rows)


def test_synth_is_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        (tmp_path / d).mkdir()
        assert main(["synth", "--companies", str(tmp_path / d / "c.csv"), "--concordance",
                     str(tmp_path / d / "z.csv"), "--records", "500", "--seed", "5"]) == 0
    assert (tmp_path / "a" / "c.csv").read_bytes() == (tmp_path / "b" / "c.csv").read_bytes()
    assert main(["synth", "--companies", str(tmp_path / "c.csv"), "--concordance", str(tmp_path / "z.csv"),
                 "--records", "500", "--seed", "5", "--clean"]) == 0
    text = (tmp_path / "c.csv").read_text()
    assert "n/a" not in text and ",," not in text


def test_reports_byte_identical_with_manifest(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1500000000")
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.csv"
        assert main(["specialize", "--sample", SAMPLE, "--out", str(out), "--manifest", str(tmp_path / f"m{i}.json")]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    m0, m1 = (json.loads((tmp_path / f"m{i}.json").read_text()) for i in range(2))
    assert m0["timestamp"] == "2017-07-14T02:40:00+00:00"
    assert m0["inputs"] == m1["inputs"] and m0["version"]
    assert m0["arguments"]["sectors"] == ["htm", "mhtm", "kis", "htkis"]


def test_default_manifest_beside_report(tmp_path, capsys):
    out = tmp_path / "tally.csv"
    assert main(["tally", "--sample", SAMPLE, "--out", str(out)]) == 0
    assert (tmp_path / "tally.csv.manifest.json").exists()


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "synergy" in capsys.readouterr().out
