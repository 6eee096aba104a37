import csv
import json
import math

import pytest

from retrosmooth.cli import FIG_COLUMNS, main, sample_case


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_verify_is_deterministic(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["verify", "--seed", "3", "--cases", "40", "--out", str(a)]) == 0
    assert main(["verify", "--seed", "3", "--cases", "40", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.jsonl"
    main(["verify", "--seed", "4", "--cases", "40", "--out", str(c)])
    assert c.read_bytes() != a.read_bytes()


def test_verify_records_and_summary(tmp_path, capsys):
    out = tmp_path / "r.jsonl"
    assert main(["verify", "--cases", "8", "--out", str(out)]) == 0
    recs = [json.loads(line) for line in out.read_text().splitlines()]
    assert recs and all(set(r) == {"name", "lhs", "rhs", "margin", "satisfied", "context"} for r in recs)
    assert all(r["satisfied"] for r in recs)
    assert any(r["name"].startswith("stripartita") for r in recs)
    assert any(r["name"].startswith("holevo") for r in recs)
    text = capsys.readouterr().out
    assert "0 violations" in text and "min margin central_upper" in text


def test_verify_csv_and_extra_families(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["verify", "--cases", "5", "--family", "same-basis", "--format", "csv", "--out", str(out)]) == 0
    rows = _read_csv(out)
    lower = [float(r["margin"]) for r in rows if r["name"] == "central_lower"]
    assert lower and max(abs(x) for x in lower) <= 1e-10
    assert main(["verify", "--cases", "5", "--family", "unbiased", "--out", str(tmp_path / "u.jsonl")]) == 0


def test_sample_case_reproducible():
    a, b = sample_case(7, "single", 11), sample_case(7, "single", 11)
    assert (a.rho == b.rho).all() and a.seed == b.seed
    assert "case 7 family=single" in a.describe()


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["verify", "--cases", "abc"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == 2
    assert main(["verify", "--cases", "0"]) == 2
    assert main(["fig2", "--a-min", "5", "--a-max", "1", "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["fig2", "--a-min", "0.0001", "--a-max", "1", "--grid", "2", "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["fig4", "--q-grid", "1", "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["fig2", "--grid", "2", "--out", str(tmp_path / "missing" / "x.csv")]) == 2
    capsys.readouterr()


def test_fig2_columns_and_limits(tmp_path):
    out = tmp_path / "f2.csv"
    assert main(["fig2", "--a-min", "0.02", "--a-max", "0.1", "--grid", "4", "--theta", "0", "--phi", "0", "--out", str(out)]) == 0
    rows = _read_csv(out)
    assert tuple(rows[0]) == FIG_COLUMNS["fig2"]
    assert len(rows) == 4
    for r in rows:
        assert float(r["s_retro_avg"]) == pytest.approx(float(r["s_selective_avg"]), abs=1e-3)
        assert float(r["s_nonselective"]) >= float(r["s_retro_avg"]) - 1e-6


def test_fig3_columns_and_weak_value_b(tmp_path):
    out = tmp_path / "f3.csv"
    args = ["fig3", "--grid", "3", "--theta", str(math.pi / 6), "--phi", "0", "--theta-i", str(math.pi / 2), "--out", str(out)]
    assert main(args) == 0
    rows = _read_csv(out)
    assert tuple(rows[0]) == FIG_COLUMNS["fig3"]
    assert all(abs(float(r["v_omega"])) <= 1e-9 for r in rows)


def test_fig4_columns_bits_and_json(tmp_path):
    nats, bits = tmp_path / "n.csv", tmp_path / "b.csv"
    assert main(["fig4", "--q-grid", "5", "--out", str(nats)]) == 0
    assert main(["fig4", "--q-grid", "5", "--bits", "--out", str(bits)]) == 0
    rn, rb = _read_csv(nats), _read_csv(bits)
    assert tuple(rn[0]) == FIG_COLUMNS["fig4"]
    for a, b in zip(rn, rb):
        assert abs(float(a["i_sel"])) <= 1e-9
        assert float(a["q"]) == float(b["q"])
        assert float(b["s_a_nonsel"]) == pytest.approx(float(a["s_a_nonsel"]) / math.log(2), rel=1e-10)
    js = tmp_path / "f4.jsonl"
    assert main(["fig4", "--q-grid", "3", "--format", "json", "--state2", "1,0.5,0", "--out", str(js)]) == 0
    recs = [json.loads(line) for line in js.read_text().splitlines()]
    assert len(recs) == 3 and set(recs[0]) == set(FIG_COLUMNS["fig4"])


def test_stdout_output(capsys):
    assert main(["fig4", "--q-grid", "2", "--out", "-"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(FIG_COLUMNS["fig4"])
    assert "-0" not in lines[1].split(",")
