import csv
import json
import math
from pathlib import Path

import pytest

from unionscope.cli import parse_structured_center, run
from unionscope.instances import (
    InstanceError,
    build_oracle_list,
    exact_union_size,
    load_instance,
    parse_instance,
)
from unionscope.rng import RandomStream


@pytest.fixture
def explicit_instance(tmp_path):
    doc = {
        "sets": [
            {"kind": "explicit", "elements": list(range(40))},
            {"kind": "explicit", "elements": list(range(20, 70))},
            {"kind": "explicit", "elements": list(range(60, 100))},
        ],
        "bias": {"alpha_l": 0.0, "alpha_r": 0.0, "beta_l": 0.0, "beta_r": 0.0},
        "seed": 7,
    }
    p = tmp_path / "inst.json"
    p.write_text(json.dumps(doc))
    return p


@pytest.fixture
def ball_instance(tmp_path):
    doc = {
        "sets": [
            {"kind": "ball", "dim": 2, "radius": 3.0, "lambda": "0", "l": 0,
             "center": [[0, 0], [0, 0]]},
            {"kind": "ball", "dim": 2, "radius": 2.5, "lambda": "1/3", "l": 1,
             "center": [[2, 1], [0, -1]]},
        ],
        "seed": 11,
    }
    p = tmp_path / "balls.json"
    p.write_text(json.dumps(doc))
    return p


def test_version(capsys):
    assert run(["--version"]) == 0
    assert capsys.readouterr().out.strip() == "unionscope/1"


def test_unknown_flag_is_usage_error(capsys):
    assert run(["schedule", "--m", "4", "--epsilon", "0.5", "--gamma", "0.2", "--bogus"]) == 1
    assert "usage error" in capsys.readouterr().err


def test_validation_error_exit_code(capsys):
    assert run(["schedule", "--m", "1", "--epsilon", "0.5", "--gamma", "0.2"]) == 2
    assert "m >= 2" in capsys.readouterr().err


def test_schedule_json(capsys):
    assert run(["schedule", "--m", "16", "--epsilon", "0.5", "--gamma", "0.2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == "unionscope/1"
    assert doc["schedule"]["h1"].isdigit()
    assert doc["schedule"]["round_bound"] == 2


def test_count_ball_output(capsys):
    assert run(["count-ball", "--dim", "2", "--radius", "2", "--lambda", "0/1",
                "--l", "0", "--center", "0+0,0+0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["count"] == "13"
    assert doc["mode"] == "exact"
    assert doc["table_size"] >= 1
    assert "runtime_ms" in doc


def test_count_ball_structured_lambda(capsys):
    assert run(["count-ball", "--dim", "2", "--radius", "2.2", "--lambda", "1/4",
                "--l", "2", "--center", "0+2L,1-1L"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mode"] == "exact"
    assert int(doc["count"]) > 0


def test_parse_structured_center_forms():
    assert parse_structured_center("0+0,0+0") == [(0, 0), (0, 0)]
    assert parse_structured_center("1+2L,-3-1L,4") == [(1, 2), (-3, -1), (4, 0)]


def test_estimate_json_and_reproducibility(explicit_instance, capsys):
    args = ["estimate", "--instance", str(explicit_instance), "--epsilon", "0.25",
            "--gamma", "0.1", "--seed", "42", "--sample-scale", "1e-9", "--trials", "2"]
    assert run(args) == 0
    first = capsys.readouterr().out
    assert run(args) == 0
    second = capsys.readouterr().out
    assert first == second  # byte-identical for identical seeds
    doc = json.loads(first)
    assert doc["m"] == 3
    assert len(doc["trials"]) == 2
    for row in doc["trials"]:
        assert row["rounds"] == row["stages"] + 1
        assert row["guarantee"] is None  # sample scale < 1


def test_estimate_csv_format(explicit_instance, capsys):
    assert run(["estimate", "--instance", str(explicit_instance), "--epsilon", "0.25",
                "--gamma", "0.1", "--seed", "1", "--sample-scale", "1e-9",
                "--trials", "3", "--format", "csv"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0].split(",")[:3] == ["trial", "value", "stages"]
    assert len(rows) == 4


def test_estimate_accuracy_against_oracle(explicit_instance, capsys):
    inst = load_instance(explicit_instance)
    exact = exact_union_size(inst)
    assert exact == 100
    assert run(["estimate", "--instance", str(explicit_instance), "--epsilon", "0.25",
                "--gamma", "0.1", "--seed", "3", "--sample-scale", "3e-9",
                "--trials", "5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    values = [t["value"] for t in doc["trials"]]
    good = sum(abs(v - exact) / exact <= 0.25 for v in values)
    assert good >= 4


def test_transcript_dump(explicit_instance, tmp_path, capsys):
    out = tmp_path / "transcript.jsonl"
    assert run(["estimate", "--instance", str(explicit_instance), "--epsilon", "0.25",
                "--gamma", "0.1", "--seed", "5", "--sample-scale", "1e-9",
                "--transcript", str(out)]) == 0
    capsys.readouterr()
    lines = [json.loads(line) for line in out.read_text().splitlines()]
    assert lines[0]["round"] == 0
    assert sum(lines[0]["request"]["sample_counts"]) >= 1
    assert all("wall_time_s" in doc for doc in lines)


def test_ball_union_command(ball_instance, capsys):
    args = ["ball-union", "--instance", str(ball_instance), "--epsilon", "0.25",
            "--gamma", "0.1", "--seed", "9", "--sample-scale", "1e-9", "--trials", "2"]
    assert run(args) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["command"] == "ball-union"
    inst = load_instance(ball_instance)
    exact = exact_union_size(inst)
    for row in doc["trials"]:
        assert abs(row["value"] - exact) / exact <= 0.4


def test_sample_ball_jsonl(capsys):
    assert run(["sample-ball", "--dim", "2", "--radius", "2", "--center", "0+0,0+0",
                "--count", "5", "--seed", "13"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    docs = [json.loads(line) for line in lines]
    points = [d["point"] for d in docs if "point" in d]
    stats = [d["stats"] for d in docs if "stats" in d]
    assert len(points) == 5 and len(stats) == 1
    assert stats[0]["mode"] == "exact"
    assert stats[0]["count_lattice_points"] == "13"
    assert stats[0]["audited_prob_exact_uniform"] is True
    for x, y in points:
        assert x * x + y * y <= 4


def test_sample_ball_free_center(capsys):
    assert run(["sample-ball", "--dim", "2", "--radius", "35", "--center", "0.3,-0.7",
                "--free-center", "--alpha", "0.5", "--count", "8", "--seed", "21"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    docs = [json.loads(line) for line in lines]
    stats = [d for d in docs if "stats" in d][0]["stats"]
    assert stats["mode"] == "rejection"
    assert 0 < stats["acceptance_rate"] <= 1
    for d in docs:
        if "point" in d:
            x, y = d["point"]
            assert (x - 0.3) ** 2 + (y + 0.7) ** 2 <= 35**2


def test_coverage_command(explicit_instance, capsys):
    assert run(["coverage", "--instance", str(explicit_instance), "--k", "2",
                "--xi", "0.2", "--gamma", "0.1", "--seed", "2",
                "--sample-scale", "1e-9"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["indices"]) == 2
    assert doc["estimate"] > 0


def test_oracle_enumerate_ball(capsys):
    assert run(["oracle", "enumerate-ball", "--center", "0,0", "--radius", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert json.loads(lines[-1])["count"] == 13


def test_oracle_exact_union(explicit_instance, capsys):
    assert run(["oracle", "exact-union", "--instance", str(explicit_instance)]) == 0
    assert json.loads(capsys.readouterr().out)["count"] == "100"


def test_bench_csv_and_figures(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    figs = tmp_path / "figs"
    assert run(["bench", "--m-values", "4,8", "--c1-values", "0", "--trials", "1",
                "--seed", "3", "--universe", "200", "--out", str(out),
                "--figures", str(figs)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert set(rows[0]) == {"m", "epsilon", "c1", "rounds", "queries", "wall_ms", "rel_error"}
    assert all(float(r["rel_error"]) < 1.0 for r in rows)
    assert (figs / "bench_rounds.png").exists()
    assert (figs / "bench_tradeoff.png").exists()


def test_missing_instance_file(capsys):
    assert run(["estimate", "--instance", "/nonexistent.json", "--epsilon", "0.25",
                "--gamma", "0.1", "--seed", "1"]) == 2


def test_instance_parsing_errors():
    with pytest.raises(InstanceError):
        parse_instance({"sets": [{"kind": "bogus"}]})
    with pytest.raises(InstanceError):
        parse_instance({"sets": [{"kind": "explicit", "elements": []}]})
    with pytest.raises(InstanceError):
        parse_instance({})


def test_instance_with_vector_elements(tmp_path):
    doc = {
        "sets": [
            {"kind": "explicit", "elements": [[0, 0], [1, 2]]},
            {"kind": "explicit", "elements": [[1, 2], [3, 4]]},
        ],
        "seed": 1,
    }
    p = tmp_path / "vec.json"
    p.write_text(json.dumps(doc))
    inst = load_instance(p)
    assert exact_union_size(inst) == 3
    olist = build_oracle_list(inst, RandomStream.from_seed(1))
    assert olist.oracles[0].contains_batch([(1, 2), (9, 9)]) == [True, False]
