import csv
import json

import numpy as np
import pytest

from subgradpush.cli import main
from subgradpush.config import ConfigError, config_from_dict, load_config
from subgradpush.harness import EXIT_OK, EXIT_VIOLATION, build_objective, run_experiment


def _base(**over):
    cfg = {
        "seed": 3,
        "n": 5,
        "T": 200,
        "graph": {"model": "random-B-connected", "B": 2},
        "objective": {"family": "abs-deviation", "anchors": [1, 2, 3, 4, 10]},
    }
    cfg.update(over)
    return cfg


def _write(tmp_path, raw, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return str(p)


def test_minimal_config_defaults(tmp_path):
    cfg = load_config(_write(tmp_path, _base()))
    assert cfg.d == 1
    assert cfg.schedule == {"kind": "inv-sqrt"}
    assert cfg.perturbation == {"kind": "zero"}


def test_n_zero_rejected():
    with pytest.raises(ConfigError, match="n must be ≥ 1"):
        config_from_dict(_base(n=0))


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="alpha0"):
        config_from_dict(_base(alpha0=1.0))
    with pytest.raises(ConfigError, match="graph.q"):
        config_from_dict(_base(graph={"model": "static", "q": 1}))


def test_missing_key_and_bad_values():
    raw = _base()
    del raw["T"]
    with pytest.raises(ConfigError, match="'T'"):
        config_from_dict(raw)
    with pytest.raises(ConfigError):
        config_from_dict(_base(graph={"model": "random-B-connected", "p": 2.0}))
    with pytest.raises(ConfigError):
        config_from_dict(_base(graph={"model": "static", "edges": [[1, 9]]}))
    with pytest.raises(ConfigError):
        config_from_dict(_base(monitors=["nope"]))


def test_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(p))


def test_generated_anchors_are_seeded():
    raw = _base(objective={"family": "l1-distance", "generate": {"low": -2, "high": 2}}, d=2)
    a = build_objective(config_from_dict(raw)).anchors
    b = build_objective(config_from_dict(raw)).anchors
    c = build_objective(config_from_dict({**raw, "seed": 4})).anchors
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert a.shape == (5, 2) and a.min() >= -2 and a.max() <= 2


def test_pushsum_complete_graph(tmp_path):
    edges = [[i, j] for i in range(1, 5) for j in range(1, 5) if i != j]
    cfg = config_from_dict({"seed": 0, "n": 4, "T": 10, "graph": {"model": "static", "edges": edges}})
    status, s = run_experiment(cfg, "pushsum", str(tmp_path))
    assert status == EXIT_OK
    assert s["max_track_err_after_round1"] < 1e-12
    assert s["lemma1_violations"] == 0


def test_pushsum_csv_layout(tmp_path):
    cfg = config_from_dict(_base(d=2, T=5, perturbation={"kind": "decaying-deterministic", "c": 1,
                                                         "signs": "alternate"}))
    run_experiment(cfg, "pushsum", str(tmp_path))
    rows = list(csv.reader(open(tmp_path / "trace.csv")))
    assert rows[0] == ["t", "node", "coord", "x", "y", "z", "eps", "xbar", "track_err", "lemma1_bound"]
    assert len(rows) == 1 + 6 * 5 * 2
    assert rows[1][:3] == ["0", "1", "1"] and rows[1][8] == "nan"
    assert rows[-1][:3] == ["5", "5", "2"]
    summary = json.load(open(tmp_path / "summary.json"))
    assert summary["lemma1_violations"] == 0


def test_optimize_summary(tmp_path):
    cfg = config_from_dict(_base(T=500, lemma8_random_points=3))
    status, s = run_experiment(cfg, "optimize", str(tmp_path))
    assert status == EXIT_OK
    assert s["violation_count"] == 0
    assert s["dist_to_opt"] is not None
    assert set(s["monitors"]) == {"avdone", "ztilde", "lemma8", "theorem2", "lemma9"}
    header = open(tmp_path / "trace.csv").readline().strip().split(",")
    assert header == ["t", "node", "coord", "x", "y", "z", "ztilde", "xbar", "F_xbar", "F_ztilde",
                      "consensus_radius", "dist_to_opt", "th2_bound", "lemma8_residual_min"]


def test_violation_sets_status(tmp_path):
    cfg = config_from_dict(_base(params={"lambda": 1e-9, "delta": 1.0}, T=300))
    status, s = run_experiment(cfg, "pushsum", str(tmp_path))
    assert status == EXIT_VIOLATION
    assert s["lemma1_violations"] > 0


def test_bounds_json(capsys):
    status, s = run_experiment(config_from_dict(_base()), "bounds")
    out = json.loads(capsys.readouterr().out)
    assert set(out) == {"delta_theoretical", "delta_measured", "lambda_theoretical", "lambda_empirical", "C"}
    assert out["delta_measured"] >= out["delta_theoretical"]
    assert status == EXIT_OK


def test_graphcheck_lines(capsys):
    raw = {"seed": 0, "n": 2, "T": 6, "graph": {"model": "cyclic-schedule", "B": 1,
                                                "graphs": [[[1, 2]], [[2, 1]]]}}
    status, _ = run_experiment(config_from_dict(raw), "graphcheck")
    assert capsys.readouterr().out.splitlines()[0] == "window=0 connected=false"
    assert status == EXIT_VIOLATION
    raw["graph"]["B"] = 2
    status, _ = run_experiment(config_from_dict(raw), "graphcheck")
    assert capsys.readouterr().out.splitlines() == [f"window={k} connected=true" for k in range(3)]
    assert status == EXIT_OK


def test_identical_configs_identical_bytes(tmp_path):
    raw = _base(T=300)
    run_experiment(config_from_dict(raw), "optimize", str(tmp_path / "a"))
    run_experiment(config_from_dict(raw), "optimize", str(tmp_path / "b"))
    assert (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()


def test_cli_exit_codes(tmp_path, capsys):
    good = _write(tmp_path, _base(T=50))
    assert main(["optimize", "--config", good, "--out-dir", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "summary.json").exists()
    assert main(["pushsum", "--config", _write(tmp_path, _base(n=0), "bad.json")]) == 2
    assert main(["pushsum", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["pushsum", "--config", _write(tmp_path, _base(params={"lambda": 1e-9, "delta": 1.0}), "v.json")]) == 1
    # huber with d=3 has no optimum oracle, so the rate monitors cannot run
    raw = _base(d=3, objective={"family": "huber", "generate": {}}, monitors=["theorem2"])
    assert main(["optimize", "--config", _write(tmp_path, raw, "r.json")]) == 3


def test_cli_accept_subset(tmp_path, capsys):
    cfg = _write(tmp_path, {"seed": 0, "criteria": [3, 10]})
    assert main(["accept", "--config", cfg, "--out-dir", str(tmp_path)]) == 0
    report = json.load(open(tmp_path / "report.json"))
    assert [c["id"] for c in report["criteria"]] == [3, 10]
    assert "[PASS]  3" in capsys.readouterr().out
