#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import json

import numpy as np
import pytest

import acceptance
import conversation
import distributions
import threadsim
from analytics import write_table_csv
from distributions import ExponentialLaw, exposure_sample

SMALL = ["--gamma", "0.01", "--c0", "0.5", "--M", "200", "--exposure", "exp:0.01", "--b", "1e4", "--quiet"]


def simulate(out, *extra):
    return threadsim.main(["simulate", *SMALL, "--topics", "40", "--seed", "7", "--out", str(out), *extra])


def test_simulate_is_reproducible(tmp_path, capsys):
    assert simulate(tmp_path / "a") == 0
    assert simulate(tmp_path / "b") == 0
    assert "Seed : 7" in capsys.readouterr().out
    for name in ("events.jsonl", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    first = (tmp_path / "a" / "events.jsonl").read_text().splitlines()[0]
    assert first.startswith("# threadsim simulate") and first.endswith("seed=7")


def test_simulate_csv_and_analytic_modes(tmp_path):
    assert simulate(tmp_path / "i", "--mode", "intensity") == 0
    assert (tmp_path / "i" / "events.jsonl").exists()
    assert simulate(tmp_path / "c", "--format", "csv") == 0
    assert (tmp_path / "c" / "events.csv").exists()
    assert simulate(tmp_path / "s", "--mode", "analytic") == 0
    rows = (tmp_path / "s" / "sizes.csv").read_text().splitlines()
    assert rows[1] == "topic,T,N"
    assert len(rows) == 2 + 40


def test_simulate_rejects_non_growing_regime(tmp_path, capsys):
    code = threadsim.main(["simulate", "--c", "2.5", "--c0", "0", "--out", str(tmp_path)])
    assert code == threadsim.EXIT_PARAMETER
    assert "non-growing" in capsys.readouterr().err


def test_bad_flags_are_parameter_errors(tmp_path):
    assert threadsim.main(["simulate", "--exposure", "lognormal:1", "--out", str(tmp_path)]) == 2
    assert threadsim.main(["simulate", "--topics", "0", "--out", str(tmp_path)]) == 2
    assert threadsim.main(["frobnicate"]) == 2
    assert threadsim.main(["validate", "--only", "nonsense"]) == 2


def test_parse_exposure():
    assert threadsim.parse_exposure("exp:0.5").rate == 0.5
    law = threadsim.parse_exposure("pareto:2:1.5")
    assert (law.t_min, law.alpha) == (2.0, 1.5)


def test_fit_exposure_on_empty_corpus_is_data_error(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert threadsim.main(["fit", "--target", "exposure", "--input", str(path)]) == threadsim.EXIT_DATA
    assert threadsim.main(["fit", "--target", "exposure", "--input", str(tmp_path / "gone.jsonl")]) == 3


def test_fit_waiting_recovers_c_on_shared_site(tmp_path, capsys):
    run = tmp_path / "site"
    code = threadsim.main(["--quiet", "simulate", "--population", "shared", "--c", "1.5", "--a", "1", "--b", "1e4",
                           "--c0", "0.8", "--gamma", "0.05", "--M", "40", "--exposure", "exp:0.01",
                           "--topics", "1000", "--seed", "7", "--out", str(run)])
    assert code == 0
    kinds = {json.loads(line)["kind"] for line in (run / "events.jsonl").read_text().splitlines()[1:]}
    assert kinds == {"topic", "comment", "activity"}
    capsys.readouterr()
    out = tmp_path / "fit.csv"
    assert threadsim.main(["--quiet", "fit", "--target", "waiting", "--input", str(run / "events.jsonl"),
                           "--out", str(out)]) == 0
    rows = dict(line.split(",", 1) for line in out.read_text().splitlines()[1:])
    assert rows["family"] == "truncated_pareto"
    assert abs(float(rows["c"]) - 1.5) < 0.05


def test_fit_waiting_on_per_topic_corpus_is_data_error(tmp_path, capsys):
    assert simulate(tmp_path / "run") == 0
    capsys.readouterr()
    code = threadsim.main(["fit", "--target", "waiting", "--input", str(tmp_path / "run" / "events.jsonl")])
    assert code == threadsim.EXIT_DATA
    assert "--population shared" in capsys.readouterr().err


def test_simulate_refuses_unbounded_runs(tmp_path, capsys):
    code = threadsim.main(["simulate", "--candidates", "all", "--topics", "2", "--out", str(tmp_path / "a")])
    assert code == threadsim.EXIT_PARAMETER
    assert "candidate events" in capsys.readouterr().err
    assert threadsim.main(["simulate", "--population", "shared", "--topics", "5", "--out", str(tmp_path / "b")]) == 2
    assert simulate(tmp_path / "c", "--population", "shared", "--mode", "intensity") == 2
    assert simulate(tmp_path / "d", "--topic-interval", "-1") == 2



def test_fit_exposure_from_samples_file(tmp_path, capsys):
    x = exposure_sample(ExponentialLaw(0.02), np.random.default_rng(0), 2000)
    path = tmp_path / "durations.csv"
    write_table_csv(path, ("T",), [(v,) for v in x], "durations")
    code = threadsim.main(["fit", "--target", "exposure", "--format", "samples", "--column", "T",
                           "--input", str(path)])
    assert code == 0
    printed = capsys.readouterr().out.splitlines()
    assert printed[0] == "name,value"
    assert "selected_family,exponential" in printed


def test_analyze_writes_report(tmp_path, capsys):
    assert simulate(tmp_path / "run", "--topics", "60", "--gamma", "0.05") == 0
    report = tmp_path / "report"
    code = threadsim.main(["--quiet", "analyze", "--input", str(tmp_path / "run" / "events.jsonl"),
                           "--out", str(report), "--seed", "1"])
    assert code == 0
    for name in ("n_of_t.csv", "dn_dt.csv", "indegree_ccdf.csv", "regressions.csv", "report.csv", "report.txt"):
        assert (report / name).exists(), name
    text = (report / "report.txt").read_text()
    assert "topics" in text and "slope_N" in text
    assert "slope_N" in capsys.readouterr().out


def test_config_file_defaults_and_precedence(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"topics": 5, "seed": 3, "gamma": 0.01, "M": 200, "exposure": "exp:0.01"}))
    assert threadsim.main(["--quiet", "--config", str(cfg), "simulate", "--out", str(tmp_path / "a")]) == 0
    assert len((tmp_path / "a" / "summary.csv").read_text().splitlines()) == 2 + 5
    assert threadsim.main(["--quiet", "--config", str(cfg), "simulate", "--topics", "8",
                           "--out", str(tmp_path / "b")]) == 0
    assert len((tmp_path / "b" / "summary.csv").read_text().splitlines()) == 2 + 8


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("[1, 2]")
    assert threadsim.main(["--config", str(cfg), "simulate"]) == 2
    assert threadsim.main(["--config", str(tmp_path / "missing.json"), "simulate"]) == 2


def test_validate_passes_cheap_check(capsys):
    assert threadsim.main(["--quiet", "validate", "--scale", "tiny", "--seed", "1", "--only", "determinism"]) == 0
    assert "checks passed" in capsys.readouterr().out


def test_validate_reports_broken_prediction(monkeypatch, capsys):
    monkeypatch.setattr(conversation, "predicted_size_cdf", lambda params, n: np.zeros_like(np.asarray(n, float)))
    code = threadsim.main(["--quiet", "validate", "--scale", "tiny", "--seed", "1", "--only", "size trichotomy"])
    assert code == threadsim.EXIT_CHECKS_FAILED
    assert "FAIL" in capsys.readouterr().out


def test_acceptance_growth_and_pareto_settings(monkeypatch):
    params = acceptance.growth_params()
    assert (params.gamma, params.M) == (0.05, 200)
    bounds = []
    fit = distributions.tp_mle
    monkeypatch.setattr(distributions, "tp_mle", lambda x, a, b=None: bounds.append(b) or fit(x, a, b))
    acceptance.run_checks("tiny", 1, only=["truncated pareto"])
    assert len(bounds) == len(acceptance.TP_TARGETS)
    assert all(b is None for b in bounds)


def report_values(path):
    lines = path.read_text().splitlines()[2:]
    return dict(line.split(",", 1) for line in lines)


def test_fit_size_recovers_inverse_shape(tmp_path, capsys):
    run = tmp_path / "sizes"
    assert threadsim.main(["--quiet", "simulate", "--mode", "analytic", "--c", "1.0", "--c0", "0.695",
                           "--gamma", "1", "--M", "1", "--topics", "5000", "--seed", "4", "--out", str(run)]) == 0
    out = tmp_path / "fit.csv"
    assert threadsim.main(["--quiet", "fit", "--target", "size", "--format", "samples", "--column", "N",
                           "--input", str(run / "sizes.csv"), "--out", str(out)]) == 0
    values = report_values(out)
    assert abs(float(values["shape"]) - 1.439) < 0.05
    assert abs(float(values["implied_c_prime"]) - 0.695) < 0.03


@pytest.mark.parametrize("exposure,verdict", [("pareto:10:1.0", "heavy"), ("exp:0.01", "light")])
def test_analyze_tail_verdict_follows_exposure(tmp_path, capsys, exposure, verdict):
    run = tmp_path / "run"
    assert threadsim.main(["--quiet", "simulate", "--mode", "intensity", "--c", "1.2", "--c0", "0.7",
                           "--gamma", "0.05", "--M", "200", "--exposure", exposure, "--topics", "600",
                           "--seed", "2", "--out", str(run)]) == 0
    assert threadsim.main(["--quiet", "analyze", "--input", str(run / "events.jsonl"),
                           "--out", str(run / "report"), "--seed", "2"]) == 0
    values = report_values(run / "report" / "report.csv")
    assert values["size_tail_verdict"] == verdict
