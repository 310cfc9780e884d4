"""End-to-end checks of the ppp command-line surface via subprocess."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from subuniform import (RngStream, SubUniformDist, SyntheticPPPModel, fisher_bounds,
                        fisher_score, p2alpha)


def run_cli(*argv, env_extra=None):
    env = os.environ.copy()
    env.pop("PPP_THREADS", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "subuniform.cli", *argv],
                          capture_output=True, text=True, env=env)


def payload(proc):
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


# ------------------------------------------------------------------ calibrate

def test_calibrate_doubles():
    doc = payload(run_cli("calibrate", "--p", "0.03"))
    assert doc == {"p": 0.03, "conservative_p": 0.06}


def test_calibrate_saturates():
    assert payload(run_cli("calibrate", "--p", "0.7"))["conservative_p"] == 1.0


def test_calibrate_rejects_out_of_range():
    proc = run_cli("calibrate", "--p", "-0.1")
    assert proc.returncode == 1
    assert "error:" in proc.stderr


def test_calibrate_csv_format():
    proc = run_cli("calibrate", "--p", "0.03", "--format", "csv")
    lines = proc.stdout.splitlines()
    assert lines[0] == "p,conservative_p"
    assert [float(v) for v in lines[1].split(",")] == [0.03, 0.06]


# ------------------------------------------------------------------ fisher

def test_fisher_single_pvalue(tmp_path):
    path = tmp_path / "pvals.csv"
    path.write_text("0.05\n")
    doc = payload(run_cli("fisher", "--pvals", str(path)))
    assert doc["score"] == pytest.approx(5.991464547107982, abs=1e-9)
    assert doc["m"] == 1
    assert doc["nominal_p"] == pytest.approx(0.05, abs=1e-9)
    assert doc["bound_shifted_chi2"] == pytest.approx(0.1, abs=1e-6)


def test_fisher_all_ones(tmp_path):
    path = tmp_path / "pvals.csv"
    path.write_text("1\n1\n1\n")
    doc = payload(run_cli("fisher", "--pvals", str(path)))
    assert doc["score"] == 0.0
    assert doc["conservative_p"] == 1.0
    assert set(doc["inapplicable"]) == {"bound_cantelli", "bound_mgf"}


def test_fisher_matches_library_exactly(tmp_path):
    gen = RngStream(seed=500).generator()
    vals = p2alpha(0.2).sample(gen, 20).values
    path = tmp_path / "pvals.csv"
    path.write_text("".join(f"{v:.17g}\n" for v in vals))
    doc = payload(run_cli("fisher", "--pvals", str(path)))
    parsed = np.array([float(ln) for ln in path.read_text().splitlines()])
    score = fisher_score(parsed)
    report = fisher_bounds(score.score, score.m)
    assert doc == json.loads(report.to_json())


def test_fisher_zero_pvalue_warns_but_succeeds(tmp_path):
    path = tmp_path / "pvals.csv"
    path.write_text("0\n0.5\n")
    proc = run_cli("fisher", "--pvals", str(path))
    assert proc.returncode == 0
    assert "note:" in proc.stderr
    doc = json.loads(proc.stdout)
    assert doc["warnings"]
    assert np.isfinite(doc["score"])


def test_fisher_rejects_negative(tmp_path):
    path = tmp_path / "pvals.csv"
    path.write_text("-0.2\n")
    assert run_cli("fisher", "--pvals", str(path)).returncode == 1


def test_fisher_missing_file_is_io_error():
    proc = run_cli("fisher", "--pvals", "/no/such/file.csv")
    assert proc.returncode == 2


# ------------------------------------------------------------------ minp

def test_minp_inline():
    doc = payload(run_cli("minp", "--min", "0.1", "--m", "2"))
    assert doc["conservative_p"] == pytest.approx(0.36, abs=1e-12)
    assert doc["nominal_q"] == pytest.approx(0.19, abs=1e-12)
    assert doc["limit_2q_minus_q2"] == pytest.approx(2 * 0.19 - 0.19 ** 2, abs=1e-12)


def test_minp_from_file(tmp_path):
    path = tmp_path / "pvals.csv"
    path.write_text("0.4\n0.1\n0.9\n")
    doc = payload(run_cli("minp", "--pvals", str(path)))
    assert doc["min"] == 0.1 and doc["m"] == 3
    assert doc["conservative_p"] == pytest.approx(1.0 - 0.8 ** 3, abs=1e-12)


def test_minp_requires_arguments():
    assert run_cli("minp").returncode == 1


# ------------------------------------------------------------------ simulate

def test_simulate_ruschendorf_deterministic(tmp_path):
    out = tmp_path / "pvals.csv"
    args = ("simulate", "--model", "ruschendorf", "--alpha", "0.25",
            "--n", "10", "--seed", "7", "--format", "csv")
    first = run_cli(*args, "--out", str(out))
    second = run_cli(*args)
    assert first.returncode == 0 and first.stdout == second.stdout
    lines = first.stdout.splitlines()
    assert len(lines) == 10
    vals = np.array([float(v) for v in lines])
    assert np.all((np.abs(vals - 0.25) < 1e-12) | (vals >= 0.5))
    assert np.array_equal(np.loadtxt(out), vals)


def test_simulate_lasso_summary_keys():
    doc = payload(run_cli("simulate", "--model", "lasso", "--alpha", "0.1",
                          "--n", "20000", "--seed", "501"))
    assert doc["n"] == 20000 and doc["seed"] == 501
    assert doc["mean"] == pytest.approx(0.5, abs=0.01)
    assert set(doc["p_le_alpha"]) == {"0.01", "0.05", "0.1", "0.25"}
    assert doc["p_le_alpha"]["0.1"] == pytest.approx(0.2, abs=0.01)
    assert doc["sub_uniformity"]["holds"] is True
    assert doc["ks_vs_p2alpha"] <= 0.02
    assert doc["p2alpha_alpha"] == 0.1


def test_simulate_port_default_pmfs():
    doc = payload(run_cli("simulate", "--model", "port", "--n", "5000", "--seed", "502"))
    assert doc["model"].startswith("port")
    assert doc["sub_uniformity"]["holds"] is True


def test_simulate_estimator_flags():
    doc = payload(run_cli("simulate", "--model", "lasso", "--alpha", "0.1",
                          "--n", "5000", "--seed", "503", "--estimator", "r_hat",
                          "--M", "4", "--sampler", "markov", "--rho", "0.7"))
    for tag in ("r_hat", "M=4", "markov"):
        assert tag in doc["model"]
    assert doc["mean"] == pytest.approx(0.5, abs=0.02)


def test_simulate_thread_count_does_not_change_output(tmp_path):
    args = ("simulate", "--model", "simplex", "--alpha", "0.1", "--n", "20000",
            "--seed", "504", "--estimator", "p_hat", "--M", "2")
    one = run_cli(*args, env_extra={"PPP_THREADS": "1"})
    four = run_cli(*args, env_extra={"PPP_THREADS": "4"})
    assert one.returncode == 0 and one.stdout == four.stdout


def test_simulate_rejects_bad_alpha():
    proc = run_cli("simulate", "--model", "simplex", "--alpha", "0.6",
                   "--n", "100", "--seed", "505")
    assert proc.returncode == 1


def test_simulate_ruschendorf_rejects_estimators():
    proc = run_cli("simulate", "--model", "ruschendorf", "--n", "100",
                   "--seed", "506", "--estimator", "p_hat")
    assert proc.returncode == 1


# ------------------------------------------------------------------ construct

def test_construct_p2alpha(tmp_path):
    target = tmp_path / "target.json"
    target.write_text(p2alpha(0.1).to_json())
    out = tmp_path / "pvals.csv"
    model_out = tmp_path / "model.json"
    doc = payload(run_cli("construct", "--target", str(target), "--n", "40000",
                          "--seed", "507", "--out", str(out),
                          "--model-out", str(model_out)))
    assert doc["coupling"] == "mixed"
    assert doc["path"] == "explicit-p2alpha"
    comp = doc["comparison"]
    assert comp["ks_vs_target"] <= 0.01
    assert comp["atom_frequencies"]["0.1"] == pytest.approx(0.2, abs=0.01)
    assert comp["atom_expected"]["0.1"] == pytest.approx(0.2, abs=1e-12)
    assert comp["s_marginal_ks"] <= 0.01
    assert comp["martingale_residual"] <= 1e-9
    vals = np.loadtxt(out)
    assert vals.size == 40000
    model = SyntheticPPPModel.from_json(model_out.read_text())
    assert model.meta["path"] == "explicit-p2alpha"


def test_construct_uniform_is_singular(tmp_path):
    target = tmp_path / "target.json"
    target.write_text(SubUniformDist("uniform01").to_json())
    doc = payload(run_cli("construct", "--target", str(target), "--n", "5000",
                          "--seed", "508"))
    assert doc["coupling"] == "singular"
    assert doc["path"] == "explicit-uniform"


def test_construct_rejects_super_uniform_target(tmp_path):
    target = tmp_path / "target.json"
    bad = SubUniformDist("mixture", atoms=((0.9, 1.0),), pieces=())
    target.write_text(bad.to_json())
    proc = run_cli("construct", "--target", str(target), "--n", "100", "--seed", "509")
    assert proc.returncode == 1
    assert "not sub-uniform" in proc.stderr


def test_construct_missing_target_is_io_error():
    proc = run_cli("construct", "--target", "/no/such/target.json",
                   "--n", "100", "--seed", "510")
    assert proc.returncode == 2


# ------------------------------------------------------------------ curves

def test_curves_idf_table():
    doc = payload(run_cli("curves", "--figure", "idf", "--alpha", "0.25"))
    assert doc["columns"] == ["x", "phi_uniform", "phi_beta22", "phi_p2alpha"]
    assert len(doc["rows"]) == 512
    first, last = doc["rows"][0], doc["rows"][-1]
    assert first == [0.0, 0.0, 0.0, 0.0]
    assert last[0] == 1.0
    for phi_at_one in last[1:]:
        assert phi_at_one == pytest.approx(0.5, abs=1e-12)  # every mean is 1/2
    for row in doc["rows"]:
        assert row[3] <= row[1] + 1e-12  # extremal law sits below uniform


def test_curves_fisher_small_m():
    doc = payload(run_cli("curves", "--figure", "fisher", "--m", "20",
                          "--points", "16"))
    assert doc["columns"][:2] == ["alpha", "score"]
    first = doc["rows"][0]  # alpha = 1e-5: the moment bound wins
    alpha, _score, nominal, shifted, cantelli, mgf = first
    assert alpha == pytest.approx(1e-5, rel=1e-9)
    assert nominal == pytest.approx(1e-5, rel=1e-6)
    assert mgf < cantelli and mgf < shifted


def test_curves_fisher_huge_m():
    doc = payload(run_cli("curves", "--figure", "fisher", "--m", "1000000",
                          "--points", "4"))
    _alpha, _score, _nominal, shifted, cantelli, mgf = doc["rows"][0]
    assert shifted >= 0.5  # location shift is vacuous at this scale
    assert cantelli < 0.06  # Gaussian limit 1/(1 + z^2) at alpha = 1e-5
    assert mgf < 1e-3


def test_curves_rejects_bad_alpha():
    assert run_cli("curves", "--figure", "idf", "--alpha", "0.6").returncode == 1


def test_curves_csv_deterministic():
    args = ("curves", "--figure", "idf", "--points", "64", "--format", "csv")
    assert run_cli(*args).stdout == run_cli(*args).stdout
