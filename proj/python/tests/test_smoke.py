import json
import math
import os
import subprocess

import pytest

import dar


def approx(v, rel=1e-6):
    return pytest.approx(v, rel=rel, abs=1e-9)


def test_running_example():
    assert dar.dar_rewards([3.0, 4.0, 8.0], 5.0) == approx([1 / 9, 13 / 36, 13 / 36])
    assert dar.mse_rewards([3.0, 4.0, 8.0], 5.0) == [-4.0, -1.0, -9.0]
    assert dar.mse_reward(4.0, 5.0) == -1.0


def test_invalid_rollouts():
    r = dar.dar_rewards([3.0, 99.0, 4.0, 8.0], 5.0, valid=[True, False, True, True])
    assert r[1] == approx(1 / 9)
    r = dar.mse_rewards([1.0, 2.0], 0.0, valid=[False, False], invalid_mode="fixed", penalty=-3.0)
    assert r == [-3.0, -3.0]
    with pytest.raises(dar.DegenerateSetError):
        dar.dar_rewards([1.0], 0.0)


def test_scoring():
    assert dar.crps_empirical([0.0, 10.0], 5.0) == approx(2.5)
    assert dar.crps_integral_oracle([3.0, 4.0, 8.0], 5.0) == approx(dar.crps_empirical([3.0, 4.0, 8.0], 5.0))
    assert dar.neg_crps_score([4.0, 6.0], 5.0) == approx(-0.5)
    assert dar.quantile([0.0, 10.0], 0.25) == approx(2.5)
    assert dar.wis([0.0, 10.0], 20.0, [0.5]) == approx(21.25 / 1.5)
    with pytest.raises(ValueError):
        dar.crps_empirical([], 1.0)


def test_advantages_and_metrics():
    a = dar.grpo_advantages([1.0, 2.0, 3.0])
    assert a == approx([-1.224745, 0.0, 1.224745])
    m = dar.regression_metrics([1.0, 1.0, 2.0], [1.0, 2.0, 3.0])
    assert m["spearman"] == approx(0.866025)
    assert dar.regression_metrics([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])["spearman"] is None
    c = dar.calibration_fit([(0.1, 0.2), (1.0, 1.0), (10.0, 5.0)])
    assert c["log_pearson"] == approx(1.0)
    assert not c["degenerate"]


def test_task_and_policy():
    p = dar.mixture_params(0.0)
    assert p["pi"] == approx(0.5)
    assert p["mu2"] == approx(-1.2)
    assert p["sigma"] == approx(0.19)
    assert dar.true_mean(0.0) == approx(-0.6)
    data = dar.make_dataset(50, 9, 3)
    assert len(data["train"]["x"]) == 50
    assert len(data["test"]["region"]) == 9
    pol = dar.GridPolicy()
    assert len(pol.bin_centers) == 81
    assert sum(pol.probs(0.3)) == approx(1.0)
    assert pol.entropy(0.0) == approx(math.log(81))
    assert pol.sample(0.0, 5, 11) == pol.sample(0.0, 5, 11)


def test_format_round_trip():
    for v in [0.1, -2.5, 1e-300, 123456.789, 0.0]:
        assert dar.parse_prediction(dar.format_prediction(v)) == v
    assert dar.parse_prediction("\\boxed{nan}") is None
    assert dar.parse_prediction("no answer") is None


def test_run_command_gen_data(tmp_path):
    out = tmp_path / "data"
    code, log = dar.run_command("gen-data", out_dir=str(out), n_train=40, n_test=12, seed=5)
    assert code == 0, log
    lines = (out / "train.jsonl").read_text().splitlines()
    assert len(lines) == 36
    assert set(json.loads(lines[0])) == {"x", "y", "region"}
    assert json.loads((out / "config.json").read_text())["seed"] == 5
    code, _ = dar.run_command("gen-data", no_such_key=1)
    assert code == 1


@pytest.mark.skipif("DAR_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_matches_module(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    subprocess.run([os.environ["DAR_CLI"], "gen-data", "-o", str(a), "--set", "n_train=30", "--set", "n_test=6"],
                   check=True, capture_output=True)
    code, log = dar.run_command("gen-data", out_dir=str(b), n_train=30, n_test=6)
    assert code == 0, log
    assert (a / "test.jsonl").read_bytes() == (b / "test.jsonl").read_bytes()
