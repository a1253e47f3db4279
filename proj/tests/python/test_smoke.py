import json

import pytest

import replicalab as rl


def test_seed_keys_are_deterministic():
    root = rl.SeedKey.from_hex(rl.DEFAULT_ROOT_SEED)
    assert root.derive("a", 3) == rl.SeedKey.from_hex(root.derive("a", 3).hex())
    assert root.split(0) != root.split(1)
    u = root.derive("u").uniform(7)
    assert 0.0 <= u < 1.0
    assert u == root.derive("u").uniform(7)


def test_bad_seed_raises_config_error():
    with pytest.raises(rl.ConfigError):
        rl.SeedKey.from_hex("xyz")


def test_correlated_sampling_agrees_on_equal_distributions():
    root = rl.SeedKey.from_hex(rl.DEFAULT_ROOT_SEED)
    p = [0.2, 0.5, 0.3]
    for t in range(200):
        assert rl.correlated_sample_index(p, root.split(t)) == rl.correlated_sample_index(list(p), root.split(t))
    assert rl.disagreement_bound(0.0) == 0.0
    assert rl.disagreement_bound(1.0) == 1.0


def test_invalid_distribution_raises():
    root = rl.SeedKey.from_hex(rl.DEFAULT_ROOT_SEED)
    with pytest.raises(rl.ValidationError):
        rl.correlated_sample_index([0.5, 0.6], root)


def test_schedule_sum_of_squares():
    import math

    p = rl.theorem1_params([100, 200, 300], 0.1, 1e-3, 0.1)
    want = 2 * 0.1**2 * 0.1**2 / math.log(3 / (0.1 * 1e-3))
    assert p["sum_eps_sq"] == pytest.approx(want, rel=1e-12)
    assert len(p["eps_i"]) == 3


def test_parameter_error_is_library_error():
    with pytest.raises(rl.ParameterError):
        rl.theorem1_params([100], 0.1, 1e-3)
    assert issubclass(rl.ParameterError, rl.Error)


def test_het_composition_shapes():
    h = rl.pg_compose_het_params([0.01] * 4, [1e-6] * 4, [1e-3] * 4, 1e-4)
    assert len(h["eps_j"]) == 4
    assert h["eps_star"] > 0


def test_config_errors_are_reported_together():
    with pytest.raises(rl.ConfigError) as err:
        rl.validate_config("experiment = meter\nrho = 2\nbogus = 1\n")
    text = str(err.value)
    assert "bogus" in text


def test_compute_meter_experiment():
    out = rl.run("experiment = meter\nalgorithm = grid_rounding\ntrials = 500\n", write=False)
    assert out["exit_code"] == 0
    assert out["report"]["experiment"] == "meter"
    assert "trials.csv" in out["csv"]


def test_run_writes_files(tmp_path):
    text = f"experiment = calc_theorem1\nn_list = 10, 20\noutput_dir = {tmp_path}\n"
    out = rl.run(text)
    assert out["exit_code"] == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["status"] == "ok"
    assert (tmp_path / "theorem1.csv").read_text() == out["csv"]["theorem1.csv"]


def test_experiment_kinds():
    kinds = rl.experiment_kinds()
    assert len(kinds) == 10 and "lowerbound_scaling" in kinds
