import json
import math

import numpy as np
import pytest

from cubeperc import cli, lab
from cubeperc.seeds import derive_seed, mix64

from oracles import component_order_distribution


def test_seed_derivation_reference():
    # SplitMix64 from state 0: first two outputs
    assert derive_seed(0, 0) == 0xE220A8397B1DCDAF
    assert derive_seed(0, 1) == 0x6E789E6AA1B965F4
    assert len({derive_seed(7, i) for i in range(1000)}) == 1000


def test_config_validation():
    with pytest.raises(lab.ConfigError, match="trials"):
        lab.ExperimentConfig("giant", trials=0)
    with pytest.raises(lab.ConfigError, match="experiment"):
        lab.ExperimentConfig("nope")
    with pytest.raises(lab.ConfigError, match="c="):
        lab.ExperimentConfig("giant", d=(4,), c=5.0)
    cfg = lab.ExperimentConfig("giant", d=12, threads=4)
    assert cfg.d == (12,) and "threads" not in cfg.canonical()


def test_giant_run_deterministic(tmp_path):
    cfg = lab.ExperimentConfig("giant", d=(12,), c=2.0, trials=3, seed=1, out=str(tmp_path / "a.csv"))
    lab.run(cfg)
    cfg2 = lab.ExperimentConfig("giant", d=(12,), c=2.0, trials=3, seed=1, threads=3, out=str(tmp_path / "b.csv"))
    lab.run(cfg2)
    a, b = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
    assert a == b
    assert a.startswith(b"# config: experiment=giant")


def test_csv_and_json_roundtrip():
    cfg = lab.ExperimentConfig("sprinkle", d=(8, 9), c=2.0, trials=3, seed=5)
    res = lab.run(cfg)
    line, rows = lab.read_csv(lab.to_csv(cfg, res.rows))
    assert line == cfg.canonical() and rows == res.rows
    cfg.format = "json"
    line, rows = lab.read_json(res.render())
    assert line == cfg.canonical() and rows == res.rows


def test_aggregates_recomputable():
    cfg = lab.ExperimentConfig("census", d=(9, 10), c=2.0, trials=5, seed=9)
    res = lab.run(cfg)
    for d in cfg.d:
        vals = [r.values["v1_fraction"] for r in res.rows if r.d == d]
        agg = res.summary.aggregates[d]["v1_fraction"]
        assert agg.mean == pytest.approx(np.mean(vals))
        assert agg.median == pytest.approx(np.median(vals))
        assert agg.stderr == pytest.approx(np.std(vals, ddof=1) / math.sqrt(5))
    assert res.summary.theory["y"] == pytest.approx(0.79681213, abs=1e-8)


def test_census_matches_exact_finite_d_expectation():
    d, trials = 10, 200
    exact = component_order_distribution(d, 2 / d, 4)
    res = lab.run(lab.ExperimentConfig("census", d=(d,), c=2.0, trials=trials, seed=77, kmax=4))
    for k, q in exact.items():
        vals = np.array([r.values[f"v{k}_fraction"] for r in res.rows])
        se = vals.std(ddof=1) / math.sqrt(trials)
        assert abs(vals.mean() - q) <= 4 * se, (k, vals.mean(), q)


def test_fit_power_law():
    f = lab.fit_power_law([(8, 64), (12, 144), (16, 256)])
    assert f.exponent == pytest.approx(2.0, abs=1e-9) and f.r2 == pytest.approx(1.0)
    assert lab.fit_power_law([(2, 6), (3, 9), (5, 15)]).exponent == pytest.approx(1.0)
    with pytest.raises(ValueError):
        lab.fit_power_law([(2, 1), (2, 2), (3, 3)])
    with pytest.raises(ValueError):
        lab.fit_power_law([(2, 1), (3, -1), (4, 3)])


@pytest.mark.parametrize("name", sorted(lab.EXPERIMENTS))
def test_every_experiment_runs(name):
    cfg = lab.ExperimentConfig(name, d=(8,), c=2.0, trials=2, seed=3)
    res = lab.run(cfg)
    assert len(res.rows) == 2 and all(math.isfinite(v) for r in res.rows for v in r.values.values())


def test_cli_experiment_and_config_file(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# giant run\nd = 9\nc = 2.0\ntrials = 2\nseed = 4\n")
    out = tmp_path / "out.csv"
    assert cli.main(["giant", "--config", str(conf), "--trials", "3", "--out", str(out)]) == 0
    _, rows = lab.read_csv(out.read_text())
    assert len(rows) == 3 and rows[0].d == 9
    assert cli.main(["giant", "--d", "8", "--trials", "0"]) == 2
    bad = tmp_path / "bad.conf"
    bad.write_text("colour = red\n")
    assert cli.main(["giant", "--config", str(bad)]) == 2


def test_cli_theory_tame_verify(capsys):
    def run(*argv):
        assert cli.main(list(argv)) == 0
        return json.loads(capsys.readouterr().out)

    assert run("theory", "y", "--c", "2")["y"] == pytest.approx(0.79681213, abs=1e-8)
    assert run("theory", "borel", "--c", "2", "--kmax", "3")["weights"]["3"] == pytest.approx(6 * math.exp(-6))
    assert run("theory", "cutoff", "--c", "2", "--d", "16", "--t", "4096")["k"] == 18
    assert run("tame", "--d", "4", "--k", "1")["tame"] == 24
    assert run("verify", "harper", "--d", "3")["violations"] == 0
    assert run("verify", "trees", "--d", "3", "--k", "3")["count"] == 9
    assert run("verify", "forests", "--d", "3", "--k", "2")["count"] <= 72
    assert run("verify", "decompose", "--n", "50")["violations"] == 0
    assert run("verify", "switching", "--d", "20", "--k", "3", "--trials", "5000")["passed"]


def test_cli_backend_flag(capsys):
    assert cli.main(["--backend", "python", "theory", "y", "--c", "1.5"]) == 0
    from cubeperc import kernels

    assert kernels.BACKEND == "python"
    kernels.use(kernels.available()[0])
