import csv
import json

import pytest

from backstep.cli import main
from backstep.config import parse_config
from backstep.errors import ConfigurationError


def test_defaults():
    cfg = parse_config("")
    assert (cfg.g, cfg.depth, cfg.lam, cfg.N, cfg.r, cfg.parity, cfg.b_profile, cfg.T_horizon) == \
        (9.81, 1.0, 1.0, 128, 0.0, "odd", "unit", 1.0)


@pytest.mark.parametrize("text, key", [('{"lambda": -1}', "lambda"), ('{"bogus": 1}', "bogus"),
                                       ('{"N": 3.5}', "N"), ('{"r": 1.0}', "r"),
                                       ('{"kind": "generic", "alpha": 1.2, "r": 0.75}', "r"),
                                       ('{"b_profile": "table"}', "b_table")])
def test_rejects(text, key):
    with pytest.raises(ConfigurationError, match=key):
        parse_config(text)


def test_generic_alpha_range():
    cfg = parse_config('{"kind": "generic", "alpha": 1.2, "multiplier": "power", "r": 0.65}')
    assert cfg.system().r_range == pytest.approx((-0.7, 0.7))


def _rows(path):
    with open(path) as fh:
        return [r for r in csv.reader(fh) if not r[0].startswith("#")]


def test_poleshift_cli(tmp_path, capsys):
    assert main(["poleshift", "--out", str(tmp_path), "--no-header-timestamp"]) == 0
    rows = _rows(tmp_path / "poleshift.csv")
    assert rows[0] == ["n", "re_eig", "im_eig", "re_target", "im_target", "abs_mismatch"]
    assert len(rows) == 129
    assert max(float(r[-1]) for r in rows[1:]) <= 1e-8
    eff = json.loads((tmp_path / "effective_config.json").read_text())
    assert eff["lambda"] == 1.0 and eff["N"] == 128


def test_deterministic(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"N": 24, "n_states": 2, "grid_points": 64}')
    for d in ("a", "b"):
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / d),
                     "--seed", "9", "--no-header-timestamp"]) == 0
    for name in ("trajectory_00.csv", "trajectory_01.csv", "decay_fits.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "trajectory_00.csv").read_text().startswith("# seed=9\n")


def test_timestamp_line(tmp_path):
    main(["spectrum", "--out", str(tmp_path)])
    assert (tmp_path / "spectrum.csv").read_text().startswith("# generated ")


def test_sweep(tmp_path, monkeypatch):
    monkeypatch.setenv("SPECTRAL_BACKSTEP_THREADS", "2")
    cfg = tmp_path / "c.json"
    cfg.write_text('{"N": 32}')
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path), "--no-header-timestamp"]) == 0
    rows = _rows(tmp_path / "summary.csv")
    assert rows[0][:3] == ["lambda", "fitted_rate", "rel_err"]
    assert [float(r[0]) for r in rows[1:]] == [0.5, 1.0, 5.0]
    for lam in ("0.5", "1", "5"):
        assert (tmp_path / f"lambda_{lam}" / "trajectory.csv").exists()


@pytest.mark.parametrize("cmd", ["spectrum", "riesz", "feedback", "control"])
def test_subcommands_pass(tmp_path, cmd):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"N": 16}')
    assert main([cmd, "--config", str(cfg), "--out", str(tmp_path)]) == 0


def test_table_profile(tmp_path):
    (tmp_path / "b.txt").write_text("\n".join(["1.0", "0.5"] * 8))
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"N": 16, "b_profile": "table", "b_table": str(tmp_path / "b.txt")}))
    assert main(["feedback", "--config", str(cfg), "--out", str(tmp_path)]) == 0


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"lambda": 0}')
    assert main(["feedback", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "lambda" in capsys.readouterr().err


def test_invariant_failure_exit_code(tmp_path, capsys):
    # logarithmic growth: the multiplier constants drift, so the spectrum check fails
    cfg = tmp_path / "c.json"
    table = [float(__import__("math").log1p(n)) for n in range(1, 65)]
    cfg.write_text(json.dumps({"kind": "generic", "multiplier": "table", "table": table, "N": 64,
                               "alpha": 1.5}))
    assert main(["spectrum", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "multiplier hypotheses" in capsys.readouterr().err
