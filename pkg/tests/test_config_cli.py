import json

import pytest

from threewell import cli, pipelines
from threewell import classical as cl
from threewell.config import (SCAN_ENERGIES, SHRIMP_EPS, SWEEP_EPS, ConfigError, RunConfig, coerce,
                              load_ini, preset, with_overrides)


def test_presets_encode_figure_parameters():
    assert preset("fig2").eps == (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 5.0, 30.0)
    assert preset("fig3").eps == SWEEP_EPS and preset("fig9").eps == SWEEP_EPS
    assert preset("fig5/6").energies == (-0.9, -0.4, -0.03, 0.06, 0.075, 0.1, 0.3, 0.8) == SCAN_ENERGIES
    f78 = preset("fig7/8")
    assert f78.eps == SHRIMP_EPS == (0.0, 0.4, 0.7, 1.0) and f78.energies == (0.075,)
    assert preset("fig2").N == 100 and preset("fig2").U == 0.7 and preset("fig2").J == 1.0
    with pytest.raises(ConfigError):
        preset("fig99")


@pytest.mark.parametrize("changes", [
    {"N": 0}, {"kind": "nope"}, {"eps": ()}, {"window": 0}, {"rel_tol": 1e-2}, {"bins": 1},
    {"t_max_single": -1.0}, {"energies": (float("nan"),)}, {"workers": 0},
])
def test_validation_rejects(changes):
    with pytest.raises(ConfigError):
        with_overrides(RunConfig(), **changes).validate()


def test_coerce():
    assert coerce("eps", "0, 0.5 1") == (0.0, 0.5, 1.0)
    assert coerce("N", "60") == 60 and coerce("window", "auto") is None
    assert coerce("kind", "fig5/6") == "fig56"
    with pytest.raises(ConfigError):
        coerce("N", "6.5")
    with pytest.raises(ConfigError):
        coerce("colour", "red")


def test_ini_and_flag_precedence(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[run]\npreset = fig2\nseed = 4\n[model]\nN = 30\neps = 0 1.5\n[histogram]\nbins = 30\n")
    cfg = load_ini(ini)
    assert (cfg.kind, cfg.N, cfg.eps, cfg.seed, cfg.bins) == ("fig2", 30, (0.0, 1.5), 4, 30)
    args = cli.build_parser().parse_args(["--config", str(ini), "--N", "12", "--eps", "2"])
    cfg = cli.resolve(args)
    assert (cfg.kind, cfg.N, cfg.eps, cfg.seed) == ("fig2", 12, (2.0,), 4)


def test_ini_errors(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[model]\nflavour = 3\n")
    with pytest.raises(ConfigError):
        load_ini(bad)
    bad.write_text("[extras]\nx = 1\n")
    with pytest.raises(ConfigError):
        load_ini(bad)
    with pytest.raises(ConfigError):
        load_ini(tmp_path / "missing.ini")


def test_cache_dir_resolution(monkeypatch, tmp_path):
    monkeypatch.delenv("THREEWELL_CACHE", raising=False)
    assert str(RunConfig(out_dir="o").resolved_cache_dir()) == "o/cache"
    monkeypatch.setenv("THREEWELL_CACHE", str(tmp_path))
    assert RunConfig().resolved_cache_dir() == tmp_path
    assert str(RunConfig(cache_dir="c").resolved_cache_dir()) == "c"


def test_cli_spectrum_and_cache_hit(tmp_path, capsys):
    out = tmp_path / "r"
    assert cli.main(["spectrum", "--N", "1", "--eps", "0", "--out", str(out)]) == 0
    rows = (out / "eigenvalues_eps0.csv").read_text().splitlines()
    assert rows[0] == "m,E,e" and len(rows) == 4
    assert [float(r.split(",")[1]) for r in rows[1:]] == pytest.approx([-0.3, 0.7, 1.7], abs=1e-12)
    m = json.loads((out / "manifest.json").read_text())
    assert m["cache_hits"] == {"0": False}
    assert cli.main(["spectrum", "--N", "1", "--eps", "0", "--out", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["cache_hits"] == {"0": True}
    capsys.readouterr()


def test_cli_exit_codes(tmp_path, monkeypatch, capsys):
    assert cli.main(["spectrum", "--N", "0", "--out", str(tmp_path)]) == 2
    assert cli.main(["spectrum", "--N", "2.5", "--out", str(tmp_path)]) == 2
    # corrupt a cache file in place
    out = tmp_path / "c"
    assert cli.main(["spectrum", "--N", "3", "--eps", "0", "--out", str(out)]) == 0
    blob = next((out / "cache").glob("*.bin"))
    raw = bytearray(blob.read_bytes())
    raw[-20] ^= 1
    blob.write_bytes(bytes(raw))
    assert cli.main(["spectrum", "--N", "3", "--eps", "0", "--out", str(out)]) == 4

    def boom(cfg):
        raise cl.StiffnessError("step size underflow", 1.0, None)

    monkeypatch.setitem(pipelines.COMMANDS, "spectrum", boom)
    assert cli.main(["spectrum", "--N", "3", "--out", str(tmp_path / "d")]) == 3
    err = capsys.readouterr().err
    assert "config error" in err and "cache error" in err and "compute error" in err
