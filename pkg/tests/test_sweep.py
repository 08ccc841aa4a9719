import csv
import json

import pytest

from stubborn_ghost import cli
from stubborn_ghost.params import ParameterDomainError
from stubborn_ghost.sweep import (FIGURE_PRESETS, CompareKeyError, ConfigError, PointError,
                                  SweepConfig, alpha_grid, compare, run_point, run_sweep,
                                  split_sources, to_csv, to_json, to_svg)

HEADER = "strategy,alpha,theta,rr_m,rr_h,tps,hi,e_m,e_h,source,residual,stderr"


def test_single_point_analytic_row():
    (rep,) = run_point("S", 0.30, 0.005, SweepConfig())
    text = to_csv([rep])
    lines = text.splitlines()
    assert lines[0] == HEADER and len(lines) == 2
    assert lines[1].startswith("S,0.3,0.005,")


def test_point_both_modes_agree():
    cfg = SweepConfig(mode="both", rounds=2, blocks=200_000, seed=1)
    an, sim = run_point("L", 0.15, 0.005, cfg)
    assert an.rr_m == pytest.approx(0.115, abs=0.01)
    assert abs(an.rr_m - sim.rr_m) <= 0.01
    assert sim.source == "sim" and sim.stderr > 0


def test_domain_error_names_flag():
    with pytest.raises(PointError) as err:
        run_point("S", 0.7, 0.005, SweepConfig())
    assert isinstance(err.value.cause, ParameterDomainError)
    assert "--unsafe-params" in str(err.value) and "0.7" in str(err.value)


def test_config_validation():
    with pytest.raises(ConfigError):
        SweepConfig(strategies=()).validate()
    with pytest.raises(ConfigError):
        SweepConfig(mode="fast").validate()
    with pytest.raises(ParameterDomainError):
        SweepConfig(alphas=(0.5,)).validate()
    SweepConfig(alphas=(0.5,), unsafe_params=True).validate()


def test_presets():
    assert alpha_grid()[0] == 0.05 and alpha_grid()[-1] == 0.45 and len(alpha_grid()) == 21
    for name in ("fig5a", "fig6b", "fig7c"):
        cfg = SweepConfig.from_preset(name)
        assert len(cfg.strategies) == 8 and len(cfg.alphas) == 21
    assert SweepConfig.from_preset("fig7c").thetas == (0.2,)
    assert FIGURE_PRESETS["full"]["thetas"] == (0.005, 0.01, 0.05, 0.1, 0.2)
    with pytest.raises(ConfigError):
        SweepConfig.from_preset("fig9")


def test_fig5a_argmax_switch():
    rows, errors = run_sweep(SweepConfig.from_preset("fig5a", delta_max=100))
    assert not errors
    best = {}
    for r in rows:
        if r.rr_m > best.get(r.alpha, (None, -1))[1]:
            best[r.alpha] = (r.strategy, r.rr_m)
    switch = min(a for a, (s, _) in best.items() if s != "S")
    assert all(best[a][0] == "S" for a in best if a < switch)
    assert 0.28 <= switch <= 0.34


def test_sweep_order_and_partial_failure():
    cfg = SweepConfig(strategies=("T", "S"), alphas=(0.3, 0.1), thetas=(0.05,), delta_max=3)
    rows, errors = run_sweep(cfg)
    assert len(rows) == 4 and len(errors) == 4
    assert all(r.source == "failed:analytic" for r in rows)
    assert [(r.strategy, r.alpha) for r in rows] == [("S", 0.1), ("S", 0.3), ("T", 0.1),
                                                     ("T", 0.3)]


def test_sweep_is_byte_stable_and_parallel_safe():
    cfg = SweepConfig(strategies=("S", "LFT"), alphas=(0.1, 0.3), thetas=(0.005, 0.2),
                      mode="both", rounds=2, blocks=10_000)
    a = to_csv(run_sweep(cfg)[0])
    b = to_csv(run_sweep(cfg)[0])
    cfg.workers = 2
    c = to_csv(run_sweep(cfg)[0])
    assert a == b == c


def test_compare():
    rows, _ = run_sweep(SweepConfig(strategies=("S",), alphas=(0.2, 0.3)))
    rep = compare(rows, rows)
    assert rep.ok and rep.max_diff == 0.0 and rep.mean_diff == 0.0
    with pytest.raises(CompareKeyError):
        compare(rows, rows[:1])


def test_split_sources():
    rows, _ = run_sweep(SweepConfig(strategies=("S",), alphas=(0.3,), mode="both",
                                    rounds=2, blocks=10_000))
    an, sim = split_sources(rows)
    assert [r.source for r in an] == ["analytic"] and [r.source for r in sim] == ["sim"]


def test_json_and_svg():
    rows, _ = run_sweep(SweepConfig(strategies=("S", "L"), alphas=(0.2, 0.3)))
    data = json.loads(to_json(rows))
    assert len(data) == 4 and list(data[0]) == HEADER.split(",")
    svg = to_svg(rows)
    assert svg.startswith("<svg") and svg.count("<polyline") == 2


# -- command line -------------------------------------------------------------


def test_cli_point(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert cli.main(["--strategy", "S", "--alpha", "0.3", "--theta", "0.005",
                     "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1 and rows[0]["source"] == "analytic"


def test_cli_rejects_unsafe_alpha(capsys):
    assert cli.main(["--strategy", "S", "--alpha", "0.7"]) == 2
    assert "--unsafe-params" in capsys.readouterr().err


def test_cli_grid_syntax_and_json(capsys):
    assert cli.main(["--strategy", "s,lf", "--alpha", "0.1:0.2:0.05", "--theta", "0.01",
                     "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert [(d["strategy"], d["alpha"]) for d in data] == [
        ("S", 0.1), ("S", 0.15), ("S", 0.2), ("LF", 0.1), ("LF", 0.15), ("LF", 0.2)]


def test_cli_env_overrides(monkeypatch, capsys):
    monkeypatch.setenv("STUBBORN_GHOST_STRATEGY", "T")
    monkeypatch.setenv("STUBBORN_GHOST_ALPHA", "0.25")
    monkeypatch.setenv("STUBBORN_GHOST_THETA", "0.05")
    assert cli.main([]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].startswith("T,0.25,0.05,")
    # explicit flags beat the environment
    assert cli.main(["--alpha", "0.3"]) == 0
    assert capsys.readouterr().out.splitlines()[1].startswith("T,0.3,0.05,")


def test_cli_compare_names_corrupted_point(tmp_path, capsys):
    a = tmp_path / "a.csv"
    assert cli.main(["--strategy", "S,L", "--alpha", "0.2,0.3", "--out", str(a)]) == 0
    assert cli.main(["--compare", str(a), str(a)]) == 0
    assert "max|d rr_m|=0.000000" in capsys.readouterr().out
    rows = a.read_text().splitlines()
    bad = rows[3].split(",")
    bad[3] = str(float(bad[3]) + 0.05)
    rows[3] = ",".join(bad)
    b = tmp_path / "b.csv"
    b.write_text("\n".join(rows) + "\n")
    assert cli.main(["--compare", str(a), str(b)]) == 3
    out = capsys.readouterr().out
    assert "DIVERGED strategy=L alpha=0.2 theta=0.005" in out


def test_cli_both_mode_reports_divergence(capsys):
    status = cli.main(["--strategy", "S", "--alpha", "0.3", "--mode", "both", "--rounds", "2",
                       "--blocks", "100000", "--threshold", "0.01"])
    assert status == 0
    assert "points=1" in capsys.readouterr().err
    # an impossible threshold trips the divergence exit code
    status = cli.main(["--strategy", "S", "--alpha", "0.3", "--mode", "both", "--rounds", "2",
                       "--blocks", "10000", "--threshold", "0"])
    assert status == 3


def test_cli_svg(tmp_path):
    svg = tmp_path / "rr.svg"
    assert cli.main(["--strategy", "S", "--alpha", "0.2,0.3", "--svg", str(svg),
                     "--out", str(tmp_path / "x.csv")]) == 0
    assert svg.read_text().startswith("<svg")
