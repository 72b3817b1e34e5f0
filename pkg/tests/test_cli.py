import numpy as np
import pytest

import riccidisk.verify
from riccidisk.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_VERIFY,
    CSV_COLUMNS,
    cmd_convergence,
    cmd_run,
    cmd_verify,
    main,
    parse_config,
)
from riccidisk.errors import ConfigurationError


def _write_config(path, **overrides):
    values = {
        "grid.n_r": 64,
        "grid.n_theta": 1,
        "initial.cap_c": 1.0,
        "initial.eps": 0.0,
        "initial.mode": 0,
        "schedule.t_end": 0.01,
        "schedule.cfl_safety": 0.8,
        "schedule.record_every": 50,
        "w.horizon": 0.5,
        "out.trajectory_csv": str(path.parent / "traj.csv"),
        "out.report_jsonl": str(path.parent / "report.jsonl"),
        "verify.checks": "hamilton, guo, relation",
    }
    values.update(overrides)
    lines = ["# experiment config", ""]
    lines += [f"{k} = {v}" for k, v in values.items() if v is not None]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_parse_config_roundtrip(tmp_path):
    cfg = parse_config(str(_write_config(tmp_path / "c.cfg")))
    assert cfg.grid.n_r == 64
    assert cfg.cap.c == 1.0
    assert cfg.schedule.t_end == 0.01
    assert cfg.checks == ["hamilton", "guo", "relation"]


def test_parse_config_errors(tmp_path):
    p = _write_config(tmp_path / "c.cfg", **{"grid.n_r": None})
    with pytest.raises(ConfigurationError, match="grid.n_r"):
        parse_config(str(p))

    p = tmp_path / "u.cfg"
    _write_config(p)
    p.write_text(p.read_text() + "bogus.key = 1\n")
    with pytest.raises(ConfigurationError, match="bogus.key"):
        parse_config(str(p))

    p = tmp_path / "d.cfg"
    _write_config(p)
    p.write_text(p.read_text() + "grid.n_r = 32\n")
    with pytest.raises(ConfigurationError, match="duplicate"):
        parse_config(str(p))

    p = _write_config(tmp_path / "b.cfg", **{"schedule.t_end": "soon"})
    with pytest.raises(ConfigurationError, match="schedule.t_end"):
        parse_config(str(p))

    with pytest.raises(ConfigurationError):
        parse_config(str(tmp_path / "missing.cfg"))


def test_cmd_run_writes_trajectory(tmp_path):
    cfg = _write_config(tmp_path / "c.cfg")
    assert cmd_run(str(cfg)) == EXIT_OK
    lines = (tmp_path / "traj.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    t = data[:, 0]
    r_bar = data[:, 3]
    # hemisphere: R_bar(t) = 2 / (1 - 2t)
    assert np.max(np.abs(r_bar - 2.0 / (1.0 - 2.0 * t))) < 2e-3


def test_cmd_run_config_error_exit(tmp_path, capsys):
    cfg = _write_config(tmp_path / "c.cfg", **{"initial.cap_c": -1.0})
    assert cmd_run(str(cfg)) == EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_cmd_run_excessive_amplitude(tmp_path):
    cfg = _write_config(
        tmp_path / "c.cfg", **{"initial.cap_c": 0.3, "initial.eps": 30.0}
    )
    assert cmd_run(str(cfg)) == EXIT_CONFIG


def test_cmd_verify_full_suite(tmp_path):
    checks = (
        "hamilton, guo, avg_evolution, kappa_evolution, normal_lemmas, "
        "second_derivative_N, reilly, lemma_useful, lemma_time2, relation, "
        "negctrl_incompatible_bc, negctrl_relation_corrupt"
    )
    cfg = _write_config(
        tmp_path / "c.cfg",
        **{
            "grid.n_r": 128,
            "initial.cap_c": 0.5,
            "initial.eps": 0.05,
            "schedule.t_end": 0.02,
            "schedule.record_every": 100,
            "verify.checks": checks,
        },
    )
    assert cmd_verify(str(cfg)) == EXIT_OK
    report = (tmp_path / "report.jsonl").read_text().splitlines()
    assert len(report) == 12


def test_cmd_verify_rejects_empty_or_unknown_checks(tmp_path):
    cfg = _write_config(tmp_path / "e.cfg", **{"verify.checks": ""})
    assert cmd_verify(str(cfg)) == EXIT_CONFIG
    cfg = _write_config(tmp_path / "u.cfg", **{"verify.checks": "nope"})
    assert cmd_verify(str(cfg)) == EXIT_CONFIG


def test_cmd_verify_flags_passing_negative_control(tmp_path, monkeypatch):
    from riccidisk.verify import IdentityReport

    def fake_negctrl(grid):
        return IdentityReport(
            "negctrl_incompatible_bc", 1.0, 1.0, 0.0, 0.0, grid.spec, 0.0, True
        )

    monkeypatch.setattr(riccidisk.verify, "negctrl_incompatible_bc", fake_negctrl)
    cfg = _write_config(
        tmp_path / "c.cfg", **{"verify.checks": "negctrl_incompatible_bc"}
    )
    assert cmd_verify(str(cfg)) == EXIT_VERIFY


def test_cmd_convergence(tmp_path):
    cfg = _write_config(
        tmp_path / "c.cfg",
        **{"grid.n_r": 32, "grid.n_theta": 16, "verify.checks": "reilly"},
    )
    assert cmd_convergence(str(cfg)) == EXIT_OK
    lines = (tmp_path / "traj.csv").read_text().splitlines()
    assert lines[0] == "name,h,dt,err,observed_order"
    assert len(lines) == 4
    order = float(lines[1].split(",")[4])
    assert order > 1.5


def test_cmd_convergence_unknown_study(tmp_path):
    cfg = _write_config(tmp_path / "c.cfg", **{"verify.checks": "guo"})
    assert cmd_convergence(str(cfg)) == EXIT_CONFIG


def test_run_is_deterministic(tmp_path):
    a = _write_config(tmp_path / "a.cfg")
    assert cmd_run(str(a)) == EXIT_OK
    first = (tmp_path / "traj.csv").read_bytes()
    assert cmd_run(str(a)) == EXIT_OK
    assert (tmp_path / "traj.csv").read_bytes() == first


def test_main_dispatch(tmp_path):
    cfg = _write_config(tmp_path / "c.cfg")
    assert main(["run", str(cfg)]) == EXIT_OK
    with pytest.raises(SystemExit):
        main([])
