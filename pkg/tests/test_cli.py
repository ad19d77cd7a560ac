from __future__ import annotations

import json
from pathlib import Path

import pytest

from relay_secrecy import EXIT_ERROR, EXIT_OK, EXIT_PUBLIC_INFEASIBLE, main

FAST = ["--power-steps", "6", "--log-level", "WARNING"]


def _config(bundled_path: Path) -> list[str]:
    return ["--config", str(bundled_path)]


def test_solve_prints_summary(bundled_path, capsys) -> None:
    code = main(["solve", *_config(bundled_path), *FAST, "--public-rate", "0"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "Status:          solved" in out
    assert "Secrecy rate:" in out
    assert "relay_secret_decode[0]" in out


def test_solve_without_power_is_public_infeasible(bundled_path, capsys) -> None:
    code = main(["solve", *_config(bundled_path), *FAST, "--total-power-db", "-100"])
    assert code == EXIT_PUBLIC_INFEASIBLE
    assert "public_infeasible" in capsys.readouterr().out


def test_missing_config_exits_with_error(tmp_path, capsys) -> None:
    code = main(["solve", "--config", str(tmp_path / "nope.json"), *FAST])
    assert code == EXIT_ERROR
    assert "Cannot access file" in capsys.readouterr().err


def test_invalid_config_exits_with_error(tmp_path, capsys) -> None:
    bad = tmp_path / "bad.json"
    bad.write_text('{"scenario": {"n_relays": 0}}', encoding="utf-8")
    assert main(["solve", "--config", str(bad), *FAST]) == EXIT_ERROR
    assert "n_relays" in capsys.readouterr().err


def test_eve_decode_with_statistical_csi_is_rejected(bundled_path, capsys) -> None:
    code = main(
        ["solve", *_config(bundled_path), *FAST, "--statistical-csi", "--eve-decode-public"]
    )
    assert code == EXIT_ERROR
    assert "perfect CSI" in capsys.readouterr().err


def test_solve_writes_trace(bundled_path, tmp_path) -> None:
    trace = tmp_path / "out" / "trace.json"
    code = main(["solve", *_config(bundled_path), *FAST, "--quiet", "--trace", str(trace)])
    assert code == EXIT_OK
    doc = json.loads(trace.read_text(encoding="utf-8"))
    assert doc["status"] == "solved"
    assert doc["trace"]
    assert {c["name"] for c in doc["constraints"]} >= {"dest_public", "total_power"}
    assert doc["scenario"]["scenario"]["n_eves"] == 3


def test_compare_no_public_reports_reference_rate(bundled_path, capsys) -> None:
    code = main(["solve", *_config(bundled_path), *FAST, "--eves", "1", "--compare-no-public"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "R_s' (R0 = 0)" in out


def test_sweep_csv_is_deterministic(bundled_path, tmp_path) -> None:
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    args = ["sweep", *_config(bundled_path), *FAST, "--quiet", "--axis", "power_db",
            "--from", "0", "--to", "6", "--points", "3", "--jobs", "1"]
    assert main([*args, "--out", str(first)]) == EXIT_OK
    assert main([*args, "--out", str(second)]) == EXIT_OK

    data = first.read_bytes()
    assert data == second.read_bytes()
    lines = data.decode("utf-8").split("\n")
    assert lines[0] == "axis,value,Rs,m_star,feasible,Ps0,Ps1,PR0,psi_norm2"
    assert len([line for line in lines if line]) == 4
    assert lines[1].startswith("power_db,0,")
    assert b"\r" not in data


def test_sweep_to_stdout(bundled_path, capsys) -> None:
    code = main(["sweep", *_config(bundled_path), *FAST, "--axis", "public_rate",
                 "--from", "0", "--to", "0.4", "--points", "2", "--jobs", "1"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert out.splitlines()[0].startswith("axis,value,Rs")
    assert out.splitlines()[2].startswith("public_rate,0.4,")


def test_sweep_rejects_reversed_range(bundled_path) -> None:
    code = main(["sweep", *_config(bundled_path), *FAST, "--from", "6", "--to", "0"])
    assert code == EXIT_ERROR


def test_oracle_check_without_trials_passes(bundled_path) -> None:
    code = main(["oracle-check", *_config(bundled_path), "--trials", "0"])
    assert code == EXIT_OK


@pytest.mark.slow
def test_oracle_check_zero_tolerance_fails(bundled_path, capsys) -> None:
    code = main(["oracle-check", *_config(bundled_path), "--trials", "1", "--tolerance", "0",
                 "--power-points", "20", "--phase-points", "12", "--log-level", "WARNING"])
    assert code == EXIT_ERROR
    assert "0/1 trials within tolerance" in capsys.readouterr().out
