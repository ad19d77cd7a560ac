from __future__ import annotations

import logging

from modules.config import Config
from modules.logger import ProgressBar, setup_logging


def test_progress_bar_counts_failures_and_clamps() -> None:
    bar = ProgressBar(4, "Sweep power_db", width=8, enabled=False)
    bar.update(1)
    bar.update(2, failed=True)
    bar.update(5)

    line = bar.render("power_db=6")
    assert bar.current == 4
    assert bar.failed == 2
    assert line.startswith("Sweep power_db [########] 4/4 ")
    assert "2 failed" in line
    assert line.endswith(" power_db=6")
    assert "eta" not in line


def test_disabled_progress_bar_draws_nothing(capsys) -> None:
    bar = ProgressBar(3, "Oracle check", enabled=False)
    bar.update(1, "trial 0")
    bar.finish()
    assert bar.current == 3
    assert capsys.readouterr().err == ""


def test_enabled_progress_bar_ends_line(capsys) -> None:
    bar = ProgressBar(2, "Oracle check", width=4, enabled=True)
    bar.update(1)
    bar.update(1)
    err = capsys.readouterr().err
    assert err.startswith("\rOracle check [##..] 1/2 ")
    assert err.endswith("\n")


def test_quiet_logging_shows_errors_only(tmp_path) -> None:
    log_file = tmp_path / "solve.log"
    setup_logging(level="INFO", log_file=str(log_file), quiet=True)
    root = logging.getLogger()
    console, file_handler = root.handlers
    assert console.level == logging.ERROR
    assert file_handler.level == logging.DEBUG

    logging.getLogger("modules.allocator").debug("bracket [0, 1]")
    file_handler.flush()
    assert "bracket [0, 1]" in log_file.read_text(encoding="utf-8")
    file_handler.close()
    root.handlers.clear()


def test_default_config_is_valid() -> None:
    assert Config.validate() == []
