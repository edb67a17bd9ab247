"""Shared fixtures for the catrepeater test suite."""

from pathlib import Path
from typing import Callable

import pytest

from catrepeater.core.cat_codes import CatCode


@pytest.fixture
def small_code() -> CatCode:
    return CatCode(1.0, 1)


@pytest.fixture
def fast_search() -> dict:
    """A narrow optimizer box around the USD optimum of 1-loss codes."""
    return {"alpha_bounds": (1.1, 1.5), "alpha_points": 17, "m_max": 10}


@pytest.fixture
def run_file(tmp_path: Path) -> Callable[[str], str]:
    """Write a run file and return its path."""

    def write(text: str, name: str = "run.env") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch: pytest.MonkeyPatch) -> None:
    for name in (
        "CATREPEATER_ATTENUATION_DB_PER_KM",
        "CATREPEATER_SIGNAL_SPEED",
        "CATREPEATER_T0",
        "CATREPEATER_M_MAX",
        "CATREPEATER_K_MAX",
        "CATREPEATER_LOG_LEVEL",
        "CATREPEATER_OUTPUT_DIR",
    ):
        monkeypatch.delenv(name, raising=False)
