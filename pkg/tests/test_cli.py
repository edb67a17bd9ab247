"""End-to-end tests for the command line and its error reporting."""

import io

import pandas as pd
import pytest

from catrepeater.cli import main
from catrepeater.core.rate_model import RateReport
from catrepeater.errors import ConfigError, NoCrossingError, NumericDomainError, TruncationError
from catrepeater.tools.error_handler import EXIT_CONFIG, EXIT_NUMERIC, ErrorHandler
from catrepeater.tools.formatters import format_as_table, render_csv
from catrepeater.tools.verification import CheckResult


def _read(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text), comment="#")


def test_sweep_without_axes_evaluates_the_base_point(run_file, capsys):
    assert main(["sweep", "--config", run_file("")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# catrepeater sweep\n")
    frame = _read(out)
    assert len(frame) == 1
    for name in RateReport.__dataclass_fields__:
        assert name in frame.columns


def test_sweep_output_is_byte_identical(run_file, tmp_path):
    path = run_file("CHAIN_L_TOT=200\nSWEEP_ALPHA=0.8:1.6:9\nSWEEP_M=1,2\n")
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", path, "--out", str(first)]) == 0
    assert main(["sweep", "--config", path, "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    frame = _read(first.read_text())
    assert len(frame) == 18
    assert "# axis.alpha=" in first.read_text()


def test_optimize_writes_one_row(run_file, capsys):
    path = run_file("CHAIN_L_TOT=100\nOPTIMIZE_ALPHA_POINTS=5\nOPTIMIZE_M_MAX=3\n")
    assert main(["optimize", "--config", path]) == 0
    frame = _read(capsys.readouterr().out)
    assert len(frame) == 1
    assert 1 <= frame.loc[0, "best_m"] <= 3
    assert 0.3 <= frame.loc[0, "best_alpha"] <= 2.5


def test_unknown_key_exits_with_config_code(run_file, capsys):
    assert main(["sweep", "--config", run_file("CHAIN_LENGTH=5\n")]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "UnknownKey" in err
    assert "CHAIN_LENGTH" in err


def test_unknown_figure_exits_with_config_code(capsys):
    assert main(["reproduce", "9"]) == EXIT_CONFIG
    assert "UnknownFigure" in capsys.readouterr().err


def test_numeric_errors_exit_with_numeric_code(run_file, capsys, monkeypatch):
    def broken(spec):
        raise TruncationError("cutoff 5 leaves tail 1e-3")

    monkeypatch.setattr("catrepeater.commands.sweep_commands.sweep", broken)
    assert main(["sweep", "--config", run_file("")]) == EXIT_NUMERIC
    assert "TruncationError" in capsys.readouterr().err


def test_reproduce_writes_the_bundle(tmp_path, capsys):
    assert main(["reproduce", "3", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "fig3_rates.csv").is_file()
    summary = _read((tmp_path / "fig3_summary.csv").read_text())
    assert list(summary.columns) == ["quantity", "produced", "reference", "ratio"]
    assert "## " in capsys.readouterr().out


@pytest.mark.slow
def test_verify_passes_and_detects_a_perturbed_series(capsys):
    assert main(["verify", "--skip-graph"]) == 0
    assert main(["verify", "--skip-graph", "--perturb-series", "0.01"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_uses_the_configured_kraus_depth(monkeypatch, capsys):
    seen = {}

    def fake_verification(perturb_series, include_graph, k_max):
        seen.update(perturb_series=perturb_series, include_graph=include_graph, k_max=k_max)
        return [CheckResult("stub", 0.0, 1e-10)]

    monkeypatch.setenv("CATREPEATER_K_MAX", "20")
    monkeypatch.setattr("catrepeater.commands.verify_commands.run_verification", fake_verification)
    assert main(["verify", "--skip-graph"]) == 0
    assert seen == {"perturb_series": 0.0, "include_graph": False, "k_max": 20}
    assert "stub" in capsys.readouterr().out


def test_help_names_the_readout_default(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    assert "damped" in capsys.readouterr().out


# ── Error handler and formatters ──────────────────────────────────────────────


def test_error_handler_classification():
    error_type, _, suggestions, code = ErrorHandler.handle_error(ConfigError("unknown config key: X", key="X"))
    assert (error_type, code) == ("UnknownKey", EXIT_CONFIG)
    assert suggestions

    assert ErrorHandler.handle_error(NoCrossingError("no sign change"))[0] == "NoCrossing"
    assert ErrorHandler.handle_error(NoCrossingError("no sign change"))[3] == EXIT_NUMERIC
    assert ErrorHandler.handle_error(NumericDomainError("bad"))[0] == "NumericDomainError"
    assert ErrorHandler.handle_error(ConfigError("CODE_ALPHA: too small"))[0] == "InvalidValue"


def test_error_report_layout():
    error = ConfigError("unknown config key: X", key="X")
    report = ErrorHandler.format_error_response(error, "UnknownKey", "Bad key.", ["Fix it"], key="X")
    assert report.startswith("❌ **UnknownKey**")
    assert "**Key:** `X`" in report
    assert "1. Fix it" in report
    assert report.endswith("unknown config key: X")


def test_markdown_table():
    assert format_as_table([]) == "No data returned"
    table = format_as_table([{"quantity": "gain", "ratio": 0.123456}])
    assert "| gain | 0.1235 |" in table
    assert table.endswith("*1 rows*")


def test_csv_floats_round_trip():
    frame = pd.DataFrame({"x": [0.1 + 0.2, float("nan")], "n": [1, 2]})
    text = render_csv(frame, "sweep", {"alpha": 1.268})
    lines = text.splitlines()
    assert lines[:3] == ["# catrepeater sweep", "# alpha=1.268", "x,n"]
    assert lines[3] == "0.30000000000000004,1"
    assert lines[4] == "nan,2"
