from fractions import Fraction
from pathlib import Path

import pytest

from config import Config
from errors import ConfigurationError
from utils import format_float, format_time, parse_float_list, parse_int_list, parse_rational
from version import (
    __version__, get_app_identifier, get_stack_versions, get_version_display, get_version_info,
    get_version_string,
)


class TestFormatting:
    @pytest.mark.parametrize("seconds, text", [
        (None, "N/A"),
        (0.25, "250ms"),
        (65, "1m 5s"),
        (3725, "1h 2m"),
    ])
    def test_format_time(self, seconds, text):
        assert format_time(seconds) == text

    def test_format_float_round_trips(self):
        value = 0.1 + 0.2
        assert float(format_float(value)) == value
        assert format_float(None) == ""


class TestParsing:
    def test_rational(self):
        assert parse_rational("3/4") == Fraction(3, 4)
        assert parse_rational(" 0.75 ") == Fraction(3, 4)
        assert parse_rational(Fraction(1, 2)) == Fraction(1, 2)
        with pytest.raises(ConfigurationError):
            parse_rational("three quarters")
        with pytest.raises(ConfigurationError):
            parse_rational("1/0")

    def test_float_list(self):
        assert parse_float_list("0.9, 0.99 0.999") == [0.9, 0.99, 0.999]
        assert parse_float_list([0.5, "0.75"]) == [0.5, 0.75]
        with pytest.raises(ConfigurationError):
            parse_float_list("0.9, high")

    def test_int_list(self):
        assert parse_int_list("4-9") == [4, 5, 6, 7, 8, 9]
        assert parse_int_list("5, 6 7") == [5, 6, 7]
        assert parse_int_list([3, "4"]) == [3, 4]
        with pytest.raises(ConfigurationError):
            parse_int_list("4-x")
        with pytest.raises(ConfigurationError):
            parse_int_list("4,five")


class TestConfig:
    def test_thread_count_from_environment(self, monkeypatch):
        monkeypatch.setenv(Config.THREADS_ENV_VAR, "3")
        assert Config.get_thread_count() == 3

    @pytest.mark.parametrize("raw", ["", "zero", "0", "-2"])
    def test_thread_count_fallback(self, monkeypatch, raw):
        monkeypatch.setenv(Config.THREADS_ENV_VAR, raw)
        assert Config.get_thread_count() >= 1

    def test_output_paths(self, tmp_path):
        assert Config.get_output_dir() == Path(Config.OUTPUT_DIR)
        assert Config.get_output_dir(tmp_path) == tmp_path
        assert Config.get_runs_log_file(tmp_path) == tmp_path / "runs.jsonl"

    def test_csv_columns(self):
        assert Config.CSV_COLUMNS[:8] == ("h", "s", "b", "sigma1", "sigma2", "sigma3", "alpha", "model")


class TestVersion:
    def test_version_strings(self):
        assert get_version_display().startswith(f"v{__version__}")
        assert get_app_identifier() == f"fractrans v{__version__}"
        assert get_version_info()["version"] == __version__

    def test_stack_versions(self):
        versions = get_stack_versions()
        assert {"python", "numpy", "scipy", "fractrans"} <= set(versions)
        assert versions["fractrans"] == get_version_string() == __version__
