"""Tests for utils.py."""

import pytest

from src.utils import evaluate_concurrently, get_configs, get_int_config, resolve_thread_count


class TestConfigs:
    """Test environment configuration helpers."""

    def test_get_configs(self, monkeypatch):
        """Test unset and blank values fall back to the default."""
        monkeypatch.delenv("WAVECORR_TEST_VALUE", raising=False)
        assert get_configs("WAVECORR_TEST_VALUE", default_value="x") == "x"
        assert get_configs("WAVECORR_TEST_VALUE") is None
        monkeypatch.setenv("WAVECORR_TEST_VALUE", " ")
        assert get_configs("WAVECORR_TEST_VALUE", default_value="x") == "x"
        monkeypatch.setenv("WAVECORR_TEST_VALUE", " 7 ")
        assert get_configs("WAVECORR_TEST_VALUE") == "7"

    def test_get_int_config(self, monkeypatch):
        """Test integer parsing with a fallback on bad values."""
        monkeypatch.setenv("WAVECORR_TEST_INT", "12")
        assert get_int_config("WAVECORR_TEST_INT", 3) == 12
        monkeypatch.setenv("WAVECORR_TEST_INT", "twelve")
        assert get_int_config("WAVECORR_TEST_INT", 3) == 3


class TestConcurrency:
    """Test the thread pool helper."""

    def test_thread_count(self, monkeypatch):
        """Test explicit requests win and 0 means all CPUs."""
        monkeypatch.setenv("WAVECORR_THREADS", "3")
        assert resolve_thread_count() == 3
        assert resolve_thread_count(2) == 2
        assert resolve_thread_count(0) >= 1

    @pytest.mark.parametrize("threads", [1, 4])
    def test_order_is_preserved(self, threads):
        """Test results come back in submission order."""
        assert evaluate_concurrently(lambda v: v * v, range(20), threads) == [
            v * v for v in range(20)
        ]
