"""Shared fixtures; the modules live flat at the repository root"""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from config import Config  # noqa: E402
from mesh_interface import build_mesh  # noqa: E402


@pytest.fixture(autouse=True)
def quiet_console():
    """Status lines off during tests; restored afterwards"""
    previous = Config.QUIET
    Config.QUIET = True
    yield
    Config.QUIET = previous


@pytest.fixture
def half_mesh():
    """b = 1/2, 16 cells"""
    return build_mesh("1/2", 3)


@pytest.fixture
def quarter_mesh():
    """b = 3/4, 8 cells"""
    return build_mesh("3/4", 1)
