import sys
from pathlib import Path

import pytest

# 讓 pytest 從專案根目錄找得到 app 套件
ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from app.core.config import get_settings  # noqa: E402
from app.rings.builder import make_ring  # noqa: E402


@pytest.fixture
def settings():
    return get_settings()


@pytest.fixture
def ring():
    """以描述字串建環的小工具。"""
    return lambda expr: make_ring(expr)


@pytest.fixture
def grids_dir() -> Path:
    return ROOT / "data" / "grids"


@pytest.fixture
def corpus_path() -> Path:
    return ROOT / "data" / "corpus" / "expressions.txt"
