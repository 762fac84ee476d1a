import sys
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def stub_ocr_cmd() -> str:
    return f"{sys.executable} {FIXTURES / 'stub_ocr.py'} {{image}} {{lang}}"
