import json
import sys
from pathlib import Path

import numpy as np
import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))


def dec(obj):
    m = np.array(obj["re"]) + 1j * np.array(obj["im"])
    return m.reshape(obj["shape"])


@pytest.fixture(scope="session")
def frozen():
    return json.loads((HERE / "data" / "oracles.json").read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_guard(monkeypatch):
    monkeypatch.setenv("ZEQ_MAX_AMBIENT", "64")
