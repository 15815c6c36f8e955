import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from data.data_generator import OracleDataGenerator  # noqa: E402
from utils.statevector import RegisterLayout  # noqa: E402


@pytest.fixture
def generator():
    return OracleDataGenerator(seed=1234)


@pytest.fixture
def small_layout():
    return RegisterLayout.from_widths(I=2, B=3, flag=1)


@pytest.fixture(autouse=True)
def default_qubit_budget(monkeypatch):
    monkeypatch.delenv("INEQPREP_MAX_QUBITS", raising=False)
