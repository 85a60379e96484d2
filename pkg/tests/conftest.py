import pytest

from qsnet.optical import load_calibration_table
from qsnet.topology import load_topology


@pytest.fixture(scope="session")
def table():
    return load_calibration_table()


@pytest.fixture(scope="session")
def topology():
    return load_topology()
