"""
Pytest configuration and fixtures for lambda-flows tests
"""

import shutil
import sys
import tempfile
from pathlib import Path

import pytest

SRC = Path(__file__).resolve().parent.parent / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from lambda_flows.lookdown import LookdownGraphN, ReproductionEvent  # noqa: E402
from lambda_flows.measure import make_measure  # noqa: E402


@pytest.fixture
def temp_dir():
    """Create a temporary directory for output files"""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def kingman():
    """Lambda = delta_0"""
    return make_measure({"family": "dirac0"})


@pytest.fixture
def lebesgue():
    """Lambda(du) = du"""
    return make_measure({"family": "lebesgue"})


@pytest.fixture
def dirac_half():
    """Lambda = delta_{1/2}, a DISCRETE measure with nu({1/2}) = 4"""
    return make_measure({"family": "dirac", "x": 0.5, "mass": 1.0})


@pytest.fixture
def beta15():
    """Beta(1/2, 3/2), a CDI measure"""
    return make_measure({"family": "beta", "alpha": 1.5})


@pytest.fixture
def beta05():
    """Beta(3/2, 1/2), intensive with dust and u log u finite"""
    return make_measure({"family": "beta", "alpha": 0.5})


@pytest.fixture
def small_graph():
    """Five levels, three hand-made events on (0, 1]"""
    events = (
        ReproductionEvent(0.2, (2, 4)),
        ReproductionEvent(0.5, (1, 2, 5)),
        ReproductionEvent(0.8, (3, 4)),
    )
    return LookdownGraphN(n=5, window=(0.0, 1.0), events=events)
