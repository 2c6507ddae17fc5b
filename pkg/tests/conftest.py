"""Shared fixtures: the two reference transients are simulated once per
session and reused by the unit and acceptance tests."""

import pytest

from pcmopt.geometry import Case, UnitCellSpec
from pcmopt.metrics import compute_metrics
from pcmopt.solver import simulate


@pytest.fixture(scope="session")
def baseline_history():
    """Solid-silicon chip (no PCM channel) at 100 kW/m^2."""
    return simulate(Case(cell=UnitCellSpec(no_channel=True)))


@pytest.fixture(scope="session")
def solder_history():
    """Reference 100x50 um Solder 174 channel at 100 kW/m^2."""
    return simulate(Case())


@pytest.fixture(scope="session")
def baseline_metrics(baseline_history):
    return compute_metrics(baseline_history)


@pytest.fixture(scope="session")
def solder_metrics(solder_history):
    return compute_metrics(solder_history)
