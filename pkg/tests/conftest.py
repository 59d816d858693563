"""Shared fixtures: the reference operating point and Fock spaces."""

import pytest

from rabisqueeze import FockSpace, ModelParams


@pytest.fixture(scope="session")
def params():
    """g/omega = 0.1, Delta/omega = 2: the point used for most anchors."""
    return ModelParams.from_ratios(g_over_omega=0.1, delta_over_omega=2.0)


@pytest.fixture(scope="session")
def space():
    return FockSpace(60)


@pytest.fixture(scope="session")
def small_space():
    return FockSpace(30)
