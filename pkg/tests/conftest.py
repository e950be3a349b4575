"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from nematicflow import GridSpec


@pytest.fixture(scope="session")
def grid16():
    return GridSpec(16)


@pytest.fixture(scope="session")
def grid32():
    return GridSpec(32)


@pytest.fixture(scope="session")
def grid64():
    return GridSpec(64)


@pytest.fixture
def rng():
    """A fresh deterministic generator per test."""
    return np.random.default_rng(20260816)
