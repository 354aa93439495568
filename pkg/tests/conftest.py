"""Shared fixtures: the bundled period data, loaded once per session."""

import pytest

from hodgelab.services.fixtures import load_fixture


@pytest.fixture(scope="session")
def fermat():
    return load_fixture("fermat")


@pytest.fixture(scope="session")
def cm4():
    return load_fixture("cm4")


@pytest.fixture(scope="session")
def qi(fermat):
    """Q(i) with i in the upper half plane."""
    return fermat.structure.field


@pytest.fixture(scope="session")
def tc8(fermat):
    return fermat.two_class_family("tc8")


@pytest.fixture(scope="session")
def tc_half(cm4):
    """Two-class family on cm4 with (l1.l1) = 1/2."""
    return cm4.two_class_family("tc1/2")
