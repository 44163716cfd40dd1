"""Shared fixtures: session-scoped models and default tolerances."""

import pytest

from fermichart import make_model


@pytest.fixture(scope="session")
def pw15():
    return make_model("power", alpha=1.5)


@pytest.fixture(scope="session")
def pw2():
    return make_model("power", alpha=2.0)


@pytest.fixture(scope="session")
def pw3():
    return make_model("power", alpha=3.0)


@pytest.fixture(scope="session")
def pw05():
    return make_model("power", alpha=0.5)


@pytest.fixture(scope="session")
def milne():
    return make_model("milne")


@pytest.fixture(scope="session")
def sinh_model():
    return make_model("sinh")


@pytest.fixture(scope="session")
def lg05():
    return make_model("lambda_gamma", Lambda=3.0, gamma=0.5, A=1.0)
