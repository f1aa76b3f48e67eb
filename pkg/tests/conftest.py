import pytest

from model.params import ModelParams, validate_params


@pytest.fixture(scope="session")
def fig1_params() -> ModelParams:
    """Unequal couplings g1 = 2 g2 = 0.8."""
    return validate_params(0.7, 0.4, 0.8, 0.4)


@pytest.fixture(scope="session")
def fig2_params() -> ModelParams:
    """Equal couplings g1 = g2 = 0.4 with unequal splittings."""
    return validate_params(0.7, 0.4, 0.4, 0.4)


@pytest.fixture(scope="session")
def dark_even_params() -> ModelParams:
    """(D1 + D2)^2 = 1: E = 1 in the even sector for every g."""
    return validate_params(0.7, 0.3, 0.2, 0.2)


@pytest.fixture(scope="session")
def dark_odd_params() -> ModelParams:
    """(D1 - D2)^2 = 1: E = 1 in the odd sector for every g."""
    return validate_params(1.3, 0.3, 0.2, 0.2)


@pytest.fixture(scope="session")
def singlet_params() -> ModelParams:
    return validate_params(0.5, 0.5, 0.3, 0.3)


@pytest.fixture(scope="session")
def uncoupled_params() -> ModelParams:
    return validate_params(0.7, 0.4, 0.0, 0.0)


@pytest.fixture(scope="session")
def displaced_params() -> ModelParams:
    """No splittings: the spectrum is {n - g^2, n - g'^2}."""
    return validate_params(0.0, 0.0, 0.5, 0.2)
