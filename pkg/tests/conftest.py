import numpy as np
import pytest

from hbvwave import model
from hbvwave.presets import load_preset


@pytest.fixture(scope="session")
def table1() -> model.DimensionalParams:
    return load_preset("table1")


@pytest.fixture(scope="session")
def table1_valid(table1) -> model.ValidatedParams:
    return model.validate(table1)


@pytest.fixture(scope="session")
def table1_scaled(table1_valid) -> model.ScaledParams:
    return model.scale(table1_valid)


@pytest.fixture(scope="session")
def reference() -> model.ScaledParams:
    return load_preset("reference")


@pytest.fixture(scope="session")
def paper_rho() -> model.ScaledParams:
    return load_preset("paper-rho")


def random_dimensional(rng: np.random.Generator) -> model.DimensionalParams:
    """One random draw from wide log-uniform ranges; may fail validation."""

    def logu(lo, hi):
        return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))

    return model.DimensionalParams(
        lambda_=logu(1e5, 1e8),
        k=logu(1e-13, 1e-9),
        mu=logu(1e-3, 1.0),
        delta=logu(1e-2, 1.0),
        a=logu(1.0, 1e3),
        gamma=logu(1e-2, 10.0),
        alpha=float(rng.uniform(0.05, 1.0)),
        beta=logu(1e-2, 10.0),
        delta_v=logu(0.1, 100.0),
        d_v=logu(1e-3, 1.0),
    )


def random_valid(rng: np.random.Generator) -> model.ValidatedParams:
    while True:
        try:
            return model.validate(random_dimensional(rng))
        except model.ParameterError:
            continue
