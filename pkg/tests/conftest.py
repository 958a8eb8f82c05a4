import numpy as np
import pytest

from dtaopt.metrics import registry_lookup

# the full registry with the three F variants the comparisons use
REGISTRY_SPECS = [
    ("AM", 1.0),
    ("F_beta", 0.5),
    ("F_beta", 1.0),
    ("F_beta", 2.0),
    ("Jaccard", 1.0),
    ("G-TPPR", 1.0),
    ("G-Mean", 1.0),
    ("H-Mean", 1.0),
    ("Q-Mean", 1.0),
    ("SEC", 1.0),
]


@pytest.fixture(scope="session")
def registry_metrics():
    return [registry_lookup(name, beta=beta) for name, beta in REGISTRY_SPECS]


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
