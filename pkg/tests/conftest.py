import numpy as np
import pytest

from nqklab.data import FeatureChain, make_synthetic


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def circles_scaled():
    """60 circles points through the full feature chain."""
    table = make_synthetic('circles', 60, 0.05, seed=3)
    scaled, _ = FeatureChain.fit(table, 2)
    return scaled


@pytest.fixture
def blobs_scaled():
    table = make_synthetic('blobs', 40, 0.5, seed=5)
    scaled, _ = FeatureChain.fit(table, 2)
    return scaled


@pytest.fixture(autouse=True)
def _isolate_env(monkeypatch):
    for name in ('NQK_THREADS', 'NQK_LOG_LEVEL', 'NQK_MAX_QUBITS'):
        monkeypatch.delenv(name, raising=False)
