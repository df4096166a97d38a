from __future__ import annotations

from pathlib import Path

import pytest

from dsom.sampler import SamplerConfig, sample
from dsom.testbeds import generate_ring

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def ring():
    return generate_ring(1000, 42)


@pytest.fixture(scope="session")
def ring_sim(ring):
    """Reference ring run: K=5, gamma=0.8, threshold=0.8, 50,000 samples."""
    config = SamplerConfig(k=5, gamma=0.8, threshold=0.8, n_samples=50_000, seed=7)
    return sample(ring, config, provenance=True, threads=1)
