from __future__ import annotations

import numpy as np
import pytest

from dsom.errors import InvalidArgumentError
from dsom.sampler import SamplerConfig, sample
from dsom.diagnostics import leakage
from dsom.testbeds import (
    MOBIUS_PAPER_Z3,
    TestbedKind,
    TestbedSpec,
    generate,
    generate_mobius_paper,
    generate_mobius_standard,
    generate_ring,
    mobius_surface,
)


def test_ring_inversion_to_unit_circle():
    ds, par = generate_ring(1000, 3, return_params=True)
    p = ds.values - par["u"]
    assert np.all(np.abs(np.hypot(p[:, 0], p[:, 1]) - 1) <= 1e-12)
    assert np.array_equal(par["u"][:, 0], par["u"][:, 1])


def test_ring_independent_noise_option():
    ds, par = generate_ring(1000, 3, independent_noise=True, return_params=True)
    assert not np.array_equal(par["u"][:, 0], par["u"][:, 1])
    p = ds.values - par["u"]
    assert np.all(np.abs(np.hypot(p[:, 0], p[:, 1]) - 1) <= 1e-12)


def test_ring_box_and_mean():
    ds = generate_ring(1000, 4)
    assert np.all(ds.values >= -1) and np.all(ds.values <= 1.5)
    assert np.all(np.abs(ds.values.mean(axis=0) - 0.25) < 0.05)


def test_generators_are_deterministic():
    assert np.array_equal(generate_ring(50, 1).values, generate_ring(50, 1).values)
    assert not np.array_equal(generate_ring(50, 1).values, generate_ring(50, 2).values)
    assert np.array_equal(generate_mobius_paper(50, 1).values, generate_mobius_paper(50, 1).values)
    assert np.array_equal(generate_mobius_standard(50, 1).values, generate_mobius_standard(50, 1).values)


def test_mobius_paper_noiseless_identities():
    z = generate_mobius_paper(1000, 5, noise_std=0.0).values
    assert np.all(z[:, 2] == MOBIUS_PAPER_Z3)
    assert abs(MOBIUS_PAPER_Z3 - 0.43879) < 1e-5
    r = (z[:, 0] / 0.25) ** 2 + ((z[:, 1] - 0.25) / 0.25) ** 2
    assert np.all(np.abs(r - 1) <= 1e-12)


def test_mobius_paper_noise_level():
    ds, par = generate_mobius_paper(1000, 6, 0.05, return_params=True)
    dev = ds.values - par["clean"]
    assert np.all(np.abs(dev.std(axis=0, ddof=1) / 0.05 - 1) < 0.15)


def test_mobius_standard_center_line():
    t = np.linspace(0, 2 * np.pi, 100)
    p = mobius_surface(t, np.zeros_like(t))
    assert np.all(np.abs(np.hypot(p[:, 0], p[:, 1]) - 1) <= 1e-12)
    assert np.all(p[:, 2] == 0)


def test_mobius_standard_radius_bounds():
    v = generate_mobius_standard(1000, 7, noise_std=0.0).values
    r2 = v[:, 0] ** 2 + v[:, 1] ** 2
    assert np.all(r2 >= 0.25 - 1e-12) and np.all(r2 <= 2.25 + 1e-12)


def test_mobius_standard_leakage_k20_gamma5():
    ds = generate_mobius_standard(1000, 8)
    sim = sample(ds, SamplerConfig(k=20, gamma=5, threshold=0.9, n_samples=10_000, seed=1))
    assert leakage(ds, sim).ratio(0.99) <= 3


@pytest.mark.parametrize("count", [0, -3, 2.5, True])
def test_count_validation(count):
    with pytest.raises(InvalidArgumentError):
        generate_ring(count, 0)


def test_negative_noise_rejected():
    with pytest.raises(InvalidArgumentError):
        generate_mobius_paper(10, 0, noise_std=-0.1)


def test_spec_dispatch():
    assert generate(TestbedSpec("ring", 10, 1)).shape == (10, 2)
    assert generate(TestbedSpec(TestbedKind.MOBIUS_PAPER, 10, 1, 0.0)).shape == (10, 3)
    assert generate(TestbedSpec("mobius-standard", 10, 1)).labels() == ("x", "y", "z")
    with pytest.raises(InvalidArgumentError):
        TestbedSpec("ring", 10, 1, noise=0.1)
    with pytest.raises(ValueError):
        TestbedSpec("torus", 10, 1)
