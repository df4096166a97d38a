"""Synthetic point clouds with known geometry: a noisy ring and Möbius variants."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import InvalidArgumentError

__all__ = [
    "TestbedKind",
    "TestbedSpec",
    "generate",
    "generate_mobius_paper",
    "generate_mobius_standard",
    "generate_ring",
    "mobius_paper_curve",
    "mobius_surface",
]

MOBIUS_PAPER_Z3 = 0.5 * np.cos(0.5)


def _check(count, noise=0.0):
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise InvalidArgumentError(f"count must be a positive integer, got {count}")
    if not noise >= 0:
        raise InvalidArgumentError(f"noise must be nonnegative, got {noise}")


def generate_ring(count: int, seed: int, *, independent_noise: bool = False, return_params: bool = False):
    """Points ``(cos t + U, sin t + U)`` with t ~ U[0, 2pi] and U ~ U[0, 0.5].

    By default one U is shared by both coordinates, which smears the unit
    circle along the diagonal; ``independent_noise`` draws U per coordinate.
    With ``return_params`` the latent ``(theta, u)`` arrays come back too
    (``u`` has shape ``(count, 2)``).
    """
    _check(count)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, count)
    if independent_noise:
        u = rng.uniform(0.0, 0.5, (count, 2))
    else:
        u = np.repeat(rng.uniform(0.0, 0.5, count)[:, None], 2, axis=1)
    ds = Dataset(np.column_stack([np.cos(theta), np.sin(theta)]) + u, ("z1", "z2"))
    return (ds, {"theta": theta, "u": u}) if return_params else ds


def mobius_paper_curve(t) -> np.ndarray:
    """Noiseless literal Möbius testbed, degenerate third coordinate included.

    The third coordinate is the constant ``0.5 cos(0.5)``; the first two
    trace the circle of radius 0.25 centered at (0, 0.25).
    """
    t = np.asarray(t, dtype=np.float64)
    h = 0.5 * t
    return np.column_stack(
        [0.5 * np.sin(h) * np.cos(h), 0.5 * np.cos(h) * np.cos(h), np.full(t.shape, MOBIUS_PAPER_Z3)]
    )


def generate_mobius_paper(count: int, seed: int, noise_std: float = 0.05, *, return_params: bool = False):
    _check(count, noise_std)
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, 8.0 * np.pi, count)
    clean = mobius_paper_curve(t)
    eps = rng.normal(0.0, noise_std, clean.shape) if noise_std > 0 else np.zeros_like(clean)
    ds = Dataset(clean + eps, ("z1", "z2", "z3"))
    return (ds, {"t": t, "clean": clean}) if return_params else ds


def mobius_surface(t, w) -> np.ndarray:
    """Canonical Möbius strip of half-width 1/2 around the unit circle."""
    t = np.asarray(t, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    r = 1.0 + 0.5 * w * np.cos(0.5 * t)
    return np.column_stack([r * np.cos(t), r * np.sin(t), 0.5 * w * np.sin(0.5 * t)])


def generate_mobius_standard(count: int, seed: int, noise_std: float = 0.05, *, return_params: bool = False):
    _check(count, noise_std)
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, 2.0 * np.pi, count)
    w = rng.uniform(-1.0, 1.0, count)
    clean = mobius_surface(t, w)
    eps = rng.normal(0.0, noise_std, clean.shape) if noise_std > 0 else np.zeros_like(clean)
    ds = Dataset(clean + eps, ("x", "y", "z"))
    return (ds, {"t": t, "w": w, "clean": clean}) if return_params else ds


class TestbedKind(str, enum.Enum):
    __test__ = False

    RING = "ring"
    MOBIUS_PAPER = "mobius-paper"
    MOBIUS_STANDARD = "mobius-standard"


@dataclass(frozen=True)
class TestbedSpec:
    __test__ = False

    kind: TestbedKind
    count: int
    seed: int
    noise: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", TestbedKind(self.kind))
        _check(self.count, 0.0 if self.noise is None else self.noise)
        if self.noise is not None and self.kind is TestbedKind.RING:
            raise InvalidArgumentError("the ring's noise is fixed at U[0, 0.5]; noise does not apply")


def generate(spec: TestbedSpec) -> Dataset:
    if spec.kind is TestbedKind.RING:
        return generate_ring(spec.count, spec.seed)
    noise = 0.05 if spec.noise is None else spec.noise
    if spec.kind is TestbedKind.MOBIUS_PAPER:
        return generate_mobius_paper(spec.count, spec.seed, noise)
    return generate_mobius_standard(spec.count, spec.seed, noise)
