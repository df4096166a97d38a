"""Build the synthetic spider-like point cloud shipped as tests/fixtures/spider.ply.

Two ellipsoidal body segments plus eight bent legs, 5,000 surface points in
total, with a face element appended so readers must skip it. Regenerate with

    python scripts/make_spider_fixture.py tests/fixtures/spider.ply
"""

from __future__ import annotations

import sys

import numpy as np

N_VERTICES = 5000
SEED = 20240917


def _ellipsoid(rng, count, center, radii):
    v = rng.normal(size=(count, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return center + v * radii


def _leg(rng, count, root, angle):
    # Upper segment rises away from the body, lower segment drops to the ground.
    knee = root + np.array([0.9 * np.cos(angle), 0.9 * np.sin(angle), 0.5])
    foot = knee + np.array([0.8 * np.cos(angle), 0.8 * np.sin(angle), -1.1])
    s = rng.uniform(0.0, 2.0, count)
    upper = s < 1.0
    axis_pts = np.where(
        upper[:, None],
        root + s[:, None] * (knee - root),
        knee + (s - 1.0)[:, None] * (foot - knee),
    )
    jitter = rng.normal(scale=0.035, size=(count, 3))
    return axis_pts + jitter


def build(seed: int = SEED) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n_body = 1800
    n_legs = N_VERTICES - n_body
    parts = [
        _ellipsoid(rng, 700, np.array([0.55, 0.0, 0.0]), np.array([0.45, 0.35, 0.25])),
        _ellipsoid(rng, n_body - 700, np.array([-0.5, 0.0, 0.05]), np.array([0.7, 0.55, 0.45])),
    ]
    per_leg = np.full(8, n_legs // 8)
    per_leg[: n_legs % 8] += 1
    angles = np.deg2rad([35, 65, 110, 145])
    for i, count in enumerate(per_leg):
        side = 1 if i < 4 else -1
        angle = side * angles[i % 4]
        root = np.array([0.4, 0.25 * side, 0.0])
        parts.append(_leg(rng, count, root, angle))
    return np.vstack(parts)


def write(path: str) -> None:
    pts = build()
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write("comment synthetic spider-like cloud, seed %d\n" % SEED)
        fh.write(f"element vertex {len(pts)}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        fh.write("element face 1\nproperty list uchar int vertex_indices\nend_header\n")
        for x, y, z in pts:
            fh.write(f"{x:.6f} {y:.6f} {z:.6f}\n")
        fh.write("3 0 1 2\n")


if __name__ == "__main__":
    write(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/spider.ply")
