"""Convergence curves, off-manifold leakage and 2-D density grids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .dataset import Dataset
from .errors import InvalidArgumentError
from .sampler import SimulatedSet

__all__ = [
    "ConvergenceReport",
    "DensityGrid",
    "LeakageReport",
    "conv_corr",
    "conv_mean",
    "convergence_report",
    "default_checkpoints",
    "kde_grid",
    "leakage",
    "nearest_neighbors",
    "scott_bandwidth",
]


def _matrix(x, name):
    if isinstance(x, (Dataset, SimulatedSet)):
        x = x.values
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise InvalidArgumentError(f"{name} must be a nonempty 2-D matrix, got shape {x.shape}")
    return x


def _checkpoints(checkpoints, n_rows, minimum):
    cps = np.asarray(checkpoints, dtype=np.int64).reshape(-1)
    if cps.size == 0:
        raise InvalidArgumentError("no checkpoints given")
    if np.any(np.diff(cps) <= 0):
        raise InvalidArgumentError("checkpoints must be strictly increasing")
    if cps[0] < minimum or cps[-1] > n_rows:
        raise InvalidArgumentError(
            f"checkpoints must lie in [{minimum}, {n_rows}], got {cps[0]}..{cps[-1]}"
        )
    return cps


def default_checkpoints(n_samples: int, count: int = 50, start: int = 2) -> np.ndarray:
    """Roughly log-spaced checkpoints ending at ``n_samples``."""
    if n_samples < start:
        return np.array([n_samples], dtype=np.int64)
    pts = np.geomspace(start, n_samples, num=min(count, n_samples - start + 1))
    return np.unique(np.round(pts).astype(np.int64))


def conv_mean(data, sim, checkpoints) -> np.ndarray:
    """Mean distance of the first ``n`` simulated rows to the data centroid.

    Normalized by the centroid norm. Sums are exactly rounded (``math.fsum``)
    so the terminal value does not depend on row order.
    """
    y = _matrix(data, "data")
    s = _matrix(sim, "sim")
    if s.shape[1] != y.shape[1]:
        raise InvalidArgumentError("data and sim have different column counts")
    cps = _checkpoints(checkpoints, s.shape[0], 1)
    center = y.mean(axis=0)
    denom = float(np.sqrt(center @ center))
    if denom == 0.0:
        raise ZeroDivisionError(
            "the data mean has zero norm; conv1 is undefined (recenter or shift the data first)"
        )
    dev = np.sqrt(np.einsum("ij,ij->i", s - center, s - center))
    return np.array([math.fsum(dev[:n]) / n / denom for n in cps])


def _exact_gram(x, rows):
    """``x[:n].T @ x[:n]`` for each n in ``rows``, every entry an exactly rounded sum."""
    p = x.shape[1]
    out = np.empty((len(rows), p, p))
    for a in range(p):
        for b in range(a, p):
            prod = x[:, a] * x[:, b]
            for r, n in enumerate(rows):
                out[r, a, b] = out[r, b, a] = math.fsum(prod[:n])
    return out


def conv_corr(data, sim, checkpoints, *, centered: bool = False) -> np.ndarray:
    """Relative Frobenius distance between second-moment matrices.

    Compares ``Y_n.T @ Y_n / (n - 1)`` over the first ``n`` simulated rows
    with ``D.T @ D / (m - 1)`` over the data. ``centered=True`` subtracts
    each set's own mean first (a covariance comparison).
    """
    y = _matrix(data, "data")
    s = _matrix(sim, "sim")
    if s.shape[1] != y.shape[1]:
        raise InvalidArgumentError("data and sim have different column counts")
    m = y.shape[0]
    if m < 2:
        raise InvalidArgumentError("conv2 needs at least 2 data rows")
    cps = _checkpoints(checkpoints, s.shape[0], 2)
    if centered:
        ref = _exact_gram(y - y.mean(axis=0), [m])[0] / (m - 1)
        grams = np.stack([_exact_gram(s[:n] - s[:n].mean(axis=0), [n])[0] for n in cps])
    else:
        ref = _exact_gram(y, [m])[0] / (m - 1)
        grams = _exact_gram(s, cps)
    denom = np.linalg.norm(ref)
    if denom == 0.0:
        raise ZeroDivisionError("the reference second-moment matrix is zero; conv2 is undefined")
    moments = grams / (cps - 1)[:, None, None]
    return np.linalg.norm(moments - ref, axis=(1, 2)) / denom


@dataclass(frozen=True)
class ConvergenceReport:
    checkpoints: np.ndarray
    conv1: np.ndarray
    conv2: np.ndarray

    def __post_init__(self):
        cps = np.asarray(self.checkpoints, dtype=np.int64)
        c1 = np.asarray(self.conv1, dtype=np.float64)
        c2 = np.asarray(self.conv2, dtype=np.float64)
        if not (cps.shape == c1.shape == c2.shape) or cps.ndim != 1:
            raise InvalidArgumentError("checkpoints, conv1 and conv2 must have equal lengths")
        if np.any(np.diff(cps) <= 0):
            raise InvalidArgumentError("checkpoints must be strictly increasing")
        for v in (c1, c2):
            if not np.all(np.isfinite(v)) or np.any(v < 0):
                raise InvalidArgumentError("convergence values must be finite and nonnegative")
        object.__setattr__(self, "checkpoints", cps)
        object.__setattr__(self, "conv1", c1)
        object.__setattr__(self, "conv2", c2)


def convergence_report(data, sim, checkpoints=None, *, centered: bool = False) -> ConvergenceReport:
    s = _matrix(sim, "sim")
    if checkpoints is None:
        checkpoints = default_checkpoints(s.shape[0])
    return ConvergenceReport(
        np.asarray(checkpoints),
        conv_mean(data, s, checkpoints),
        conv_corr(data, s, checkpoints, centered=centered),
    )


@nb.njit(cache=True, nogil=True)
def _nn_brute(queries, ref, exclude_self):
    nq, n = queries.shape
    nr = ref.shape[0]
    dist = np.empty(nq)
    idx = np.empty(nq, dtype=np.int64)
    for q in range(nq):
        best = np.inf
        arg = -1
        for r in range(nr):
            if exclude_self and r == q:
                continue
            acc = 0.0
            for c in range(n):
                d = queries[q, c] - ref[r, c]
                acc += d * d
                if acc >= best:
                    break
            if acc < best:
                best = acc
                arg = r
        dist[q] = np.sqrt(best)
        idx[q] = arg
    return dist, idx


def nearest_neighbors(queries, reference, *, exclude_self: bool = False):
    """Brute-force Euclidean nearest neighbor of every query row.

    With ``exclude_self`` the queries must be the reference set itself and
    row ``i`` may not match itself. Returns ``(distances, indices)``.
    """
    q = np.ascontiguousarray(_matrix(queries, "queries"))
    r = np.ascontiguousarray(_matrix(reference, "reference"))
    if q.shape[1] != r.shape[1]:
        raise InvalidArgumentError("queries and reference have different column counts")
    if exclude_self and (q.shape[0] != r.shape[0] or r.shape[0] < 2):
        raise InvalidArgumentError("exclude_self needs the reference itself with at least 2 rows")
    return _nn_brute(q, r, exclude_self)


@dataclass(frozen=True)
class LeakageReport:
    """Nearest-data-point distance quantiles for simulated and original rows."""

    quantiles: dict[float, float]
    reference_quantiles: dict[float, float]

    def ratio(self, level: float) -> float:
        ref = self.reference_quantiles[level]
        return math.inf if ref == 0 else self.quantiles[level] / ref


DEFAULT_LEVELS = (0.5, 0.9, 0.95, 0.99)


def leakage(data, sim, levels=DEFAULT_LEVELS) -> LeakageReport:
    y = _matrix(data, "data")
    s = _matrix(sim, "sim")
    levels = [float(p) for p in levels]
    if any(not 0 <= p <= 1 for p in levels):
        raise InvalidArgumentError("probability levels must lie in [0, 1]")
    sim_d, _ = nearest_neighbors(s, y)
    q = np.quantile(sim_d, levels)
    if y.shape[0] >= 2:
        ref_d, _ = nearest_neighbors(y, y, exclude_self=True)
        rq = np.quantile(ref_d, levels)
    else:
        rq = np.zeros(len(levels))
    return LeakageReport(dict(zip(levels, q.tolist())), dict(zip(levels, rq.tolist())))


def scott_bandwidth(x) -> float:
    """Scott's rule for one axis of a 2-D Gaussian KDE: sigma * N**(-1/6)."""
    x = np.asarray(x, dtype=np.float64)
    return float(x.std(ddof=1) * x.size ** (-1.0 / 6.0))


@dataclass(frozen=True)
class DensityGrid:
    """KDE values on a regular grid; ``density[i, j]`` sits at ``(x_edges[i], y_edges[j])``."""

    x_edges: np.ndarray
    y_edges: np.ndarray
    density: np.ndarray
    bandwidths: tuple[float, float]

    def __post_init__(self):
        if self.density.shape != (self.x_edges.size, self.y_edges.size):
            raise InvalidArgumentError("density shape does not match the grid")
        if np.any(self.density < 0):
            raise InvalidArgumentError("density must be nonnegative")

    def integral(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.density, self.y_edges, axis=1), self.x_edges))

    def at(self, points) -> np.ndarray:
        """Bilinear interpolation; zero outside the grid."""
        interp = RegularGridInterpolator(
            (self.x_edges, self.y_edges), self.density, bounds_error=False, fill_value=0.0
        )
        return interp(np.atleast_2d(points))


def kde_grid(points, grid=(128, 128), bandwidths=None) -> DensityGrid:
    """Gaussian product-kernel density on a grid spanning ``[min - 3h, max + 3h]``.

    The kernel is separable, so the grid is ``Kx @ Ky.T / N`` with one
    kernel matrix per axis.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidArgumentError(f"kde_grid needs exactly 2 columns, got shape {pts.shape}")
    if pts.shape[0] < 2:
        raise InvalidArgumentError("kde_grid needs at least 2 points")
    nx, ny = (int(g) for g in grid)
    if nx < 2 or ny < 2:
        raise InvalidArgumentError(f"grid resolution must be at least 2x2, got {nx}x{ny}")
    if bandwidths is None:
        if np.any(np.ptp(pts, axis=0) == 0):
            raise InvalidArgumentError("an axis has zero spread; give explicit bandwidths")
        h = (scott_bandwidth(pts[:, 0]), scott_bandwidth(pts[:, 1]))
    else:
        h = tuple(float(b) for b in bandwidths)
        if len(h) != 2 or not all(b > 0 and math.isfinite(b) for b in h):
            raise InvalidArgumentError(f"bandwidths must be two positive numbers, got {bandwidths}")
    axes = []
    kernels = []
    for col, size, bw in ((0, nx, h[0]), (1, ny, h[1])):
        x = pts[:, col]
        ax = np.linspace(x.min() - 3 * bw, x.max() + 3 * bw, size)
        axes.append(ax)
        z = (ax[:, None] - x[None, :]) / bw
        kernels.append(np.exp(-0.5 * z * z) / (bw * math.sqrt(2 * math.pi)))
    dens = kernels[0] @ kernels[1].T / pts.shape[0]
    total = np.trapezoid(np.trapezoid(dens, axes[1], axis=1), axes[0])
    return DensityGrid(axes[0], axes[1], dens / total, h)
