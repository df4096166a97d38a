"""Dirichlet sampling on manifolds.

Each simulated point is built from ``k`` rows drawn without replacement from
the data. One of them is the pivot; every selected row gets a kernel weight
``exp(-gamma * d**2)`` from its distance to the pivot, weights under the
threshold are pushed down to a tiny floor, and a Dirichlet draw with those
concentrations gives the convex-combination coefficients.

Row ``j`` of a sample only depends on ``(dataset, config, j)``: it is drawn
from the counter-based stream ``(config.seed, j)``. The driver can split the
rows across threads in any way and the output stays bit-identical.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba as nb
import numpy as np

from .dataset import Dataset, denormalize, normalize
from .errors import DegenerateDataError, InvalidArgumentError
from .rand import (
    DirichletParams,
    RngStream,
    dirichlet_into,
    next_below,
    stream_init,
    uniform_indices_into,
)

__all__ = [
    "Exponent",
    "Metric",
    "MetricContext",
    "Provenance",
    "ProvenanceRecord",
    "SamplerConfig",
    "SimulatedSet",
    "apply_threshold",
    "build_metric",
    "compute_alphas",
    "distance",
    "generate_one",
    "sample",
]


class Metric(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    MAHALANOBIS = "mahalanobis"


class Exponent(str, enum.Enum):
    SQUARED = "squared"
    UNSQUARED = "unsquared"


_MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class SamplerConfig:
    """Tuning parameters of one sampling run.

    ``k`` rows per combination, kernel rate ``gamma``, weight ``threshold``
    in [0, 1) and the number of rows to generate. ``alpha_floor`` replaces
    any kernel weight under the threshold (it must stay positive because a
    Dirichlet concentration of zero is undefined).
    """

    k: int
    gamma: float
    threshold: float
    n_samples: int
    metric: Metric = Metric.EUCLIDEAN
    distance_exponent: Exponent = Exponent.SQUARED
    seed: int = 0
    alpha_floor: float = 1e-7

    def __post_init__(self):
        object.__setattr__(self, "metric", Metric(self.metric))
        object.__setattr__(self, "distance_exponent", Exponent(self.distance_exponent))
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise InvalidArgumentError(f"k must be a positive integer, got {self.k}")
        if isinstance(self.n_samples, bool) or int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise InvalidArgumentError(f"n_samples must be a positive integer, got {self.n_samples}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise InvalidArgumentError(f"gamma must be finite and >= 0, got {self.gamma}")
        if not 0 <= self.threshold < 1:
            raise InvalidArgumentError(f"threshold must lie in [0, 1), got {self.threshold}")
        if not (math.isfinite(self.alpha_floor) and self.alpha_floor > 0):
            raise InvalidArgumentError(f"alpha_floor must be positive, got {self.alpha_floor}")
        if int(self.seed) != self.seed or not 0 <= self.seed <= _MAX_SEED:
            raise InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "n_samples", int(self.n_samples))
        object.__setattr__(self, "seed", int(self.seed))

    def check_against(self, dataset: Dataset) -> None:
        if self.k > dataset.m:
            raise InvalidArgumentError(
                f"k={self.k} exceeds the number of dataset rows m={dataset.m}"
            )
        if self.metric is Metric.MAHALANOBIS and dataset.m < 2:
            raise InvalidArgumentError("the Mahalanobis metric needs at least 2 dataset rows")
        if self.n_samples - 1 > _MAX_SEED:
            raise InvalidArgumentError("n_samples exceeds the stream index range")


@dataclass(frozen=True)
class MetricContext:
    kind: Metric
    inverse_covariance: np.ndarray | None = None
    ridge: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Metric(self.kind))
        if self.kind is Metric.MAHALANOBIS:
            if self.inverse_covariance is None:
                raise InvalidArgumentError("a Mahalanobis context needs an inverse covariance")
            mat = np.ascontiguousarray(self.inverse_covariance, dtype=np.float64)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise InvalidArgumentError(f"inverse covariance must be square, got {mat.shape}")
            if not np.allclose(mat, mat.T, rtol=0, atol=1e-10 * max(1.0, np.abs(mat).max())):
                raise InvalidArgumentError("inverse covariance is not symmetric")
            if not np.all(np.linalg.eigvalsh(mat) > 0):
                raise InvalidArgumentError("inverse covariance is not positive definite")
            object.__setattr__(self, "inverse_covariance", mat)
        elif self.inverse_covariance is not None:
            raise InvalidArgumentError("a Euclidean context carries no matrix")

    @property
    def dim(self) -> int | None:
        return None if self.inverse_covariance is None else self.inverse_covariance.shape[0]


def build_metric(dataset: Dataset, kind: Metric | str = Metric.EUCLIDEAN, ridge: float = 0.0) -> MetricContext:
    """Metric used for the kernel distances.

    For Mahalanobis the covariance is estimated once over the whole dataset.
    If ``cov + ridge*I`` is not positive definite the ridge grows by factors
    of ten; past ``trace(cov)`` the data is declared degenerate.
    """
    kind = Metric(kind)
    if not ridge >= 0:
        raise InvalidArgumentError(f"ridge must be >= 0, got {ridge}")
    if kind is Metric.EUCLIDEAN:
        return MetricContext(kind)
    if dataset.m < 2:
        raise InvalidArgumentError("the Mahalanobis metric needs at least 2 dataset rows")
    cov = np.atleast_2d(np.cov(dataset.values, rowvar=False, ddof=1))
    n = cov.shape[0]
    trace = float(np.trace(cov))
    eye = np.eye(n)
    r = float(ridge)
    if r == 0.0:
        start = 1e-12 * trace / n if trace > 0 else np.finfo(float).tiny
    else:
        start = r
    while True:
        inv = _try_inverse(cov + r * eye)
        if inv is not None:
            return MetricContext(kind, inv, r)
        r = start if r == 0.0 else r * 10.0
        if r > trace:
            raise DegenerateDataError(
                f"covariance stays singular after ridge escalation (ridge {r:g} > trace {trace:g})"
            )


def _try_inverse(mat):
    try:
        chol = np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        return None
    chol_inv = np.linalg.inv(chol)
    inv = chol_inv.T @ chol_inv
    inv = 0.5 * (inv + inv.T)
    if not np.all(np.isfinite(inv)) or not np.all(np.linalg.eigvalsh(inv) > 0):
        return None
    return inv


def distance(a, b, ctx: MetricContext) -> float:
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"vector lengths differ: {a.size} vs {b.size}")
    diff = a - b
    if ctx.kind is Metric.EUCLIDEAN:
        return float(np.sqrt(diff @ diff))
    if ctx.dim != a.size:
        raise InvalidArgumentError(f"metric has dimension {ctx.dim}, vectors have {a.size}")
    return float(np.sqrt(max(diff @ ctx.inverse_covariance @ diff, 0.0)))


def compute_alphas(points, pivot, gamma: float, ctx: MetricContext, exponent: Exponent | str = Exponent.SQUARED) -> np.ndarray:
    """Kernel weights of ``points`` relative to ``pivot``; exactly 1 at the pivot."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    pivot = np.asarray(pivot, dtype=np.float64).reshape(-1)
    if points.shape[1] != pivot.size:
        raise InvalidArgumentError("points and pivot have different dimensions")
    diff = points - pivot
    if ctx.kind is Metric.EUCLIDEAN:
        d2 = np.einsum("ij,ij->i", diff, diff)
    else:
        if ctx.dim != pivot.size:
            raise InvalidArgumentError(f"metric has dimension {ctx.dim}, points have {pivot.size}")
        d2 = np.maximum(np.einsum("ij,jk,ik->i", diff, ctx.inverse_covariance, diff), 0.0)
    if Exponent(exponent) is Exponent.SQUARED:
        return np.exp(-gamma * d2)
    return np.exp(-gamma * np.sqrt(d2))


def apply_threshold(alphas, threshold: float, floor: float = 1e-7) -> DirichletParams:
    """Replace weights below ``threshold`` by ``floor``.

    Weights that underflowed to zero are floored even when the threshold
    is disabled, since a zero concentration is not a valid Dirichlet.
    """
    if not 0 <= threshold < 1:
        raise InvalidArgumentError(f"threshold must lie in [0, 1), got {threshold}")
    if not floor > 0:
        raise InvalidArgumentError(f"floor must be positive, got {floor}")
    a = np.array(alphas, dtype=np.float64).reshape(-1)
    a[(a < threshold) | (a <= 0)] = floor
    return DirichletParams(a)


@dataclass(frozen=True)
class ProvenanceRecord:
    indices: np.ndarray
    pivot: int
    weights: np.ndarray


@dataclass(frozen=True)
class Provenance:
    """Per-row sources: ``indices[j]`` rows of the data, combined with ``weights[j]``."""

    indices: np.ndarray
    pivots: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return self.pivots.shape[0]

    def record(self, j: int) -> ProvenanceRecord:
        return ProvenanceRecord(self.indices[j].copy(), int(self.pivots[j]), self.weights[j].copy())


@dataclass(frozen=True)
class SimulatedSet:
    values: np.ndarray
    provenance: Provenance | None = None
    column_labels: tuple[str, ...] | None = None

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    def labels(self) -> tuple[str, ...]:
        if self.column_labels is not None:
            return self.column_labels
        return tuple(f"c{i + 1}" for i in range(self.values.shape[1]))

    def reconstruct(self, dataset: Dataset, chunk: int = 8192) -> np.ndarray:
        """Recompute every row as ``weights @ data[indices]`` from the provenance."""
        if self.provenance is None:
            raise InvalidArgumentError("this simulated set carries no provenance")
        p = self.provenance
        out = np.empty_like(self.values)
        for s in range(0, len(p), chunk):
            rows = dataset.values[p.indices[s : s + chunk]]
            out[s : s + chunk] = np.einsum("jk,jkn->jn", p.weights[s : s + chunk], rows)
        return out

    def as_dataset(self) -> Dataset:
        return Dataset(self.values, self.column_labels)


_jit = nb.njit(cache=True, nogil=True)


_inline = nb.njit(cache=True, nogil=True, inline="always")


@_inline
def _sq_dist(values, i, p, mahalanobis, inv_cov, diff):
    n = values.shape[1]
    if not mahalanobis:
        acc = 0.0
        for c in range(n):
            d = values[i, c] - values[p, c]
            acc += d * d
        return acc
    for c in range(n):
        diff[c] = values[i, c] - values[p, c]
    acc = 0.0
    for r in range(n):
        row = 0.0
        for c in range(n):
            row += inv_cov[r, c] * diff[c]
        acc += diff[r] * row
    return max(acc, 0.0)


@_jit
def _generate(values, mahalanobis, inv_cov, k, gamma, threshold, floor, squared,
              state, perm, sel, alphas, weights, scratch, out_row):
    m, n = values.shape
    uniform_indices_into(state, m, k, perm, sel)
    pos = next_below(state, k)
    p = sel[pos]
    diff = scratch[0]
    lo = scratch[1]
    hi = scratch[2]
    for i in range(k):
        d2 = _sq_dist(values, sel[i], p, mahalanobis, inv_cov, diff)
        a = np.exp(-gamma * d2) if squared else np.exp(-gamma * np.sqrt(d2))
        if a < threshold or a <= 0.0:
            a = floor
        alphas[i] = a
    dirichlet_into(state, alphas, weights)
    # pivot + sum w_i (row_i - pivot): identical rows map back exactly.
    for c in range(n):
        out_row[c] = 0.0
        lo[c] = values[p, c]
        hi[c] = values[p, c]
    for i in range(k):
        w = weights[i]
        r = sel[i]
        for c in range(n):
            x = values[r, c]
            out_row[c] += w * (x - values[p, c])
            lo[c] = min(lo[c], x)
            hi[c] = max(hi[c], x)
    for c in range(n):
        # Clamp rounding residue to the source box the exact value lies in.
        out_row[c] = min(max(values[p, c] + out_row[c], lo[c]), hi[c])
    return pos


@_jit
def _sample_block(values, mahalanobis, inv_cov, k, gamma, threshold, floor, squared,
                  seed, start, stop, out, idx_out, piv_out, w_out, keep):
    m, n = values.shape
    state = np.empty(8, dtype=np.uint64)
    perm = np.arange(m)
    sel = np.empty(k, dtype=np.int64)
    alphas = np.empty(k)
    weights = np.empty(k)
    scratch = np.empty((3, n))
    for j in range(start, stop):
        stream_init(state, seed, np.uint64(j))
        pos = _generate(values, mahalanobis, inv_cov, k, gamma, threshold, floor, squared,
                        state, perm, sel, alphas, weights, scratch, out[j])
        if keep:
            for i in range(k):
                idx_out[j, i] = sel[i]
                w_out[j, i] = weights[i]
            piv_out[j] = sel[pos]


@_jit
def _generate_single(values, mahalanobis, inv_cov, k, gamma, threshold, floor, squared,
                     state, sel, weights, out_row):
    m, n = values.shape
    return _generate(values, mahalanobis, inv_cov, k, gamma, threshold, floor, squared,
                     state, np.arange(m), sel, np.empty(k), weights, np.empty((3, n)), out_row)


def _kernel_args(dataset, config, ctx):
    if ctx.kind is not config.metric:
        raise InvalidArgumentError(f"metric context is {ctx.kind.value}, config asks for {config.metric.value}")
    if ctx.kind is Metric.MAHALANOBIS:
        if ctx.dim != dataset.n:
            raise InvalidArgumentError(f"metric has dimension {ctx.dim}, dataset has {dataset.n} columns")
        inv = ctx.inverse_covariance
    else:
        inv = np.zeros((1, 1))
    return (
        dataset.values,
        ctx.kind is Metric.MAHALANOBIS,
        inv,
        config.k,
        float(config.gamma),
        float(config.threshold),
        float(config.alpha_floor),
        config.distance_exponent is Exponent.SQUARED,
    )


def generate_one(dataset: Dataset, config: SamplerConfig, ctx: MetricContext, stream: RngStream):
    """Produce one simulated point and where it came from.

    ``sample`` row ``j`` equals ``generate_one(..., RngStream(config.seed, j))``.
    """
    config.check_against(dataset)
    args = _kernel_args(dataset, config, ctx)
    k, n = config.k, dataset.n
    sel = np.empty(k, dtype=np.int64)
    weights = np.empty(k)
    out = np.empty(n)
    pos = _generate_single(*args, stream.state, sel, weights, out)
    return out, ProvenanceRecord(sel, int(sel[pos]), weights)


def default_threads() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def sample(
    dataset: Dataset,
    config: SamplerConfig,
    *,
    ctx: MetricContext | None = None,
    ridge: float = 0.0,
    provenance: bool = False,
    threads: int | None = None,
    chunk_size: int | None = None,
) -> SimulatedSet:
    """Generate ``config.n_samples`` points in row order.

    The result does not depend on ``threads`` or ``chunk_size``; they only
    control how the rows are split across worker threads.
    """
    config.check_against(dataset)
    if ctx is None:
        ctx = build_metric(dataset, config.metric, ridge)
    args = _kernel_args(dataset, config, ctx)
    threads = default_threads() if threads is None else int(threads)
    if threads < 1:
        raise InvalidArgumentError(f"threads must be >= 1, got {threads}")
    ns, k, n = config.n_samples, config.k, dataset.n
    out = np.empty((ns, n))
    if provenance:
        idx = np.empty((ns, k), dtype=np.int64)
        piv = np.empty(ns, dtype=np.int64)
        w = np.empty((ns, k))
    else:
        idx, piv, w = np.empty((1, 1), dtype=np.int64), np.empty(1, dtype=np.int64), np.empty((1, 1))
    seed = np.uint64(config.seed)

    def run(bounds):
        _sample_block(*args, seed, bounds[0], bounds[1], out, idx, piv, w, provenance)

    if chunk_size is None:
        chunk_size = max(1024, -(-ns // (4 * threads)))
    blocks = [(s, min(s + chunk_size, ns)) for s in range(0, ns, chunk_size)]
    if threads == 1 or len(blocks) == 1:
        for b in blocks:
            run(b)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, blocks))
    prov = Provenance(idx, piv, w) if provenance else None
    return SimulatedSet(out, prov, dataset.column_labels)


def sample_normalized(dataset: Dataset, config: SamplerConfig, **kwargs) -> SimulatedSet:
    """Standardize, sample, and map the samples back to original units."""
    z = normalize(dataset)
    sim = sample(z, config, **kwargs)
    return SimulatedSet(denormalize(sim.values, z.normalization), sim.provenance, dataset.column_labels)

