"""The observation matrix and its optional z-score metadata."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

__all__ = ["Dataset", "Normalization", "denormalize", "normalize"]


@dataclass(frozen=True)
class Normalization:
    """Per-column affine map: ``original = normalized * std + mean``."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "std", np.asarray(self.std, dtype=np.float64).reshape(-1))
        if self.mean.shape != self.std.shape:
            raise InvalidArgumentError("normalization mean and std lengths differ")
        if np.any(self.std <= 0) or not np.all(np.isfinite(self.std)):
            raise InvalidArgumentError("normalization std must be positive and finite")


@dataclass(frozen=True)
class Dataset:
    """An ``m x n`` matrix of finite observations, one row per point."""

    values: np.ndarray
    column_labels: tuple[str, ...] | None = None
    normalization: Normalization | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if v.ndim == 1:
            v = v.reshape(1, -1)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InvalidArgumentError(f"dataset must be a nonempty 2-D matrix, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            bad = np.argwhere(~np.isfinite(v))[0]
            raise InvalidArgumentError(f"dataset entry at row {bad[0]}, column {bad[1]} is not finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.column_labels is not None:
            labels = tuple(str(x) for x in self.column_labels)
            if len(labels) != v.shape[1]:
                raise InvalidArgumentError(
                    f"{len(labels)} column labels given for {v.shape[1]} columns"
                )
            object.__setattr__(self, "column_labels", labels)
        if self.normalization is not None and self.normalization.mean.size != v.shape[1]:
            raise InvalidArgumentError("normalization length does not match column count")

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def labels(self) -> tuple[str, ...]:
        """Column labels, defaulting to ``c1 .. cn``."""
        if self.column_labels is not None:
            return self.column_labels
        return tuple(f"c{i + 1}" for i in range(self.n))

    def row_mean(self) -> np.ndarray:
        return self.values.mean(axis=0)


def normalize(dataset: Dataset) -> Dataset:
    """Standardize every column to mean 0 and sample std 1.

    The stored parameters always map back to the *original* units, so
    normalizing an already normalized dataset composes the two maps.
    """
    v = dataset.values
    if dataset.m < 2:
        raise InvalidArgumentError("normalization needs at least 2 rows")
    mean = v.mean(axis=0)
    std = v.std(axis=0, ddof=1)
    labels = dataset.labels()
    for j in range(dataset.n):
        if not std[j] > 0:
            raise InvalidArgumentError(f"column {labels[j]!r} is constant and cannot be normalized")
    z = (v - mean) / std
    prev = dataset.normalization
    if prev is not None:
        mean = prev.mean + prev.std * mean
        std = prev.std * std
    return Dataset(z, dataset.column_labels, Normalization(mean, std))


def denormalize(values, normalization: Normalization | Dataset | None) -> np.ndarray:
    """Map normalized values back to original units (identity when no metadata)."""
    if isinstance(normalization, Dataset):
        normalization = normalization.normalization
    values = np.asarray(values, dtype=np.float64)
    if normalization is None:
        return values.copy()
    if values.shape[-1] != normalization.mean.size:
        raise InvalidArgumentError(
            f"values have {values.shape[-1]} columns, normalization has {normalization.mean.size}"
        )
    return values * normalization.std + normalization.mean
