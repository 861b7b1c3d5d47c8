"""Gaussian feature statistics and the Fréchet distance between them"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np
from attrs import define, field
from scipy import linalg

from movgan.errors import InputError


def as_matrix(features) -> np.ndarray:
    matrix = np.asarray(features, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[None]
    if matrix.ndim != 2:
        raise InputError(f"Expecting (n, D) features, got shape {matrix.shape}")
    return matrix


@define(frozen=True, eq=False)
class FeatureStats:
    """running sample count, mean and scatter matrix Σ(x − mean)(x − mean)ᵀ

    Merging follows the pairwise update, so chunks can be accumulated in any
    grouping and order."""

    n: int
    mean: np.ndarray = field(converter=lambda value: np.asarray(value, np.float64))
    scatter: np.ndarray = field(converter=lambda value: np.asarray(value, np.float64))

    @classmethod
    def empty(cls, dim: int) -> FeatureStats:
        return cls(0, np.zeros(dim), np.zeros((dim, dim)))

    @classmethod
    def from_features(cls, features) -> FeatureStats:
        matrix = as_matrix(features)
        mean = matrix.mean(axis=0)
        centered = matrix - mean
        return cls(matrix.shape[0], mean, centered.T @ centered)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def valid(self) -> bool:
        """covariance is only defined from two samples on"""
        return self.n >= 2

    @property
    def covariance(self) -> np.ndarray:
        """unbiased (n − 1) covariance"""
        if not self.valid:
            raise InputError(f"Covariance needs at least 2 samples, have {self.n}")
        return self.scatter / (self.n - 1)

    def merge(self, other: FeatureStats) -> FeatureStats:
        if other.dim != self.dim:
            raise InputError(f"Cannot merge {other.dim}-d stats into {self.dim}-d")
        if not other.n:
            return self
        if not self.n:
            return other
        total = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.n / total)
        scatter = (
            self.scatter
            + other.scatter
            + np.outer(delta, delta) * (self.n * other.n / total)
        )
        return FeatureStats(total, mean, scatter)

    def update(self, features) -> FeatureStats:
        return self.merge(FeatureStats.from_features(features))


def accumulate_stats(features: Iterable) -> FeatureStats:
    """stats of a stream of D-vectors or (k, D) chunks"""
    stats: FeatureStats | None = None
    for chunk in features:
        chunk_stats = FeatureStats.from_features(chunk)
        stats = chunk_stats if stats is None else stats.merge(chunk_stats)
    if stats is None:
        raise InputError("No feature to accumulate")
    return stats


def psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """square root of a symmetric matrix, negative eigenvalues clipped to 0"""
    eigenvalues, eigenvectors = linalg.eigh((matrix + matrix.T) / 2)
    roots = np.sqrt(np.clip(eigenvalues, 0.0, None))
    return (eigenvectors * roots) @ eigenvectors.T


def trace_sqrt_product(sigma_a: np.ndarray, sigma_b: np.ndarray) -> float:
    """Tr((Σa Σb)^½) computed as Tr((√Σa Σb √Σa)^½)"""
    root_a = psd_sqrt(sigma_a)
    product = root_a @ sigma_b @ root_a
    eigenvalues = linalg.eigvalsh((product + product.T) / 2)
    return float(np.sqrt(np.clip(eigenvalues, 0.0, None)).sum())


def frechet_distance(a: FeatureStats, b: FeatureStats) -> float:
    """‖μa − μb‖² + Tr(Σa + Σb − 2(ΣaΣb)^½), never negative"""
    if a.dim != b.dim:
        raise InputError(f"Feature dimensions differ: {a.dim} vs {b.dim}")
    sigma_a, sigma_b = a.covariance, b.covariance
    diff = a.mean - b.mean
    distance = (
        float(diff @ diff)
        + float(np.trace(sigma_a))
        + float(np.trace(sigma_b))
        - 2.0 * trace_sqrt_product(sigma_a, sigma_b)
    )
    return max(distance, 0.0)
