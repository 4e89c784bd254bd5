"""FastICA: parallel fixed-point independent component analysis.

Whitening via SVD, tanh contrast, symmetric decorrelation every step.
Deterministic for a given seed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


class RankError(ValueError):
    """Input covariance rank is below the requested component count."""


@dataclass(frozen=True)
class IcaModel:
    n_components: int
    mean: np.ndarray  # per-feature mean removed before whitening
    whitening: np.ndarray  # (n_components, n_features)
    unmixing: np.ndarray  # (n_components, n_components), orthonormal rows
    scores: np.ndarray  # (n_samples, n_components) source estimates
    iterations: int
    tolerance: float
    achieved_tolerance: float
    converged: bool
    seed: int

    def transform(self, data: np.ndarray) -> np.ndarray:
        """Project new rows into component space."""
        whitened = (data - self.mean) @ self.whitening.T
        return whitened @ self.unmixing.T


def _symmetric_decorrelation(w: np.ndarray) -> np.ndarray:
    eigenvalues, eigenvectors = np.linalg.eigh(w @ w.T)
    if eigenvalues.min() <= 0:
        raise RankError("unmixing matrix became singular during decorrelation")
    inv_sqrt = (eigenvectors / np.sqrt(eigenvalues)) @ eigenvectors.T
    return inv_sqrt @ w


def fast_ica(
    data: np.ndarray,
    n_components: int,
    tolerance: float = 1e-4,
    max_iterations: int = 200,
    seed: int = 0,
) -> IcaModel:
    """Fit FastICA on ``data`` of shape (n_samples, n_features).

    The input is expected to be standardized (each feature mean 0, std 1).
    Non-convergence within ``max_iterations`` is a warning recorded on the
    model, not an error.

    Raises:
        ValueError: fewer samples than components.
        RankError: data covariance rank below ``n_components``.
    """
    data = np.asarray(data, dtype=np.float64)
    n_samples, n_features = data.shape
    if n_components < 1:
        raise ValueError("n_components must be >= 1")
    if n_samples < n_components:
        raise ValueError(
            f"{n_samples} samples cannot support {n_components} components"
        )

    mean = data.mean(axis=0)
    centered = data - mean

    u, singular, vt = np.linalg.svd(centered, full_matrices=False)
    rank_tol = singular.max(initial=0.0) * max(n_samples, n_features) * np.finfo(np.float64).eps
    rank = int((singular > rank_tol).sum())
    if rank < n_components:
        raise RankError(
            f"data rank {rank} is below n_components={n_components}; "
            f"reduce n_components to at most {rank}"
        )

    # Whitened rows have identity covariance: X @ K.T = sqrt(n) * U[:, :k]
    k = (vt[:n_components] / singular[:n_components, None]) * np.sqrt(n_samples)
    whitened = centered @ k.T

    rng = np.random.default_rng(seed)
    w = _symmetric_decorrelation(rng.standard_normal((n_components, n_components)))

    achieved = np.inf
    iterations = 0
    converged = False
    for iterations in range(1, max_iterations + 1):
        projected = whitened @ w.T  # (n_samples, n_components)
        g = np.tanh(projected)
        g_prime_mean = (1.0 - g**2).mean(axis=0)
        w_next = (g.T @ whitened) / n_samples - g_prime_mean[:, None] * w
        w_next = _symmetric_decorrelation(w_next)
        achieved = float(np.max(np.abs(np.abs(np.einsum("ij,ij->i", w_next, w)) - 1.0)))
        w = w_next
        if achieved < tolerance:
            converged = True
            break
    if not converged:
        logger.warning(
            "FastICA did not converge in %d iterations (last change %.3g > tol %.3g)",
            max_iterations, achieved, tolerance,
        )

    return IcaModel(
        n_components=n_components,
        mean=mean,
        whitening=k,
        unmixing=w,
        scores=whitened @ w.T,
        iterations=iterations,
        tolerance=tolerance,
        achieved_tolerance=achieved,
        converged=converged,
        seed=seed,
    )


def standardize_columns(counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scale each column to mean 0, std 1; zero-variance columns are dropped.

    Returns the scaled matrix and the indices of retained columns.
    """
    counts = np.asarray(counts, dtype=np.float64)
    mean = counts.mean(axis=0)
    std = counts.std(axis=0)
    keep = np.flatnonzero(std > 0)
    scaled = (counts[:, keep] - mean[keep]) / std[keep]
    return scaled, keep
