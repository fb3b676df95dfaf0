"""Bundled reference models used by verify-paper and the test suite."""

from __future__ import annotations

import numpy as np

from .model import MetapopModel, Strategy, _pin_weight_sum


def _uniform_model(matrix: np.ndarray, labels=None) -> MetapopModel:
    n = matrix.shape[0]
    return MetapopModel(
        weights=_pin_weight_sum(np.full(n, 1.0 / n)), matrix=matrix, labels=labels
    )


def cycle_model(n: int = 12) -> MetapopModel:
    """Adjacency matrix of the non-oriented cycle graph, uniform weights."""
    a = np.zeros((n, n))
    for i in range(n):
        a[i, (i + 1) % n] = 1.0
        a[i, (i - 1) % n] = 1.0
    return _uniform_model(a)


def one_in_four_strategy(n: int = 12) -> Strategy:
    """Vaccinate every fourth group of the cycle (groups 4, 8, 12)."""
    values = np.ones(n)
    values[3::4] = 0.0
    return Strategy(values)


def counterexample_positive_spectrum() -> MetapopModel:
    """Nonnegative matrix with spectrum {24.8, 2.9, 1.3} whose R_e is a saddle."""
    return _uniform_model(
        np.array([[16.0, 12.0, 11.0], [1.0, 12.0, 12.0], [8.0, 1.0, 1.0]])
    )


def counterexample_single_positive() -> MetapopModel:
    """Spectrum {26.3, -1.4, -3.9}: one positive root, yet R_e not concave."""
    return _uniform_model(
        np.array([[9.0, 13.0, 14.0], [18.0, 6.0, 5.0], [1.0, 6.0, 6.0]])
    )


def positive_definite_model() -> MetapopModel:
    """Symmetric positive definite example; R_e is convex."""
    return _uniform_model(
        np.array([[3.0, 2.0, 0.0], [2.0, 2.0, 1.0], [0.0, 1.0, 4.0]])
    )


def two_block_model() -> MetapopModel:
    """Two decoupled groups with radii 3 and 1, equal weights."""
    return _uniform_model(np.array([[3.0, 0.0], [0.0, 1.0]]))
