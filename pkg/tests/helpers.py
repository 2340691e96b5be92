"""Shared test utilities: finite-difference oracles and KS statistics."""

from __future__ import annotations

import numpy as np


def separated_configuration(
    rng: np.random.Generator, n: int, d: int, min_gap: float = 0.05
) -> np.ndarray:
    """A uniform cloud on [-1, 1]^d with all pairwise distances >= min_gap."""
    while True:
        x = rng.uniform(-1.0, 1.0, size=(n, d))
        diff = x[:, None, :] - x[None, :, :]
        dist = np.sqrt((diff**2).sum(-1))
        np.fill_diagonal(dist, np.inf)
        if dist.min() >= min_gap:
            return x


def finite_difference_grad(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function of an (n, d) array."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    flat = grad.reshape(-1)
    base = x.copy().reshape(-1)
    for i in range(base.size):
        up = base.copy()
        down = base.copy()
        up[i] += h
        down[i] -= h
        flat[i] = (f(up.reshape(x.shape)) - f(down.reshape(x.shape))) / (2 * h)
    return grad


def relative_error(approx: np.ndarray, exact: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(exact)), 1e-300)
    return float(np.linalg.norm(np.asarray(approx) - np.asarray(exact))) / scale


def ks_distance_to_cdf(samples: np.ndarray, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance to a target CDF."""
    s = np.sort(np.asarray(samples, dtype=float))
    n = s.size
    target = np.asarray(cdf(s), dtype=float)
    upper = np.max(np.arange(1, n + 1) / n - target)
    lower = np.max(target - np.arange(0, n) / n)
    return float(max(upper, lower))


def ks_distance_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov distance."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))
