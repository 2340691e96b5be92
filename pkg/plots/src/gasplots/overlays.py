"""Closed-form reference curves, re-evaluated from CSV metadata.

Only the exactly solvable shapes are available: the uniform unit disk
shifted to the constraint center (quadratic confinement, affine statistic)
and the semicircle of the free log-gas on the line. Other potentials have
no closed-form support and get no overlay.
"""

from __future__ import annotations

import math

import numpy as np

from .io import CsvFormatError, meta_float, meta_vector


def disk_center(meta: dict[str, str]) -> np.ndarray:
    """Center c*v of the shifted unit disk, origin for unconstrained runs."""
    if meta.get("constraint", "none") == "none":
        return np.zeros(2)
    c = meta_float(meta, "c")
    v = meta_vector(meta, "v")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise CsvFormatError("metadata direction v is the zero vector")
    return c * v / norm


def disk_outline(meta: dict[str, str], points: int = 256) -> np.ndarray:
    """The unit circle bounding the predicted disk, shape (points, 2)."""
    center = disk_center(meta)
    angle = np.linspace(0.0, 2.0 * math.pi, points)
    return center + np.stack([np.cos(angle), np.sin(angle)], axis=1)


def disk_density(meta: dict[str, str], grid: np.ndarray) -> np.ndarray:
    """Uniform density 1/pi inside the predicted disk, on (k, 2) points."""
    center = disk_center(meta)
    inside = ((grid - center) ** 2).sum(axis=-1) <= 1.0
    return np.where(inside, 1.0 / math.pi, 0.0)


def semicircle_density(t: np.ndarray, radius: float = math.sqrt(2.0)) -> np.ndarray:
    """Density (2 / (pi R^2)) sqrt(R^2 - t^2) of the free log-gas limit."""
    inside = np.maximum(radius * radius - np.asarray(t, dtype=float) ** 2, 0.0)
    return 2.0 / (math.pi * radius * radius) * np.sqrt(inside)


def predicted_overlay_kind(meta: dict[str, str]) -> str:
    """Which closed-form overlay the run metadata supports."""
    confinement = meta.get("confinement", "")
    constraint = meta.get("constraint", "none")
    d = int(meta_float(meta, "d", 0.0))
    if d == 1 and confinement == "quadratic" and constraint == "none":
        return "semicircle"
    if d == 2 and confinement == "quadratic" and (
        constraint == "none" or constraint.startswith("affine")
    ):
        return "disk"
    raise CsvFormatError(
        "no closed-form prediction for this run "
        f"(confinement={confinement!r}, constraint={constraint!r}, d={d})"
    )
