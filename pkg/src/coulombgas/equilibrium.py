"""Closed-form limit shapes used as verification oracles.

For a smooth confinement the limiting particle density is lap V / (2 c_d)
on its support, with c_d the surface area of the unit sphere. Conditioning
on a linear statistic phi tilts the confinement to V + alpha phi, so the
density becomes (lap V + alpha lap phi) / (2 c_d). Two fully explicit cases
back the quantitative tests: the uniform unit disk shifted by the constraint
(quadratic confinement, affine statistic) and the semicircle of the
unconstrained log-gas on the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .constraints import Affine, Cosine, LogAbs, _linear_phi_laplacian
from .model import ConfinementSpec, confinement_laplacian


def c_d(d: int) -> float:
    """Surface area of the unit sphere in R^d: 2 pi^(d/2) / Gamma(d/2)."""
    if d < 2:
        raise ValueError(f"the sphere-surface constant needs d >= 2, got d={d}")
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(eq=False)
class PredictedDensity:
    """A density evaluator plus its support, when known in closed form."""

    evaluate: Callable[[np.ndarray], np.ndarray]
    center: np.ndarray | None = None
    radius: float | None = None


def conditioned_density_linear(
    x: np.ndarray,
    confinement: ConfinementSpec,
    phi: Affine | Cosine | LogAbs,
    alpha: float,
    d: int,
):
    """Density value (lap V + alpha lap phi) / (2 c_d), clamped at zero.

    The clamp encodes the support criterion lap V + alpha lap phi >= 0; the
    actual support boundary is only known analytically in special cases and
    is otherwise left to histogram comparison.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    value = confinement_laplacian(x, confinement) + alpha * _linear_phi_laplacian(
        x, phi, d
    )
    out = np.maximum(value / (2.0 * c_d(d)), 0.0)
    return out if out.size > 1 else float(out[0])


def multiplier_quadratic_affine(c: float) -> float:
    """Tilt strength alpha = 2c for quadratic confinement with a unit-vector
    affine statistic constrained to level c; the limit shape is then the unit
    disk translated to center c v.

    Negative c is returned as -|2c| unchanged: for the equality-constrained
    chain the sign only sets the direction of the shift, while nonnegativity
    of alpha matters for one-sided (inequality) conditioning only.
    """
    return 2.0 * c


def disk_reference(c: float, v: np.ndarray) -> PredictedDensity:
    """Uniform density 1/pi on the unit disk centered at c v (d = 2)."""
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("direction v must be nonzero")
    center = c * v / norm

    def evaluate(z: np.ndarray) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        inside = np.sum((z - center) ** 2, axis=-1) <= 1.0
        return np.where(inside, 1.0 / math.pi, 0.0)

    return PredictedDensity(evaluate, center=center, radius=1.0)


def semicircle_reference(radius: float = math.sqrt(2.0)) -> PredictedDensity:
    """Semicircle density (2 / (pi R^2)) sqrt(R^2 - t^2) on [-R, R].

    With quadratic confinement the unconstrained log-gas on the line has this
    limit shape with R = sqrt(2); its second moment is R^2 / 4."""
    if not radius > 0:
        raise ValueError("radius must be positive")

    def evaluate(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        inside = np.maximum(radius * radius - t * t, 0.0)
        return 2.0 / (math.pi * radius * radius) * np.sqrt(inside)

    return PredictedDensity(evaluate, center=np.zeros(1), radius=radius)
