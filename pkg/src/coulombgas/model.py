"""Gas models: pair interaction kernels, confinement potentials, total energy.

A gas is ``n`` particles in ``R^d`` with energy

    H(x) = (1/n) sum_i V(x_i) + (1/n^2) sum_{i != j} g(x_i - x_j),

where ``V`` is a confining potential and ``g`` a repulsive radial kernel
(the Coulomb kernel in dimension >= 2, ``-log|x|`` on the line). The state
weight is ``exp(-beta_n * H)``. Configurations are ``(n, d)`` float arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class CoincidentParticlesError(ValueError):
    """Gradient requested at a configuration with two coincident particles."""


# --- confinement potentials -------------------------------------------------


@dataclass(frozen=True)
class Quadratic:
    """V(x) = |x|^2."""


@dataclass(frozen=True)
class Quartic:
    """V(x) = |x|^4 / 4."""


@dataclass(frozen=True)
class Weak:
    """V(x) = (2/3) |x|^(3/2), sub-quadratic growth."""


@dataclass(frozen=True)
class RadialPower:
    """V(x) = a |x|^q with a > 0 and q > 1."""

    a: float
    q: float

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ValueError(f"RadialPower requires a > 0, got a={self.a}")
        if not self.q > 1:
            raise ValueError(f"RadialPower requires q > 1, got q={self.q}")


ConfinementSpec = Quadratic | Quartic | Weak | RadialPower


# --- pair interactions ------------------------------------------------------


@dataclass(frozen=True)
class Coulomb:
    """Kernel solving -lap g = c_d * dirac_0: log(1/|x|) for d = 2,
    1/((d-2)|x|^(d-2)) for d >= 3."""


@dataclass(frozen=True)
class Log1D:
    """g(x) = -log|x| on the line (d = 1)."""


InteractionSpec = Coulomb | Log1D


@dataclass(frozen=True)
class GasModel:
    """Parameters of the gas.

    ``beta_n`` is the inverse temperature; the scaling beta_n = n^2 makes the
    particle cloud concentrate on a deterministic limit shape as n grows.
    """

    d: int
    n: int
    beta_n: float
    confinement: ConfinementSpec
    interaction: InteractionSpec

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError(f"dimension must satisfy d >= 1, got d={self.d}")
        if self.n < 2:
            raise ValueError(f"particle count must satisfy n >= 2, got n={self.n}")
        if not self.beta_n > 0:
            raise ValueError(f"inverse temperature must be positive, got {self.beta_n}")
        if isinstance(self.interaction, Coulomb) and self.d < 2:
            raise ValueError("Coulomb interaction requires d >= 2")
        if isinstance(self.interaction, Log1D) and self.d != 1:
            raise ValueError("Log1D interaction requires d = 1")


def default_beta(n: int) -> float:
    """Default inverse temperature beta_n = n^2."""
    return float(n) * float(n)


def as_configuration(x: np.ndarray, model: GasModel) -> np.ndarray:
    """Validate and reshape positions to an (n, d) float array."""
    arr = np.asarray(x, dtype=float)
    if arr.size != model.n * model.d:
        raise ValueError(
            f"expected {model.n * model.d} coordinates, got {arr.size}"
        )
    arr = arr.reshape(model.n, model.d)
    if not np.all(np.isfinite(arr)):
        raise ValueError("configuration contains non-finite entries")
    return arr


# --- kernel and potential evaluation ----------------------------------------


def interaction_kernel(r: float, spec: InteractionSpec, d: int) -> float:
    """Evaluate the pair kernel g at separation |x| = r > 0."""
    if not r > 0:
        raise ValueError(f"kernel separation must be positive, got r={r}")
    if isinstance(spec, Log1D):
        return -math.log(r)
    if d == 2:
        return -math.log(r)
    return r ** (2 - d) / (d - 2)


def confinement_value(x: np.ndarray, spec: ConfinementSpec):
    """V at a point (d,) or batch of points (k, d)."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    if isinstance(spec, Quadratic):
        return r2
    if isinstance(spec, Quartic):
        return 0.25 * r2 * r2
    if isinstance(spec, Weak):
        return (2.0 / 3.0) * r2 ** 0.75
    return spec.a * r2 ** (spec.q / 2.0)


def confinement_grad(x: np.ndarray, spec: ConfinementSpec) -> np.ndarray:
    """Gradient of V, same shape as ``x``.

    Variants with a sub-quadratic cusp (Weak and RadialPower with q < 2) use
    the zero subgradient at the origin.
    """
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    if isinstance(spec, Quadratic):
        return 2.0 * x
    if isinstance(spec, Quartic):
        return r2 * x
    safe = np.where(r2 > 0, r2, 1.0)
    if isinstance(spec, Weak):
        out = x * safe ** -0.25
    else:
        out = spec.a * spec.q * x * safe ** (spec.q / 2.0 - 1.0)
    return np.where(r2 > 0, out, 0.0)


def confinement_laplacian(x: np.ndarray, spec: ConfinementSpec):
    """Laplacian of V (used by the closed-form density predictions)."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    r2 = np.sum(x * x, axis=-1)
    if isinstance(spec, Quadratic):
        return np.full_like(r2, 2.0 * d)
    if isinstance(spec, Quartic):
        return (d + 2.0) * r2
    with np.errstate(divide="ignore"):
        if isinstance(spec, Weak):
            return (d - 0.5) * r2 ** -0.25
        return spec.a * spec.q * (spec.q + d - 2.0) * r2 ** (spec.q / 2.0 - 1.0)


# --- total energy and forces ------------------------------------------------


def _pair_squared_distances(x: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Coordinate difference matrices and |x_i - x_j|^2 with the diagonal set
    to one. Differences are formed directly, so they are exact floats and the
    pair terms are bitwise invariant under an exactly representable common
    translation."""
    cols = [np.subtract.outer(x[:, k], x[:, k]) for k in range(x.shape[1])]
    r2 = cols[0] * cols[0]
    for c in cols[1:]:
        r2 += c * c
    np.fill_diagonal(r2, 1.0)
    return cols, r2


def _is_log_kernel(model: GasModel) -> bool:
    return model.d == 2 or isinstance(model.interaction, Log1D)


def interaction_energy(x: np.ndarray, model: GasModel) -> float:
    """The pair term (1/n^2) sum_{i != j} g(x_i - x_j); +inf on coincidence."""
    x = np.asarray(x, dtype=float).reshape(model.n, model.d)
    n = model.n
    _, r2 = _pair_squared_distances(x)
    if r2.min() == 0.0:
        return math.inf
    if _is_log_kernel(model):
        pair_sum = -0.5 * float(np.log(r2).sum())  # diagonal log(1) = 0
    else:
        kernel = r2 ** (-(model.d - 2) / 2.0)
        np.fill_diagonal(kernel, 0.0)
        pair_sum = float(kernel.sum()) / (model.d - 2)
    return pair_sum / (n * n)


def hamiltonian(x: np.ndarray, model: GasModel) -> float:
    """Total energy H(x); +inf when two particles coincide exactly."""
    x = np.asarray(x, dtype=float).reshape(model.n, model.d)
    pair = interaction_energy(x, model)
    if math.isinf(pair):
        return math.inf
    return float(np.mean(confinement_value(x, model.confinement))) + pair


def hamiltonian_grad(x: np.ndarray, model: GasModel) -> np.ndarray:
    """Exact gradient of H, shape (n, d); cost O(n^2 d).

    Raises CoincidentParticlesError when two particles coincide (the energy
    is +inf there and the caller is expected to reject the move).
    """
    x = np.asarray(x, dtype=float).reshape(model.n, model.d)
    n = model.n
    cols, r2 = _pair_squared_distances(x)
    if r2.min() == 0.0:
        raise CoincidentParticlesError("two particles coincide; energy is +inf")
    if _is_log_kernel(model):
        w = -1.0 / r2
    else:
        w = -(r2 ** (-model.d / 2.0))
    np.fill_diagonal(w, 0.0)
    out = confinement_grad(x, model.confinement) / n
    scale = 2.0 / (n * n)
    for k in range(model.d):
        out[:, k] += scale * (w * cols[k]).sum(axis=1)
    return out
