"""Constraint statistics over configurations and their differential geometry.

A constraint set is a map xi: (R^d)^n -> R^m whose zero level set is the
submanifold the sampler lives on. Two statistic families are supported:

* ``LinearStat``: xi(x) = (1/n) sum_i phi(x_i) for a single-particle phi;
* ``QuadStat``: xi(x) = (1/n^2) sum_{i,j} phi(x_i - x_j), diagonal included.

Besides evaluation this module provides the Jacobian, the m x m Gram matrix
G = J^T J, the log|det G| correction energy entering the acceptance ratio,
and the orthogonal projector onto the tangent space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class ConstraintDomainError(ValueError):
    """Constraint evaluated outside its domain (e.g. log|x| at the origin)."""


class DegenerateConstraintError(RuntimeError):
    """Gram matrix numerically singular; the move must be rejected."""


# --- single-particle statistics phi (LinearStat) -----------------------------


@dataclass(frozen=True)
class Affine:
    """phi(x) = x . v - c; v is normalized to |v| = 1 on construction."""

    v: tuple[float, ...]
    c: float

    def __post_init__(self) -> None:
        vec = np.asarray(self.v, dtype=float)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ValueError("Affine direction v must be nonzero")
        object.__setattr__(self, "v", tuple(float(t) for t in vec / norm))


@dataclass(frozen=True)
class Cosine:
    """phi(x) = c - (cos(k x_1) + cos(k x_2)) / 2, planar gases only (d = 2)."""

    c: float
    k: float = 5.0


@dataclass(frozen=True)
class LogAbs:
    """phi(x) = log|x| - c. Undefined when a particle sits at the origin."""

    c: float


# --- pair statistics phi (QuadStat) ------------------------------------------


@dataclass(frozen=True)
class RadialGap:
    """phi(u) = c - |u|: constrains the mean inter-particle distance."""

    c: float


@dataclass(frozen=True)
class AxisGap:
    """phi(u) = c - |u_1|: constrains the mean spread along the first axis."""

    c: float


@dataclass(frozen=True)
class LinearStat:
    """xi(x) = (1/n) sum_i phi(x_i)."""

    phi: Affine | Cosine | LogAbs


@dataclass(frozen=True)
class QuadStat:
    """xi(x) = (1/n^2) sum_{i,j} phi(x_i - x_j), i = j terms included."""

    phi: RadialGap | AxisGap


ConstraintSpec = LinearStat | QuadStat


@dataclass(frozen=True)
class ConstraintSet:
    """An ordered family of m >= 1 scalar constraints."""

    components: tuple[ConstraintSpec, ...]

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if len(comps) < 1:
            raise ValueError("a ConstraintSet needs at least one component")
        object.__setattr__(self, "components", comps)

    @property
    def m(self) -> int:
        return len(self.components)


def _check_cosine_dim(d: int) -> None:
    if d != 2:
        raise ValueError("Cosine statistics read two coordinates; they require d = 2")


def _component_value(x: np.ndarray, spec: ConstraintSpec) -> float:
    n, d = x.shape
    if isinstance(spec, LinearStat):
        phi = spec.phi
        if isinstance(phi, Affine):
            # Kept literally as barycenter(x) . v - c so that tests may compare
            # against the barycenter observable with exact equality.
            return float(x.mean(axis=0) @ np.asarray(phi.v)) - phi.c
        if isinstance(phi, Cosine):
            _check_cosine_dim(d)
            return phi.c - float(
                np.mean(0.5 * (np.cos(phi.k * x[:, 0]) + np.cos(phi.k * x[:, 1])))
            )
        r = np.linalg.norm(x, axis=1)
        if np.any(r == 0.0):
            raise ConstraintDomainError("log|x| undefined for a particle at the origin")
        return float(np.mean(np.log(r))) - phi.c
    phi = spec.phi
    diff = x[:, None, :] - x[None, :, :]
    if isinstance(phi, RadialGap):
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    else:
        dist = np.abs(diff[:, :, 0])
    return phi.c - float(np.sum(dist)) / (n * n)


def _component_grad(x: np.ndarray, spec: ConstraintSpec) -> np.ndarray:
    """Gradient of one scalar constraint, shape (n, d)."""
    n, d = x.shape
    if isinstance(spec, LinearStat):
        phi = spec.phi
        if isinstance(phi, Affine):
            return np.tile(np.asarray(phi.v) / n, (n, 1))
        if isinstance(phi, Cosine):
            _check_cosine_dim(d)
            g = np.empty_like(x)
            g[:, 0] = 0.5 * phi.k * np.sin(phi.k * x[:, 0])
            g[:, 1] = 0.5 * phi.k * np.sin(phi.k * x[:, 1])
            return g / n
        r2 = np.sum(x * x, axis=1, keepdims=True)
        if np.any(r2 == 0.0):
            raise ConstraintDomainError("log|x| undefined for a particle at the origin")
        return x / r2 / n
    phi = spec.phi
    diff = x[:, None, :] - x[None, :, :]
    if isinstance(phi, RadialGap):
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        w = np.zeros_like(dist)
        pos = dist > 0.0  # zero subgradient for coincident pairs and i = j
        w[pos] = 1.0 / dist[pos]
        pair = -np.einsum("ij,ijk->ik", w, diff)
    else:
        pair = np.zeros_like(x)
        pair[:, 0] = -np.sign(diff[:, :, 0]).sum(axis=1)
    return (2.0 / (n * n)) * pair


def _linear_phi_laplacian(x: np.ndarray, phi: Affine | Cosine | LogAbs, d: int):
    """Laplacian of a single-particle statistic at points ``x`` of shape (k, d)."""
    x = np.asarray(x, dtype=float)
    if isinstance(phi, Affine):
        return np.zeros(x.shape[:-1])
    if isinstance(phi, Cosine):
        _check_cosine_dim(d)
        k = phi.k
        return 0.5 * k * k * (np.cos(k * x[..., 0]) + np.cos(k * x[..., 1]))
    r2 = np.sum(x * x, axis=-1)
    with np.errstate(divide="ignore"):
        return (d - 2.0) / r2 if d != 2 else np.zeros_like(r2)


# --- constraint-set operations ------------------------------------------------


def evaluate(x: np.ndarray, cs: ConstraintSet) -> np.ndarray:
    """The constraint vector xi(x) in R^m."""
    x = np.asarray(x, dtype=float)
    return np.array([_component_value(x, spec) for spec in cs.components])


def has_constant_jacobian(cs: ConstraintSet) -> bool:
    """True when the Jacobian (hence the Gram matrix) does not depend on x."""
    return all(
        isinstance(spec, LinearStat) and isinstance(spec.phi, Affine)
        for spec in cs.components
    )


@lru_cache(maxsize=128)
def _cached_constant_jacobian(cs: ConstraintSet, n: int, d: int) -> np.ndarray:
    cols = [
        _component_grad(np.zeros((n, d)), spec).reshape(-1) for spec in cs.components
    ]
    out = np.stack(cols, axis=1)
    out.setflags(write=False)
    return out


def jacobian(x: np.ndarray, cs: ConstraintSet) -> np.ndarray:
    """Stacked constraint gradients, shape (n*d, m)."""
    x = np.asarray(x, dtype=float)
    if has_constant_jacobian(cs):
        return _cached_constant_jacobian(cs, x.shape[0], x.shape[1])
    cols = [_component_grad(x, spec).reshape(-1) for spec in cs.components]
    return np.stack(cols, axis=1)


def gram(x: np.ndarray, cs: ConstraintSet) -> np.ndarray:
    """Gram matrix G(x) = J^T J, symmetric positive semi-definite, (m, m)."""
    jac = jacobian(x, cs)
    return jac.T @ jac


# Relative pivot threshold under which the Gram matrix counts as singular.
_PIVOT_RTOL = 1e-12
_DET_FLOOR = 1e-300


def _gram_cholesky(g: np.ndarray) -> np.ndarray:
    try:
        chol = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateConstraintError("Gram matrix is not positive definite") from exc
    piv = np.diag(chol) ** 2
    if piv.min() < _PIVOT_RTOL * piv.max():
        raise DegenerateConstraintError(
            f"Gram pivot ratio {piv.min() / piv.max():.3e} below {_PIVOT_RTOL}"
        )
    return chol

def log_abs_det_gram(x: np.ndarray, cs: ConstraintSet) -> float:
    """log|det G(x)| via a Cholesky factorization (m is small, m <= 4)."""
    g = gram(x, cs)
    if g.shape == (1, 1):
        det = float(g[0, 0])
        if det < _DET_FLOOR:
            raise DegenerateConstraintError("det G underflows the degeneracy floor")
        return math.log(det)
    chol = _gram_cholesky(g)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    if logdet < math.log(_DET_FLOOR):
        raise DegenerateConstraintError("det G underflows the degeneracy floor")
    return logdet


def correction_energy(x: np.ndarray, cs: ConstraintSet, beta_n: float) -> float:
    """Co-area correction U(x) = -log|det G(x)| / (2 beta_n).

    Added to the energy only inside the acceptance ratio; the dynamics itself
    runs on the uncorrected Hamiltonian, which avoids constraint Hessians at
    the price of a slightly larger rejection rate.
    """
    return -log_abs_det_gram(x, cs) / (2.0 * beta_n)


def project_momentum(y: np.ndarray, x: np.ndarray, cs: ConstraintSet) -> np.ndarray:
    """Project ``y`` onto the tangent space at ``x``: y - J G^{-1} J^T y."""
    y = np.asarray(y, dtype=float)
    jac = jacobian(np.asarray(x, dtype=float), cs)
    flat = y.reshape(-1)
    if cs.m == 1:
        col = jac[:, 0]
        gg = float(col @ col)
        if gg <= 0.0:
            raise DegenerateConstraintError("constraint gradient vanishes")
        return (flat - col * (float(col @ flat) / gg)).reshape(y.shape)
    chol = _gram_cholesky(jac.T @ jac)
    rhs = jac.T @ flat
    coef = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
    return (flat - jac @ coef).reshape(y.shape)


def tangency_residual(y: np.ndarray, x: np.ndarray, cs: ConstraintSet) -> float:
    """max_k |grad xi_k . y|, zero for tangent momenta."""
    jac = jacobian(np.asarray(x, dtype=float), cs)
    return float(np.max(np.abs(jac.T @ np.asarray(y, dtype=float).reshape(-1))))
