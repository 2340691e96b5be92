"""Constraint-preserving velocity Verlet (RATTLE) with Newton projection.

One step maps a phase point (x, y) with x on the constraint manifold and y
tangent at x to another such point:

1. half kick      y <- y - dt/2 grad H(x)
2. drift          x_trial = x + dt y
3. projection     solve xi(x_trial + J(x) theta) = 0 for theta in R^m
                  by Newton iterations along the fixed direction J(x)
4. sync momentum  y <- y + J(x) theta / dt
5. half kick      y <- y - dt/2 grad H(x_new)
6. tangent reset  y <- P(x_new) y

The step is reversible up to momentum reversal whenever the projections
converge, which the sampler verifies explicitly with a backward step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constraints import (
    ConstraintDomainError,
    ConstraintSet,
    DegenerateConstraintError,
    evaluate,
    jacobian,
    project_momentum,
)
from .model import CoincidentParticlesError, GasModel, hamiltonian_grad


@dataclass(frozen=True)
class NewtonParams:
    """Projection tolerance and iteration cap."""

    epsilon: float = 1e-12
    max_steps: int = 20

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")


@dataclass(eq=False)
class PhasePoint:
    """Position on the manifold plus tangent momentum, both (n, d).

    ``energy``, ``grad`` and ``correction`` cache H(x), grad H(x) and the
    Gram log-determinant term at x; they are derived quantities, carried
    along so repeated evaluations at an unchanged position are free.
    """

    x: np.ndarray
    y: np.ndarray
    energy: float | None = field(default=None, repr=False)
    grad: np.ndarray | None = field(default=None, repr=False)
    correction: float | None = field(default=None, repr=False)


class NewtonNonConvergence(RuntimeError):
    """Newton projection failed; carries the failure reason and step count."""

    def __init__(self, reason: str, iterations: int):
        super().__init__(f"Newton projection failed ({reason}) after {iterations} steps")
        self.reason = reason
        self.iterations = iterations


class StepFailure(RuntimeError):
    """A RATTLE step could not be completed; the proposal must be rejected."""

    def __init__(self, reason: str):
        super().__init__(f"RATTLE step failed: {reason}")
        self.reason = reason


@dataclass(eq=False)
class NewtonResult:
    theta: np.ndarray
    iterations: int


def newton_project(
    x_trial: np.ndarray,
    anchor: np.ndarray,
    cs: ConstraintSet,
    params: NewtonParams,
    anchor_jacobian: np.ndarray | None = None,
) -> NewtonResult:
    """Solve xi(x_trial + J(anchor) theta) = 0 for theta in R^m.

    The search direction is the constraint Jacobian at ``anchor`` (the
    pre-step position during a RATTLE step), held fixed across iterations.
    Convergence is declared at iterate k when both the residual |xi(x_k)| and
    the next Newton increment are within ``params.epsilon``; the certified
    ``theta`` of iterate k is returned together with k, the number of Newton
    updates it took to reach it.
    """
    x_trial = np.asarray(x_trial, dtype=float)
    direction = (
        np.asarray(anchor_jacobian, dtype=float)
        if anchor_jacobian is not None
        else jacobian(anchor, cs)
    )
    m = cs.m
    theta = np.zeros(m)
    x = x_trial
    shape = x_trial.shape
    for k in range(params.max_steps + 1):
        residual = evaluate(x, cs)
        system = direction.T @ jacobian(x, cs)
        if m == 1:
            pivot = float(system[0, 0])
            if pivot == 0.0 or not math.isfinite(pivot):
                raise NewtonNonConvergence("singular-system", k)
            delta = residual / pivot
        else:
            try:
                delta = np.linalg.solve(system, residual)
            except np.linalg.LinAlgError as exc:
                raise NewtonNonConvergence("singular-system", k) from exc
        if not np.all(np.isfinite(delta)):
            raise NewtonNonConvergence("singular-system", k)
        if max(np.linalg.norm(delta), np.linalg.norm(residual)) <= params.epsilon:
            return NewtonResult(theta, k)
        theta = theta - delta
        x = x_trial + (direction @ theta).reshape(shape)
    raise NewtonNonConvergence("max-steps", params.max_steps)


def _grad(point: PhasePoint, model: GasModel) -> np.ndarray:
    if point.grad is None:
        point.grad = hamiltonian_grad(point.x, model)
    return point.grad


def rattle_step(
    point: PhasePoint,
    dt: float,
    model: GasModel,
    cs: ConstraintSet | None,
    params: NewtonParams,
) -> PhasePoint:
    """One RATTLE step; with ``cs=None`` this is plain velocity Verlet.

    Raises StepFailure (reasons ``newton``, ``gradient-singularity``,
    ``constraint-domain``, ``degenerate-projector``) when the step cannot be
    completed; the caller turns this into a rejection.
    """
    x, y = point.x, point.y
    try:
        grad_x = _grad(point, model)
    except CoincidentParticlesError as exc:
        raise StepFailure("gradient-singularity") from exc
    y_half = y - 0.5 * dt * grad_x
    x_trial = x + dt * y_half
    if cs is not None:
        try:
            anchor_jac = jacobian(x, cs)
            result = newton_project(x_trial, x, cs, params, anchor_jacobian=anchor_jac)
        except NewtonNonConvergence as exc:
            raise StepFailure("newton") from exc
        except ConstraintDomainError as exc:
            raise StepFailure("constraint-domain") from exc
        shift = (anchor_jac @ result.theta).reshape(x.shape)
        x_new = x_trial + shift
        y_half = y_half + shift / dt
    else:
        x_new = x_trial
    out = PhasePoint(x_new, y_half)
    try:
        grad_new = _grad(out, model)
    except CoincidentParticlesError as exc:
        raise StepFailure("gradient-singularity") from exc
    y_new = y_half - 0.5 * dt * grad_new
    if cs is not None:
        try:
            y_new = project_momentum(y_new, x_new, cs)
        except DegenerateConstraintError as exc:
            raise StepFailure("degenerate-projector") from exc
    out.y = y_new
    return out


def rattle_backward_check(
    p_fwd_out: PhasePoint,
    p_fwd_in: PhasePoint,
    dt: float,
    model: GasModel,
    cs: ConstraintSet | None,
    params: NewtonParams,
    epsilon_rev: float,
    strict: bool = False,
) -> bool:
    """True when the reversed step returns to the starting position.

    Runs RATTLE from (x_out, -y_out) and compares the resulting position to
    the input position within ``epsilon_rev``. Positions only by default;
    ``strict=True`` additionally compares the reversed momentum.
    """
    flipped = PhasePoint(
        p_fwd_out.x,
        -p_fwd_out.y,
        p_fwd_out.energy,
        p_fwd_out.grad,
        p_fwd_out.correction,
    )
    try:
        rev = rattle_step(flipped, dt, model, cs, params)
    except StepFailure:
        return False
    if float(np.linalg.norm(rev.x - p_fwd_in.x)) > epsilon_rev:
        return False
    if strict and float(np.linalg.norm(rev.y + p_fwd_in.y)) > epsilon_rev:
        return False
    return True
