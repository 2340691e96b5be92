"""Generalized hybrid Monte Carlo on the constraint manifold.

Each step refreshes the momentum with a tangent-projected Ornstein-Uhlenbeck
kick, proposes a RATTLE move, verifies the move is reversible by integrating
backwards, and accepts or rejects with a Metropolis rule. The acceptance
ratio uses the corrected energy H + U (U the Gram log-determinant term) so
the chain targets the conditioned Gibbs measure on the manifold even though
the dynamics runs on the plain Hamiltonian. Every rejection flips the
refreshed momentum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constraints import (
    ConstraintSet,
    DegenerateConstraintError,
    correction_energy,
    evaluate,
    has_constant_jacobian,
    jacobian,
    project_momentum,
)
from .model import GasModel, hamiltonian
from .rattle import (
    NewtonNonConvergence,
    NewtonParams,
    PhasePoint,
    StepFailure,
    newton_project,
    rattle_step,
)

REJECTION_TAGS = (
    "accepted",
    "newton_forward_fail",
    "newton_backward_fail",
    "reversibility_fail",
    "metropolis_reject",
)


@dataclass(frozen=True)
class SamplerParams:
    """Step size, friction, horizon and tolerances of one chain."""

    dt: float
    n_iter: int
    gamma: float = 1.0
    newton: NewtonParams = NewtonParams()
    epsilon_rev: float = 1e-12
    seed: int = 0
    strict_reversibility: bool = False

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_iter < 1:
            raise ValueError(f"n_iter must be >= 1, got {self.n_iter}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.epsilon_rev > 0:
            raise ValueError(f"epsilon_rev must be positive, got {self.epsilon_rev}")

    @property
    def eta(self) -> float:
        """Momentum memory e^(-gamma dt) of the Ornstein-Uhlenbeck refresh."""
        return math.exp(-self.gamma * self.dt)


@dataclass
class RejectionStats:
    """Counters for the four rejection sources plus acceptances."""

    accepted: int = 0
    newton_forward_fail: int = 0
    newton_backward_fail: int = 0
    reversibility_fail: int = 0
    metropolis_reject: int = 0

    def record(self, tag: str) -> None:
        if tag not in REJECTION_TAGS:
            raise ValueError(f"unknown step tag {tag!r}")
        setattr(self, tag, getattr(self, tag) + 1)

    @property
    def total(self) -> int:
        return sum(getattr(self, tag) for tag in REJECTION_TAGS)

    def as_dict(self) -> dict[str, int]:
        out = {tag: getattr(self, tag) for tag in REJECTION_TAGS}
        out["total"] = self.total
        return out


@dataclass(frozen=True)
class ObserverSchedule:
    """Snapshots every ``stride`` steps after an initial burn-in fraction."""

    burn_in_fraction: float = 0.1
    stride: int = 100

    def __post_init__(self) -> None:
        if not 0.0 <= self.burn_in_fraction < 1.0:
            raise ValueError("burn_in_fraction must lie in [0, 1)")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")


@dataclass(eq=False)
class ChainRecord:
    """Accepted trajectory snapshots, rejection statistics, scalar streams.

    ``mean_metropolis_rejection`` averages one minus the per-step acceptance
    probability over the post-burn-in steps; it estimates the same limit as
    ``stats.metropolis_reject / stats.total`` with much less variance.
    """

    snapshots: list[tuple[int, np.ndarray]] = field(default_factory=list)
    stats: RejectionStats = field(default_factory=RejectionStats)
    steps: list[int] = field(default_factory=list)
    barycenter_dot_v: list[float] = field(default_factory=list)
    second_moment: list[float] = field(default_factory=list)
    constraint_residual_max: list[float] = field(default_factory=list)
    hamiltonian: list[float] = field(default_factory=list)
    mean_metropolis_rejection: float = 0.0

    def pooled_positions(self) -> np.ndarray:
        """All snapshot configurations stacked into one (N, d) cloud."""
        if not self.snapshots:
            raise ValueError("chain record holds no snapshots")
        return np.vstack([x for _, x in self.snapshots])


class InitializationError(RuntimeError):
    """Initial configuration could not be projected onto the manifold."""


def _energy(point: PhasePoint, model: GasModel) -> float:
    if point.energy is None:
        point.energy = hamiltonian(point.x, model)
    return point.energy


def _correction(point: PhasePoint, model: GasModel, cs: ConstraintSet) -> float:
    if point.correction is None:
        point.correction = correction_energy(point.x, cs, model.beta_n)
    return point.correction


def make_rng(seed: int) -> np.random.Generator:
    """The chain generator: PCG64 seeded through SeedSequence."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def ou_refresh(
    y: np.ndarray,
    x: np.ndarray,
    model: GasModel,
    cs: ConstraintSet | None,
    params: SamplerParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Partial momentum refresh, projected tangent to the manifold at ``x``."""
    eta = params.eta
    noise = rng.standard_normal(size=y.shape)
    fresh = eta * y + math.sqrt((1.0 - eta * eta) / model.beta_n) * noise
    if cs is None:
        return fresh
    return project_momentum(fresh, x, cs)


def metropolis_ratio(
    p_old: PhasePoint,
    p_new: PhasePoint,
    model: GasModel,
    cs: ConstraintSet | None,
) -> float:
    """Acceptance probability 1 ^ exp(-beta_n (dH + dU + dK)).

    The correction dU is accumulated separately so that constraints with a
    constant Gram matrix contribute exactly zero.
    """
    h_old = _energy(p_old, model)
    h_new = _energy(p_new, model)
    if math.isinf(h_new):
        return 0.0
    if cs is None or has_constant_jacobian(cs):
        # A constant Gram matrix contributes the same correction at both
        # endpoints, so the difference is exactly zero.
        du = 0.0
    else:
        try:
            du = _correction(p_new, model, cs) - _correction(p_old, model, cs)
        except DegenerateConstraintError:
            return 0.0
    dk = 0.5 * (float(np.sum(p_new.y * p_new.y)) - float(np.sum(p_old.y * p_old.y)))
    log_ratio = -model.beta_n * ((h_new - h_old) + du + dk)
    if log_ratio >= 0.0:
        return 1.0
    return math.exp(log_ratio)


@dataclass
class StepProbe:
    """Optional per-step diagnostics filled in by ghmc_step.

    ``acceptance_probability`` is the Metropolis probability of the step
    (zero when the proposal already failed earlier); averaging its
    complement estimates the rejection fraction with far less variance
    than counting realized rejections.
    """

    acceptance_probability: float = 0.0


def ghmc_step(
    point: PhasePoint,
    model: GasModel,
    cs: ConstraintSet | None,
    params: SamplerParams,
    rng: np.random.Generator,
    probe: StepProbe | None = None,
) -> tuple[PhasePoint, str]:
    """One sampler step; returns the new state and its outcome tag.

    All failures map to a rejection tag; the position never leaves the
    manifold and the momentum is flipped on every rejection path.
    """
    if probe is not None:
        probe.acceptance_probability = 0.0
    x = point.x
    try:
        y_ref = ou_refresh(point.y, x, model, cs, params, rng)
    except DegenerateConstraintError:
        return (
            PhasePoint(x, -point.y, point.energy, point.grad, point.correction),
            "newton_forward_fail",
        )
    current = PhasePoint(x, y_ref, point.energy, point.grad, point.correction)
    rejected = PhasePoint(x, -y_ref, point.energy, point.grad, point.correction)
    try:
        proposal = rattle_step(current, params.dt, model, cs, params.newton)
    except StepFailure:
        return rejected, "newton_forward_fail"
    if cs is not None:
        back = PhasePoint(
            proposal.x, -proposal.y, proposal.energy, proposal.grad, proposal.correction
        )
        try:
            reverse = rattle_step(back, params.dt, model, cs, params.newton)
        except StepFailure:
            return rejected, "newton_backward_fail"
        mismatch = float(np.linalg.norm(reverse.x - x))
        if params.strict_reversibility:
            mismatch = max(mismatch, float(np.linalg.norm(reverse.y + y_ref)))
        if mismatch > params.epsilon_rev:
            return rejected, "reversibility_fail"
    p_acc = metropolis_ratio(current, proposal, model, cs)
    if probe is not None:
        probe.acceptance_probability = p_acc
    if rng.random() < p_acc:
        return proposal, "accepted"
    return rejected, "metropolis_reject"


def initial_momentum(
    x: np.ndarray,
    model: GasModel,
    cs: ConstraintSet | None,
    rng: np.random.Generator,
) -> np.ndarray:
    """Gaussian momentum at temperature 1/beta_n, projected tangent at ``x``."""
    y = rng.standard_normal(size=x.shape) / math.sqrt(model.beta_n)
    if cs is None:
        return y
    return project_momentum(y, x, cs)


def project_configuration(
    x0: np.ndarray, cs: ConstraintSet, newton: NewtonParams
) -> np.ndarray:
    """Project ``x0`` onto the manifold, searching along the gradients at x0."""
    try:
        result = newton_project(x0, x0, cs, newton)
    except NewtonNonConvergence as exc:
        raise InitializationError(
            f"cannot project the initial configuration onto the manifold: {exc}"
        ) from exc
    return x0 + (jacobian(x0, cs) @ result.theta).reshape(x0.shape)


def run_chain(
    x0: np.ndarray,
    model: GasModel,
    cs: ConstraintSet | None,
    params: SamplerParams,
    schedule: ObserverSchedule = ObserverSchedule(),
    observable_direction: np.ndarray | None = None,
) -> ChainRecord:
    """Run the sampler for ``params.n_iter`` steps from ``x0``.

    ``x0`` is projected onto the manifold before the loop and the momentum is
    drawn fresh at temperature 1/beta_n. Runs are reproducible bit for bit
    for a fixed seed. ``observable_direction`` sets the unit vector used for
    the barycenter scalar stream; it defaults to the first coordinate axis.
    """
    rng = make_rng(params.seed)
    x0 = np.asarray(x0, dtype=float).reshape(model.n, model.d)
    if cs is not None:
        x0 = project_configuration(x0, cs, params.newton)
    if observable_direction is None:
        v = np.zeros(model.d)
        v[0] = 1.0
    else:
        v = np.asarray(observable_direction, dtype=float)
    point = PhasePoint(x0, initial_momentum(x0, model, cs, rng))
    record = ChainRecord()
    burn_in = int(schedule.burn_in_fraction * params.n_iter)
    probe = StepProbe()
    rejection_sum = 0.0
    rejection_count = 0
    for step in range(1, params.n_iter + 1):
        point, tag = ghmc_step(point, model, cs, params, rng, probe)
        record.stats.record(tag)
        if step >= burn_in:
            rejection_sum += 1.0 - probe.acceptance_probability
            rejection_count += 1
        if step >= burn_in and (step - burn_in) % schedule.stride == 0:
            record.snapshots.append((step, point.x.copy()))
            record.steps.append(step)
            record.barycenter_dot_v.append(float(point.x.mean(axis=0) @ v))
            record.second_moment.append(float(np.mean(np.sum(point.x**2, axis=1))))
            residual = 0.0 if cs is None else float(np.max(np.abs(evaluate(point.x, cs))))
            record.constraint_residual_max.append(residual)
            record.hamiltonian.append(_energy(point, model))
    if rejection_count:
        record.mean_metropolis_rejection = rejection_sum / rejection_count
    return record
