"""Sampling Coulomb and log gases conditioned on rare events.

The sampler is a generalized hybrid Monte Carlo chain whose proposals are
RATTLE steps on the constraint manifold, with an explicit reversibility
check and a Metropolis correction; closed-form limit shapes make the output
verifiable without a reference run.
"""

from .constraints import (
    Affine,
    AxisGap,
    ConstraintSet,
    Cosine,
    LinearStat,
    LogAbs,
    QuadStat,
    RadialGap,
)
from .model import (
    Coulomb,
    GasModel,
    Log1D,
    Quadratic,
    Quartic,
    RadialPower,
    Weak,
    default_beta,
    hamiltonian,
    hamiltonian_grad,
)
from .rattle import NewtonParams, PhasePoint, rattle_backward_check, rattle_step
from .sampler import (
    ChainRecord,
    ObserverSchedule,
    RejectionStats,
    SamplerParams,
    ghmc_step,
    run_chain,
)

__all__ = [
    "Affine",
    "AxisGap",
    "ChainRecord",
    "ConstraintSet",
    "Cosine",
    "Coulomb",
    "GasModel",
    "LinearStat",
    "Log1D",
    "LogAbs",
    "NewtonParams",
    "ObserverSchedule",
    "PhasePoint",
    "QuadStat",
    "Quadratic",
    "Quartic",
    "RadialGap",
    "RadialPower",
    "RejectionStats",
    "SamplerParams",
    "Weak",
    "default_beta",
    "ghmc_step",
    "hamiltonian",
    "hamiltonian_grad",
    "rattle_backward_check",
    "rattle_step",
    "run_chain",
]

__version__ = "0.1.0"
