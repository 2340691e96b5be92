"""Config-driven experiment runner.

``coulombgas run <config>`` samples one gas and writes the CSV suite;
``coulombgas scan-dt <config> --dt ...`` repeats a run over several step
sizes and fits the Metropolis rejection fraction against dt in log-log
coordinates. Configs are INI files; see the README for the schema.
"""

from __future__ import annotations

import argparse
import configparser
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import observables
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
from .model import Coulomb, GasModel, Log1D, Quadratic, Quartic, RadialPower, Weak, default_beta
from .rattle import NewtonParams
from .sampler import (
    ChainRecord,
    InitializationError,
    ObserverSchedule,
    RejectionStats,
    SamplerParams,
    run_chain,
)

_CONSTRAINT_SECTION = re.compile(r"^constraint(\d*)$")


@dataclass(frozen=True)
class OutputPrefs:
    directory: Path
    positions: bool = True
    scalars: bool = True
    stats: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    model: GasModel
    constraints: ConstraintSet | None
    params: SamplerParams
    schedule: ObserverSchedule
    output: OutputPrefs
    scan_dts: tuple[float, ...] = ()
    scan_n_iter: int | None = None


def _parse_confinement(section: configparser.SectionProxy):
    name = section.get("confinement", "quadratic").strip().lower()
    if name == "quadratic":
        return Quadratic()
    if name == "quartic":
        return Quartic()
    if name == "weak":
        return Weak()
    if name == "radial_power":
        return RadialPower(a=section.getfloat("a"), q=section.getfloat("q"))
    raise ValueError(f"unknown confinement {name!r}")


def _parse_vector(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in re.split(r"[,\s]+", text.strip()) if t)


def _parse_constraint(section: configparser.SectionProxy):
    kind = section.get("kind", "none").strip().lower()
    if kind == "none":
        return None
    if kind == "affine":
        return LinearStat(Affine(v=_parse_vector(section.get("v", "1")), c=section.getfloat("c")))
    if kind == "cosine":
        return LinearStat(Cosine(c=section.getfloat("c"), k=section.getfloat("k", 5.0)))
    if kind == "logabs":
        return LinearStat(LogAbs(c=section.getfloat("c")))
    if kind == "radial_gap":
        return QuadStat(RadialGap(c=section.getfloat("c")))
    if kind == "axis_gap":
        return QuadStat(AxisGap(c=section.getfloat("c")))
    raise ValueError(f"unknown constraint kind {kind!r}")


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate an experiment config; raises ValueError on defects."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ValueError(f"config file not found: {path}")

    if "model" not in parser:
        raise ValueError("config is missing the [model] section")
    msec = parser["model"]
    n = msec.getint("n")
    beta_text = msec.get("beta", "n_squared").strip().lower()
    beta_n = default_beta(n) if beta_text == "n_squared" else float(beta_text)
    interaction_name = msec.get("interaction", "coulomb").strip().lower()
    if interaction_name == "coulomb":
        interaction = Coulomb()
    elif interaction_name == "log1d":
        interaction = Log1D()
    else:
        raise ValueError(f"unknown interaction {interaction_name!r}")
    model = GasModel(
        d=msec.getint("d"),
        n=n,
        beta_n=beta_n,
        confinement=_parse_confinement(msec),
        interaction=interaction,
    )

    components = []
    for name in parser.sections():
        if _CONSTRAINT_SECTION.match(name):
            spec = _parse_constraint(parser[name])
            if spec is not None:
                components.append(spec)
    constraints = ConstraintSet(tuple(components)) if components else None
    _validate_constraints(constraints, model)

    ssec = parser["sampler"] if "sampler" in parser else None
    if ssec is None:
        raise ValueError("config is missing the [sampler] section")
    dt = ssec.getfloat("dt")
    if ssec.get("n_iter", None) is not None:
        n_iter = ssec.getint("n_iter")
    elif ssec.get("horizon", None) is not None:
        n_iter = math.ceil(ssec.getfloat("horizon") / dt)
    else:
        raise ValueError("the [sampler] section needs n_iter or horizon")
    params = SamplerParams(
        dt=dt,
        n_iter=n_iter,
        gamma=ssec.getfloat("gamma", 1.0),
        newton=NewtonParams(
            epsilon=ssec.getfloat("epsilon_newton", 1e-12),
            max_steps=ssec.getint("newton_max_steps", 20),
        ),
        epsilon_rev=ssec.getfloat("epsilon_rev", 1e-12),
        seed=ssec.getint("seed", 0),
        strict_reversibility=ssec.getboolean("strict_reversibility", False),
    )
    schedule = ObserverSchedule(
        burn_in_fraction=ssec.getfloat("burn_in_fraction", 0.1),
        stride=ssec.getint("snapshot_stride", 100),
    )

    osec = parser["output"] if "output" in parser else {}
    directory = Path(osec.get("directory", "out") if osec else "out")
    output = OutputPrefs(
        directory=directory,
        positions=_getbool(osec, "positions", True),
        scalars=_getbool(osec, "scalars", True),
        stats=_getbool(osec, "stats", True),
    )

    scan_dts: tuple[float, ...] = ()
    scan_n_iter = None
    if "scan" in parser:
        scan = parser["scan"]
        if scan.get("dts", None):
            scan_dts = _parse_vector(scan.get("dts"))
        if scan.get("n_iter", None):
            scan_n_iter = scan.getint("n_iter")

    return ExperimentConfig(model, constraints, params, schedule, output, scan_dts, scan_n_iter)


def _getbool(section, key: str, default: bool) -> bool:
    if not section or key not in section:
        return default
    return str(section[key]).strip().lower() in ("1", "true", "yes", "on")


def _validate_constraints(cs: ConstraintSet | None, model: GasModel) -> None:
    if cs is None:
        return
    for spec in cs.components:
        if isinstance(spec, LinearStat):
            if isinstance(spec.phi, Cosine) and model.d != 2:
                raise ValueError("Cosine statistics require d = 2")
            if isinstance(spec.phi, Affine) and len(spec.phi.v) != model.d:
                raise ValueError(
                    f"Affine direction has {len(spec.phi.v)} components, expected d={model.d}"
                )


# --- initial configurations ---------------------------------------------------


def initial_configuration(
    model: GasModel, cs: ConstraintSet | None, seed: int, attempt: int = 0
) -> np.ndarray:
    """Starting cloud: uniform on [-1, 1]^d, or an even grid on [-1, 1] in 1D.

    When the constraint set has a single component with a closed-form exact
    solve (shift for affine statistics, rescaling for the homogeneous ones),
    the cloud is moved onto the manifold before the Newton projection so the
    projection starts from a consistent point.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 7, attempt])))
    if model.d == 1:
        x = np.linspace(-1.0, 1.0, model.n).reshape(model.n, 1)
        spacing = 2.0 / (model.n - 1)
        x[x == 0.0] = 0.5 * spacing  # keep log|x| statistics finite
    else:
        x = rng.uniform(-1.0, 1.0, size=(model.n, model.d))
    if cs is not None and cs.m == 1:
        x = _presolve_single_constraint(x, cs.components[0])
    return x


def _presolve_single_constraint(x: np.ndarray, spec) -> np.ndarray:
    n = x.shape[0]
    if isinstance(spec, LinearStat) and isinstance(spec.phi, Affine):
        v = np.asarray(spec.phi.v)
        return x + (spec.phi.c - float(x.mean(axis=0) @ v)) * v
    if isinstance(spec, LinearStat) and isinstance(spec.phi, LogAbs):
        radii = np.linalg.norm(x, axis=1)
        if np.all(radii > 0.0):
            return x * math.exp(spec.phi.c - float(np.mean(np.log(radii))))
        return x
    if isinstance(spec, QuadStat) and spec.phi.c > 0:
        diff = x[:, None, :] - x[None, :, :]
        if isinstance(spec.phi, RadialGap):
            spread = float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).sum()) / (n * n)
        else:
            spread = float(np.abs(diff[:, :, 0]).sum()) / (n * n)
        if spread > 0.0:
            return x * (spec.phi.c / spread)
    return x


# --- experiment driver ----------------------------------------------------------


def _observable_direction(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.constraints is not None:
        for spec in cfg.constraints.components:
            if isinstance(spec, LinearStat) and isinstance(spec.phi, Affine):
                return np.asarray(spec.phi.v)
    v = np.zeros(cfg.model.d)
    v[0] = 1.0
    return v


def run_experiment_chain(cfg: ExperimentConfig, seed: int, max_attempts: int = 20) -> ChainRecord:
    """Run one chain, retrying the initial draw if its projection diverges."""
    params = replace(cfg.params, seed=seed)
    last_error: InitializationError | None = None
    for attempt in range(max_attempts):
        x0 = initial_configuration(cfg.model, cfg.constraints, seed, attempt)
        try:
            return run_chain(
                x0,
                cfg.model,
                cfg.constraints,
                params,
                cfg.schedule,
                observable_direction=_observable_direction(cfg),
            )
        except InitializationError as exc:
            last_error = exc
    raise InitializationError(
        f"initial projection failed for {max_attempts} independent draws: {last_error}"
    )


def _merge_records(records: list[ChainRecord]) -> ChainRecord:
    merged = ChainRecord()
    merged.mean_metropolis_rejection = float(
        np.mean([rec.mean_metropolis_rejection for rec in records])
    )
    for rec in records:
        merged.snapshots.extend(rec.snapshots)
        merged.steps.extend(rec.steps)
        merged.barycenter_dot_v.extend(rec.barycenter_dot_v)
        merged.second_moment.extend(rec.second_moment)
        merged.constraint_residual_max.extend(rec.constraint_residual_max)
        merged.hamiltonian.extend(rec.hamiltonian)
        for tag, value in rec.stats.as_dict().items():
            if tag != "total":
                setattr(merged.stats, tag, getattr(merged.stats, tag) + value)
    return merged


def _config_meta(cfg: ExperimentConfig, seed: int, chains: int) -> dict[str, object]:
    model = cfg.model
    meta: dict[str, object] = {
        "d": model.d,
        "n": model.n,
        "beta_n": model.beta_n,
        "confinement": type(model.confinement).__name__.lower(),
        "interaction": type(model.interaction).__name__.lower(),
        "dt": cfg.params.dt,
        "gamma": cfg.params.gamma,
        "n_iter": cfg.params.n_iter,
        "seed": seed,
        "chains": chains,
    }
    if cfg.constraints is None:
        meta["constraint"] = "none"
    else:
        parts = []
        for spec in cfg.constraints.components:
            phi = spec.phi
            if isinstance(phi, Affine):
                parts.append(f"affine(c={phi.c},v={','.join(repr(t) for t in phi.v)})")
            elif isinstance(phi, Cosine):
                parts.append(f"cosine(c={phi.c},k={phi.k})")
            elif isinstance(phi, LogAbs):
                parts.append(f"logabs(c={phi.c})")
            elif isinstance(phi, RadialGap):
                parts.append(f"radial_gap(c={phi.c})")
            else:
                parts.append(f"axis_gap(c={phi.c})")
        meta["constraint"] = ";".join(parts)
        first = cfg.constraints.components[0]
        if isinstance(first, LinearStat) and isinstance(first.phi, Affine):
            meta["c"] = first.phi.c
            meta["v"] = ",".join(repr(t) for t in first.phi.v)
    return meta


def _chain_worker(args: tuple[ExperimentConfig, int]) -> ChainRecord:
    cfg, seed = args
    return run_experiment_chain(cfg, seed)


def run_command(cfg: ExperimentConfig, chains: int, threads: int) -> tuple[ChainRecord, dict]:
    seeds = [cfg.params.seed + i for i in range(chains)]
    jobs = [(cfg, s) for s in seeds]
    if threads > 1 and chains > 1:
        with ProcessPoolExecutor(max_workers=min(threads, chains)) as pool:
            records = list(pool.map(_chain_worker, jobs))
    else:
        records = [_chain_worker(job) for job in jobs]
    merged = _merge_records(records) if len(records) > 1 else records[0]
    meta = _config_meta(cfg, cfg.params.seed, chains)
    out = cfg.output
    out.directory.mkdir(parents=True, exist_ok=True)
    if out.positions:
        observables.write_positions_csv(out.directory / "positions.csv", merged, meta)
    if out.scalars:
        observables.write_scalars_csv(out.directory / "scalars.csv", merged, meta)
    if out.stats:
        observables.write_stats_csv(out.directory / "stats.csv", merged.stats, meta)
    return merged, meta


def metropolis_reject_fraction(stats: RejectionStats) -> float:
    return stats.metropolis_reject / stats.total if stats.total else 0.0


def fit_loglog(
    dts: np.ndarray, fractions: np.ndarray
) -> tuple[float, float, np.ndarray, list[str]]:
    """Least-squares line through (log dt, log fraction).

    Saturated points (fraction >= 1) and empty points (fraction <= 0) cannot
    enter the fit; they are excluded with a warning.
    """
    dts = np.asarray(dts, dtype=float)
    fractions = np.asarray(fractions, dtype=float)
    used = (fractions > 0.0) & (fractions < 1.0)
    warnings = []
    for dt, frac in zip(dts[~used], fractions[~used]):
        label = "saturated" if frac >= 1.0 else "empty"
        warnings.append(f"excluding {label} point dt={dt!r} fraction={frac!r} from the fit")
    if used.sum() < 2:
        raise ValueError("need at least two usable points for the log-log fit")
    slope, intercept = np.polyfit(np.log(dts[used]), np.log(fractions[used]), 1)
    return float(slope), float(intercept), used, warnings


def scan_command(
    cfg: ExperimentConfig, dts: list[float], out_dir: Path
) -> tuple[list[tuple[float, float]], float, float]:
    if len(dts) < 3:
        raise ValueError(f"a dt scan needs at least 3 step sizes, got {len(dts)}")
    n_iter = cfg.scan_n_iter or cfg.params.n_iter
    rows: list[tuple[float, float]] = []
    for index, dt in enumerate(dts):
        params = replace(cfg.params, dt=dt, n_iter=n_iter, seed=cfg.params.seed + 1000 * index)
        sub = replace(cfg, params=params)
        record = run_experiment_chain(sub, params.seed)
        # mean of (1 - acceptance probability): same limit as the count share
        # of Metropolis rejections, resolvable at small dt in far fewer steps
        fraction = record.mean_metropolis_rejection
        rows.append((dt, fraction))
        print(f"dt={dt!r} metropolis_reject_fraction={fraction!r}")
    slope, intercept, _, warnings = fit_loglog(
        np.array([r[0] for r in rows]), np.array([r[1] for r in rows])
    )
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    meta = _config_meta(cfg, cfg.params.seed, 1)
    meta["scan_n_iter"] = n_iter
    out_dir.mkdir(parents=True, exist_ok=True)
    observables.write_rate_scan_csv(out_dir / "rate_scan.csv", rows, meta)
    print(f"loglog_fit slope={slope!r} intercept={intercept!r}")
    return rows, slope, intercept


# --- argparse plumbing ----------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coulombgas")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment and write its CSV suite")
    run_p.add_argument("config")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--out", type=Path, default=None)
    run_p.add_argument("--chains", type=int, default=1)
    run_p.add_argument("--threads", type=int, default=1)
    run_p.add_argument("--n-iter", type=int, default=None, dest="n_iter")

    scan_p = sub.add_parser("scan-dt", help="rejection-rate scan over step sizes")
    scan_p.add_argument("config")
    scan_p.add_argument("--dt", type=str, default=None, help="comma-separated step sizes")
    scan_p.add_argument("--seed", type=int, default=None)
    scan_p.add_argument("--out", type=Path, default=None)
    scan_p.add_argument("--n-iter", type=int, default=None, dest="n_iter")
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    params = cfg.params
    if args.seed is not None:
        params = replace(params, seed=args.seed)
    if getattr(args, "n_iter", None) is not None:
        params = replace(params, n_iter=args.n_iter)
    output = cfg.output
    if args.out is not None:
        output = replace(output, directory=args.out)
    return replace(cfg, params=params, output=output)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        if args.command == "run":
            record, _ = run_command(cfg, max(1, args.chains), max(1, args.threads))
            for tag, value in record.stats.as_dict().items():
                print(f"{tag}={value}")
            print(f"metropolis_reject_fraction={metropolis_reject_fraction(record.stats)!r}")
            print(f"output={cfg.output.directory}")
        else:
            if args.dt is not None:
                dts = [float(t) for t in re.split(r"[,\s]+", args.dt) if t]
            elif cfg.scan_dts:
                dts = list(cfg.scan_dts)
            else:
                raise ValueError("scan-dt needs --dt or a [scan] dts entry in the config")
            out_dir = cfg.output.directory if args.out is None else args.out
            scan_command(cfg, dts, out_dir)
    except (ValueError, InitializationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
