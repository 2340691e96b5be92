"""Streaming statistics over chain snapshots and the CSV output suite.

CSV layouts are fixed and versioned so downstream plotting stays decoupled:

* ``positions.csv``  step,particle,coord0,...,coord{d-1}
* ``scalars.csv``    step,barycenter_dot_v,second_moment,constraint_residual_max,hamiltonian
* ``stats.csv``      accepted,newton_forward_fail,newton_backward_fail,reversibility_fail,metropolis_reject,total
* ``rate_scan.csv``  dt,metropolis_reject_fraction

All files are UTF-8 with a header row and LF line endings; run metadata is
embedded as leading ``# key=value`` comment lines. Floats are written with
``repr`` so a read-back reproduces them bit for bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .sampler import ChainRecord, RejectionStats

LAYOUT_VERSION = 1


def barycenter(x: np.ndarray) -> np.ndarray:
    """Arithmetic mean of the particle positions, shape (d,)."""
    return np.asarray(x, dtype=float).mean(axis=0)


def second_moment_about(x: np.ndarray, center: np.ndarray) -> float:
    """(1/n) sum_i |x_i - center|^2."""
    delta = np.asarray(x, dtype=float) - np.asarray(center, dtype=float)
    return float(np.mean(np.sum(delta * delta, axis=1)))


def radial_cdf(samples: np.ndarray, center: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Empirical CDF of |sample - center|: sorted radii and levels i/N."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("radial_cdf needs at least one sample")
    radii = np.sort(np.linalg.norm(samples - np.asarray(center, dtype=float), axis=1))
    levels = np.arange(1, radii.size + 1) / radii.size
    return radii, levels


# --- histograms ---------------------------------------------------------------


@dataclass(frozen=True)
class HistogramSpec1D:
    lo: float
    hi: float
    bins: int

    def __post_init__(self) -> None:
        if self.bins < 1:
            raise ValueError("histogram needs at least one bin")
        if not self.hi > self.lo:
            raise ValueError("histogram range must be increasing")


@dataclass(frozen=True)
class HistogramSpec2D:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    bins_x: int
    bins_y: int

    def __post_init__(self) -> None:
        if self.bins_x < 1 or self.bins_y < 1:
            raise ValueError("histogram needs at least one bin per axis")
        if not (self.x_hi > self.x_lo and self.y_hi > self.y_lo):
            raise ValueError("histogram ranges must be increasing")


@dataclass(eq=False)
class Histogram1D:
    edges: np.ndarray
    counts: np.ndarray
    overflow: int

    @property
    def total_weight(self) -> int:
        return int(self.counts.sum())


@dataclass(eq=False)
class Histogram2D:
    x_edges: np.ndarray
    y_edges: np.ndarray
    counts: np.ndarray  # (bins_x, bins_y) integers
    overflow: int

    @property
    def total_weight(self) -> int:
        return int(self.counts.sum())


@dataclass(eq=False)
class RadialHistogram:
    center: np.ndarray
    max_radius: float
    counts: np.ndarray
    overflow: int

    @property
    def total_weight(self) -> int:
        return int(self.counts.sum())


def histogram1d(samples: np.ndarray, spec: HistogramSpec1D) -> Histogram1D:
    samples = np.asarray(samples, dtype=float).reshape(-1)
    counts, edges = np.histogram(samples, bins=spec.bins, range=(spec.lo, spec.hi))
    return Histogram1D(edges, counts.astype(np.int64), int(samples.size - counts.sum()))


def histogram2d(samples: np.ndarray, spec: HistogramSpec2D) -> Histogram2D:
    samples = np.asarray(samples, dtype=float).reshape(-1, 2)
    counts, x_edges, y_edges = np.histogram2d(
        samples[:, 0],
        samples[:, 1],
        bins=(spec.bins_x, spec.bins_y),
        range=((spec.x_lo, spec.x_hi), (spec.y_lo, spec.y_hi)),
    )
    counts = counts.astype(np.int64)
    return Histogram2D(x_edges, y_edges, counts, int(samples.shape[0] - counts.sum()))


def radial_histogram(
    samples: np.ndarray, center: np.ndarray, max_radius: float, bins: int
) -> RadialHistogram:
    if bins < 1:
        raise ValueError("histogram needs at least one bin")
    center = np.asarray(center, dtype=float)
    radii = np.linalg.norm(np.asarray(samples, dtype=float) - center, axis=1)
    counts, _ = np.histogram(radii, bins=bins, range=(0.0, max_radius))
    counts = counts.astype(np.int64)
    return RadialHistogram(center, max_radius, counts, int(radii.size - counts.sum()))


def barycenter_variance_report(
    series: Iterable[float], n: int, beta_n: float
) -> dict[str, float | str]:
    """Empirical variance of the barycenter projection vs two candidate laws.

    Returns the measurement together with the predictions 1/(2 beta_n) and
    n/(2 beta_n) and which of the two is closer; the chain does not assert
    either as ground truth.
    """
    values = np.asarray(list(series), dtype=float)
    measured = float(np.var(values))
    small = 1.0 / (2.0 * beta_n)
    large = n / (2.0 * beta_n)
    closer = "1/(2 beta_n)" if abs(measured - small) <= abs(measured - large) else "n/(2 beta_n)"
    return {
        "measured": measured,
        "candidate_small": small,
        "candidate_large": large,
        "closer": closer,
    }


# --- CSV emission -------------------------------------------------------------


def _open_csv(path: Path, meta: Mapping[str, object]):
    handle = open(path, "w", encoding="utf-8", newline="")
    handle.write(f"# layout_version={LAYOUT_VERSION}\n")
    for key, value in meta.items():
        handle.write(f"# {key}={value}\n")
    return handle, csv.writer(handle, lineterminator="\n")


def _fmt(value: float) -> str:
    return repr(float(value))


def write_positions_csv(path: str | Path, record: ChainRecord, meta: Mapping[str, object]) -> None:
    handle, writer = _open_csv(Path(path), meta)
    with handle:
        first = record.snapshots[0][1] if record.snapshots else None
        d = first.shape[1] if first is not None else 0
        writer.writerow(["step", "particle"] + [f"coord{k}" for k in range(d)])
        for step, x in record.snapshots:
            for i in range(x.shape[0]):
                writer.writerow([step, i] + [_fmt(c) for c in x[i]])


def write_scalars_csv(path: str | Path, record: ChainRecord, meta: Mapping[str, object]) -> None:
    handle, writer = _open_csv(Path(path), meta)
    with handle:
        writer.writerow(
            [
                "step",
                "barycenter_dot_v",
                "second_moment",
                "constraint_residual_max",
                "hamiltonian",
            ]
        )
        rows = zip(
            record.steps,
            record.barycenter_dot_v,
            record.second_moment,
            record.constraint_residual_max,
            record.hamiltonian,
        )
        for step, bdv, sm, res, ham in rows:
            writer.writerow([step, _fmt(bdv), _fmt(sm), _fmt(res), _fmt(ham)])


def write_stats_csv(path: str | Path, stats: RejectionStats, meta: Mapping[str, object]) -> None:
    handle, writer = _open_csv(Path(path), meta)
    with handle:
        writer.writerow(
            [
                "accepted",
                "newton_forward_fail",
                "newton_backward_fail",
                "reversibility_fail",
                "metropolis_reject",
                "total",
            ]
        )
        d = stats.as_dict()
        writer.writerow(
            [
                d["accepted"],
                d["newton_forward_fail"],
                d["newton_backward_fail"],
                d["reversibility_fail"],
                d["metropolis_reject"],
                d["total"],
            ]
        )


def write_rate_scan_csv(
    path: str | Path,
    rows: Iterable[tuple[float, float]],
    meta: Mapping[str, object],
) -> None:
    handle, writer = _open_csv(Path(path), meta)
    with handle:
        writer.writerow(["dt", "metropolis_reject_fraction"])
        for dt, fraction in rows:
            writer.writerow([_fmt(dt), _fmt(fraction)])
