"""Figure rendering from the CSV suite; read-only over its inputs."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import overlays
from .io import CsvFormatError, load_positions, read_table

KINDS = ("scatter", "heatmap", "hist1d", "loglog-fit")
OVERLAYS = ("none", "disk", "semicircle", "predicted-density")


@dataclass(frozen=True)
class FigureSpec:
    source: Path
    kind: str
    output: Path
    overlay: str = "none"
    bins: int = 80

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if self.overlay not in OVERLAYS:
            raise ValueError(f"unknown overlay {self.overlay!r}")
        if self.bins < 1:
            raise ValueError("bins must be >= 1")


def _resolve_overlay(spec: FigureSpec, meta: dict[str, str]) -> str:
    if spec.overlay != "predicted-density":
        return spec.overlay
    return overlays.predicted_overlay_kind(meta)


def _new_axes():
    fig, ax = plt.subplots(figsize=(5.0, 5.0), dpi=120)
    return fig, ax


def _save(fig, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": "gasplots"})
    plt.close(fig)


def render_scatter(spec: FigureSpec) -> None:
    table, cloud = load_positions(spec.source)
    if cloud.shape[1] != 2:
        raise CsvFormatError("scatter figures need planar positions")
    fig, ax = _new_axes()
    ax.scatter(cloud[:, 0], cloud[:, 1], s=1.0, alpha=0.25, color="#1f4e79", linewidths=0)
    if _resolve_overlay(spec, table.meta) == "disk":
        ring = overlays.disk_outline(table.meta)
        ax.plot(ring[:, 0], ring[:, 1], color="#c02020", lw=1.5)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"n={table.meta.get('n')} {table.meta.get('constraint', 'none')}")
    _save(fig, spec.output)


def render_heatmap(spec: FigureSpec) -> None:
    table, cloud = load_positions(spec.source)
    if cloud.shape[1] != 2:
        raise CsvFormatError("heatmaps need planar positions")
    fig, ax = _new_axes()
    lo = np.floor(cloud.min(axis=0) * 4) / 4 - 0.25
    hi = np.ceil(cloud.max(axis=0) * 4) / 4 + 0.25
    counts, xe, ye = np.histogram2d(
        cloud[:, 0], cloud[:, 1], bins=spec.bins, range=((lo[0], hi[0]), (lo[1], hi[1]))
    )
    # raw counts, no smoothing: reruns over the same CSV are pixel-identical
    ax.pcolormesh(xe, ye, counts.T, cmap="viridis", rasterized=True)
    if _resolve_overlay(spec, table.meta) == "disk":
        ring = overlays.disk_outline(table.meta)
        ax.plot(ring[:, 0], ring[:, 1], color="white", lw=1.0)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    _save(fig, spec.output)


def render_hist1d(spec: FigureSpec) -> None:
    table, cloud = load_positions(spec.source)
    values = cloud[:, 0]
    fig, ax = _new_axes()
    ax.hist(values, bins=spec.bins, density=True, color="#77a0c8", edgecolor="none")
    overlay = _resolve_overlay(spec, table.meta)
    if overlay == "semicircle":
        grid = np.linspace(values.min(), values.max(), 512)
        ax.plot(grid, overlays.semicircle_density(grid), color="#c02020", lw=1.5)
    elif overlay == "disk":
        raise CsvFormatError("disk overlays apply to planar figures only")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.set_title(f"n={table.meta.get('n')} {table.meta.get('constraint', 'none')}")
    _save(fig, spec.output)


def fit_loglog(dts: np.ndarray, fractions: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Least-squares line through (log dt, log fraction), skipping points a
    log cannot see (fraction <= 0) or saturated ones (fraction >= 1); the
    formula mirrors the sampler CLI's internal fit so slopes agree exactly."""
    used = (fractions > 0.0) & (fractions < 1.0)
    if used.sum() < 2:
        raise CsvFormatError("need at least two usable scan points for the fit")
    slope, intercept = np.polyfit(np.log(dts[used]), np.log(fractions[used]), 1)
    return float(slope), float(intercept), used


def render_loglog_fit(spec: FigureSpec) -> tuple[float, float]:
    table = read_table(spec.source, expect_columns=("dt", "metropolis_reject_fraction"))
    dts = table.column("dt")
    fractions = table.column("metropolis_reject_fraction")
    slope, intercept, used = fit_loglog(dts, fractions)
    fig, ax = _new_axes()
    ax.loglog(dts[used], fractions[used], "o", color="#1f4e79")
    if (~used).any():
        ax.loglog(dts[~used], np.maximum(fractions[~used], 1e-300), "x", color="#999999")
    grid = np.linspace(np.log(dts.min()), np.log(dts.max()), 64)
    ax.loglog(np.exp(grid), np.exp(intercept + slope * grid), color="#c02020", lw=1.2)
    ax.set_xlabel("dt")
    ax.set_ylabel("Metropolis rejection fraction")
    ax.set_title(f"slope {slope:.3f}")
    _save(fig, spec.output)
    print(f"slope={slope!r} intercept={intercept!r}")
    return slope, intercept


def render(spec: FigureSpec):
    """Render one figure; returns the fit numbers for loglog-fit figures."""
    if spec.kind == "scatter":
        return render_scatter(spec)
    if spec.kind == "heatmap":
        return render_heatmap(spec)
    if spec.kind == "hist1d":
        return render_hist1d(spec)
    return render_loglog_fit(spec)
