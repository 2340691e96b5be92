"""Command line figure renderer.

    gasplots scatter out/ginibre_shift/positions.csv disk.png --overlay disk
    gasplots hist1d out/loggas_unconstrained/positions.csv semi.png --overlay semicircle
    gasplots loglog-fit out/rate_scan/rate_scan.csv rate.png
    gasplots figures out figures/          # render every known experiment

The ``figures`` driver walks the standard run directories written by the
sampler CLI and renders one figure per experiment.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import KINDS, OVERLAYS, FigureSpec, render
from .io import CsvFormatError

# experiment directory -> (figure kind, overlay)
FIGURE_PLAN: dict[str, tuple[str, str]] = {
    "ginibre_shift": ("scatter", "disk"),
    "unconstrained": ("scatter", "disk"),
    "quartic_shift": ("heatmap", "none"),
    "weak_shift": ("heatmap", "none"),
    "cosine_02": ("scatter", "none"),
    "cosine_05": ("scatter", "none"),
    "radial_gap": ("scatter", "none"),
    "axis_gap": ("scatter", "none"),
    "loggas_unconstrained": ("hist1d", "semicircle"),
    "loggas_logabs_m05": ("hist1d", "none"),
    "loggas_logabs_0": ("hist1d", "none"),
    "rate_scan": ("loglog-fit", "none"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gasplots")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"render a {kind} figure from one CSV")
        p.add_argument("csv", type=Path)
        p.add_argument("output", type=Path)
        p.add_argument("--overlay", choices=OVERLAYS, default="none")
        p.add_argument("--bins", type=int, default=80)
    driver = sub.add_parser("figures", help="render every known experiment under a run root")
    driver.add_argument("run_root", type=Path)
    driver.add_argument("out_dir", type=Path)
    return parser


def _render_plan(run_root: Path, out_dir: Path) -> int:
    rendered = 0
    for name, (kind, overlay) in FIGURE_PLAN.items():
        source_name = "rate_scan.csv" if kind == "loglog-fit" else "positions.csv"
        source = run_root / name / source_name
        if not source.is_file():
            continue
        render(FigureSpec(source, kind, out_dir / f"{name}.png", overlay))
        print(f"rendered {name} -> {out_dir / (name + '.png')}")
        rendered += 1
    if rendered == 0:
        raise CsvFormatError(f"no known run directories under {run_root}")
    return rendered


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "figures":
            _render_plan(args.run_root, args.out_dir)
        else:
            render(FigureSpec(args.csv, args.command, args.output, args.overlay, args.bins))
    except (CsvFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
