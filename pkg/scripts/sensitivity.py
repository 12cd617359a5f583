"""First-derivative distance to S' for uniform scaling factors; optional SVG per data set."""
import argparse
from pathlib import Path

from cpfif.analysis import DATASETS, canonical_dataset, sensitivity_sweep
from cpfif.fileio import line_plot_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--svg-dir", type=Path)
    args = ap.parse_args()
    for name in DATASETS:
        res = sensitivity_sweep(canonical_dataset(name))
        row = "  ".join(f"{lam:g}:{res.distance[lam]:.3e}" for lam in sorted(res.distance))
        print(f"{name:<16} monotone={res.monotone}  {row}")
        if args.svg_dir:
            args.svg_dir.mkdir(parents=True, exist_ok=True)
            series = [("S'", res.x, res.spline_slope)] + [
                (f"lambda={lam:g}", res.x, res.slopes[lam]) for lam in sorted(res.slopes) if lam > 0
            ]
            line_plot_svg(args.svg_dir / f"sensitivity_{name}.svg", series, name, ylabel="F'")


if __name__ == "__main__":
    main()
