"""Sup norms of S and admissible scaling bounds for each data set and derivative scheme."""
import argparse

from cpfif.analysis import DATASETS, PUBLISHED_BOUNDS, PUBLISHED_SUP_NORMS, REFERENCE_EPSILON, canonical_dataset, reference_spline
from cpfif.optimize import theorem4_bounds
from cpfif.splines import SCHEMES


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=REFERENCE_EPSILON)
    args = ap.parse_args()
    for name in DATASETS:
        data = canonical_dataset(name)
        pk, pc = PUBLISHED_SUP_NORMS[name]
        print(f"{name}: published K={pk} C={pc} bound={PUBLISHED_BOUNDS[name]}")
        for scheme in SCHEMES:
            b = theorem4_bounds(data, reference_spline(data, scheme), args.eps)
            print(f"  {scheme:<15} K={b.K:.4f} C={b.C:.4f} slope={b.slope_term:.4g} "
                  f"curv={b.curvature_term:.4g} bound={b.curvature_bound:.4g} tight={b.tight:.4g}")


if __name__ == "__main__":
    main()
