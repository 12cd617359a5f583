"""Curvature deviation under shrinking scaling-factor perturbations."""
import argparse

import numpy as np

from cpfif.analysis import DATASETS, PUBLISHED_LAMBDA, canonical_dataset, stability_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dataset", choices=DATASETS, action="append")
    args = ap.parse_args()
    for name in args.dataset or DATASETS:
        res = stability_sweep(canonical_dataset(name), PUBLISHED_LAMBDA)
        ratios = np.concatenate([[np.nan], res.ratios()])
        print(f"{name}  (C1 fit {res.c1:.4g})")
        for (delta, eff, dev), r in zip(res.rows(), ratios):
            print(f"  delta={delta:.3e}  |dlambda|={eff:.3e}  |dkappa|={dev:.3e}  ratio={r:.3f}")


if __name__ == "__main__":
    main()
