"""Median build-plus-evaluate time of linear, cubic, PCHIP and FIF interpolation."""
import argparse

from cpfif.analysis import DATASETS, PUBLISHED_OVERHEAD_BAND, TIMING_COUNTS, canonical_dataset, timing_bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repetitions", type=int, default=15)
    ap.add_argument("--counts", type=int, nargs="+", default=list(TIMING_COUNTS))
    args = ap.parse_args()
    for name in DATASETS:
        res = timing_bench(canonical_dataset(name), counts=args.counts, repetitions=args.repetitions)
        print(f"{name}  ordered={res.ordered()}  FIF exponent={res.fitted_exponent():.3f}")
        for method in res.methods:
            print(f"  {method:<7}" + "".join(f"{t:>11.3e}" for t in res.median[method]))
        print("  FIF/cubic" + "".join(f"{r:>9.1f}x" for r in res.ratio()))
    lo, hi = PUBLISHED_OVERHEAD_BAND
    print(f"published overhead band: {lo:.0f}-{hi:.0f}x")


if __name__ == "__main__":
    main()
