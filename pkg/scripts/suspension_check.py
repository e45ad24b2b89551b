"""Compare the example correlation with its suspension-flow counterpart:
maximal gap off and on the exceptional set, and the exceptional fraction."""
import argparse

import numpy as np

from nilcorr.correlate import CorrelationSequence
from nilcorr.nilseq import example_spec
from nilcorr.suspension import alpha_tilde_values, exceptional


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta", type=float, nargs="+", default=[0.4, 0.2, 0.1, 0.05])
    ap.add_argument("--N", type=int, default=10**4)
    args = ap.parse_args()

    spec = example_spec()
    ns = np.arange(1, args.N + 1)
    alpha = CorrelationSequence(spec).values(ns)
    print(f"{'delta':>6} {'off-set max':>12} {'on-set max':>11} {'exc. frac':>10}")
    for delta in args.delta:
        diff = np.abs(alpha - alpha_tilde_values(spec, delta, ns) / delta)
        exc = exceptional(spec.polys, delta, ns)
        on = diff[exc].max() if exc.any() else 0.0
        print(f"{delta:6.3f} {diff[~exc].max():12.2e} {on:11.4f} {exc.mean():10.4f}")


if __name__ == "__main__":
    main()
