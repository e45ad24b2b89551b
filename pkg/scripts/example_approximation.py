"""Approximation error of the mollified nilsequence against the example
correlation, for a range of epsilon, under Cesaro and prime averages."""
import argparse

import numpy as np

from nilcorr.averaging import Cesaro, Primes, approximation_error, error_sweep
from nilcorr.nilseq import example_alpha, example_nil_approx


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.4, 0.2, 0.1, 0.05, 0.02])
    ap.add_argument("--N", type=int, default=10**6)
    ap.add_argument("--windows", type=int, default=5)
    args = ap.parse_args()

    starts = [int(s) for s in np.linspace(1, 10**9, args.windows)]
    print(f"{'eps':>8} {'cesaro':>10} {'primes':>10} {'sweep max':>10}")
    for eps in args.eps:
        psi = example_nil_approx(eps)
        ces = approximation_error(example_alpha, psi, Cesaro(1, args.N + 1))
        pri = approximation_error(example_alpha, psi, Primes(args.N))
        sweep = max(v for _, v in error_sweep(example_alpha, psi, 10**5, starts))
        print(f"{eps:8.3f} {ces:10.5f} {pri:10.5f} {sweep:10.5f}")


if __name__ == "__main__":
    main()
