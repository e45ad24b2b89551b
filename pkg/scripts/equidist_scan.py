"""Hit densities of {q(n)} in [1 - delta, 1) over a descending delta grid,
for a few polynomials, next to the value delta expected under equidistribution."""
import argparse

from nilcorr.averaging import Cesaro, Primes
from nilcorr.equidist import density_limit_scan
from nilcorr.poly import VectorPolynomial

DEFAULT_POLYS = ["sqrt(2)*x", "sqrt(2)*x^2", "pi*x^3 + x/2", "x/3 + 1/7"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--poly", nargs="+", default=DEFAULT_POLYS)
    ap.add_argument("--delta", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.01])
    ap.add_argument("--N", type=int, default=10**6)
    ap.add_argument("--primes", action="store_true", help="average over primes instead of [1, N)")
    args = ap.parse_args()

    scheme = Primes(args.N) if args.primes else Cesaro(1, args.N)
    for text in args.poly:
        q = VectorPolynomial.parse(text)
        print(text)
        for rep in density_limit_scan(q, sorted(args.delta, reverse=True), scheme):
            print(f"  delta={rep.delta:<6g} density={rep.density:.6f} "
                  f"density/delta={rep.density / rep.delta:.4f} verdict={rep.verdict}")


if __name__ == "__main__":
    main()
