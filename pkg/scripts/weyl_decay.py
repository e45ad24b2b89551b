"""Normalised Weyl sums |(1/N) sum e(q(n))| for growing N, showing the decay
for irrational leading coefficients and its absence for rational ones."""
import argparse

from nilcorr.equidist import weyl_sum
from nilcorr.poly import VectorPolynomial

DEFAULT_POLYS = ["sqrt(2)*x", "sqrt(2)*x^2", "sqrt(3)*x^3", "x^2/5"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--poly", nargs="+", default=DEFAULT_POLYS)
    ap.add_argument("--max-exp", type=int, default=6)
    args = ap.parse_args()

    sizes = [10**k for k in range(2, args.max_exp + 1)]
    print("poly".ljust(16) + "".join(f"N=1e{k}".rjust(11) for k in range(2, args.max_exp + 1)))
    for text in args.poly:
        q = VectorPolynomial.parse(text)
        print(text.ljust(16) + "".join(f"{abs(weyl_sum(q, 1, N)):11.2e}" for N in sizes))


if __name__ == "__main__":
    main()
