"""Hit densities of {q(n)} in [1 - delta, 1) along integer windows and along
r p + s, Weyl sums, and the exact verdict for polynomials that are rational
up to their constant term."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .averaging import Cesaro, Primes, blocked_sum, get_sieve
from .poly import VectorPolynomial, classify_rational, floor_frac, in_upper_window

EXACT_ZERO = "exact-zero"
NUMERIC = "numeric"


@dataclass(frozen=True)
class DensityReport:
    delta: float
    scheme: str
    hits: int
    total: int
    verdict: str

    @property
    def density(self) -> float:
        return self.hits / self.total


def _scalar(q: VectorPolynomial) -> VectorPolynomial:
    if q.ell != 1:
        raise ValueError("scalar polynomial expected (ell = 1)")
    return q


def _check_delta(delta: float):
    if not 0 < delta < 1:
        raise ValueError("delta outside (0,1)")


def _fracs(q: VectorPolynomial, ns: np.ndarray) -> np.ndarray:
    return floor_frac(q, ns)[1][:, 0]


def weyl_sum(q: VectorPolynomial, M: int, N: int, threads: int | None = None) -> complex:
    """(1/(N-M)) sum_{n=M}^{N-1} e(q(n)), phases reduced mod 1 exactly."""
    q = _scalar(q)
    if not M < N:
        raise ValueError("empty range")
    total = blocked_sum(lambda ns: np.exp(2j * np.pi * _fracs(q, ns)),
                        np.arange(M, N, dtype=np.int64), threads)
    return total / (N - M)


def weyl_profile(q: VectorPolynomial, K: int, M: int, N: int) -> np.ndarray:
    """|(1/(N-M)) sum e(k q(n))| for k = 1..K."""
    fr = _fracs(_scalar(q), np.arange(M, N, dtype=np.int64))
    return np.array([abs(np.mean(np.exp(2j * np.pi * ((k * fr) % 1.0)))) for k in range(1, K + 1)])


def erdos_turan_bound(profile: np.ndarray) -> float:
    """Discrepancy bound 6/(K+1) + (4/pi) sum_k (1/k - 1/(K+1)) |W_k|."""
    K = len(profile)
    k = np.arange(1, K + 1)
    return 6 / (K + 1) + 4 / math.pi * float(np.sum((1 / k - 1 / (K + 1)) * profile))


def attained_fractions(q: VectorPolynomial, residues: Sequence[int] | None = None) -> list[Fraction] | None:
    """Finite value set of {q(n)} when q - q(0) has rational coefficients.

    ``residues`` restricts n to the given classes mod b (default: all).
    Returns None when the classification is not rational.
    """
    q = _scalar(q)
    cls = classify_rational(q)
    if cls.kind != "rational":
        return None
    b = cls.denominator
    row = q.coeffs[0]
    c0 = row[0].exact
    ints = [int(c.exact * b) for c in row[1:]]
    classes = range(b) if residues is None else sorted({r % b for r in residues})
    out = set()
    for n in classes:
        k = sum(a * n ** (h + 1) for h, a in enumerate(ints)) % b
        v = c0 + Fraction(k, b)
        out.add(v - math.floor(v))
    return sorted(out)


def _avoids_window(values: Sequence[Fraction], delta: float) -> bool:
    lo = 1 - Fraction(delta)
    return all(v < lo for v in values)


def _count_hits(q: VectorPolynomial, ns: np.ndarray, delta: float) -> int:
    total = 0
    for i in range(0, len(ns), 1 << 16):
        total += int(np.count_nonzero(in_upper_window(q, ns[i:i + (1 << 16)], delta)))
    return total


def hit_density(q: VectorPolynomial, delta: float, M: int, N: int) -> DensityReport:
    """Fraction of n in [M, N) with {q(n)} in [1 - delta, 1)."""
    q = _scalar(q)
    _check_delta(delta)
    label = Cesaro(M, N).label()
    values = attained_fractions(q)
    if values is not None and _avoids_window(values, delta):
        return DensityReport(delta, label, 0, N - M, EXACT_ZERO)
    hits = _count_hits(q, np.arange(M, N, dtype=np.int64), delta)
    return DensityReport(delta, label, hits, N - M, NUMERIC)


def prime_residues(b: int) -> list[int]:
    """Classes mod b that contain primes: the units plus primes dividing b."""
    units = [u for u in range(b) if math.gcd(u, b) == 1]
    divisors = [p for p in range(2, b + 1) if b % p == 0 and all(p % d for d in range(2, math.isqrt(p) + 1))]
    return sorted(set(units) | {p % b for p in divisors})


def hit_density_primes(q: VectorPolynomial, delta: float, N: int, r: int = 1, s: int = 0) -> DensityReport:
    """Fraction of primes p <= N with {q(r p + s)} in [1 - delta, 1)."""
    q = _scalar(q)
    _check_delta(delta)
    scheme = Primes(N, r, s)
    primes = scheme.primes()
    total = len(primes)
    cls = classify_rational(q)
    if cls.kind == "rational":
        b = cls.denominator
        values = attained_fractions(q, [r * p + s for p in prime_residues(b)])
        if _avoids_window(values, delta):
            return DensityReport(delta, scheme.label(), 0, total, EXACT_ZERO)
    hits = _count_hits(q, r * primes + s, delta)
    return DensityReport(delta, scheme.label(), hits, total, NUMERIC)


def density_limit_scan(q: VectorPolynomial, deltas: Sequence[float], scheme: Cesaro | Primes) -> list[DensityReport]:
    """One report per delta (descending grid) at the scheme's range."""
    deltas = list(deltas)
    if any(a <= b for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta grid must be strictly descending")
    if isinstance(scheme, Cesaro):
        return [hit_density(q, d, scheme.M, scheme.N) for d in deltas]
    return [hit_density_primes(q, d, scheme.N, scheme.r, scheme.s) for d in deltas]
