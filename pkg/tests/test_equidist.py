import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from nilcorr.averaging import Cesaro, Primes
from nilcorr.equidist import (EXACT_ZERO, NUMERIC, attained_fractions, density_limit_scan,
                              erdos_turan_bound, hit_density, hit_density_primes, prime_residues,
                              weyl_profile, weyl_sum)
from nilcorr.poly import VectorPolynomial

SQRT2N = VectorPolynomial.parse("sqrt(2)*x")


def trial_division_primes(N):
    return [p for p in range(2, N + 1) if all(p % d for d in range(2, math.isqrt(p) + 1))]


def sqrt2_hits(ns, num=9, den=10):
    """#{n : {sqrt(2) n} >= num/den} by integer arithmetic."""
    return sum(2 * den * den * n * n >= (den * math.isqrt(2 * n * n) + num) ** 2 for n in ns)


class TestWeyl:
    def test_matches_mpmath(self):
        mp.mp.dps = 40
        N = 1500
        want = sum(mp.expjpi(2 * mp.sqrt(2) * n * n) for n in range(1, N)) / (N - 1)
        got = weyl_sum(VectorPolynomial.parse("sqrt(2)*x^2"), 1, N)
        assert abs(got - complex(want)) < 1e-12

    def test_rational_does_not_decay(self):
        assert abs(weyl_sum(VectorPolynomial.parse("x/3"), 1, 3001)) < 1e-12
        assert abs(weyl_sum(VectorPolynomial.parse("x"), 1, 1001)) == pytest.approx(1.0)

    def test_thread_count_does_not_change_result(self):
        q = VectorPolynomial.parse("pi*x^2")
        assert weyl_sum(q, 1, 300001, threads=1) == weyl_sum(q, 1, 300001, threads=4)

    def test_profile_and_bound(self):
        prof = weyl_profile(SQRT2N, 8, 1, 20001)
        assert prof.shape == (8,) and np.all(prof < 0.01)
        assert 0 < erdos_turan_bound(prof) < 1

    def test_empty_range(self):
        with pytest.raises(ValueError):
            weyl_sum(SQRT2N, 5, 5)


class TestHitDensity:
    def test_frozen_count(self):
        # integer oracle: 999 of n in [1, 10^4) have {sqrt(2) n} >= 0.9
        r = hit_density(SQRT2N, 0.1, 1, 10**4)
        assert (r.hits, r.total, r.verdict) == (999, 9999, NUMERIC)

    @given(st.integers(1, 10**6), st.integers(1, 3000))
    def test_matches_integer_oracle(self, M, length):
        r = hit_density(SQRT2N, 0.1, M, M + length)
        assert r.hits == sqrt2_hits(range(M, M + length))

    def test_rational_exact_zero(self):
        q = VectorPolynomial.parse("x/3 + 1/7")
        r = hit_density(q, 0.05, 1, 10**5)
        assert r.verdict == EXACT_ZERO and r.hits == 0
        assert attained_fractions(q) == [Fraction(1, 7), Fraction(10, 21), Fraction(17, 21)]
        brute = {(Fraction(n, 3) + Fraction(1, 7)) % 1 for n in range(1, 10**4)}
        assert all(v < Fraction(19, 20) for v in brute)

    def test_rational_window_hit_is_counted(self):
        q = VectorPolynomial.parse("x/3 + 1/7")
        r = hit_density(q, 0.3, 1, 3001)
        assert r.verdict == NUMERIC and r.hits == 1000

    def test_irrational_constant_term_is_still_rational_branch(self):
        q = VectorPolynomial.parse("x/2 + sqrt(2)/10")
        assert hit_density(q, 0.3, 1, 1001).verdict == EXACT_ZERO

    def test_delta_checked(self):
        with pytest.raises(ValueError, match=r"delta outside \(0,1\)"):
            hit_density(SQRT2N, 1.5, 1, 10)


class TestPrimes:
    def test_prime_residues(self):
        assert prime_residues(6) == [1, 2, 3, 5]
        assert prime_residues(1) == [0]
        assert prime_residues(4) == [1, 2, 3]

    def test_matches_trial_division(self):
        N = 20000
        ps = trial_division_primes(N)
        r = hit_density_primes(SQRT2N, 0.1, N)
        assert (r.hits, r.total) == (sqrt2_hits(ps), len(ps))

    def test_progression(self):
        N = 5000
        ps = trial_division_primes(N)
        r = hit_density_primes(SQRT2N, 0.2, N, r=3, s=2)
        assert r.hits == sqrt2_hits([3 * p + 2 for p in ps], 8, 10)

    def test_rational_exact_zero_along_primes(self):
        # n/4 on primes: only p = 2 is even, so {p/4} in {1/4, 1/2, 3/4}
        q = VectorPolynomial.parse("x/4")
        assert hit_density_primes(q, 0.2, 10**4).verdict == EXACT_ZERO
        r = hit_density_primes(q, 0.3, 10**4)
        assert r.verdict == NUMERIC and r.hits > 0


class TestScan:
    def test_descending_grid_required(self):
        with pytest.raises(ValueError, match="descending"):
            density_limit_scan(SQRT2N, [0.1, 0.2], Cesaro(1, 100))

    def test_density_tracks_delta(self):
        reps = density_limit_scan(SQRT2N, [0.4, 0.2, 0.1], Cesaro(1, 200001))
        for r in reps:
            assert abs(r.density - r.delta) < 0.01

    def test_primes_scheme(self):
        reps = density_limit_scan(SQRT2N, [0.3], Primes(10**5))
        assert reps[0].scheme == "primes[N=100000,r=1,s=0]"
