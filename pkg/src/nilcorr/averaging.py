"""Cesaro and prime averages, the prime sieve, and the |alpha - psi| error
functionals.

Sequences are vectorized callables: ``seq(ns)`` takes an int64 array and
returns a complex (or real) array of the same length.  All sums are taken in
fixed-size blocks whose partial sums are combined pairwise, so results do not
depend on how many worker threads evaluate the blocks.
"""
from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

BLOCK = 1 << 16
PI_CHECKPOINT = 1 << 16
SIEVE_MAGIC = b"NCSV1"
DEFAULT_SIEVE_LIMIT = 1 << 33


def thread_count() -> int:
    env = os.environ.get("NILCORR_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def tree_sum(parts: Sequence) -> complex:
    """Pairwise reduction in a fixed order."""
    parts = list(parts)
    if not parts:
        return 0j
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def blocked_sum(fn: Callable[[np.ndarray], np.ndarray], indices: np.ndarray,
                threads: int | None = None) -> complex:
    """sum(fn(indices)) evaluated in fixed blocks and reduced pairwise."""
    indices = np.asarray(indices, dtype=np.int64)
    chunks = [indices[i:i + BLOCK] for i in range(0, len(indices), BLOCK)]

    def part(ch):
        return complex(np.sum(np.asarray(fn(ch), dtype=complex)))

    threads = thread_count() if threads is None else threads
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(part, chunks))
    else:
        parts = [part(ch) for ch in chunks]
    return tree_sum(parts)


# ---------------------------------------------------------------------------
# sieve


class PrimeSieve:
    """Primality bitset for [0, N] with pi(x) checkpoints every 2**16."""

    def __init__(self, N: int, flags: np.ndarray):
        self.N = N
        self.flags = flags
        counts = np.cumsum(flags, dtype=np.int64)
        self._checkpoints = counts[PI_CHECKPOINT - 1::PI_CHECKPOINT].copy()

    def __contains__(self, n: int) -> bool:
        return 0 <= n <= self.N and bool(self.flags[n])

    def primes(self, upto: int | None = None) -> np.ndarray:
        upto = self.N if upto is None else upto
        if upto > self.N:
            raise ValueError(f"sieve covers only up to {self.N}")
        return np.flatnonzero(self.flags[: upto + 1]).astype(np.int64)

    def pi(self, x: int) -> int:
        if x > self.N:
            raise ValueError(f"sieve covers only up to {self.N}")
        if x < 2:
            return 0
        c = (x + 1) // PI_CHECKPOINT
        base = int(self._checkpoints[c - 1]) if c else 0
        return base + int(np.count_nonzero(self.flags[c * PI_CHECKPOINT: x + 1]))

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as fh:
            fh.write(SIEVE_MAGIC)
            fh.write(struct.pack("<Q", self.N))
            fh.write(np.packbits(self.flags, bitorder="little").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "PrimeSieve":
        with open(path, "rb") as fh:
            if fh.read(len(SIEVE_MAGIC)) != SIEVE_MAGIC:
                raise ValueError(f"{path}: not a sieve cache (bad magic)")
            (N,) = struct.unpack("<Q", fh.read(8))
            raw = np.frombuffer(fh.read(), dtype=np.uint8)
        flags = np.unpackbits(raw, bitorder="little")[: N + 1].astype(bool)
        if len(flags) != N + 1:
            raise ValueError(f"{path}: truncated sieve cache")
        return cls(N, flags)


def _sieve_flags(N: int) -> np.ndarray:
    flags = np.ones(N + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(N) + 1, 2):
        if flags[p]:
            flags[p * p::2 * p] = False
    return flags


def sieve_primes(N: int, cache: str | Path | None = None) -> PrimeSieve:
    """Sieve of Eratosthenes on [0, N].

    ``cache`` (or ``$NILCORR_SIEVE_CACHE`` when ``cache`` is None) names a
    cache file that is reused when it covers N and rewritten otherwise.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    limit = int(os.environ.get("NILCORR_SIEVE_MAX", DEFAULT_SIEVE_LIMIT))
    if N > limit:
        raise MemoryError(f"N={N} exceeds the sieve memory budget ({limit})")
    if cache is None:
        cache = os.environ.get("NILCORR_SIEVE_CACHE")
    if cache and Path(cache).exists():
        s = PrimeSieve.load(cache)
        if s.N >= N:
            return s if s.N == N else PrimeSieve(N, s.flags[: N + 1].copy())
    s = PrimeSieve(N, _sieve_flags(N))
    if cache:
        s.save(cache)
    return s


_SIEVES: dict[int, PrimeSieve] = {}


def get_sieve(N: int) -> PrimeSieve:
    """Process-wide sieve covering N (grows by re-sieving)."""
    for n, s in _SIEVES.items():
        if n >= N:
            return s
    s = sieve_primes(N)
    _SIEVES.clear()
    _SIEVES[N] = s
    return s


# ---------------------------------------------------------------------------
# schemes


@dataclass(frozen=True)
class Cesaro:
    M: int
    N: int

    def __post_init__(self):
        if not self.M < self.N:
            raise ValueError("empty window: need M < N")

    def indices(self) -> np.ndarray:
        return np.arange(self.M, self.N, dtype=np.int64)

    def label(self) -> str:
        return f"cesaro[{self.M}:{self.N})"


@dataclass(frozen=True)
class Primes:
    N: int
    r: int = 1
    s: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.r < 1:
            raise ValueError("r must be at least 1")

    def primes(self, sieve: PrimeSieve | None = None) -> np.ndarray:
        return (sieve or get_sieve(self.N)).primes(self.N)

    def indices(self, sieve: PrimeSieve | None = None) -> np.ndarray:
        return self.r * self.primes(sieve) + self.s

    def label(self) -> str:
        return f"primes[N={self.N},r={self.r},s={self.s}]"


def cesaro_average(seq, M: int, N: int, threads: int | None = None) -> complex:
    """(1/(N-M)) sum_{n=M}^{N-1} seq(n)."""
    w = Cesaro(M, N)
    return blocked_sum(seq, w.indices(), threads) / (N - M)


def prime_average(seq, N: int, r: int = 1, s: int = 0, sieve: PrimeSieve | None = None,
                  threads: int | None = None) -> complex:
    """(1/pi(N)) sum_{p <= N prime} seq(r p + s)."""
    idx = Primes(N, r, s).indices(sieve)
    return blocked_sum(seq, idx, threads) / len(idx)


def scheme_average(seq, scheme: Cesaro | Primes, threads: int | None = None) -> complex:
    if isinstance(scheme, Cesaro):
        return cesaro_average(seq, scheme.M, scheme.N, threads)
    return prime_average(seq, scheme.N, scheme.r, scheme.s, threads=threads)


def approximation_error(alpha, psi, scheme: Cesaro | Primes, threads: int | None = None) -> float:
    """The scheme's average of |alpha - psi|."""
    def gap(ns):
        return np.abs(np.asarray(alpha(ns)) - np.asarray(psi(ns)))
    return float(scheme_average(gap, scheme, threads).real)


def window_sweep(seq, length: int, starts: Sequence[int], threads: int | None = None) -> list[tuple[int, complex]]:
    """Averages of seq over [M, M + length) for each M: a finite-scale view of
    the uniform (N - M -> infinity) limit."""
    return [(int(M), cesaro_average(seq, int(M), int(M) + length, threads)) for M in starts]


def error_sweep(alpha, psi, length: int, starts: Sequence[int], threads: int | None = None) -> list[tuple[int, float]]:
    def gap(ns):
        return np.abs(np.asarray(alpha(ns)) - np.asarray(psi(ns)))
    return [(M, v.real) for M, v in window_sweep(gap, length, starts, threads)]
