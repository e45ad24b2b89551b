"""Observables: trigonometric polynomials with exact integrals, and sampled
functions integrated on a midpoint tensor grid."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np


def e(u):
    """e(u) = exp(2 pi i u)."""
    return np.exp(2j * np.pi * np.asarray(u, dtype=float))


def e_exact(u: Fraction) -> complex:
    """e(u) for a rational u, reducing mod 1 before going to floating point."""
    r = u - math.floor(u)
    return cmath.exp(2j * math.pi * float(r))


class TrigObservable:
    """f(x) = sum_k a_k e(k . x) on T^D, frequencies integer vectors."""

    def __init__(self, terms: dict | Sequence, dim: int | None = None):
        items = terms.items() if isinstance(terms, dict) else terms
        merged: dict[tuple[int, ...], complex] = {}
        for freq, amp in items:
            key = tuple(int(k) for k in np.atleast_1d(freq))
            merged[key] = merged.get(key, 0) + complex(amp)
        if dim is None:
            if not merged:
                raise ValueError("dimension needed for an empty observable")
            dim = len(next(iter(merged)))
        if any(len(k) != dim for k in merged):
            raise ValueError("frequency dimension mismatch")
        self.terms = {k: a for k, a in merged.items() if a != 0}
        self.dim = dim

    @classmethod
    def character(cls, freq: Sequence[int], amp: complex = 1.0) -> "TrigObservable":
        return cls([(tuple(freq), amp)])

    @classmethod
    def constant(cls, c: complex, dim: int = 1) -> "TrigObservable":
        return cls([((0,) * dim, c)], dim=dim)

    def __repr__(self):
        return f"TrigObservable({self.terms!r})"

    @property
    def sup_bound(self) -> float:
        return float(sum(abs(a) for a in self.terms.values()))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise ValueError("space mismatch")
        out = np.zeros(x.shape[:-1], dtype=complex)
        for k, a in self.terms.items():
            out = out + a * e(x @ np.asarray(k, dtype=float))
        return out

    def translate(self, shift: Sequence[Fraction]) -> "TrigObservable":
        """x -> f(x + shift), each amplitude picking up e(k . shift) exactly."""
        if len(shift) != self.dim:
            raise ValueError("space mismatch")
        shift = [Fraction(s) for s in shift]
        return TrigObservable(
            [(k, a * e_exact(sum((ki * s for ki, s in zip(k, shift)), Fraction(0))))
             for k, a in self.terms.items()], dim=self.dim)

    def scaled(self, c: complex) -> "TrigObservable":
        return TrigObservable([(k, c * a) for k, a in self.terms.items()], dim=self.dim)

    def mean(self) -> complex:
        return complex(self.terms.get((0,) * self.dim, 0))


class SampledObservable:
    """Any pure vectorized function on a point space with a declared sup bound."""

    def __init__(self, evaluator: Callable, dim: int, sup_bound: float = 1.0,
                 discontinuities: Sequence[float] | None = None):
        self.evaluator = evaluator
        self.dim = dim
        self.sup_bound = float(sup_bound)
        self.discontinuities = None if discontinuities is None else tuple(discontinuities)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise ValueError("space mismatch")
        return np.asarray(self.evaluator(x), dtype=complex)

    def scaled(self, c: complex) -> "SampledObservable":
        f = self.evaluator
        return SampledObservable(lambda x: c * f(x), self.dim, abs(c) * self.sup_bound,
                                 self.discontinuities)


def eval_obs(f, x):
    return f(x)


def product_obs(f, g):
    if f.dim != g.dim:
        raise ValueError("space mismatch")
    if isinstance(f, TrigObservable) and isinstance(g, TrigObservable):
        out: dict[tuple[int, ...], complex] = {}
        for k1, a1 in f.terms.items():
            for k2, a2 in g.terms.items():
                k = tuple(u + v for u, v in zip(k1, k2))
                out[k] = out.get(k, 0) + a1 * a2
        return TrigObservable(list(out.items()), dim=f.dim)
    return SampledObservable(lambda x: f(x) * g(x), f.dim, f.sup_bound * g.sup_bound)


def normalize(f):
    """Rescale so the sup bound is at most 1; returns (observable, factor)."""
    b = f.sup_bound
    if b <= 1.0:
        return f, 1.0
    return f.scaled(1.0 / b), b


@dataclass(frozen=True)
class QuadratureRule:
    """Midpoint tensor grid with Q points per dimension on [0,1)^D."""

    Q: int = 4096

    def __post_init__(self):
        if self.Q < 1:
            raise ValueError("Q must be positive")

    def points(self, dim: int) -> np.ndarray:
        g = (np.arange(self.Q) + 0.5) / self.Q
        mesh = np.meshgrid(*([g] * dim), indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)

    def mean(self, values) -> complex:
        values = np.asarray(values)
        # numpy's add.reduce is pairwise for contiguous input: fixed order
        return complex(np.sum(values) / values.size)


EXACT = "exact"


def integrate(f, rule: QuadratureRule | str = EXACT) -> complex:
    """Integral against Lebesgue (= Haar) measure on the fundamental domain."""
    if rule == EXACT:
        if not isinstance(f, TrigObservable):
            raise ValueError("exact integration requires a trigonometric observable")
        return f.mean()
    return rule.mean(f(rule.points(f.dim)))
