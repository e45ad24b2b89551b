"""Nilsequences psi(n) = F(g^n x) on tori and the Heisenberg nilmanifold, the
rotation example alpha(n) = e({sqrt(2) n}/sqrt(2)), and continuous
(mollified) approximants of functions with finitely many jumps on the circle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .correlate import CorrelationSpec
from .observables import SampledObservable, TrigObservable, e
from .poly import Coefficient, VectorPolynomial, as_coefficient, floor_frac, fractional
from .systems import TorusAction, circle_distance, heis_mul, heis_pow, nil_reduce

TORUS = "torus"
HEISENBERG = "heisenberg"

SQRT2 = Coefficient.irrational("sqrt(2)")
INV_SQRT2 = Coefficient.irrational("sqrt(2)", Fraction(1, 2))


@dataclass
class Nilsequence:
    """psi(n) = F(g^n x).  On the torus g is a translation vector (given as
    coefficients, kept exact); on the Heisenberg nilmanifold g is a group
    element in Mal'cev coordinates.  ``step`` is declared metadata."""

    space: str
    g: Sequence
    x: Sequence[float]
    F: object
    step: int = 1
    _orbit_poly: VectorPolynomial | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.space == TORUS:
            g = [as_coefficient(c) for c in self.g]
            self.g = tuple(g)
            self._orbit_poly = VectorPolynomial(tuple((Coefficient.rational(0), c) for c in g))
        elif self.space == HEISENBERG:
            self.g = np.asarray(self.g, dtype=float)
        else:
            raise ValueError(f"unknown space {self.space!r}")
        self.x = np.asarray(self.x, dtype=float)
        if self.F.dim != len(self.x):
            raise ValueError("F lives on a different space")
        if self.step < 1:
            raise ValueError("step must be positive")

    def points(self, ns) -> np.ndarray:
        ns = np.asarray(ns, dtype=np.int64)
        if self.space == TORUS:
            fr = floor_frac(self._orbit_poly, np.atleast_1d(ns))[1]
            pts = fractional(self.x + fr)
            return pts.reshape(ns.shape + (len(self.x),))
        return nil_reduce(heis_mul(heis_pow(self.g, ns), self.x))

    def __call__(self, ns):
        return self.F(self.points(ns))

    @property
    def sup_bound(self) -> float:
        return self.F.sup_bound


def nilsequence_eval(psi: Nilsequence, n: int) -> complex:
    return complex(psi(np.array([n]))[0])


# ---------------------------------------------------------------------------
# the rotation example


def example_alpha(ns):
    """e({sqrt(2) n} / sqrt(2)), with {sqrt(2) n} reduced in exact arithmetic."""
    scalar = np.ndim(ns) == 0
    ns = np.atleast_1d(np.asarray(ns, dtype=np.int64))
    fr = floor_frac(VectorPolynomial(((0, SQRT2),)), ns)[1][:, 0]
    out = e(fr / math.sqrt(2))
    return complex(out[0]) if scalar else out


def example_F() -> SampledObservable:
    """F(x) = e({x}/sqrt(2)) on the circle; one jump, at 0."""
    return SampledObservable(lambda x: e(fractional(x[..., 0]) / math.sqrt(2)), 1, 1.0, (0.0,))


def example_spec() -> CorrelationSpec:
    """X = T, T x = x + 1/sqrt(2), q(n) = sqrt(2) n, f_0 = e(x), f_1 = e(-x)."""
    return CorrelationSpec(
        TorusAction([[INV_SQRT2]]),
        [TrigObservable.character([1]), TrigObservable.character([-1])],
        [VectorPolynomial(((0, SQRT2),))],
    )


# ---------------------------------------------------------------------------
# mollification


def _min_gap(points: Sequence[float]) -> float:
    pts = sorted(p % 1.0 for p in points)
    if len(pts) < 2:
        return 1.0
    gaps = [b - a for a, b in zip(pts, pts[1:])] + [pts[0] + 1 - pts[-1]]
    return min(gaps)


class MollifiedObservable(SampledObservable):
    """F with each declared jump d replaced, on (d - w, d + w), by the linear
    interpolation between F(d - w) and F(d + w)."""

    def __init__(self, F: SampledObservable, w: float):
        if F.dim != 1:
            raise ValueError("mollification is implemented on the circle only")
        if F.discontinuities is None:
            raise ValueError("discontinuity set must be declared")
        if not 0 < w < 0.5 or (F.discontinuities and not w < _min_gap(F.discontinuities) / 2):
            raise ValueError("width too large for the gap structure")
        self.base = F
        self.width = w
        jumps = [d % 1.0 for d in F.discontinuities]
        ends = [(F(np.array([[(d - w) % 1.0]]))[0], F(np.array([[(d + w) % 1.0]]))[0]) for d in jumps]

        def evaluate(x):
            x = np.asarray(x, dtype=float)
            out = np.asarray(F(x), dtype=complex).copy()
            t = x[..., 0]
            for d, (left, right) in zip(jumps, ends):
                near = circle_distance(t, d) < w
                if np.any(near):
                    u = ((t[near] - (d - w)) % 1.0) / (2 * w)
                    out[near] = (1 - u) * left + u * right
            return out

        super().__init__(evaluate, 1, F.sup_bound, ())


def mollify(F: SampledObservable, w: float) -> MollifiedObservable:
    return MollifiedObservable(F, w)


def example_nil_approx(epsilon: float) -> Nilsequence:
    """psi_w(n) = F_w({sqrt(2) n}) with w = epsilon/4.

    alpha and psi_w differ only when {sqrt(2) n} lies within w of 0, a set of
    density 2w along integers and along primes, and there by at most 2.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon outside (0,1)")
    return Nilsequence(TORUS, [SQRT2], [0.0], mollify(example_F(), epsilon / 4), step=1)
