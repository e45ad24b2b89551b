"""Concrete measure-preserving actions: torus rotations/flows and the
Heisenberg nilmanifold.

Points are float arrays of shape ``(..., dim)``.  Torus translation vectors
are held as exact rationals (see ``poly.Coefficient``) so that long integer
iterates are reduced mod 1 without cancellation.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .poly import Coefficient, as_coefficient, fractional


def _frac_exact(x: Fraction) -> Fraction:
    return x - math.floor(x)


def _as_fraction(t) -> Fraction:
    if isinstance(t, Coefficient):
        return t.exact
    if isinstance(t, (float, np.floating)):
        return Fraction(float(t))
    return Fraction(t)


class TorusAction:
    """Z^ell-action on T^D by translations: T^n x = {x + n A}.

    ``angles`` is an ell x D table; row k is the translation of generator k.
    """

    def __init__(self, angles: Sequence[Sequence]):
        rows = [[as_coefficient(a) for a in row] for row in angles]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("angles must be a nonempty rectangular table")
        self.angles = tuple(tuple(r) for r in rows)
        self.rank = len(rows)
        self.dim = len(rows[0])
        self._exact = [[a.exact for a in r] for r in rows]
        self._float = np.array([[a.value for a in r] for r in rows])

    def __repr__(self):
        return f"TorusAction(rank={self.rank}, dim={self.dim})"

    def shift_exact(self, n: Sequence[int]) -> tuple[Fraction, ...]:
        """n A reduced mod 1, exactly."""
        if len(n) != self.rank:
            raise ValueError(f"dimension mismatch: expected {self.rank} exponents, got {len(n)}")
        n = [int(k) for k in n]
        return tuple(
            _frac_exact(sum((n[k] * self._exact[k][d] for k in range(self.rank)), Fraction(0)))
            for d in range(self.dim)
        )

    def shift(self, n: Sequence[int]) -> np.ndarray:
        return np.array([float(s) for s in self.shift_exact(n)])

    def apply(self, n, x) -> np.ndarray:
        """T^n x.  ``n`` is one exponent vector or an integer array ``(..., rank)``
        aligned with the points."""
        x = np.asarray(x, dtype=float)
        n = np.asarray(n)
        if n.shape[-1:] != (self.rank,):
            raise ValueError(f"dimension mismatch: expected {self.rank} exponents")
        if x.shape[-1:] != (self.dim,):
            raise ValueError(f"dimension mismatch: expected points of dimension {self.dim}")
        if n.ndim == 1:
            return fractional(x + self.shift(n))
        flat = n.reshape(-1, self.rank)
        uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
        shifts = np.array([self.shift(u) for u in uniq])
        return fractional(x + shifts[inverse.reshape(-1)].reshape(n.shape[:-1] + (self.dim,)))

    def with_signs(self, signs: Sequence[int]) -> "TorusAction":
        """Same action with generator k replaced by its inverse where signs[k] = -1."""
        return TorusAction([[a * s for a in row] for row, s in zip(self.angles, signs)])

    def sample_points(self, rng: np.random.Generator, k: int) -> np.ndarray:
        return rng.random((k, self.dim))


class TorusFlow:
    """R^ell-action on T^D: S^t x = {x + t A}."""

    def __init__(self, angles: Sequence[Sequence]):
        self._lattice = TorusAction(angles)
        self.angles = self._lattice.angles
        self.rank = self._lattice.rank
        self.dim = self._lattice.dim

    def __repr__(self):
        return f"TorusFlow(rank={self.rank}, dim={self.dim})"

    def shift_exact(self, t: Sequence) -> tuple[Fraction, ...]:
        if len(t) != self.rank:
            raise ValueError(f"dimension mismatch: expected {self.rank} times, got {len(t)}")
        t = [_as_fraction(s) for s in t]
        ex = self._lattice._exact
        return tuple(
            _frac_exact(sum((t[k] * ex[k][d] for k in range(self.rank)), Fraction(0)))
            for d in range(self.dim)
        )

    def apply(self, t, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise ValueError(f"dimension mismatch: expected points of dimension {self.dim}")
        if len(t) != self.rank:
            raise ValueError(f"dimension mismatch: expected {self.rank} times, got {len(t)}")
        if all(isinstance(s, (float, np.floating)) for s in t):
            return fractional(x + np.asarray(t, dtype=float) @ self._lattice._float)
        return fractional(x + np.array([float(s) for s in self.shift_exact(t)]))

    def time_map(self, t: Sequence) -> TorusAction:
        """The single transformation S^t as a rank-1 lattice action."""
        t = [as_coefficient(s) for s in t]
        row = [sum((t[k] * self.angles[k][d] for k in range(self.rank)), Coefficient.rational(0))
               for d in range(self.dim)]
        return TorusAction([row])

    def sample_points(self, rng, k):
        return rng.random((k, self.dim))


# ---------------------------------------------------------------------------
# Heisenberg group in Mal'cev coordinates:
# (x1,y1,z1)(x2,y2,z2) = (x1+x2, y1+y2, z1+z2+x1*y2)


def heis_mul(g1, g2) -> np.ndarray:
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    out = g1 + g2
    out[..., 2] += g1[..., 0] * g2[..., 1]
    return out


def heis_inv(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    return np.stack([-g[..., 0], -g[..., 1], g[..., 0] * g[..., 1] - g[..., 2]], axis=-1)


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    return p, math.fma(a, b, -p) if hasattr(math, "fma") else _dekker_err(a, b, p)


def _dekker_err(a: float, b: float, p: float) -> float:
    split = 134217729.0
    t = split * a
    ah = t - (t - a)
    al = a - ah
    t = split * b
    bh = t - (t - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def heis_pow(g, n) -> np.ndarray:
    """g**n = (n x, n y, n z + C(n,2) x y) for any integer n (scalar or array).

    For |n| > 10**6 the z coordinate is accumulated from error-free products
    so its error stays within a few ulps of |z|; below that the plain closed
    form is used (error grows like n**2 * eps * |x y|).
    """
    g = np.asarray(g, dtype=float)
    n_arr = np.asarray(n)
    if n_arr.ndim == 0 and abs(int(n_arr)) > 10**6 and g.ndim == 1:
        n = int(n_arr)
        x, y, z = (float(v) for v in g)
        c = n * (n - 1) // 2
        p1, e1 = _two_prod(float(n), z)
        xy, exy = _two_prod(x, y)
        p2, e2 = _two_prod(float(c), xy)
        zz = math.fsum([p1, e1, p2, e2, float(c) * exy])
        return np.array([n * x, n * y, zz])
    nf = n_arr.astype(float)
    out = np.empty(np.broadcast_shapes(nf.shape, g.shape[:-1]) + (3,))
    out[..., 0] = nf * g[..., 0]
    out[..., 1] = nf * g[..., 1]
    out[..., 2] = nf * g[..., 2] + (nf * (nf - 1) / 2) * g[..., 0] * g[..., 1]
    return out


def nil_reduce(g) -> np.ndarray:
    """Representative of g*Gamma in [0,1)^3, Gamma the integer points.

    Right multiplication by (a, b, c) in Gamma sends (x, y, z) to
    (x+a, y+b, z+c+x*b); take a = -floor(x), b = -floor(y) and c to land z.
    """
    g = np.asarray(g, dtype=float)
    x, y, z = g[..., 0], g[..., 1], g[..., 2]
    ry = fractional(y)
    # the integer actually removed from y (fractional may wrap 1 - tiny to 0)
    fy = np.round(y - ry)
    return np.stack([fractional(x), ry, fractional(z - x * fy)], axis=-1)


class HeisenbergAction:
    """Z-action on the Heisenberg nilmanifold by left translation: x -> g x."""

    rank = 1
    dim = 3

    def __init__(self, g: Sequence[float]):
        self.g = np.asarray(g, dtype=float)
        if self.g.shape != (3,):
            raise ValueError("Heisenberg element needs three coordinates")

    def __repr__(self):
        return f"HeisenbergAction(g={tuple(self.g)})"

    def apply(self, n, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = np.asarray(n)
        if n.shape[-1:] != (1,):
            raise ValueError("dimension mismatch: expected 1 exponent")
        if x.shape[-1:] != (3,):
            raise ValueError("dimension mismatch: expected points of dimension 3")
        return nil_reduce(heis_mul(heis_pow(self.g, n[..., 0]), x))

    def sample_points(self, rng, k):
        return rng.random((k, 3))


class ProductAction:
    """Commuting actions T_1, ..., T_m packed into one action of rank sum(ell_i):
    T^(n_1, ..., n_m) = T_1^{n_1} ... T_m^{n_m}."""

    def __init__(self, actions: Sequence):
        self.actions = list(actions)
        dims = {a.dim for a in self.actions}
        if len(dims) != 1:
            raise ValueError("actions live on different spaces")
        self.dim = dims.pop()
        self.ranks = [a.rank for a in self.actions]
        self.rank = sum(self.ranks)

    def apply(self, n, x) -> np.ndarray:
        n = np.asarray(n)
        if n.shape[-1:] != (self.rank,):
            raise ValueError(f"dimension mismatch: expected {self.rank} exponents")
        off = 0
        for a, r in zip(self.actions, self.ranks):
            x = a.apply(n[..., off:off + r], x)
            off += r
        return x

    def sample_points(self, rng, k):
        return self.actions[0].sample_points(rng, k)


class SignedAction:
    """Action with some generators inverted: n -> T^(signs * n)."""

    def __init__(self, action, signs: Sequence[int]):
        self.action = action
        self.signs = np.asarray(signs, dtype=np.int64)
        self.rank = action.rank
        self.dim = action.dim

    def apply(self, n, x):
        return self.action.apply(np.asarray(n) * self.signs, x)

    def sample_points(self, rng, k):
        return self.action.sample_points(rng, k)


def signed_action(action, signs: Sequence[int]):
    if all(s == 1 for s in signs):
        return action
    if isinstance(action, TorusAction):
        return action.with_signs(signs)
    return SignedAction(action, signs)


def pack_actions(actions: Sequence):
    """Single Z^(sum ell_i)-action from commuting actions; torus actions stay
    torus actions (stacked angle rows) so the exact character path applies."""
    if all(isinstance(a, TorusAction) for a in actions):
        dims = {a.dim for a in actions}
        if len(dims) != 1:
            raise ValueError("actions live on different spaces")
        return TorusAction([row for a in actions for row in a.angles])
    return ProductAction(actions)


def apply_lattice(T, n, x) -> np.ndarray:
    return T.apply(n, x)


def circle_distance(a, b) -> np.ndarray:
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % 1.0
    return np.minimum(d, 1.0 - d)


def _unit(k: int, rank: int) -> np.ndarray:
    e = np.zeros(rank, dtype=np.int64)
    e[k] = 1
    return e


def lattice_actions_commute(actions: Sequence, samples: int = 100, tol: float = 1e-9,
                            seed: int = 0) -> bool:
    """Pointwise spot check T_i^{e_a} T_j^{e_b} x == T_j^{e_b} T_i^{e_a} x."""
    rng = np.random.default_rng(seed)
    if len(actions) < 2:
        return True
    for _ in range(samples):
        i, j = rng.choice(len(actions), size=2, replace=False)
        Ti, Tj = actions[i], actions[j]
        a, b = rng.integers(Ti.rank), rng.integers(Tj.rank)
        x = Ti.sample_points(rng, 1)[0]
        lhs = Ti.apply(_unit(a, Ti.rank), Tj.apply(_unit(b, Tj.rank), x))
        rhs = Tj.apply(_unit(b, Tj.rank), Ti.apply(_unit(a, Ti.rank), x))
        if np.max(circle_distance(lhs, rhs)) > tol:
            return False
    return True


class FlowFamily:
    """Commuting R^ell-actions S_1, ..., S_m on one space."""

    def __init__(self, flows: Sequence):
        self.flows = list(flows)
        if not self.flows:
            raise ValueError("empty flow family")
        dims = {f.dim for f in self.flows}
        if len(dims) != 1:
            raise ValueError("flows live on different spaces")
        self.dim = dims.pop()
        self.rank = self.flows[0].rank
        if any(f.rank != self.rank for f in self.flows):
            raise ValueError("flows must share the rank ell")

    def __len__(self):
        return len(self.flows)

    def apply(self, i: int, t, x) -> np.ndarray:
        if not 0 <= i < len(self.flows):
            raise IndexError(f"flow index {i} out of range")
        return self.flows[i].apply(t, x)

    def sample_points(self, rng, k):
        return self.flows[0].sample_points(rng, k)

    def commute(self, samples: int = 100, tol: float = 1e-12, seed: int = 0) -> bool:
        rng = np.random.default_rng(seed)
        m = len(self.flows)
        for _ in range(samples):
            i, j = rng.integers(m), rng.integers(m)
            t = rng.uniform(-3, 3, self.rank)
            u = rng.uniform(-3, 3, self.rank)
            x = self.sample_points(rng, 1)[0]
            lhs = self.apply(i, t, self.apply(j, u, x))
            rhs = self.apply(j, u, self.apply(i, t, x))
            if np.max(circle_distance(lhs, rhs)) > tol:
                return False
        return True


def apply_flow(S, i: int, t, x) -> np.ndarray:
    """S_i^t x for a FlowFamily (or S^t x for a single flow with i == 0)."""
    if isinstance(S, FlowFamily):
        return S.apply(i, t, x)
    if i != 0:
        raise IndexError(f"flow index {i} out of range")
    return S.apply(t, x)
