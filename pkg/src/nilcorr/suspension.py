"""Suspension of a lattice action with constant ceiling 1, the lifted
observables and alpha-tilde, and the reduction of polynomial flow iterates to
a Z^{d+1}-action along q(n) = (1, n, ..., n^d).
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

import numpy as np

from .correlate import CorrelationSpec, _exact_values, correlation_at
from .observables import EXACT, SampledObservable
from .poly import Coefficient, VectorPolynomial, floor_frac, fractional, in_upper_window
from .systems import FlowFamily, TorusAction, TorusFlow, lattice_actions_commute


class SuspensionSpace:
    """Y = X x ([0,1)^ell)^m with the product of mu and Lebesgue measure.

    Points are arrays ``(..., X.dim + m*ell)``: base coordinates first, then
    the fibers b_1, ..., b_m.
    """

    def __init__(self, base, m: int):
        if m < 1:
            raise ValueError("m must be positive")
        self.base = base
        self.m = m
        self.ell = base.rank
        self.dim = base.dim + m * self.ell

    def fiber(self, i: int) -> slice:
        off = self.base.dim + i * self.ell
        return slice(off, off + self.ell)

    def apply(self, i: int, t, y) -> np.ndarray:
        """S_i^t (x; b) = (T^{floor(b_i + t)} x; ..., {b_i + t}, ...)."""
        if not 0 <= i < self.m:
            raise IndexError(f"flow index {i} out of range")
        if len(t) != self.ell:
            raise ValueError(f"dimension mismatch: expected {self.ell} times")
        y = np.array(y, dtype=float)
        sl = self.fiber(i)
        b = y[..., sl]
        if all(isinstance(s, (float, np.floating, int, np.integer)) for s in t):
            s = b + np.asarray(t, dtype=float)
            k = np.floor(s)
            new_b = fractional(s)
            k = k.astype(np.int64)
        else:
            tf = [s.exact if isinstance(s, Coefficient) else Fraction(s) for s in t]
            flat = b.reshape(-1, self.ell)
            k = np.empty(flat.shape, dtype=np.int64)
            new_b = np.empty(flat.shape)
            for r in range(flat.shape[0]):
                for j in range(self.ell):
                    s = Fraction(float(flat[r, j])) + tf[j]
                    fl = s.numerator // s.denominator
                    k[r, j] = fl
                    new_b[r, j] = float(s - fl)
            k = k.reshape(b.shape)
            new_b = fractional(new_b.reshape(b.shape))
        y[..., : self.base.dim] = self.base.apply(k, y[..., : self.base.dim])
        y[..., sl] = new_b
        return y

    def flow(self, i: int) -> "SuspensionFlow":
        return SuspensionFlow(self, i)

    def flows(self) -> FlowFamily:
        return FlowFamily([self.flow(i) for i in range(self.m)])

    def sample_points(self, rng, k):
        return rng.random((k, self.dim))


class SuspensionFlow:
    def __init__(self, space: SuspensionSpace, i: int):
        self.space = space
        self.i = i
        self.rank = space.ell
        self.dim = space.dim

    def apply(self, t, y):
        return self.space.apply(self.i, t, y)

    def sample_points(self, rng, k):
        return self.space.sample_points(rng, k)


def build_suspension(X, m: int) -> tuple[SuspensionSpace, FlowFamily]:
    space = SuspensionSpace(X, m)
    flows = space.flows()
    if not flows.commute(samples=100, tol=1e-9):
        raise ValueError("suspension flows do not commute")
    return space, flows


class LiftedObservables:
    """f0_hat = 1_{X x [0,delta]^{m ell}} . f0 o pi and f_i_hat = f_i o pi."""

    def __init__(self, space: SuspensionSpace, functions: Sequence, delta: float):
        if not 0 < delta < 1:
            raise ValueError("delta outside (0,1)")
        self.space = space
        self.delta = delta
        bd = space.base.dim
        f0 = functions[0]

        def f0_hat(y):
            y = np.asarray(y)
            inside = np.all(y[..., bd:] <= delta, axis=-1)
            return np.where(inside, f0(y[..., :bd]), 0)

        def lift(f):
            return lambda y: f(np.asarray(y)[..., :bd])

        self.functions = [SampledObservable(f0_hat, space.dim, f0.sup_bound)]
        self.functions += [SampledObservable(lift(f), space.dim, f.sup_bound) for f in functions[1:]]

    def __getitem__(self, i):
        return self.functions[i]


def lift_observables(space: SuspensionSpace, functions: Sequence, delta: float) -> LiftedObservables:
    return LiftedObservables(space, functions, delta)


def _require_floor(spec: CorrelationSpec):
    if spec.is_flow:
        raise ValueError("alpha_tilde needs a lattice correlation spec")
    if any(k != "floor" for b in spec.brackets for k in b.kinds):
        raise ValueError("the suspension construction uses floor brackets")


def _cell_lengths(fracs: np.ndarray, delta: float):
    """Lengths of {b in [0, delta]: floor(q + b) = floor(q)} and its complement.

    The jump sits at b = 1 - {q}; a jump exactly at delta goes to the left cell.
    """
    low = np.minimum(delta, 1.0 - fracs)
    return low, delta - low


def alpha_tilde(spec: CorrelationSpec, delta: float, n: int) -> complex:
    """int_{[0,delta]^{ell m}} int_X f_0 prod f_i(T^{floor(q_i(n) + b_i)} x) dmu db,
    by exact splitting of each fiber interval at its break point."""
    return complex(alpha_tilde_values(spec, delta, np.array([n]))[0])


def alpha_tilde_values(spec: CorrelationSpec, delta: float, ns) -> np.ndarray:
    _require_floor(spec)
    if not 0 < delta < 1:
        raise ValueError("delta outside (0,1)")
    ns = np.asarray(ns, dtype=np.int64)
    floors, lens = [], []
    for q in spec.polys:
        fl, fr = floor_frac(q, ns)
        floors.append(fl)
        lens.append(_cell_lengths(fr, delta))
    ell, m = spec.system.rank, spec.m
    out = np.zeros(len(ns), dtype=complex)
    vectorized = spec.integration == EXACT and isinstance(spec.system, TorusAction)
    for eps in itertools.product((0, 1), repeat=ell * m):
        eps = np.asarray(eps).reshape(m, ell)
        w = np.ones(len(ns))
        for i in range(m):
            for j in range(ell):
                w = w * lens[i][eps[i, j]][:, j]
        live = w > 0
        if not live.any():
            continue
        ks = [floors[i][live] + eps[i] for i in range(m)]
        if vectorized:
            vals = _exact_values(spec, ks)
        else:
            vals = np.array([correlation_at(spec, [k[r] for k in ks]) for r in range(int(live.sum()))])
        out[live] += w[live] * vals
    return out


def box_volume(delta: float, ell: int, m: int) -> float:
    v = 1.0
    for _ in range(ell * m):
        v = v * delta
    return v


def exceptional(polys: Sequence[VectorPolynomial], delta: float, n, rule: str = "paper"):
    """Whether n lies in the exceptional set for the given delta.

    ``rule="paper"``: some i has {q_i(n)} in [1-delta, 1)^ell (all coordinates).
    ``rule="coordinate"``: some coordinate of some q_i lies in [1-delta, 1);
    outside this set alpha(n) = delta^{-ell m} alpha_tilde(n) is guaranteed.
    The two agree for ell = 1.
    """
    if not 0 < delta < 1:
        raise ValueError("delta outside (0,1)")
    hits = [in_upper_window(q, n, delta) for q in polys]
    if rule == "paper":
        per_i = [h.all(axis=-1) for h in hits]
    elif rule == "coordinate":
        per_i = [h.any(axis=-1) for h in hits]
    else:
        raise ValueError(f"unknown rule {rule!r}")
    out = np.logical_or.reduce(per_i)
    return bool(out) if np.ndim(n) == 0 else out


# ---------------------------------------------------------------------------
# flow -> lattice reduction


class LatticeReduction:
    """T^{(n_0, ..., n_d)} = prod_h prod_j S^{n_h a_{j,h} e_j}, so that
    T^{(1, n, ..., n^d)} = S^{q(n)}."""

    def __init__(self, flow, q: VectorPolynomial):
        if q.ell != flow.rank:
            raise ValueError(f"polynomial targets R^{q.ell}, flow has rank {flow.rank}")
        self.flow = flow
        self.q = q
        self.rank = q.degree + 1
        self.dim = flow.dim
        # generators[h][j] = a_{j,h}
        self.generators = [[q.coeffs[j][h] for j in range(q.ell)] for h in range(self.rank)]

    def q_vec(self, n: int) -> tuple[int, ...]:
        n = int(n)
        return tuple(n**h for h in range(self.rank))

    def apply(self, nvec, x) -> np.ndarray:
        nvec = [int(v) for v in np.asarray(nvec).reshape(-1)]
        if len(nvec) != self.rank:
            raise ValueError(f"dimension mismatch: expected {self.rank} exponents")
        ell = self.flow.rank
        for h, nh in enumerate(nvec):
            if nh == 0:
                continue
            for j, a in enumerate(self.generators[h]):
                if a.exact == 0:
                    continue
                t = [Fraction(0)] * ell
                t[j] = a.exact * nh
                x = self.flow.apply(t, x)
        return np.asarray(x, dtype=float)

    def as_lattice_action(self):
        """For torus flows, the Z^{d+1}-action as a torus action (angle row h is
        sum_j a_{j,h} A_j), which keeps the exact shift arithmetic."""
        if not isinstance(self.flow, TorusFlow):
            return self
        A = self.flow.angles
        rows = []
        for h in range(self.rank):
            rows.append([sum((self.generators[h][j] * A[j][d] for j in range(self.flow.rank)),
                             Coefficient.rational(0)) for d in range(self.flow.dim)])
        return TorusAction(rows)

    def sample_points(self, rng, k):
        return self.flow.sample_points(rng, k)


def flow_to_lattice(S, q, check: bool = True):
    """Reduce S^{q(n)} to a lattice action along (1, n, ..., n^d).

    With a FlowFamily and a list of polynomials, returns one reduction per
    flow and spot-checks that the resulting Z^{d+1}-actions commute.
    """
    if isinstance(S, FlowFamily):
        if check and not S.commute(samples=100, tol=1e-9):
            raise ValueError("flow generators do not commute")
        reds = [LatticeReduction(f, qi) for f, qi in zip(S.flows, q)]
        if check and not lattice_actions_commute(reds, samples=50, tol=1e-9):
            raise ValueError("flow generators do not commute")
        return reds
    return LatticeReduction(S, q)
