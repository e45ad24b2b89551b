"""Multicorrelation sequences

    alpha(n) = int f_0 . T^[q_1(n)] f_1 ... T^[q_m(n)] f_m dmu

for lattice actions with bracketed real polynomial iterates, and the flow
analogue with real-time iterates S_i^{q_i(n)} and no brackets.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .observables import EXACT, QuadratureRule, TrigObservable, e_exact, product_obs
from .poly import BracketMap, Coefficient, VectorPolynomial, bracket_exact, eval_exact
from .systems import (FlowFamily, TorusAction, TorusFlow, lattice_actions_commute,
                      pack_actions, signed_action)

EXPONENT_LIMIT = 2**127


def default_rule(dim: int) -> QuadratureRule:
    return QuadratureRule(4096 if dim == 1 else 64 if dim <= 3 else 16)


@dataclass
class CorrelationSpec:
    system: object
    functions: Sequence
    polys: Sequence[VectorPolynomial]
    brackets: Sequence[BracketMap] | None = None
    integration: QuadratureRule | str | None = None
    _points: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.functions = list(self.functions)
        self.polys = list(self.polys)
        m = len(self.polys)
        if m < 1:
            raise ValueError("need at least one iterate (m >= 1)")
        if len(self.functions) != m + 1:
            raise ValueError(f"need {m + 1} functions f_0..f_m, got {len(self.functions)}")
        ell = self.system.rank
        for q in self.polys:
            if q.ell != ell:
                raise ValueError(f"polynomial targets R^{q.ell}, action has rank {ell}")
        for f in self.functions:
            if f.dim != self.system.dim:
                raise ValueError("observable lives on a different space")
        if self.is_flow:
            if self.brackets is not None:
                raise ValueError("flow correlations take no brackets")
            if len(self.system) != m:
                raise ValueError(f"need {m} flows, got {len(self.system)}")
        elif self.brackets is None:
            self.brackets = [BracketMap.uniform("floor", ell) for _ in range(m)]
        else:
            self.brackets = [b if isinstance(b, BracketMap) else
                             BracketMap.uniform(b, ell) if isinstance(b, str) else BracketMap(tuple(b))
                             for b in self.brackets]
            if len(self.brackets) != m or any(len(b.kinds) != ell for b in self.brackets):
                raise ValueError("one bracket kind per iterate and coordinate")
        if self.integration is None:
            self.integration = EXACT if self.exact_available else default_rule(self.system.dim)
        elif self.integration == EXACT and not self.exact_available:
            raise ValueError("exact path requires torus translations and trigonometric observables")

    @property
    def m(self) -> int:
        return len(self.polys)

    @property
    def is_flow(self) -> bool:
        return isinstance(self.system, FlowFamily)

    @property
    def exact_available(self) -> bool:
        if not all(isinstance(f, TrigObservable) for f in self.functions):
            return False
        if self.is_flow:
            return all(isinstance(s, TorusFlow) for s in self.system.flows)
        return isinstance(self.system, TorusAction)

    def points(self) -> np.ndarray:
        if self._points is None:
            self._points = self.integration.points(self.system.dim)
        return self._points


def exponents(spec: CorrelationSpec, n):
    """[q_i(n)] for each i, exactly; arrays of shape (len(n), ell) for array n."""
    out = [bracket_exact(q, n, b.kinds) for q, b in zip(spec.polys, spec.brackets)]
    for k in out:
        big = max(abs(int(v)) for v in np.ravel(np.asarray(k, dtype=object)))
        if big >= EXPONENT_LIMIT:
            raise OverflowError("lattice exponent exceeds 128-bit range")
    return out


def correlation_at(spec: CorrelationSpec, ks: Sequence[Sequence[int]]) -> complex:
    """int f_0 . prod_i f_i o T^{k_i} dmu for given integer exponent vectors."""
    T = spec.system
    if spec.integration == EXACT:
        prod = spec.functions[0]
        for f, k in zip(spec.functions[1:], ks):
            prod = product_obs(prod, f.translate(T.shift_exact(k)))
        return prod.mean()
    pts = spec.points()
    vals = spec.functions[0](pts)
    for f, k in zip(spec.functions[1:], ks):
        vals = vals * f(T.apply(np.asarray(k, dtype=np.int64), pts))
    return spec.integration.mean(vals)


def multicorrelation(spec: CorrelationSpec, n: int) -> complex:
    if spec.is_flow:
        raise ValueError("use multicorrelation_flow for flow specs")
    return correlation_at(spec, exponents(spec, int(n)))


def multicorrelation_flow(spec: CorrelationSpec, n: int) -> complex:
    if not spec.is_flow:
        raise ValueError("spec is not in flow form")
    times = [eval_exact(q, int(n)) for q in spec.polys]
    S = spec.system
    if spec.integration == EXACT:
        prod = spec.functions[0]
        for f, flow, t in zip(spec.functions[1:], S.flows, times):
            prod = product_obs(prod, f.translate(flow.shift_exact(t)))
        return prod.mean()
    pts = spec.points()
    vals = spec.functions[0](pts)
    for i, (f, t) in enumerate(zip(spec.functions[1:], times)):
        vals = vals * f(S.apply(i, t, pts))
    return spec.integration.mean(vals)


# ---------------------------------------------------------------------------
# vectorized character path


def _zero_sum_terms(spec: CorrelationSpec):
    """Term combinations (a_0 k_0, ..., a_m k_m) with k_0 + ... + k_m = 0."""
    lists = [list(f.terms.items()) for f in spec.functions]
    out = []
    for combo in itertools.product(*lists):
        total = np.sum([np.asarray(k) for k, _ in combo], axis=0)
        if not np.any(total):
            amp = np.prod([a for _, a in combo])
            out.append((amp, [k for k, _ in combo[1:]]))
    return out


def _exact_values(spec: CorrelationSpec, ks) -> np.ndarray:
    """Character path for many n at once.  The phase of each surviving term is
    sum_{i,j} k_{i,j} (freq_i . A_j), reduced mod 1 in integer arithmetic."""
    T = spec.system
    A = T._exact
    size = len(ks[0])
    out = np.zeros(size, dtype=complex)
    for amp, freqs in _zero_sum_terms(spec):
        betas = [[sum((Fraction(fr[d]) * A[j][d] for d in range(T.dim)), Fraction(0))
                  for j in range(T.rank)] for fr in freqs]
        den = math.lcm(1, *(b.denominator for row in betas for b in row))
        acc = np.zeros(size, dtype=object)
        for i, row in enumerate(betas):
            for j, b in enumerate(row):
                c = int(b * den)
                if c:
                    acc = acc + ks[i][:, j] * c
        rem = acc % den
        frac = ((rem << 53) // den).astype(np.float64) / 2.0**53
        out += amp * np.exp(2j * np.pi * frac)
    return out


class CorrelationSequence:
    """alpha as a lazily evaluated sequence with optional memoization."""

    def __init__(self, spec: CorrelationSpec, memo: bool = True):
        self.spec = spec
        self._memo: dict[int, complex] | None = {} if memo else None

    def __call__(self, n):
        if np.ndim(n) == 0:
            return self.at(int(n))
        return self.values(n)

    def at(self, n: int) -> complex:
        if self._memo is not None and n in self._memo:
            return self._memo[n]
        v = multicorrelation_flow(self.spec, n) if self.spec.is_flow else multicorrelation(self.spec, n)
        if self._memo is not None:
            self._memo[n] = v
        return v

    def values(self, ns) -> np.ndarray:
        ns = np.asarray(ns, dtype=np.int64)
        spec = self.spec
        if not spec.is_flow and spec.integration == EXACT and isinstance(spec.system, TorusAction):
            return _exact_values(spec, exponents(spec, ns))
        return np.array([self.at(int(n)) for n in ns], dtype=complex)


# ---------------------------------------------------------------------------
# commuting actions and bracket variants


def _embed(q: VectorPolynomial, block: int, ranks: Sequence[int]) -> VectorPolynomial:
    zero = (Coefficient.rational(0),) * (q.degree + 1)
    rows = []
    for b, r in enumerate(ranks):
        rows.extend(q.coeffs if b == block else [zero] * r)
    return VectorPolynomial(tuple(rows))


def commuting_spec(actions: Sequence, functions: Sequence, polys: Sequence[VectorPolynomial],
                   brackets: Sequence[BracketMap] | None = None, integration=None,
                   check: bool = True) -> CorrelationSpec:
    """Pack commuting actions T_1..T_m into one Z^{sum ell_i}-action; q_i is
    embedded in block i and the other blocks stay zero."""
    if len(actions) != len(polys):
        raise ValueError("one action per polynomial")
    if check and not lattice_actions_commute(actions):
        raise ValueError("actions do not commute")
    ranks = [a.rank for a in actions]
    packed = pack_actions(actions)
    embedded = [_embed(q, i, ranks) for i, q in enumerate(polys)]
    if brackets is not None:
        packed_brackets = []
        for i, b in enumerate(brackets):
            b = b if isinstance(b, BracketMap) else BracketMap.uniform(b, ranks[i])
            kinds = []
            for blk, r in enumerate(ranks):
                kinds.extend(b.kinds if blk == i else ("floor",) * r)
            packed_brackets.append(BracketMap(tuple(kinds)))
        brackets = packed_brackets
    return CorrelationSpec(packed, functions, embedded, brackets, integration)


def multicorrelation_commuting(actions, functions, polys, n: int, brackets=None,
                               integration=None, check: bool = True) -> complex:
    return multicorrelation(commuting_spec(actions, functions, polys, brackets, integration, check), n)


def floor_only_spec(spec: CorrelationSpec) -> CorrelationSpec:
    """Equivalent floor-bracket spec using ceil(x) = -floor(-x) and
    nearest(x) = floor(x + 1/2).  A ceil coordinate flips the sign of its
    polynomial and of the matching generator, so each iterate gets its own
    (commuting) copy of the action."""
    half = Coefficient.rational(1, 2)
    actions, polys = [], []
    for q, b in zip(spec.polys, spec.brackets):
        signs, rows = [], []
        for row, kind in zip(q.coeffs, b.kinds):
            if kind == "ceil":
                signs.append(-1)
                rows.append(tuple(-c for c in row))
            elif kind == "nearest":
                signs.append(1)
                rows.append((row[0] + half,) + row[1:])
            else:
                signs.append(1)
                rows.append(row)
        actions.append(signed_action(spec.system, signs))
        polys.append(VectorPolynomial(tuple(rows)))
    return commuting_spec(actions, spec.functions, polys, None, spec.integration, check=False)
