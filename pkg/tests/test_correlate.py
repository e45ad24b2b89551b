import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import nested_correlation, random_case
from nilcorr.correlate import (CorrelationSequence, CorrelationSpec, commuting_spec, exponents,
                               floor_only_spec, multicorrelation, multicorrelation_commuting,
                               multicorrelation_flow)
from nilcorr.nilseq import example_alpha, example_spec
from nilcorr.observables import EXACT, QuadratureRule, SampledObservable, TrigObservable
from nilcorr.poly import VectorPolynomial
from nilcorr.systems import FlowFamily, HeisenbergAction, TorusAction, TorusFlow

# e({sqrt(2) n}/sqrt(2)) in 50-digit arithmetic
EXAMPLE_VALUES = {
    1: (-0.26625534204141548861, 0.96390253284987733029),
    2: (-0.85821618566881769166, -0.51328839715706163521),
    3: (0.47307004268786912209, 0.88102482071238928664),
    10: (0.80714764214948583304, 0.5903496284173689227),
    100: (-0.29670470225154359567, 0.95496927681565906005),
    12345: (-0.48072947918122495711, 0.87686895705467199561),
}


def build(actions, polys, functions, brackets=None, integration=None):
    """Single-action spec from a random case (uses the first action table)."""
    T = TorusAction(actions[0])
    fs = [TrigObservable(f, dim=T.dim) for f in functions]
    qs = [VectorPolynomial.parse(p) for p in polys]
    return CorrelationSpec(T, fs, qs, brackets, integration)


class TestExample:
    @pytest.mark.parametrize("n", sorted(EXAMPLE_VALUES))
    def test_frozen_values(self, n):
        re_, im_ = EXAMPLE_VALUES[n]
        assert multicorrelation(example_spec(), n) == pytest.approx(complex(re_, im_), abs=1e-13)

    def test_closed_form_vectorized(self):
        ns = np.arange(1, 5001)
        got = CorrelationSequence(example_spec()).values(ns)
        assert np.max(np.abs(got - example_alpha(ns))) < 1e-12

    def test_quadrature_path_agrees(self):
        spec = example_spec()
        quad = CorrelationSpec(spec.system, spec.functions, spec.polys, integration=QuadratureRule(64))
        for n in (1, 7, 99):
            assert multicorrelation(quad, n) == pytest.approx(multicorrelation(spec, n), abs=1e-12)

    def test_integration_defaults_to_exact(self):
        assert example_spec().integration == EXACT


class TestAgainstNestedOracle:
    @pytest.mark.parametrize("seed", range(6))
    def test_random_specs(self, seed):
        rng = np.random.default_rng(seed)
        dim = 1 + seed % 2
        actions, polys, functions = random_case(rng, dim=dim, ell=1, m=2)
        actions = [actions[0]] * 2
        spec = build(actions, polys, functions)
        seq = CorrelationSequence(spec)
        ns = np.arange(0, 40)
        vals = seq.values(ns)
        for n, v in zip(ns, vals):
            want = nested_correlation(actions, functions, polys, int(n), Q=16)
            assert abs(v - want) < 1e-12

    def test_rank_two(self):
        rng = np.random.default_rng(99)
        actions, polys, functions = random_case(rng, dim=2, ell=2, m=1)
        spec = build(actions, polys, functions)
        for n in range(25):
            want = nested_correlation(actions, functions, polys, n, Q=16)
            assert abs(multicorrelation(spec, n) - want) < 1e-12

    def test_sampled_observables_use_quadrature(self):
        T = TorusAction([["sqrt(2)"]])
        f = SampledObservable(lambda x: np.cos(2 * np.pi * x[..., 0]), 1)
        spec = CorrelationSpec(T, [f, f], [VectorPolynomial.parse("x")])
        assert spec.integration != EXACT
        # int cos(2 pi x) cos(2 pi (x + a)) dx = cos(2 pi a) / 2
        a = (3 * math.sqrt(2)) % 1
        assert multicorrelation(spec, 3).real == pytest.approx(math.cos(2 * math.pi * a) / 2, abs=1e-9)


class TestCommuting:
    @pytest.mark.parametrize("seed", range(5))
    def test_packed_equals_nested(self, seed):
        rng = np.random.default_rng(100 + seed)
        actions, polys, functions = random_case(rng, dim=2, ell=1, m=2)
        Ts = [TorusAction(a) for a in actions]
        fs = [TrigObservable(f, dim=2) for f in functions]
        qs = [VectorPolynomial.parse(p) for p in polys]
        spec = commuting_spec(Ts, fs, qs)
        vals = CorrelationSequence(spec).values(np.arange(30))
        for n, v in enumerate(vals):
            assert abs(v - nested_correlation(actions, functions, polys, n, Q=16)) < 1e-12
        assert multicorrelation_commuting(Ts, fs, qs, 5) == pytest.approx(vals[5], abs=1e-15)

    def test_non_commuting_rejected(self):
        H1 = HeisenbergAction([0.5, 0.0, 0.0])
        H2 = HeisenbergAction([0.0, 0.5, 0.0])
        f = SampledObservable(lambda x: np.ones(x.shape[:-1]), 3)
        q = VectorPolynomial.parse("x")
        with pytest.raises(ValueError, match="do not commute"):
            commuting_spec([H1, H2], [f, f, f], [q, q])


class TestBracketVariants:
    @pytest.mark.parametrize("kind", ["ceil", "nearest"])
    def test_direct_matches_oracle(self, kind):
        rng = np.random.default_rng(7)
        actions, polys, functions = random_case(rng, dim=1, ell=1, m=2)
        actions = [actions[0]] * 2
        spec = build(actions, polys, functions, brackets=[kind, "floor"])
        for n in range(30):
            want = nested_correlation(actions, functions, polys, n, brackets=[[kind], ["floor"]], Q=16)
            assert abs(multicorrelation(spec, n) - want) < 1e-12

    @given(st.integers(0, 10**4), st.sampled_from(["floor", "ceil", "nearest"]),
           st.sampled_from(["floor", "ceil", "nearest"]))
    def test_floor_only_equivalent(self, n, k1, k2):
        T = TorusAction([["sqrt(2)/2", "1/3"], ["pi/4", "sqrt(3)"]])
        fs = [TrigObservable({(1, 0): 1, (0, 1): 0.5j}), TrigObservable({(-1, 1): 1}),
              TrigObservable({(0, -1): 2, (1, 1): 1})]
        qs = [VectorPolynomial.parse(["sqrt(2)*x^2 + 1/2", "x/3"]),
              VectorPolynomial.parse(["pi*x", "sqrt(3)/2*x^2 - 1/4"])]
        spec = CorrelationSpec(T, fs, qs, [[k1, k2], [k2, k1]])
        assert multicorrelation(floor_only_spec(spec), n) == multicorrelation(spec, n)


class TestFlowForm:
    def test_flow_matches_real_time_shift(self):
        S = FlowFamily([TorusFlow([["sqrt(2)"]]), TorusFlow([["1/3"]])])
        fs = [TrigObservable.character([1]), TrigObservable.character([-1]),
              TrigObservable.character([1])]
        qs = [VectorPolynomial.parse("x^2/2"), VectorPolynomial.parse("x/5")]
        spec = CorrelationSpec(S, fs, qs)
        for n in range(1, 10):
            # int e(x) e(-(x + t1 a1)) e(x + t2 a2) dx vanishes unless frequencies cancel
            assert multicorrelation_flow(spec, n) == pytest.approx(0.0, abs=1e-15)
        fs[2] = TrigObservable.constant(1)
        spec = CorrelationSpec(S, fs, qs)
        n = 3
        want = np.exp(-2j * np.pi * (n * n / 2) * math.sqrt(2))
        assert multicorrelation_flow(spec, n) == pytest.approx(want, abs=1e-12)

    def test_lattice_and_flow_entry_points_guarded(self):
        with pytest.raises(ValueError):
            multicorrelation_flow(example_spec(), 1)


class TestValidation:
    def test_function_count(self):
        T = TorusAction([["sqrt(2)"]])
        with pytest.raises(ValueError, match="functions"):
            CorrelationSpec(T, [TrigObservable.character([1])], [VectorPolynomial.parse("x")])

    def test_rank_mismatch(self):
        T = TorusAction([["sqrt(2)"]])
        f = TrigObservable.character([1])
        with pytest.raises(ValueError, match="rank"):
            CorrelationSpec(T, [f, f], [VectorPolynomial.parse(["x", "x"])])

    def test_exact_requires_trig(self):
        T = TorusAction([["sqrt(2)"]])
        g = SampledObservable(lambda x: x[..., 0], 1)
        with pytest.raises(ValueError, match="exact"):
            CorrelationSpec(T, [g, g], [VectorPolynomial.parse("x")], integration=EXACT)

    def test_exponent_overflow(self):
        T = TorusAction([["sqrt(2)"]])
        f = TrigObservable.character([1])
        spec = CorrelationSpec(T, [f, f], [VectorPolynomial.parse("x^3")])
        with pytest.raises(OverflowError):
            exponents(spec, 10**43)

    def test_memoized_sequence(self):
        seq = CorrelationSequence(example_spec())
        assert seq(17) == seq.at(17) == seq(17)
