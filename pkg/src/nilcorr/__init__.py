"""Multicorrelation sequences along bracket polynomials, their suspension-flow
lifts, equidistribution diagnostics, and nilsequence approximants."""
from .averaging import (Cesaro, PrimeSieve, Primes, approximation_error, cesaro_average,
                        error_sweep, prime_average, scheme_average, sieve_primes, window_sweep)
from .config import ConfigError, ExperimentConfig, parse_config, render
from .correlate import (CorrelationSequence, CorrelationSpec, commuting_spec, floor_only_spec,
                        multicorrelation, multicorrelation_commuting, multicorrelation_flow)
from .equidist import (DensityReport, density_limit_scan, erdos_turan_bound, hit_density,
                       hit_density_primes, weyl_profile, weyl_sum)
from .nilseq import (Nilsequence, example_alpha, example_nil_approx, example_spec, mollify,
                     nilsequence_eval)
from .observables import QuadratureRule, SampledObservable, TrigObservable, integrate
from .poly import (BracketMap, Coefficient, VectorPolynomial, bracket, classify_rational,
                   eval_exact, eval_poly, floor_frac, fractional)
from .suspension import (alpha_tilde, box_volume, build_suspension, exceptional,
                         flow_to_lattice, lift_observables)
from .systems import (FlowFamily, HeisenbergAction, TorusAction, TorusFlow, heis_inv, heis_mul,
                      heis_pow, nil_reduce, pack_actions)

__version__ = "0.1.0"
