"""Desk-scale construction and verification of tri-colored sum-free sets in C_q^n."""

from .apfree import (APFreeSet, WindowOverflow, behrend_integers, build_apfree,
                     embed_mod_p, greedy_apfree_integers, verify_apfree)
from .construction import (AuditFailed, AuditReport, EvenModulus, InstanceParams,
                           InstanceTooLarge, LinearFunctional, PipelineResult,
                           RunReport, TripleSet, build_v_prime, choose_prime,
                           count_v, count_v_lower_bound, count_w,
                           expectation_audit, pair_evaluation_rank,
                           prune_to_v_double_prime, run_pipeline,
                           sample_functional, to_ap_form, verify_ap_form,
                           verify_sum_free)
from .core import (CountVector, Distribution, ThetaSolution, entropy,
                   log_multinomial_bounds, multinomial, pushforward, size_bounds,
                   solve_theta)
from .triples import (InfeasibleRounding, IterationLimitExceeded,
                      LatticeSymmetricDistribution, Orbit, SymmetricDistribution,
                      TripleSpace, build_triple_space, marginal_counts,
                      round_to_lattice, solve_pi)

__version__ = "0.1.0"

__all__ = [
    "APFreeSet", "AuditFailed", "AuditReport", "CountVector", "Distribution",
    "EvenModulus", "InfeasibleRounding", "InstanceParams", "InstanceTooLarge",
    "IterationLimitExceeded", "LatticeSymmetricDistribution", "LinearFunctional",
    "Orbit", "PipelineResult", "RunReport", "SymmetricDistribution",
    "ThetaSolution", "TripleSet", "TripleSpace", "WindowOverflow",
    "behrend_integers", "build_apfree", "build_triple_space", "build_v_prime",
    "choose_prime", "count_v", "count_v_lower_bound", "count_w", "embed_mod_p",
    "entropy", "expectation_audit", "greedy_apfree_integers",
    "log_multinomial_bounds", "marginal_counts", "multinomial",
    "pair_evaluation_rank", "prune_to_v_double_prime", "pushforward",
    "round_to_lattice", "run_pipeline", "sample_functional", "size_bounds",
    "solve_pi", "solve_theta", "to_ap_form", "verify_ap_form", "verify_apfree",
    "verify_sum_free",
]
