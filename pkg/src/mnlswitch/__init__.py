"""Online MNL assortment planning under inventory and switching limits."""
from .environment import SimState, init_state, offer
from .estimation import (ConfidenceParams, SalesHistory, compute_omega, compute_psi,
                         confidence_radius, exposure_counts, fit_mle, neg_log_likelihood,
                         nll_gradient, nll_hessian)
from .harness import (GAMMAS, ExperimentConfig, MetricsRow, emit_results, generate_instance,
                      run_experiment)
from .lp import (AssortmentDistribution, build_compact_lp, enumerate_ucb_lp, fluid_benchmark,
                 recover_distribution, reduce_support, solve_lp_basic)
from .mnl import (ProblemInstance, choice_probabilities, expected_consumption,
                  expected_revenue, make_assortment, sample_purchase)
from .policy import PolicyConfig, make_schedule, run_ucb_policy, warm_start

__version__ = "0.1.0"
