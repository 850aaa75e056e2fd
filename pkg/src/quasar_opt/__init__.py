"""Randomized momentum optimization for quasar-convex problems.

Subpackage map:
    event_clock   seeded randomness and the Poisson event times
    links         scalar link functions
    objectives    GLM risks, pseudo-gradients, synthetic problems
    certify       sampling-based condition certification and conversions
    continuized   event-driven momentum methods + validation oracle
    hss           line-search AGD baselines
    glmtron       stochastic recovery of a GLM target
    bench         grid-search benchmark protocol
    cli           the quasar-opt command
"""

from .event_clock import JumpSchedule, SeededRng, build_schedule, sample_increment
from .links import (
    LinkFunction,
    identity_link,
    leaky_relu_link,
    logistic_link,
    make_link,
    quadratic_link,
    relu_link,
)
from .objectives import (
    EvalCounter,
    GlmProblem,
    Objective,
    empirical_objective,
    generate_problem,
    initial_point,
    load_problem,
    pseudo_gradient,
    quadratic_objective,
    save_problem,
)
from .traces import DivergenceError, RecoveryTrace, RunTrace

__version__ = "0.1.0"
