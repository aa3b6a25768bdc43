"""Exact numerics and seeded simulation for preferential-attachment degree laws.

The toolkit computes the limiting indegree distribution of a general
preferential-attachment model exactly, evolves the exact finite-n law of a
uniformly chosen vertex's indegree, certifies total-variation convergence
rates, verifies the balance-equation machinery behind them, and checks the
Poisson approximation of the newest vertex's outdegree -- all against
independent oracles (exhaustive enumeration, closed forms, seeded Monte
Carlo).
"""

from .attachment import (
    Affine,
    AffineTail,
    AttachmentRule,
    Constant,
    RepeatLast,
    RuleClassification,
    SublinearPower,
    TableRule,
    ValidationReport,
    classify,
    rule_from_json,
    rule_to_json,
    validate,
)
from .chain import (
    ChainLaw,
    LogOverN,
    PowerLaw,
    RateTable,
    TvEstimate,
    certify_rate,
    chain_law,
    d0_coupling_gap,
    evolve,
    mean_f_path,
    tv_to_limit,
)
from .defect import (
    DefectTable,
    PropertyReport,
    build_table,
    definition_table,
    turning_points,
    verify_properties,
)
from .graphsim import (
    FixedOutdegree,
    GraphState,
    Histogram,
    RandomOutdegree,
    Spatial,
    empirical_uniform_indegree,
    enumerate_exact,
    simulate,
)
from .limitlaw import (
    HittingTimes,
    LimitLaw,
    MeanEstimate,
    compute_mu,
    hitting_times,
    mean_f_of_w,
    tail_asymptote_report,
)
from .outdegree import (
    OutdegreeLaw,
    OutdegreeRateTable,
    build_outdegree,
    lambda_recursion_check,
    poisson_tv,
    rate_report,
    vertex_degree_law,
)
from .stein import IndexSet, SteinSolution, random_index_sets, triple_sum_check

__version__ = "0.1.0"
