"""Binary-search double greedy for non-monotone DR-submodular maximization
over a bounded integer lattice, with the bipartite profit objective."""

from .lattice import (
    BoundsError,
    ConfigError,
    CountingOracle,
    DimensionError,
    FunctionObjective,
    Objective,
    RngStream,
    add_units,
    join,
    marginal,
    meet,
)
from .profit import (
    BipartiteInstance,
    GeneratorParams,
    InstanceError,
    ProfitOracle,
    Source,
    SpreadEstimate,
    activation_probability,
    generate_instance,
    influence_spread,
    marketing_cost,
    monte_carlo_spread,
    parse_instance,
    parse_strategy,
    profit,
    profit_marginal,
    serialize_instance,
    serialize_strategy,
)
from .solvers import (
    DRViolationError,
    ResourceGuardError,
    SolveResult,
    bsdg_solve,
    exhaustive_opt,
    find_cap_u,
    find_cap_v,
    unit_double_greedy,
)
from .verification import (
    HarnessParams,
    check_dr,
    check_lattice_submodular,
    check_nonmonotone,
    query_audit,
    query_scaling,
    ratio_harness,
)

__version__ = "0.1.0"
