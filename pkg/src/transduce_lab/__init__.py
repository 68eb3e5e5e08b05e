"""transduce-lab: dense simulation of transducers, purifiers, and error reduction."""

from .linalg import (
    Operator,
    PermutationOperator,
    Register,
    Space,
    StateVector,
    SumSpace,
    controlled,
    decrement_mod,
    direct_sum,
    increment_mod,
    reflection_about,
    tensor,
)
from .oracles import (
    OracleSpec,
    bidirectional,
    boolean_spec,
    general_reflecting_oracle,
    reflecting_from_generator,
    simple_oracle,
    state_generating_oracle,
)
from .query import QueryAlgorithm, QueryTrace, linearity_check, run, run_perturbed, trace
from .transducer import (
    Transducer,
    TransductionResult,
    algorithm_as_transducer,
    canonical_check,
    canonical_from_constraints,
    complexities,
    functional_accounting,
    implement_action,
    parallel_compose,
    span_restriction,
    transduce,
)
from .purifier import (
    PurifierConfig,
    analytic_catalyst,
    build_general,
    build_simple,
    exact_query_complexity,
    general_catalyst,
    prop_trunc1_check,
    state_generating_accounting,
    verify_transduction,
)
from .majority import build as build_majority
from .majority import hoeffding_bound, imprecision_exact, simulate_imprecision
from .qsp import (
    PhaseSequence,
    PolynomialPair,
    RealPolynomial,
    complete,
    phase_factors,
    qsp_assemble,
    qsp_error_reduction,
    sign_polynomial,
    signal_unitary,
)
from .adversary import (
    AdversaryCandidate,
    StateConversionProblem,
    check_feasible,
    transducer_to_candidate,
    two_oracle_bound,
    two_oracle_problem,
)
from .nonboolean import (
    MultiBitOracleSpec,
    bv_error_reduction,
    inner_product_transform,
    lifted_oracle,
    nb_accounting,
)

__version__ = "0.1.0"
