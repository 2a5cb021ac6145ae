"""Dependency-pair termination workbench with derivational-complexity
instrumentation: DP processors, ranked proof trees, the norm measure, and
the LPO-certified simulating TRS construction."""

from .analysis import (
    Fuel,
    IndeterminateError,
    NontermEvidenceError,
    ackermann_k,
    dc,
    dheight,
    dheight_relative,
    is_nf_relative,
    longest_derivation,
    reachable_set,
)
from .corpus import builtin
from .dpframe import (
    DependencyPair,
    DepGraph,
    DpProblem,
    LinearInterpretation,
    NoProofFoundError,
    ProofTree,
    RpFunction,
    SearchConfig,
    SimpleProjection,
    apply_dependency_graph,
    apply_reduction_pair,
    apply_subterm_criterion,
    compute_dps,
    estimate_dependency_graph,
    initial_problem,
    orient_check,
    rank_of_term,
    search_proof,
    validate_rp_function,
    validate_tree,
)
from .kernel import ANYWHERE, BACKEND, BELOW_ROOT, ROOT_ONLY
from .kernel import match as match_term
from .kernel import successors as rewrite_successors
from .lpo import Precedence, check_compatible, lpo_greater, rsim_precedence
from .norms import (
    BOT,
    Nat,
    NormContext,
    Trm,
    compare_norm,
    compare_norm_lex,
    current_path,
    norm_component,
    norm_vector,
    verify_lemmas,
    verify_strict_decrease,
    verify_weak_decrease,
)
from .parser import ParseError, parse_term, parse_trs, render_trs
from .simulate import (
    ReplayError,
    SimConstants,
    SimDerivation,
    SimSystem,
    TranslationContext,
    approx_equiv,
    generate_rsim,
    sim_constants,
    simulate_derivation,
    simulate_size,
    simulate_start,
    simulate_step,
)
from .terms import (
    App,
    Position,
    Rule,
    Symbol,
    Term,
    Trs,
    Var,
    make_trs,
    mark_root,
    proper_subterm,
    render_term,
    unify_terms,
)

__version__ = "0.1.0"
