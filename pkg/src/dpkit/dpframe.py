"""Dependency pairs, DP problems, the three processors, proof search, and
proof trees with ranked dependency graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from . import kernel
from .analysis import (
    Fuel,
    IndeterminateError,
    _condense,
    dheight_relative,
    enumerate_ground_terms,
    ground_enumeration_symbols,
    reachable_set,
)
from .terms import (
    DEFINED,
    MARKED,
    App,
    Position,
    Rule,
    Symbol,
    Term,
    Trs,
    Var,
    mark_root,
    proper_subterm,
    render_term,
    rename_variables,
    subterms,
    unify_terms,
)


@dataclass(frozen=True)
class DependencyPair:
    """Marked rule l# -> u#; index is the stable 1-based numbering."""

    index: int
    rule_index: int  # 1-based origin rule
    lhs: Term
    rhs: Term

    @property
    def rule(self) -> Rule:
        return Rule(self.lhs, self.rhs)

    def __str__(self):
        return f"{self.index}: {render_term(self.lhs)} -> {render_term(self.rhs)}"


def compute_dps(R: Trs) -> list[DependencyPair]:
    """All dependency pairs of R, including the Dershowitz restriction.

    Numbering is stable: pairs are ordered by origin rule, then by the name
    of the marked right-hand side root, then by subterm position (preorder).
    The root-name component is needed to reproduce the conventional
    numberings of the corpus systems.
    """
    candidates = []
    for ri, rule in enumerate(R.rules, start=1):
        for pos, u in subterms(rule.rhs):
            if type(u) is Var or u.sym.kind != DEFINED:
                continue
            if proper_subterm(u, rule.lhs):
                continue  # Dershowitz condition
            candidates.append((ri, u.sym.name, pos, rule.lhs, u))
    candidates.sort(key=lambda c: (c[0], c[1], c[2]))
    return [
        DependencyPair(i, ri, mark_root(lhs), mark_root(u))
        for i, (ri, _, _, lhs, u) in enumerate(candidates, start=1)
    ]


@dataclass(frozen=True)
class DpProblem:
    pairs: tuple[DependencyPair, ...]
    trs: Trs

    def __post_init__(self):
        for p in self.pairs:
            if type(p.lhs) is Var or p.lhs.sym.kind != MARKED:
                raise ValueError(f"pair {p.index} lhs root is not marked")
            if type(p.rhs) is App and p.rhs.sym.kind != MARKED:
                raise ValueError(f"pair {p.index} rhs root is not marked")

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(p.index for p in self.pairs)

    def pair_rules(self) -> list[Rule]:
        return [p.rule for p in self.pairs]

    def restricted(self, keep: Sequence[int]) -> "DpProblem":
        keep_set = set(keep)
        return DpProblem(
            tuple(p for p in self.pairs if p.index in keep_set), self.trs
        )

    def marked_symbols(self) -> list[Symbol]:
        seen: dict[str, Symbol] = {}
        for p in self.pairs:
            for t in (p.lhs, p.rhs):
                if type(t) is App and t.sym.kind == MARKED:
                    seen.setdefault(t.sym.name, t.sym)
        return [seen[k] for k in sorted(seen)]

    def __str__(self):
        inner = ",".join(str(i) for i in self.indices)
        return "({" + inner + "}, R)" if inner else "(∅, R)"


def initial_problem(R: Trs) -> DpProblem:
    return DpProblem(tuple(compute_dps(R)), R)


class InterpretationError(ValueError):
    pass


@dataclass(frozen=True)
class LinearInterpretation:
    """Per-symbol linear polynomials over the naturals.

    entries maps a symbol name to (coefficients, constant), denoting
    f(x1..xn) = sum(a_i * x_i) + b.
    """

    entries: dict[str, tuple[tuple[int, ...], int]]
    name: str = ""

    def evaluate(self, t: Term) -> tuple[dict[str, int], int]:
        """Linear polynomial of t as (variable coefficients, constant)."""
        if type(t) is Var:
            return {t.name: 1}, 0
        entry = self.entries.get(t.sym.name)
        if entry is None:
            raise InterpretationError(f"no interpretation for {t.sym.name}")
        coeffs, const = entry
        if len(coeffs) != t.sym.arity:
            raise InterpretationError(
                f"interpretation arity mismatch for {t.sym.name}"
            )
        acc: dict[str, int] = {}
        total = const
        for a, arg in zip(coeffs, t.args):
            if a == 0:
                continue
            poly, c = self.evaluate(arg)
            total += a * c
            for v, k in poly.items():
                acc[v] = acc.get(v, 0) + a * k
        return acc, total


def orient_check(interp: LinearInterpretation, rule: Rule) -> Optional[str]:
    """"strict", "weak", or None, by absolute positiveness of lhs - rhs."""
    lp, lc = interp.evaluate(rule.lhs)
    rp, rc = interp.evaluate(rule.rhs)
    for v in set(lp) | set(rp):
        if lp.get(v, 0) - rp.get(v, 0) < 0:
            return None
    diff = lc - rc
    if diff >= 1:
        return "strict"
    if diff >= 0:
        return "weak"
    return None


def apply_reduction_pair(
    problem: DpProblem, interp: LinearInterpretation
) -> Optional[tuple[DpProblem, tuple[DependencyPair, ...]]]:
    """(kept problem, removed pairs), or None when the processor makes no progress."""
    for rule in problem.trs.rules:
        if orient_check(interp, rule) is None:
            return None
    removed = []
    kept = []
    for p in problem.pairs:
        verdict = orient_check(interp, p.rule)
        if verdict is None:
            return None
        (removed if verdict == "strict" else kept).append(p)
    if not removed:
        return None
    return DpProblem(tuple(kept), problem.trs), tuple(removed)


@dataclass(frozen=True)
class SimpleProjection:
    """Argument choice for each marked symbol (1-based indices)."""

    indices: dict[str, int]
    name: str = ""

    def project(self, marked_term: Term) -> Term:
        if type(marked_term) is Var or marked_term.sym.kind != MARKED:
            raise ValueError(f"{render_term(marked_term)} is not marked-rooted")
        i = self.indices.get(marked_term.sym.name)
        if i is None:
            raise ValueError(f"projection undefined on {marked_term.sym.name}")
        if not 1 <= i <= marked_term.sym.arity:
            raise ValueError(f"projection index {i} out of range")
        return marked_term.args[i - 1]


def apply_subterm_criterion(
    problem: DpProblem, proj: SimpleProjection
) -> Optional[tuple[DpProblem, tuple[DependencyPair, ...]]]:
    """(kept problem, removed pairs), or None when the processor does not apply."""
    removed = []
    kept = []
    for p in problem.pairs:
        lp = proj.project(p.lhs)
        rp = proj.project(p.rhs)
        if lp == rp:
            kept.append(p)
        elif proper_subterm(rp, lp):
            removed.append(p)
        else:
            return None
    if not removed:
        return None
    return DpProblem(tuple(kept), problem.trs), tuple(removed)


@dataclass
class DepGraph:
    """Estimated dependency graph with its SCC partition and ranks."""

    pairs: tuple[DependencyPair, ...]
    edges: frozenset[tuple[int, int]]  # pair index -> pair index
    sccs: tuple[tuple[int, ...], ...]  # rank-descending, each sorted
    ranks: tuple[int, ...]  # ranks[i] is the rank of sccs[i]
    trivial: frozenset[int]  # positions into sccs

    def scc_count(self) -> int:
        return len(self.sccs)

    def scc_of_pair(self, index: int) -> int:
        for i, scc in enumerate(self.sccs):
            if index in scc:
                return i
        raise KeyError(index)

    def rank_of_pair(self, index: int) -> int:
        return self.ranks[self.scc_of_pair(index)]


def _cap_ren(t: Term, trs: Trs) -> Term:
    """REN(CAP(t)) for a marked rhs: defined-rooted subterms become fresh
    variables, then every variable occurrence is made distinct."""
    counter = [0]

    def fresh() -> Var:
        counter[0] += 1
        return Var(f"_cap{counter[0]}")

    def cap(u: Term) -> Term:
        if type(u) is Var:
            return fresh()
        if u.sym.kind == DEFINED:
            return fresh()
        return App(u.sym, tuple(cap(a) for a in u.args))

    if type(t) is Var:
        return fresh()
    return App(t.sym, tuple(cap(a) for a in t.args))


def estimate_dependency_graph(problem: DpProblem) -> DepGraph:
    """Cap-and-rename unification estimation of the dependency graph."""
    pairs = problem.pairs
    edges = set()
    for p in pairs:
        capped = _cap_ren(p.rhs, problem.trs)
        for q in pairs:
            q_lhs = rename_variables(q.lhs, "'")
            if unify_terms(capped, q_lhs) is not None:
                edges.add((p.index, q.index))

    order = [p.index for p in pairs]
    pos = {idx: i for i, idx in enumerate(order)}
    scc_of, _ = _condense(
        len(order), {(pos[a], "edge", pos[b]) for a, b in edges}
    )
    groups: dict[int, list[int]] = {}
    for idx in order:
        groups.setdefault(scc_of[pos[idx]], []).append(idx)

    # Condensation edges for rank assignment.
    cond: dict[int, set[int]] = {s: set() for s in groups}
    indeg = {s: 0 for s in groups}
    for a, b in edges:
        sa, sb = scc_of[pos[a]], scc_of[pos[b]]
        if sa != sb and sb not in cond[sa]:
            cond[sa].add(sb)
            indeg[sb] += 1

    # Highest ranks first: among sources, the SCC with the smallest pair
    # index wins (determinism only; ranks merely must decrease along edges).
    remaining = dict(indeg)
    available = sorted(
        (s for s, d in remaining.items() if d == 0), key=lambda s: min(groups[s])
    )
    ranked: list[int] = []
    while available:
        s = available.pop(0)
        ranked.append(s)
        for t in cond[s]:
            remaining[t] -= 1
            if remaining[t] == 0:
                available.append(t)
        available.sort(key=lambda x: min(groups[x]))

    k = len(ranked)
    sccs = tuple(tuple(sorted(groups[s])) for s in ranked)
    ranks = tuple(k - i for i in range(k))
    trivial = frozenset(
        i
        for i, s in enumerate(ranked)
        if len(groups[s]) == 1 and (groups[s][0], groups[s][0]) not in edges
    )
    return DepGraph(pairs, frozenset(edges), sccs, ranks, trivial)


def apply_dependency_graph(
    problem: DpProblem,
) -> Optional[tuple[DepGraph, list[tuple[DpProblem, bool]]]]:
    """Children per SCC in rank-descending order, trivial SCCs flagged as
    leaves.  None when the graph is a single nontrivial SCC equal to P."""
    if not problem.pairs:
        return None
    graph = estimate_dependency_graph(problem)
    if (
        graph.scc_count() == 1
        and 0 not in graph.trivial
        and set(graph.sccs[0]) == set(problem.indices)
    ):
        return None
    children = [
        (problem.restricted(scc), i in graph.trivial)
        for i, scc in enumerate(graph.sccs)
    ]
    return graph, children


@dataclass
class GraphLabel:
    graph: DepGraph

    kind = "graph"


@dataclass
class RedPairLabel:
    interp: LinearInterpretation
    removed: tuple[int, ...]

    kind = "redpair"


@dataclass
class SubtermLabel:
    projection: SimpleProjection
    removed: tuple[int, ...]

    kind = "subterm"


ProcessorLabel = Union[GraphLabel, RedPairLabel, SubtermLabel]


@dataclass
class ProofNode:
    problem: DpProblem
    position: Position
    label: Optional[ProcessorLabel] = None
    children: list["ProofNode"] = field(default_factory=list)
    trivial_leaf: bool = False

    @property
    def is_leaf(self) -> bool:
        return not self.children


class ProofTree:
    """Processor applications arranged per the ranked proof-tree discipline."""

    def __init__(self, root: ProofNode, trs: Trs):
        self.root = root
        self.trs = trs
        self._by_position = {n.position: n for n in self.iter_nodes()}

    def iter_nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def node_at(self, pos: Position) -> ProofNode:
        return self._by_position[pos]

    @property
    def depth(self) -> int:
        return max(len(n.position) for n in self.iter_nodes())

    def pair_chains(self) -> dict[int, list[Position]]:
        """For each pair index, the root chain of node positions containing it."""
        chains: dict[int, list[Position]] = {}
        for node in self.iter_nodes():
            for idx in node.problem.indices:
                chains.setdefault(idx, []).append(node.position)
        for idx, chain in chains.items():
            chain.sort(key=len)
            for a, b in zip(chain, chain[1:]):
                if b[: len(a)] != a or len(b) != len(a) + 1:
                    raise ValueError(f"pair {idx} does not lie on a single branch")
        return chains


Artifact = Union[LinearInterpretation, SimpleProjection]


@dataclass
class SearchConfig:
    coeff_bound: int = 2
    max_interpretations: int = 100_000
    artifacts: tuple[Artifact, ...] = ()


class NoProofFoundError(RuntimeError):
    def __init__(self, frontier: list[DpProblem]):
        self.frontier = frontier
        shown = "; ".join(str(p) for p in frontier)
        super().__init__(f"no proof found; unresolved problems: {shown}")


def search_proof(R: Trs, config: SearchConfig | None = None) -> ProofTree:
    """Assemble a proof tree, validating every processor application.

    Strategy at each node: dependency graph, then the supplied artifacts in
    their given order, then the subterm criterion over all projections, then
    a bounded search over linear interpretations.  The artifacts step runs
    before the generic ones so that canonical interpretations reproduce the
    intended proofs.
    """
    config = config or SearchConfig()
    stuck: list[DpProblem] = []

    def expand(problem: DpProblem, position: Position) -> ProofNode:
        node = ProofNode(problem, position)
        if not problem.pairs:
            return node

        result = apply_dependency_graph(problem)
        if result is not None:
            graph, children = result
            node.label = GraphLabel(graph)
            for i, (child, trivial) in enumerate(children, start=1):
                if trivial:
                    node.children.append(
                        ProofNode(child, position + (i,), trivial_leaf=True)
                    )
                else:
                    node.children.append(expand(child, position + (i,)))
            return node

        step = _try_artifacts(problem, config.artifacts)
        if step is None:
            step = _try_subterm(problem)
        if step is None:
            step = _try_interpretations(problem, config)
        if step is None:
            stuck.append(problem)
            return node
        label, child = step
        node.label = label
        node.children.append(expand(child, position + (1,)))
        return node

    root = expand(initial_problem(R), ())
    if stuck:
        raise NoProofFoundError(stuck)
    return ProofTree(root, R)


def _try_artifacts(problem, artifacts):
    for artifact in artifacts:
        if isinstance(artifact, SimpleProjection):
            try:
                result = apply_subterm_criterion(problem, artifact)
            except ValueError:
                result = None
            if result is not None:
                kept, removed = result
                return (
                    SubtermLabel(artifact, tuple(p.index for p in removed)),
                    kept,
                )
        else:
            try:
                result = apply_reduction_pair(problem, artifact)
            except InterpretationError:
                result = None
            if result is not None:
                kept, removed = result
                return (
                    RedPairLabel(artifact, tuple(p.index for p in removed)),
                    kept,
                )
    return None


def _try_subterm(problem):
    marked = problem.marked_symbols()
    if not marked or any(s.arity == 0 for s in marked):
        return None
    from itertools import product

    names = [s.name for s in marked]
    for combo in product(*(range(1, s.arity + 1) for s in marked)):
        proj = SimpleProjection(dict(zip(names, combo)))
        result = apply_subterm_criterion(problem, proj)
        if result is not None:
            kept, removed = result
            return SubtermLabel(proj, tuple(p.index for p in removed)), kept
    return None


def _interp_symbols(problem):
    seen: dict[str, Symbol] = {s.name: s for s in problem.trs.symbols.values()}
    for s in problem.marked_symbols():
        seen[s.name] = s
    unmarked = sorted(
        (s for s in seen.values() if s.kind != MARKED), key=lambda s: s.name
    )
    marked = sorted((s for s in seen.values() if s.kind == MARKED), key=lambda s: s.name)
    return unmarked, marked


def _assignments(symbols, bound):
    from itertools import product

    slots = sum(s.arity + 1 for s in symbols)
    for vector in product(range(bound + 1), repeat=slots):
        entries = {}
        at = 0
        for s in symbols:
            entries[s.name] = (vector[at : at + s.arity], vector[at + s.arity])
            at += s.arity + 1
        yield entries


def _try_interpretations(problem, config):
    budget = config.max_interpretations
    unmarked, marked = _interp_symbols(problem)
    rules = problem.trs.rules
    for base in _assignments(unmarked, config.coeff_bound):
        budget -= 1
        if budget <= 0:
            return None
        base_interp = LinearInterpretation(base)
        try:
            if any(orient_check(base_interp, r) is None for r in rules):
                continue
        except InterpretationError:
            continue
        for top in _assignments(marked, config.coeff_bound):
            budget -= 1
            if budget <= 0:
                return None
            interp = LinearInterpretation({**base, **top})
            result = apply_reduction_pair(problem, interp)
            if result is not None:
                kept, removed = result
                return (
                    RedPairLabel(interp, tuple(p.index for p in removed)),
                    kept,
                )
    return None


def validate_tree(tree: ProofTree) -> None:
    """Re-validate every processor application; raises ValueError on failure."""
    root = tree.root
    expected = initial_problem(tree.trs)
    if set(root.problem.indices) != set(expected.indices):
        raise ValueError("root is not (DP(R), R)")
    tree.pair_chains()
    for node in tree.iter_nodes():
        if node.is_leaf:
            if node.problem.pairs and not node.trivial_leaf and node.label is None:
                raise ValueError(f"nonempty leaf at {node.position} not sanctioned")
            continue
        label = node.label
        if isinstance(label, GraphLabel):
            result = apply_dependency_graph(node.problem)
            if result is None:
                raise ValueError(f"graph processor makes no progress at {node.position}")
            _, children = result
            if len(children) != len(node.children):
                raise ValueError(f"graph child count mismatch at {node.position}")
            for (child, trivial), actual in zip(children, node.children):
                if set(child.indices) != set(actual.problem.indices):
                    raise ValueError(f"graph children mismatch at {node.position}")
                if trivial != actual.trivial_leaf:
                    raise ValueError(f"trivial flag mismatch at {node.position}")
        elif isinstance(label, RedPairLabel):
            result = apply_reduction_pair(node.problem, label.interp)
            if result is None:
                raise ValueError(f"reduction pair fails at {node.position}")
            kept, removed = result
            if set(p.index for p in removed) != set(label.removed):
                raise ValueError(f"removed set mismatch at {node.position}")
            if set(kept.indices) != set(node.children[0].problem.indices):
                raise ValueError(f"kept set mismatch at {node.position}")
        elif isinstance(label, SubtermLabel):
            result = apply_subterm_criterion(node.problem, label.projection)
            if result is None:
                raise ValueError(f"subterm criterion fails at {node.position}")
            kept, removed = result
            if set(p.index for p in removed) != set(label.removed):
                raise ValueError(f"removed set mismatch at {node.position}")
            if set(kept.indices) != set(node.children[0].problem.indices):
                raise ValueError(f"kept set mismatch at {node.position}")
        else:
            raise ValueError(f"inner node without label at {node.position}")


def rank_of_term(
    graph: DepGraph, t: Term, R: Trs, fuel: Fuel = Fuel()
) -> Optional[int]:
    """max rank over pairs whose lhs matches an R-reachable term from t#."""
    if type(t) is Var:
        return None
    marked = mark_root(t)
    reach = reachable_set(marked, R.rules, fuel)
    if not reach.exhausted:
        raise IndeterminateError(f"rank of {render_term(t)} ran out of fuel")
    best: Optional[int] = None
    for node in reach.nodes:
        for p in graph.pairs:
            if kernel.match(p.lhs, node) is not None:
                r = graph.rank_of_pair(p.index)
                if best is None or r > best:
                    best = r
    return best


@dataclass(frozen=True)
class RpFunction:
    """Monotone polynomial over the naturals: g(n) = sum(c_j * n^j)."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs or any(c < 0 for c in self.coeffs):
            raise ValueError("coefficients must be naturals, at least one")

    def __call__(self, n: int) -> int:
        total = 0
        for c in reversed(self.coeffs):
            total = total * n + c
        return total

    def __str__(self):
        parts = []
        for j, c in enumerate(self.coeffs):
            if c == 0 and len(self.coeffs) > 1:
                continue
            if j == 0:
                parts.append(str(c))
            elif j == 1:
                parts.append(f"{c}*n" if c != 1 else "n")
            else:
                parts.append(f"{c}*n^{j}" if c != 1 else f"n^{j}")
        return " + ".join(parts) if parts else "0"


@dataclass
class RpEdgeCheck:
    position: Position
    strict_pairs: tuple[int, ...]
    violations: list[tuple[Term, int, int]]  # term, dheight, bound
    indeterminates: list[Term]


@dataclass
class RpReport:
    ok: bool
    k: int
    g: RpFunction
    n_max: int
    edge_checks: list[RpEdgeCheck]

    def first_violation(self):
        for check in self.edge_checks:
            if check.violations:
                return check.position, check.violations[0]
        return None


def validate_rp_function(
    tree: ProofTree, g: RpFunction, n_max: int, fuel: Fuel = Fuel()
) -> RpReport:
    """Empirically check the reduction-pair-function conditions up to n_max."""
    k = 0
    for node in tree.iter_nodes():
        if isinstance(node.label, GraphLabel):
            k = max(k, node.label.graph.scc_count())
    ok = g(0) >= k

    edge_checks = []
    by_size = None
    for node in tree.iter_nodes():
        if not isinstance(node.label, RedPairLabel):
            continue
        child = node.children[0].problem
        kept = set(child.indices)
        strict_rules = [p.rule for p in node.problem.pairs if p.index not in kept]
        weak_rules = [p.rule for p in child.pairs] + list(tree.trs.rules)
        check = RpEdgeCheck(node.position, tuple(label_removed(node)), [], [])
        if by_size is None:
            by_size = enumerate_ground_terms(
                ground_enumeration_symbols(tree.trs), n_max
            )
        for layer in by_size:
            for t in layer:
                bound = g(t.size)
                try:
                    h = dheight_relative(mark_root(t), strict_rules, weak_rules, fuel)
                except IndeterminateError:
                    check.indeterminates.append(t)
                    continue
                if h > bound:
                    check.violations.append((t, h, bound))
        if check.violations or check.indeterminates:
            ok = False
        edge_checks.append(check)
    return RpReport(ok, k, g, n_max, edge_checks)


def label_removed(node: ProofNode) -> tuple[int, ...]:
    if isinstance(node.label, (RedPairLabel, SubtermLabel)):
        return node.label.removed
    return ()


def parse_artifact_lines(text: str) -> list[Artifact]:
    """Parse (INTERP f 2 a1 a2 b) and (PROJ f# i) lines.

    Consecutive lines of the same kind form one artifact (one interpretation
    or one projection); a blank line or a kind switch starts a new one.
    """
    artifacts: list[Artifact] = []
    pending_interp: dict[str, tuple[tuple[int, ...], int]] = {}
    pending_proj: dict[str, int] = {}

    def flush():
        nonlocal pending_interp, pending_proj
        if pending_interp:
            artifacts.append(LinearInterpretation(dict(pending_interp)))
            pending_interp = {}
        if pending_proj:
            artifacts.append(SimpleProjection(dict(pending_proj)))
            pending_proj = {}

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            flush()
            continue
        if not (line.startswith("(") and line.endswith(")")):
            raise ValueError(f"bad artifact line: {raw!r}")
        fieldsv = line[1:-1].split()
        if fieldsv[0] == "INTERP":
            if pending_proj:
                flush()
            name = fieldsv[1]
            arity = int(fieldsv[2])
            numbers = [int(x) for x in fieldsv[3:]]
            if len(numbers) != arity + 1:
                raise ValueError(f"INTERP {name}: expected {arity + 1} numbers")
            pending_interp[name] = (tuple(numbers[:arity]), numbers[arity])
        elif fieldsv[0] == "PROJ":
            if pending_interp:
                flush()
            pending_proj[fieldsv[1]] = int(fieldsv[2])
        else:
            raise ValueError(f"unknown artifact kind {fieldsv[0]!r}")
    flush()
    return artifacts
