"""Current proof-tree paths, the norm vector, the order on norm values, and
empirical verifiers for the weak/strict decrease lemmas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from . import kernel
from .analysis import Fuel, IndeterminateError, dheight_relative, enumerate_ground_terms
from .dpframe import (
    GraphLabel,
    ProofTree,
    RedPairLabel,
    SubtermLabel,
    rank_of_term,
)
from .terms import (
    DEFINED,
    App,
    Position,
    Term,
    Var,
    fresh_constant,
    mark_root,
    proper_subterm,
    render_term,
    subterms,
)


@dataclass(frozen=True)
class Nat:
    n: int

    def __str__(self):
        return str(self.n)


@dataclass(frozen=True)
class Trm:
    term: Term

    def __str__(self):
        return render_term(self.term)


class _Bot:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "⊥"

    def __str__(self):
        return "⊥"


BOT = _Bot()

NormValue = Union[Nat, Trm, _Bot]

GREATER = "greater"
EQUAL = "equal"
LESS = "less"
INCOMPARABLE = "incomparable"

LEX_GREATER = "greater"
LEX_EQUAL = "equal"
LEX_OTHER = "incomparable-or-less"


class NormContext:
    """Shared caches for norm computations against one proof tree."""

    def __init__(self, tree: ProofTree, fuel: Fuel = Fuel()):
        self.tree = tree
        self.trs = tree.trs
        self.fuel = fuel
        self.d = tree.depth + 1
        self.pairs = tree.root.problem.pairs
        self.chains = tree.pair_chains()
        self._paths: dict[Term, tuple[Position, ...]] = {}
        self._vectors: dict[Term, tuple[NormValue, ...]] = {}
        self._closures: dict[Term, list[Term]] = {}

    def _closure_of_marked(self, t: Term) -> list[Term]:
        if t in self._closures:
            return self._closures[t]
        marked = mark_root(t)
        nodes, _, _, exhausted = kernel.reach(
            marked, [("weak", list(self.trs.rules))], self.fuel.max_nodes,
            self.fuel.max_depth,
        )
        if not exhausted:
            raise IndeterminateError(
                f"closure of {render_term(marked)} ran out of fuel"
            )
        self._closures[t] = nodes
        return nodes

    def current_path(self, t: Term) -> tuple[Position, ...]:
        """Leftmost per-pair node chain applicable to t; () when t# is a
        normal form of DP(R)/R.

        Leftmost orders chains by their child-index sequences, where a chain
        that stops counts as larger than any continuation (required so the
        chain always extends as deep as the current pair occurs).
        """
        cached = self._paths.get(t)
        if cached is not None:
            return cached
        if type(t) is Var or t.sym.kind != DEFINED:
            self._paths[t] = ()
            return ()
        closure = self._closure_of_marked(t)
        best: Optional[tuple[Position, ...]] = None
        best_key: Optional[tuple] = None
        for p in self.pairs:
            if not any(kernel.match(p.lhs, u) is not None for u in closure):
                continue
            chain = tuple(self.chains[p.index])
            key = tuple(pos[-1] for pos in chain[1:])
            if best is None or _leftmost_less(key, best_key):
                best, best_key = chain, key
        result = best if best is not None else ()
        self._paths[t] = result
        return result

    def norm_component(self, t: Term, i: int) -> NormValue:
        path = self.current_path(t)
        if i > len(path):
            if type(t) is App and t.sym.kind == DEFINED:
                return Nat(0)
            return BOT
        node = self.tree.node_at(path[i - 1])
        marked = mark_root(t)
        if node.is_leaf:
            h = dheight_relative(
                marked, node.problem.pair_rules(), self.trs.rules, self.fuel
            )
            return Nat(h)
        label = node.label
        if isinstance(label, RedPairLabel):
            kept = set(node.children[0].problem.indices)
            strict = [p.rule for p in node.problem.pairs if p.index not in kept]
            weak = [p.rule for p in node.children[0].problem.pairs] + list(
                self.trs.rules
            )
            return Nat(dheight_relative(marked, strict, weak, self.fuel))
        if isinstance(label, GraphLabel):
            r = rank_of_term(label.graph, t, self.trs, self.fuel)
            if r is None:
                raise ValueError(
                    f"rank undefined on the current path for {render_term(t)}"
                )
            return Nat(r)
        if isinstance(label, SubtermLabel):
            return Trm(label.projection.project(marked))
        raise ValueError(f"unlabelled inner node at {node.position}")

    def norm_vector(self, t: Term) -> tuple[NormValue, ...]:
        cached = self._vectors.get(t)
        if cached is None:
            cached = tuple(self.norm_component(t, i) for i in range(1, self.d + 1))
            self._vectors[t] = cached
        return cached

    def rewrite_or_subterm_reaches(self, a: Term, b: Term) -> bool:
        """a (->R U proper-superterm)+ b by bounded breadth-first search."""
        seen = {a}
        frontier = [a]
        budget = self.fuel.max_nodes
        while frontier:
            next_frontier = []
            for x in frontier:
                succs = [r for _, _, r in kernel.successors(x, list(self.trs.rules))]
                if type(x) is App:
                    succs.extend(x.args)
                for y in succs:
                    if y == b:
                        return True
                    if y not in seen:
                        if len(seen) >= budget:
                            raise IndeterminateError(
                                "norm-value comparison ran out of fuel"
                            )
                        seen.add(y)
                        next_frontier.append(y)
            frontier = next_frontier
        return False

    def compare(self, a: NormValue, b: NormValue) -> str:
        if _norm_equal(a, b):
            return EQUAL
        if self._greater(a, b):
            return GREATER
        if self._greater(b, a):
            return LESS
        return INCOMPARABLE

    def _greater(self, a: NormValue, b: NormValue) -> bool:
        if isinstance(a, Nat) and isinstance(b, Nat):
            return a.n > b.n
        if isinstance(a, Trm) and isinstance(b, Trm):
            return self.rewrite_or_subterm_reaches(a.term, b.term)
        if isinstance(a, Trm) and isinstance(b, Nat) and b.n == 0:
            return True
        if isinstance(a, (Trm, Nat)) and b is BOT:
            return True
        return False

    def compare_lex(self, va, vb) -> str:
        for a, b in zip(va, vb):
            c = self.compare(a, b)
            if c == EQUAL:
                continue
            if c == GREATER:
                return LEX_GREATER
            return LEX_OTHER
        if len(va) != len(vb):
            raise ValueError("norm vectors of different length")
        return LEX_EQUAL


def _norm_equal(a: NormValue, b: NormValue) -> bool:
    if a is BOT or b is BOT:
        return a is b
    if isinstance(a, Nat) and isinstance(b, Nat):
        return a.n == b.n
    if isinstance(a, Trm) and isinstance(b, Trm):
        return a.term == b.term
    return False


def _leftmost_less(key_a: tuple, key_b: tuple) -> bool:
    """Child-sequence order: smaller child first; a stopped chain is larger."""
    for x, y in zip(key_a, key_b):
        if x != y:
            return x < y
    # One is a prefix of the other: the longer chain is leftmost.
    return len(key_a) > len(key_b)


def current_path(t: Term, tree: ProofTree, fuel: Fuel = Fuel()):
    return NormContext(tree, fuel).current_path(t)


def norm_component(t: Term, i: int, tree: ProofTree, fuel: Fuel = Fuel()):
    return NormContext(tree, fuel).norm_component(t, i)


def norm_vector(t: Term, tree: ProofTree, fuel: Fuel = Fuel()):
    return NormContext(tree, fuel).norm_vector(t)


def compare_norm(a, b, tree: ProofTree, fuel: Fuel = Fuel()):
    return NormContext(tree, fuel).compare(a, b)


def compare_norm_lex(a, b, tree: ProofTree, fuel: Fuel = Fuel()):
    return NormContext(tree, fuel).compare_lex(a, b)


def _step_position(s: Term, t: Term, rules, scope) -> Optional[Position]:
    for _, pos, result in kernel.successors(s, list(rules), scope):
        if result == t:
            return pos
    return None


def verify_weak_decrease(
    s: Term, t: Term, tree: ProofTree, fuel: Fuel = Fuel(), ctx=None
) -> bool:
    """norm(s) >=lex norm(t) for a below-root step s -> t."""
    ctx = ctx or NormContext(tree, fuel)
    pos = _step_position(s, t, tree.trs.rules, kernel.BELOW_ROOT)
    if pos is None:
        raise ValueError(
            f"{render_term(s)} does not rewrite to {render_term(t)} below the root"
        )
    c = ctx.compare_lex(ctx.norm_vector(s), ctx.norm_vector(t))
    return c in (LEX_GREATER, LEX_EQUAL)


@dataclass
class StrictCheck:
    position: Position
    subterm: Term
    comparison: str


@dataclass
class StrictReport:
    s: Term
    t: Term
    checks: list[StrictCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.comparison == LEX_GREATER for c in self.checks)


def verify_strict_decrease(
    s: Term, t: Term, tree: ProofTree, fuel: Fuel = Fuel(), ctx=None
) -> StrictReport:
    """norm(s) >lex norm(t|p) for every p with t|p not a proper subterm of s."""
    ctx = ctx or NormContext(tree, fuel)
    pos = _step_position(s, t, tree.trs.rules, kernel.ROOT_ONLY)
    if pos is None:
        raise ValueError(
            f"{render_term(s)} does not rewrite to {render_term(t)} at the root"
        )
    report = StrictReport(s, t)
    ns = ctx.norm_vector(s)
    for p, sub in subterms(t):
        if proper_subterm(sub, s):
            continue
        c = ctx.compare_lex(ns, ctx.norm_vector(sub))
        report.checks.append(StrictCheck(p, sub, c))
    return report


def check_equal_positions(s: Term, t: Term, ctx: NormContext) -> bool:
    """Testable restatement of the equal-positions lemma for one below-root
    step: while paths and norms agree at i, the path of t at i+1 either ends
    or agrees with the path of s."""
    ps = ctx.current_path(s)
    pt = ctx.current_path(t)
    ns = ctx.norm_vector(s)
    nt = ctx.norm_vector(t)
    for i in range(1, ctx.d):
        a = ps[i - 1] if i <= len(ps) else None
        b = pt[i - 1] if i <= len(pt) else None
        if a != b or not _norm_equal(ns[i - 1], nt[i - 1]):
            continue
        nxt_t = pt[i] if i + 1 <= len(pt) else None
        nxt_s = ps[i] if i + 1 <= len(ps) else None
        if nxt_t is not None and nxt_t != nxt_s:
            return False
    return True


@dataclass
class LemmaReport:
    terms_checked: int = 0
    below_steps: int = 0
    root_steps: int = 0
    weak_violations: list = field(default_factory=list)
    strict_violations: list = field(default_factory=list)
    equalpos_violations: list = field(default_factory=list)
    indeterminates: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (
            self.weak_violations
            or self.strict_violations
            or self.equalpos_violations
            or self.indeterminates
        )


def verify_lemmas(
    tree: ProofTree, max_size: int, fuel: Fuel = Fuel()
) -> LemmaReport:
    """Exhaustively check weak/strict decrease (and the equal-positions
    property) on all rewrite steps from ground terms of size <= max_size."""
    ctx = NormContext(tree, fuel)
    trs = tree.trs
    symbols = list(trs.symbols.values())
    if not any(s.arity == 0 for s in symbols):
        symbols.append(fresh_constant(trs.symbols))
    report = LemmaReport()
    rules = list(trs.rules)
    for layer in enumerate_ground_terms(symbols, max_size):
        for s in layer:
            report.terms_checked += 1
            for _, pos, t in kernel.successors(s, rules):
                try:
                    if pos == ():
                        report.root_steps += 1
                        strict = verify_strict_decrease(s, t, tree, fuel, ctx=ctx)
                        for check in strict.checks:
                            if check.comparison != LEX_GREATER:
                                report.strict_violations.append(
                                    (s, t, check.position, check.comparison)
                                )
                    else:
                        report.below_steps += 1
                        if not verify_weak_decrease(s, t, tree, fuel, ctx=ctx):
                            report.weak_violations.append((s, t))
                        if not check_equal_positions(s, t, ctx):
                            report.equalpos_violations.append((s, t))
                except IndeterminateError as exc:
                    report.indeterminates.append((s, t, str(exc)))
    return report
