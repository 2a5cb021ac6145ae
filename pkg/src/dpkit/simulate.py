"""Generation of the simulating TRS, the translation into it, and
constructive replays of the size, step, and start simulation lemmas.

The replays build explicit derivations; every appended step is validated by
matching the named rule at its position, so a successful replay doubles as a
proof-content test.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from . import kernel
from .analysis import Fuel, IndeterminateError
from .dpframe import ProofTree, RpFunction
from .lpo import Precedence, rsim_precedence
from .norms import BOT, Nat, NormContext, NormValue, Trm, _norm_equal
from .terms import (
    CONSTRUCTOR,
    DEFINED,
    App,
    Position,
    Rule,
    Symbol,
    Term,
    Trs,
    Var,
    is_ground,
    render_term,
    replace_at,
    subterm_at,
    subterms,
)


class ReplayError(RuntimeError):
    """A simulation replay could not be assembled from the generated rules."""


@dataclass(frozen=True)
class SimConstants:
    d: int  # proof tree depth plus one
    A: int  # maximum arity in the original signature (at least 1)
    C: int  # maximum right-hand-side depth

    def __post_init__(self):
        if self.d < 1 or self.A < 1 or self.C < 0:
            raise ValueError("bad simulation constants")


def sim_constants(R: Trs, tree: ProofTree) -> SimConstants:
    d = tree.depth + 1
    A = max(1, R.max_arity)
    C = max((rule.rhs.depth for rule in R.rules), default=0)
    return SimConstants(d, A, C)


@dataclass
class SimSystem:
    constants: SimConstants
    symbols: dict[str, Symbol]
    rules: tuple[tuple[str, Rule], ...]
    g: RpFunction
    precedence: Precedence

    def rule(self, name: str) -> Rule:
        for n, r in self.rules:
            if n == name:
                return r
        raise KeyError(name)

    @property
    def trs(self) -> Trs:
        return Trs(self.symbols, tuple(r for _, r in self.rules))

    def sym(self, name: str) -> Symbol:
        return self.symbols[name]

    def numeral(self, n: int) -> Term:
        t: Term = App(self.sym("0"))
        s = self.sym("s")
        for _ in range(n):
            t = App(s, (t,))
        return t

    def numeral_value(self, t: Term) -> Optional[int]:
        n = 0
        while type(t) is App and t.sym.name == "s":
            n += 1
            t = t.args[0]
        if type(t) is App and t.sym.name == "0" and not t.args:
            return n
        return None


def _sim_symbols(d: int, A: int) -> dict[str, Symbol]:
    return {
        "f": Symbol("f", d + A, DEFINED),
        "c": Symbol("c", 0, CONSTRUCTOR),
        "h": Symbol("h", 1, DEFINED),
        "z": Symbol("z", 0, DEFINED),
        "size": Symbol("size", 1, DEFINED),
        "times": Symbol("times", 1, DEFINED),
        "choice": Symbol("choice", 1, DEFINED),
        "s": Symbol("s", 1, CONSTRUCTOR),
        "0": Symbol("0", 0, CONSTRUCTOR),
        "bot": Symbol("bot", 0, CONSTRUCTOR),
        "g": Symbol("g", 1, DEFINED),
        "plus": Symbol("plus", 2, DEFINED),
        "mult": Symbol("mult", 2, DEFINED),
    }


def generate_rsim(R: Trs, tree: ProofTree, g: RpFunction) -> SimSystem:
    """Instantiate the simulation rule schemata for R's proof tree.

    The inner choice terms created by the norm-reset rules carry the already
    bound prefix variables instead of a literal zero prefix; the projection
    and size rules read only the last A arguments, so the construction's
    rewriting behaviour is unchanged, while plain LPO can orient the result.
    """
    consts = sim_constants(R, tree)
    d, A, C = consts.d, consts.A, consts.C
    syms = _sim_symbols(d, A)
    f, c, zero, bot = syms["f"], syms["c"], syms["0"], syms["bot"]
    s_sym, h, z = syms["s"], syms["h"], syms["z"]
    size, times, choice, gsym = syms["size"], syms["times"], syms["choice"], syms["g"]
    plus, mult = syms["plus"], syms["mult"]

    us = [Var(f"u{i}") for i in range(1, d + 1)]
    vs = [Var(f"v{i}") for i in range(1, d + 1)]
    xs = [Var(f"x{j}") for j in range(1, A + 1)]
    ys = [Var(f"y{j}") for j in range(1, A + 1)]
    w = Var("w")
    w2 = Var("w2")

    def N(prefix: list[Term], args: list[Term]) -> Term:
        zeros = [App(zero)] * (d - len(prefix))
        return App(choice, (App(f, tuple(prefix + zeros + args)),))

    def M(k: int, prefix: list[Term], args: list[Term]) -> Term:
        if k == 0:
            trailer = [N(prefix, args)] * (d - len(prefix))
            return App(f, tuple(prefix + trailer + args))
        inner = M(k - 1, prefix, args)
        trailer = [N(prefix, [inner] * A)] * (d - len(prefix))
        return App(f, tuple(prefix + trailer + [inner] * A))

    rules: list[tuple[str, Rule]] = []

    def f_with(i: int, at_i: Term, args: list[Term]) -> Term:
        slots = us[: i - 1] + [at_i] + us[i:]
        return App(f, tuple(slots + args))

    for i in range(1, d + 1):
        lhs = f_with(i, App(s_sym, (us[i - 1],)), xs)
        rules.append((f"1_{i}", Rule(lhs, M(C, us[:i], xs))))
    for i in range(1, d + 1):
        inner_f = App(f, tuple(vs + ys))
        for j in range(1, A + 1):
            lhs = f_with(i, inner_f, xs)
            rules.append(
                (f"2_{i}_{j}", Rule(lhs, M(C, us[: i - 1] + [ys[j - 1]], xs)))
            )
    for i in range(1, d + 1):
        lhs = f_with(i, App(f, tuple(vs + ys)), xs)
        rules.append((f"3_{i}", Rule(lhs, M(C, us[: i - 1] + [App(zero)], xs))))
    for i in range(1, d + 1):
        lhs = f_with(i, App(zero), xs)
        rules.append((f"4_{i}", Rule(lhs, M(C, us[: i - 1] + [App(bot)], xs))))
    full_f = App(f, tuple(us + xs))
    for j in range(1, A + 1):
        rules.append(
            (f"5_{j}", Rule(App(size, (full_f,)), App(times, (App(size, (xs[j - 1],)),))))
        )
    rules.append(("6", Rule(App(size, (App(c),)), App(s_sym, (App(zero),)))))
    times_rhs: Term = App(times, (w,))
    for _ in range(A):
        times_rhs = App(s_sym, (times_rhs,))
    rules.append(("7", Rule(App(times, (App(s_sym, (w,)),)), times_rhs)))
    rules.append(("8", Rule(App(times, (App(zero),)), App(zero))))
    rules.append(("9", Rule(full_f, App(c))))
    for j in range(1, A + 1):
        rules.append((f"10_{j}", Rule(full_f, xs[j - 1])))
    h_body = App(f, tuple([N([], [w] * A)] * d + [w] * A))
    rules.append(("11", Rule(App(h, (w,)), h_body)))
    z_body = App(f, tuple([N([], [App(c)] * A)] * d + [App(c)] * A))
    rules.append(("12", Rule(App(z), z_body)))
    for j in range(1, A + 1):
        rules.append((f"13_{j}", Rule(App(choice, (full_f,)), xs[j - 1])))
    rules.append(("14", Rule(App(choice, (w,)), App(gsym, (App(size, (w,)),)))))
    rules.append(("15", Rule(App(choice, (w,)), App(bot))))

    def poly_term(coeffs: tuple[int, ...]) -> Term:
        head = coeffs[0]
        const: Term = App(zero)
        for _ in range(head):
            const = App(s_sym, (const,))
        if len(coeffs) == 1:
            return const
        return App(plus, (const, App(mult, (w, poly_term(coeffs[1:])))))

    rules.append(("g", Rule(App(gsym, (w,)), poly_term(g.coeffs))))
    rules.append(("plus_0", Rule(App(plus, (App(zero), w2)), w2)))
    rules.append(
        ("plus_s", Rule(App(plus, (App(s_sym, (w,)), w2)), App(s_sym, (App(plus, (w, w2)),))))
    )
    rules.append(("mult_0", Rule(App(mult, (App(zero), w2)), App(zero))))
    rules.append(
        ("mult_s", Rule(App(mult, (App(s_sym, (w,)), w2)), App(plus, (w2, App(mult, (w, w2))))))
    )

    return SimSystem(consts, syms, tuple(rules), g, rsim_precedence("times"))


def approx_equiv(a: Term, b: Term, sys: SimSystem) -> bool:
    """Equivalence ignoring the first d arguments of every f."""
    d, A = sys.constants.d, sys.constants.A
    c, f = sys.sym("c"), sys.sym("f")
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if type(x) is not App or type(y) is not App:
            return False
        if x.sym == c and y.sym == c:
            continue
        if x.sym != f or y.sym != f:
            return False
        for j in range(d, d + A):
            stack.append((x.args[j], y.args[j]))
    return True


@dataclass(frozen=True)
class SimStep:
    rule: str
    position: Position
    result: Term


@dataclass
class SimDerivation:
    start: Term
    steps: list[SimStep] = field(default_factory=list)

    @property
    def final(self) -> Term:
        return self.steps[-1].result if self.steps else self.start

    def __len__(self):
        return len(self.steps)

    def validate(self, sys: SimSystem) -> None:
        current = self.start
        for step in self.steps:
            rule = sys.rule(step.rule)
            sub = subterm_at(current, step.position)
            sigma = kernel.match(rule.lhs, sub)
            if sigma is None:
                raise ReplayError(
                    f"rule {step.rule} does not match at {step.position}"
                )
            current = replace_at(
                current, step.position, kernel.substitute(rule.rhs, sigma)
            )
            if current != step.result:
                raise ReplayError(f"step {step.rule} result mismatch")


class DerivationBuilder:
    def __init__(self, sys: SimSystem, start: Term):
        self.sys = sys
        self.current = start
        self.steps: list[SimStep] = []
        self._rules = dict(sys.rules)

    def apply(self, name: str, pos: Position) -> None:
        rule = self._rules[name]
        sub = subterm_at(self.current, pos)
        sigma = kernel.match(rule.lhs, sub)
        if sigma is None:
            raise ReplayError(
                f"rule {name} does not apply at {pos} "
                f"(subterm root {sub.sym.name if type(sub) is App else sub})"
            )
        self.current = replace_at(
            self.current, pos, kernel.substitute(rule.rhs, sigma)
        )
        self.steps.append(SimStep(name, pos, self.current))

    def at(self, pos: Position) -> Term:
        return subterm_at(self.current, pos)

    def derivation(self, start: Term) -> SimDerivation:
        return SimDerivation(start, list(self.steps))


class TranslationContext:
    """Shared state for translating terms and replaying the simulation."""

    def __init__(
        self,
        tree: ProofTree,
        sys: SimSystem,
        fuel: Fuel = Fuel(),
        norm_ctx: Optional[NormContext] = None,
    ):
        self.tree = tree
        self.sys = sys
        self.fuel = fuel
        self.norms = norm_ctx or NormContext(tree, fuel)
        self.trs = tree.trs
        self._translations: dict[Term, Term] = {}

    @property
    def d(self) -> int:
        return self.sys.constants.d

    @property
    def A(self) -> int:
        return self.sys.constants.A

    @property
    def C(self) -> int:
        return self.sys.constants.C

    def star(self, value: NormValue) -> Term:
        if value is BOT:
            return App(self.sys.sym("bot"))
        if isinstance(value, Nat):
            return self.sys.numeral(value.n)
        return self.translate(value.term)

    def translate(self, t: Term) -> Term:
        if not is_ground(t):
            raise ValueError(f"translate requires a ground term: {render_term(t)}")
        cached = self._translations.get(t)
        if cached is not None:
            return cached
        vec = self.norms.norm_vector(t)
        if len(vec) != self.d:
            raise ValueError("norm vector length does not match d")
        args = [self.star(v) for v in vec]
        args.extend(self.translate(a) for a in t.args)
        c = App(self.sys.sym("c"))
        args.extend([c] * (self.A - len(t.args)))
        result = App(self.sys.sym("f"), tuple(args))
        self._translations[t] = result
        return result

    def equiv(self, a: Term, b: Term) -> bool:
        """approx-equivalence using this context's d/A split."""
        d, A = self.d, self.A
        c = self.sys.sym("c")
        f = self.sys.sym("f")
        stack = [(a, b)]
        while stack:
            x, y = stack.pop()
            if type(x) is not App or type(y) is not App:
                return False
            if x.sym == c and y.sym == c:
                continue
            if x.sym != f or y.sym != f:
                return False
            for j in range(d, d + A):
                stack.append((x.args[j], y.args[j]))
        return True


# ---------------------------------------------------------------------------
# Size lemma replay


def simulate_size(a: Term, original: Term, ctx: TranslationContext) -> SimDerivation:
    """Derivation size(a) ->+ s^n(0) with n >= |original|, for a ~ tr(original)."""
    if not ctx.equiv(a, ctx.translate(original)):
        raise ValueError("argument is not equivalent to the translation")
    if ctx.A < 2 and original.size > 1:
        raise ReplayError(
            "the size bound is not derivable for unary signatures (A = 1)"
        )
    start = App(ctx.sys.sym("size"), (a,))
    builder = DerivationBuilder(ctx.sys, start)
    _size_derive(builder, (), original, top=True)
    n = ctx.sys.numeral_value(builder.current)
    if n is None or n < original.size:
        raise ReplayError("size replay produced an insufficient numeral")
    return builder.derivation(start)


def _size_derive(builder: DerivationBuilder, pos: Position, original: Term, top=False) -> int:
    """Rewrite size(X) at pos (X ~ tr(original)) to a numeral; returns its value.

    Recursive calls descend through the deepest child, which guarantees the
    value dominates |original| for A >= 2; the plain two-step route is only
    good enough at the top level of a constant.
    """
    A = builder.sys.constants.A
    if top and original.size == 1:
        builder.apply("9", pos + (1,))
        builder.apply("6", pos)
        return 1
    if not original.args:
        builder.apply("5_1", pos)
        builder.apply("6", pos + (1,))
        builder.apply("7", pos)
        builder.apply("8", pos + (1,) * A)
        return A
    j, child = max(
        enumerate(original.args, start=1), key=lambda e: (e[1].depth, -e[0])
    )
    builder.apply(f"5_{j}", pos)
    inner = _size_derive(builder, pos + (1,), child)
    for k in range(inner):
        builder.apply("7", pos + (1,) * (A * k))
    builder.apply("8", pos + (1,) * (A * inner))
    return A * inner


# ---------------------------------------------------------------------------
# Prefix fixing (the lexicographic-decrease replay shared by all lemmas)

Materializer = Callable[[int, Position], None]


class _PrefixFixer:
    """Drive the first d argument slots of the f-term at pos to the exact
    norm representation of target, left to right.

    slot_states[q-1] is ("val", NormValue) for a slot holding a value
    representation, or ("N", materializer) for an unresolved choice term
    whose inner argument slots the materializer can bring to translated
    children (or c padding).
    """

    MAX_MOVES_PER_SLOT = 100_000

    def __init__(
        self,
        ctx: TranslationContext,
        builder: DerivationBuilder,
        pos: Position,
        slot_states: list,
        target: Term,
    ):
        self.ctx = ctx
        self.builder = builder
        self.pos = pos
        self.states = slot_states
        self.target = target
        self.target_vec = ctx.norms.norm_vector(target)
        self.d = ctx.d
        self.A = ctx.A
        self.C = ctx.C

    def default_materializer(self) -> Materializer:
        def mat(j: int, at: Position) -> None:
            expected = self._child_repr(j)
            actual = self.builder.at(at)
            if actual != expected:
                raise ReplayError(
                    f"slot {j} at {at} does not hold the expected translation"
                )

        return mat

    def _child_repr(self, j: int) -> Term:
        if j <= len(self.target.args):
            return self.ctx.translate(self.target.args[j - 1])
        return App(self.ctx.sys.sym("c"))

    def run(self) -> None:
        for q in range(1, self.d + 1):
            tgt = self.target_vec[q - 1]
            for _ in range(self.MAX_MOVES_PER_SLOT):
                st = self.states[q - 1]
                if st[0] == "N":
                    self._resolve_choice(q, tgt, st[1])
                    continue
                val = st[1]
                if _norm_equal(val, tgt):
                    break
                self._step_value(q, val, tgt)
            else:
                raise ReplayError(f"slot {q} did not converge")
        if self.builder.at(self.pos) != self.ctx.translate(self.target):
            raise ReplayError("prefix fix did not reach the exact translation")

    def _resolve_choice(self, q: int, tgt: NormValue, mat: Materializer) -> None:
        at = self.pos + (q,)
        if tgt is BOT:
            self.builder.apply("15", at)
            self.states[q - 1] = ("val", BOT)
            return
        if isinstance(tgt, Trm):
            j = self._target_child_index(tgt.term)
            self.builder.apply(f"13_{j}", at)
            mat(j, at)
            self.states[q - 1] = ("val", tgt)
            return
        # natural number target: bound it through g(size(...)), then strip
        for j in range(1, self.A + 1):
            mat(j, at + (1, self.d + j))
        self.builder.apply("14", at)
        value = _size_derive(
            self.builder, at + (1,), self.target, top=self.target.size == 1
        )
        if value < self.target.size:
            raise ReplayError("size under-approximated inside a choice")
        g_val = _eval_g(self.builder, at, self.ctx.sys)
        self.states[q - 1] = ("val", Nat(g_val))
        if g_val < tgt.n:
            raise ReplayError(
                f"reduction pair function too small: g gave {g_val}, "
                f"norm needs {tgt.n}"
            )

    def _target_child_index(self, term: Term) -> int:
        for j, child in enumerate(self.target.args, start=1):
            if child == term:
                return j
        raise ReplayError(
            f"norm value {render_term(term)} is not a direct child of "
            f"{render_term(self.target)}"
        )

    def _step_value(self, q: int, val: NormValue, tgt: NormValue) -> None:
        if isinstance(val, Nat):
            if isinstance(tgt, Nat):
                if val.n > tgt.n:
                    self._strip(q, val)
                    return
                raise ReplayError(
                    f"slot {q} would need to grow from {val.n} to {tgt.n}"
                )
            if tgt is BOT:
                if val.n > 0:
                    self._strip(q, val)
                else:
                    self._move(q, "4", ("val", BOT))
                return
            raise ReplayError(f"no move from {val} toward a term value")
        if isinstance(val, Trm):
            if isinstance(tgt, Trm):
                kind, payload = _chain_first_step(self.ctx, val.term, tgt.term)
                if kind == "child":
                    j, child = payload
                    self.descend(q, j, Trm(child))
                    return
                self._inplace(q, val.term, payload)
                return
            if tgt is BOT or (isinstance(tgt, Nat) and tgt.n == 0):
                self._move(q, "3", ("val", Nat(0)))
                return
            raise ReplayError(f"no move from a term value toward {tgt}")
        raise ReplayError(f"slot {q} is bottom but the target is {tgt}")

    def _strip(self, q: int, val: Nat) -> None:
        self._move(q, "1", ("val", Nat(val.n - 1)))

    def _move(self, q: int, schema: str, new_state) -> None:
        name = f"{schema}_{q}"
        self.builder.apply(name, self.pos)
        for _ in range(self.C):
            self.builder.apply("10_1", self.pos)
        self.states[q - 1] = new_state
        mat = self.default_materializer()
        for later in range(q + 1, self.d + 1):
            self.states[later - 1] = ("N", mat)

    def descend(self, q: int, j: int, new_value: NormValue) -> None:
        self.builder.apply(f"2_{q}_{j}", self.pos)
        for _ in range(self.C):
            self.builder.apply("10_1", self.pos)
        self.states[q - 1] = ("val", new_value)
        mat = self.default_materializer()
        for later in range(q + 1, self.d + 1):
            self.states[later - 1] = ("N", mat)

    def _inplace(self, q: int, a: Term, b: Term) -> None:
        _sim_step_embedded(self.ctx, self.builder, self.pos + (q,), a, b)
        self.states[q - 1] = ("val", Trm(b))


def _eval_g(builder: DerivationBuilder, pos: Position, sys: SimSystem) -> int:
    """Evaluate g(numeral) at pos with the evaluator rules; returns the value."""
    names = ("g", "plus_0", "plus_s", "mult_0", "mult_s")
    rules = [(n, sys.rule(n)) for n in names]
    rule_list = [r for _, r in rules]
    for _ in range(10_000_000):
        value = sys.numeral_value(builder.at(pos))
        if value is not None:
            return value
        succ = kernel.successors(builder.at(pos), rule_list)
        if not succ:
            raise ReplayError("evaluator got stuck before reaching a numeral")
        idx, rel, _ = succ[0]
        builder.apply(names[idx - 1], pos + rel)
    raise ReplayError("evaluator did not terminate")


def _chain_first_step(ctx: TranslationContext, a: Term, b: Term):
    """First step of a witness chain a (->R U direct-child)+ b.

    Returns ("child", (j, child)) or ("R", successor).  Breadth-first search
    bounded by the context fuel; raises when b is unreachable (the compared
    norm values were not actually ordered).
    """
    if a == b:
        raise ReplayError("no chain needed between equal terms")
    rules = list(ctx.trs.rules)
    seen = {a}
    frontier: list[tuple[Term, tuple]] = [(a, ())]
    budget = ctx.fuel.max_nodes
    while frontier:
        next_frontier = []
        for term, first in frontier:
            moves = []
            if type(term) is App:
                moves.extend(
                    ("child", (j, child))
                    for j, child in enumerate(term.args, start=1)
                )
            moves.extend(
                ("R", res) for _, _, res in kernel.successors(term, rules)
            )
            for kind, payload in moves:
                nxt = payload[1] if kind == "child" else payload
                step = first or (kind, payload)
                if nxt == b:
                    return step
                if nxt not in seen:
                    if len(seen) >= budget:
                        raise IndeterminateError("chain search ran out of fuel")
                    seen.add(nxt)
                    next_frontier.append((nxt, step))
        frontier = next_frontier
    raise ReplayError(
        f"{render_term(b)} is not reachable from {render_term(a)} "
        "by rewriting and subterms"
    )



# ---------------------------------------------------------------------------
# Step lemma replay


def simulate_step(s: Term, t: Term, ctx: TranslationContext) -> SimDerivation:
    """Derivation translate(s) ->+ translate(t) for a single step s ->R t."""
    if not is_ground(s):
        raise ValueError("simulate_step requires a ground start term")
    start = ctx.translate(s)
    builder = DerivationBuilder(ctx.sys, start)
    _sim_step_embedded(ctx, builder, (), s, t)
    if builder.current != ctx.translate(t):
        raise ReplayError("step replay did not reach the exact translation")
    if not builder.steps:
        raise ReplayError("step replay is empty")
    return builder.derivation(start)


def _sim_step_embedded(
    ctx: TranslationContext, builder: DerivationBuilder, pos: Position, s: Term, t: Term
) -> None:
    """Rewrite tr(s) at pos into tr(t), where s ->R t in one step."""
    step = None
    for idx, rel, res in kernel.successors(s, list(ctx.trs.rules)):
        if res == t:
            step = (idx, rel)
            break
    if step is None:
        raise ValueError(
            f"{render_term(s)} does not rewrite to {render_term(t)} in one step"
        )
    rule_idx, rel = step
    if rel == ():
        _sim_root_step(ctx, builder, pos, s, t, ctx.trs.rules[rule_idx - 1])
        return
    k = rel[0]
    _sim_step_embedded(ctx, builder, pos + (ctx.d + k,), s.args[k - 1], t.args[k - 1])
    states = [("val", v) for v in ctx.norms.norm_vector(s)]
    _PrefixFixer(ctx, builder, pos, states, t).run()


def _find_occurrence(s: Term, t: Term) -> Optional[Position]:
    for p, sub in subterms(s):
        if p and sub == t:
            return p
    return None


def _projection_route(l_args: list, u_val: Term) -> Optional[Position]:
    """Route (child index, then positions) projecting u_val out of the redex."""
    for m, arg in enumerate(l_args, start=1):
        for p, sub in subterms(arg):
            if sub == u_val:
                return (m,) + p
    return None


def _collect_buildables(ctx, u, sigma, l_args, acc):
    """Pattern subterms of the right-hand side that must be constructed
    (everything that cannot be projected out of the redex)."""
    u_val = kernel.substitute(u, sigma)
    if _projection_route(l_args, u_val) is not None:
        return
    if type(u) is Var:
        raise ReplayError(
            f"variable {u.name} does not occur inside the redex arguments"
        )
    acc.append((u, u_val))
    for child in u.args:
        _collect_buildables(ctx, child, sigma, l_args, acc)


def _first_diff(v, w) -> Optional[int]:
    for q, (a, b) in enumerate(zip(v, w), start=1):
        if not _norm_equal(a, b):
            return q
    return None


def _reaches_or_equal(ctx: TranslationContext, a: Term, b: Term) -> bool:
    return a == b or ctx.norms.rewrite_or_subterm_reaches(a, b)


def _sim_root_step(
    ctx: TranslationContext,
    builder: DerivationBuilder,
    pos: Position,
    s: Term,
    t: Term,
    rule: Rule,
) -> None:
    # A created term that already occurs inside the old one is projected out.
    occurrence = _find_occurrence(s, t)
    if occurrence is not None:
        for c in occurrence:
            builder.apply(f"10_{c}", pos)
        return

    sigma = kernel.match(rule.lhs, s)
    if sigma is None:
        raise ReplayError("applied rule does not match the start term")
    l_args = list(s.args)
    v = list(ctx.norms.norm_vector(s))

    buildables: list[tuple[Term, Term]] = []
    _collect_buildables(ctx, rule.rhs, sigma, l_args, buildables)
    diffs = []
    for _, u_val in buildables:
        q = _first_diff(v, ctx.norms.norm_vector(u_val))
        if q is None:
            raise ReplayError(
                f"no norm decrease toward {render_term(u_val)}; "
                "the strict decrease lemma does not cover this step"
            )
        diffs.append(q)
    q = max(diffs)

    # Targets that constrain the value the entry leaves in slot q.
    targets_q = [
        ctx.norms.norm_vector(u_val)[q - 1]
        for (_, u_val), dq in zip(buildables, diffs)
        if dq == q
    ]
    prefix = _enter_tower(ctx, builder, pos, v, q, targets_q)
    _build_pattern(ctx, builder, pos, rule.rhs, ctx.C, sigma, l_args, prefix, t)


def _enter_tower(ctx, builder, pos, v, q, targets_q):
    """Apply one norm-decreasing rule at slot q of the translated start term,
    entering the M-tower; returns the prefix slot states (length q)."""
    prefix = [("val", val) for val in v[: q - 1]]
    vq = v[q - 1]
    trm_targets = [tgt.term for tgt in targets_q if isinstance(tgt, Trm)]
    for _ in range(10_000):
        if isinstance(vq, Nat):
            if trm_targets:
                raise ReplayError("a natural slot cannot decrease to a term value")
            if vq.n >= 1:
                builder.apply(f"1_{q}", pos)
                prefix.append(("val", Nat(vq.n - 1)))
            else:
                builder.apply(f"4_{q}", pos)
                prefix.append(("val", BOT))
            return prefix
        if vq is BOT:
            raise ReplayError(f"slot {q} holds bottom before a root step")
        if not trm_targets:
            builder.apply(f"3_{q}", pos)
            prefix.append(("val", Nat(0)))
            return prefix
        # Term-valued targets: step toward a position from which every
        # target stays reachable, preferring child descents (they reset
        # the tail slots through the tower).
        a = vq.term
        chosen = None
        for j, child in enumerate(a.args, start=1):
            if all(_reaches_or_equal(ctx, child, b) for b in trm_targets):
                chosen = ("child", j, child)
                break
        if chosen is None:
            for _, _, succ in kernel.successors(a, list(ctx.trs.rules)):
                if all(_reaches_or_equal(ctx, succ, b) for b in trm_targets):
                    chosen = ("R", succ)
                    break
        if chosen is None:
            raise ReplayError(
                f"cannot step slot {q} while keeping all term targets reachable"
            )
        if chosen[0] == "child":
            builder.apply(f"2_{q}_{chosen[1]}", pos)
            prefix.append(("val", Trm(chosen[2])))
            return prefix
        _sim_step_embedded(ctx, builder, pos + (q,), a, chosen[1])
        vq = Trm(chosen[1])
        if all(b == chosen[1] for b in trm_targets):
            # Chain exhausted in place; the tower is entered one slot later
            # with whatever junk move is available there.
            prefix.append(("val", vq))
            if q >= ctx.d:
                raise ReplayError("no slot left to enter the tower")
            return _enter_tower(ctx, builder, pos, v, q + 1, [])
    raise ReplayError(f"entry at slot {q} did not converge")


def _build_pattern(ctx, builder, pos, u, level, sigma, l_args, prefix, final_target):
    """From the M^level tower instance at pos, construct the translation of
    u*sigma; final_target (the whole reduct) replaces it as the fixer target
    for the top-level call."""
    u_val = kernel.substitute(u, sigma)
    route = _projection_route(l_args, u_val)
    if route is not None and final_target is None:
        for _ in range(level):
            builder.apply("10_1", pos)
        for c in route:
            builder.apply(f"10_{c}", pos)
        return
    if type(u) is Var:
        raise ReplayError("unbound variable while building the right-hand side")

    k = u.depth  # pattern depth bounds the tower levels needed
    for _ in range(level - k):
        builder.apply("10_1", pos)
    m = len(u.args)
    c_sym = ctx.sys.sym("c")

    def ensure_child(j: int, at: Position) -> None:
        if j <= m:
            expected = ctx.translate(kernel.substitute(u.args[j - 1], sigma))
            if builder.at(at) != expected:
                _build_pattern(
                    ctx, builder, at, u.args[j - 1], k - 1, sigma, l_args,
                    prefix, None,
                )
        else:
            content = builder.at(at)
            if not (type(content) is App and content.sym == c_sym):
                builder.apply("9", at)

    for j in range(1, ctx.A + 1):
        ensure_child(j, pos + (ctx.d + j,))

    target = final_target if final_target is not None else u_val
    states = list(prefix) + [("N", ensure_child)] * (ctx.d - len(prefix))
    _PrefixFixer(ctx, builder, pos, states, target).run()


# ---------------------------------------------------------------------------
# Start lemma replay


def simulate_start(t: Term, ctx: TranslationContext) -> SimDerivation:
    """Derivation h^depth(t)(z) ->+ translate(t) for ground t."""
    if not is_ground(t):
        raise ValueError("simulate_start requires a ground term")
    h, z = ctx.sys.sym("h"), ctx.sys.sym("z")
    start: Term = App(z)
    for _ in range(t.depth):
        start = App(h, (start,))
    builder = DerivationBuilder(ctx.sys, start)
    _start_build(ctx, builder, (), t)
    if builder.current != ctx.translate(t):
        raise ReplayError("start replay did not reach the exact translation")
    return builder.derivation(start)


def _h_level(ctx, term: Term) -> Optional[int]:
    h, z = ctx.sys.sym("h"), ctx.sys.sym("z")
    level = 0
    while type(term) is App and term.sym == h:
        level += 1
        term = term.args[0]
    if type(term) is App and term.sym == z:
        return level
    return None


def _start_descend(ctx, builder, pos, down_to: int) -> None:
    level = _h_level(ctx, builder.at(pos))
    if level is None or level < down_to:
        raise ReplayError(f"expected a start tower at {pos}")
    for _ in range(level - down_to):
        builder.apply("11", pos)
        builder.apply("10_1", pos)


def _start_to_c(ctx, builder, pos) -> None:
    _start_descend(ctx, builder, pos, 0)
    builder.apply("12", pos)
    builder.apply("9", pos)


def _start_build(ctx, builder, pos, t: Term) -> None:
    """Rewrite h^depth(t)(z) at pos into translate(t)."""
    if t.depth == 0:
        builder.apply("12", pos)
    else:
        builder.apply("11", pos)
    m = len(t.args)
    c_sym = ctx.sys.sym("c")

    def ensure_child(j: int, at: Position) -> None:
        content = builder.at(at)
        if j <= m:
            child = t.args[j - 1]
            if content == ctx.translate(child):
                return
            _start_descend(ctx, builder, at, child.depth)
            _start_build(ctx, builder, at, child)
        else:
            if not (type(content) is App and content.sym == c_sym):
                _start_to_c(ctx, builder, at)

    for j in range(1, ctx.A + 1):
        ensure_child(j, pos + (ctx.d + j,))
    states = [("N", ensure_child)] * ctx.d
    _PrefixFixer(ctx, builder, pos, states, t).run()


# ---------------------------------------------------------------------------
# Derivation chaining (height comparison harness)


def simulate_derivation(
    ts: list[Term], ctx: TranslationContext
) -> SimDerivation:
    """Concatenated step replays along a rewrite sequence t0 -> t1 -> ..."""
    if not ts:
        raise ValueError("empty derivation")
    start = ctx.translate(ts[0])
    builder = DerivationBuilder(ctx.sys, start)
    for a, b in zip(ts, ts[1:]):
        _sim_step_embedded(ctx, builder, (), a, b)
        if builder.current != ctx.translate(b):
            raise ReplayError("chained replay lost the exact translation")
    return builder.derivation(start)
