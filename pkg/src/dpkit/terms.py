"""First-order terms, rewrite rules, and rewrite systems.

Terms are immutable values with cached hash, size, and depth, so they can be
shared freely and used as dict keys in the exhaustive analyses.  Positions are
1-based tuples of child indices; the empty tuple is the root position.
"""

from __future__ import annotations

from typing import Iterator, Optional

CONSTRUCTOR = "constructor"
DEFINED = "defined"
MARKED = "marked"

MARK_SUFFIX = "#"


class TermError(ValueError):
    """Violation of a structural invariant (arity, rule shape, ...)."""


class Symbol:
    """Function symbol with a fixed arity and a kind within its TRS."""

    __slots__ = ("name", "arity", "kind", "_hash")

    def __init__(self, name: str, arity: int, kind: str = CONSTRUCTOR):
        if not name:
            raise TermError("symbol name must be nonempty")
        if arity < 0:
            raise TermError(f"negative arity for {name!r}")
        if kind not in (CONSTRUCTOR, DEFINED, MARKED):
            raise TermError(f"unknown symbol kind {kind!r}")
        self.name = name
        self.arity = arity
        self.kind = kind
        self._hash = hash((name, arity, kind))

    def __eq__(self, other):
        if self is other:
            return True
        return (
            type(other) is Symbol
            and self.name == other.name
            and self.arity == other.arity
            and self.kind == other.kind
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Symbol({self.name!r}, {self.arity}, {self.kind!r})"


class Var:
    """Variable occurrence."""

    __slots__ = ("name", "_hash")

    size = 1
    depth = 0
    is_var = True

    def __init__(self, name: str):
        if not name:
            raise TermError("variable name must be nonempty")
        self.name = name
        self._hash = hash(("var", name))

    def __eq__(self, other):
        if self is other:
            return True
        return type(other) is Var and self.name == other.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r})"

    def __str__(self):
        return self.name


class App:
    """Application of a symbol to argument terms."""

    __slots__ = ("sym", "args", "size", "depth", "_hash")

    is_var = False

    def __init__(self, sym: Symbol, args: tuple = ()):
        if len(args) != sym.arity:
            raise TermError(
                f"{sym.name} has arity {sym.arity}, got {len(args)} arguments"
            )
        self.sym = sym
        self.args = args
        size = 1
        depth = 0
        h = sym._hash
        for a in args:
            size += a.size
            if a.depth >= depth:
                depth = a.depth + 1
            h = (h * 1000003) ^ a._hash
        self.size = size
        self.depth = depth
        self._hash = h

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not App or self._hash != other._hash:
            return False
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if type(a) is App:
                if (
                    type(b) is not App
                    or a._hash != b._hash
                    or a.sym != b.sym
                ):
                    return False
                stack.extend(zip(a.args, b.args))
            else:
                if type(b) is not Var or a.name != b.name:
                    return False
        return True

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"App({self.sym.name!r}, {self.args!r})"

    def __str__(self):
        return render_term(self)


Term = Var | App
Position = tuple[int, ...]
Substitution = dict[str, "Term"]

EPSILON: Position = ()


def render_term(t: Term) -> str:
    """Canonical text form, parseable by the TRS file grammar."""
    out = []
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, str):
            out.append(x)
        elif type(x) is Var:
            out.append(x.name)
        elif not x.args:
            out.append(x.sym.name)
        else:
            out.append(x.sym.name + "(")
            stack.append(")")
            for i, a in enumerate(reversed(x.args)):
                stack.append(a)
                if i != len(x.args) - 1:
                    stack.append(",")
    return "".join(out)


def subterm_at(t: Term, pos: Position) -> Term:
    for i in pos:
        if type(t) is Var or i < 1 or i > len(t.args):
            raise TermError(f"position {pos} not valid in {render_term(t)}")
        t = t.args[i - 1]
    return t


def replace_at(t: Term, pos: Position, new: Term) -> Term:
    if not pos:
        return new
    if type(t) is Var:
        raise TermError(f"position {pos} not valid in a variable")
    i = pos[0]
    args = t.args
    if i < 1 or i > len(args):
        raise TermError(f"position {pos} not valid in {render_term(t)}")
    child = replace_at(args[i - 1], pos[1:], new)
    return App(t.sym, args[: i - 1] + (child,) + args[i:])


def positions(t: Term) -> Iterator[Position]:
    """All positions of t in preorder (root first, children left to right)."""
    stack = [((), t)]
    while stack:
        pos, x = stack.pop()
        yield pos
        if type(x) is App:
            for i in range(len(x.args), 0, -1):
                stack.append((pos + (i,), x.args[i - 1]))


def subterms(t: Term) -> Iterator[tuple[Position, Term]]:
    stack = [((), t)]
    while stack:
        pos, x = stack.pop()
        yield pos, x
        if type(x) is App:
            for i in range(len(x.args), 0, -1):
                stack.append((pos + (i,), x.args[i - 1]))


def proper_subterm(u: Term, t: Term) -> bool:
    """True iff u occurs in t at some non-root position."""
    stack = []
    if type(t) is App:
        stack.extend(t.args)
    while stack:
        x = stack.pop()
        if x == u:
            return True
        if type(x) is App:
            stack.extend(x.args)
    return False


def variables(t: Term) -> set[str]:
    names = set()
    stack = [t]
    while stack:
        x = stack.pop()
        if type(x) is Var:
            names.add(x.name)
        else:
            stack.extend(x.args)
    return names


def is_ground(t: Term) -> bool:
    stack = [t]
    while stack:
        x = stack.pop()
        if type(x) is Var:
            return False
        stack.extend(x.args)
    return True


def rename_variables(t: Term, suffix: str) -> Term:
    """Append suffix to every variable name (used to make terms variable-disjoint)."""
    if type(t) is Var:
        return Var(t.name + suffix)
    return App(t.sym, tuple(rename_variables(a, suffix) for a in t.args))


_marked_cache: dict[tuple[str, int], Symbol] = {}


def marked_symbol(sym: Symbol) -> Symbol:
    """The dependency pair symbol f# for f, with the same arity."""
    key = (sym.name, sym.arity)
    cached = _marked_cache.get(key)
    if cached is None:
        cached = Symbol(sym.name + MARK_SUFFIX, sym.arity, MARKED)
        _marked_cache[key] = cached
    return cached


def mark_root(t: Term) -> Term:
    """t# per the dependency pair construction; variables are left alone."""
    if type(t) is Var:
        return t
    return App(marked_symbol(t.sym), t.args)


class Rule:
    """Rewrite rule l -> r with the standard variable conditions."""

    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs: Term, rhs: Term):
        if type(lhs) is Var:
            raise TermError("left-hand side of a rule must not be a variable")
        extra = variables(rhs) - variables(lhs)
        if extra:
            raise TermError(
                f"right-hand side variables {sorted(extra)} do not occur in the left-hand side"
            )
        self.lhs = lhs
        self.rhs = rhs

    def __eq__(self, other):
        return (
            type(other) is Rule and self.lhs == other.lhs and self.rhs == other.rhs
        )

    def __hash__(self):
        return hash((self.lhs, self.rhs))

    def __repr__(self):
        return f"Rule({render_term(self.lhs)} -> {render_term(self.rhs)})"

    def __str__(self):
        return f"{render_term(self.lhs)} -> {render_term(self.rhs)}"


class Trs:
    """Finite TRS: a signature plus an ordered list of rules.

    A symbol is defined iff it is the root of some left-hand side; this is
    checked at construction.
    """

    __slots__ = ("symbols", "rules")

    def __init__(self, symbols: dict[str, Symbol], rules: tuple[Rule, ...]):
        defined = {r.lhs.sym.name for r in rules}
        for name, sym in symbols.items():
            if name != sym.name:
                raise TermError(f"signature key {name!r} does not match {sym.name!r}")
            if sym.kind == DEFINED and name not in defined:
                raise TermError(f"{name} marked defined but never a lhs root")
            if sym.kind == CONSTRUCTOR and name in defined:
                raise TermError(f"{name} marked constructor but is a lhs root")
        self.symbols = dict(symbols)
        self.rules = tuple(rules)

    @property
    def defined_symbols(self) -> list[Symbol]:
        return [s for s in self.symbols.values() if s.kind == DEFINED]

    @property
    def constructor_symbols(self) -> list[Symbol]:
        return [s for s in self.symbols.values() if s.kind == CONSTRUCTOR]

    def symbol(self, name: str) -> Optional[Symbol]:
        return self.symbols.get(name)

    @property
    def max_arity(self) -> int:
        return max((s.arity for s in self.symbols.values()), default=0)

    def has_constant(self) -> bool:
        return any(s.arity == 0 for s in self.symbols.values())

    def __repr__(self):
        return f"Trs({len(self.rules)} rules over {sorted(self.symbols)})"


def make_trs(rules: list[Rule]) -> Trs:
    """Build a TRS from rules, inferring the signature and symbol kinds."""
    defined = {r.lhs.sym.name for r in rules}
    arities: dict[str, int] = {}
    marked: set[str] = set()
    for rule in rules:
        for side in (rule.lhs, rule.rhs):
            for _, sub in subterms(side):
                if type(sub) is Var:
                    continue
                seen = arities.get(sub.sym.name)
                if seen is not None and seen != sub.sym.arity:
                    raise TermError(
                        f"inconsistent arity for {sub.sym.name}: "
                        f"{seen} vs {sub.sym.arity}"
                    )
                arities[sub.sym.name] = sub.sym.arity
                if sub.sym.kind == MARKED:
                    marked.add(sub.sym.name)
    symbols = {
        name: Symbol(
            name,
            arity,
            MARKED if name in marked else (DEFINED if name in defined else CONSTRUCTOR),
        )
        for name, arity in arities.items()
    }
    normalized = tuple(
        Rule(_with_signature(r.lhs, symbols), _with_signature(r.rhs, symbols))
        for r in rules
    )
    return Trs(symbols, normalized)


def _with_signature(t: Term, symbols: dict[str, Symbol]) -> Term:
    if type(t) is Var:
        return t
    sym = symbols.get(t.sym.name, t.sym)
    return App(sym, tuple(_with_signature(a, symbols) for a in t.args))


def fresh_constant(symbols: dict[str, Symbol], base: str = "_") -> Symbol:
    """An inert constant not present in the signature (variable stand-in)."""
    name = base
    while name in symbols:
        name += "_"
    return Symbol(name, 0, CONSTRUCTOR)


def unify_terms(s: Term, t: Term) -> Optional[Substitution]:
    """Most general unifier with occurs check, or None.

    Symmetric up to renaming; callers wanting textbook behaviour should pass
    variable-disjoint terms.
    """
    bindings: dict[str, Term] = {}

    def walk(u: Term) -> Term:
        while type(u) is Var:
            b = bindings.get(u.name)
            if b is None:
                return u
            u = b
        return u

    def occurs(name: str, u: Term) -> bool:
        stack = [u]
        while stack:
            v = walk(stack.pop())
            if type(v) is Var:
                if v.name == name:
                    return True
            else:
                stack.extend(v.args)
        return False

    stack = [(s, t)]
    while stack:
        a, b = stack.pop()
        a = walk(a)
        b = walk(b)
        if type(a) is Var:
            if type(b) is Var and b.name == a.name:
                continue
            if occurs(a.name, b):
                return None
            bindings[a.name] = b
        elif type(b) is Var:
            if occurs(b.name, a):
                return None
            bindings[b.name] = a
        else:
            if a.sym != b.sym:
                return None
            stack.extend(zip(a.args, b.args))

    def resolve(u: Term) -> Term:
        u = walk(u)
        if type(u) is Var:
            return u
        return App(u.sym, tuple(resolve(x) for x in u.args))

    return {name: resolve(Var(name)) for name in bindings}
