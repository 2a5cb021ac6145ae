"""Parser and printer for the old-style TPDB rule format.

Grammar:
    file := decl*
    decl := "(" "VAR" ident* ")" | "(" "RULES" rule* ")"
    rule := term "->" term
    term := ident | ident "(" term ("," term)* ")"

Identifiers match [A-Za-z0-9_#'+*^-]+ and never contain the arrow token.
Symbols not declared VAR are function symbols; arities are inferred from the
first use and must be consistent.
"""

from __future__ import annotations

import re

from .terms import (
    CONSTRUCTOR,
    DEFINED,
    MARKED,
    App,
    Rule,
    Symbol,
    Term,
    TermError,
    Trs,
    Var,
    render_term,
    subterms,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_TOKEN = re.compile(r"->|(?:-(?!>)|[A-Za-z0-9_#'+*^])+|[(),]")
_SKIP = re.compile(r"\s+")


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        m = _SKIP.match(text, i)
        if m:
            chunk = m.group()
            newlines = chunk.count("\n")
            if newlines:
                line += newlines
                col = len(chunk) - chunk.rfind("\n")
            else:
                col += len(chunk)
            i = m.end()
            continue
        m = _TOKEN.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", line, col)
        tokens.append((m.group(), line, col))
        col += m.end() - i
        i = m.end()
    return tokens


class _Tokens:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][0]
        return None

    def next(self):
        if self.pos >= len(self.tokens):
            last = self.tokens[-1] if self.tokens else ("", 1, 1)
            raise ParseError("unexpected end of input", last[1], last[2])
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value):
        tok, line, col = self.next()
        if tok != value:
            raise ParseError(f"expected {value!r}, got {tok!r}", line, col)
        return tok, line, col

    def location(self):
        if self.pos < len(self.tokens):
            _, line, col = self.tokens[self.pos]
            return line, col
        if self.tokens:
            _, line, col = self.tokens[-1]
            return line, col
        return 1, 1


_IDENT = re.compile(r"(?:-(?!>)|[A-Za-z0-9_#'+*^])+$")


def _is_ident(tok: str) -> bool:
    return tok not in ("(", ")", ",", "->") and _IDENT.match(tok) is not None


def _parse_raw_term(ts: _Tokens):
    """Raw tree: ("app", name, children, line, col); variables resolved later."""
    tok, line, col = ts.next()
    if not _is_ident(tok):
        raise ParseError(f"expected a term, got {tok!r}", line, col)
    children = []
    if ts.peek() == "(":
        ts.expect("(")
        children.append(_parse_raw_term(ts))
        while ts.peek() == ",":
            ts.expect(",")
            children.append(_parse_raw_term(ts))
        ts.expect(")")
    return (tok, children, line, col)


def parse_trs(text: str) -> Trs:
    ts = _Tokens(_tokenize(text))
    var_names: set[str] = set()
    raw_rules = []
    while ts.peek() is not None:
        ts.expect("(")
        kw, line, col = ts.next()
        if kw == "VAR":
            while ts.peek() not in (")", None):
                tok, line, col = ts.next()
                if not _is_ident(tok):
                    raise ParseError(f"bad variable name {tok!r}", line, col)
                var_names.add(tok)
            ts.expect(")")
        elif kw == "RULES":
            while ts.peek() not in (")", None):
                lhs = _parse_raw_term(ts)
                ts.expect("->")
                rhs = _parse_raw_term(ts)
                raw_rules.append((lhs, rhs))
            ts.expect(")")
        else:
            raise ParseError(f"unknown declaration {kw!r}", line, col)

    arities: dict[str, int] = {}

    def scan(raw):
        name, children, line, col = raw
        if name in var_names:
            if children:
                raise ParseError(f"variable {name} used with arguments", line, col)
            return
        seen = arities.get(name)
        if seen is not None and seen != len(children):
            raise ParseError(
                f"inconsistent arity for {name}: {seen} vs {len(children)}", line, col
            )
        arities[name] = len(children)
        for c in children:
            scan(c)

    for lhs, rhs in raw_rules:
        scan(lhs)
        scan(rhs)

    defined = {
        lhs[0] for lhs, _ in raw_rules if lhs[0] not in var_names
    }
    symbols = {
        name: Symbol(
            name,
            arity,
            MARKED
            if name.endswith("#")
            else (DEFINED if name in defined else CONSTRUCTOR),
        )
        for name, arity in arities.items()
    }

    def build(raw) -> Term:
        name, children, _, _ = raw
        if name in var_names:
            return Var(name)
        return App(symbols[name], tuple(build(c) for c in children))

    rules = []
    for lhs_raw, rhs_raw in raw_rules:
        line, col = lhs_raw[2], lhs_raw[3]
        try:
            rules.append(Rule(build(lhs_raw), build(rhs_raw)))
        except TermError as exc:
            raise ParseError(str(exc), line, col) from exc
    return Trs(symbols, tuple(rules))


def parse_term(text: str, trs: Trs) -> Term:
    """Parse a standalone term against a TRS signature.

    Identifiers in the signature become function symbols (arity-checked);
    unknown nullary identifiers become variables.
    """
    ts = _Tokens(_tokenize(text))
    raw = _parse_raw_term(ts)
    if ts.peek() is not None:
        line, col = ts.location()
        raise ParseError("trailing input after term", line, col)

    def build(node) -> Term:
        name, children, line, col = node
        sym = trs.symbol(name)
        if sym is None:
            if children:
                raise ParseError(f"unknown function symbol {name}", line, col)
            return Var(name)
        if sym.arity != len(children):
            raise ParseError(
                f"{name} has arity {sym.arity}, got {len(children)} arguments",
                line,
                col,
            )
        return App(sym, tuple(build(c) for c in children))

    return build(raw)


def render_trs(trs: Trs, var_names: list[str] | None = None) -> str:
    """Emit a TRS in the file grammar; parse_trs round-trips the result."""
    if var_names is None:
        names: set[str] = set()
        for rule in trs.rules:
            for _, sub in subterms(rule.lhs):
                if type(sub) is Var:
                    names.add(sub.name)
        var_names = sorted(names)
    lines = []
    if var_names:
        lines.append("(VAR " + " ".join(var_names) + ")")
    lines.append("(RULES")
    for rule in trs.rules:
        lines.append(f"  {render_term(rule.lhs)} -> {render_term(rule.rhs)}")
    lines.append(")")
    return "\n".join(lines) + "\n"
