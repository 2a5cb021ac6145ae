"""Lexicographic path order (left-to-right status) and precedence handling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .terms import App, Rule, Term, Var, render_term


class PrecedenceError(ValueError):
    pass


class Precedence:
    """Strict partial order on symbol names, stored transitively closed."""

    def __init__(self, pairs: Iterable[tuple[str, str]]):
        closure: set[tuple[str, str]] = set(pairs)
        changed = True
        while changed:
            changed = False
            for a, b in list(closure):
                for c, d in list(closure):
                    if b == c and (a, d) not in closure:
                        closure.add((a, d))
                        changed = True
        for a, b in closure:
            if a == b:
                raise PrecedenceError(f"precedence cycle through {a}")
        self._gt = frozenset(closure)

    def gt(self, a: str, b: str) -> bool:
        return (a, b) in self._gt

    def pairs(self) -> frozenset[tuple[str, str]]:
        return self._gt

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return pair in self._gt


def parse_precedence_lines(text: str) -> Precedence:
    """Parse (PREC f > g) lines."""
    pairs = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if not (line.startswith("(") and line.endswith(")")):
            raise PrecedenceError(f"bad precedence line: {raw!r}")
        fields = line[1:-1].split()
        if len(fields) != 4 or fields[0] != "PREC" or fields[2] != ">":
            raise PrecedenceError(f"bad precedence line: {raw!r}")
        pairs.append((fields[1], fields[3]))
    return Precedence(pairs)


def render_precedence(prec: Precedence) -> str:
    return "\n".join(f"(PREC {a} > {b})" for a, b in sorted(prec.pairs())) + "\n"


def lpo_greater(s: Term, t: Term, prec: Precedence, _memo=None) -> bool:
    """s >lpo t with left-to-right lexicographic status for all symbols."""
    if _memo is None:
        _memo = {}
    key = (s, t)
    cached = _memo.get(key)
    if cached is not None:
        return cached
    result = _lpo(s, t, prec, _memo)
    _memo[key] = result
    return result


def _lpo(s: Term, t: Term, prec: Precedence, memo) -> bool:
    if type(s) is Var:
        return False
    if type(t) is Var:
        # subterm case: s > x iff x occurs properly in s
        stack = list(s.args)
        while stack:
            x = stack.pop()
            if x == t:
                return True
            if type(x) is App:
                stack.extend(x.args)
        return False
    for arg in s.args:
        if arg == t or lpo_greater(arg, t, prec, memo):
            return True
    if prec.gt(s.sym.name, t.sym.name):
        return all(lpo_greater(s, u, prec, memo) for u in t.args)
    if s.sym == t.sym:
        for i, (a, b) in enumerate(zip(s.args, t.args)):
            if a == b:
                continue
            if not lpo_greater(a, b, prec, memo):
                return False
            return all(lpo_greater(s, u, prec, memo) for u in t.args[i + 1 :])
        return False  # equal argument tuples
    return False


@dataclass
class LpoRuleCheck:
    name: str
    rule: Rule
    oriented: bool


@dataclass
class LpoReport:
    checks: list[LpoRuleCheck] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.oriented for c in self.checks)

    def failing(self) -> list[LpoRuleCheck]:
        return [c for c in self.checks if not c.oriented]


def check_compatible(
    rules: Sequence[tuple[str, Rule]] | Sequence[Rule], prec: Precedence
) -> LpoReport:
    """Per-rule lhs >lpo rhs verdicts; overall success iff all strict."""
    report = LpoReport()
    memo: dict = {}
    for i, entry in enumerate(rules, start=1):
        if isinstance(entry, tuple):
            name, rule = entry
        else:
            name, rule = str(i), entry
        report.checks.append(
            LpoRuleCheck(name, rule, lpo_greater(rule.lhs, rule.rhs, prec, memo))
        )
    return report


def rsim_precedence(times_name: str = "times") -> Precedence:
    """Precedence orienting the generated simulating TRS.

    Deviations from the usual presentation, both required for orientation:
    times > s (the size-doubling rule recurses under s), and 0 above the
    inert constants so the bottom-introduction rules orient.
    """
    chain = [
        ("h", "f"),
        ("z", "f"),
        ("f", "choice"),
        ("choice", "g"),
        ("choice", "size"),
        ("g", times_name),
        ("size", times_name),
        (times_name, "s"),
        ("s", "0"),
        ("0", "c"),
        ("0", "bot"),
        ("g", "mult"),
        ("mult", "plus"),
        ("plus", "s"),
    ]
    return Precedence(chain)
