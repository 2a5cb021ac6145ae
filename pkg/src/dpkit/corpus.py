"""Built-in example systems with their canonical proof artifacts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .dpframe import Artifact, LinearInterpretation, RpFunction, SimpleProjection
from .parser import parse_trs
from .terms import App, Rule, Symbol, Term, Trs, Var, make_trs

RSACK_TEXT = """\
(VAR x y)
(RULES
  Ack(0,y) -> s(y)
  Ack(s(x),0) -> Ack(x,s(0))
  Ack(s(x),s(y)) -> Ack(x,Ack(s(x),y))
)
"""

RSSUP_TEXT = """\
(VAR x y)
(RULES
  d(0) -> 0
  d(s(x)) -> s(s(d(x)))
  e(s(x),y) -> e(x,d(y))
  sup(s(x),e(0,y)) -> sup(x,e(y,s(0)))
)
"""

RSDIETER_TEXT = """\
(VAR x y z w)
(RULES
  circ(i(x),circ(y,z)) -> circ(x,circ(i(i(y)),z))
  circ(i(x),circ(y,circ(z,w))) -> circ(x,circ(z,circ(y,w)))
)
"""


@dataclass
class CorpusEntry:
    name: str
    trs: Trs
    artifacts: tuple[Artifact, ...]
    g: RpFunction
    k: Optional[int] = None


def _rsack() -> CorpusEntry:
    return CorpusEntry(
        "rsack",
        parse_trs(RSACK_TEXT),
        (
            SimpleProjection({"Ack#": 1}, name="pi1"),
            SimpleProjection({"Ack#": 2}, name="pi2"),
        ),
        RpFunction((1,)),
    )


def _rsup() -> CorpusEntry:
    algebra_a = LinearInterpretation(
        {
            "d": ((2,), 0),
            "e": ((0, 0), 0),
            "sup": ((0, 0), 0),
            "s": ((1,), 1),
            "0": ((), 0),
            "d#": ((1,), 0),
            "e#": ((1, 0), 0),
            "sup#": ((1, 0), 0),
        },
        name="A",
    )
    return CorpusEntry(
        "rsup", parse_trs(RSSUP_TEXT), (algebra_a,), RpFunction((5, 1))
    )


def _rsdieter() -> CorpusEntry:
    algebra_a = LinearInterpretation(
        {"circ#": ((0, 1), 0), "circ": ((0, 1), 1), "i": ((0,), 0)},
        name="A",
    )
    algebra_b = LinearInterpretation(
        {"circ#": ((1, 0), 0), "circ": ((0, 0), 0), "i": ((1,), 1)},
        name="B",
    )
    return CorpusEntry(
        "rsdieter",
        parse_trs(RSDIETER_TEXT),
        (algebra_a, algebra_b),
        RpFunction((2, 1)),
    )


def _rspeter(k: int) -> CorpusEntry:
    """k-ary Ackermann system; the last rule is a schema over 1 <= i <= k-2."""
    if k < 2:
        raise ValueError("rspeter requires k >= 2")
    ack = Symbol("Ack", k)
    s = Symbol("s", 1)
    zero = Symbol("0", 0)

    def num0() -> Term:
        return App(zero)

    def sv(t: Term) -> Term:
        return App(s, (t,))

    ls = [Var(f"l{i}") for i in range(1, k - 1)]
    m, n = Var("m"), Var("n")
    rules = [
        Rule(App(ack, tuple([num0()] * (k - 1) + [n])), sv(n)),
        Rule(
            App(ack, tuple(ls + [sv(m), num0()])),
            App(ack, tuple(ls + [m, sv(num0())])),
        ),
        Rule(
            App(ack, tuple(ls + [sv(m), sv(n)])),
            App(ack, tuple(ls + [m, App(ack, tuple(ls + [sv(m), n]))])),
        ),
    ]
    for i in range(1, k - 1):
        lhs = App(
            ack,
            tuple(ls[: i - 1] + [sv(ls[i - 1])] + [num0()] * (k - 1 - i) + [n]),
        )
        rhs = App(
            ack,
            tuple(ls[: i - 1] + [ls[i - 1], n] + [num0()] * (k - 2 - i) + [n]),
        )
        rules.append(Rule(lhs, rhs))
    trs = make_trs(rules)
    return CorpusEntry("rspeter", trs, (), RpFunction((1,)), k=k)


def builtin(name: str, k: Optional[int] = None) -> CorpusEntry:
    if name == "rsack":
        entry = _rsack()
    elif name in ("rsup", "rssup"):
        entry = _rsup()
    elif name == "rsdieter":
        entry = _rsdieter()
    elif name == "rspeter":
        entry = _rspeter(2 if k is None else k)
    else:
        raise KeyError(f"unknown builtin {name!r}")
    if k is not None and name != "rspeter":
        raise ValueError(f"{name} takes no parameter")
    return entry


BUILTIN_NAMES = ("rsack", "rsdieter", "rsup", "rspeter")
