"""Pure-Python term kernel: matching, substitution, one-step rewriting,
and bounded reachability closure.

These four operations dominate the runtime of every exhaustive analysis in
the package; dpkit._kernel_cy is a compiled twin with identical semantics.
"""

from __future__ import annotations

from .terms import App, Rule, Term, Var

ANYWHERE = "anywhere"
ROOT_ONLY = "root-only"
BELOW_ROOT = "below-root-only"

_INF = float("inf")


def match(pattern: Term, subject: Term):
    """Most general sigma with pattern*sigma == subject, or None."""
    sub = {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if type(p) is Var:
            bound = sub.get(p.name)
            if bound is None:
                sub[p.name] = s
            elif bound != s:
                return None
        else:
            if type(s) is Var or p.sym != s.sym:
                return None
            stack.extend(zip(p.args, s.args))
    return sub


def substitute(t: Term, sub: dict) -> Term:
    if type(t) is Var:
        return sub.get(t.name, t)
    if not t.args:
        return t
    return App(t.sym, tuple(substitute(a, sub) for a in t.args))


def _poskey(pos: tuple) -> tuple:
    # Leftmost-innermost order: longer positions beat their prefixes.
    return pos + (_INF,)


def successors(t: Term, rules: list[Rule], scope: str = ANYWHERE) -> list:
    """One-step successors of t as (rule-index, position, result) triples.

    Rule indices are 1-based.  The result is sorted by leftmost-innermost
    position, then rule index.
    """
    found = []
    if scope == ROOT_ONLY:
        spots = [((), t)] if type(t) is App else []
    else:
        spots = []
        stack = [((), t)]
        while stack:
            pos, x = stack.pop()
            if type(x) is App:
                if pos or scope != BELOW_ROOT:
                    spots.append((pos, x))
                for i in range(len(x.args), 0, -1):
                    stack.append((pos + (i,), x.args[i - 1]))
    for pos, sub in spots:
        for idx, rule in enumerate(rules):
            sigma = match(rule.lhs, sub)
            if sigma is not None:
                result = _replace(t, pos, substitute(rule.rhs, sigma))
                found.append((idx + 1, pos, result))
    found.sort(key=lambda e: (_poskey(e[1]), e[0]))
    return found


def _replace(t: Term, pos: tuple, new: Term) -> Term:
    if not pos:
        return new
    i = pos[0]
    args = t.args
    return App(t.sym, args[: i - 1] + (_replace(args[i - 1], pos[1:], new),) + args[i:])


def has_redex(t: Term, rules: list[Rule]) -> bool:
    """True iff some rule matches some subterm of t."""
    stack = [t]
    while stack:
        x = stack.pop()
        if type(x) is App:
            for rule in rules:
                if match(rule.lhs, x) is not None:
                    return True
            stack.extend(x.args)
    return False


def reach(start: Term, groups: list, max_nodes: int, max_depth: int):
    """Breadth-first closure of {start} under the union of the rule groups.

    groups is a list of (kind, rules) pairs; edges are labelled with the kind
    of the group that produced them.  Returns (nodes, edges, depths,
    exhausted) where nodes is the insertion-ordered term list, edges is a set
    of (src_index, kind, dst_index), and exhausted is False iff a fuel bound
    was hit before the closure was complete.
    """
    nodes = [start]
    index = {start: 0}
    depths = [0]
    edges = set()
    exhausted = True
    frontier = [0]
    depth = 0
    while frontier:
        if depth >= max_depth:
            # Nodes at the cutoff may still have unexplored successors.
            for i in frontier:
                if any(successors(nodes[i], rules) for _, rules in groups):
                    exhausted = False
                    break
            break
        next_frontier = []
        for i in frontier:
            t = nodes[i]
            for kind, rules in groups:
                for _, _, result in successors(t, rules):
                    j = index.get(result)
                    if j is None:
                        if len(nodes) >= max_nodes:
                            exhausted = False
                            edges.add((i, kind, -1))
                            continue
                        j = len(nodes)
                        index[result] = j
                        nodes.append(result)
                        depths.append(depth + 1)
                        next_frontier.append(j)
                    edges.add((i, kind, j))
        if not exhausted:
            break
        frontier = next_frontier
        depth += 1
    edges = {e for e in edges if e[2] >= 0}
    return nodes, edges, depths, exhausted
