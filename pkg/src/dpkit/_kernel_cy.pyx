# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of dpkit._kernel_py with identical semantics.

Operates on the same Var/App/Symbol objects; the speedup comes from typed
loops and C-level call overhead in the closure-heavy analyses.
"""

from .terms import App, Var

ANYWHERE = "anywhere"
ROOT_ONLY = "root-only"
BELOW_ROOT = "below-root-only"

_INF = float("inf")


def match(pattern, subject):
    """Most general sigma with pattern*sigma == subject, or None."""
    cdef dict sub = {}
    cdef list stack = [(pattern, subject)]
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


def substitute(t, dict sub):
    if type(t) is Var:
        return sub.get(t.name, t)
    if not t.args:
        return t
    return App(t.sym, tuple([substitute(a, sub) for a in t.args]))


def _replace(t, tuple pos, new):
    cdef int i
    if not pos:
        return new
    i = pos[0]
    args = t.args
    return App(t.sym, args[: i - 1] + (_replace(args[i - 1], pos[1:], new),) + args[i:])


def successors(t, list rules, str scope=ANYWHERE):
    """One-step successors of t as (rule-index, position, result) triples."""
    cdef list found = []
    cdef list spots
    cdef list stack
    cdef int i, idx
    cdef tuple pos
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
        idx = 0
        for rule in rules:
            idx += 1
            sigma = match(rule.lhs, sub)
            if sigma is not None:
                result = _replace(t, pos, substitute(rule.rhs, sigma))
                found.append((idx, pos, result))
    found.sort(key=_order_key)
    return found


def _order_key(entry):
    return (entry[1] + (_INF,), entry[0])


def has_redex(t, list rules):
    cdef list stack = [t]
    while stack:
        x = stack.pop()
        if type(x) is App:
            for rule in rules:
                if match(rule.lhs, x) is not None:
                    return True
            stack.extend(x.args)
    return False


def reach(start, list groups, int max_nodes, int max_depth):
    """Breadth-first closure of {start} under the union of the rule groups."""
    cdef list nodes = [start]
    cdef dict index = {start: 0}
    cdef list depths = [0]
    cdef set edges = set()
    cdef bint exhausted = True
    cdef list frontier = [0]
    cdef list next_frontier
    cdef int depth = 0
    cdef int i, j
    while frontier:
        if depth >= max_depth:
            for i in frontier:
                for _, rules in groups:
                    if successors(nodes[i], rules):
                        exhausted = False
                        break
                if not exhausted:
                    break
            break
        next_frontier = []
        for i in frontier:
            t = nodes[i]
            for kind, rules in groups:
                for _, _, result in successors(t, rules):
                    jj = index.get(result)
                    if jj is None:
                        if len(nodes) >= max_nodes:
                            exhausted = False
                            continue
                        j = len(nodes)
                        index[result] = j
                        nodes.append(result)
                        depths.append(depth + 1)
                        next_frontier.append(j)
                        edges.add((i, kind, j))
                    else:
                        edges.add((i, kind, jj))
        if not exhausted:
            break
        frontier = next_frontier
        depth += 1
    return nodes, edges, depths, exhausted
