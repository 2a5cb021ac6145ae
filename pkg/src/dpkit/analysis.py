"""Reachability, relative normal-form tests, derivation heights, derivational
complexity at small sizes, and the k-ary Ackermann reference oracle.

Every exhaustive exploration carries an explicit Fuel; hitting fuel raises
IndeterminateError rather than silently truncating, and a cycle in the
explored relation raises NontermEvidenceError instead of looping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import kernel
from .terms import (
    App,
    Rule,
    Symbol,
    Term,
    Trs,
    fresh_constant,
    mark_root,
    render_term,
)


class IndeterminateError(RuntimeError):
    """Fuel was exhausted before the analysis could conclude."""


class NontermEvidenceError(RuntimeError):
    """A cycle (with a strict step, where applicable) was found."""


class RecursionBudgetError(RuntimeError):
    """The Ackermann evaluation exceeded its configured call budget."""


@dataclass(frozen=True)
class Fuel:
    max_nodes: int = 100_000
    max_depth: int = 10_000

    def __post_init__(self):
        if self.max_nodes <= 0 or self.max_depth <= 0:
            raise ValueError("fuel bounds must be positive")


STRICT = "strict"
WEAK = "weak"


@dataclass
class ReachGraph:
    """Explored fragment of a (relative) rewrite relation."""

    root: Term
    nodes: list[Term]
    edges: set[tuple[int, str, int]]
    depths: list[int]
    exhausted: bool
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {t: i for i, t in enumerate(self.nodes)}

    def index_of(self, t: Term) -> Optional[int]:
        return self._index.get(t)

    def __contains__(self, t: Term) -> bool:
        return t in self._index

    def __len__(self) -> int:
        return len(self.nodes)


def _explore(t: Term, groups, fuel: Fuel) -> ReachGraph:
    nodes, edges, depths, exhausted = kernel.reach(
        t, groups, fuel.max_nodes, fuel.max_depth
    )
    return ReachGraph(t, nodes, edges, depths, exhausted)


def reachable_set(t: Term, rules: Sequence[Rule], fuel: Fuel = Fuel()) -> ReachGraph:
    """Breadth-first closure of {t} under one-step rewriting."""
    return _explore(t, [(STRICT, list(rules))], fuel)


def relative_graph(
    t: Term, strict: Sequence[Rule], weak: Sequence[Rule], fuel: Fuel = Fuel()
) -> ReachGraph:
    return _explore(t, [(STRICT, list(strict)), (WEAK, list(weak))], fuel)


def is_nf_relative(
    t: Term, strict: Sequence[Rule], weak: Sequence[Rule], fuel: Fuel = Fuel()
) -> bool:
    """True iff no weak-reachable term has a strict redex (t in NF(strict/weak))."""
    strict = list(strict)
    graph = _explore(t, [(WEAK, list(weak))], fuel)
    for node in graph.nodes:
        if kernel.has_redex(node, strict):
            return False
    if not graph.exhausted:
        raise IndeterminateError(
            f"normal-form test for {render_term(t)} ran out of fuel"
        )
    return True


def _condense(n: int, edges: set[tuple[int, str, int]]):
    """Tarjan SCCs (iterative). Returns (scc_of, scc_count)."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for src, _, dst in edges:
        adj[src].append(dst)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    scc_of = [-1] * n
    counter = 0
    scc_count = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while pi < len(adj[v]):
                w = adj[v][pi]
                pi += 1
                if index[w] < 0:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    scc_of[w] = scc_count
                    if w == v:
                        break
                scc_count += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return scc_of, scc_count


def _longest_weighted_path(graph: ReachGraph, start: int) -> int:
    """Max number of strict edges on any path from start.

    Weak-only cycles are collapsed; a cycle through a strict edge raises
    NontermEvidenceError.
    """
    n = len(graph.nodes)
    scc_of, scc_count = _condense(n, graph.edges)
    cond_edges: dict[tuple[int, int], int] = {}
    for src, kind, dst in graph.edges:
        a, b = scc_of[src], scc_of[dst]
        w = 1 if kind == STRICT else 0
        if a == b:
            if w:
                raise NontermEvidenceError(
                    f"strict cycle reachable from {render_term(graph.root)} "
                    f"(e.g. through {render_term(graph.nodes[src])})"
                )
            continue
        key = (a, b)
        cond_edges[key] = max(cond_edges.get(key, 0), w)
    adj: list[list[tuple[int, int]]] = [[] for _ in range(scc_count)]
    indeg = [0] * scc_count
    for (a, b), w in cond_edges.items():
        adj[a].append((b, w))
        indeg[b] += 1
    order = [i for i in range(scc_count) if indeg[i] == 0]
    topo = []
    indeg = list(indeg)
    queue = list(order)
    while queue:
        a = queue.pop()
        topo.append(a)
        for b, _ in adj[a]:
            indeg[b] -= 1
            if indeg[b] == 0:
                queue.append(b)
    best = {scc_of[start]: 0}
    for a in topo:
        if a not in best:
            continue
        for b, w in adj[a]:
            cand = best[a] + w
            if cand > best.get(b, -1):
                best[b] = cand
    return max(best.values())


def dheight_relative(
    t: Term, strict: Sequence[Rule], weak: Sequence[Rule], fuel: Fuel = Fuel()
) -> int:
    """Maximum number of strict steps on any (strict+weak)-path from t."""
    graph = relative_graph(t, strict, weak, fuel)
    if not graph.exhausted:
        raise IndeterminateError(
            f"relative derivation height of {render_term(t)} ran out of fuel"
        )
    return _longest_weighted_path(graph, 0)


def dheight(t: Term, rules: Sequence[Rule], fuel: Fuel = Fuel()) -> int:
    """Length of the longest rewrite sequence from t."""
    return dheight_relative(t, rules, (), fuel)


def longest_derivation(
    t: Term, rules: Sequence[Rule], fuel: Fuel = Fuel()
) -> list[Term]:
    """A witness rewrite sequence of length dheight(t), t included."""
    graph = reachable_set(t, rules, fuel)
    if not graph.exhausted:
        raise IndeterminateError(
            f"longest derivation from {render_term(t)} ran out of fuel"
        )
    n = len(graph.nodes)
    adj: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    seen = set()
    for src, _, dst in graph.edges:
        if src == dst or (src, dst) in seen:
            if src == dst:
                raise NontermEvidenceError(
                    f"cycle at {render_term(graph.nodes[src])}"
                )
            continue
        seen.add((src, dst))
        adj[src].append(dst)
        indeg[dst] += 1
    queue = [i for i in range(n) if indeg[i] == 0]
    topo = []
    while queue:
        a = queue.pop()
        topo.append(a)
        for b in adj[a]:
            indeg[b] -= 1
            if indeg[b] == 0:
                queue.append(b)
    if len(topo) != n:
        raise NontermEvidenceError(f"cycle reachable from {render_term(t)}")
    best = {0: 0}
    parent: dict[int, int] = {}
    for a in topo:
        if a not in best:
            continue
        for b in adj[a]:
            if best[a] + 1 > best.get(b, -1):
                best[b] = best[a] + 1
                parent[b] = a
    end = max(best, key=lambda i: best[i])
    path = [end]
    while path[-1] in parent:
        path.append(parent[path[-1]])
    path.reverse()
    return [graph.nodes[i] for i in path]


def enumerate_ground_terms(
    symbols: Iterable[Symbol], max_size: int
) -> list[list[Term]]:
    """terms[k] = all ground terms of size k (index 0 empty), symbol-ordered."""
    syms = sorted(symbols, key=lambda s: (s.name, s.arity))
    by_size: list[list[Term]] = [[] for _ in range(max_size + 1)]
    for size in range(1, max_size + 1):
        layer = []
        for sym in syms:
            if sym.arity == 0:
                if size == 1:
                    layer.append(App(sym))
                continue
            budget = size - 1
            if budget < sym.arity:
                continue
            for combo in _compositions(budget, sym.arity):
                for args in _arg_product(by_size, combo):
                    layer.append(App(sym, args))
        by_size[size] = layer
    return by_size


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _arg_product(by_size, combo):
    pools = [by_size[c] for c in combo]
    if any(not p for p in pools):
        return
    idx = [0] * len(pools)
    while True:
        yield tuple(pool[i] for pool, i in zip(pools, idx))
        k = len(pools) - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < len(pools[k]):
                break
            idx[k] = 0
            k -= 1
        if k < 0:
            return


def ground_enumeration_symbols(trs: Trs) -> list[Symbol]:
    """TRS signature plus one fresh inert constant standing in for variables."""
    syms = list(trs.symbols.values())
    syms.append(fresh_constant(trs.symbols))
    return syms


def dc(R: Trs, n: int, fuel: Fuel = Fuel()) -> int:
    """Derivational complexity at size n: max dheight over terms of size <= n."""
    if n <= 0:
        return 0
    best = 0
    by_size = enumerate_ground_terms(ground_enumeration_symbols(R), n)
    for layer in by_size:
        for t in layer:
            h = dheight(t, R.rules, fuel)
            if h > best:
                best = h
    return best


def ackermann_k(k: int, args: Sequence[int], budget: int = 10_000_000) -> int:
    """k-ary Ackermann function (arbitrary precision)."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if len(args) != k:
        raise ValueError(f"expected {k} arguments, got {len(args)}")
    if any(a < 0 for a in args):
        raise ValueError("arguments must be naturals")
    memo: dict[tuple[int, ...], int] = {}
    calls = 0

    def go(xs: tuple[int, ...]) -> int:
        nonlocal calls
        cached = memo.get(xs)
        if cached is not None:
            return cached
        calls += 1
        if calls > budget:
            raise RecursionBudgetError(
                f"ackermann_k({k}, ...) exceeded {budget} calls"
            )
        head, last = xs[: k - 1], xs[k - 1]
        if all(x == 0 for x in head):
            val = last + 1
        elif xs[k - 2] > 0:
            if last == 0:
                val = go(xs[: k - 2] + (xs[k - 2] - 1, 1))
            else:
                inner = go(xs[: k - 1] + (last - 1,))
                val = go(xs[: k - 2] + (xs[k - 2] - 1, inner))
        else:
            i = max(j for j in range(k - 1) if xs[j] > 0)  # 0-based, < k-2
            ys = list(xs)
            ys[i] -= 1
            ys[i + 1] = last
            for j in range(i + 2, k - 1):
                ys[j] = 0
            val = go(tuple(ys))
        memo[xs] = val
        return val

    return go(tuple(args))
