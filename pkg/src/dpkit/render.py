"""Deterministic, diff-stable text rendering of analysis results."""

from __future__ import annotations

from .dpframe import (
    DepGraph,
    DpProblem,
    GraphLabel,
    LinearInterpretation,
    ProofTree,
    RedPairLabel,
    RpReport,
    SimpleProjection,
    SubtermLabel,
)
from .lpo import LpoReport
from .norms import BOT, LemmaReport, Nat, Trm
from .simulate import SimDerivation
from .terms import Position, render_term

EMPTY_SET = "∅"
EPS = "ε"


def render_position(pos: Position) -> str:
    if not pos:
        return EPS
    if all(c <= 9 for c in pos):
        return "".join(str(c) for c in pos)
    return ".".join(str(c) for c in pos)


def render_indices(indices) -> str:
    inner = ",".join(str(i) for i in sorted(indices))
    return "{" + inner + "}" if inner else EMPTY_SET


def render_problem(problem: DpProblem) -> str:
    return f"({render_indices(problem.indices)}, R)"


def render_interp(interp: LinearInterpretation) -> str:
    parts = []
    for name in sorted(interp.entries):
        coeffs, const = interp.entries[name]
        vars_ = [f"x{i+1}" for i in range(len(coeffs))]
        terms = [
            (f"{c}*{v}" if c != 1 else v) for c, v in zip(coeffs, vars_) if c != 0
        ]
        if const or not terms:
            terms.append(str(const))
        args = ",".join(vars_)
        head = f"{name}({args})" if vars_ else name
        parts.append(f"{head}={'+'.join(terms)}")
    label = f"[{interp.name}] " if interp.name else ""
    return label + " ".join(parts)


def render_projection(proj: SimpleProjection) -> str:
    return " ".join(f"pi({n})={i}" for n, i in sorted(proj.indices.items()))


def render_graph(graph: DepGraph) -> str:
    lines = [f"pairs: {render_indices(p.index for p in graph.pairs)}"]
    for p in graph.pairs:
        targets = sorted(b for a, b in graph.edges if a == p.index)
        arrow = ",".join(str(b) for b in targets) if targets else "-"
        lines.append(f"  {p.index} -> {arrow}")
    for i, scc in enumerate(graph.sccs):
        kind = "trivial" if i in graph.trivial else "nontrivial"
        lines.append(
            f"scc {render_indices(scc)}: rank {graph.ranks[i]}, {kind}"
        )
    return "\n".join(lines)


def _node_detail(node) -> str:
    label = node.label
    if label is None:
        if node.trivial_leaf:
            return "trivial-scc leaf"
        return "leaf"
    if isinstance(label, GraphLabel):
        g = label.graph
        sccs = []
        for i, scc in enumerate(g.sccs):
            star = "*" if i in g.trivial else ""
            sccs.append(render_indices(scc) + star)
        return f"k={g.scc_count()} sccs={'>'.join(sccs)} (* trivial)"
    if isinstance(label, RedPairLabel):
        return f"removed={render_indices(label.removed)} {render_interp(label.interp)}"
    if isinstance(label, SubtermLabel):
        return (
            f"removed={render_indices(label.removed)} "
            f"{render_projection(label.projection)}"
        )
    return "?"


def _node_processor(node) -> str:
    if node.label is None:
        return "-"
    return node.label.kind


def render_tree(tree: ProofTree) -> str:
    """One node per line: position | pairs | processor | detail."""
    lines = []
    for node in tree.iter_nodes():
        lines.append(
            " | ".join(
                (
                    render_position(node.position),
                    render_indices(node.problem.indices)
                    if node.problem.pairs
                    else EMPTY_SET,
                    _node_processor(node),
                    _node_detail(node),
                )
            )
        )
    return "\n".join(lines)


def render_tree_pretty(tree: ProofTree) -> str:
    lines = []
    for node in tree.iter_nodes():
        indent = "  " * len(node.position)
        head = f"{indent}{render_position(node.position)}: {render_problem(node.problem)}"
        if node.label is not None:
            head += f"  [{_node_processor(node)}: {_node_detail(node)}]"
        elif node.trivial_leaf:
            head += "  [trivial scc]"
        lines.append(head)
    return "\n".join(lines)


def render_norm_value(v) -> str:
    if v is BOT:
        return "⊥"
    if isinstance(v, Nat):
        return str(v.n)
    if isinstance(v, Trm):
        return render_term(v.term)
    return str(v)


def render_norm_vector(vec) -> str:
    return "(" + ", ".join(render_norm_value(v) for v in vec) + ")"


def render_path(path) -> str:
    return "(" + ", ".join(render_position(p) for p in path) + ")"


def render_derivation(derivation: SimDerivation) -> str:
    lines = [f"start : {render_term(derivation.start)}"]
    for step in derivation.steps:
        lines.append(
            f"{step.rule} @ {render_position(step.position)} : "
            f"{render_term(step.result)}"
        )
    return "\n".join(lines)


def render_lpo_report(report: LpoReport) -> str:
    lines = []
    for check in report.checks:
        verdict = "oriented" if check.oriented else "NOT ORIENTED"
        lines.append(f"{check.name}: {check.rule} : {verdict}")
    lines.extend(f"note: {n}" for n in report.notes)
    lines.append(f"result: {'all rules oriented' if report.ok else 'failure'}")
    return "\n".join(lines)


def render_lemma_report(report: LemmaReport) -> str:
    lines = [
        f"terms checked: {report.terms_checked}",
        f"below-root steps: {report.below_steps}",
        f"root steps: {report.root_steps}",
        f"weak-decrease violations: {len(report.weak_violations)}",
        f"strict-decrease violations: {len(report.strict_violations)}",
        f"equal-positions violations: {len(report.equalpos_violations)}",
        f"indeterminate: {len(report.indeterminates)}",
    ]
    for s, t, *rest in (report.weak_violations + report.strict_violations)[:20]:
        lines.append(f"  violation: {render_term(s)} -> {render_term(t)} {rest}")
    lines.append(f"result: {'ok' if report.ok else 'FAILED'}")
    return "\n".join(lines)


def render_rp_report(report: RpReport) -> str:
    lines = [
        f"g(n) = {report.g}",
        f"max scc count k = {report.k}; g(0) >= k: {'yes' if report.g(0) >= report.k else 'NO'}",
    ]
    for check in report.edge_checks:
        lines.append(
            f"reduction-pair edge at {render_position(check.position)}: "
            f"{len(check.violations)} violations, "
            f"{len(check.indeterminates)} indeterminate"
        )
        for t, h, bound in check.violations[:10]:
            lines.append(f"  {render_term(t)}: height {h} > bound {bound}")
    lines.append(
        f"result: {'validated up to n_max=' + str(report.n_max) if report.ok else 'FAILED'}"
    )
    return "\n".join(lines)
