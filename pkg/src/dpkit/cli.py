"""Command-line surface.

Exit codes: 0 success, 1 analysis failure (no proof, violated lemma, ...),
2 usage or parse error, 3 fuel exhaustion (indeterminate).
"""

from __future__ import annotations

import argparse
import os
import random
import sys

from . import corpus, render
from .analysis import (
    Fuel,
    IndeterminateError,
    NontermEvidenceError,
    dc,
    dheight,
    enumerate_ground_terms,
    ground_enumeration_symbols,
    longest_derivation,
)
from .dpframe import (
    NoProofFoundError,
    RpFunction,
    SearchConfig,
    compute_dps,
    estimate_dependency_graph,
    initial_problem,
    parse_artifact_lines,
    search_proof,
    validate_rp_function,
    validate_tree,
)
from .kernel import BACKEND
from .lpo import check_compatible, parse_precedence_lines, render_precedence
from .norms import NormContext, verify_lemmas
from .parser import ParseError, parse_term, parse_trs, render_trs
from .simulate import (
    ReplayError,
    TranslationContext,
    generate_rsim,
    simulate_derivation,
    simulate_start,
)
from .terms import App, Term, Var, fresh_constant, is_ground, render_term, subterms

OK, FAILURE, USAGE, INDETERMINATE = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_entry(spec: str):
    """A TRS argument is a file path or a builtin name (rspeter:k allowed)."""
    if os.path.exists(spec):
        try:
            with open(spec, "r", encoding="utf-8") as fh:
                return corpus.CorpusEntry(
                    spec, parse_trs(fh.read()), (), RpFunction((2, 1))
                )
        except ParseError as exc:
            raise CliError(f"{spec}: {exc}", USAGE) from exc
    name, _, param = spec.partition(":")
    if name in corpus.BUILTIN_NAMES:
        try:
            k = int(param) if param else None
            return corpus.builtin(name, k)
        except (KeyError, ValueError) as exc:
            raise CliError(str(exc), USAGE) from exc
    raise CliError(f"{spec}: no such file or builtin", USAGE)


def _ground(term: Term, trs) -> Term:
    """Replace variables by the designated inert constant."""
    if is_ground(term):
        return term
    hole = App(fresh_constant(trs.symbols))

    def go(t: Term) -> Term:
        if type(t) is Var:
            return hole
        return App(t.sym, tuple(go(a) for a in t.args))

    return go(term)


def _parse_term_arg(text: str, trs) -> Term:
    try:
        return parse_term(text, trs)
    except ParseError as exc:
        raise CliError(f"term: {exc}", USAGE) from exc


def _artifacts_for(entry, args):
    artifacts = entry.artifacts
    if getattr(args, "artifacts", None):
        try:
            with open(args.artifacts, "r", encoding="utf-8") as fh:
                artifacts = tuple(parse_artifact_lines(fh.read())) + artifacts
        except (OSError, ValueError) as exc:
            raise CliError(f"artifacts: {exc}", USAGE) from exc
    return artifacts


def _search(entry, args):
    config = SearchConfig(
        coeff_bound=args.coeff_bound, artifacts=_artifacts_for(entry, args)
    )
    try:
        tree = search_proof(entry.trs, config)
    except NoProofFoundError as exc:
        raise CliError(str(exc), FAILURE) from exc
    validate_tree(tree)
    return tree


def _g_function(entry, args) -> RpFunction:
    if args.g_poly:
        try:
            coeffs = tuple(int(x) for x in args.g_poly.split(","))
            return RpFunction(coeffs)
        except ValueError as exc:
            raise CliError(f"--g-poly: {exc}", USAGE) from exc
    return entry.g


def _fuel(args) -> Fuel:
    return Fuel(max_nodes=args.fuel_nodes, max_depth=args.fuel_depth)


def _emit(text: str, args) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def cmd_dps(args):
    entry = _load_entry(args.trs)
    lines = [str(p) for p in compute_dps(entry.trs)]
    _emit("\n".join(lines) if lines else "(no dependency pairs)", args)
    return OK


def cmd_graph(args):
    entry = _load_entry(args.trs)
    graph = estimate_dependency_graph(initial_problem(entry.trs))
    _emit(render.render_graph(graph), args)
    return OK


def cmd_prove(args):
    entry = _load_entry(args.trs)
    tree = _search(entry, args)
    _emit(render.render_tree_pretty(tree), args)
    return OK


def cmd_tree(args):
    entry = _load_entry(args.trs)
    tree = _search(entry, args)
    _emit(render.render_tree(tree), args)
    return OK


def cmd_norm(args):
    entry = _load_entry(args.trs)
    term = _ground(_parse_term_arg(args.term, entry.trs), entry.trs)
    tree = _search(entry, args)
    ctx = NormContext(tree, _fuel(args))
    path = ctx.current_path(term)
    vec = ctx.norm_vector(term)
    _emit(
        f"term: {render_term(term)}\n"
        f"path: {render.render_path(path)}\n"
        f"norm: {render.render_norm_vector(vec)}",
        args,
    )
    return OK


def cmd_verify_lemmas(args):
    entry = _load_entry(args.trs)
    tree = _search(entry, args)
    report = verify_lemmas(tree, args.max_size, _fuel(args))
    _emit(render.render_lemma_report(report), args)
    if report.indeterminates:
        return INDETERMINATE
    return OK if report.ok else FAILURE


def cmd_gen_rsim(args):
    entry = _load_entry(args.trs)
    tree = _search(entry, args)
    sim = generate_rsim(entry.trs, tree, _g_function(entry, args))
    text = render_trs(sim.trs)
    _emit(text, args)
    if args.prec_out:
        with open(args.prec_out, "w", encoding="utf-8") as fh:
            fh.write(render_precedence(sim.precedence))
    return OK


def cmd_simulate(args):
    entry = _load_entry(args.trs)
    term = _ground(_parse_term_arg(args.term, entry.trs), entry.trs)
    tree = _search(entry, args)
    fuel = _fuel(args)
    sim = generate_rsim(entry.trs, tree, _g_function(entry, args))
    ctx = TranslationContext(tree, sim, fuel)
    seq = longest_derivation(term, entry.trs.rules, fuel)
    start_der = simulate_start(term, ctx)
    step_der = simulate_derivation(seq, ctx)
    summary = (
        f"original derivation height: {len(seq) - 1}\n"
        f"start derivation ({len(start_der)} steps) reaches the translation\n"
        f"simulation derivation: {len(step_der)} steps"
    )
    _emit(
        summary
        + "\n-- start --\n"
        + render.render_derivation(start_der)
        + "\n-- steps --\n"
        + render.render_derivation(step_der),
        args,
    )
    return OK


def cmd_lpo_check(args):
    entry = _load_entry(args.trs)
    try:
        with open(args.precfile, "r", encoding="utf-8") as fh:
            prec = parse_precedence_lines(fh.read())
    except (OSError, ValueError) as exc:
        raise CliError(f"precedence: {exc}", USAGE) from exc
    report = check_compatible(list(entry.trs.rules), prec)
    _emit(render.render_lpo_report(report), args)
    return OK if report.ok else FAILURE


def cmd_dheight(args):
    entry = _load_entry(args.trs)
    term = _ground(_parse_term_arg(args.term, entry.trs), entry.trs)
    _emit(str(dheight(term, entry.trs.rules, _fuel(args))), args)
    return OK


def cmd_dc(args):
    entry = _load_entry(args.trs)
    _emit(str(dc(entry.trs, args.size, _fuel(args))), args)
    return OK


def cmd_builtin(args):
    try:
        entry = corpus.builtin(args.name, args.k)
    except (KeyError, ValueError) as exc:
        raise CliError(str(exc), USAGE) from exc
    _emit(render_trs(entry.trs), args)
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpkit",
        description=(
            "Dependency-pair termination workbench "
            f"(term kernel backend: {BACKEND})"
        ),
    )
    parser.add_argument("--fuel-nodes", type=int, default=200_000)
    parser.add_argument("--fuel-depth", type=int, default=10_000)
    parser.add_argument("--coeff-bound", type=int, default=2)
    parser.add_argument("--g-poly", default="", help="comma-separated c0,c1,...")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="", help="write output to a file")

    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, *specs):
        p = sub.add_parser(name)
        for spec in specs:
            p.add_argument(*spec[0], **spec[1])
        p.set_defaults(fn=fn)
        return p

    trs_arg = (("trs",), {"help": "TRS file or builtin name"})
    term_arg = (("term",), {"help": "term in the rule grammar"})
    artifacts_opt = (
        ("--artifacts",),
        {"default": "", "help": "file of (INTERP ...) / (PROJ ...) lines"},
    )

    add("dps", cmd_dps, trs_arg)
    add("graph", cmd_graph, trs_arg)
    add("prove", cmd_prove, trs_arg, artifacts_opt)
    add("tree", cmd_tree, trs_arg, artifacts_opt)
    add("norm", cmd_norm, trs_arg, term_arg, artifacts_opt)
    add(
        "verify-lemmas",
        cmd_verify_lemmas,
        trs_arg,
        artifacts_opt,
        (("--max-size",), {"type": int, "default": 5}),
    )
    add(
        "gen-rsim",
        cmd_gen_rsim,
        trs_arg,
        artifacts_opt,
        (("--prec-out",), {"default": "", "help": "write (PREC ...) lines here"}),
    )
    add("simulate", cmd_simulate, trs_arg, term_arg, artifacts_opt)
    add("lpo-check", cmd_lpo_check, trs_arg, (("precfile",), {}))
    add("dheight", cmd_dheight, trs_arg, term_arg)
    add("dc", cmd_dc, trs_arg, (("size",), {"type": int}))
    add(
        "builtin",
        cmd_builtin,
        (("name",), {"choices": corpus.BUILTIN_NAMES}),
        (("k",), {"type": int, "nargs": "?", "default": None}),
    )
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else 0
    random.seed(args.seed)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except IndeterminateError as exc:
        print(f"indeterminate: {exc}", file=sys.stderr)
        return INDETERMINATE
    except (NontermEvidenceError, ReplayError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return FAILURE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
