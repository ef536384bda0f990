"""Command-line interface: ``mealy <subcommand> [options] SOURCE``.

SOURCE is a path to a ``.mealy`` file or ``builtin:<name>``.  Exit status
is 0 on success, 1 when a checked property fails and 2 on usage or input
errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

from . import analysis, census, fmt
from .core import (
    MealyMachine,
    apply_action,
    connected_components,
    dual,
    inverse,
    is_invertible,
    is_reversible,
    product,
)
from .errors import MealyError
from .minimize import minimize
from .power import (
    DEFAULT_MEMORY_BUDGET,
    DEFAULT_SIZE_LIMIT,
    explicit_power,
    level_transitive_up_to,
    minimized_power_sizes,
)

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def machine_dict(M: MealyMachine) -> dict:
    S, L = M.state_labels, M.letter_labels
    return {
        "states": list(S),
        "letters": list(L),
        "transitions": [
            [S[x], L[i], S[int(M.delta[x, i])], L[int(M.rho[x, i])]]
            for x in range(M.n_states) for i in range(M.n_letters)
        ],
    }


def parse_word(text: str, labels) -> tuple[int, ...]:
    """Word given as separated labels (``,``, ``.`` or spaces) or, for one-character labels, a plain string."""
    text = text.strip()
    if not text:
        return ()
    if re.search(r"[,.\s]", text):
        tokens = [t for t in re.split(r"[,.\s]+", text) if t]
    elif all(len(s) == 1 for s in labels):
        tokens = list(text)
    else:
        tokens = [text]
    out = []
    for t in tokens:
        if t not in labels:
            raise MealyError(f"unknown label {t!r} in word {text!r}")
        out.append(labels.index(t))
    return tuple(out)


def _show_letters(M, word):
    sep = "" if all(len(s) == 1 for s in M.letter_labels) else "."
    return sep.join(M.letter_labels[c] for c in word)


class Result:
    """A report plus the way to print it: either key/value facts or a raw text document."""

    def __init__(self, report: dict, headline: str = "", code: int = OK, document: str | None = None):
        self.report = report
        self.headline = headline
        self.code = code
        self.document = document

    def render(self, as_json: bool) -> str:
        if as_json:
            return json.dumps(self.report, indent=2, sort_keys=False) + "\n"
        if self.document is not None:
            return self.document
        lines = [self.headline] if self.headline else []
        for key, value in self.report.items():
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif value is None:
                value = "null"
            elif isinstance(value, (list, dict)):
                value = json.dumps(value)
            lines.append(f"{key}: {value}")
        return "\n".join(lines) + "\n"


def _machine_result(M: MealyMachine) -> Result:
    return Result(machine_dict(M), document=fmt.dumps(M))


def cmd_info(args, M):
    _, part = minimize(M)
    comps = connected_components(M)
    report = {
        "states": M.n_states,
        "letters": M.n_letters,
        "invertible": is_invertible(M),
        "reversible": is_reversible(M),
        "connected": len(comps) == 1,
        "components": len(comps),
        "msize": len(part),
        "nerode_classes": [[M.state_labels[x] for x in c] for c in part.classes],
    }
    return Result(report, f"{M.n_states} states, {M.n_letters} letters")


def cmd_dual(args, M):
    return _machine_result(dual(M))


def cmd_inverse(args, M):
    return _machine_result(inverse(M))


def cmd_minimize(args, M):
    return _machine_result(minimize(M)[0])


def cmd_product(args, M):
    return _machine_result(product(M, fmt.resolve(args.other)))


def cmd_power(args, M):
    return _machine_result(explicit_power(M, args.n, args.limit or DEFAULT_SIZE_LIMIT))


def cmd_apply(args, M):
    u = parse_word(args.u, M.state_labels)
    s = parse_word(args.s, M.letter_labels)
    out = apply_action(M, u, s)
    report = {"u": analysis.show_word(M, u), "s": _show_letters(M, s), "image": _show_letters(M, out)}
    return Result(report, f"{report['u']}: {report['s'] or 'ε'} -> {report['image'] or 'ε'}")


def cmd_transitive(args, M):
    target = dual(M) if args.dual else M
    rep = level_transitive_up_to(target, args.depth, args.budget or DEFAULT_MEMORY_BUDGET)
    report = rep.to_dict(target.letter_labels)
    report["dual"] = bool(args.dual)
    if rep.failure_level is not None:
        w = [_show_letters(target, x) for x in rep.witnesses]
        head = f"not transitive at level {rep.failure_level}: {w[0]} and {w[1]} lie in distinct orbits"
        return Result(report, head, FAILED)
    head = f"transitive up to level {rep.transitive_up_to}"
    if rep.truncated:
        head += " (memory budget reached)"
    return Result(report, head)


def cmd_msizes(args, M):
    rep = minimized_power_sizes(M, args.depth, args.limit or DEFAULT_SIZE_LIMIT)
    return Result(rep.to_dict(), f"minimized power sizes: {rep.sizes}")


def cmd_growth(args, M):
    rep = analysis.growth_function(M, args.max_len, args.budget or analysis.DEFAULT_BUDGET, args.symmetric)
    return Result(rep.to_dict(), f"growth: {rep.gamma}")


def cmd_certify(args, M):
    rep = analysis.exponential_growth_certificate(
        M, args.depth, args.limit or DEFAULT_SIZE_LIMIT, args.budget or DEFAULT_MEMORY_BUDGET)
    head = f"{rep.verdict}({rep.depth})" if rep.certified else rep.verdict
    return Result(rep.to_dict(), head, OK if rep.certified else FAILED)


def cmd_lemma1(args, M):
    rep = analysis.lemma1_verify(M, args.n, args.limit or DEFAULT_SIZE_LIMIT)
    head = "decomposition verified" if rep.holds else "decomposition FAILED"
    return Result(rep.to_dict(M), f"{head} for n={rep.n}", OK if rep.holds else FAILED)


def cmd_proposition(args, M):
    rep = analysis.proposition_verify(M, args.depth, args.limit or DEFAULT_SIZE_LIMIT)
    head = "stabilization implication holds" if rep.holds else "stabilization implication FAILS"
    return Result(rep.to_dict(), head, OK if rep.holds else FAILED)


def cmd_finiteness(args, M):
    rep = analysis.finiteness_probe(M, args.depth, args.bound, args.window, args.limit or DEFAULT_SIZE_LIMIT)
    return Result(rep.to_dict(), rep.verdict)


def cmd_freeness(args, M):
    rep = analysis.freeness_check(M, args.depth, args.budget or analysis.DEFAULT_BUDGET)
    head = rep.verdict
    if rep.witness is not None:
        head += f": {analysis.show_word(M, rep.witness.u)} = {analysis.show_word(M, rep.witness.v)}"
    return Result(rep.to_dict(M), head, OK if rep.free else FAILED)


def cmd_relations(args, M):
    rels = analysis.find_relations(M, args.max_len, args.budget or analysis.DEFAULT_BUDGET)
    report = {"max_len": args.max_len, "relations": [r.to_dict(M) for r in rels]}
    return Result(report, f"{len(rels)} relations")


def cmd_export_dot(args, M):
    dot = fmt.to_dot(M)
    return Result({"dot": dot}, document=dot)


def cmd_builtin(args):
    M = fmt.builtin(args.name)
    return _machine_result(M)


def cmd_census(args):
    records, summary = census.classify_census(
        args.states, args.letters, args.depth,
        invertible=not args.all, reversible=not args.all,
        up_to_iso=args.iso, out=args.out, jobs=args.jobs,
    )
    report = summary.to_dict()
    report["out"] = args.out
    code = FAILED if summary.prime_freeness_violations else OK
    return Result(report, f"{summary.total} machines classified", code)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="emit the JSON report")
    common.add_argument("--limit", type=int, default=argparse.SUPPRESS, help="state-count limit for power constructions")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="reserved; every algorithm is deterministic")

    parser = _Parser(prog="mealy", description="Workbench for semigroups generated by Mealy automata.",
                     parents=[common])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def add(name, func, help, source=True):
        p = sub.add_parser(name, help=help, parents=[common])
        if source:
            p.add_argument("source", help="machine file or builtin:<name>")
        p.set_defaults(func=func, needs_machine=source)
        return p

    add("info", cmd_info, "predicates and minimized size")
    add("dual", cmd_dual, "dual machine")
    add("inverse", cmd_inverse, "inverse machine")
    add("minimize", cmd_minimize, "Nerode minimization")
    p = add("product", cmd_product, "product machine (first acts first)")
    p.add_argument("other", help="second machine")
    p = add("power", cmd_power, "explicit n-th power")
    p.add_argument("-n", type=int, required=True)
    p = add("apply", cmd_apply, "image of a letter word under a state word")
    p.add_argument("-u", required=True, help="state word")
    p.add_argument("-s", required=True, help="letter word")
    p = add("transitive", cmd_transitive, "level-transitivity up to a depth")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--dual", action="store_true", help="check the action of the dual machine")
    p.add_argument("--budget", type=int, help="maximum words per level")
    p = add("msizes", cmd_msizes, "sizes of the minimized powers")
    p.add_argument("--depth", type=int, required=True)
    p = add("growth", cmd_growth, "growth function of the generated semigroup")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--budget", type=int)
    p.add_argument("--symmetric", action="store_true", help="use states and their inverses (group growth)")
    p = add("certify", cmd_certify, "exponential-growth certificate")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--budget", type=int, help="maximum words per level for the transitivity check")
    p = add("verify-lemma1", cmd_lemma1, "decomposition of Nerode classes of consecutive powers")
    p.add_argument("-n", type=int, required=True)
    p = add("verify-proposition", cmd_proposition, "stabilization of minimized power sizes")
    p.add_argument("--depth", type=int, required=True)
    p = add("finiteness", cmd_finiteness, "finiteness evidence from component sizes")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--window", type=int, default=3)
    p = add("freeness", cmd_freeness, "freeness on the state set up to a depth")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--budget", type=int)
    p = add("relations", cmd_relations, "minimal relations up to a length")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--budget", type=int)
    add("export-dot", cmd_export_dot, "Graphviz export")
    p = add("census", cmd_census, "classify all small machines", source=False)
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--letters", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--all", action="store_true", help="do not restrict to invertible reversible machines")
    p.add_argument("--iso", action="store_true", help="one machine per relabeling class")
    p.add_argument("--jobs", type=int, default=1)
    p = add("builtin", cmd_builtin, "print a built-in machine", source=False)
    p.add_argument("name", help="fig1, adding or identity<k>x<m>")
    return parser


def run_command(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        as_json = getattr(args, "json", False)
        args.limit = getattr(args, "limit", None)
        if args.needs_machine:
            result = args.func(args, fmt.resolve(args.source))
        else:
            result = args.func(args)
    except UsageError as exc:
        print(str(exc), file=stderr)
        return USAGE
    except (MealyError, OSError, ValueError) as exc:
        print(f"mealy: error: {exc}", file=stderr)
        return USAGE
    stdout.write(result.render(as_json))
    return result.code


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
