"""The ``.mealy`` text format, built-in machines and DOT export.

Format::

    states x y z t
    letters 0 1
    x 0 -> x 0        # state letter -> next-state output-letter
    ...

``#`` starts a comment, tokens are whitespace separated and transition
lines may come in any order.  There must be exactly one line per
(state, letter) pair.
"""

from __future__ import annotations

import re

from .core import MealyMachine
from .errors import (
    IncompleteMachine,
    MealyError,
    MealySyntaxError,
    NondeterministicMachine,
    UnknownLabel,
)

_TOKEN = re.compile(r"\S+")


def _tokens(line: str):
    body = line.split("#", 1)[0]
    return [(m.group(), m.start() + 1) for m in _TOKEN.finditer(body)]


def loads(text: str) -> MealyMachine:
    """Parse ``.mealy`` text into a validated machine."""
    lines = [(no, _tokens(raw)) for no, raw in enumerate(text.splitlines(), start=1)]
    lines = [(no, toks) for no, toks in lines if toks]
    if not lines:
        raise MealySyntaxError("empty input, expected 'states' header", 1, 1)

    def header(pos, keyword):
        if pos >= len(lines):
            raise MealySyntaxError(f"missing '{keyword}' header", lines[-1][0] + 1, 1)
        no, toks = lines[pos]
        word, col = toks[0]
        if word != keyword:
            raise MealySyntaxError(f"expected '{keyword}', found {word!r}", no, col)
        names = [t for t, _ in toks[1:]]
        if not names:
            raise MealySyntaxError(f"'{keyword}' needs at least one name", no, col + len(word))
        seen = set()
        for name, c in toks[1:]:
            if name in seen:
                raise MealySyntaxError(f"duplicate name {name!r}", no, c)
            if name == "->":
                raise MealySyntaxError("'->' is not a valid name", no, c)
            seen.add(name)
        return names

    states = header(0, "states")
    letters = header(1, "letters")
    s_index = {s: k for k, s in enumerate(states)}
    l_index = {s: k for k, s in enumerate(letters)}
    delta: dict[tuple[int, int], int] = {}
    rho: dict[tuple[int, int], int] = {}

    for no, toks in lines[2:]:
        if len(toks) != 5 or toks[2][0] != "->":
            col = toks[2][1] if len(toks) > 2 else toks[-1][1]
            raise MealySyntaxError("expected '<state> <letter> -> <state> <letter>'", no, col)
        (src, c0), (a, c1), _, (dst, c3), (b, c4) = toks
        for name, col, table, kind in ((src, c0, s_index, "state"), (a, c1, l_index, "letter"),
                                       (dst, c3, s_index, "state"), (b, c4, l_index, "letter")):
            if name not in table:
                raise UnknownLabel(f"unknown {kind} {name!r} at line {no}, column {col}")
        key = (s_index[src], l_index[a])
        if key in delta:
            raise NondeterministicMachine(
                f"duplicate transition: state {src}, letter {a} (line {no})"
            )
        delta[key] = s_index[dst]
        rho[key] = l_index[b]

    for x, sname in enumerate(states):
        for i, lname in enumerate(letters):
            if (x, i) not in delta:
                raise IncompleteMachine(f"incomplete: state {sname}, letter {lname}")
    n, m = len(states), len(letters)
    return MealyMachine(
        [[delta[x, i] for i in range(m)] for x in range(n)],
        [[rho[x, i] for i in range(m)] for x in range(n)],
        states,
        letters,
    )


def load(path) -> MealyMachine:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def _safe_labels(M: MealyMachine) -> bool:
    return all(
        label and _TOKEN.fullmatch(label) and "#" not in label and label != "->"
        for label in M.state_labels + M.letter_labels
    )


def dumps(M: MealyMachine) -> str:
    if not _safe_labels(M):
        raise MealyError("labels cannot be serialized (whitespace, '#' or '->')")
    S, L = M.state_labels, M.letter_labels
    out = ["states " + " ".join(S), "letters " + " ".join(L)]
    for x in range(M.n_states):
        for i in range(M.n_letters):
            out.append(f"{S[x]} {L[i]} -> {S[M.delta[x, i]]} {L[M.rho[x, i]]}")
    return "\n".join(out) + "\n"


FIG1 = """\
# four-state example whose dual acts level-transitively
states x y z t
letters 0 1
x 0 -> x 0
x 1 -> z 1
y 0 -> y 0
y 1 -> t 1
z 0 -> z 1
z 1 -> y 0
t 0 -> t 1
t 1 -> x 0
"""

ADDING = """\
# binary odometer
states e a
letters 0 1
e 0 -> e 0
e 1 -> e 1
a 0 -> e 1
a 1 -> a 0
"""

_IDENTITY = re.compile(r"identity(\d+)x(\d+)")


def identity_machine(k: int, m: int) -> MealyMachine:
    return MealyMachine(
        [[x] * m for x in range(k)],
        [list(range(m)) for _ in range(k)],
        [f"q{x}" for x in range(k)] if k > 1 else ["q"],
        [str(i) for i in range(m)],
    )


def builtin_names() -> list[str]:
    return ["fig1", "adding", "identity<k>x<m>"]


def builtin(name: str) -> MealyMachine:
    if name == "fig1":
        return loads(FIG1)
    if name == "adding":
        return loads(ADDING)
    match = _IDENTITY.fullmatch(name)
    if match:
        k, m = int(match.group(1)), int(match.group(2))
        if k < 1 or m < 1:
            raise MealyError("identity built-in needs k, m >= 1")
        return identity_machine(k, m)
    raise MealyError(f"unknown built-in {name!r}; known: {', '.join(builtin_names())}")


def resolve(source: str) -> MealyMachine:
    """Machine from a path or ``builtin:<name>``."""
    if source.startswith("builtin:"):
        return builtin(source[len("builtin:"):])
    return load(source)


def _dot_id(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(M: MealyMachine, name: str = "mealy") -> str:
    """Graphviz source; edges are labelled ``input|output``."""
    S, L = M.state_labels, M.letter_labels
    lines = [f"digraph {_dot_id(name)} {{", "  rankdir=LR;", "  node [shape=circle];"]
    for x in range(M.n_states):
        lines.append(f"  {_dot_id(S[x])};")
    for x in range(M.n_states):
        for i in range(M.n_letters):
            label = f"{L[i]}|{L[M.rho[x, i]]}"
            lines.append(f"  {_dot_id(S[x])} -> {_dot_id(S[M.delta[x, i]])} [label={_dot_id(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
