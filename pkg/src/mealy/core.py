"""Mealy automata and their basic algebra.

A machine is stored as two dense integer tables indexed by
``(state, letter)``: ``delta`` gives the next state and ``rho`` the output
letter.  Labels are carried along for display only.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .errors import AlphabetMismatch, InvalidIndex, MealyError, NotInvertible


def _frozen(table) -> np.ndarray:
    arr = np.array(table, dtype=np.int64, copy=True)
    arr.setflags(write=False)
    return arr


def _default_labels(n: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(n))


class MealyMachine:
    """Complete deterministic letter-to-letter transducer (Q, Σ, δ, ρ).

    ``delta[x, i]`` is the state reached from ``x`` reading ``i`` and
    ``rho[x, i]`` the letter written.  Instances are immutable.
    """

    __slots__ = ("_delta", "_rho", "_state_labels", "_letter_labels", "_hash")

    def __init__(self, delta, rho, state_labels=None, letter_labels=None):
        delta = _frozen(delta)
        rho = _frozen(rho)
        if delta.ndim != 2 or delta.shape != rho.shape:
            raise MealyError("delta and rho must be tables of identical shape (states, letters)")
        n, m = delta.shape
        if n < 1 or m < 1:
            raise MealyError("a machine needs at least one state and one letter")
        if delta.min() < 0 or delta.max() >= n:
            raise InvalidIndex("delta image outside the state set")
        if rho.min() < 0 or rho.max() >= m:
            raise InvalidIndex("rho image outside the alphabet")
        state_labels = _default_labels(n) if state_labels is None else tuple(map(str, state_labels))
        letter_labels = _default_labels(m) if letter_labels is None else tuple(map(str, letter_labels))
        for kind, labels, size in (("state", state_labels, n), ("letter", letter_labels, m)):
            if len(labels) != size:
                raise MealyError(f"expected {size} {kind} labels, got {len(labels)}")
            if len(set(labels)) != size:
                raise MealyError(f"{kind} labels must be pairwise distinct")
        object.__setattr__(self, "_delta", delta)
        object.__setattr__(self, "_rho", rho)
        object.__setattr__(self, "_state_labels", state_labels)
        object.__setattr__(self, "_letter_labels", letter_labels)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("MealyMachine is immutable")

    @property
    def delta(self) -> np.ndarray:
        return self._delta

    @property
    def rho(self) -> np.ndarray:
        return self._rho

    @property
    def n_states(self) -> int:
        return self._delta.shape[0]

    @property
    def n_letters(self) -> int:
        return self._delta.shape[1]

    @property
    def state_labels(self) -> tuple[str, ...]:
        return self._state_labels

    @property
    def letter_labels(self) -> tuple[str, ...]:
        return self._letter_labels

    def __len__(self):
        return self.n_states

    def same_tables(self, other: "MealyMachine") -> bool:
        return (
            self.delta.shape == other.delta.shape
            and np.array_equal(self.delta, other.delta)
            and np.array_equal(self.rho, other.rho)
        )

    def __eq__(self, other):
        if not isinstance(other, MealyMachine):
            return NotImplemented
        return (
            self.same_tables(other)
            and self.state_labels == other.state_labels
            and self.letter_labels == other.letter_labels
        )

    def __hash__(self):
        if self._hash is None:
            h = hash((self.delta.shape, self.delta.tobytes(), self.rho.tobytes(),
                      self.state_labels, self.letter_labels))
            object.__setattr__(self, "_hash", h)
        return self._hash

    def __repr__(self):
        return f"<MealyMachine {self.n_states} states, {self.n_letters} letters>"

    def state_index(self, label: str) -> int:
        try:
            return self.state_labels.index(label)
        except ValueError:
            raise InvalidIndex(f"unknown state {label!r}") from None

    def letter_index(self, label: str) -> int:
        try:
            return self.letter_labels.index(label)
        except ValueError:
            raise InvalidIndex(f"unknown letter {label!r}") from None

    def relabel(self, state_labels=None, letter_labels=None) -> "MealyMachine":
        return MealyMachine(
            self.delta, self.rho,
            self.state_labels if state_labels is None else state_labels,
            self.letter_labels if letter_labels is None else letter_labels,
        )


def _is_bijective_rows(table: np.ndarray) -> bool:
    m = table.shape[1]
    return bool(np.all(np.sort(table, axis=1) == np.arange(m)))


def is_invertible(M: MealyMachine) -> bool:
    """True iff every output map i -> rho(x, i) is a permutation."""
    return _is_bijective_rows(M.rho)


def is_reversible(M: MealyMachine) -> bool:
    """True iff every column x -> delta(x, i) is a permutation of the states."""
    return _is_bijective_rows(M.delta.T)


def dual(M: MealyMachine) -> MealyMachine:
    # states and letters swap roles: dual.delta[i, x] = rho[x, i], dual.rho[i, x] = delta[x, i]
    return MealyMachine(M.rho.T, M.delta.T, M.letter_labels, M.state_labels)


def inverse(M: MealyMachine) -> MealyMachine:
    """Machine whose state x^-1 undoes the action of x."""
    if not is_invertible(M):
        raise NotInvertible("not-invertible: some output map is not a permutation")
    n, m = M.n_states, M.n_letters
    delta = np.empty((n, m), dtype=np.int64)
    rho = np.empty((n, m), dtype=np.int64)
    rows = np.arange(n)[:, None]
    # pre[x, i] = j with rho(x, j) = i
    pre = np.argsort(M.rho, axis=1)
    rho[:] = pre
    delta[:] = M.delta[rows, pre]
    return MealyMachine(delta, rho, [f"{s}^-1" for s in M.state_labels], M.letter_labels)


def _pair_labels(left: Sequence[str], right: Sequence[str]) -> list[str]:
    labels = [a + b for a in left for b in right]
    if len(set(labels)) == len(labels):
        return labels
    return [f"{a}.{b}" for a in left for b in right]


def product(M: MealyMachine, N: MealyMachine) -> MealyMachine:
    """Machine on Q_M x Q_N where state (a, b) acts as a first, then b.

    State (a, b) has index ``a * N.n_states + b``.
    """
    if M.n_letters != N.n_letters or M.letter_labels != N.letter_labels:
        raise AlphabetMismatch(
            f"alphabet-mismatch: {list(M.letter_labels)} vs {list(N.letter_labels)}"
        )
    nm, nn = M.n_states, N.n_states
    mid = M.rho  # (nm, m): letter handed to the second machine
    # broadcast over (a, b, i)
    b = np.arange(nn)[None, :, None]
    next_b = N.delta[b, mid[:, None, :]]
    out = N.rho[b, mid[:, None, :]]
    next_a = np.broadcast_to(M.delta[:, None, :], next_b.shape)
    delta = (next_a * nn + next_b).reshape(nm * nn, -1)
    rho = out.reshape(nm * nn, -1)
    return MealyMachine(delta, rho, _pair_labels(M.state_labels, N.state_labels), M.letter_labels)


def _check_word(word: Iterable[int], bound: int, kind: str) -> tuple[int, ...]:
    word = tuple(int(c) for c in word)
    for c in word:
        if not 0 <= c < bound:
            raise InvalidIndex(f"invalid {kind} index {c}")
    return word


def apply_action(M: MealyMachine, u: Sequence[int], s: Sequence[int]) -> tuple[int, ...]:
    """Image of the letter word ``s`` under the state word ``u``.

    The first state of ``u`` acts first.
    """
    u = _check_word(u, M.n_states, "state")
    s = _check_word(s, M.n_letters, "letter")
    if not u:
        raise InvalidIndex("state word must be non-empty")
    delta, rho = M.delta, M.rho
    word = list(s)
    for x in u:
        for pos, i in enumerate(word):
            word[pos] = int(rho[x, i])
            x = int(delta[x, i])
    return tuple(word)


def transition_graph(M: MealyMachine) -> csr_matrix:
    n, m = M.n_states, M.n_letters
    rows = np.repeat(np.arange(n), m)
    return csr_matrix((np.ones(n * m, dtype=np.int8), (rows, M.delta.reshape(-1))), shape=(n, n))


def _group(labels: np.ndarray) -> list[list[int]]:
    groups: dict[int, list[int]] = {}
    for state, c in enumerate(labels.tolist()):
        groups.setdefault(c, []).append(state)
    return sorted(groups.values(), key=lambda g: g[0])


def strongly_connected_components(M: MealyMachine) -> list[list[int]]:
    _, labels = _cc(transition_graph(M), directed=True, connection="strong")
    return _group(labels)


def connected_components(M: MealyMachine) -> list[list[int]]:
    """Weakly connected components of the transition digraph, ordered by least state.

    For a reversible machine every component is strongly connected; this
    is checked and a violation raises ``AssertionError``.
    """
    _, labels = _cc(transition_graph(M), directed=True, connection="weak")
    comps = _group(labels)
    if is_reversible(M):
        strong = strongly_connected_components(M)
        if len(strong) != len(comps):
            raise AssertionError("reversible machine with a component that is not strongly connected")
    return comps


def is_connected(M: MealyMachine) -> bool:
    return len(connected_components(M)) == 1


def disjoint_union(machines: Sequence[MealyMachine]) -> MealyMachine:
    """Side-by-side union over a common alphabet; state labels get a ``k:`` prefix."""
    first = machines[0]
    for N in machines[1:]:
        if N.n_letters != first.n_letters:
            raise AlphabetMismatch("alphabet-mismatch in disjoint union")
    offset = 0
    deltas, rhos, labels = [], [], []
    for k, N in enumerate(machines):
        deltas.append(N.delta + offset)
        rhos.append(N.rho)
        labels.extend(f"{k}:{s}" for s in N.state_labels)
        offset += N.n_states
    return MealyMachine(np.vstack(deltas), np.vstack(rhos), labels, first.letter_labels)


def restrict(M: MealyMachine, states: Sequence[int]) -> MealyMachine:
    """Sub-machine on a set of states closed under transitions."""
    states = list(states)
    index = {s: k for k, s in enumerate(states)}
    try:
        delta = [[index[int(t)] for t in M.delta[s]] for s in states]
    except KeyError:
        raise MealyError("state set is not closed under transitions") from None
    return MealyMachine(delta, M.rho[states], [M.state_labels[s] for s in states], M.letter_labels)


def reachable(M: MealyMachine, root: int) -> list[int]:
    """States reachable from ``root`` in BFS order, letters visited by index."""
    seen = {root}
    order = [root]
    head = 0
    delta = M.delta
    while head < len(order):
        x = order[head]
        head += 1
        for t in delta[x].tolist():
            if t not in seen:
                seen.add(t)
                order.append(t)
    return order
