"""Nerode equivalence, minimization and exact comparison of induced actions."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import total_ordering
from typing import Sequence

import numpy as np

from .core import MealyMachine, reachable, restrict
from .errors import AlphabetMismatch, InvalidIndex


def dense_relabel(keys: np.ndarray) -> np.ndarray:
    """Map equal rows of ``keys`` to the same id, ids numbered by first occurrence."""
    if keys.ndim == 1:
        keys = keys[:, None]
    base = int(keys.max()) + 1 if keys.size else 1
    if base ** keys.shape[1] < 2**62:
        # pack each row into one integer; 1-d unique is much faster than axis=0
        packed = np.zeros(len(keys), dtype=np.int64)
        for col in keys.T:
            packed = packed * base + col
        _, first, inverse = np.unique(packed, return_index=True, return_inverse=True)
    else:
        _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse]


@dataclass(frozen=True)
class StatePartition:
    class_of: tuple[int, ...]
    classes: tuple[tuple[int, ...], ...]
    rounds: int

    def __len__(self):
        return len(self.classes)

    @classmethod
    def from_labels(cls, labels: Sequence[int], rounds: int = 0) -> "StatePartition":
        labels = [int(c) for c in labels]
        classes: list[list[int]] = [[] for _ in range(max(labels) + 1)]
        for state, c in enumerate(labels):
            classes[c].append(state)
        return cls(tuple(labels), tuple(tuple(c) for c in classes), rounds)


def nerode_labels(M: MealyMachine) -> tuple[np.ndarray, int]:
    """Moore refinement: class id per state and the number of strict refinements."""
    cls = dense_relabel(M.rho)
    rounds = 0
    while True:
        refined = dense_relabel(np.hstack([cls[:, None], cls[M.delta]]))
        if refined.max() == cls.max():
            return cls, rounds
        cls = refined
        rounds += 1


def nerode_partition(M: MealyMachine) -> StatePartition:
    """Partition of the states by the action they induce on all letter words."""
    labels, rounds = nerode_labels(M)
    return StatePartition.from_labels(labels, rounds)


def quotient(M: MealyMachine, labels: np.ndarray) -> MealyMachine:
    """Quotient by a partition compatible with delta and rho; class k is labelled by its first member."""
    _, reps = np.unique(labels, return_index=True)
    return MealyMachine(
        labels[M.delta[reps]],
        M.rho[reps],
        [M.state_labels[r] for r in reps.tolist()],
        M.letter_labels,
    )


def minimize(M: MealyMachine) -> tuple[MealyMachine, StatePartition]:
    labels, rounds = nerode_labels(M)
    return quotient(M, labels), StatePartition.from_labels(labels, rounds)


@total_ordering
@dataclass(frozen=True)
class ActionSignature:
    """Canonical encoding of the minimal machine rooted at one state.

    Two signatures are equal exactly when the two roots act identically
    on every letter word.
    """

    data: bytes

    def __lt__(self, other):
        if not isinstance(other, ActionSignature):
            return NotImplemented
        return (len(self.data), self.data) < (len(other.data), other.data)

    def hexdigest(self) -> str:
        return hashlib.sha256(self.data).hexdigest()

    @property
    def size(self) -> int:
        return int(np.frombuffer(self.data[:8], dtype="<i4")[1])


def _canonical_bytes(M: MealyMachine, root: int) -> bytes:
    order = reachable(M, root)
    renumber = np.full(M.n_states, -1, dtype=np.int64)
    renumber[order] = np.arange(len(order))
    delta = renumber[M.delta[order]]
    rho = M.rho[order]
    header = np.array([M.n_letters, len(order)], dtype="<i4")
    return header.tobytes() + rho.astype("<i4").tobytes() + delta.astype("<i4").tobytes()


def action_signature(M: MealyMachine, x: int) -> ActionSignature:
    if not 0 <= x < M.n_states:
        raise InvalidIndex(f"invalid state index {x}")
    comp = reachable(M, x)
    sub = restrict(M, comp)  # x becomes state 0
    labels, _ = nerode_labels(sub)
    small = quotient(sub, labels)
    return ActionSignature(_canonical_bytes(small, int(labels[0])))


def word_machine(M: MealyMachine, u: Sequence[int]) -> MealyMachine:
    """Reachable part of the power machine rooted at the state word ``u`` (root is state 0)."""
    u = tuple(int(x) for x in u)
    if not u:
        raise InvalidIndex("state word must be non-empty")
    for x in u:
        if not 0 <= x < M.n_states:
            raise InvalidIndex(f"invalid state index {x}")
    delta, rho = M.delta.tolist(), M.rho.tolist()
    m = M.n_letters
    index = {u: 0}
    words = [u]
    d_rows, r_rows = [], []
    head = 0
    while head < len(words):
        w = words[head]
        head += 1
        d_row, r_row = [], []
        for i in range(m):
            nxt = []
            c = i
            for x in w:
                nxt.append(delta[x][c])
                c = rho[x][c]
            nxt = tuple(nxt)
            if nxt not in index:
                index[nxt] = len(words)
                words.append(nxt)
            d_row.append(index[nxt])
            r_row.append(c)
        d_rows.append(d_row)
        r_rows.append(r_row)
    labels = [".".join(M.state_labels[x] for x in w) for w in words]
    return MealyMachine(d_rows, r_rows, labels, M.letter_labels)


def word_signature(M: MealyMachine, u: Sequence[int]) -> ActionSignature:
    return action_signature(word_machine(M, u), 0)


def same_action(M: MealyMachine, u: Sequence[int], N: MealyMachine, v: Sequence[int]) -> bool:
    """Whether the state word ``u`` of M and ``v`` of N induce the same map on letter words."""
    if M.n_letters != N.n_letters or M.letter_labels != N.letter_labels:
        raise AlphabetMismatch("alphabet-mismatch")
    return word_signature(M, u) == word_signature(N, v)
