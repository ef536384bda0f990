"""Powers of a machine and bounded-depth level-transitivity checks."""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from .core import MealyMachine, product
from .errors import MealyError, SizeLimitExceeded
from .minimize import nerode_labels, quotient

DEFAULT_SIZE_LIMIT = 2_000_000
DEFAULT_MEMORY_BUDGET = 1 << 22


def explicit_power(M: MealyMachine, n: int, size_limit: int = DEFAULT_SIZE_LIMIT) -> MealyMachine:
    """Machine on Q^n, words enumerated lexicographically; word u acts as its letters in order."""
    if n < 1:
        raise MealyError("power exponent must be positive")
    required = M.n_states ** n
    if required > size_limit:
        raise SizeLimitExceeded(required, size_limit)
    P = M
    for _ in range(n - 1):
        P = product(P, M)
    return P


def word_index(u, n_states: int) -> int:
    code = 0
    for x in u:
        code = code * n_states + int(x)
    return code


def index_word(code: int, n_states: int, length: int) -> tuple[int, ...]:
    out = []
    for _ in range(length):
        code, r = divmod(code, n_states)
        out.append(r)
    return tuple(reversed(out))


class PowerTower:
    """Lazily extended sequence B_1 = m(M), B_{k+1} = m(B_k . M).

    ``steps[k-1][b, q]`` is the state of B_{k+1} reached by appending the
    generator ``q`` to state ``b`` of B_k.  States of every B_k are ordered
    by their shortlex-least representative word (see ``rep``).
    """

    def __init__(self, M: MealyMachine):
        self.machine = M
        self.levels: list[MealyMachine] = []
        self.steps: list[np.ndarray] = []
        self.class_sizes: list[np.ndarray] = []
        self._lock = threading.Lock()

    def rep(self, k: int, b: int) -> tuple[int, ...]:
        """Shortlex-least state word of length k represented by state b of B_k."""
        word = []
        while k > 1:
            # first member of b in B_{k-1} . M is the pair (a, x)
            a, x = self._first_member[k - 2][b]
            word.append(x)
            b = a
            k -= 1
        word.append(self._first_member_level1[b])
        return tuple(reversed(word))

    def extend(self, depth: int, size_limit: int = DEFAULT_SIZE_LIMIT) -> int:
        """Compute levels up to ``depth``; returns the number of levels available."""
        with self._lock:
            M = self.machine
            if not self.levels:
                labels, _ = nerode_labels(M)
                self.levels.append(quotient(M, labels))
                _, first = np.unique(labels, return_index=True)
                self._first_member_level1 = first.tolist()
                self.level1_labels = labels
                self._first_member: list[list[tuple[int, int]]] = []
                self.class_sizes.append(np.bincount(labels))
            while len(self.levels) < depth:
                B = self.levels[-1]
                if B.n_states * M.n_states > size_limit:
                    break
                P = product(B, M)
                labels, _ = nerode_labels(P)
                self.levels.append(quotient(P, labels))
                self.steps.append(labels.reshape(B.n_states, M.n_states))
                _, first = np.unique(labels, return_index=True)
                self._first_member.append([divmod(int(f), M.n_states) for f in first])
                # words per class: each pair (b, q) stands for |class b| words
                weights = np.repeat(self.class_sizes[-1], M.n_states)
                self.class_sizes.append(np.bincount(labels, weights=weights).astype(np.int64))
            # cached levels beyond the limit do not count, so results never depend on call history
            allowed = 1
            while allowed < min(depth, len(self.levels)) and \
                    self.levels[allowed - 1].n_states * M.n_states <= size_limit:
                allowed += 1
            return allowed

    def sizes(self, depth: int) -> list[int]:
        return [B.n_states for B in self.levels[:depth]]


@lru_cache(maxsize=64)
def tower(M: MealyMachine) -> PowerTower:
    return PowerTower(M)


def _ratio_pair(r: Fraction) -> list[int]:
    return [r.numerator, r.denominator]


@dataclass
class PowerSequenceReport:
    machine: str
    depth: int
    sizes: list[int]
    ratios: list[Fraction]
    all_ratios_integral: bool
    stabilized_at: Optional[int]
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "machine": self.machine,
            "depth": self.depth,
            "sizes": list(self.sizes),
            "ratios": [_ratio_pair(r) for r in self.ratios],
            "all_ratios_integral": self.all_ratios_integral,
            "stabilized_at": self.stabilized_at,
            "truncated": self.truncated,
        }


def machine_id(M: MealyMachine) -> str:
    return hashlib.sha256(M.delta.tobytes() + M.rho.tobytes() + bytes(str(M.delta.shape), "ascii")).hexdigest()[:16]


def sequence_report(M: MealyMachine, sizes: list[int], depth: int, truncated: bool) -> PowerSequenceReport:
    ratios = [Fraction(b, a) for a, b in zip(sizes, sizes[1:])]
    stabilized = next((n for n, (a, b) in enumerate(zip(sizes, sizes[1:]), start=1) if a == b), None)
    return PowerSequenceReport(
        machine=machine_id(M),
        depth=depth,
        sizes=sizes,
        ratios=ratios,
        all_ratios_integral=all(r.denominator == 1 for r in ratios),
        stabilized_at=stabilized,
        truncated=truncated,
    )


def minimized_power_sizes(M: MealyMachine, depth: int,
                          size_limit: int = DEFAULT_SIZE_LIMIT) -> PowerSequenceReport:
    """Sizes s_n of the minimized powers for n = 1..depth.

    Hitting ``size_limit`` yields a partial report with ``truncated`` set.
    """
    if depth < 1:
        raise MealyError("depth must be at least 1")
    T = tower(M)
    got = T.extend(depth, size_limit)
    return sequence_report(M, T.sizes(got), depth, got < depth)


def level_images(M: MealyMachine, n: int) -> np.ndarray:
    """``images[x, w]`` is the code of rho_x(w) for every letter word w of length n.

    Words are coded base |Σ|, first letter most significant, so code order
    is lexicographic order.
    """
    m = M.n_letters
    N = m ** n
    codes = np.arange(N, dtype=np.int64)
    images = np.empty((M.n_states, N), dtype=np.int64)
    for x in range(M.n_states):
        state = np.full(N, x, dtype=np.int64)
        out = np.zeros(N, dtype=np.int64)
        for pos in range(n):
            letter = (codes // m ** (n - 1 - pos)) % m
            out = out * m + M.rho[state, letter]
            state = M.delta[state, letter]
        images[x] = out
    return images


def orbit_of_zero(M: MealyMachine, n: int) -> np.ndarray:
    """Codes reachable from 0^n under the generators, in BFS order."""
    images = level_images(M, n)
    N = images.shape[1]
    rows = np.tile(np.arange(N, dtype=np.int64), M.n_states)
    graph = csr_matrix((np.ones(rows.size, dtype=np.int32), (rows, images.reshape(-1))), shape=(N, N))
    return breadth_first_order(graph, 0, directed=True, return_predecessors=False)


@dataclass
class TransitivityReport:
    depth: int
    levels_checked: int
    transitive_up_to: int
    failure_level: Optional[int] = None
    witnesses: list[tuple[int, ...]] = field(default_factory=list)
    per_level: list[bool] = field(default_factory=list)
    truncated: bool = False

    @property
    def transitive(self) -> bool:
        return self.failure_level is None and not self.truncated and self.transitive_up_to >= self.depth

    def to_dict(self, letter_labels=None) -> dict:
        def show(w):
            return [letter_labels[c] for c in w] if letter_labels else list(w)

        return {
            "depth": self.depth,
            "levels_checked": self.levels_checked,
            "transitive_up_to": self.transitive_up_to,
            "failure_level": self.failure_level,
            "witnesses": [show(w) for w in self.witnesses],
            "per_level": list(self.per_level),
            "truncated": self.truncated,
        }


def level_transitive_up_to(M: MealyMachine, depth: int,
                           memory_budget: int = DEFAULT_MEMORY_BUDGET,
                           stop_early: bool = True) -> TransitivityReport:
    """Check that Σ^n is a single orbit of 0^n under the maps rho_x, for n <= depth.

    Levels whose word count exceeds ``memory_budget`` are not checked and
    the report is flagged as truncated.
    """
    if depth < 1:
        raise MealyError("depth must be at least 1")
    m = M.n_letters
    report = TransitivityReport(depth=depth, levels_checked=0, transitive_up_to=0)
    for n in range(1, depth + 1):
        N = m ** n
        if N > memory_budget:
            report.truncated = True
            break
        orbit = orbit_of_zero(M, n)
        ok = orbit.size == N
        report.per_level.append(ok)
        report.levels_checked = n
        if ok:
            if report.failure_level is None:
                report.transitive_up_to = n
            continue
        if report.failure_level is None:
            report.failure_level = n
            reached = np.zeros(N, dtype=bool)
            reached[orbit] = True
            missing = int(np.flatnonzero(~reached)[0])
            report.witnesses = [(0,) * n, index_word(missing, m, n)]
        if stop_early:
            break
    return report


def minimized_power(M: MealyMachine, n: int, size_limit: int = DEFAULT_SIZE_LIMIT) -> MealyMachine:
    T = tower(M)
    if T.extend(n, size_limit) < n:
        raise SizeLimitExceeded(T.levels[-1].n_states * M.n_states, size_limit)
    return T.levels[n - 1]
