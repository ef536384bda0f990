"""Growth, relations, and checks of the structural results on explicit instances.

Verdicts are deliberately graded: a bounded computation can certify a
property up to some depth or give evidence, never decide it outright.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (
    MealyMachine,
    connected_components,
    disjoint_union,
    dual,
    inverse,
    is_invertible,
    is_reversible,
)
from .errors import HypothesisUnmet, NotReversible, PreconditionViolated, SizeLimitExceeded
from .minimize import nerode_labels, nerode_partition
from .power import (
    DEFAULT_MEMORY_BUDGET,
    DEFAULT_SIZE_LIMIT,
    explicit_power,
    level_transitive_up_to,
    minimized_power_sizes,
    tower,
)

DEFAULT_BUDGET = 200_000

CERTIFIED = "EXPONENTIAL-CERTIFIED"
HYPOTHESIS_FAILED = "HYPOTHESIS-FAILED"
INCONCLUSIVE = "INCONCLUSIVE"
CONTRADICTION = "CONTRADICTION"
FINITE_EVIDENCE = "FINITE-EVIDENCE"
INFINITE_EVIDENCE = "INFINITE-EVIDENCE"
UNKNOWN = "UNKNOWN"
NOT_FREE = "NOT-FREE"


def free_to_depth(d: int) -> str:
    return f"FREE-TO-DEPTH({d})"


def show_word(M: MealyMachine, word) -> str:
    labels = M.state_labels
    sep = "" if all(len(s) == 1 for s in labels) else "."
    return sep.join(labels[x] for x in word)


# ---------------------------------------------------------------------------
# element enumeration


@dataclass
class RelationWitness:
    u: tuple[int, ...]
    v: tuple[int, ...]

    @property
    def lengths(self) -> tuple[int, int]:
        return len(self.u), len(self.v)

    def to_dict(self, M: Optional[MealyMachine] = None) -> dict:
        if M is None:
            return {"u": list(self.u), "v": list(self.v), "lengths": list(self.lengths)}
        return {"u": show_word(M, self.u), "v": show_word(M, self.v), "lengths": list(self.lengths)}


@dataclass
class Enumeration:
    """Elements of the generated semigroup up to ``max_len``, in shortlex order of normal forms."""

    max_len: int
    words: list[tuple[int, ...]]
    relations: list[RelationWitness]
    sizes: list[int]
    truncated: bool

    def gamma(self) -> list[int]:
        counts = np.bincount([len(w) for w in self.words], minlength=self.max_len + 1)
        return np.cumsum(counts)[1:].tolist()

    def new_at_length(self) -> list[int]:
        counts = np.bincount([len(w) for w in self.words], minlength=self.max_len + 1)
        return counts[1:].tolist()


def enumerate_elements(M: MealyMachine, max_len: int, budget: int = DEFAULT_BUDGET) -> Enumeration:
    """Breadth-first closure over products of generators, shortlex normal forms.

    Elements of length k are the states of the k-th minimized power; equal
    actions across lengths are identified by one Nerode partition of the
    disjoint union of those powers.  Each relation ``(u, v)`` pairs the
    normal form ``u`` with a word ``v = wq`` whose proper factors are all
    normal forms, so no relation follows from a shorter one by rewriting a
    factor.
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    T = tower(M)
    avail = T.extend(max_len, budget)
    total = 0
    L = 0
    for k in range(avail):
        total += T.levels[k].n_states
        if total > budget:
            break
        L = k + 1
    truncated = L < max_len
    if L == 0:
        return Enumeration(max_len, [], [], [], True)
    levels = T.levels[:L]
    union_labels, _ = nerode_labels(disjoint_union(levels)) if L > 1 else nerode_labels(levels[0])
    offsets = np.concatenate([[0], np.cumsum([B.n_states for B in levels])])
    Q = M.n_states

    element_of: dict[int, int] = {}
    words: list[tuple[int, ...]] = []
    rep: list[tuple[int, int]] = []
    index_of_word: dict[tuple[int, ...], int] = {}
    right: list[list[int]] = []
    relations: list[RelationWitness] = []

    def lookup(k: int, b: int, word: tuple[int, ...]) -> tuple[int, bool]:
        g = int(union_labels[offsets[k - 1] + b])
        if g in element_of:
            return element_of[g], False
        e = len(words)
        element_of[g] = e
        words.append(word)
        rep.append((k, b))
        index_of_word[word] = e
        right.append([])
        return e, True

    generators = []
    for q in range(Q):
        e, new = lookup(1, int(T.level1_labels[q]), (q,))
        generators.append(e)
        if not new:
            relations.append(RelationWitness(words[e], (q,)))

    head = 0
    while head < len(words):
        e = head
        head += 1
        w = words[e]
        if len(w) >= L:
            break
        k, b = rep[e]
        suffix = index_of_word.get(w[1:]) if len(w) > 1 else None
        for q in range(Q):
            f, new = lookup(k + 1, int(T.steps[k - 1][b, q]), w + (q,))
            right[e].append(f)
            if new:
                continue
            if len(w) == 1:
                suffix_reduced = words[generators[q]] == (q,)
            else:
                suffix_reduced = words[right[suffix][q]] == w[1:] + (q,)
            if suffix_reduced:
                relations.append(RelationWitness(words[f], w + (q,)))
    sizes = [B.n_states for B in levels]
    return Enumeration(L if truncated else max_len, words, relations, sizes, truncated)


def symmetric_machine(M: MealyMachine) -> MealyMachine:
    """M together with its inverse states, generating the group as a semigroup."""
    inv = inverse(M)
    n = M.n_states
    return MealyMachine(
        np.vstack([M.delta, inv.delta + n]),
        np.vstack([M.rho, inv.rho]),
        list(M.state_labels) + list(inv.state_labels),
        M.letter_labels,
    )


@dataclass
class GrowthReport:
    max_len: int
    gamma: list[int]
    new_at_length: list[int]
    sizes: list[int]
    truncated: bool = False
    symmetric: bool = False

    def to_dict(self) -> dict:
        return {
            "max_len": self.max_len,
            "gamma": self.gamma,
            "new_at_length": self.new_at_length,
            "sizes": self.sizes,
            "truncated": self.truncated,
            "symmetric": self.symmetric,
        }


def growth_function(M: MealyMachine, max_len: int, budget: int = DEFAULT_BUDGET,
                    symmetric: bool = False) -> GrowthReport:
    """gamma(k) = number of distinct elements that are products of at most k generators.

    With ``symmetric`` the generators are the states and their inverses,
    which counts the group rather than the semigroup.
    """
    G = symmetric_machine(M) if symmetric else M
    en = enumerate_elements(G, max_len, budget)
    return GrowthReport(
        max_len=en.max_len,
        gamma=en.gamma(),
        new_at_length=en.new_at_length(),
        sizes=en.sizes,
        truncated=en.truncated,
        symmetric=symmetric,
    )


@dataclass
class FreenessReport:
    verdict: str
    depth: int
    witness: Optional[RelationWitness] = None
    truncated: bool = False

    @property
    def free(self) -> bool:
        return self.witness is None

    def to_dict(self, M: Optional[MealyMachine] = None) -> dict:
        return {
            "verdict": self.verdict,
            "depth": self.depth,
            "witness": None if self.witness is None else self.witness.to_dict(M),
            "truncated": self.truncated,
        }


def freeness_check(M: MealyMachine, depth: int, budget: int = DEFAULT_BUDGET) -> FreenessReport:
    """FREE-TO-DEPTH(d) when all nonempty state words of length <= d act differently."""
    en = enumerate_elements(M, depth, budget)
    if en.relations:
        return FreenessReport(NOT_FREE, depth, en.relations[0], en.truncated)
    reached = en.max_len
    return FreenessReport(free_to_depth(reached), reached, None, en.truncated)


def find_relations(M: MealyMachine, max_len: int, budget: int = DEFAULT_BUDGET) -> list[RelationWitness]:
    return enumerate_elements(M, max_len, budget).relations


# ---------------------------------------------------------------------------
# exponential growth certificate


def _require_invertible_reversible(M: MealyMachine, error=PreconditionViolated):
    missing = [name for name, ok in (("invertible", is_invertible(M)), ("reversible", is_reversible(M))) if not ok]
    if missing:
        raise error("precondition-violated: not " + " and not ".join(missing))


@dataclass
class CertificateReport:
    verdict: str
    depth: int
    transitivity: dict
    sizes: list[int]
    ratios: list[Fraction]
    checks: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    reason: str = ""

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "depth": self.depth,
            "transitivity": self.transitivity,
            "sizes": self.sizes,
            "ratios": [[r.numerator, r.denominator] for r in self.ratios],
            "checks": self.checks,
            "witnesses": self.witnesses,
            "reason": self.reason,
        }


def exponential_growth_certificate(M: MealyMachine, depth: int,
                                   size_limit: int = DEFAULT_SIZE_LIMIT,
                                   memory_budget: int = DEFAULT_MEMORY_BUDGET) -> CertificateReport:
    """Check the exponential-growth criterion for an invertible reversible machine up to ``depth``.

    The dual must act transitively on every level up to ``depth`` of a
    tree of degree at least 2 (so at least two states); the minimized power sizes s_1..s_{depth+1} must then have integral ratios
    of at least 2, which forces s_n >= 2^n.
    """
    _require_invertible_reversible(M)
    D = dual(M)
    trans = level_transitive_up_to(D, depth, memory_budget)
    seq = minimized_power_sizes(M, depth + 1, size_limit)
    sizes, ratios = seq.sizes, seq.ratios
    checks = {
        "ratios_integral": all(r.denominator == 1 for r in ratios),
        "ratios_at_least_2": all(r >= 2 for r in ratios),
        "sizes_at_least_2_pow_n": all(s >= 2 ** n for n, s in enumerate(sizes, start=1)),
    }
    witnesses = []
    if M.n_states < 2:
        # the dual then acts on a unary tree: transitive on every level, yet nothing grows
        verdict = HYPOTHESIS_FAILED
        reason = "single state: the dual acts on a unary tree"
    elif trans.failure_level is not None:
        verdict = HYPOTHESIS_FAILED
        reason = f"dual not transitive at level {trans.failure_level}"
        witnesses = [show_word(M, w) for w in trans.witnesses]
    elif trans.truncated or seq.truncated:
        verdict = INCONCLUSIVE
        reason = "budget exhausted before reaching the requested depth"
    elif all(checks.values()):
        verdict = CERTIFIED
        reason = f"dual transitive up to level {depth}; every size ratio is an integer >= 2"
    else:
        verdict = CONTRADICTION
        reason = "hypotheses hold but the size sequence violates the growth bound"
    return CertificateReport(verdict, depth, trans.to_dict(M.state_labels), sizes, ratios,
                             checks, witnesses, reason)


# ---------------------------------------------------------------------------
# decomposition of Nerode classes of consecutive powers


@dataclass
class Lemma1Report:
    n: int
    classes_n: list[list[tuple[int, ...]]]
    classes_n1: list[list[tuple[int, ...]]]
    right: list[dict[int, int]]
    left: list[dict[int, int]]
    checks: dict
    size_ratio: Fraction
    class_ratio: Fraction
    duplicate_indices: list[dict] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(self.checks.values())

    @property
    def indices_distinct_literal(self) -> bool:
        """No two letters of Q_D (or Q'_D) share a class index, equivalent or not."""
        return not self.duplicate_indices

    def to_dict(self, M: Optional[MealyMachine] = None) -> dict:
        def show(w):
            return show_word(M, w) if M is not None else list(w)

        def show_q(q):
            return M.state_labels[q] if M is not None else q

        return {
            "n": self.n,
            "classes_n": [[show(w) for w in c] for c in self.classes_n],
            "classes_n1": [[show(w) for w in c] for c in self.classes_n1],
            "decompositions": [
                {
                    "right": {show_q(q): i for q, i in r.items()},
                    "left": {show_q(q): i for q, i in l.items()},
                }
                for r, l in zip(self.right, self.left)
            ],
            "size_ratio": [self.size_ratio.numerator, self.size_ratio.denominator],
            "class_ratio": [self.class_ratio.numerator, self.class_ratio.denominator],
            "checks": self.checks,
            "indices_distinct_literal": self.indices_distinct_literal,
            "duplicate_indices": [
                {"side": d["side"], "class": d["class"], "index": d["index"],
                 "letters": [show_q(q) for q in d["letters"]]}
                for d in self.duplicate_indices
            ],
        }


def _check_lemma1_hypotheses(M: MealyMachine, n: int, memory_budget: int):
    if not is_invertible(M):
        raise HypothesisUnmet("invertible")
    if not is_reversible(M):
        raise HypothesisUnmet("reversible")
    trans = level_transitive_up_to(dual(M), n + 1, memory_budget)
    if not trans.transitive:
        what = f"dual level-transitive up to level {n + 1}"
        if trans.failure_level is not None:
            raise HypothesisUnmet(f"{what} (fails at level {trans.failure_level})",
                                  [show_word(M, w) for w in trans.witnesses])
        raise HypothesisUnmet(f"{what} (memory budget exceeded)")


def _word(code: int, Q: int, length: int) -> tuple[int, ...]:
    out = []
    for _ in range(length):
        code, r = divmod(code, Q)
        out.append(r)
    return tuple(reversed(out))


def lemma1_verify(M: MealyMachine, n: int, size_limit: int = DEFAULT_SIZE_LIMIT,
                  memory_budget: int = DEFAULT_MEMORY_BUDGET) -> Lemma1Report:
    """Decompose each Nerode class of Q^{n+1} along the classes of Q^n, on both sides.

    Every class D of Q^{n+1} should equal the disjoint union of C_{i_q} q
    over q in Q_D, and likewise of q C_{i'_q} over q in Q'_D, with
    #Q_D = #Q'_D = #D / #C.  The index i_q is uniquely determined by q,
    and two letters of Q_D share an index only if they are Nerode
    equivalent states.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_lemma1_hypotheses(M, n, memory_budget)
    Q = M.n_states
    required = Q ** (n + 1)
    if required > size_limit:
        raise SizeLimitExceeded(required, size_limit)
    c_of = np.asarray(nerode_partition(explicit_power(M, n, size_limit)).class_of)
    part1 = nerode_partition(explicit_power(M, n + 1, size_limit))
    C = [set() for _ in range(c_of.max() + 1)]
    for code, c in enumerate(c_of.tolist()):
        C[c].add(code)
    state_class = nerode_partition(M).class_of
    Qn = Q ** n

    right_maps, left_maps = [], []
    checks = {
        "right_well_defined": True,
        "left_well_defined": True,
        "right_reconstructs": True,
        "left_reconstructs": True,
        "indices_distinct_up_to_equivalence": True,
        "card_Q_D_equals_card_Q_prime_D": True,
        "card_Q_D_equals_class_ratio": True,
        "card_Q_D_constant": True,
        "equal_class_sizes_n": len({len(c) for c in C}) == 1,
        "equal_class_sizes_n1": len({len(d) for d in part1.classes}) == 1,
    }
    duplicates = []
    class_ratio = Fraction(len(part1.classes[0]), len(C[0]))
    qd_sizes = set()

    for j, D in enumerate(part1.classes):
        Dset = set(D)
        rsets: dict[int, set] = {}
        lsets: dict[int, set] = {}
        for code in D:
            u, q = divmod(code, Q)  # code = u*Q + q
            rsets.setdefault(q, set()).add(int(c_of[u]))
            q2, u2 = divmod(code, Qn)  # code = q*Q^n + u
            lsets.setdefault(q2, set()).add(int(c_of[u2]))
        for side, sets, key in (("right", rsets, "right_well_defined"), ("left", lsets, "left_well_defined")):
            if any(len(s) != 1 for s in sets.values()):
                checks[key] = False
        rmap = {q: min(s) for q, s in sorted(rsets.items())}
        lmap = {q: min(s) for q, s in sorted(lsets.items())}
        right_maps.append(rmap)
        left_maps.append(lmap)
        rebuilt_r = {u * Q + q for q, i in rmap.items() for u in C[i]}
        rebuilt_l = {q * Qn + u for q, i in lmap.items() for u in C[i]}
        checks["right_reconstructs"] &= rebuilt_r == Dset
        checks["left_reconstructs"] &= rebuilt_l == Dset
        for side, mp in (("right", rmap), ("left", lmap)):
            by_index: dict[int, list[int]] = {}
            for q, i in mp.items():
                by_index.setdefault(i, []).append(q)
            for i, qs in by_index.items():
                if len(qs) > 1:
                    duplicates.append({"side": side, "class": j, "index": i, "letters": qs})
                    if len({state_class[q] for q in qs}) != 1:
                        checks["indices_distinct_up_to_equivalence"] = False
        checks["card_Q_D_equals_card_Q_prime_D"] &= len(rmap) == len(lmap)
        checks["card_Q_D_equals_class_ratio"] &= Fraction(len(D), len(C[rmap[next(iter(rmap))]])) == len(rmap)
        qd_sizes.add(len(rmap))

    checks["card_Q_D_constant"] = len(qd_sizes) == 1
    s_n, s_n1 = len(C), len(part1.classes)
    size_ratio = Fraction(s_n1, s_n)
    full = all(set(r) == set(range(Q)) and set(l) == set(range(Q)) for r, l in zip(right_maps, left_maps))
    checks["same_size_iff_Q_D_full"] = (s_n == s_n1) == full
    # #Q_D . s_{n+1} = |Q| . s_n, since #D . s_{n+1} = |Q|^{n+1} and #C . s_n = |Q|^n
    checks["card_Q_D_times_s_n1_equals_Q_times_s_n"] = all(k * s_n1 == Q * s_n for k in qd_sizes)

    words_n = [[_word(c, Q, n) for c in sorted(cl)] for cl in C]
    words_n1 = [[_word(c, Q, n + 1) for c in D] for D in part1.classes]
    return Lemma1Report(n, words_n, words_n1, right_maps, left_maps, checks,
                        size_ratio, class_ratio, duplicates)


# ---------------------------------------------------------------------------
# stabilization and finiteness


@dataclass
class PropositionReport:
    depth: int
    sizes: list[int]
    hypothesis_holds: bool
    status: list[str]
    truncated: bool = False

    @property
    def holds(self) -> bool:
        return "FAILS" not in self.status

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "sizes": self.sizes,
            "hypothesis_holds": self.hypothesis_holds,
            "status": {str(n): s for n, s in enumerate(self.status, start=1)},
            "truncated": self.truncated,
        }


def proposition_verify(M: MealyMachine, depth: int, size_limit: int = DEFAULT_SIZE_LIMIT,
                       memory_budget: int = DEFAULT_MEMORY_BUDGET) -> PropositionReport:
    """For each n, check s_{n+1} = s_n  =>  s_{n+2} = s_{n+1} on the computed sizes.

    ``hypothesis_holds`` records whether the dual is transitive up to
    ``depth``; without it a FAILS entry is not a counterexample.
    """
    _require_invertible_reversible(M)
    seq = minimized_power_sizes(M, depth, size_limit)
    trans = level_transitive_up_to(dual(M), depth, memory_budget)
    s = seq.sizes
    status = []
    for n in range(len(s) - 2):
        if s[n + 1] != s[n]:
            status.append("VACUOUS")
        else:
            status.append("HOLDS" if s[n + 2] == s[n + 1] else "FAILS")
    return PropositionReport(depth, s, trans.transitive, status, seq.truncated)


@dataclass
class FinitenessReport:
    verdict: str
    depth: int
    size_bound: int
    window: int
    max_component_sizes: list[int]
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "depth": self.depth,
            "size_bound": self.size_bound,
            "window": self.window,
            "max_component_sizes": self.max_component_sizes,
            "truncated": self.truncated,
        }


def finiteness_probe(M: MealyMachine, depth: int, size_bound: int, window: int = 3,
                     size_limit: int = DEFAULT_SIZE_LIMIT) -> FinitenessReport:
    """Evidence about finiteness from component sizes of the minimized powers.

    INFINITE-EVIDENCE if the largest minimized component exceeds
    ``size_bound`` or strictly grows over the last ``window`` powers;
    FINITE-EVIDENCE if it is constant over the last ``window`` powers.
    """
    if not is_reversible(M):
        raise NotReversible("not-reversible: some letter does not permute the states")
    T = tower(M)
    got = T.extend(depth, size_limit)
    maxima = [max(len(c) for c in connected_components(B)) for B in T.levels[:got]]
    tail = maxima[-window:]
    if any(m > size_bound for m in maxima):
        verdict = INFINITE_EVIDENCE
    elif len(tail) == window and all(a < b for a, b in zip(tail, tail[1:])):
        verdict = INFINITE_EVIDENCE
    elif len(tail) == window and len(set(tail)) == 1:
        verdict = FINITE_EVIDENCE
    else:
        verdict = UNKNOWN
    return FinitenessReport(verdict, depth, size_bound, window, maxima, got < depth)
