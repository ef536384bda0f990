"""Exhaustive enumeration and classification of small Mealy automata."""

from __future__ import annotations

import csv
import itertools
import math
import os
import string
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import analysis
from .core import MealyMachine, dual, is_connected, is_invertible, is_reversible
from .errors import CapExceeded, MealyError
from .fmt import dumps, loads
from .minimize import nerode_partition
from .power import level_transitive_up_to, minimized_power_sizes

DEFAULT_CAP = 200_000

CSV_COLUMNS = ["machine", "states", "letters", "invertible", "reversible", "connected",
               "msize", "dual_lt_depth", "verdict", "sizes", "free", "rel_len"]


def _state_names(k: int) -> list[str]:
    if k <= 26:
        return list(string.ascii_lowercase[:k])
    return [f"q{i}" for i in range(k)]


def raw_count(n_states: int, n_letters: int, invertible: bool = False, reversible: bool = False) -> int:
    k, m = n_states, n_letters
    deltas = math.factorial(k) ** m if reversible else k ** (k * m)
    rhos = math.factorial(m) ** k if invertible else m ** (k * m)
    return deltas * rhos


def table_key(delta: np.ndarray, rho: np.ndarray) -> tuple[int, ...]:
    return tuple(delta.reshape(-1).tolist()) + tuple(rho.reshape(-1).tolist())


def relabelings(n_states: int, n_letters: int):
    for sigma in itertools.permutations(range(n_states)):
        for tau in itertools.permutations(range(n_letters)):
            yield np.array(sigma), np.array(tau)


def relabel_tables(delta, rho, sigma, tau):
    """Tables after renaming state x to sigma[x] and letter i to tau[i]."""
    new_delta = np.empty_like(delta)
    new_rho = np.empty_like(rho)
    new_delta[np.ix_(sigma, tau)] = sigma[delta]
    new_rho[np.ix_(sigma, tau)] = tau[rho]
    return new_delta, new_rho


def canonical_key(delta, rho) -> tuple[int, ...]:
    k, m = delta.shape
    return min(table_key(*relabel_tables(delta, rho, s, t)) for s, t in relabelings(k, m))


def enumerate_machines(n_states: int, n_letters: int, invertible: bool = False,
                       reversible: bool = False, up_to_iso: bool = False,
                       cap: int = DEFAULT_CAP) -> Iterator[MealyMachine]:
    """Every machine with the given sizes and filters, in lexicographic table order.

    With ``up_to_iso`` only the lexicographically least table of each
    orbit under simultaneous state and letter relabeling is emitted.
    """
    if n_states < 1 or n_letters < 1:
        raise MealyError("need at least one state and one letter")
    total = raw_count(n_states, n_letters, invertible, reversible)
    if total > cap:
        raise CapExceeded(f"cap-exceeded: {total} machines, cap {cap}")
    k, m = n_states, n_letters
    if reversible:
        columns = list(itertools.permutations(range(k)))
        deltas = (np.array(cols).T for cols in itertools.product(columns, repeat=m))
    else:
        deltas = (np.array(t).reshape(k, m) for t in itertools.product(range(k), repeat=k * m))
    deltas = list(deltas)
    if invertible:
        rows = list(itertools.permutations(range(m)))
        rhos = [np.array(r) for r in itertools.product(rows, repeat=k)]
    else:
        rhos = [np.array(t).reshape(k, m) for t in itertools.product(range(m), repeat=k * m)]
    tables = sorted(((d, r) for d in deltas for r in rhos), key=lambda dr: table_key(*dr))
    states, letters = _state_names(k), [str(i) for i in range(m)]
    for d, r in tables:
        if up_to_iso and canonical_key(d, r) != table_key(d, r):
            continue
        yield MealyMachine(d, r, states, letters)


@dataclass
class CensusRecord:
    machine: str
    n_states: int
    n_letters: int
    invertible: bool
    reversible: bool
    connected: bool
    minimized_size: int
    dual_transitive_up_to: int
    certificate_verdict: str
    sizes: list[int]
    freeness: str
    relation_length: Optional[int]
    error: Optional[str] = None

    def to_row(self) -> dict:
        def b(v):
            return "true" if v else "false"

        verdict = self.certificate_verdict if self.error is None else f"ERROR: {self.error}"
        return {
            "machine": self.machine,
            "states": self.n_states,
            "letters": self.n_letters,
            "invertible": b(self.invertible),
            "reversible": b(self.reversible),
            "connected": b(self.connected),
            "msize": self.minimized_size,
            "dual_lt_depth": self.dual_transitive_up_to,
            "verdict": verdict,
            "sizes": ";".join(map(str, self.sizes)),
            "free": self.freeness,
            "rel_len": "" if self.relation_length is None else self.relation_length,
        }

    @classmethod
    def from_row(cls, row: dict) -> "CensusRecord":
        verdict = row["verdict"]
        error = verdict[len("ERROR: "):] if verdict.startswith("ERROR: ") else None
        return cls(
            machine=row["machine"],
            n_states=int(row["states"]),
            n_letters=int(row["letters"]),
            invertible=row["invertible"] == "true",
            reversible=row["reversible"] == "true",
            connected=row["connected"] == "true",
            minimized_size=int(row["msize"]),
            dual_transitive_up_to=int(row["dual_lt_depth"]),
            certificate_verdict=verdict if error is None else "",
            sizes=[int(s) for s in row["sizes"].split(";") if s],
            freeness=row["free"],
            relation_length=int(row["rel_len"]) if row["rel_len"] else None,
            error=error,
        )


def classify(M: MealyMachine, depth: int) -> CensusRecord:
    inv, rev = is_invertible(M), is_reversible(M)
    record = CensusRecord(
        machine=dumps(M),
        n_states=M.n_states,
        n_letters=M.n_letters,
        invertible=inv,
        reversible=rev,
        connected=is_connected(M),
        minimized_size=len(nerode_partition(M)),
        dual_transitive_up_to=0,
        certificate_verdict="N/A",
        sizes=[],
        freeness="",
        relation_length=None,
    )
    try:
        record.dual_transitive_up_to = level_transitive_up_to(dual(M), depth).transitive_up_to
        record.sizes = minimized_power_sizes(M, depth).sizes
        if inv and rev:
            record.certificate_verdict = analysis.exponential_growth_certificate(M, depth).verdict
        free = analysis.freeness_check(M, depth)
        record.freeness = free.verdict
        if free.witness is not None:
            record.relation_length = len(free.witness.v)
    except MealyError as exc:
        record.error = str(exc)
    return record


def _classify_args(args):
    text, depth = args
    return classify(loads(text), depth)


def _order_key(record: CensusRecord):
    M = loads(record.machine)
    return (record.n_states, record.n_letters, table_key(M.delta, M.rho))


def read_csv(path) -> list[CensusRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [CensusRecord.from_row(row) for row in reader]


def write_csv(path, records: list[CensusRecord]) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in records:
            writer.writerow(r.to_row())
    os.replace(tmp, path)


@dataclass
class CensusSummary:
    total: int
    depth: int
    verdicts: dict = field(default_factory=dict)
    freeness: dict = field(default_factory=dict)
    dual_transitive_full_depth: int = 0
    prime_freeness_violations: list[str] = field(default_factory=list)
    errors: int = 0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "depth": self.depth,
            "verdicts": self.verdicts,
            "freeness": self.freeness,
            "dual_transitive_full_depth": self.dual_transitive_full_depth,
            "prime_freeness_violations": self.prime_freeness_violations,
            "errors": self.errors,
        }


def _is_prime(k: int) -> bool:
    return k >= 2 and all(k % p for p in range(2, math.isqrt(k) + 1))


def summarize(records: list[CensusRecord], depth: int) -> CensusSummary:
    """Counts per verdict, plus machines contradicting the prime-size freeness result.

    A violation is a reversible machine with a prime number of states
    whose dual is transitive to ``depth`` but which is not free to ``depth``.
    """
    summary = CensusSummary(total=len(records), depth=depth)
    summary.verdicts = dict(sorted(Counter(r.certificate_verdict for r in records if r.error is None).items()))
    summary.freeness = dict(sorted(Counter(r.freeness for r in records if r.error is None).items()))
    summary.errors = sum(r.error is not None for r in records)
    for r in records:
        full = r.dual_transitive_up_to >= depth
        summary.dual_transitive_full_depth += full
        if full and r.reversible and _is_prime(r.n_states) and r.freeness == analysis.NOT_FREE:
            summary.prime_freeness_violations.append(r.machine)
    return summary


def classify_census(n_states: int, n_letters: int, depth: int, invertible: bool = True,
                    reversible: bool = True, up_to_iso: bool = False, out=None,
                    jobs: int = 1, cap: int = DEFAULT_CAP) -> tuple[list[CensusRecord], CensusSummary]:
    """Run the analysis pipeline on every enumerated machine.

    When ``out`` names an existing CSV file, machines already recorded there
    are not recomputed; the file is rewritten with all records in canonical
    order.
    """
    existing: dict[str, CensusRecord] = {}
    if out is not None and os.path.exists(out):
        existing = {r.machine: r for r in read_csv(out)}
    machines = [dumps(M) for M in enumerate_machines(n_states, n_letters, invertible, reversible, up_to_iso, cap)]
    todo = [text for text in machines if text not in existing]
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            fresh = list(pool.map(_classify_args, [(t, depth) for t in todo]))
    else:
        fresh = [classify(loads(t), depth) for t in todo]
    merged = dict(existing)
    merged.update((r.machine, r) for r in fresh)
    wanted = set(machines)
    records = sorted((r for r in merged.values() if r.machine in wanted), key=_order_key)
    if out is not None:
        write_csv(out, sorted(merged.values(), key=_order_key))
    return records, summarize(records, depth)
