import csv
import itertools
from fractions import Fraction
from math import factorial

import numpy as np
import pytest

from mealy import builtin
from mealy.analysis import CERTIFIED, FINITE_EVIDENCE, finiteness_probe
from mealy.census import (
    CSV_COLUMNS,
    CensusRecord,
    classify,
    classify_census,
    enumerate_machines,
    raw_count,
    read_csv,
    summarize,
    write_csv,
)
from mealy.core import is_invertible, is_reversible
from mealy.errors import CapExceeded, MealyError


def closed_form(k, m, invertible, reversible):
    if invertible and reversible:
        return factorial(k) ** m * factorial(m) ** k
    if invertible:
        return factorial(m) ** k * k ** (k * m)
    if reversible:
        return factorial(k) ** m * m ** (k * m)
    return (k * m) ** (k * m)


def _apply_relabel(delta, rho, sigma, tau):
    k, m = delta.shape
    d2 = np.empty_like(delta)
    r2 = np.empty_like(rho)
    for q in range(k):
        for i in range(m):
            d2[sigma[q], tau[i]] = sigma[delta[q, i]]
            r2[sigma[q], tau[i]] = tau[rho[q, i]]
    return d2, r2


def burnside_count(k, m, invertible, reversible):
    """Orbits under state and letter renamings, by averaging fixed-point counts."""
    tables = [(M.delta, M.rho) for M in enumerate_machines(k, m, invertible, reversible)]
    group = list(itertools.product(itertools.permutations(range(k)), itertools.permutations(range(m))))
    fixed = 0
    for sigma, tau in group:
        for d, r in tables:
            d2, r2 = _apply_relabel(d, r, sigma, tau)
            fixed += np.array_equal(d, d2) and np.array_equal(r, r2)
    count = Fraction(fixed, len(group))
    assert count.denominator == 1
    return int(count)


SHAPES = [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (3, 2), (2, 3)]


@pytest.mark.parametrize("k, m", SHAPES)
@pytest.mark.parametrize("inv, rev", [(True, True), (True, False), (False, True), (False, False)])
def test_raw_counts(k, m, inv, rev):
    expect = closed_form(k, m, inv, rev)
    assert raw_count(k, m, inv, rev) == expect
    if expect <= 5000:
        machines = list(enumerate_machines(k, m, inv, rev))
        assert len(machines) == expect
        assert all(is_invertible(M) >= inv and is_reversible(M) >= rev for M in machines)
        assert len({M for M in machines}) == expect


def test_two_by_two_counts():
    assert len(list(enumerate_machines(2, 2, True, True))) == 16
    assert len(list(enumerate_machines(2, 2, True, True, up_to_iso=True))) == 9
    assert len(list(enumerate_machines(2, 2, up_to_iso=True))) == 76


@pytest.mark.parametrize("k, m, inv, rev", [
    (2, 2, True, True), (2, 2, False, False), (3, 2, True, True), (2, 3, True, True),
    (3, 2, True, False), (1, 3, False, False),
])
def test_iso_count_matches_burnside(k, m, inv, rev):
    got = len(list(enumerate_machines(k, m, inv, rev, up_to_iso=True)))
    assert got == burnside_count(k, m, inv, rev)


def test_enumeration_is_lexicographic_and_deterministic():
    a = [M.delta.tolist() + M.rho.tolist() for M in enumerate_machines(2, 2, True, True)]
    b = [M.delta.tolist() + M.rho.tolist() for M in enumerate_machines(2, 2, True, True)]
    assert a == b
    keys = [tuple(itertools.chain(M.delta.ravel(), M.rho.ravel())) for M in enumerate_machines(2, 2, True, True)]
    assert keys == sorted(keys)


def test_cap():
    with pytest.raises(CapExceeded):
        list(enumerate_machines(3, 3, cap=100))


def test_classify_fig1(fig1):
    rec = classify(fig1, 6)
    assert rec.certificate_verdict == CERTIFIED
    assert rec.freeness == "NOT-FREE"
    assert rec.relation_length == 1
    assert rec.minimized_size == 2
    assert rec.sizes == [2, 4, 8, 16, 32, 64]


def test_classify_non_reversible(adding):
    rec = classify(adding, 4)
    assert rec.certificate_verdict == "N/A"
    assert rec.error is None


def test_classify_records_errors(monkeypatch, fig1):
    from mealy import analysis

    def boom(*args, **kwargs):
        raise MealyError("size-limit-exceeded: required 10, allowed 1")

    monkeypatch.setattr(analysis, "freeness_check", boom)
    rec = classify(fig1, 3)
    assert rec.error.startswith("size-limit-exceeded")
    assert rec.to_row()["verdict"].startswith("ERROR")


def test_csv_columns_and_roundtrip(tmp_path):
    out = tmp_path / "c.csv"
    records, summary = classify_census(2, 2, 6, out=out)
    with open(out, newline="") as fh:
        reader = csv.DictReader(fh)
        assert reader.fieldnames == CSV_COLUMNS
        rows = list(reader)
    assert len(rows) == 16
    assert all(r["invertible"] in ("true", "false") for r in rows)
    again = read_csv(out)
    assert [r.to_row() for r in again] == [r.to_row() for r in records]
    assert summary.total == 16


def test_census_rerun_is_idempotent(tmp_path, monkeypatch):
    from mealy import census

    out = tmp_path / "c.csv"
    classify_census(2, 2, 5, out=out)
    first = out.read_bytes()
    calls = []
    real = census.classify
    monkeypatch.setattr(census, "classify", lambda M, d: calls.append(1) or real(M, d))
    classify_census(2, 2, 5, out=out)
    assert calls == []
    assert out.read_bytes() == first


def test_census_resumes_partial_file(tmp_path):
    out = tmp_path / "c.csv"
    full, _ = classify_census(2, 2, 5, out=out)
    write_csv(out, full[:5])
    again, _ = classify_census(2, 2, 5, out=out)
    assert [r.to_row() for r in again] == [r.to_row() for r in full]


def test_parallel_matches_serial():
    a, _ = classify_census(2, 2, 5)
    b, _ = classify_census(2, 2, 5, jobs=2)
    assert [r.to_row() for r in a] == [r.to_row() for r in b]


def test_row_roundtrip_with_missing_values():
    rec = CensusRecord("states q\n", 1, 1, True, True, True, 1, 0, "N/A", [], "", None)
    assert CensusRecord.from_row(rec.to_row()).to_row() == rec.to_row()


@pytest.fixture(scope="module")
def census_3x2():
    return classify_census(3, 2, 8)


def test_prime_size_freeness_consistency(census_3x2):
    for records, depth in (classify_census(2, 2, 10)[0], 10), (census_3x2[0], 8):
        assert summarize(records, depth).prime_freeness_violations == []
        for rec in records:
            if rec.dual_transitive_up_to >= depth:
                assert rec.freeness == f"FREE-TO-DEPTH({depth})"


def test_certified_records_satisfy_hooks(census_3x2):
    records, _ = census_3x2
    for rec in records:
        if rec.certificate_verdict == CERTIFIED:
            s = rec.sizes
            assert rec.dual_transitive_up_to == 8
            for n in range(len(s) - 1):
                assert s[n + 1] % s[n] == 0 and s[n + 1] >= 2 * s[n]


def test_no_machine_both_finite_and_certified(census_3x2):
    records, _ = census_3x2
    from mealy import loads

    for rec in records:
        if rec.certificate_verdict == CERTIFIED:
            assert finiteness_probe(loads(rec.machine), 8, 10_000).verdict != FINITE_EVIDENCE


def test_summary_counts(census_3x2):
    records, summary = census_3x2
    assert summary.total == 6 ** 2 * 2 ** 3 == len(records)
    assert sum(summary.verdicts.values()) + summary.errors == summary.total


def test_summary_flags_violation():
    rec = classify(builtin("identity1x2"), 4)
    # identity dual has two singleton orbits, so no violation
    assert summarize([rec], 4).prime_freeness_violations == []
    fake = CensusRecord("m", 3, 2, True, True, True, 3, 4, CERTIFIED, [3], "NOT-FREE", 2)
    assert summarize([fake], 4).prime_freeness_violations == ["m"]


def test_identity_fails_dual_transitivity_at_level_one():
    records, _ = classify_census(2, 2, 6)
    failing = [r.machine for r in records if r.dual_transitive_up_to == 0]
    ident = builtin("identity2x2").relabel(state_labels=["a", "b"])
    from mealy import dumps

    assert dumps(ident) in failing
