import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from mealy import MealyMachine, builtin
from mealy.census import enumerate_machines


# ---------------------------------------------------------------------------
# independent oracles (plain Python, no package algorithms)


def oracle_apply(M, u, s):
    """Image of s under the state word u, by the recursion rho_x(i s) = rho_x(i) rho_{delta_i(x)}(s)."""
    delta, rho = M.delta.tolist(), M.rho.tolist()

    def one(x, word):
        if not word:
            return ()
        i = word[0]
        return (rho[x][i],) + one(delta[x][i], word[1:])

    out = tuple(s)
    for x in u:
        out = one(x, out)
    return out


def all_words(m, max_len, min_len=0):
    for n in range(min_len, max_len + 1):
        yield from itertools.product(range(m), repeat=n)


def action_table(M, u, max_len):
    return tuple(oracle_apply(M, u, s) for s in all_words(M.n_letters, max_len))


def oracle_partition(M, depth=None):
    """States grouped by agreement on every letter word of length <= depth (default: n_states)."""
    depth = M.n_states if depth is None else depth
    groups = {}
    for x in range(M.n_states):
        groups.setdefault(action_table(M, (x,), depth), []).append(x)
    return sorted(groups.values())


def oracle_power(M, n):
    """Explicit power as dict tables over tuples of states."""
    words = list(itertools.product(range(M.n_states), repeat=n))
    delta, rho = {}, {}
    for w in words:
        for i in range(M.n_letters):
            c, nxt = i, []
            for x in w:
                nxt.append(int(M.delta[x, c]))
                c = int(M.rho[x, c])
            delta[w, i] = tuple(nxt)
            rho[w, i] = c
    return words, delta, rho


def oracle_class_count(M, n):
    """Number of Nerode classes of Q^n by naive Moore refinement on tuples."""
    words, delta, rho = oracle_power(M, n)
    m = M.n_letters
    cls = {w: tuple(rho[w, i] for i in range(m)) for w in words}
    while True:
        new = {w: (cls[w],) + tuple(cls[delta[w, i]] for i in range(m)) for w in words}
        if len(set(new.values())) == len(set(cls.values())):
            return len(set(cls.values()))
        cls = new


def oracle_orbit_is_full(M, n):
    start = (0,) * n
    seen = {start}
    todo = [start]
    while todo:
        w = todo.pop()
        for x in range(M.n_states):
            img = oracle_apply(M, (x,), w)
            if img not in seen:
                seen.add(img)
                todo.append(img)
    return len(seen) == M.n_letters ** n


# ---------------------------------------------------------------------------
# machines


@pytest.fixture
def fig1():
    return builtin("fig1")


@pytest.fixture
def adding():
    return builtin("adding")


def random_machine(rng, k, m, invertible=False, reversible=False):
    if reversible:
        delta = np.stack([rng.permutation(k) for _ in range(m)], axis=1)
    else:
        delta = rng.integers(0, k, size=(k, m))
    if invertible:
        rho = np.stack([rng.permutation(m) for _ in range(k)])
    else:
        rho = rng.integers(0, m, size=(k, m))
    return MealyMachine(delta, rho)


def _corpus():
    rng = np.random.default_rng(20161015)
    machines = [builtin("fig1"), builtin("adding"), builtin("identity1x1"),
                builtin("identity1x2"), builtin("identity2x2"), builtin("identity3x2")]
    machines += list(enumerate_machines(2, 2, invertible=True, reversible=True))
    for k, m in [(3, 2), (2, 3), (3, 3)]:
        machines.append(random_machine(rng, k, m, invertible=True, reversible=True))
        machines.append(random_machine(rng, k, m, invertible=True))
        machines.append(random_machine(rng, k, m))
    return machines


CORPUS = _corpus()
INVERTIBLE_CORPUS = [M for M in CORPUS if (np.sort(M.rho, axis=1) == np.arange(M.n_letters)).all()]


@st.composite
def machines(draw, max_states=3, max_letters=3, invertible=None, reversible=None):
    k = draw(st.integers(1, max_states))
    m = draw(st.integers(1, max_letters))
    inv = draw(st.booleans()) if invertible is None else invertible
    rev = draw(st.booleans()) if reversible is None else reversible
    if rev:
        cols = [draw(st.permutations(range(k))) for _ in range(m)]
        delta = [[cols[i][x] for i in range(m)] for x in range(k)]
    else:
        delta = [[draw(st.integers(0, k - 1)) for _ in range(m)] for _ in range(k)]
    if inv:
        rho = [list(draw(st.permutations(range(m)))) for _ in range(k)]
    else:
        rho = [[draw(st.integers(0, m - 1)) for _ in range(m)] for _ in range(k)]
    return MealyMachine(delta, rho)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
