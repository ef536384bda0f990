import io
import json
import os
from pathlib import Path

import pytest

from mealy import builtin, loads
from mealy.cli import run_command
from mealy.core import MealyMachine

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("MEALY_REGEN_GOLDEN") == "1"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


# name, argv, expected exit code, output kind
COMMANDS = [
    ("info", ["info", "builtin:fig1"], 0, "report"),
    ("dual", ["dual", "builtin:fig1"], 0, "machine"),
    ("inverse", ["inverse", "builtin:fig1"], 0, "machine"),
    ("minimize", ["minimize", "builtin:fig1"], 0, "machine"),
    ("product", ["product", "builtin:fig1", "builtin:identity1x2"], 0, "machine"),
    ("power", ["power", "-n", "2", "builtin:adding"], 0, "machine"),
    ("apply", ["apply", "-u", "x", "-s", "0101", "builtin:fig1"], 0, "report"),
    ("transitive", ["transitive", "--depth", "8", "--dual", "builtin:fig1"], 0, "report"),
    ("transitive_fail", ["transitive", "--depth", "1", "builtin:identity1x2"], 1, "report"),
    ("msizes", ["msizes", "--depth", "6", "builtin:fig1"], 0, "report"),
    ("growth", ["growth", "--max-len", "5", "builtin:fig1"], 0, "report"),
    ("certify", ["certify", "--depth", "8", "builtin:fig1"], 0, "report"),
    ("certify_identity", ["certify", "--depth", "4", "builtin:identity2x2"], 1, "report"),
    ("lemma1", ["verify-lemma1", "-n", "2", "builtin:fig1"], 0, "report"),
    ("proposition", ["verify-proposition", "--depth", "6", "builtin:identity1x2"], 0, "report"),
    ("finiteness", ["finiteness", "--depth", "6", "--bound", "100", "builtin:fig1"], 0, "report"),
    ("freeness", ["freeness", "--depth", "6", "builtin:fig1"], 1, "report"),
    ("relations", ["relations", "--max-len", "1", "builtin:fig1"], 0, "report"),
    ("builtin", ["builtin", "adding"], 0, "machine"),
]


def machine_from_json(doc):
    states, letters = doc["states"], doc["letters"]
    delta = [[0] * len(letters) for _ in states]
    rho = [[0] * len(letters) for _ in states]
    for s, a, t, b in doc["transitions"]:
        i, j = states.index(s), letters.index(a)
        delta[i][j] = states.index(t)
        rho[i][j] = letters.index(b)
    return MealyMachine(delta, rho, states, letters)


def text_facts(text):
    lines = text.splitlines()
    facts = {}
    for line in lines[1:]:
        key, _, value = line.partition(": ")
        try:
            facts[key] = json.loads(value)
        except json.JSONDecodeError:
            facts[key] = value
    return facts


def check_golden(name, suffix, content):
    path = GOLDEN / f"{name}.{suffix}"
    if REGEN or not path.exists():
        GOLDEN.mkdir(exist_ok=True)
        path.write_text(content)
    assert content == path.read_text()


@pytest.mark.parametrize("name, argv, code, kind", COMMANDS, ids=[c[0] for c in COMMANDS])
def test_golden_pairs(name, argv, code, kind):
    c_text, text, err = run(*argv)
    c_json, raw, _ = run("--json", *argv)
    assert c_text == c_json == code, err
    check_golden(name, "txt", text)
    check_golden(name, "json", raw)
    doc = json.loads(raw)
    if kind == "machine":
        assert loads(text) == machine_from_json(doc)
    else:
        assert text_facts(text) == doc


@pytest.mark.parametrize("name, argv, code, kind", COMMANDS, ids=[c[0] for c in COMMANDS])
def test_deterministic(name, argv, code, kind):
    assert run(*argv) == run(*argv)


def test_info_example():
    code, out, _ = run("info", "builtin:fig1")
    assert code == 0
    facts = text_facts(out)
    assert out.startswith("4 states, 2 letters")
    assert (facts["invertible"], facts["reversible"], facts["connected"], facts["msize"]) == (True, True, True, 2)


def test_transitive_examples():
    code, out, _ = run("transitive", "--depth", "8", "--dual", "builtin:fig1")
    assert code == 0 and "transitive up to level 8" in out
    code, out, _ = run("--json", "transitive", "--depth", "1", "builtin:identity1x2")
    doc = json.loads(out)
    assert code == 1
    assert doc["failure_level"] == 1
    assert doc["witnesses"] == [["0"], ["1"]]


def test_flags_after_subcommand():
    code, out, _ = run("info", "--json", "builtin:fig1")
    assert code == 0 and json.loads(out)["msize"] == 2


def test_usage_errors():
    assert run()[0] == 2
    assert run("nope")[0] == 2
    assert run("transitive", "builtin:fig1")[0] == 2
    code, _, err = run("info", "builtin:nosuch")
    assert code == 2 and err


def test_input_errors(tmp_path):
    bad = tmp_path / "bad.mealy"
    bad.write_text("states a\nletters 0 1\na 0 -> a 0\n")
    code, out, err = run("info", str(bad))
    assert code == 2
    assert out == ""
    assert "incomplete: state a, letter 1" in err
    code, _, err = run("info", str(tmp_path / "missing.mealy"))
    assert code == 2


def test_reversible_only_rejects_adding():
    code, _, err = run("certify", "--depth", "4", "builtin:adding")
    assert code == 2 and "not reversible" in err
    code, _, err = run("finiteness", "--depth", "4", "--bound", "10", "builtin:adding")
    assert code == 2 and "not-reversible" in err


def test_power_limit():
    code, _, err = run("power", "-n", "20", "--limit", "1000", "builtin:fig1")
    assert code == 2 and "size-limit-exceeded" in err


def test_budget_flags_reported():
    code, out, _ = run("--json", "transitive", "--depth", "12", "--budget", "64", "--dual", "builtin:fig1")
    doc = json.loads(out)
    # a partial report is flagged, not a failed property
    assert doc["truncated"] is True
    assert doc["levels_checked"] == 3
    assert code == 0


def test_export_dot(fig1):
    code, out, _ = run("export-dot", "builtin:fig1")
    assert code == 0
    assert '"z" -> "y" [label="1|0"];' in out


def test_read_machine_file(tmp_path):
    path = tmp_path / "m.mealy"
    code, out, _ = run("inverse", "builtin:adding")
    path.write_text(out)
    code, again, _ = run("inverse", str(path))
    assert code == 0
    assert loads(again).same_tables(builtin("adding"))


def test_census_command(tmp_path):
    out = tmp_path / "c.csv"
    argv = ["census", "--states", "2", "--letters", "2", "--depth", "6", "--out", str(out)]
    code, text, _ = run(*argv)
    assert code == 0
    assert out.read_text().startswith("machine,states,letters,")
    first = out.read_bytes()
    assert run(*argv)[1] == text
    assert out.read_bytes() == first
    doc = json.loads(run("--json", *argv)[1])
    assert doc["total"] == 16
    assert doc["prime_freeness_violations"] == []
