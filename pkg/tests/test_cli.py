import csv
import json
from pathlib import Path

import numpy as np
import pytest

from fjsignal import cli, examples, serialization
from fjsignal.errors import DimensionMismatch, InputError, InvalidScheme
from fjsignal.objectives import Objective, expected_value
from fjsignal.optimizer import full_revelation_scheme, no_signal_scheme

FIXTURES = Path(__file__).parent / "fixtures"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def friends_file():
    return FIXTURES / "two_friends_range.json"


def instances():
    base = examples.two_friends()
    return [
        base,
        examples.two_friends("norm"),
        examples.four_stubborn(),
        base.replace(objective=Objective.range_threshold(2)),
        base.replace(objective=Objective.range_weighted([([(0, 0), (1, 0)], 2.5)])),
        base.replace(objective=Objective.disagreement([(0, 1, 0.3)], sense="max")),
        base.replace(objective=Objective.norm_distance([0.1, 0.2], p=np.inf)),
    ]


@pytest.mark.parametrize("inst", instances())
def test_instance_round_trip(inst, tmp_path):
    path = tmp_path / "i.json"
    serialization.save_instance(inst, path)
    back = serialization.load_instance(path)
    assert serialization.instance_to_dict(back) == serialization.instance_to_dict(inst)
    for f in ("influence", "susceptibility", "preconceptions", "prior"):
        assert np.max(np.abs(getattr(back, f) - getattr(inst, f))) <= 1e-12


@pytest.mark.parametrize("path", sorted(FIXTURES.glob("*.json")))
def test_fixture_files_round_trip(path):
    doc = json.loads(path.read_text())
    again = serialization.instance_to_dict(serialization.instance_from_dict(doc))
    assert json.loads(json.dumps(again)) == doc


def test_scheme_round_trip():
    inst = examples.two_friends()
    scheme = full_revelation_scheme(inst)
    doc = serialization.scheme_to_dict(inst, scheme, "x")
    back = serialization.scheme_from_dict(json.loads(json.dumps(doc)), inst.prior)
    np.testing.assert_array_equal(back.phi, scheme.phi)
    without_phi = {"signals": [{k: v for k, v in s.items() if k != "phi_column"} for s in doc["signals"]]}
    back = serialization.scheme_from_dict(without_phi, inst.prior)
    assert expected_value(inst, back) == pytest.approx(doc["expected_value"])


def test_scheme_errors():
    prior = [0.5, 0.5]
    bad_sum = {"signals": [{"prob": 0.3, "posterior": [1, 0]}] * 3}
    with pytest.raises(InvalidScheme):
        serialization.scheme_from_dict(bad_sum, prior)
    with pytest.raises(DimensionMismatch):
        serialization.scheme_from_dict({"signals": [{"prob": 1, "posterior": [1, 0, 0]}]}, prior)
    with pytest.raises(InputError):
        serialization.scheme_from_dict({"signals": [{"posterior": [1, 0]}]}, prior)


def test_solve_two_state(capsys, friends_file, tmp_path):
    out = tmp_path / "s.json"
    code, text, _ = run(capsys, "solve", friends_file, "--method", "two-state", "-o", out)
    assert code == 0 and "method: two-state" in text and "value: 1.5" in text
    doc = json.loads(out.read_text())
    assert doc["expected_value"] == pytest.approx(1.5)
    assert sum(s["prob"] for s in doc["signals"]) == pytest.approx(1)
    code, text, _ = run(capsys, "eval", friends_file, out)
    assert code == 0
    assert float(text.split()[-1]) == pytest.approx(doc["expected_value"], abs=1e-7)


def test_solve_auto_on_separated_variant(capsys, tmp_path):
    out = tmp_path / "s.json"
    code, text, _ = run(capsys, "solve", FIXTURES / "four_stubborn_separated.json", "-o", out)
    assert code == 0 and "value: 3.33333333333" in text
    assert len(json.loads(out.read_text())["signals"]) == 2


def test_eval_no_signal_norm(capsys, tmp_path):
    inst = examples.two_friends("norm")
    path = tmp_path / "ns.json"
    serialization.save_scheme(inst, no_signal_scheme(inst), path)
    code, text, _ = run(capsys, "eval", FIXTURES / "two_friends_norm.json", path)
    assert code == 0 and float(text.split()[-1]) == pytest.approx(np.sqrt(0.08))


def test_oracle_verb(capsys):
    code, text, _ = run(capsys, "oracle", FIXTURES / "two_friends_range.json", "-R", "12")
    assert code == 0 and float(text.splitlines()[0].split()[-1]) == pytest.approx(1.5)
    code, text, _ = run(capsys, "--quiet", "oracle", FIXTURES / "four_stubborn_separated.json", "-R", "10")
    assert text.strip() == "oracle: 3.33333333333"


def test_report_two_friends(capsys, tmp_path):
    out = tmp_path / "r.csv"
    code, _, _ = run(capsys, "report", FIXTURES / "two_friends_range.json", "-o", out)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    xs = [float(r["x"]) for r in rows]
    assert any(abs(x - 0.625) < 1e-12 for x in xs) and any(abs(x - 2 / 3) < 1e-12 for x in xs)


def test_report_four_stubborn_profile(capsys):
    code, text, _ = run(capsys, "report", FIXTURES / "four_stubborn_separated.json")
    assert code == 0
    rows = [tuple(map(float, line.split(","))) for line in text.strip().splitlines()[1:]]
    values = dict(rows)
    assert values[0.3] == 3 and values[0.9] == 4 and values[0.0] == 2
    # consecutive distinct values along x
    seq = [v for _, v in sorted(rows)]
    compressed = [v for i, v in enumerate(seq) if i == 0 or v != seq[i - 1]]
    assert compressed == [2, 3, 2, 1, 0, 3, 4]


def test_report_single_full_range(capsys, tmp_path):
    path = tmp_path / "one.json"
    serialization.save_instance(
        examples.four_stubborn([[(0.0, 1.0)], [], [], []]).replace(objective=Objective.range_count()), path
    )
    code, text, _ = run(capsys, "report", path)
    assert code == 0 and {line.split(",")[1] for line in text.strip().splitlines()[1:]} == {"1.0"}


def test_report_needs_two_states(capsys, tmp_path):
    path = tmp_path / "h.json"
    assert run(capsys, "gen-hardness", FIXTURES / "path3.txt", "-o", path)[0] == 0
    assert run(capsys, "report", path)[0] == 3


def test_gen_hardness(capsys, tmp_path):
    path = tmp_path / "h.json"
    code, _, _ = run(capsys, "gen-hardness", FIXTURES / "path3.txt", "-o", path)
    doc = json.loads(path.read_text())
    assert code == 0 and doc["agents"] == doc["states"] == 3
    assert doc["prior"] == pytest.approx([1 / 3] * 3)
    tri = tmp_path / "tri.txt"
    tri.write_text("n 3\n0 1\n1 2\n0 2\n")
    run(capsys, "gen-hardness", tri, "-o", path)
    s = np.array(json.loads(path.read_text())["preconceptions"])
    assert np.all(s[~np.eye(3, dtype=bool)] == 0)
    code, _, _ = run(capsys, "--seed", "3", "gen-hardness", "--random-vertices", "25", "-o", path)
    assert code == 0 and json.loads(path.read_text())["agents"] == 25


def _write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return p


def broken_inputs(tmp_path):
    good = json.loads((FIXTURES / "two_friends_range.json").read_text())
    bad_prior = dict(good, prior=[0.6, 0.6])
    bad_shape = dict(good, preconceptions=[[0, 1, 0.5], [0.3, 0.7, 0.5]])
    bad_kind = dict(good, objective={"kind": "teleport"})
    periodic = dict(good, susceptibility=[1, 1])
    return [
        (["solve", tmp_path / "missing.json"], 1),
        (["solve", _write(tmp_path, "trunc.json", '{"agents": 2,\n "states": ')], 1),
        (["solve", _write(tmp_path, "kind.json", bad_kind)], 1),
        (["solve", _write(tmp_path, "prior.json", bad_prior)], 2),
        (["solve", _write(tmp_path, "shape.json", bad_shape)], 2),
        (["solve", _write(tmp_path, "periodic.json", periodic)], 3),
        (["solve", FIXTURES / "two_friends_norm.json", "--method", "two-state"], 3),
        (["solve", FIXTURES / "two_friends_range.json", "--method", "convex"], 3),
        (["solve", FIXTURES / "four_stubborn.json", "--method", "monotone"], 3),
        (["eval", FIXTURES / "two_friends_range.json", _write(tmp_path, "s.json", {"signals": [{"prob": 0.3, "posterior": [1, 0]}] * 3})], 2),
        (["eval", FIXTURES / "two_friends_range.json", _write(tmp_path, "d.json", {"signals": [{"prob": 1, "posterior": [1, 0, 0]}]})], 2),
        (["gen-hardness", _write(tmp_path, "loop.txt", "n 2\n1 1\n"), "-o", tmp_path / "x.json"], 1),
        (["gen-hardness", tmp_path / "nothing.txt", "-o", tmp_path / "x.json"], 1),
    ]


def test_exit_code_matrix(capsys, tmp_path):
    for argv, expected in broken_inputs(tmp_path):
        code, _, err = run(capsys, *argv)
        assert code == expected, (argv, err)
        assert err.startswith("error:")


def test_validation_message_lists_violations(capsys, tmp_path):
    good = json.loads((FIXTURES / "two_friends_range.json").read_text())
    code, _, err = run(capsys, "solve", _write(tmp_path, "p.json", dict(good, prior=[0.6, 0.6])))
    assert code == 2 and "prior.sum" in err


def test_parse_error_has_line_context(capsys, tmp_path):
    code, _, err = run(capsys, "solve", _write(tmp_path, "t.json", '{\n"agents": 2,\n oops}'))
    assert code == 1 and "t.json:3:" in err


def test_consensus_instance_is_solved_through_its_reduction(capsys, tmp_path):
    good = json.loads((FIXTURES / "two_friends_range.json").read_text())
    doc = dict(good, influence=[[0.5, 0.5], [0.5, 0.5]], susceptibility=[1, 1])
    code, text, _ = run(capsys, "solve", _write(tmp_path, "fdg.json", doc))
    assert code == 0 and "method: two-state" in text
    # consensus rows (0.15, 0.85): both agents reach 0.6 once x >= 9/14
    assert float(text.splitlines()[1].split()[-1]) == pytest.approx(2 * 7 / 9)


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "fjsignal", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "gen-hardness" in res.stdout
