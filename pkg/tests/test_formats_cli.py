import json
import os

import numpy as np
import pytest

from hamsim import cli, formats
from hamsim.errorbasis import annihilator_sequence, heisenberg_basis, inversion_sequence
from hamsim.groups import sl2f3_transformer
from hamsim.linalg import PAULI_X, PAULI_Z, random_hamiltonian
from hamsim.synthesis import eigenbasis_synthesis, lp_synthesize


def write(path, obj):
    path.write_text(formats.dumps(obj))
    return str(path)


def run(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    return {
        "z": write(tmp_path / "z.json", formats.matrix_to_json(PAULI_Z)),
        "x": write(tmp_path / "x.json", formats.matrix_to_json(PAULI_X)),
        "dir": tmp_path,
    }


def test_float_format_is_lossless(rng):
    for x in rng.normal(size=200) * 10.0 ** rng.integers(-20, 20, 200):
        assert float(formats.dumps(float(x))) == x
    assert formats.dumps(1.0) == "1.0"
    assert formats.dumps(0.1) == "0.10000000000000001"
    with pytest.raises(ValueError):
        formats.dumps(float("nan"))


def test_matrix_round_trip(rng):
    H = random_hamiltonian(4, rng)
    back = formats.matrix_from_json(formats.loads(formats.dumps(formats.matrix_to_json(H))))
    assert np.array_equal(back, H)
    with pytest.raises(formats.FormatError):
        formats.matrix_from_json({"d": 2, "entries": [[0, 0]]})
    with pytest.raises(formats.FormatError):
        formats.matrix_from_json([1, 2])


def test_group_round_trip():
    G = sl2f3_transformer()
    G2 = formats.group_from_json(formats.loads(formats.dumps(formats.group_to_json(G))))
    assert G2.order == 24
    assert np.allclose(G2.elements, G.elements)
    bare = formats.group_from_json([formats.matrix_to_json(PAULI_X), formats.matrix_to_json(PAULI_Z)])
    assert bare.order == 8


def test_sequence_and_plan_round_trip(rng):
    seq = inversion_sequence(heisenberg_basis(3))
    back = formats.sequence_from_json(formats.loads(formats.dumps(formats.sequence_to_json(seq))))
    assert np.allclose(back.controls, seq.controls) and back.overhead == seq.overhead
    assert np.allclose(back.closing, seq.closing)
    plan = lp_synthesize(sl2f3_transformer(), random_hamiltonian(2, rng), random_hamiltonian(2, rng))
    p2 = formats.plan_from_json(formats.loads(formats.dumps(formats.plan_to_json(plan))))
    assert np.allclose(p2.taus, plan.taus) and np.allclose(p2.unitaries, plan.unitaries)
    assert np.allclose(p2.H_target, plan.H_target)


def test_check_transformer(capsys, tmp_path):
    code, out, _ = run(capsys, "group", "--name", "sl2f3", "--out", str(tmp_path / "sl.json"))
    assert code == 0 and out == ""
    code, out, err = run(capsys, "check-transformer", "--group", str(tmp_path / "sl.json"))
    data = json.loads(out)
    assert code == 0
    assert data["is_transformer"] is True and data["order"] == 24 and data["criterion"] == 48
    assert "48" in err
    run(capsys, "group", "--name", "q8", "--out", str(tmp_path / "q8.json"))
    code, out, _ = run(capsys, "check-transformer", "--group", str(tmp_path / "q8.json"))
    assert code == 2 and json.loads(out)["is_transformer"] is False


def test_reducible_group_is_invalid(capsys, tmp_path):
    path = write(tmp_path / "g.json", [formats.matrix_to_json(PAULI_Z)])
    code, _, err = run(capsys, "check-transformer", "--group", path)
    assert code == 1 and "reducible" in err


def test_synthesize(capsys, files):
    d = files["dir"]
    run(capsys, "group", "--name", "q8", "--out", str(d / "q8.json"))
    run(capsys, "group", "--name", "sl2f3", "--out", str(d / "sl.json"))
    out_path = d / "plan.json"
    code, out, _ = run(capsys, "synthesize", "--group", str(d / "q8.json"), "--h", files["z"], "--target", files["x"], "--out", str(out_path))
    assert code == 2
    assert json.loads(out_path.read_text()) == {"status": "infeasible"}
    code, out, _ = run(capsys, "synthesize", "--group", str(d / "sl.json"), "--h", files["z"], "--target", files["x"])
    plan = json.loads(out)
    assert code == 0 and abs(plan["overhead"] - 1) < 1e-7
    assert set(plan) >= {"terms", "overhead", "lower_bound", "residual"}
    code, out, _ = run(capsys, "synthesize", "--optimal-basis", "--h", files["z"], "--target", files["x"])
    assert code == 0
    code, _, _ = run(capsys, "synthesize", "--h", files["z"], "--target", files["x"])
    assert code == 64


def test_lower_bound_scalar(capsys, files):
    code, out, _ = run(capsys, "lower-bound", "--h", files["z"], "--target", files["x"])
    assert code == 0 and json.loads(out) == 1.0


def test_annihilate_into_verify(capsys, tmp_path, monkeypatch):
    import io

    code, out, _ = run(capsys, "annihilate", "--d", "3")
    assert code == 0
    h = write(tmp_path / "h.json", formats.matrix_to_json(random_hamiltonian(3, np.random.default_rng(1))))
    monkeypatch.setattr("sys.stdin", io.StringIO(out))
    code, out2, err = run(capsys, "verify", "--plan", "-", "--h", h)
    assert code == 0, err
    assert json.loads(out2)["passed"] is True


def test_verify_failure_exit(capsys, tmp_path):
    h = write(tmp_path / "h.json", formats.matrix_to_json(random_hamiltonian(3, np.random.default_rng(2))))
    seq = write(tmp_path / "s.json", formats.sequence_to_json(annihilator_sequence(heisenberg_basis(3))))
    code, out, _ = run(capsys, "verify", "--plan", seq, "--h", h, "--t0", "40")
    assert code == 2 and json.loads(out)["passed"] is False


def test_verify_plan_without_h(capsys, tmp_path, rng):
    plan = eigenbasis_synthesis(random_hamiltonian(3, rng), random_hamiltonian(3, rng))
    p = write(tmp_path / "p.json", formats.plan_to_json(plan))
    code, _, err = run(capsys, "verify", "--plan", p)
    assert code == 0, err


def test_birkhoff_and_errors(capsys, tmp_path):
    good = write(tmp_path / "d.json", [[0.3, 0.7], [0.7, 0.3]])
    code, out, _ = run(capsys, "birkhoff", "--matrix", good)
    data = json.loads(out)
    assert code == 0 and len(data["terms"]) == 2 and data["reconstruction_error"] < 1e-10
    bad = write(tmp_path / "bad.json", [[0.5, 0.6], [0.5, 0.4]])
    assert run(capsys, "birkhoff", "--matrix", bad)[0] == 1


def test_malformed_json_reports_position(capsys, tmp_path, files):
    p = tmp_path / "broken.json"
    p.write_text('{"d": 2,\n  "entries": [[1, 0],, ]}')
    code, out, err = run(capsys, "lower-bound", "--h", str(p), "--target", files["x"])
    assert code == 1 and out == ""
    assert "line 2" in err and "column" in err


def test_non_hermitian_is_invalid(capsys, tmp_path, files):
    p = write(tmp_path / "nh.json", formats.matrix_to_json(np.array([[0, 1], [0, 0]])))
    assert run(capsys, "lower-bound", "--h", p, "--target", files["x"])[0] == 1


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 64
    assert run(capsys)[0] == 64
    assert run(capsys, "basis")[0] == 64
    assert run(capsys, "basis", "--d", "two")[0] == 64


def test_no_partial_output_on_error(capsys, tmp_path, files):
    target = tmp_path / "out.json"
    bad = write(tmp_path / "bad.json", [[0.5, 0.6], [0.5, 0.4]])
    assert run(capsys, "birkhoff", "--matrix", bad, "--out", str(target))[0] == 1
    assert not target.exists()
    assert [f for f in os.listdir(tmp_path) if f.startswith(".hamsim-")] == []


def test_decouple_and_switch_off(capsys, tmp_path):
    h4 = write(tmp_path / "h4.json", formats.matrix_to_json(random_hamiltonian(4, np.random.default_rng(5))))
    code, out, err = run(capsys, "decouple", "--ds", "2", "--db", "2", "--h", h4)
    assert code == 0 and len(json.loads(out)["pulses"]) == 4
    assert run(capsys, "decouple", "--ds", "3", "--db", "2", "--h", h4)[0] == 1
    code, out, _ = run(capsys, "switch-off", "--h", h4)
    seq = formats.sequence_from_json(json.loads(out))
    assert len(seq) == 4


def test_round_trip_consumers(capsys, tmp_path):
    # Every emitted artifact is accepted by its consumer.
    d = tmp_path
    run(capsys, "group", "--name", "sl2f3", "--out", str(d / "sl.json"))
    run(capsys, "random-h", "--d", "2", "--seed", "3", "--out", str(d / "h.json"))
    run(capsys, "random-h", "--d", "2", "--seed", "4", "--out", str(d / "t.json"))
    assert run(capsys, "synthesize", "--group", str(d / "sl.json"), "--h", str(d / "h.json"), "--target", str(d / "t.json"), "--out", str(d / "p.json"))[0] == 0
    assert run(capsys, "verify", "--plan", str(d / "p.json"))[0] == 0
    assert run(capsys, "invert", "--d", "2", "--out", str(d / "inv.json"))[0] == 0
    assert run(capsys, "verify", "--plan", str(d / "inv.json"), "--h", str(d / "h.json"))[0] == 0
    assert run(capsys, "check-transformer", "--group", str(d / "sl.json"))[0] == 0
    code, out, _ = run(capsys, "basis", "--d", "2")
    assert formats.group_from_json(json.loads(out)).order == 8


def test_random_h_deterministic(capsys):
    a = run(capsys, "random-h", "--d", "3", "--seed", "11")[1]
    b = run(capsys, "random-h", "--d", "3", "--seed", "11")[1]
    c = run(capsys, "random-h", "--d", "3", "--seed", "12")[1]
    assert a == b != c
    H = formats.hamiltonian_from_json(json.loads(a))
    assert abs(np.trace(H)) < 1e-12
