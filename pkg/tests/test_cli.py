import json
import subprocess
import sys

import numpy as np
import pytest

from coinsip import protofile
from coinsip.cli import main
from coinsip.coinflip import analyze
from coinsip.geometry import Ball, HalfspaceIntersection, Lifted, VertexHull
from coinsip.protocol import Protocol
from coinsip.theories import classical_bit, get_theory


@pytest.fixture
def cb_file(tmp_path):
    path = tmp_path / "cb.json"
    assert main(["theories", "--export", "classical_bit", str(path)]) == 0
    return path


def test_analyze_classical_bit(cb_file, tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["analyze", str(cb_file), "--delta", "0.5", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["bias_lower"] == 0.5
    assert rep["theorem4_pass"] is True
    assert "1/sqrt(2) certificate: PASS" in capsys.readouterr().out


def test_invalid_pairing_exits_1(cb_file, tmp_path, capsys):
    doc = json.loads(cb_file.read_text())
    doc["alice_triple"][0] = [0.4, 0.0]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["analyze", str(bad)]) == 1
    assert "⟨A_0,B_0⟩ ≠ 1/2" in capsys.readouterr().err


@pytest.mark.parametrize("delta", ["0", "-0.1", "nan", "abc"])
def test_bad_delta_exits_1(cb_file, delta, capsys):
    assert main(["analyze", str(cb_file), "--delta", delta]) == 1
    err = capsys.readouterr().err
    if delta in ("0", "-0.1"):
        assert "delta must be positive" in err


def test_certification_failure_exits_2(tmp_path, monkeypatch):
    import coinsip.cli as cli

    real = cli.analyze

    def fake(*a, **k):
        r = real(*a, **k)
        r.theorem4_pass = False
        return r

    monkeypatch.setattr(cli, "analyze", fake)
    assert main(["analyze", "classical_bit", "--delta", "0.5"]) == 2


def test_sweep_disk(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "disk", "--deltas", "0.5,0.25,0.1,0.05", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "delta,p_delta,lower,upper,gap,status"
    p = [float(l.split(",")[1]) for l in lines[1:]]
    assert len(p) == 4 and all(b <= a + 1e-9 for a, b in zip(p, p[1:]))


def test_single_delta_sweep_matches_analyze(tmp_path):
    out = tmp_path / "s.csv"
    rep = tmp_path / "r.json"
    assert main(["sweep", "disk", "--deltas", "0.1", "--out", str(out)]) == 0
    assert main(["analyze", "disk", "--delta", "0.1", "--out", str(rep)]) == 0
    row = out.read_text().splitlines()[1].split(",")
    enc = json.loads(rep.read_text())["p_bob"]["0"]
    assert (float(row[1]), float(row[2]), float(row[3])) == (enc["p_delta"], enc["lower"], enc["upper"])


def test_polytopal_sweep_column_is_constant(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "polygon_6", "--deltas", "0.5,0.25,0.1", "--out", str(out)]) == 0
    assert len({l.split(",")[1] for l in out.read_text().splitlines()[1:]}) == 1


def test_non_monotone_deltas_exit_1(capsys):
    assert main(["sweep", "disk", "--deltas", "0.1,0.5"]) == 1


def test_theories_list(capsys):
    assert main(["theories", "--list"]) == 0
    names = set(capsys.readouterr().out.split())
    assert {"classical_bit", "box_world", "polygon_n", "disk"} <= names


def test_export_unknown_exits_1(tmp_path):
    assert main(["theories", "--export", "unknown", str(tmp_path / "x.json")]) == 1


def test_export_analyze_round_trip(tmp_path):
    for name in ("box_world", "polygon_7", "disk"):
        path = tmp_path / f"{name}.json"
        out = tmp_path / f"{name}.report.json"
        assert main(["theories", "--export", name, str(path)]) == 0
        assert main(["analyze", str(path), "--delta", "0.25,0.1", "--out", str(out)]) == 0
        direct = analyze(get_theory(name).protocol, [0.25, 0.1]).to_json()
        assert out.read_text() == direct


def test_cli_is_byte_deterministic(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        proc = subprocess.run([sys.executable, "-m", "coinsip", "analyze", "disk", "--delta", "0.1",
                               "--out", str(out)], capture_output=True)
        assert proc.returncode == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_seed_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("SEED", "7")
    out = tmp_path / "r.json"
    assert main(["analyze", "disk", "--delta", "0.25", "--out", str(out)]) == 0
    monkeypatch.setenv("SEED", "x")
    assert main(["analyze", "disk", "--delta", "0.25"]) == 1


# --- protocol file format ---------------------------------------------------------

def test_bodies_round_trip_exactly():
    p = Protocol(Lifted(Ball([0.1, 1 / 3], 0.7)), np.full((3, 3), 0.1), np.full((3, 3), 1 / 7),
                 bob_set=None, name="x", metadata={"k": [1, 2]})
    q = protofile.loads(protofile.dumps(p))
    assert q.alice_set.base.center.tolist() == [0.1, 1 / 3] and q.alice_set.base.radius == 0.7
    assert np.array_equal(q.alice_triple, p.alice_triple) and np.array_equal(q.bob_triple, p.bob_triple)
    assert q.name == "x" and q.metadata == {"k": [1, 2]}
    h = HalfspaceIntersection([[1, 0], [-1, 0], [0, 1], [0, -1]], [1, 1 / 3, 1, 1])
    r = Protocol(h, np.zeros((3, 2)), np.zeros((3, 2)), bob_set=VertexHull([[0.1, 0.2], [0.3, 0.4]]))
    s = protofile.loads(protofile.dumps(r))
    assert np.array_equal(s.alice_set.offsets, h.offsets)
    assert np.array_equal(s.bob_set.points, r.bob_set.points)
    assert protofile.dumps(s) == protofile.dumps(r)


def _doc():
    return json.loads(protofile.dumps(classical_bit().protocol))


def test_unknown_key_is_rejected():
    doc = _doc()
    doc["colour"] = "red"
    with pytest.raises(protofile.ProtocolFileError) as e:
        protofile.loads(json.dumps(doc, indent=2))
    assert e.value.field == "colour" and e.value.line is not None


def test_syntax_error_reports_line():
    text = protofile.dumps(classical_bit().protocol).replace('"alice_triple": [', '"alice_triple": [,', 1)
    with pytest.raises(protofile.ProtocolFileError) as e:
        protofile.loads(text)
    assert e.value.line == text[: text.index("[,")].count("\n") + 1


def test_field_errors_name_the_field():
    doc = _doc()
    doc["bob_triple"][1] = [1.0, "x"]
    with pytest.raises(protofile.ProtocolFileError) as e:
        protofile.loads(json.dumps(doc, indent=2))
    assert e.value.field == "bob_triple[1][1]"
    doc = _doc()
    doc["alice_set"] = {"type": "Polygon", "points": []}
    with pytest.raises(protofile.ProtocolFileError) as e:
        protofile.loads(json.dumps(doc))
    assert e.value.field == "alice_set"
    doc = _doc()
    doc["alice_triple"] = doc["alice_triple"][:2]
    with pytest.raises(protofile.ProtocolFileError):
        protofile.loads(json.dumps(doc))
    doc = _doc()
    del doc["dimension"]
    with pytest.raises(protofile.ProtocolFileError) as e:
        protofile.loads(json.dumps(doc))
    assert e.value.field == "dimension"


def test_malformed_file_exits_1_with_diagnostics(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "dimension": 2,\n  "alice_set": {"type": "VertexHull", "points": [[0, 0]]},\n'
                   '  "alice_triple": [[0,0],[0,0]],\n  "bob_triple": [[0,0],[0,0],[0,0]]\n}\n')
    assert main(["analyze", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "line 4" in err and "alice_triple" in err
    assert main(["analyze", str(tmp_path / "missing.json")]) == 1
