import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibred_flower import catalog
from fibred_flower.cli import main
from fibred_flower.errors import SpecError
from fibred_flower.spec_io import SCHEMA, emit_spec, parse_spec, spec_from_jet

SPECS = Path(__file__).resolve().parent.parent / "specs"


def _spec(**over):
    data = {"schema": SCHEMA, "alpha": {"cf": [0, 1], "periodic_tail": 1}, "truncation": 3,
            "coefficients": [{"order": 2, "modes": [{"freq": 1, "re": 0.0, "im": -0.5},
                                                    {"freq": -1, "re": 0.0, "im": 0.5}]}]}
    data.update(over)
    return json.dumps(data)


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), (json.loads(err) if err else None)


def test_parse_example1(golden):
    spec = parse_spec(_spec())
    F = spec.jet()
    assert F.series.distance(catalog.example1(golden).series) < 1e-15
    assert spec.options.mean_tol == 1e-10 and spec.multiplier().is_one


def test_parse_reports_all_violations():
    coeffs = [{"order": 2, "modes": []}, {"order": 2, "modes": []}, {"order": 7, "modes": []}]
    with pytest.raises(SpecError) as ei:
        parse_spec(_spec(coefficients=coeffs, colour="red"))
    v = ei.value.violations
    assert any("duplicate order 2" in s for s in v)
    assert any("outside 2..3" in s for s in v)
    assert any("colour" in s for s in v)


def test_rational_alpha_needs_diagnostic():
    with pytest.raises(SpecError) as ei:
        parse_spec(_spec(alpha={"float": 0.5}))
    assert any("resonant" in s for s in ei.value.violations)
    spec = parse_spec(_spec(alpha={"float": 0.5}, options={"diagnostic": True}))
    assert spec.rotation().is_rational


def test_parse_rejects_bad_json():
    with pytest.raises(SpecError):
        parse_spec("{not json")
    with pytest.raises(SpecError):
        parse_spec("[1, 2]")


modes = st.lists(st.tuples(st.integers(-4, 4), st.floats(-10, 10), st.floats(-10, 10)), max_size=4)


@settings(max_examples=40, deadline=None)
@given(N=st.integers(2, 6), data=st.data())
def test_roundtrip(N, data):
    orders = data.draw(st.lists(st.integers(2, N), unique=True, max_size=N - 1))
    coeffs = [{"order": j, "modes": [{"freq": f, "re": a, "im": b} for f, a, b in data.draw(modes)]}
              for j in orders]
    text = _spec(truncation=N, coefficients=coeffs, options={"seed": data.draw(st.integers(0, 99))})
    s1 = parse_spec(text)
    s2 = parse_spec(emit_spec(s1))
    assert s1 == s2 and emit_spec(s2) == emit_spec(s1)


def test_spec_from_jet_roundtrip(golden):
    F = catalog.half_turn(golden)
    spec = parse_spec(emit_spec(spec_from_jet(F)))
    G = spec.jet()
    assert G.lam == F.lam and G.series.distance(F.series) == 0


def test_classify_examples(capsys):
    code, rep, _ = _run(capsys, "classify", "--spec", str(SPECS / "example1.json"))
    assert code == 0 and rep["classification"]["verdict"]["petals"] == 2
    code, rep, _ = _run(capsys, "classify", "--spec", str(SPECS / "example2.json"))
    assert code == 0 and rep["classification"]["verdict"]["petals"] == 3
    prov = rep["provenance"]
    assert prov["command"] == "classify" and len(prov["spec_sha256"]) == 64
    assert prov["tolerances"]["mean_tol"] == 1e-10


def test_exit_codes(capsys, tmp_path):
    code, rep, _ = _run(capsys, "classify", "--spec", str(SPECS / "qtwist.json"))
    assert code == 2 and rep["exit_code"] == 2
    code, _, err = _run(capsys, "classify", "--spec", str(tmp_path / "missing.json"))
    assert code == 1 and err["error"]["code"] == "cli.io"
    bad = tmp_path / "bad.json"
    bad.write_text(_spec(alpha={"float": 0.5}))
    code, _, err = _run(capsys, "classify", "--spec", str(bad))
    assert code == 1 and err["error"]["code"] == "cli.spec" and err["error"]["violations"]
    # --diagnostic admits the spec, then classification refuses the resonance
    code, _, err = _run(capsys, "classify", "--spec", str(bad), "--diagnostic")
    assert code == 1 and err["error"]["code"] == "rotation.resonance"


def test_simulate_identity(capsys, tmp_path):
    code, rep, _ = _run(capsys, "simulate", "--spec", str(SPECS / "identity.json"), "--out", str(tmp_path))
    assert code == 0
    sim = rep["simulation"]
    assert sim["max_displacement"] == 0 and sim["status"]["budget"] == sim["seeds"]
    rows = (tmp_path / "orbits.csv").read_text().splitlines()
    assert rows[0] == "seed,step,theta,re,im" and len(rows) > 1
    assert json.loads((tmp_path / "report.json").read_text()) == rep


@pytest.mark.parametrize("command,spec", [("classify", "example2"), ("simulate", "identity"),
                                          ("cascade", "cascade_sin"), ("siegel", "qtwist")])
def test_determinism(command, spec, tmp_path):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert main([command, "--spec", str(SPECS / f"{spec}.json"), "--out", str(d), "--seed", "7"]) in (0, 2)
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outs[0] == outs[1]


def test_petals_and_cascade_reports(capsys, tmp_path):
    code, rep, _ = _run(capsys, "petals", "--spec", str(SPECS / "example1.json"), "--out", str(tmp_path))
    g = rep["geometry"]
    assert code == 0 and g["petals"] == 2 and g["escape"]["passed"]
    assert g["exterior_direction_w"]["max_gap"] < 1e-3
    assert (tmp_path / "petal_boundaries.csv").exists()
    code, rep, _ = _run(capsys, "cascade", "--spec", str(SPECS / "cascade_sin.json"), "--budget", "5000")
    c = rep["cascade"]
    assert code == 0 and c["verdict"] == "integrable" and c["sup_displacement"] <= c["telescoping_bound"]
    assert c["w_spread"] <= 1e-9 and c["steps"] == 5000


def test_siegel_command(capsys):
    code, rep, _ = _run(capsys, "siegel", "--spec", str(SPECS / "qtwist.json"))
    s = rep["siegel"]
    assert code == 0 and s["applicable"] and s["certificate"]["passed"]
    assert s["bounds"]["lemma1_holds"] and s["bounds"]["gamma_le_theta_tau"]
    code, rep, _ = _run(capsys, "siegel", "--spec", str(SPECS / "example1.json"))
    assert code == 0 and rep["siegel"]["applicable"] is False


def test_precision_env_var():
    env = dict(os.environ, FIBRED_FLOWER_PRECISION="extended")
    out = subprocess.run([sys.executable, "-m", "fibred_flower.cli", "classify", "--spec",
                          str(SPECS / "example1.json")], env=env, capture_output=True, text=True, check=True)
    rep = json.loads(out.stdout)
    assert rep["provenance"]["precision"] == "extended"
    assert rep["classification"]["verdict"]["petals"] == 2
    assert np.allclose(rep["classification"]["verdict"]["leading_mean"], [-0.5, 0.0])
