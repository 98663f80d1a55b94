import json

import pytest

from fiberforge.cli import dispatch
from fiberforge.pipeline import data_path


def run(capsys, *argv):
    code = dispatch(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def small_config(tmp_path):
    """A -4 sphere in CP2 # 4 CP2bar, laid out like the bundled exotic configuration."""
    basis = {"positive": 1, "negative": 4}
    (tmp_path / "table.json").write_text(json.dumps(
        {"format": "fiberforge-table/1", "basis": basis, "classes": {"u": "e1 - e2 - e3 - e4"}}))
    (tmp_path / "transcript.json").write_text(json.dumps(
        {"basis": basis, "classes": {"u": "e1 - e2 - e3 - e4"}, "steps": []}))
    (tmp_path / "plumbing.json").write_text(json.dumps(
        {"format": "fiberforge-plumbing/1", "names": ["u"], "weights": [-4]}))
    config = {
        "format": "fiberforge-exotic/1",
        "table": "table.json", "transcript": "transcript.json", "plumbing": "plumbing.json",
        "z_classes": [{"name": "A1", "class": "h", "genus": 0}, {"name": "A2", "class": "e1 + e2", "genus": 0},
                      {"name": "A3", "class": "e2 - e3", "genus": 0}, {"name": "A4", "class": "e3 - e4", "genus": 0}],
        "wall": {"H": {"A1": 2, "A2": 1}, "reference": "h"},
        "p_square": -1,
        "filter": {"min_square": -10, "modulus": 8, "residue": 6},
        "box": {"policy": "explicit", "bounds": [5, 6, 6, 6], "label": "wide"},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


def test_verify_bundled_script(capsys):
    code, out, _ = run(capsys, "verify", "lemma21_g2.json")
    assert code == 0
    assert json.loads(out)["verdict"] == "VALID"


def test_verify_tsv(capsys):
    code, out, _ = run(capsys, "verify", str(data_path("lemma22.json")), "--format", "tsv")
    assert code == 0
    assert out.splitlines()[0].startswith("index\tkind")
    assert out.splitlines()[-1].startswith("# verdict\tVALID")


def test_verify_invalid_script(capsys, tmp_path, bundled):
    doc = bundled("lemma21_g1.json")
    doc["target"] = doc["target"][1:]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 1
    assert json.loads(out)["verdict"] == "INVALID"


def test_schema_violation_is_an_input_error(capsys, tmp_path, bundled):
    doc = bundled("lemma21_g1.json")
    doc["moves"][4]["kind"] = "teleport"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "verify", str(path))
    assert code == 2
    assert "/moves/4/kind" in err


def test_missing_file_and_bad_json(capsys, tmp_path):
    assert run(capsys, "verify", str(tmp_path / "nope.json"))[0] == 2
    bad = tmp_path / "x.json"
    bad.write_text("{")
    assert run(capsys, "verify", str(bad))[0] == 2


def test_unknown_flag_rejected(capsys):
    assert run(capsys, "verify", "lemma21_g1.json", "--frobnicate")[0] == 2


def test_invariants(capsys):
    code, out, _ = run(capsys, "invariants", "hyperelliptic_g3.json")
    rep = json.loads(out)
    assert code == 0
    assert (rep["chi"], rep["sigma"]) == (20, -16)
    assert rep["provenance"] == ["endo-formula"] and rep["simply_connected"]


def test_invariants_non_relation_fails(capsys, tmp_path):
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"genus": 2, "word": "c1 c2 c3", "sigma": 0}))
    assert run(capsys, "invariants", str(path))[0] == 1


def test_geography(capsys):
    assert run(capsys, "geography", "--a", "3", "--b", "7")[0] == 2
    code, out, _ = run(capsys, "geography", "--a", "3", "--b", "4")
    rep = json.loads(out)
    assert code == 0 and rep["chi_h"] == 3 and rep["c1_squared"] == 4
    code, out, _ = run(capsys, "geography", "--sweep", "--a", "3", "--format", "tsv")
    assert code == 0 and len(out.splitlines()) == 1 + 6


def test_plumbing_command(capsys):
    code, out, _ = run(capsys, "plumbing", "plumbing_p.json", "--ambient", "35", "-31", "--meridians", "6,35")
    rep = json.loads(out)
    assert code == 0
    assert rep["lens_space"]["p"] == 342225
    assert rep["boundary_h1"]["description"] == "Z/342225"
    assert rep["meridian_quotient"]["description"] == "0"
    assert rep["rational_blowdown"]["result"] == [8, -4]
    assert rep["rational_blowdown"]["homeomorphism"]["name"] == "CP2#5CP2bar"
    code, out, _ = run(capsys, "plumbing", "--weights", "-2", "-5")
    assert json.loads(out)["rational_ball_family"]["m"] == 3
    assert run(capsys, "plumbing")[0] == 2


def test_homology_command(capsys):
    code, out, _ = run(capsys, "homology", "blowup_transcript.json", "--compare", "fig9b_table.json",
                       "--check-table", "plumbing_p.json")
    rep = json.loads(out)
    assert code == 0
    assert rep["embedding"]["ok"] and rep["compare"]["differing"] == []
    assert rep["classes"]["u10"]["square"] == -20


def test_k_omega_command(capsys):
    code, out, _ = run(capsys, "k-omega", "fig9b_table.json")
    rep = json.loads(out)
    assert code == 0
    assert rep["denominator"] == 585
    assert rep["k_omega_numerators"][0] == 3789 and rep["restricted_numerators"][0] == -5544
    assert rep["k_omega"]["a"] == "421/65"  # reduced form of 3789/585


def test_sw_enumerate_small(capsys, small_config):
    code, out, _ = run(capsys, "sw-enumerate", "--config", str(small_config), "--format", "json")
    rep = json.loads(out)
    assert code == 1  # eight classes survive, not just +-K
    assert rep["counts"]["integral"] == 8 and rep["policy"] == "wide"
    assert "timing" not in rep


def test_reports_are_byte_identical(capsys, small_config, monkeypatch):
    first = run(capsys, "sw-enumerate", "--config", str(small_config), "--jobs", "1")[1]
    second = run(capsys, "sw-enumerate", "--config", str(small_config), "--jobs", "2")[1]
    monkeypatch.setenv("FIBERFORGE_JOBS", "2")
    third = run(capsys, "sw-enumerate", "--config", str(small_config))[1]
    assert first == second == third


def test_jobs_validation(capsys, small_config, monkeypatch):
    assert run(capsys, "sw-enumerate", "--config", str(small_config), "--jobs", "0")[0] == 2
    monkeypatch.setenv("FIBERFORGE_JOBS", "many")
    assert run(capsys, "sw-enumerate", "--config", str(small_config))[0] == 2
    monkeypatch.delenv("FIBERFORGE_JOBS")
    assert run(capsys, "sw-enumerate", "--config", str(small_config), "--box", "bogus")[0] == 2


def test_output_file(capsys, tmp_path):
    target = tmp_path / "cert.json"
    assert dispatch(["--output", str(target), "verify", "lemma21_g1.json"]) == 0
    assert json.loads(target.read_text())["verdict"] == "VALID"
