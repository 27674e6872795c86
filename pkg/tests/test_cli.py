"""End-to-end command-line tests: files, schemas, and the exit-code contract."""

import json

import numpy as np
import pytest

from mixlab import validate_chain
from mixlab.cli import main
from mixlab.specio import chain_from_dict, load_chain_file


def run(tmp_path, *argv):
    return main([str(a) for a in argv])


def test_analyze_writes_profile_and_figure(tmp_path):
    out = tmp_path / "run"
    code = main([
        "analyze", "--family", "flip", "--mode", "ave", "--t", "0..10",
        "--out", str(out), "--format", "csv,svg",
    ])
    assert code == 0
    text = (out / "profile.csv").read_text()
    rows = [line for line in text.splitlines() if line and not line.startswith("#") and not line.startswith("t,")]
    assert len(rows) == 11
    # the averaged flip profile is identically zero (up to engine residue)
    assert all(float(r.split(",")[3]) <= 1e-12 for r in rows)
    assert (out / "profile.svg").exists()


def test_analyze_dump_spec_round_trip(tmp_path):
    out = tmp_path / "run"
    code = main([
        "analyze", "--family", "af_section6", "--n", "8", "--alpha", "0.5",
        "--mode", "lazy", "--t", "0..5", "--out", str(out), "--format", "csv",
        "--dump-spec",
    ])
    assert code == 0
    dumped = load_chain_file(out / "chain.json")
    reloaded = validate_chain(dumped)
    from mixlab import FamilySpec, make_chain

    original = validate_chain(make_chain(FamilySpec("af_section6", {"n": 8, "alpha": 0.5})))
    np.testing.assert_array_equal(reloaded.P, original.P)
    np.testing.assert_allclose(reloaded.pi, original.pi, atol=1e-12)


def test_verify_abelian_af50_passes(tmp_path):
    out = tmp_path / "v"
    code = main([
        "verify", "--suite", "abelian", "--family", "af_section6",
        "--n", "50", "--alpha", "0.5", "--t", "100,200,400", "--s", "1,2,3",
        "--out", str(out),
    ])
    assert code == 0
    doc = json.loads((out / "report.json").read_text())
    assert all(rep["holds"] for rep in doc["reports"])


def test_verify_rejects_corrupted_chain_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"label": "bad", "n": 2, "P": [[0.5, 0.49], [0.5, 0.5]]}))
    code = main(["verify", "--suite", "abelian", "--chain-file", str(bad), "--t", "4", "--s", "1", "--out", str(tmp_path)])
    assert code == 1


def test_verify_rejects_reducible_chain(tmp_path):
    bad = tmp_path / "red.json"
    bad.write_text(json.dumps({"label": "red", "n": 2, "P": [[1.0, 0.0], [0.0, 1.0]]}))
    code = main(["analyze", "--chain-file", str(bad), "--mode", "ave", "--t", "0..3", "--out", str(tmp_path)])
    assert code == 1


def test_verify_rejects_bad_grid(tmp_path):
    code = main(["verify", "--suite", "abelian", "--family", "flip", "--t", "4", "--s", "3", "--out", str(tmp_path)])
    assert code == 1


def test_verify_stationary_boundary_defect_exits_two(tmp_path):
    # At alpha = 1/2 the parity lower bound is genuinely violated, so the
    # explicit-inequality exit code fires.
    code = main(["verify", "--suite", "stationary", "--n", "5", "--alpha", "0.5", "--out", str(tmp_path)])
    assert code == 2
    ok = main(["verify", "--suite", "stationary", "--n", "10", "--alpha", "0.25", "--out", str(tmp_path)])
    assert ok == 0


def test_verify_tails_suite(tmp_path):
    code = main(["verify", "--suite", "tails", "--out", str(tmp_path)])
    assert code == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    assert len(doc["reports"]) == 4 * 3  # four scales, (poisson lower+upper, binomial)


def test_verify_sharpness_small(tmp_path):
    code = main(["verify", "--suite", "sharpness", "--n", "5", "--alpha", "0.5", "--out", str(tmp_path)])
    assert code == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["reports"]["two_state_formula"]["holds"]


def test_scan_emits_csv_json_svg(tmp_path):
    out = tmp_path / "scan"
    code = main([
        "scan", "--family", "ehrenfest", "--sizes", "10,20", "--eps", "0.25",
        "--out", str(out),
    ])
    assert code == 0
    assert (out / "scan.csv").exists()
    assert (out / "scan.svg").exists()
    doc = json.loads((out / "scan.json").read_text())
    assert doc["reports"]["sizes"] == [10, 20]


def test_simulate_coupling(tmp_path):
    out = tmp_path / "sim"
    code = main([
        "simulate", "--family", "flip", "--t", "1", "--samples", "20000",
        "--seed", "3", "--out", str(out),
    ])
    assert code == 0
    doc = json.loads((out / "simulate.json").read_text())
    assert doc["identity_violations"] == 0
    assert sum(doc["marginals"]["continuous"]) == pytest.approx(1.0, abs=1e-12)


def test_simulate_thinning(tmp_path):
    code = main(["simulate", "--kind", "thinning", "--tau", "4", "--samples", "50000", "--seed", "3", "--out", str(tmp_path)])
    assert code == 0


def test_chain_from_family_dict():
    spec = chain_from_dict({"family": "flip"})
    np.testing.assert_array_equal(spec.P, [[0.0, 1.0], [1.0, 0.0]])


def test_missing_chain_source_is_input_error(tmp_path):
    code = main(["analyze", "--mode", "ave", "--t", "0..3", "--out", str(tmp_path)])
    assert code == 1


def test_cli_params_passthrough(tmp_path):
    out = tmp_path / "e"
    code = main([
        "analyze", "--family", "ehrenfest", "--params", "n=6", "laziness=0.25",
        "--mode", "ave", "--t", "0..5", "--out", str(out), "--format", "csv",
    ])
    assert code == 0
    assert (out / "profile.csv").exists()
