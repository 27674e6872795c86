"""Report emission: delimited output, JSON schema, deterministic figures."""

import json

import numpy as np
import pytest

from mixlab import FamilySpec, make_chain, profile, validate_chain
from mixlab.cutoff import scan_family
from mixlab.errors import EmptyProfile
from mixlab.reporting import (
    atomic_write_text,
    cutoff_to_csv,
    profiles_to_csv,
    render_profiles,
    render_scan,
    reports_to_json,
)
from mixlab.spectral import DirectKernel
from mixlab.verifiers import check_abelian


@pytest.fixture(scope="module")
def af_profiles():
    vc = validate_chain(make_chain(FamilySpec("af_section6", {"n": 8, "alpha": 0.5})))
    eng = DirectKernel(vc)
    times = list(range(0, 61, 3))
    return [profile(eng, mode, times) for mode in ("disc", "lazy", "ave")]


def test_csv_format(af_profiles):
    text = profiles_to_csv(af_profiles, meta={"seed": 0, "t": "0..60:3"})
    lines = text.strip().splitlines()
    assert lines[0] == "# seed=0"
    assert lines[1] == "# t=0..60:3"
    assert lines[2] == "t,mode,start,value"
    first = lines[3].split(",")
    assert first[0] == "0" and first[1] == "disc" and first[2] == "worst"
    # 17 significant digits survive a round trip
    v = float(first[3])
    assert f"{v:.17g}" == first[3]
    assert len(lines) == 3 + 3 * 21


def test_averaged_profile_dominates_disc(af_profiles):
    by_mode = {p.mode: p for p in af_profiles}
    for va, vd in zip(by_mode["ave"].values, by_mode["disc"].values):
        assert va <= vd + 1e-12


def test_report_json_schema(tmp_path):
    vc = validate_chain(make_chain(FamilySpec("flip")))
    reports = check_abelian(DirectKernel(vc), [4], [1.0])
    text = reports_to_json(reports, meta={"seed": 0})
    doc = json.loads(text)
    assert doc["meta"] == {"seed": 0}
    assert len(doc["reports"]) == 3
    for rep in doc["reports"]:
        assert set(rep) >= {"inequality_id", "holds", "fitted_constant", "points"}
        for pt in rep["points"]:
            assert set(pt) == {"t", "s", "lhs", "rhs", "slack"}


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "sub" / "out.csv"
    atomic_write_text(target, "hello\n")
    assert target.read_text() == "hello\n"
    leftovers = [p for p in target.parent.iterdir() if p.name != "out.csv"]
    assert leftovers == []


def test_render_profiles_deterministic_bytes(tmp_path, af_profiles):
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    render_profiles(af_profiles, a, title="af")
    render_profiles(af_profiles, b, title="af")
    assert a.read_bytes() == b.read_bytes()
    body = a.read_text()
    assert body.startswith("<?xml")
    for mode in ("disc", "lazy", "ave"):
        assert mode in body


def test_render_profiles_png(tmp_path, af_profiles):
    out = tmp_path / "p.png"
    render_profiles(af_profiles[:1], out)
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_render_empty_profile_list(tmp_path):
    with pytest.raises(EmptyProfile):
        render_profiles([], tmp_path / "x.svg")


def test_cutoff_csv_and_plot(tmp_path):
    report = scan_family("flip", [2], [0.25], modes=("lazy", "ave"))
    text = cutoff_to_csv(report, meta={"sizes": "2"})
    lines = text.strip().splitlines()
    assert lines[0] == "# sizes=2"
    assert lines[1] == "family,size,mode,epsilon,t_mix"
    assert any(line.startswith("flip,2,ave,0.25,") for line in lines)
    out = tmp_path / "scan.svg"
    render_scan(report, out)
    assert out.exists() and out.stat().st_size > 0
