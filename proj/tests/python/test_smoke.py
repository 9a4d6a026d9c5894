import json
import os
import subprocess

import pytest

import missinfo

DATA = os.environ.get("MISSINFO_DATA_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "data"))
CLI = os.environ.get("MISSINFO_CLI")


def test_two_sample_lrt_counts():
    r = missinfo.two_sample_lrt(300, 200, 250, 250, 500, 500)
    assert r["chi2_obs"] == pytest.approx(10.12, abs=0.005)
    assert r["chi2_joint_em"] == pytest.approx(5.05, abs=0.005)
    assert r["chi2_separate_em"] == pytest.approx(2 * r["chi2_obs"], rel=1e-12)


def test_closed_forms_and_entropy():
    s = missinfo.bernoulli_statistics(13, 25, 100, 0.3)
    assert s["r_hat_alt"] == 0.25 and s["r_hat_null"] == 0.25
    c = missinfo.normal_closed_forms([0.3, -0.2, 1.1, 0.4, 0.9], 10, 0.0)
    assert c["bi_s"] == pytest.approx(0.5, abs=1e-12)
    e = missinfo.entropy_measure([[0.25] * 4, [1.0, 0.0, 0.0, 0.0], [1.0]])
    assert e["per_family"][:2] == pytest.approx([0.0, 1.0])
    assert e["excluded"] == [2]


def test_run_manifest_file(tmp_path):
    r = missinfo.run_manifest(os.path.join(DATA, "manifests", "allele_counts.json"), out_dir=tmp_path)
    assert r["exit_code"] == missinfo.EXIT_OK
    report = r["entries"][0]["report"]
    assert report["measures"]["large_sample"]["ri1"] == pytest.approx(0.5, abs=1e-6)
    on_disk = json.loads((tmp_path / "allele_counts.report.json").read_text())
    assert on_disk["manifest_hash"] == report["manifest_hash"]


def test_manifest_and_dataset_validation(tmp_path):
    bad = {"model": "tilting", "dataset": "x.json", "hypothesis": {"null": [0.0]}, "measures": []}
    assert missinfo.check_manifest(bad)
    assert missinfo.run_manifest(bad, out_dir=tmp_path)["exit_code"] == missinfo.EXIT_VALIDATION
    doc = {
        "schema": "missinfo.dataset/1",
        "model": "tilting",
        "units": [{"schema": "tilting.unit/1", "support": [-1, 0, 1], "null_probs": [0.25, 0.5, 0.25],
                   "posterior_probs": [0.2, 0.5, 0.28]}],
    }
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    v = missinfo.validate_dataset(p)
    assert not v["ok"] and v["model"] == "tilting"
    assert missinfo.validate_dataset(os.path.join(DATA, "allele_counts.json"))["ok"]


def test_errors_are_typed():
    assert issubclass(missinfo.UnsupportedError, missinfo.ValidationError)
    assert issubclass(missinfo.HeavyTailError, missinfo.NumericalError)
    with pytest.raises(missinfo.ValidationError):
        missinfo.check_manifest(float("nan"))


@pytest.mark.skipif(not CLI, reason="CLI path not given")
def test_cli_exit_codes(tmp_path):
    ok = subprocess.run([CLI, "--log-level", "warn", "run", "--manifest",
                         os.path.join(DATA, "manifests", "allele_counts.json"), "--out", str(tmp_path)],
                        capture_output=True, text=True)
    assert ok.returncode == 0, ok.stderr
    assert "ri1 = 0.5" in ok.stdout

    bad = tmp_path / "bad_manifest.json"
    bad.write_text(json.dumps({"model": "tilting", "dataset": "x.json", "hypothesis": {"null": [0]},
                               "measures": []}))
    r = subprocess.run([CLI, "run", "--manifest", str(bad), "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 2
    assert "measures" in r.stderr

    v = subprocess.run([CLI, "validate", "--dataset", os.path.join(DATA, "tilting_sibpairs.json")],
                       capture_output=True, text=True)
    assert v.returncode == 0 and "no violations" in v.stdout
    u = subprocess.run([CLI, "frobnicate"], capture_output=True, text=True)
    assert u.returncode == 2


@pytest.mark.skipif(not CLI, reason="CLI path not given")
def test_cli_reports_are_reproducible(tmp_path):
    args = ["--log-level", "warn", "run", "--manifest", os.path.join(DATA, "manifests", "sibpairs.json")]
    a, b = tmp_path / "a", tmp_path / "b"
    subprocess.run([CLI, *args, "--out", str(a)], check=True, capture_output=True)
    subprocess.run([CLI, *args, "--out", str(b), "--workers", "2"], check=True, capture_output=True)
    for name in ["tilting_sibpairs.report.json", "tilting_sibpairs_ri_curve.csv", "sibpair_ibs.report.json"]:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rows = (a / "tilting_sibpairs_ri_curve.csv").read_text().splitlines()
    assert rows[0] == "theta,ri,flag" and len(rows) == 102
