import json

import mpmath as mp
import pytest

from conftest import PAIR_TAU

from fibrenorm.cli import ExperimentConfig, load_config, main, read_csv

FAST = ["--precision", "30", "--basis", "24", "--depth", "8"]


def test_config_file_and_overrides(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("kind = cover\nell_list = 3..9\nifs_index_set = 0..2\nprecision = 40\n")
    cfg = load_config(str(cfg_file), {"precision": 50, "kind": None})
    assert cfg.kind == "cover" and cfg.kinds == ["cover"]
    assert cfg.ell_list == [3, 5, 7, 9]
    assert cfg.ifs_index_set == [0, 1, 2]
    assert cfg.precision == 50
    assert cfg.digest() == load_config(str(cfg_file), {"precision": 50}).digest()
    assert cfg.digest() != ExperimentConfig().digest()


@pytest.mark.parametrize("text", ["ell_list = 3,4\n", "kind = circle\n", "colour = red\n", "renorm_depth = 3\n"])
def test_config_rejects(tmp_path, text):
    f = tmp_path / "bad.cfg"
    f.write_text(text)
    with pytest.raises(ValueError):
        load_config(str(f), {})


def test_renorm_without_tuning_is_a_pipeline_error(tmp_path, capsys):
    assert main(["renorm", "--out", str(tmp_path), "--ell", "3"] + FAST) == 2
    assert "tune" in capsys.readouterr().err


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    base = ["--out", str(out), "--ell", "3,5"] + FAST
    assert main(["tune", "--kind", "homeo"] + base) == 0
    assert main(["fixedpoint", "--kind", "cover"] + base) == 0
    return out, base


def test_tune_resume_is_deterministic(run_dir):
    out, base = run_dir
    first = json.loads((out / "tuned.json").read_text())
    assert set(first["records"]) == {"homeo:3", "homeo:5"}
    assert all(r["check_passed"] for r in first["records"].values())
    assert main(["tune", "--kind", "homeo", "--resume"] + base) == 0
    again = json.loads((out / "tuned.json").read_text())
    assert again["records"] == first["records"]
    fresh = out / "fresh"
    assert main(["tune", "--kind", "homeo", "--out", str(fresh), "--ell", "3,5"] + FAST) == 0
    redo = json.loads((fresh / "tuned.json").read_text())
    assert {k: r["omega"] for k, r in redo["records"].items()} == {k: r["omega"] for k, r in first["records"].items()}


def test_renorm_stage(run_dir):
    out, base = run_dir
    assert main(["renorm", "--kind", "homeo"] + base) == 0
    doc = json.loads((out / "renorm.json").read_text())
    tau3 = float(doc["records"]["homeo:3"]["tau"])
    assert abs(tau3 + 2.1396) < 1e-2
    assert doc["records"]["homeo:3"]["bound_ok"]


def test_fixedpoint_files_and_verify(run_dir, capsys):
    out, base = run_dir
    for e in (3, 5):
        d = json.loads((out / "fixedpoints" / "cover" / f"{e}.json").read_text())
        assert d["schema"] == "fibrenorm.fixedpoint/1" and d["converged"]
    assert main(["verify", "--kind", "cover"] + base) == 0
    rep = json.loads((out / "verify.json").read_text())
    assert rep["failing"] == [] and set(rep["reports"]) == {"cover:3", "cover:5"}


def test_verify_flags_corrupted_fixed_point(run_dir, tmp_path, capsys):
    out, base = run_dir
    bad = tmp_path / "bad"
    (bad / "fixedpoints" / "cover").mkdir(parents=True)
    d = json.loads((out / "fixedpoints" / "cover" / "3.json").read_text())
    d["tau"] = str(float(d["tau"]) * 1.001)
    (bad / "fixedpoints" / "cover" / "3.json").write_text(json.dumps(d))
    code = main(["verify", "--kind", "cover", "--out", str(bad), "--ell", "3"] + FAST)
    assert code == 2
    err = capsys.readouterr().err
    assert "failing identity: cover:3" in err


def test_dimension_csv(run_dir, capsys):
    out, base = run_dir
    code = main(["dimension", "--index-set", "0..3", "--ifs-depth", "4"] + base)
    assert code == 0
    text = (out / "dimension.csv").read_text()
    assert text.startswith("# fibrenorm ")
    rows = read_csv(out / "dimension.csv")
    assert [r["ell"] for r in rows] == ["3", "5", "trend"]
    assert rows[0]["A_size"] == "4" and rows[-1]["s_lo"] == "PASS"
    assert float(rows[0]["s_lo"]) <= float(rows[0]["s_hi"])


def test_presentation_stage(run_dir):
    out, base = run_dir
    assert main(["presentation"] + base) == 0
    doc = json.loads((out / "presentation.json").read_text())
    assert doc["correspondence"]["bijective"] is True


def test_report(run_dir, capsys):
    out, base = run_dir
    assert main(["report"] + base) == 0
    rec = json.loads((out / "report.json").read_text())
    assert rec["schema"] == "fibrenorm.report/1" and rec["tuned"] is not None


def test_homeo_fixed_point_from_dynamical_seed(run_dir, caplog):
    out, base = run_dir
    with caplog.at_level("INFO", logger="fibrenorm"):
        assert main(["fixedpoint", "--kind", "homeo", "--out", str(out), "--ell", "3"] + FAST) == 0
    assert "seeded from renormalization level" in caplog.text
    d = json.loads((out / "fixedpoints" / "pair" / "3.json").read_text())
    assert abs(mp.mpf(d["tau"]) - mp.mpf(PAIR_TAU[3])) < 1e-14
