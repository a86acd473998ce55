import json
import subprocess
import sys
from fractions import Fraction

import pytest

from moddist import cli
from moddist.config import OUTPUT_DIR_ENV, ConfigError, ExperimentConfig
from moddist.generators import TriangleFreenessCertificate


def invoke(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


BASE = ["--p", "1", "--q", "2", "--k", "1"]


def test_generators_json(capsys):
    code, out, _ = invoke(capsys, "generators", *BASE, "--n", "1")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["entries"]) == 4
    assert {e["w"] for e in doc["entries"]} == {"1/2"}
    assert all(isinstance(c, str) for e in doc["entries"] for c in e["x"])


def test_generators_csv(capsys):
    code, out, _ = invoke(capsys, "generators", *BASE, "--n", "2", "--format", "csv")
    assert code == 0
    rows = out.strip().split("\n")
    assert rows[0] == "t,sign,j,x,y,w"
    assert len(rows) == 1 + 8


def test_generators_rejects_noncoprime(capsys):
    code, _, err = invoke(capsys, "generators", "--p", "2", "--q", "2", "--k", "1", "--n", "1")
    assert code == 2
    assert "p and q must be coprime" in err


def test_bound_odd_sweep(capsys):
    code, out, _ = invoke(
        capsys, "bound", *BASE, "--n-sweep", "4,8,16,32", "--grid", "64", "--threads", "1"
    )
    assert code == 0
    doc = json.loads(out)
    certs = doc["certificates"]
    assert [c["n"] for c in certs] == [4, 8, 16, 32]
    assert abs(float(certs[-1]["alpha_ratio_bound"]) - 0.5) <= 0.1
    assert doc["trend"]["target_ratio"] == "1/2"
    assert all(c["label"] in ("heuristic", "certified") for c in certs)


def test_bound_trivial_grid(capsys):
    code, out, _ = invoke(capsys, "bound", *BASE, "--n", "1", "--grid", "2")
    assert code == 0
    cert = json.loads(out)["certificates"][0]
    assert cert["sup_value"] == "2/1"


@pytest.mark.slow
def test_bound_k4_trend(capsys):
    code, out, _ = invoke(
        capsys, "bound", "--p", "1", "--q", "2", "--k", "4", "--n-sweep", "4,8", "--grid", "64",
        "--threads", "1",
    )
    assert code == 0
    trend = json.loads(out)["trend"]
    assert trend["limit_chi"] == 5
    assert trend["chi_lower_bounds"] == sorted(trend["chi_lower_bounds"])
    assert 2 <= trend["best_chi_lower_bound"] <= 5


def test_bound_threads_match_serial(capsys):
    args = ["bound", *BASE, "--n-sweep", "2,3", "--grid", "16"]
    _, serial, _ = invoke(capsys, *args, "--threads", "1")
    _, parallel, _ = invoke(capsys, *args, "--threads", "2")
    assert serial == parallel


def test_embed_verify_default_csv(capsys):
    code, out, _ = invoke(capsys, "embed-verify", *BASE, "--n", "2")
    assert code == 0
    rows = out.strip().split("\n")
    header = rows[0].split(",")
    assert len(rows) == 1 + 8
    residue = header.index("residue")
    passed = header.index("pass")
    for row in rows[1:]:
        cells = row.split(",")
        assert cells[residue] == "1" and cells[passed] == "true"


def test_embed_verify_residue_three(capsys):
    code, out, _ = invoke(capsys, "embed-verify", "--p", "3", "--q", "4", "--k", "2", "--n", "4")
    assert code == 0
    rows = out.strip().split("\n")[1:]
    assert len(rows) == 32
    assert {r.split(",")[6] for r in rows} == {"3"}


def test_embed_verify_json(capsys):
    code, out, _ = invoke(capsys, "embed-verify", *BASE, "--n", "1", "--format", "json")
    assert code == 0
    assert json.loads(out)["verdict"] == "pass"


def test_embed_verify_invalid(capsys):
    assert invoke(capsys, "embed-verify", "--p", "3", "--q", "2", "--k", "1")[0] == 2


@pytest.mark.parametrize(
    "args", [["--p", "1", "--q", "2", "--k", "1", "--max-scale", "4"],
             ["--p", "2", "--q", "3", "--k", "2", "--max-scale", "3"]]
)
def test_triangle_check_passes(capsys, args):
    code, out, _ = invoke(capsys, "triangle-check", *args)
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "pass" and doc["witness"] is None
    assert doc["kernel_divisibility"]["verdict"] == "pass"


def test_triangle_check_config_error(capsys):
    assert invoke(capsys, "triangle-check", *BASE, "--max-scale", "0")[0] == 2


def test_triangle_check_reports_witness(capsys, monkeypatch, odd):
    witness = ((0, 0), (1, 0), (2, 0))

    def fake(params, max_scale):
        return TriangleFreenessCertificate(
            params, max_scale, (0, 1), "bruteforce", "fail", witness, 1
        )

    monkeypatch.setattr(cli, "triangle_free_check_bruteforce", fake)
    code, out, _ = invoke(capsys, "triangle-check", *BASE)
    assert code == 1
    doc = json.loads(out)
    assert doc["verdict"] == "fail" and doc["witness"]


def test_quotient_alpha(capsys):
    code, out, _ = invoke(capsys, "quotient-alpha", *BASE, "--n", "1", "--m", "5")
    assert code == 0
    doc = json.loads(out)
    assert doc["alpha"] == 10
    assert doc["density"] == "2/5"
    assert doc["dominance_ok"] is True


def test_quotient_alpha_degenerate(capsys):
    code, _, err = invoke(capsys, "quotient-alpha", *BASE, "--n", "1", "--m", "2")
    assert code == 2 and "DegenerateQuotient" in err


def test_quotient_alpha_too_large(capsys):
    code, _, err = invoke(capsys, "quotient-alpha", *BASE, "--n", "1", "--m", "11")
    assert code == 2 and "InstanceTooLarge" in err


def test_quotient_alpha_several_moduli(capsys):
    code, out, _ = invoke(capsys, "quotient-alpha", *BASE, "--n", "2", "--m", "5,7")
    assert code == 0
    assert [d["m"] for d in json.loads(out)["quotients"]] == [5, 7]


def test_report(capsys):
    code, out, _ = invoke(
        capsys, "report", *BASE, "--n", "2", "--n-sweep", "2,4", "--grid", "16", "--m", "5,7",
        "--threads", "1",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["overall"] == "pass"
    assert set(doc["verdicts"]) >= {
        "total_weight_2k", "central_symmetry", "embedding_distance_p_mod_q",
        "triangle_free", "finite_ratio_bound_dominance", "chromatic_bound_trend",
    }


def test_config_file_and_override(capsys, tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"p": 1, "q": 2, "k": 1, "n": 1, "moduli": [5]}))
    code, out, _ = invoke(capsys, "quotient-alpha", "--config", str(path))
    assert code == 0 and json.loads(out)["alpha"] == 10
    code, out, _ = invoke(capsys, "generators", "--config", str(path), "--n", "2")
    assert len(json.loads(out)["entries"]) == 8


@pytest.mark.parametrize("content", ["{not json", "[1, 2]", '{"bogus": 1}', '{"p": 2, "q": 4}'])
def test_bad_config_file(capsys, tmp_path, content):
    path = tmp_path / "cfg.json"
    path.write_text(content)
    assert invoke(capsys, "generators", "--config", str(path))[0] == 2


def test_output_dir_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = invoke(capsys, "generators", *BASE, "--n", "1")
    assert code == 0 and out == ""
    assert len(json.loads((tmp_path / "generators.json").read_text())["entries"]) == 4
    invoke(capsys, "generators", *BASE, "--n", "1", "-o", "sub/g.json")
    assert (tmp_path / "sub" / "g.json").exists()
    code, out, _ = invoke(capsys, "generators", *BASE, "--n", "1", "-o", "-")
    assert json.loads(out)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(grid=1).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(moduli=[1]).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(margin=1.5).validate()
    cfg = ExperimentConfig(n=3).validate()
    assert cfg.sweep == [3]
    assert cfg.refinement().levels == 16
    assert ExperimentConfig.from_mapping(cfg.to_dict()) == cfg


def test_console_script_module():
    proc = subprocess.run(
        [sys.executable, "-m", "moddist.cli", "generators", *BASE, "--n", "1"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert len(json.loads(proc.stdout)["entries"]) == 4
