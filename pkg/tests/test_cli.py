import json

import pytest

from nullpack.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_expand(capsys):
    code, out, _ = run(capsys, "expand", "1/2", "--depth", "6")
    assert code == 0
    assert out.strip() == "p=1;2:0;3:2;4:3;5:4"


def test_expand_vector(capsys):
    code, out, _ = run(capsys, "expand", "1/2,2/3", "--depth", "4")
    assert code == 0
    assert out.strip() == "p=2;2:0,1;3:2,0"


def test_expand_rejects_out_of_range(capsys):
    code, _, err = run(capsys, "expand", "7/2")
    assert code == 2
    assert "error" in err


def test_expand_rejects_garbage(capsys):
    code, _, err = run(capsys, "expand", "zebra")
    assert code == 2


def test_psi(capsys):
    code, out, _ = run(capsys, "psi", "1/1", "--N", "4")
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == ["1/2"]
    assert payload["N"] == 4
    assert payload["tail_radius"] > 0


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--family", "sawyer_line")
    assert code == 0
    assert json.loads(out)["ok"] is True


def test_validate_unknown_family(capsys):
    code, _, err = run(capsys, "validate", "--family", "mystery")
    assert code == 2


def test_certify(capsys, tmp_path):
    out_path = tmp_path / "cert.json"
    code, out, _ = run(
        capsys, "certify", "--eps", "0.05", "--suffixes", "2",
        "--output", str(out_path),
    )
    assert code == 0
    payload = json.loads(out_path.read_text())
    assert payload["k"] == 4
    assert payload["N"] == "67"
    assert all(r <= 1.0 for r in payload["term_domination_ratios"].values())
    assert payload["version"]
    assert payload["config_hash"]


def test_certify_bounded(capsys):
    code, out, _ = run(capsys, "certify", "--eps", "0.001")
    assert code == 0
    payload = json.loads(out)
    assert payload["bounded_mode"] is True
    assert "term_domination_ratios" not in payload


def test_measure_writes_csv_json_png(capsys, tmp_path):
    out_path = tmp_path / "decay.csv"
    code, _, _ = run(
        capsys, "measure", "--truncations", "4,6", "--samples", "50",
        "--output", str(out_path),
    )
    assert code == 0
    assert out_path.exists()
    assert out_path.with_suffix(".json").exists()
    assert out_path.with_suffix(".png").exists()
    lines = out_path.read_text().splitlines()
    assert lines[0].startswith("N,delta")
    assert len(lines) == 3


def test_measure_no_figure(capsys, tmp_path):
    out_path = tmp_path / "decay.csv"
    code, _, _ = run(
        capsys, "measure", "--truncations", "4", "--samples", "20",
        "--output", str(out_path), "--no-figure",
    )
    assert code == 0
    assert not out_path.with_suffix(".png").exists()


def test_measure_stdout_reproducible(capsys):
    _, out1, _ = run(capsys, "measure", "--truncations", "4", "--samples", "30")
    _, out2, _ = run(capsys, "measure", "--truncations", "4", "--samples", "30")
    assert out1 == out2


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("family = sawyer_parabola\nlambda = 0.25\n")
    code, out, _ = run(capsys, "validate", "--config", str(cfg))
    assert code == 0
    # explicit flag wins over the config value
    code, out, _ = run(
        capsys, "validate", "--config", str(cfg), "--family", "twist_pair"
    )
    assert code == 0


def test_config_malformed(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just words\n")
    code, _, err = run(capsys, "validate", "--config", str(cfg))
    assert code == 2


def test_demo(capsys, tmp_path):
    outdir = tmp_path / "demo"
    code, out, _ = run(
        capsys, "demo", "--samples", "100", "--outdir", str(outdir)
    )
    assert code == 0
    for name in ("validate.json", "certificate.json", "decay.csv", "decay.png"):
        assert (outdir / name).exists(), name
