"""End-to-end command line behavior, exit codes and artifacts."""

import json

import pytest

from trackscore.cli import main

STAIRCASE = (
    "series_id,t,x1,x2\n"
    "s,0.0,0.0,0.0\n"
    "s,1.0,1.0,0.0\n"
    "s,2.0,1.0,1.0\n"
)

PAIR = STAIRCASE + (
    "r,0.0,0.0,0.0\n"
    "r,1.0,0.0,1.0\n"
    "r,2.0,1.0,1.0\n"
)


@pytest.fixture
def staircase_csv(tmp_path):
    f = tmp_path / "stairs.csv"
    f.write_text(STAIRCASE)
    return f


@pytest.fixture
def pair_csv(tmp_path):
    f = tmp_path / "pair.csv"
    f.write_text(PAIR)
    return f


def test_sig_writes_frozen_record(tmp_path, staircase_csv, capsys):
    out = tmp_path / "sig.txt"
    code = main(["sig", "--input", str(staircase_csv), "--depth", "2",
                 "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "2,2"
    assert lines[1] == "1"
    assert lines[2] == "1,1"
    assert lines[3] == "0.5,1,0,0.5"
    manifest = json.loads((tmp_path / "sig.txt.manifest.json").read_text())
    assert manifest["command"] == "sig"
    assert manifest["parameters"]["depth"] == 2
    assert "artifact_version" in manifest and "timestamp" in manifest
    assert "wrote" in capsys.readouterr().out


def test_sig_multiple_series_get_suffixed_files(tmp_path, pair_csv):
    out = tmp_path / "sig.txt"
    assert main(["sig", "--input", str(pair_csv), "--depth", "2",
                 "--out", str(out)]) == 0
    assert (tmp_path / "sig-s.txt").exists()
    assert (tmp_path / "sig-r.txt").exists()
    manifest = json.loads((tmp_path / "sig.txt.manifest.json").read_text())
    assert manifest["parameters"]["files"] == {
        "s": "sig-s.txt", "r": "sig-r.txt",
    }


def test_sig_time_augment_changes_width(tmp_path, staircase_csv):
    out = tmp_path / "aug.txt"
    assert main(["sig", "--input", str(staircase_csv), "--depth", "2",
                 "--time-augment", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "3,2"


def test_missing_input_is_data_error(tmp_path, capsys):
    code = main(["sig", "--input", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "o.txt")])
    assert code == 2
    assert "nope.csv" in capsys.readouterr().err


def test_empty_input_names_file(tmp_path, capsys):
    f = tmp_path / "empty.csv"
    f.write_text("")
    code = main(["entropy", "--input", str(f)])
    assert code == 2
    err = capsys.readouterr().err
    assert "empty.csv" in err and "empty file" in err


def test_usage_errors_exit_one(capsys):
    assert main(["sig", "--input", "x.csv"]) == 1  # --out missing
    assert main(["mi", "--model", "spiral", "--rho", "2.0"]) == 1
    assert main(["no-such-command"]) == 1
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "trackscore" in capsys.readouterr().out


def test_divergence_same_file_is_zero(tmp_path, staircase_csv, capsys):
    out = tmp_path / "div.csv"
    code = main(["divergence", "--a", str(staircase_csv),
                 "--b", str(staircase_csv), "--depth", "3",
                 "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out.strip() == "0.0"
    lines = out.read_text().splitlines()
    assert lines[0] == "quantity,side,depth,value,n_samples,seed,iterations,grad_norm"
    cells = lines[1].split(",")
    assert cells[0] == "divergence" and cells[3] == "0.0"


def test_divergence_positive_between_different_files(tmp_path, capsys):
    a = tmp_path / "a.csv"
    a.write_text(STAIRCASE)
    b = tmp_path / "b.csv"
    b.write_text(
        "series_id,t,x1,x2\n"
        "u,0.0,0.0,0.0\n"
        "u,1.0,-1.0,0.5\n"
        "u,2.0,0.5,1.5\n"
    )
    assert main(["divergence", "--a", str(a), "--b", str(b),
                 "--depth", "2"]) == 0
    val = float(capsys.readouterr().out.strip())
    assert val > 0.0


def test_entropy_of_point_mass_is_zero(staircase_csv, capsys):
    assert main(["entropy", "--input", str(staircase_csv), "--depth", "3"]) == 0
    assert abs(float(capsys.readouterr().out.strip())) <= 1e-15


def test_score_requires_single_series(tmp_path, pair_csv, staircase_csv, capsys):
    code = main(["score", "--x", str(pair_csv),
                 "--measure", str(staircase_csv)])
    assert code == 2
    assert "exactly one series" in capsys.readouterr().err


def test_score_against_pair_measure(tmp_path, pair_csv, staircase_csv, capsys):
    out = tmp_path / "score.csv"
    code = main(["score", "--x", str(staircase_csv), "--measure", str(pair_csv),
                 "--depth", "2", "--side", "left", "--out", str(out)])
    assert code == 0
    printed = float(capsys.readouterr().out.strip())
    row = out.read_text().splitlines()[1].split(",")
    assert row[1] == "left" and float(row[3]) == printed
    assert printed > 0.0


def test_reruns_are_byte_identical(tmp_path, staircase_csv, capsys):
    out1 = tmp_path / "r1.csv"
    out2 = tmp_path / "r2.csv"
    for out in (out1, out2):
        assert main(["entropy", "--input", str(staircase_csv),
                     "--out", str(out)]) == 0
    capsys.readouterr()
    assert out1.read_bytes() == out2.read_bytes()
    m1 = json.loads((tmp_path / "r1.csv.manifest.json").read_text())
    m2 = json.loads((tmp_path / "r2.csv.manifest.json").read_text())
    m1.pop("timestamp"), m2.pop("timestamp")
    assert m1 == m2


def test_numeric_failure_exit_code(tmp_path, pair_csv, capsys):
    # one iteration cannot converge; must be reported as exit 3
    code = main(["entropy", "--input", str(pair_csv), "--depth", "4",
                 "--max-iters", "1"])
    assert code == 3
    assert "max-iters" in capsys.readouterr().err


def test_mi_smoke(tmp_path, capsys):
    out = tmp_path / "mi.csv"
    code = main(["mi", "--model", "spiral", "--rho", "0.5",
                 "--n-u", "2", "--n-x", "3", "--depth", "2",
                 "--resolution", "0.25", "--seed", "1", "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out.strip()
    row = out.read_text().splitlines()[1].split(",")
    assert row[0] == "mutual_information"
    assert float(row[3]) == float(printed)
    assert row[5] == "1"  # seed column recorded


def test_experiment_warp_smoke(tmp_path, capsys):
    out = tmp_path / "warp.csv"
    code = main(["experiment-warp", "--p-max", "4", "--p-points", "3",
                 "--gammas", "1.0,0.1", "--depth", "2",
                 "--resolution", "0.1", "--out", str(out)])
    assert code == 0
    capsys.readouterr()
    lines = out.read_text().splitlines()
    assert lines[0] == "p,geometric_divergence,sdtw_gamma_1,sdtw_gamma_0.1,dtw"
    assert len(lines) == 4
    manifest = json.loads((tmp_path / "warp.csv.manifest.json").read_text())
    assert manifest["command"] == "experiment-warp"


def test_experiment_mi_smoke(tmp_path, capsys):
    out = tmp_path / "mi_sweep.csv"
    code = main(["experiment-mi-scalar", "--rhos", "0.0,1.0",
                 "--n-u", "2", "--n-x", "3", "--depth", "2",
                 "--resolution", "0.25", "--out", str(out)])
    assert code == 0
    capsys.readouterr()
    lines = out.read_text().splitlines()
    assert lines[0] == "rho,mi,entropy,n_u,n_x,seed"
    assert len(lines) == 3
