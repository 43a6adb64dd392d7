import json

import numpy as np
import pytest

from chancompat.channels import amplitude_damping_choi, channel_to_json
from chancompat.cli import main


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sweep_smoke_two_rows(capsys):
    code, out, err = run_cli(
        [
            "sweep", "--family", "identity", "--family2", "depolarizing-indiv",
            "--t-step", "0.5", "--t-max", "0.5", "--dr", "0.05",
        ],
        capsys,
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t,r_generic,r_cd,trace_distance"
    assert len(lines) == 3
    assert lines[1].startswith("0,")


def test_figure_row_count_and_determinism(tmp_path, capsys):
    args = [
        "figure", "--id", "1", "--t-step", "0.25", "--t-max", "0.75",
        "--dr", "0.05", "--output", str(tmp_path / "a.csv"),
    ]
    assert main(args) == 0
    args[-1] = str(tmp_path / "b.csv")
    assert main(args) == 0
    a = (tmp_path / "a.csv").read_bytes()
    b = (tmp_path / "b.csv").read_bytes()
    assert a == b
    lines = a.decode().splitlines()
    assert len(lines) - 1 == int(np.floor(0.75 / 0.25)) + 1


def test_figure_seven_has_teleport_columns(capsys):
    code, out, _ = run_cli(
        ["figure", "--id", "7", "--t-step", "0.5", "--dr", "0.1"], capsys
    )
    assert code == 0
    header = out.splitlines()[0]
    assert header == "t,r_generic,r_cd,trace_distance,n_value,f_max"
    first = out.splitlines()[1].split(",")
    assert first[-2] == "3" and first[-1] == "1"


def test_noise_selection_controls_columns(capsys):
    code, out, _ = run_cli(
        [
            "sweep", "--family", "identity", "--family2", "eternal",
            "--t-step", "1", "--t-max", "1", "--noise", "cd", "--dr", "0.1",
        ],
        capsys,
    )
    assert code == 0
    assert out.splitlines()[0] == "t,r_cd,trace_distance"


def test_nine_significant_digits(capsys):
    code, out, _ = run_cli(
        ["teleport", "--family", "depolarizing-div", "--t-step", "0.1", "--t-max", "0.1"],
        capsys,
    )
    assert code == 0
    row = out.splitlines()[2].split(",")
    # n = 3*exp(-0.05) to nine significant digits
    assert row[1] == format(3 * np.exp(-0.05), ".9g")


def test_custom_choi_input(tmp_path, capsys):
    path = tmp_path / "chan.json"
    path.write_text(channel_to_json(amplitude_damping_choi(0.3)))
    code, out, _ = run_cli(
        [
            "sweep", "--family", "custom", "--choi", str(path),
            "--family2", "identity", "--t-step", "1", "--t-max", "1", "--dr", "0.1",
        ],
        capsys,
    )
    assert code == 0
    assert len(out.splitlines()) == 3


def test_custom_without_choi_is_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        main(["sweep", "--family", "custom", "--family2", "identity"])
    assert err.value.code == 2


def test_malformed_choi_returns_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"din": 2}))
    code, _, err = run_cli(
        ["sweep", "--family", "custom", "--choi", str(path), "--family2", "identity"],
        capsys,
    )
    assert code == 2
    assert "error" in err


def test_bad_flags_exit_two():
    with pytest.raises(SystemExit) as err:
        main(["figure"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["sweep", "--family", "bogus", "--family2", "identity"])
    assert err.value.code == 2


def test_measure_command(capsys):
    code, out, _ = run_cli(
        [
            "measure", "--family", "depolarizing-div", "--t-step", "0.25",
            "--t-max", "0.5", "--dr", "0.05",
        ],
        capsys,
    )
    assert code == 0
    assert "measure_raw:     0" in out
    assert "reference:       identity" in out


def test_measure_undersampled_grid_is_error(capsys):
    code, _, err = run_cli(
        ["measure", "--family", "depolarizing-indiv", "--t-step", "0.1"],
        capsys,
    )
    assert code == 2
    assert "undersamples" in err


def test_validate_only_filter(capsys):
    code, out, _ = run_cli(["validate", "--only", "teleportation_curve"], capsys)
    assert code == 0
    assert "[PASS] teleportation_curve" in out
    assert "1/1 checks passed" in out


def test_validate_unknown_filter(capsys):
    code, _, err = run_cli(["validate", "--only", "nonexistent_check"], capsys)
    assert code == 2
    assert "no check matches" in err


def test_validate_reports_failure_with_nonzero_exit(capsys, monkeypatch):
    from chancompat import validation

    def broken():
        return validation.CheckResult("teleportation_curve", False, "forced failure")

    monkeypatch.setitem(validation.CHECKS, "teleportation_curve", broken)
    code, out, _ = run_cli(["validate", "--only", "teleportation_curve"], capsys)
    assert code == 1
    assert "[FAIL] teleportation_curve" in out
    assert "0/1 checks passed" in out
