import json
import subprocess
import sys

import pytest

from longrange.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(csv_text):
    lines = [l for l in csv_text.splitlines() if not l.startswith("#")]
    return [l.split(",") for l in lines]


def test_wigner_cg(capsys):
    code, out, _ = run(capsys, "wigner", "cg", "2", "0", "2", "0", "0", "0")
    assert code == 0
    assert rows(out)[1][0] == "-1/sqrt(3)"


def test_wigner_half_integer_input(capsys):
    code, out, _ = run(capsys, "wigner", "cg", "1/2", "1/2", "1/2", "-1/2", "0", "0")
    assert code == 0 and rows(out)[1][0] == "1/sqrt(2)"


def test_wigner_triad_note(capsys):
    code, out, _ = run(capsys, "wigner", "6j", "2", "2", "8", "2", "2", "2")
    assert code == 0
    assert "triad violated" in out
    assert rows(out)[1][0] == "0"


def test_wigner_9j_zero_note(capsys):
    code, out, _ = run(capsys, "wigner", "9j", "2", "2", "0", "2", "2", "0", "2", "2", "0")
    assert code == 0 and "single 6j" in out


def test_wigner_parity_is_usage_error(capsys):
    code, _, err = run(capsys, "wigner", "cg", "2", "1", "2", "0", "2", "1")
    assert code == 1 and "projection" in err


def test_atoms_scales(capsys):
    code, out, _ = run(capsys, "atoms", "scales", "--mass-amu", "132.905429", "--c6", "-6860")
    assert code == 0
    header, values = rows(out)
    rec = dict(zip(header, values))
    assert float(rec["R_vdw_a0"]) == pytest.approx(101.0, rel=5e-3)
    assert float(rec["E_vdw_mK"]) == pytest.approx(0.1279, rel=1e-2)


def test_atoms_c3_and_c6(capsys):
    code, out, _ = run(capsys, "atoms", "c3", "--spectrum", "cs.json")
    assert code == 0
    vals = [float(r[1]) for r in rows(out)[1:] if r[0] == "Sigma"]
    assert max(vals) == pytest.approx(20.95, rel=1e-2)
    code, out, _ = run(capsys, "atoms", "c6", "--spectrum", "toy.json", "--method", "quadrature")
    assert code == 0 and float(rows(out)[1][-1]) == pytest.approx(-1 / 3, rel=1e-8)


def test_rotor_blocks_table(capsys):
    code, out, _ = run(capsys, "rotor", "blocks", "narb.json", "--level", "1", "1")
    assert code == 0
    exact = {r[2] for r in rows(out)[1:]}
    assert {"-4/25", "-17/200", "-13/40", "-1/25"} <= exact
    assert len(rows(out)) - 1 == 6


def test_rotor_pec_small(capsys):
    code, out, _ = run(capsys, "rotor", "pec", "narb.json", "--frame", "sf", "-M", "0", "--jmax", "2",
                       "--lmax", "2", "--jtot-max", "1", "--field-kvcm", "2", "--points", "4", "--curves", "5")
    assert code == 0
    header = rows(out)[0]
    assert header[:3] == ["R_a0", "R_over_Rstar", "E0_au"] and len(header) == 7
    meta = json.loads(out.splitlines()[0][2:])
    assert meta["warnings"] and meta["config"]["field_kvcm"] == 2.0
    assert "warning:" in out


def test_rotor_zero_points_usage(capsys):
    code, _, err = run(capsys, "rotor", "pec", "narb.json", "--points", "0")
    assert code == 1 and "points" in err


def test_missing_data_file(capsys, tmp_path):
    code, _, _ = run(capsys, "rotor", "blocks", str(tmp_path / "nope.json"))
    assert code == 2


def test_malformed_data_reports_line(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n "name": "x",\n oops\n}')
    code, _, err = run(capsys, "atoms", "c6", "--spectrum", str(bad))
    assert code == 2 and "line 3" in err


def test_unknown_subcommand(capsys):
    code, _, _ = run(capsys, "teleport")
    assert code == 1


def test_json_format_anywhere(capsys):
    for argv in (["--format", "json", "wigner", "6j", "2", "2", "2", "2", "2", "2"],
                 ["wigner", "6j", "2", "2", "2", "2", "2", "2", "--format", "json"]):
        code, out, _ = run(capsys, *argv)
        body = json.loads(out)
        assert code == 0 and body["columns"] == ["exact", "value"]
        assert body["metadata"]["constants"] == "CODATA-2018"


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[atoms]\nmass-amu = 132.905429\nc6 = -6860\n")
    code, out, _ = run(capsys, "--config", str(cfg), "atoms", "scales")
    assert code == 0
    assert float(dict(zip(*rows(out)))["C6_au"]) == -6860
    code, out, _ = run(capsys, "--config", str(cfg), "atoms", "scales", "--c6", "-4698")
    assert float(dict(zip(*rows(out)))["C6_au"]) == -4698
    bad = tmp_path / "bad.ini"
    bad.write_text("[atoms]\nnonsense = 1\n")
    assert run(capsys, "--config", str(bad), "atoms", "scales")[0] == 2


def test_output_is_deterministic(capsys, tmp_path):
    argv = ["rotor", "pec", "narb.json", "--frame", "bf", "--jmax", "2", "--points", "5", "--curves", "3"]
    outs = []
    for k in range(2):
        path = tmp_path / f"o{k}.csv"
        assert run(capsys, *argv, "--out", str(path))[0] == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "longrange.cli", "wigner", "cg", "2", "0", "2", "0", "0", "0"],
                          capture_output=True, text=True, check=True)
    assert "-1/sqrt(3)" in proc.stdout
