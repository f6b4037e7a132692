import hashlib
import json
import subprocess
import sys

import pytest

from z2hubbard import cli
from z2hubbard.emulator import PostSelectionError


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def split_output(text):
    lines = text.splitlines(keepends=True)
    header = [l for l in lines[:3]]
    body = "".join(lines[3:])
    return header, body


def test_dims(capsys):
    code, out, _ = run_cli(capsys, "dims")
    assert code == 0
    assert "2x2: full 4096, physical 128" in out
    code, out, _ = run_cli(capsys, "dims", "--Lx", "4", "--extra-rishon")
    assert "qubits 27" in out


@pytest.mark.parametrize("argv", [["dims", "--Lx", "0"], ["dims", "--Ly", "abc"], ["bogus"], ["dims", "--t", "nan"]])
def test_invalid_input_exit_code(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2


def test_invalid_lattice_message(capsys):
    code, _, err = run_cli(capsys, "dims", "--Lx", "0")
    assert "invalid lattice 0x2" in err


def test_encode_is_deterministic_and_hashed(capsys):
    _, a, _ = run_cli(capsys, "encode", "--t", "1", "--U", "4")
    _, b, _ = run_cli(capsys, "encode", "--t", "1", "--U", "4")
    assert a == b
    header, body = split_output(a)
    assert header[0] == "# z2hubbard encode\n"
    cfg = json.loads(header[1][len("# config "):])
    assert cfg["t"] == 1.0 and cfg["U"] == 4.0 and cfg["Lx"] == 2
    assert header[2].strip() == "# sha256 " + hashlib.sha256(body.encode()).hexdigest()
    assert "# stabilizers vertex 4 plaquette 1" in body
    assert "1.0 ZZIIIIIIIIII" in body


def test_encode_penalties_add_terms(capsys):
    _, plain, _ = run_cli(capsys, "encode")
    _, pen, _ = run_cli(capsys, "encode", "--penalties", "--Ntarget", "4")
    assert len(pen.splitlines()) > len(plain.splitlines())
    assert "number" in pen


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nLx = 3\nLy = 2\nt = 0.5\n")
    _, out, _ = run_cli(capsys, "encode", "--config", str(cfg), "--Ly", "1")
    resolved = json.loads(split_output(out)[0][1][len("# config "):])
    assert (resolved["Lx"], resolved["Ly"], resolved["t"]) == (3, 1, 0.5)


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert run_cli(capsys, "dims", "--config", str(bad))[0] == 2
    bad.write_text("Lx 3\n")
    assert run_cli(capsys, "dims", "--config", str(bad))[0] == 2
    assert run_cli(capsys, "dims", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_output_file(tmp_path, capsys):
    path = tmp_path / "enc.txt"
    code, out, _ = run_cli(capsys, "encode", "-o", str(path))
    assert code == 0 and out == ""
    assert path.read_text().startswith("# z2hubbard encode")


def test_weights(capsys):
    code, out, _ = run_cli(capsys, "weights", "--Lx", "3", "--Ly", "3")
    assert code == 0
    assert "hopping 7" in out and "single_species_hopping 6" in out


def test_verify_passes(capsys):
    code, out, _ = run_cli(capsys, "verify", "--rho-list", "1.0", "--Ut-list", "0,8")
    assert code == 0
    assert "all checks passed" in out
    assert "sector basis 128" in out


SHORT = ["--outerSteps", "3", "--innerSteps", "2", "--tauMax", "0.4", "--dt", "0.05", "--recordEvery", "2"]


def test_evolve_jsonl_with_oracle(capsys):
    code, out, _ = run_cli(capsys, "evolve", *SHORT, "--oracle")
    assert code == 0
    header, body = split_output(out)
    rows = [json.loads(l) for l in body.splitlines() if not l.startswith("#")]
    assert len(rows) == 5 and rows[0]["tau"] == 0.0 and rows[-1]["tau"] == pytest.approx(0.4)
    assert all(r["oracle_dSz"] < 1e-3 and r["oracle_dN"] < 1e-3 for r in rows)
    summary = json.loads(body.splitlines()[-1][len("# summary "):])
    assert summary["drift_charge"] < 1e-10


def test_evolve_csv(capsys):
    code, out, _ = run_cli(capsys, "evolve", *SHORT, "--format", "csv", "--excitation", "none")
    assert code == 0
    body = split_output(out)[1].splitlines()
    assert body[0].startswith("tau,Sz_0,")
    assert len([l for l in body if not l.startswith("#")]) == 6


def test_evolve_charge_validation(capsys):
    code, _, err = run_cli(capsys, "evolve", *SHORT, "--excitation", "charge", "--site", "1,0")
    assert code == 2 and "corner" in err
    assert run_cli(capsys, "evolve", *SHORT, "--site", "5,5")[0] == 2
    assert run_cli(capsys, "evolve", *SHORT, "--site", "x")[0] == 2
    assert run_cli(capsys, "evolve", *SHORT, "--dt", "-1")[0] == 2


def test_evolve_post_selection_failure(capsys, monkeypatch):
    import z2hubbard.protocols as protocols

    def fail(*a, **k):
        raise PostSelectionError("post-selection impossible: forced")

    monkeypatch.setattr(protocols, "inject_excitation", fail)
    code, _, err = run_cli(capsys, "evolve", *SHORT)
    assert code == 3 and "post-selection impossible" in err


def test_convergence(capsys):
    code, out, _ = run_cli(capsys, "convergence", "--dt-list", "0.1,0.05", "--tauMax", "0.5", "--t", "1", "--U", "4")
    assert code == 0
    body = split_output(out)[1].splitlines()
    assert body[0] == "dt,error" and len(body) == 4 and body[-1].startswith("# slope")
    assert run_cli(capsys, "convergence", "--dt-list", "0.01,0.1")[0] == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "z2hubbard", "dims"], capture_output=True, text=True)
    assert out.returncode == 0 and "physical 128" in out.stdout
