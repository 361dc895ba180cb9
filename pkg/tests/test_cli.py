import json
import subprocess
import sys

import pytest

from ergolab.cli import main

CFG = "[experiment]\nkind = boweneye\n[system]\nalpha = (-2, 1)\nbeta = (-2, 1)\n[budget]\nK = 200\n"


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "eye.ini"
    p.write_text(CFG)
    return p


def test_run_prints_json(cfg_file, capsys, tmp_path):
    assert main(["boweneye", "--config", str(cfg_file), "--out", str(tmp_path / "o")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["limsup"] == pytest.approx(2 / 3, abs=1e-3)
    assert (tmp_path / "o" / "trace.csv").exists()


def test_kind_mismatch_is_usage_error(cfg_file, capsys):
    assert main(["spectrum", "--config", str(cfg_file)]) == 2
    assert "kind" in capsys.readouterr().err


def test_bad_arguments_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["spectrum"])
    assert exc.value.code == 2


def test_missing_config_exit_2(tmp_path, capsys):
    assert main(["spectrum", "--config", str(tmp_path / "none.ini")]) == 2


def test_budget_over_ceiling_exit_2(tmp_path, capsys):
    p = tmp_path / "big.ini"
    p.write_text("[experiment]\nkind = spectrum\n[system]\nfamily = doubling\n[budget]\nN = 100000000\nm = 8\n")
    assert main(["spectrum", "--config", str(p)]) == 2
    assert "ceiling" in capsys.readouterr().err


def test_acceptance_subset(capsys):
    assert main(["acceptance", "--criteria", "6"]) == 0
    assert capsys.readouterr().out.startswith("PASS criterion 6")


def test_module_entry_point(cfg_file):
    r = subprocess.run([sys.executable, "-m", "ergolab", "boweneye", "--config", str(cfg_file)],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0
    assert json.loads(r.stdout)["takens"]["holds"] is True
