import subprocess
import sys
from pathlib import Path

import pytest

from viscofem.io import read_csv

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"


def _run(name, *args, cwd):
    return subprocess.run([sys.executable, str(SCRIPTS / name), *args], cwd=cwd,
                          capture_output=True, text=True, timeout=300)


@pytest.mark.parametrize("name", sorted(p.name for p in SCRIPTS.glob("*.py")))
def test_help(name, tmp_path):
    assert _run(name, "--help", cwd=tmp_path).returncode == 0


def test_estimator_orders_small(tmp_path):
    r = _run("estimator_orders.py", "--weights", "sin_half", "--levels", "4", "8", "--out", "o.csv", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    header, rows = read_csv(tmp_path / "o.csv")
    assert header[:3] == ["weight", "n", "h"] and len(rows) == 2
