import subprocess
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))


@pytest.fixture(scope="session")
def region_csv(tmp_path_factory):
    """Region CSV produced by the simulator CLI (the upstream interface)."""
    out = tmp_path_factory.mktemp("region") / "region.csv"
    subprocess.run(
        [sys.executable, "-m", "mlmsim.cli", "broadcast",
         "--snr1-db", "3.0103", "--snr2-db", "10", "--grid", "64",
         "--out", str(out)],
        check=True, capture_output=True,
    )
    return out


@pytest.fixture(scope="session")
def sweep_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep") / "sweep.csv"
    subprocess.run(
        [sys.executable, "-m", "mlmsim.cli", "sweep",
         "--lattice", "cubic1", "--snr-db", "6,10,13", "--mode", "asymptotic",
         "--blocks", "400", "--seed", "3", "--out", str(out)],
        check=True, capture_output=True,
    )
    return out
