import sys
from pathlib import Path

import numpy as np
import pytest

from longrange.angular import triangle_ok
from longrange.spectra import LevelKey, SpectrumTable

DATA = Path(__file__).resolve().parents[1] / "src" / "longrange" / "data"


def random_table(rng: np.random.Generator, name: str, nlev: int = 4, jmax: int = 2,
                 half: bool = False, ranks=(0, 1, 2)) -> SpectrumTable:
    """Small spectrum with random energies and reduced elements; level 0 sits at zero."""
    levels = {}
    for i in range(nlev):
        j2 = 2 * int(rng.integers(0, jmax + 1)) + (1 if half else 0)
        e = 0.0 if i == 0 else float(rng.uniform(0.1, 1.0))
        levels[LevelKey(f"{name}{i}", j2)] = e
    keys = list(levels)
    red = {}
    for a in keys:
        for b in keys:
            for l in ranks:
                if (b, a, l) in red or (a == b and l == 0):
                    continue
                if triangle_ok(a.J2, 2 * l, b.J2):
                    red[(a, b, l)] = float(rng.normal())
    return SpectrumTable(name, levels, red)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        for line in results[k].strip("\n").splitlines():
            terminalreporter.write_line(line)
