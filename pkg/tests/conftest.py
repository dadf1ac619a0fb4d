import numpy as np
import pytest

from gyre.weierstrass import get_family, in_omega


def sample_omega(n, family, seed=0, im_max=2.5, im_min=0.05):
    """``n`` random moduli inside the open domain of ``family``."""
    fam = get_family(family)
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        tau = complex(rng.uniform(-1, fam.right_edge), rng.uniform(im_min, im_max))
        if in_omega(tau, fam) and abs(tau + 1) > 0.02 and abs(tau - fam.right_edge) > 0.02:
            out.append(tau)
    return out


# -- acceptance report ---------------------------------------------------------------

ACCEPTANCE_LINES: dict = {}


class AcceptanceRecorder:
    def record(self, criterion: int, passed: bool, detail: str) -> None:
        line = f"acceptance {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[criterion] = line
        print(line)


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
