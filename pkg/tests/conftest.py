import numpy as np
import pytest

from ensemble_pca.dataio import synth_wave

# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def angle(u, v):
    """Angle between the lines spanned by u and v, in radians."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    c = abs(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return float(np.arccos(min(1.0, c)))


@pytest.fixture(scope="session")
def small_wave():
    return synth_wave(N=400, m=40, seed=11)


@pytest.fixture(scope="session")
def clean_wave():
    # noiseless two-mode data
    return synth_wave(N=500, m=30, noise_floor=0.0, seed=5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
