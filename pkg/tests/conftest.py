import numpy as np
import pytest
from hypothesis import strategies as st

from pathpresence.qcore import BeamConfig, CompositeState


@pytest.fixture
def four_to_one():
    return BeamConfig.from_ratio(4, 1)


@pytest.fixture
def symmetric():
    return BeamConfig(np.sqrt(0.5), np.sqrt(0.5))


angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)
mixing = st.floats(0.03, np.pi / 2 - 0.03)


@st.composite
def beam_configs(draw, chi=None):
    theta = draw(mixing)
    phase = draw(st.floats(-np.pi, np.pi)) if chi is None else chi
    return BeamConfig(np.cos(theta), np.sin(theta), phase)


@st.composite
def states(draw):
    parts = draw(st.lists(st.floats(-1, 1), min_size=8, max_size=8))
    v = np.array(parts[:4]) + 1j * np.array(parts[4:])
    n = np.linalg.norm(v)
    if n < 1e-3:
        v = np.array([1, 0, 0, 0], dtype=complex)
        n = 1.0
    return CompositeState((v / n).reshape(2, 2))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
