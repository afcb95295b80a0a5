import math

import pytest

from metascreen.geometry import Incidence, MetascreenConfig


@pytest.fixture
def cfg():
    """Reference dimer: L=1, R_D=0.05, d=0.3, theta=0.05 pi, delta=1e-3."""
    return MetascreenConfig()


@pytest.fixture
def cfg_sym():
    return MetascreenConfig(theta=0.0)


@pytest.fixture
def normal():
    return Incidence(0.0)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


PI = math.pi


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in getattr(rep, "user_properties", []):
                if name == "criterion":
                    lines.append(value)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
