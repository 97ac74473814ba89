from pathlib import Path

import numpy as np
import pytest

from cyclogaudin.config import parse_config
from cyclogaudin.lie_core import build_automorphism, build_simple_lie_algebra

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def load_config(name: str):
    return parse_config(CONFIGS / f"{name}.json")


def algebra_and_aut(kind: str):
    """Small fixed (algebra, automorphism) pairs used across the suite."""
    if kind == "sl2":
        L = build_simple_lie_algebra("A", 1)
        return L, build_automorphism(L, [0], [1], 1)
    if kind == "sl2_inner":
        L = build_simple_lie_algebra("A", 1)
        return L, build_automorphism(L, [0], [-1], 2)
    if kind == "sl2_i":
        L = build_simple_lie_algebra("A", 1)
        return L, build_automorphism(L, [0], [1j], 4)
    if kind == "sl3":
        L = build_simple_lie_algebra("A", 2)
        return L, build_automorphism(L, [0, 1], [1, 1], 1)
    if kind == "sl3_flip":
        L = build_simple_lie_algebra("A", 2)
        return L, build_automorphism(L, [1, 0], [1, 1], 2)
    raise KeyError(kind)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
