from functools import lru_cache

import pytest

from thetasph import transform as tr
from thetasph.rootsys import build_root_system, parse_theta

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@lru_cache(maxsize=None)
def system(name: str):
    return build_root_system(name)


@lru_cache(maxsize=None)
def transformed_bump(name: str, theta: str, m: int):
    """Standard bump, its transform and samples on the default spectral grid."""
    rs = system(name)
    th = parse_theta(rs, theta)
    C = tr.standard_support(rs, th)
    f = tr.bump(C, rs=rs, theta=th)
    T = tr.ThetaTransform(rs, f, m, th)
    sg = tr.SpectralGrid.make(rs)
    return rs, th, C, f, T, sg, T.on_grid(sg)


@pytest.fixture(scope="session")
def A1():
    return system("A1")


@pytest.fixture(scope="session")
def A2():
    return system("A2")


@pytest.fixture(scope="session")
def B2():
    return system("B2")


@pytest.fixture(scope="session")
def G2():
    return system("G2")


@pytest.fixture
def criterion():
    def record(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE[number] = (bool(ok), detail)
        assert ok, f"criterion {number}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
