import pytest

from efimov import ThreeBodyParams, build_mesh

_ACCEPTANCE = []


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    _ACCEPTANCE.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_mesh():
    return build_mesh(1000.0, 120)


@pytest.fixture(scope="session")
def small_params():
    return ThreeBodyParams(cutoff=1000.0)
