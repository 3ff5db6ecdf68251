import os

import pytest

from cubeperc import kernels

_VERDICTS: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance verdict; the line is printed in the terminal summary."""

    def record(number: int, name: str, ok: bool, detail: str = "") -> bool:
        _VERDICTS.append((number, name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} [{number:2d}] {name}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(_VERDICTS):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} [{number:2d}] {name}: {detail}")


BACKENDS = kernels.available()


@pytest.fixture(params=BACKENDS)
def backend(request):
    previous = kernels.BACKEND
    kernels.use(request.param)
    yield request.param
    kernels.use(previous)


def pytest_report_header(config):
    return f"cubeperc kernels: default={kernels.BACKEND}, available={','.join(BACKENDS)}, pure={os.environ.get('CUBEPERC_PURE', '0')}"
