"""Shared pytest hooks: collects acceptance verdicts and prints them at the end."""

from contextlib import contextmanager
from types import SimpleNamespace

import pytest

_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def criterion(request):
    """``with criterion(3, "oracle equivalence") as c: ...; c.detail = "..."``.

    Records PASS when the block exits cleanly and FAIL when it raises.
    """
    verdicts = request.config.stash[_VERDICTS]

    @contextmanager
    def check(number, name):
        box = SimpleNamespace(detail="")
        try:
            yield box
        except BaseException:
            verdicts.append((number, name, False, box.detail))
            raise
        verdicts.append((number, name, True, box.detail))

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = config.stash.get(_VERDICTS, [])
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(verdicts, key=lambda v: v[0]):
        line = f"{'PASS' if passed else 'FAIL'}  criterion {number}: {name}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
