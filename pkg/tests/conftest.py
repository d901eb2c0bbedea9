import functools

import pytest

from whitehead_lab.groups import DEFAULT_SUITE, named_group
from whitehead_lab.padic import PrecisionContext

# one pass/fail line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


@functools.lru_cache(maxsize=None)
def group(name):
    return named_group(name)


def ctx_for(G, **kw):
    return PrecisionContext.for_order(G.p, G.order, **kw)


@pytest.fixture(params=DEFAULT_SUITE)
def any_group(request):
    return group(request.param)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
