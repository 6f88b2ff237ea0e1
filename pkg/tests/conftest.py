import warnings

import pytest

from tabterm import corpus_text
from tabterm.syntax import parse_goal, parse_program

ACCEPTANCE_LINES = []


def load(name, **kw):
    if not name.endswith(".tlp"):
        name += ".tlp"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return parse_program(corpus_text(name), **kw)


def goal(p, text):
    return parse_goal(text, p)


@pytest.fixture
def corpus():
    return load


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
