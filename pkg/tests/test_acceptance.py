"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines, or use
``rectex selftest`` for the same report without pytest.
"""

import pytest

from rectex.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", [n for n, _, _ in CRITERIA], ids=[name for _, name, _ in CRITERIA])
def test_criterion(number):
    result = run_criterion(number)
    print(result.line())
    assert result.ok, result.line()
