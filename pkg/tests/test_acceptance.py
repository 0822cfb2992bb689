"""Acceptance criteria, one test each, at their stated tolerances.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or in
the captured output of a failure) and then asserts the outcome.
"""
import pytest

from abcone.verify import CRITERIA


@pytest.mark.parametrize("check", CRITERIA, ids=lambda c: f"criterion_{c.number:02d}_{c.label.replace(' ', '_')}")
def test_criterion(check, capsys):
    result = check()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
