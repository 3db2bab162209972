"""One test per acceptance criterion.

Each result line is printed and also collected into a PASS/FAIL table shown
at the end of the pytest run.
"""
import pytest

from backstep.acceptance import CRITERIA, run_criterion

SEED = 0
RESULTS = []


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number):
    result = run_criterion(number, SEED)
    RESULTS.append(result)
    print(result.line())
    assert result.passed, result.detail
