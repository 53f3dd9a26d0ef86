"""Release gate: every acceptance criterion, one pass/fail line each.

Run with -s to see the lines as they complete; the thermal criterion
diagonalizes the full 8192-state operator and dominates the runtime.
"""

import pytest

from stringsim import acceptance


@pytest.mark.parametrize(
    "criterion", acceptance.CRITERIA,
    ids=[c.__name__.replace("criterion_", "") for c in acceptance.CRITERIA])
def test_criterion(criterion):
    result = criterion()
    print(result.line())
    assert result.passed, result.line()
