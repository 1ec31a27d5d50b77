"""One line per acceptance criterion; run with ``-s`` to see them."""

import pytest

from nskfluid.verify import CRITERIA, run_criterion


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA])
def test_criterion(number):
    res = run_criterion(number)
    print(res.line())
    assert res.passed, res.line()
