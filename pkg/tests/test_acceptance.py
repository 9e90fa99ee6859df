"""Acceptance suite: one PASS/FAIL line per criterion (run with ``-s`` to see them)."""
import pytest

from ofbm_sym.acceptance import CRITERIA, format_line, run


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"c{c.number:02d}" for c in CRITERIA])
def test_criterion(criterion):
    ok, detail = run(criterion)
    line = format_line(criterion, ok, detail)
    print(line)
    assert ok, line
