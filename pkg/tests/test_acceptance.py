"""Acceptance gate: one test per criterion, each printing a pass/fail line.

All comparisons are exact; criteria 1, 5 and 7 additionally carry wall-clock
limits (10 s, 60 s, 120 s) enforced by the shared runner.
"""

import pytest

from moduli.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize(
    "index", range(len(CRITERIA)), ids=[f"criterion_{c[0]}" for c in CRITERIA]
)
def test_criterion(index):
    record = run_criterion(index)
    status = "PASS" if record["passed"] else "FAIL"
    print(
        f"{status} criterion {record['id']}: {record['description']} "
        f"[{record['elapsed']:.2f}s] {record['detail']}"
    )
    assert record["passed"], record["detail"]
