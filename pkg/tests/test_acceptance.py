"""Acceptance suite: one verdict line per criterion 1-11.

Run with `pytest tests/test_acceptance.py -v` or directly with `python3 tests/test_acceptance.py`.
"""

import sys

import pytest

from qorbit.suites import CRITERIA, run_suite

# wall-clock budgets (seconds) where the criterion states one
BUDGETS = {1: 1.0, 2: 30.0}


def verdict(k: int):
    res = run_suite(CRITERIA[k])
    within = res.seconds <= BUDGETS.get(k, float("inf"))
    ok = res.ok and within
    line = (f"ACCEPTANCE {k:2d} [{CRITERIA[k]}]: {'PASS' if ok else 'FAIL'} "
            f"({res.checks} checks, {res.seconds:.2f}s"
            + (f", budget {BUDGETS[k]:.0f}s" if k in BUDGETS else "") + ")")
    return ok, line, res


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    ok, line, res = verdict(k)
    with capsys.disabled():
        print("\n" + line)
    assert res.ok, res.failures[:5]
    assert ok, f"over the {BUDGETS.get(k)}s budget: {res.seconds:.2f}s"


if __name__ == "__main__":
    results = [verdict(k) for k in sorted(CRITERIA)]
    for _, line, _ in results:
        print(line)
    sys.exit(0 if all(ok for ok, _, _ in results) else 1)
