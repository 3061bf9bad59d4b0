"""One test per acceptance criterion, each run at exact tolerance and under its time budget."""

import time

import pytest

from enriques_k3 import checks, dynkin, quotient

BUDGET = {1: 1, 2: 5, 3: 5, 4: 5, 5: 10, 6: 30, 7: 120, 8: 60, 9: 60, 10: 1, 11: 1, 12: 120, 13: 60}

LINES = []


def _by_criterion(n):
    (check,) = [c for c in checks.CHECKS if c.criterion == n]
    return check


@pytest.mark.parametrize("n", sorted(BUDGET))
def test_criterion(n):
    check = _by_criterion(n)
    t0 = time.perf_counter()
    result = checks.run_check(check)
    elapsed = time.perf_counter() - t0
    ok = result.passed and elapsed < BUDGET[n]
    line = f"criterion {n:2d} {check.id}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s, budget {BUDGET[n]}s)"
    LINES.append(line)
    print(line)
    assert result.passed, result.witness
    assert elapsed < BUDGET[n]


def test_mii_automorphism_orders():
    g = quotient.build_surface("mii").graph()
    assert dynkin.automorphism_count(g, True)[0] == 576
    assert dynkin.automorphism_count(g, False)[0] == 1152
