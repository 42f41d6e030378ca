"""Acceptance gate: one seeded battery per criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import time

import numpy as np
import pytest

from poissonkit import experiments as ex

SEED = 2026

CRITERIA = [
    (1, "classical recovery", 1.0, lambda rng: ex.check_classical()),
    (2, "moment oracle equivalence", 60.0, lambda rng: ex.check_moments(rng, 200)),
    (3, "characteristic functional", None,
     lambda rng: ex.check_characteristic(rng, 50) + ex.check_corner_multiplicativity(rng, 20)),
    (4, "bernoulli convergence", None, lambda rng: ex.check_bernoulli(rng, 20)),
    (5, "empty-basis gram", None, lambda rng: ex.check_gram(rng, 50)),
    (6, "fock layer", None, lambda rng: ex.check_fock(rng, 30, 30)),
    (7, "modular flow and kms", None, lambda rng: ex.check_kms(rng, 50)),
    (8, "type classification", None, lambda rng: ex.check_classify(rng, 20)),
    (9, "channels and independence", None,
     lambda rng: ex.check_channels(rng, 20) + ex.check_independence(rng, 20)),
    (10, "entropy", 120.0, lambda rng: ex.check_entropy(rng, 20, M=30)),
    (11, "growth bound", None, lambda rng: ex.check_growth(rng, 1000)),
]


def _worst(records):
    ratios = [r.residual / r.tolerance for r in records if r.tolerance > 0 and np.isfinite(r.residual)]
    return max(ratios, default=0.0)


@pytest.mark.parametrize("number,name,limit,battery", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, name, limit, battery, capsys):
    rng = np.random.default_rng(SEED + number)
    start = time.perf_counter()
    records = battery(rng)
    elapsed = time.perf_counter() - start
    failures = [r for r in records if not r.passed]
    slow = limit is not None and elapsed >= limit
    ok = records and not failures and not slow
    line = (
        f"ACCEPTANCE {number:2d} {'PASS' if ok else 'FAIL'} {name}: "
        f"{len(records) - len(failures)}/{len(records)} checks, worst residual/tol {_worst(records):.2e}, "
        f"{elapsed:.2f}s" + (f" (limit {limit:g}s)" if limit else "")
    )
    with capsys.disabled():
        print("\n" + line)
    assert records
    assert not failures, [(r.name, r.residual, r.tolerance) for r in failures[:5]]
    assert not slow, f"{elapsed:.2f}s exceeds {limit}s"
