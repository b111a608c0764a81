"""Acceptance suite.

Each test runs one end-to-end criterion at its fixed tolerance, on the
same code path and default seed as ``clik verify --level full``, and
prints one pass/fail line per criterion.

Known failure: ``test_criterion_03`` includes the strict claim that the
known-variance pairwise ratio exceeds 1 on the whole strip
rho in (-0.49, -0.01).  The exact closed forms (confirmed by
quadratic-form moments and by simulation) put the crossing near
rho = -0.318, with the ratio slightly below 1 between there and 0, so
that assertion fails by construction.  It is retained, unweakened, as an
honest negative result; the other two parts of the criterion hold.
"""

import time

import pytest

import clik.verify as verify_mod

BASE_SEED = 20260810


def _seed_for(fn):
    return BASE_SEED + 100 * verify_mod.ALL_CHECKS.index(fn)


def _run(fn, **kwargs):
    return fn(level="full", seed=_seed_for(fn), **kwargs)


def _report(criterion, results):
    ok = all(r.passed for r in results)
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}")
    for r in results:
        mark = "ok  " if r.passed else "FAIL"
        print(f"    {mark} {r.check_id}: value={r.value:.6g} "
              f"threshold={r.threshold:.6g}")
    assert ok, "; ".join(f"{r.check_id} value={r.value:.6g} "
                         f"threshold={r.threshold:.6g}"
                         for r in results if not r.passed)


@pytest.fixture(scope="module")
def pairwise_variance_results():
    started = time.monotonic()
    results = _run(verify_mod.check_pairwise_variance_formulas)
    return results, time.monotonic() - started


def test_criterion_01_pairwise_variance_free_sigma(pairwise_variance_results):
    results, elapsed = pairwise_variance_results
    assert elapsed < 120.0, f"criterion 1 runtime budget exceeded: {elapsed:.1f}s"
    _report("1: n*var of the free-variance pairwise estimator vs closed form",
            [r for r in results if "sigma-free" in r.check_id])


def test_criterion_02_pairwise_variance_known_sigma(pairwise_variance_results):
    results, _ = pairwise_variance_results
    _report("2: n*var of the known-variance pairwise estimator vs closed form",
            [r for r in results if "sigma-known" in r.check_id])


def test_criterion_03_pairwise_ratio_sign_structure():
    started = time.monotonic()
    results = _run(verify_mod.check_pairwise_ratio_curve)
    elapsed = time.monotonic() - started
    assert elapsed < 1.0, f"criterion 3 runtime budget exceeded: {elapsed:.2f}s"
    _report("3: ratio curve sign structure and divergence", results)


def test_criterion_04_full_conditional_ratio_below_one():
    started = time.monotonic()
    results = _run(verify_mod.check_full_conditional_ratio)
    elapsed = time.monotonic() - started
    assert elapsed < 300.0, f"criterion 4 runtime budget exceeded: {elapsed:.1f}s"
    _report("4: full-conditional ratio below 1", results)


def test_criterion_05_two_block_thresholds_and_variance():
    _report("5: two-block thresholds and simulated variance",
            _run(verify_mod.check_two_block))


def test_criterion_06_multinomial_information():
    _report("6: multinomial efficiency identities, ordering, and Monte Carlo",
            _run(verify_mod.check_multinomial))


def test_criterion_07_score_recovery():
    _report("7: full score recovered from the pairwise score",
            _run(verify_mod.check_score_recovery))


def test_criterion_08_chain_information_unbiasedness():
    _report("8: chain specs information-unbiased with orthogonal components",
            _run(verify_mod.check_chain_unbiasedness))


def test_criterion_09_projection():
    _report("9: projection recovers the full score and restores the "
            "Bartlett identity", _run(verify_mod.check_projection))


def test_criterion_10_estimator_covariance():
    _report("10: simulated estimator covariance vs closed form",
            _run(verify_mod.check_estimator_covariance))


def test_criterion_11_sandwich_dominance():
    _report("11: full-likelihood information dominates every spec",
            _run(verify_mod.check_sandwich_dominance))
