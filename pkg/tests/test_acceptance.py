"""Acceptance gate: every criterion behind `vaxfront verify-paper` must pass.

The criteria re-derive the quantitative claims (counterexample spectra, the
cycle graph numbers, the convexity theorem certificates, the Sylvester and
invariance suites, reducible-kernel laws, configuration kernels, the MWIS
oracle, grid discretization stability and the optimal ray) at their pinned
tolerances and wall-clock budgets.
"""

import pytest

from vaxfront.acceptance import CRITERIA, run_criteria

SLUGS = [slug for slug, _, _ in CRITERIA]


@pytest.fixture(scope="module")
def results():
    outcome = {result.slug: result for result in run_criteria()}
    for result in outcome.values():
        marker = "PASS" if result.passed else "FAIL"
        print(f"{marker} {result.slug} ({result.seconds:.2f}s/{result.budget}s)")
    return outcome


@pytest.mark.parametrize("slug", SLUGS)
def test_criterion(results, slug):
    result = results[slug]
    assert result.passed, f"{slug}: {result.detail} ({result.seconds:.1f}s)"


def test_all_criteria_present(results):
    assert len(results) == 12
