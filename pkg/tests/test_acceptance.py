"""Acceptance suite: one test per verification criterion, in order, each
printing its PASS/FAIL line with the measured values.  Criteria share one
context so the expensive chains are built once (inside the budget of the
criterion that first needs them).

Run with ``pytest tests/test_acceptance.py -s`` to see every line, or
``semijulia verify`` for the same checks outside pytest.
"""
import pytest

from semijulia.verify import CRITERION_NAMES, VerificationContext, run_criterion


@pytest.fixture(scope="module")
def ctx():
    return VerificationContext()


def _run(name: str, ctx: VerificationContext) -> None:
    result = run_criterion(name, ctx)
    print()
    print(result.line())
    assert result.passed, result.line()


def test_criterion_01_preimage_roundtrip(ctx):
    _run("preimage-roundtrip", ctx)


def test_criterion_02_branch_distribution(ctx):
    _run("branch-distribution", ctx)


def test_criterion_03_circle_measure(ctx):
    _run("circle-measure", ctx)


def test_criterion_04_arcsine_measure(ctx):
    _run("arcsine-measure", ctx)


def test_criterion_05_full_vs_random_tv(ctx):
    _run("full-vs-random-tv", ctx)


def test_criterion_06_transfer_invariance(ctx):
    _run("transfer-invariance", ctx)


def test_criterion_07_circle_decay(ctx):
    _run("circle-decay", ctx)


def test_criterion_08_circle_coverage(ctx):
    _run("circle-coverage", ctx)


def test_criterion_09_determinism(ctx):
    _run("determinism", ctx)


def test_criterion_10_markov_transitions(ctx):
    _run("markov-transitions", ctx)


def test_every_criterion_is_covered():
    covered = {
        "preimage-roundtrip",
        "branch-distribution",
        "circle-measure",
        "arcsine-measure",
        "full-vs-random-tv",
        "transfer-invariance",
        "circle-decay",
        "circle-coverage",
        "determinism",
        "markov-transitions",
    }
    assert covered == set(CRITERION_NAMES)
