"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines alongside pytest's own status output. Tolerances are pinned here and
nowhere else.
"""

import time

import numpy as np
import pytest

from conftest import make_archive, random_archive, random_unit_words
from oracles import kendall_tau_b_naive, max_transport_value, transportation_vertices
from twmd.analysis import kendall, pearson, spearman
from twmd.centering import (
    center_corpus,
    center_dimension,
    center_sentence,
    normalize_words,
)
from twmd.metrics import (
    METRIC_NAMES,
    MetricConfig,
    bertscore_recall_c,
    f1_combine,
    moverscore_c,
    score,
    trwmd_c,
    twmd_c,
)
from twmd.transport import (
    exact_wmd,
    plan_objective,
    sinkhorn,
    sinkhorn_converged,
)


def _announce(name):
    print(f"\nACCEPTANCE PASS: {name}")


def test_exact_transport_matches_vertex_enumeration():
    """200 seeded instances, L1,L2 in [1,4]: simplex == enumeration, <10s."""
    start = time.perf_counter()
    for m in range(1, 5):
        for n in range(1, 5):
            transportation_vertices(m, n)  # warm the oracle cache
    rng = np.random.default_rng(90210)
    worst = 0.0
    for _ in range(200):
        m, n = rng.integers(1, 5, size=2)
        sims = rng.normal(size=(m, n))
        value, plan = exact_wmd(sims)
        worst = max(worst, abs(value - max_transport_value(sims)))
        row, col = plan.marginal_violation()
        assert max(row, col) <= 1e-9
    elapsed = time.perf_counter() - start
    assert worst <= 1e-9, f"worst oracle gap {worst}"
    assert elapsed < 10.0, f"runtime {elapsed:.1f}s exceeds 10s budget"
    _announce(
        f"exact transport vs vertex enumeration (gap {worst:.2e}, {elapsed:.1f}s)"
    )


def test_tempered_limits():
    """(a) trwmd(T=1e-6) ~ best-match recall; (b) cold twmd ~ exact LP; <60s."""
    start = time.perf_counter()
    rng = np.random.default_rng(417)
    worst_a = 0.0
    for _ in range(200):
        length1, length2 = rng.integers(1, 13, size=2)
        x1 = random_unit_words(rng, length1, 16)
        x2 = random_unit_words(rng, length2, 16)
        worst_a = max(
            worst_a, abs(trwmd_c(x1, x2, 1e-6) - bertscore_recall_c(x1, x2))
        )
    assert worst_a <= 1e-4, f"trwmd cold-limit gap {worst_a}"

    worst_b = 0.0
    for _ in range(100):
        length1, length2 = rng.integers(1, 9, size=2)
        x1 = random_unit_words(rng, length1, 16)
        x2 = random_unit_words(rng, length2, 16)
        sims = x1 @ x2.T
        result = sinkhorn_converged(sims, 1e-3, tol=1e-9, max_iters=10_000)
        value = plan_objective(result.plan, sims)
        worst_b = max(worst_b, abs(value - moverscore_c(x1, x2)))
    elapsed = time.perf_counter() - start
    assert worst_b <= 1e-3, f"twmd cold-limit gap {worst_b}"
    assert elapsed < 60.0, f"runtime {elapsed:.1f}s exceeds 60s budget"
    _announce(
        f"tempered limits (trwmd gap {worst_a:.2e}, twmd gap {worst_b:.2e}, "
        f"{elapsed:.1f}s)"
    )


def test_trwmd_spot_value():
    """Similarity row (1, 0) at T=1 gives log(e + 1)."""
    x1 = np.array([[1.0, 0.0]])
    x2 = np.array([[1.0, 0.0], [0.0, 1.0]])
    value = trwmd_c(x1, x2, 1.0)
    assert value == pytest.approx(1.313262, abs=1e-6)
    assert value == pytest.approx(np.log(np.e + 1.0), abs=1e-12)
    _announce(f"closed-form spot value log(e+1) = {value:.6f}")


def test_feasibility_and_symmetry():
    """Converged plans feasible to 1e-6; converged objective symmetric to
    1e-8; a single scaling iteration is measurably asymmetric."""
    for seed in range(10):
        sims = np.random.default_rng(seed).normal(size=(6, 6))
        result = sinkhorn_converged(sims, 0.2, tol=1e-6, max_iters=100_000)
        assert result.converged
        row, col = result.plan.marginal_violation()
        assert max(row, col) <= 1e-6

    for seed in (5, 9, 13):
        sims = np.random.default_rng(seed).normal(size=(6, 5))
        fwd = sinkhorn_converged(sims, 0.2, tol=1e-12, max_iters=200_000)
        bwd = sinkhorn_converged(sims.T, 0.2, tol=1e-12, max_iters=200_000)
        gap = abs(plan_objective(fwd.plan, sims) - plan_objective(bwd.plan, sims.T))
        assert gap <= 1e-8, f"converged asymmetry {gap} at seed {seed}"

    asymmetries = []
    for seed in range(10):
        sims = np.random.default_rng(seed).normal(size=(6, 5))
        one_fwd = plan_objective(sinkhorn(sims, 0.02, 1), sims)
        one_bwd = plan_objective(sinkhorn(sims.T, 0.02, 1), sims.T)
        asymmetries.append(abs(one_fwd - one_bwd))
    assert max(asymmetries) > 1e-4, "single-iteration plans were all symmetric"
    _announce(
        f"feasibility and symmetry (max 1-iter asymmetry {max(asymmetries):.2e})"
    )


def test_metric_family_sanity():
    """Self-similarity 1 for every metric; exact F1 and duality identities."""
    rng = np.random.default_rng(31337)
    archive = random_archive(
        rng, n_sentences=100, dim=12, max_len=6, normalized=True
    )
    for idx in range(100):
        for metric in METRIC_NAMES:
            value = score(archive, idx, idx, MetricConfig(metric)).value
            assert value == pytest.approx(1.0, abs=1e-6), (metric, idx)

    for hyp, ref in [(0, 1), (17, 42), (63, 8)]:
        for base, prec, f1 in [
            ("bertscore_recall", "bertscore_precision", "bertscore_f1"),
            ("twmd", "twmd_precision", "twmd_f1"),
            ("trwmd", "trwmd_precision", "trwmd_f1"),
        ]:
            kwargs = {} if base.startswith("bertscore") else {"temperature": 0.05}
            r = score(archive, hyp, ref, MetricConfig(base, **kwargs)).value
            p = score(archive, hyp, ref, MetricConfig(prec, **kwargs)).value
            r_swapped = score(archive, ref, hyp, MetricConfig(base, **kwargs)).value
            f = score(archive, hyp, ref, MetricConfig(f1, **kwargs)).value
            assert p == r_swapped, f"{prec} != swapped {base}"
            assert f == f1_combine(p, r), f"{f1} is not the exact harmonic mean"
    _announce("metric family sanity (self-sim, F1, precision/recall duality)")


def test_centering_invariants():
    rng = np.random.default_rng(2718)
    for trial in range(5):
        archive = random_archive(
            rng, n_sentences=rng.integers(3, 12), dim=16, max_len=7
        )
        for center in (center_dimension, center_sentence, center_corpus):
            once = center(archive)
            twice = center(once)
            for a, b in zip(once.sentences, twice.sentences):
                np.testing.assert_allclose(a.vectors, b.vectors, atol=1e-6)

        sent = center_sentence(archive)
        for sentence in sent.sentences:
            pooled = sentence.vectors.astype(np.float64).mean(axis=0)
            np.testing.assert_allclose(pooled, 0.0, atol=1e-6)

        corp = center_corpus(archive)
        grand = corp.word_matrix().astype(np.float64).mean(axis=0)
        assert np.abs(grand).max() <= 1e-5
    _announce("centering invariants (idempotent, zero pools, zero grand mean)")


def test_correlation_statistics():
    """Hand-computed coefficients, then the O(n^2) counting oracle."""
    assert pearson([1, 2, 3], [2, 4, 7]) == pytest.approx(
        0.9933992677987828, abs=1e-9
    )
    assert pearson([1.0, 2.0, 5.0], [1.0, 2.0, 5.0]) == pytest.approx(1.0, abs=1e-9)
    assert pearson([1.0, 2.0, 5.0], [-1.0, -2.0, -5.0]) == pytest.approx(
        -1.0, abs=1e-9
    )
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-9)
    assert spearman([1, 2, 3], [10, 100, 1000]) == pytest.approx(1.0, abs=1e-9)
    assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-9)
    assert kendall([1, 2, 3], [1, 3, 2]) == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert kendall([1, 2, 3], [4, 5, 6]) == pytest.approx(1.0, abs=1e-9)
    assert kendall([1, 2, 3], [6, 5, 4]) == pytest.approx(-1.0, abs=1e-9)

    rng = np.random.default_rng(5150)
    for n in (2, 3, 10, 50, 200):
        x = rng.integers(0, max(2, n // 3), size=n).astype(float)
        y = x * rng.choice([-1.0, 1.0]) + rng.normal(scale=1.5, size=n)
        expected = kendall_tau_b_naive(x, y)
        if np.isnan(expected):
            continue
        assert kendall(x, y) == pytest.approx(expected, abs=1e-12)
    _announce("correlation statistics (hand values exact, tau-b oracle match)")
