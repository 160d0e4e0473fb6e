import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from fgcompress import tokenize
from fgcompress.evaluation import (
    LabeledTable,
    SingularSystem,
    TooFewPairs,
    TooFewRows,
    benjamini_hochberg,
    bh_adjust,
    derive_seeds,
    loo_errors,
    loocv_alpha,
    ridge_fit,
    run_benchmark,
    split,
    splitmix64,
    unigram_baseline,
    wilcoxon_signed_rank,
)


def augmented_ridge(X, y, alpha):
    """Ridge with free intercept as one stacked least-squares problem."""
    n, p = X.shape
    A = np.vstack([np.hstack([np.ones((n, 1)), X]), np.sqrt(alpha) * np.hstack([np.zeros((p, 1)), np.eye(p)])])
    sol = np.linalg.lstsq(A, np.concatenate([y, np.zeros(p)]), rcond=None)[0]
    return sol[1:], sol[0]


def table(n, p=3, seed=0):
    rng = np.random.default_rng(seed)
    return LabeledTable(rng.normal(size=(n, p)), rng.normal(size=n))


def test_split_sizes_and_partition():
    t = table(100)
    train, test = split(t, 0.75, seed=4)
    assert (len(train), len(test)) == (75, 25)
    assert sorted(train.ids + test.ids, key=int) == t.ids
    assert not set(train.ids) & set(test.ids)


def test_split_deterministic():
    t = table(30)
    a, b = split(t, seed=8), split(t, seed=8)
    assert a[0].ids == b[0].ids
    assert split(t, seed=9)[0].ids != a[0].ids


def test_split_rounds_train_size():
    assert len(split(table(10))[0]) == 8  # 7.5 rounds up
    assert len(split(table(9))[0]) == 7  # 6.75


def test_split_needs_eight_rows():
    with pytest.raises(TooFewRows):
        split(table(7))


def test_table_validation():
    with pytest.raises(ValueError):
        LabeledTable(np.ones((3, 2)), np.ones(4))
    with pytest.raises(ValueError):
        LabeledTable(np.array([[np.nan]]), np.ones(1))


def test_deduplicated_keeps_first():
    t = LabeledTable(np.arange(6.0).reshape(3, 2), [1.0, 2.0, 3.0], ["a", "b", "a"])
    d = t.deduplicated()
    assert d.ids == ["a", "b"] and d.target.tolist() == [1.0, 2.0]


def test_ridge_interpolates_at_zero_alpha():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(6, 5))
    y = rng.normal(size=6)
    fit = ridge_fit(X, y, 0.0)
    assert np.allclose(fit.predict(X), y, atol=1e-9)


def test_ridge_huge_alpha_predicts_mean():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(20, 4))
    y = rng.normal(size=20)
    fit = ridge_fit(X, y, 1e12)
    assert np.linalg.norm(fit.coef) < 1e-6
    assert np.allclose(fit.predict(X), y.mean(), atol=1e-6)


def test_ridge_matches_independent_solver():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(20, 10))
    y = rng.normal(size=20)
    fit = ridge_fit(X, y, 0.1)
    coef, b = augmented_ridge(X, y, 0.1)
    assert np.allclose(fit.coef, coef, atol=1e-8) and abs(fit.intercept - b) < 1e-8


def test_ridge_singular_only_without_penalty():
    X = np.ones((5, 2))
    with pytest.raises(SingularSystem):
        ridge_fit(X, np.arange(5.0), 0.0)
    ridge_fit(X, np.arange(5.0), 0.01)


def test_ridge_intercept_absorbs_shift():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(15, 3))
    y = rng.normal(size=15)
    a = ridge_fit(X, y, 0.5).predict(X)
    b = ridge_fit(X, y + 7.0, 0.5).predict(X)
    assert np.allclose(b - a, 7.0, atol=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_closed_form_loo_equals_refit(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(15, 5))
    y = X @ rng.normal(size=5) + rng.normal(size=15)
    for alpha in (0.001, 0.01, 0.1, 1.0):
        closed = float(np.mean(loo_errors(X, y, alpha) ** 2))
        assert closed == pytest.approx(oracles.explicit_loo_mse(X, y, alpha), abs=1e-8)


def test_loocv_tie_goes_to_smallest_alpha():
    # constant features: every alpha gives the same (mean-only) predictions
    X = np.zeros((8, 2))
    y = np.array([1.0, -1.0, 2.0, -2.0, 1.0, -1.0, 2.0, -2.0])
    assert loocv_alpha(X, y) == 0.001
    assert loocv_alpha(X, y, [1.0, 0.01]) == 0.01


def test_loocv_prefers_small_alpha_on_clean_target():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(30, 4))
    y = X[:, 0] + 1e-4 * rng.normal(size=30)
    errs = {a: oracles.explicit_loo_mse(X, y, a) for a in (0.001, 0.01, 0.1, 1.0)}
    assert min(errs, key=errs.get) == 0.001
    assert loocv_alpha(X, y) == 0.001


def test_benchmark_realizable_target():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(60, 3))
    t = LabeledTable(X, X @ np.array([1.0, -2.0, 0.5]) + 3.0)
    rep = run_benchmark(t, alphas=[0.0])
    assert rep.mean_mse < 1e-10
    assert rep.repeats == 5 and rep.alphas == [0.0] * 5


def test_benchmark_constant_target():
    rep = run_benchmark(LabeledTable(np.random.default_rng(8).normal(size=(40, 3)), np.full(40, 2.5)))
    assert rep.mean_mse < 1e-20


def test_benchmark_reproducible_and_stderr():
    t = table(50, seed=9)
    a, b = run_benchmark(t, seed=3), run_benchmark(t, seed=3)
    assert a.to_dict() == b.to_dict()
    assert a.stderr == pytest.approx(np.std(a.per_repeat, ddof=1) / np.sqrt(5))
    assert a.seeds == derive_seeds(3, 5)


def test_splitmix_reference_value():
    # first output of the reference generator seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert len(set(derive_seeds(0, 100))) == 100


def test_wilcoxon_degenerate():
    with pytest.raises(TooFewPairs):
        wilcoxon_signed_rank([1.0] * 10, [1.0] * 10)
    with pytest.raises(TooFewPairs):
        wilcoxon_signed_rank([1, 2, 3, 4, 5], [0, 0, 0, 0, 0])


def test_wilcoxon_dominating():
    a = np.arange(10) + 100.0
    assert wilcoxon_signed_rank(a, np.zeros(10)) == pytest.approx(2 / 1024, abs=1e-15)


def test_wilcoxon_hand_case_n8():
    a = [1.2, 3.4, 0.5, 2.2, 1.9, 0.7, 2.8, 1.1]
    b = [1.0, 3.0, 0.9, 1.5, 2.0, 0.1, 2.0, 1.1 + 0.35]
    assert wilcoxon_signed_rank(a, b) == pytest.approx(oracles.wilcoxon_by_enumeration(a, b), abs=1e-12)


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=6, max_size=12))
def test_wilcoxon_matches_enumeration_with_ties(pairs):
    a = [x for x, _ in pairs]
    b = [y for _, y in pairs]
    if sum(x != y for x, y in pairs) < 6:
        return
    p = wilcoxon_signed_rank(a, b)
    assert 0 < p <= 1
    assert p == pytest.approx(oracles.wilcoxon_by_enumeration(a, b), abs=1e-12)
    assert wilcoxon_signed_rank(b, a) == pytest.approx(p, abs=1e-12)


def test_wilcoxon_normal_branch_matches_scipy():
    from scipy.stats import wilcoxon

    rng = np.random.default_rng(10)
    a = np.round(rng.normal(size=40), 1)
    b = np.round(a - 0.2 + 0.3 * rng.normal(size=40), 1)
    ref = wilcoxon(a, b, zero_method="wilcox", correction=False, method="approx").pvalue
    assert wilcoxon_signed_rank(a, b) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize(
    "p, q, expected",
    [
        ([0.01, 0.02, 0.03, 0.04], 0.05, [True] * 4),
        ([1.0, 1.0, 1.0], 0.05, [False] * 3),
        ([0.04], 0.05, [True]),
        ([0.001, 0.5, 0.02, 0.03], 0.05, [True, False, True, True]),
        ([0.2, 0.01, 0.04], 0.05, [False, True, False]),
    ],
)
def test_bh(p, q, expected):
    assert benjamini_hochberg(p, q).tolist() == expected
    assert expected == oracles.bh_direct(p, q)
    assert ((bh_adjust(p) <= q) == np.array(expected)).all()


@given(st.lists(st.floats(0, 1), min_size=1, max_size=20), st.floats(0.001, 0.5), st.floats(0.001, 0.5))
def test_bh_monotone_in_q(p, q1, q2):
    lo, hi = sorted((q1, q2))
    small, big = benjamini_hochberg(p, lo), benjamini_hochberg(p, hi)
    assert not (small & ~big).any()
    assert benjamini_hochberg(p, hi).tolist() == oracles.bh_direct(p, hi)


def test_bh_rejects_bad_p():
    with pytest.raises(ValueError):
        benjamini_hochberg([0.5, 1.5])


def test_unigram_baseline():
    X, cols = unigram_baseline(["CCO", "c1ccccc1Cl"])
    assert cols == ["C", "O", "c", "1", "Cl"]
    assert X.tolist() == [[2, 1, 0, 0, 0], [0, 0, 6, 2, 1]]


def test_unigram_equals_naive_counts():
    rng = random.Random(1)
    mols = oracles.random_corpus(rng, 30, 20)
    X, cols = unigram_baseline(mols)
    for row, m in zip(X, mols):
        syms = tokenize(m).texts
        assert row.tolist() == [syms.count(c) for c in cols]
