import itertools

import numpy as np
import pytest

from hqml_explain.datasets import make_planted, prepare_data
from hqml_explain.hqml import predict_adapted, score_accuracy, train_classical, train_hqml
from hqml_explain.learners import LearnerKind
from hqml_explain.qmedley import (ExplainerConfig, ImportanceReport, aggregate_scores, dci_scores,
                                  explain, interaction_partners, interaction_pi_scores, pi_scores)
from oracles import expected_permuted_accuracy


@pytest.fixture(scope="module")
def qdt():
    d = prepare_data(make_planted(n_rows=120, n_informative=3, n_noise=3, seed=1), seed=1)
    m = train_hqml(d.X_train, d.y_train, LearnerKind.DECISION_TREE, "amplitude",
                   feature_labels=d.feature_labels)
    return m, d


def test_dci_constant_neutral_column_is_zero(qdt):
    m, d = qdt
    X = d.X_test.copy()
    X[:, 2] = 0.0
    assert dci_scores(m, X, d.y_test)[2] == 0.0


def test_dci_single_informative_feature():
    rng = np.random.default_rng(0)
    X = rng.uniform(0, np.pi, size=(200, 4))
    y = (X[:, 0] > np.pi / 2).astype(int)
    m = train_classical(X[:100], y[:100], LearnerKind.DECISION_TREE)
    Xr, yr = X[100:], y[100:]
    base = score_accuracy(m, Xr, yr)
    dci = dci_scores(m, Xr, yr)
    # neutral 0 sends every row to the low side of the split, i.e. class 0
    assert dci[0] == pytest.approx(base - np.mean(yr == 0), abs=1e-12)
    np.testing.assert_array_equal(dci[1:], 0.0)


def test_dci_unused_feature_is_zero(qdt):
    _, d = qdt
    m = train_classical(d.X_train, d.y_train, LearnerKind.DECISION_TREE)
    unused = sorted(set(range(d.n_features)) - m.learner.tree_.used_features())
    assert unused
    np.testing.assert_array_equal(dci_scores(m, d.X_test, d.y_test)[unused], 0.0)


def test_pi_constant_column_is_zero(qdt):
    m, d = qdt
    X = d.X_test.copy()
    X[:, 4] = 1.3
    assert pi_scores(m, X, d.y_test)[4] == 0.0


def test_pi_exhaustive_matches_closed_form(qdt):
    m, d = qdt
    X, y = d.X_test[:5], d.y_test[:5]
    perms = list(itertools.permutations(range(5)))
    exhaustive = pi_scores(m, X, y, permutations=perms)
    base = score_accuracy(m, X, y)
    closed = [base - expected_permuted_accuracy(lambda Z: predict_adapted(m, Z), X, y, j)
              for j in range(X.shape[1])]
    np.testing.assert_allclose(exhaustive, closed, rtol=0, atol=1e-12)


@pytest.mark.slow
def test_pi_converges_to_exhaustive_with_many_repeats(qdt):
    m, d = qdt
    X, y = d.X_test[:5], d.y_test[:5]
    exhaustive = pi_scores(m, X, y, permutations=list(itertools.permutations(range(5))))
    errors = [np.abs(pi_scores(m, X, y, ExplainerConfig(repeats_K=k, seed=3)) - exhaustive).max()
              for k in (10, 2000)]
    assert errors[1] <= 0.02
    assert errors[1] < errors[0]


def test_pi_deterministic_and_thread_independent(qdt):
    m, d = qdt
    a = pi_scores(m, d.X_test, d.y_test, ExplainerConfig(seed=5))
    b = pi_scores(m, d.X_test, d.y_test, ExplainerConfig(seed=5))
    c = pi_scores(m, d.X_test, d.y_test, ExplainerConfig(seed=5, threads=4))
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a, c)
    assert not np.array_equal(a, pi_scores(m, d.X_test, d.y_test, ExplainerConfig(seed=6)))


def test_shape_errors(qdt):
    m, d = qdt
    with pytest.raises(ValueError, match="columns"):
        dci_scores(m, d.X_test[:, :3], d.y_test)
    with pytest.raises(ValueError, match="row counts"):
        pi_scores(m, d.X_test, d.y_test[:-1])


def test_interaction_partners_by_correlation():
    rng = np.random.default_rng(0)
    a = rng.normal(size=50)
    X = np.column_stack([a, rng.normal(size=50), a + 0.01 * rng.normal(size=50),
                         rng.normal(size=50)])
    assert interaction_partners(X, 1)[0] == [2]
    assert interaction_partners(X, 1)[2] == [0]
    # a constant column has no correlation with anything; ties go to the lowest index
    Xc = np.column_stack([np.ones(10), np.arange(10.0), np.arange(10.0) ** 2])
    assert interaction_partners(Xc, 1)[0] == [1]


def test_interaction_independent_noise_close_to_pi():
    diffs = []
    for s in range(10):
        rng = np.random.default_rng(s)
        X = rng.uniform(0, np.pi, size=(80, 4))
        y = (X[:, 0] > np.pi / 2).astype(int)
        m = train_classical(X[:40], y[:40], LearnerKind.DECISION_TREE, hp={"max_depth": 1})
        cfg = ExplainerConfig(interaction_pi=True, seed=s)
        pi = pi_scores(m, X[40:], y[40:], cfg)
        diffs.append(interaction_pi_scores(m, X[40:], y[40:], cfg, pi=pi) - pi)
    assert np.abs(np.mean(diffs, axis=0)).max() <= 0.05


def test_interaction_xor_pair_gains_synergy():
    rng = np.random.default_rng(4)
    X = rng.uniform(0, np.pi, size=(400, 3))
    y = ((X[:, 0] > np.pi / 2) ^ (X[:, 1] > np.pi / 2)).astype(int)
    m = train_classical(X[:200], y[:200], LearnerKind.DECISION_TREE)
    cfg = ExplainerConfig(interaction_pi=True, interaction_partners_m=2, repeats_K=10)
    pi = pi_scores(m, X[200:], y[200:], cfg)
    ipi = interaction_pi_scores(m, X[200:], y[200:], cfg, pi=pi)
    assert ipi[0] > pi[0]
    assert (ipi >= pi).all()


def test_interaction_errors(qdt):
    m, d = qdt
    with pytest.raises(ValueError, match="exceeds"):
        interaction_pi_scores(m, d.X_test, d.y_test, ExplainerConfig(interaction_partners_m=6))
    single = train_classical(d.X_train[:, :1], d.y_train, LearnerKind.DECISION_TREE)
    with pytest.raises(ValueError, match="at least 2"):
        interaction_pi_scores(single, d.X_test[:, :1], d.y_test)


def test_aggregate_examples():
    final, w = aggregate_scores([0.2], [0.4])
    assert final[0] == pytest.approx(0.3) and w == (0.5, 0.5)
    adaptive = ExplainerConfig(adaptive_weighting=True)
    final, w = aggregate_scores([0.1, 0.3, 0.5], [0.2, 0.2, 0.2], adaptive)
    assert w == (1.0, 0.0)
    np.testing.assert_array_equal(final, [0.1, 0.3, 0.5])
    final, w = aggregate_scores([0, 0], [0, 0], adaptive)
    assert w == (0.5, 0.5) and not final.any()
    with pytest.raises(ValueError, match="length mismatch"):
        aggregate_scores([0.1], [0.1, 0.2])


def test_adaptive_weights_follow_dispersion():
    dci, pi = np.array([0.0, 0.3]), np.array([0.0, 0.1])
    final, (wd, wp) = aggregate_scores(dci, pi, ExplainerConfig(adaptive_weighting=True))
    assert wd == pytest.approx(0.75) and wp == pytest.approx(0.25)
    np.testing.assert_allclose(final, [0.0, 0.25])


@pytest.mark.parametrize("adaptive, interaction", [(False, False), (True, True)])
def test_explain_equals_manual_composition(qdt, adaptive, interaction):
    m, d = qdt
    cfg = ExplainerConfig(adaptive_weighting=adaptive, interaction_pi=interaction, seed=2)
    r = explain(m, d.X_test, d.y_test, cfg)
    assert r.baseline_accuracy == score_accuracy(m, d.X_test, d.y_test)
    np.testing.assert_array_equal(r.dci, dci_scores(m, d.X_test, d.y_test, cfg))
    np.testing.assert_array_equal(r.pi, pi_scores(m, d.X_test, d.y_test, cfg))
    second = interaction_pi_scores(m, d.X_test, d.y_test, cfg) if interaction else r.pi
    final, w = aggregate_scores(r.dci, second, cfg)
    np.testing.assert_array_equal(r.final, final)
    assert r.weights == w
    assert np.abs(r.recompute_final() - r.final).max() <= 1e-12
    assert r.feature_labels == d.feature_labels


def test_explain_all_constant_columns_gives_zero(qdt):
    m, d = qdt
    X = np.full_like(d.X_test, 0.7)
    np.testing.assert_array_equal(explain(m, X, d.y_test).final, 0.0)


def test_explain_never_recomputes_training_kernel(qdt, monkeypatch):
    _, d = qdt
    m = train_hqml(d.X_train, d.y_train, LearnerKind.KNN_PRECOMPUTED, "kernel")
    k_ref = m.k_ref.copy()
    from hqml_explain import hqml
    real = hqml.kernel_matrix
    shapes = []
    monkeypatch.setattr(hqml, "kernel_matrix",
                        lambda A, B, *a: shapes.append((A.shape, B is m.x_ref_train)) or real(A, B, *a))
    explain(m, d.X_test, d.y_test, ExplainerConfig(repeats_K=2))
    assert shapes and all(s == (d.X_test.shape, True) for s in shapes)
    np.testing.assert_array_equal(m.k_ref, k_ref)


def test_report_round_trip(qdt):
    m, d = qdt
    r = explain(m, d.X_test, d.y_test, ExplainerConfig(threads=3))
    r.extra["seed"] = 0
    d2 = r.to_dict()
    assert "threads" not in d2["config"]
    back = ImportanceReport.from_dict(d2)
    assert back.to_dict() == d2


def test_config_validation():
    with pytest.raises(ValueError):
        ExplainerConfig(repeats_K=0)
    with pytest.raises(ValueError):
        ExplainerConfig(threads=0)
