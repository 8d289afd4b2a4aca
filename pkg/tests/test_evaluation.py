import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hqml_explain.datasets import load_bundled, make_planted, prepare_data
from hqml_explain.evaluation import (ABLATION_CONFIGS, EvalResult, baseline_importances,
                                     classification_metrics, load_external_scores, recall_at_k,
                                     run_ablation, run_benchmark, run_explainer_comparison,
                                     spearman_rank_correlation)
from hqml_explain.hqml import train_classical
from hqml_explain.learners import LearnerKind
from hqml_explain.qmedley import ExplainerConfig, dci_scores

finite = st.floats(-1e3, 1e3, allow_nan=False)


def brute_spearman(a, b):
    """Ranks by counting (average for ties), then textbook Pearson."""
    def ranks(v):
        return np.array([np.sum(v < x) + (np.sum(v == x) + 1) / 2 for x in v])
    ra, rb = ranks(np.asarray(a, float)), ranks(np.asarray(b, float))
    return float(np.corrcoef(ra, rb)[0, 1])


def test_recall_examples():
    s = [0.9, 0.8, 0.7, 0.1, 0.0, 0.05]
    assert recall_at_k(s, s) == 1.0
    assert recall_at_k([5, 4, 3, 0, 0, 0], [5, 4, 0, 0, 0, 3]) == pytest.approx(2 / 3)
    assert recall_at_k([3, 2, 1, 0, 0, 0], [0, 0, 0, 3, 2, 1]) == 0.0
    with pytest.raises(ValueError):
        recall_at_k([1, 2], [2, 1], k=3)


def test_recall_ties_use_lowest_index():
    # candidate all equal: top-3 by index is {0,1,2}
    assert recall_at_k([1, 1, 1, 0, 0], [0, 0, 0, 0, 0]) == 1.0


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 10).flatmap(lambda d: st.tuples(
    arrays(float, d, elements=finite), arrays(float, d, elements=finite), st.permutations(range(d)))))
def test_recall_permutation_equivariant(args):
    a, b, perm = args
    perm = list(perm)
    # ties break by index, so only compare when no ties can reorder
    if len(set(a)) == len(a) and len(set(b)) == len(b):
        assert recall_at_k(a, b) == recall_at_k(a[perm], b[perm])


def test_spearman_examples():
    assert spearman_rank_correlation([1, 2, 3], [1, 2, 3]) == 1.0
    assert spearman_rank_correlation([1, 2, 3, 4], [4, 3, 2, 1]) == -1.0
    assert spearman_rank_correlation([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)
    assert brute_spearman([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)
    assert spearman_rank_correlation([1, 1, 1], [1, 2, 3]) == 0.0
    with pytest.raises(ValueError):
        spearman_rank_correlation([1], [1])


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 12).flatmap(lambda d: st.tuples(
    arrays(float, d, elements=finite), arrays(float, d, elements=finite))))
def test_spearman_matches_brute_force(pair):
    a, b = pair
    got = spearman_rank_correlation(a, b)
    if len(set(a)) > 1 and len(set(b)) > 1:
        assert got == pytest.approx(brute_spearman(a, b), abs=1e-12)
        assert spearman_rank_correlation(a, a) == pytest.approx(1.0)
        t = np.exp(a / 1e3)
        if len(set(t)) == len(set(a)):  # the transform must stay strictly increasing in floats
            assert spearman_rank_correlation(t, b) == pytest.approx(got, abs=1e-12)
    assert -1.0 <= got <= 1.0


def test_metrics_examples():
    assert classification_metrics([0, 1, 2], [0, 1, 2]) == {
        "accuracy": 1.0, "f1_macro": 1.0, "precision_macro": 1.0, "recall_macro": 1.0}
    m = classification_metrics([0, 0, 1, 1], [0, 0, 0, 0])
    assert m["accuracy"] == 0.5 and m["recall_macro"] == 0.5
    assert m["precision_macro"] == 0.25 and m["f1_macro"] == pytest.approx(1 / 3)
    assert classification_metrics([1, 1], [1, 1])["f1_macro"] == 1.0
    with pytest.raises(ValueError, match="empty"):
        classification_metrics([], [])


def test_metrics_invariant_to_label_renaming():
    rng = np.random.default_rng(0)
    y, p = rng.integers(0, 3, 50), rng.integers(0, 3, 50)
    names = np.array(["c", "a", "b"])
    assert classification_metrics(y, p) == classification_metrics(names[y], names[p])


@pytest.fixture(scope="module")
def dt_planted():
    d = prepare_data(make_planted(150, n_informative=1, n_noise=3, seed=2), seed=2)
    return train_classical(d.X_train, d.y_train, LearnerKind.DECISION_TREE), d


def test_baseline_dci_delegates(dt_planted):
    m, d = dt_planted
    cfg = ExplainerConfig(seed=1)
    np.testing.assert_array_equal(baseline_importances("DCI-only", d.X_test, d.y_test, m, cfg),
                                  dci_scores(m, d.X_test, d.y_test, cfg))


def test_baseline_pi_constant_columns_zero(dt_planted):
    m, d = dt_planted
    X = np.full_like(d.X_test, 1.0)
    np.testing.assert_array_equal(baseline_importances("PI-only", X, d.y_test, m), 0.0)


def test_logreg_l1_finds_single_predictor(dt_planted):
    _, d = dt_planted
    assert np.argmax(baseline_importances("LogRegL1", d.X_train, d.y_train)) == 0
    with pytest.raises(ValueError, match="unsupported"):
        baseline_importances("SHAP", d.X_train, d.y_train)


def test_external_scores(tmp_path):
    p = tmp_path / "shap.json"
    p.write_text(json.dumps({"feature_labels": ["b", "a"], "scores": [0.2, 0.7]}))
    np.testing.assert_array_equal(load_external_scores(p, ["a", "b"]), [0.7, 0.2])
    with pytest.raises(ValueError, match="missing"):
        load_external_scores(p, ["a", "c"])


def test_ablation_grid_shape_and_ranges():
    tables = {"p1": make_planted(80, 3, 1, seed=0), "p2": make_planted(80, 3, 1, "linear", seed=1)}
    r = run_ablation(tables, [0, 1], n_noise=1, n_redundant=0, repeats=2)
    assert len(r.records) == 2 * 2 * len(ABLATION_CONFIGS)
    for rec in r.records:
        assert 0 <= rec["recall_at_3"] <= 1 and -1 <= rec["spearman"] <= 1
        assert rec["n_seeds"] == 2 and rec["error"] == ""
    again = run_ablation(tables, [0, 1], n_noise=1, n_redundant=0, repeats=2)
    assert again.to_dict() == r.to_dict()
    assert len(r.to_csv().strip().splitlines()) == 1 + len(r.records)


def test_ablation_records_failures_per_cell():
    # 3 features total is fine, but Recall@3 on a 2-feature table fails per cell
    tiny = make_planted(40, 1, 1, seed=0)
    r = run_ablation({"tiny": tiny, "ok": make_planted(60, 3, 1, seed=1)}, [0],
                     n_noise=0, n_redundant=0, repeats=1)
    bad = [x for x in r.records if x["dataset"] == "tiny"]
    assert all(x["error"] and x["recall_at_3"] is None for x in bad)
    assert all(not x["error"] for x in r.records if x["dataset"] == "ok")
    assert len(r.failed) == len(bad)


def test_benchmark_schema():
    r = run_benchmark({"iris": load_bundled("iris")}, [LearnerKind.DECISION_TREE], [0, 1])
    per_seed = [x for x in r.records if x["seed"] != "mean"]
    assert len(per_seed) == 2 and len(r.records) == 3
    for rec in r.records:
        assert set(rec["classical"]) == set(rec["quxai"]) == {
            "accuracy", "f1_macro", "precision_macro", "recall_macro"}
    header = r.to_csv().splitlines()[0].split(",")
    assert "accuracy_classical" in header and "accuracy_quxai" in header


def test_benchmark_cap_failure_recorded():
    r = run_benchmark({"iris": load_bundled("iris")}, [LearnerKind.DECISION_TREE], [0],
                      max_qubits=4)
    assert all("qubit cap" in x["error"] or x["error"] == "all seeds failed" for x in r.records)


def test_comparison_explainers():
    r = run_explainer_comparison(load_bundled("iris"), [0], repeats=2, dataset_name="iris")
    names = {x["explainer"] for x in r.records}
    assert names == {"DCI", "PI (k=2)", "combined", "LogRegL1"}
    assert {x["model"] for x in r.records} == {"DT", "RF"}


def test_eval_result_excludes_runtime():
    r = EvalResult("ablation", [{"a": 1.5, "nested": {"x": 2}}], [0], {"k": 3}, runtime_s=9.9)
    assert "runtime" not in json.dumps(r.to_dict())
    assert r.csv_rows() == [{"a": 1.5, "x_nested": 2}]
