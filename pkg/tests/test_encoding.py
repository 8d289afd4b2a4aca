import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hqml_explain.encoding import (FeatureMapSpec, QubitCapError, QubitProbPair, amplitude_features,
                                   amplitude_matrix, distance_matrix, fidelity_kernel,
                                   kernel_distance, kernel_matrix)
from oracles import rx_statevector, statevector_fidelity

angles = st.floats(min_value=0.0, max_value=math.pi, allow_nan=False)


def spec(d, **kw):
    return FeatureMapSpec(n_qubits=d, **kw)


@pytest.mark.parametrize("x, expected", [
    ([0.0, 0.0], [1, 0, 0, 0]),
    ([math.pi], [0, 1]),
    ([math.pi / 2, math.pi / 2], [0.25, 0.25, 0.25, 0.25]),
])
def test_amplitude_examples(x, expected):
    np.testing.assert_allclose(amplitude_features(x, spec(len(x))), expected, atol=1e-15)


def test_qubit0_is_most_significant_bit():
    # qubit 0 flipped to |1>, qubit 1 left in |0>: basis state |10> = index 2
    probs = amplitude_features([math.pi, 0.0], spec(2))
    np.testing.assert_allclose(probs, [0, 0, 1, 0], atol=1e-15)


def test_amplitudes_match_statevector_probabilities():
    rng = np.random.default_rng(3)
    for d in (1, 2, 3, 5):
        x = rng.uniform(0, math.pi, d)
        np.testing.assert_allclose(amplitude_features(x, spec(d)),
                                   np.abs(rx_statevector(x)) ** 2, atol=1e-14)


def test_amplitude_errors():
    with pytest.raises(ValueError, match="expected 2 features"):
        amplitude_features([0.1, 0.2, 0.3], spec(2))
    with pytest.raises(QubitCapError, match="qubit cap of 3"):
        amplitude_features(np.zeros(4), spec(4, max_amplitude_qubits=3))
    with pytest.raises(ValueError, match="non-finite"):
        amplitude_features([0.1, np.nan], spec(2))


def test_feature_map_spec_validation():
    with pytest.raises(ValueError):
        FeatureMapSpec(n_qubits=0)
    with pytest.raises(ValueError):
        FeatureMapSpec(n_qubits=2, rotation="RY")
    assert FeatureMapSpec.from_dict(spec(3).to_dict()) == spec(3)


def test_qubit_prob_pair():
    pair = QubitProbPair.from_angle(1.234)
    assert abs(pair.p0 + pair.p1 - 1) <= 1e-12
    with pytest.raises(ValueError):
        QubitProbPair(0.5, 0.6)


@settings(max_examples=200, deadline=None)
@given(arrays(float, st.integers(1, 10), elements=angles))
def test_amplitudes_normalised(x):
    assert abs(amplitude_features(x, spec(len(x))).sum() - 1.0) <= 1e-9


def test_fidelity_examples():
    assert fidelity_kernel([0.4, 2.2], [0.4, 2.2]) == 1.0
    assert fidelity_kernel([0.0], [math.pi]) == pytest.approx(0.0, abs=1e-30)
    x, xp = [0.3, 1.1, 2.0], [0.9, 0.2, 1.5]
    assert abs(fidelity_kernel(x, xp) - statevector_fidelity(x, xp)) <= 1e-12


def test_fidelity_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        fidelity_kernel([0.1], [0.1, 0.2])


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4).flatmap(lambda d: st.tuples(
    arrays(float, d, elements=angles), arrays(float, d, elements=angles))))
def test_fidelity_matches_statevector_oracle(pair):
    x, xp = pair
    assert abs(fidelity_kernel(x, xp) - statevector_fidelity(x, xp)) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8).flatmap(lambda d: st.tuples(
    arrays(float, d, elements=angles), arrays(float, d, elements=angles))))
def test_fidelity_symmetric(pair):
    x, xp = pair
    assert fidelity_kernel(x, xp) == fidelity_kernel(xp, x)


def test_fidelity_monotone_in_distance():
    deltas = np.linspace(0, math.pi, 50)
    values = [fidelity_kernel([1.0], [1.0 + d]) for d in deltas]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_kernel_matrix_structure():
    rng = np.random.default_rng(0)
    X = rng.uniform(0, math.pi, (7, 4))
    K = kernel_matrix(X, X)
    np.testing.assert_array_equal(np.diag(K), 1.0)
    assert np.max(np.abs(K - K.T)) <= 1e-12
    Y = rng.uniform(0, math.pi, (3, 4))
    Kxy = kernel_matrix(X, Y, block_rows=2)
    for i in range(7):
        for l in range(3):
            assert Kxy[i, l] == pytest.approx(fidelity_kernel(X[i], Y[l]), abs=1e-15)
    with pytest.raises(ValueError, match="column mismatch"):
        kernel_matrix(X, Y[:, :3])


def test_small_gram_is_psd():
    rng = np.random.default_rng(1)
    X = rng.uniform(0, math.pi, (3, 5))
    assert np.linalg.eigvalsh(kernel_matrix(X, X)).min() >= -1e-9


@settings(max_examples=30, deadline=None)
@given(arrays(float, st.tuples(st.integers(2, 12), st.integers(1, 6)), elements=angles))
def test_gram_psd_property(X):
    K = kernel_matrix(X, X)
    assert np.linalg.eigvalsh((K + K.T) / 2).min() >= -1e-9


def test_kernel_distance_examples():
    assert kernel_distance([0.7, 0.1], [0.7, 0.1]) == 0.0
    assert kernel_distance([0.0], [math.pi]) == pytest.approx(1.0, abs=1e-15)
    # single qubit: cos^2(d/2) = 0.5 at d = pi/2
    assert kernel_distance([0.0], [math.pi / 2]) == pytest.approx(math.sqrt(0.5), abs=1e-12)
    np.testing.assert_array_equal(distance_matrix([[1.0 + 1e-16, 0.0]]), [[0.0, 1.0]])


def test_amplitude_matrix_rows_match_vector_path():
    rng = np.random.default_rng(5)
    X = rng.uniform(0, math.pi, (4, 3))
    M = amplitude_matrix(X, spec(3))
    for i in range(4):
        np.testing.assert_array_equal(M[i], amplitude_features(X[i], spec(3)))
