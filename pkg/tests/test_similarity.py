import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdsk.data_io import SampleMatrix
from cdsk.errors import ConfigError, DegenerateDataError, ValidationError
from cdsk.kernel import GramMatrix, KernelSpec, gram
from cdsk.similarity import (
    alpha_objective_terms,
    cdsk_objective,
    check_simplex,
    class_scores,
    classify,
    disc_similarity,
    general_disc_similarity,
    hypothesis_score,
    laplacian_quadratic,
)
from cdsk.spectral import psd_split


def _gram_from_points(points, bandwidth=1.0):
    return gram(SampleMatrix(np.asarray(points, dtype=np.float64)), KernelSpec(bandwidth))


def _random_alpha(rng, n):
    a = rng.uniform(0.1, 1.0, size=n)
    return a / a.sum()


def test_check_simplex_accepts_and_rejects():
    out = check_simplex([0.25, 0.75])
    assert out.dtype == np.float64
    with pytest.raises(ValidationError):
        check_simplex([0.5, 0.6])
    with pytest.raises(ValidationError):
        check_simplex([-0.1, 1.1])
    with pytest.raises(ValidationError):
        check_simplex([0.5, 0.5], n=3)
    with pytest.raises(ValidationError):
        check_simplex([np.nan, 1.0])


def test_disc_similarity_hand_pair():
    k = GramMatrix(values=np.array([[1.0, 0.5], [0.5, 1.0]]), bandwidth=1.0)
    g = disc_similarity(k, [0.5, 0.5], 2.0)
    # 2(a_i + a_j - lam a_i a_j) k_ij with all a = 1/2, lam = 2
    assert abs(g.s[0, 1] - 0.5) < 1e-12
    assert abs(g.s[0, 0] - 1.0) < 1e-12
    assert np.allclose(g.degree, g.s.sum(axis=1), atol=1e-12)
    assert np.allclose(g.laplacian, np.diag(g.degree) - g.s, atol=1e-12)


def test_disc_similarity_uniform_alpha_scales_kernel():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(7, 2))
    k = _gram_from_points(pts)
    n, lam = 7, 0.7
    g = disc_similarity(k, np.full(n, 1.0 / n), lam)
    expected = (4.0 / n - 2.0 * lam / n**2) * k.values
    assert np.allclose(g.s, expected, atol=1e-12)


def test_disc_similarity_elementwise_oracle():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(6, 3))
    k = _gram_from_points(pts)
    alpha = _random_alpha(rng, 6)
    lam = 1.0
    g = disc_similarity(k, alpha, lam)
    for i in range(6):
        for j in range(6):
            want = 2.0 * (alpha[i] + alpha[j] - lam * alpha[i] * alpha[j]) * k.values[i, j]
            assert abs(g.s[i, j] - want) < 1e-12
            assert g.s[i, j] >= 0.0


def test_disc_similarity_lambda_domain():
    k = GramMatrix(values=np.eye(2) * 0.5 + 0.5, bandwidth=1.0)
    for lam in (2.5, -0.1, np.inf):
        with pytest.raises(ConfigError):
            disc_similarity(k, [0.5, 0.5], lam)


def test_disc_similarity_normalized_laplacian():
    rng = np.random.default_rng(2)
    k = _gram_from_points(rng.normal(size=(5, 2)))
    g = disc_similarity(k, _random_alpha(rng, 5), 0.3)
    inv_sqrt = 1.0 / np.sqrt(g.degree)
    want = np.eye(5) - (inv_sqrt[:, None] * g.s) * inv_sqrt[None, :]
    assert np.allclose(g.normalized_laplacian, want, atol=1e-10)


def test_disc_similarity_zero_degree_row_raises():
    # third point is infinitely far at this bandwidth and carries no weight,
    # so its row degree underflows to zero
    pts = np.array([[0.0], [0.5], [200.0]])
    k = _gram_from_points(pts, bandwidth=1.0)
    with pytest.raises(DegenerateDataError):
        disc_similarity(k, [0.5, 0.5, 0.0], 1.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 8), st.floats(0.0, 2.0))
def test_disc_similarity_nonnegative(seed, n, lam):
    rng = np.random.default_rng(seed)
    k = _gram_from_points(rng.normal(size=(n, 2)))
    a = rng.uniform(0.0, 1.0, size=n)
    a = a / a.sum() if a.sum() > 0 else np.full(n, 1.0 / n)
    g = disc_similarity(k, a, lam)
    assert g.s.min() >= -1e-12


def test_general_disc_similarity_psd_reduces():
    rng = np.random.default_rng(3)
    k = _gram_from_points(rng.normal(size=(5, 2)))
    alpha = _random_alpha(rng, 5)
    split = psd_split(k.values)
    out = general_disc_similarity(k.values, split, alpha, 0.8)
    assert np.allclose(out, disc_similarity(k, alpha, 0.8).s, atol=1e-10)


def test_general_disc_similarity_lambda_zero():
    rng = np.random.default_rng(4)
    s_raw = rng.uniform(0.0, 1.0, size=(4, 4))
    s_raw = 0.5 * (s_raw + s_raw.T)
    alpha = _random_alpha(rng, 4)
    out = general_disc_similarity(s_raw, psd_split(s_raw), alpha, 0.0)
    want = 2.0 * (alpha[:, None] + alpha[None, :]) * s_raw
    assert np.allclose(out, want, atol=1e-12)


def test_general_disc_similarity_indefinite_oracle():
    s_raw = np.array([[1.0, 0.9, 0.1], [0.9, 1.0, 0.8], [0.1, 0.8, 1.0]])
    split = psd_split(s_raw)
    alpha = np.array([0.2, 0.3, 0.5])
    lam = 1.4
    out = general_disc_similarity(s_raw, split, alpha, lam)
    for i in range(3):
        for j in range(3):
            want = (
                2.0 * (alpha[i] + alpha[j]) * s_raw[i, j]
                - 2.0 * lam * alpha[i] * alpha[j] * split.s_plus[i, j]
                - 2.0 * lam * alpha[i] * alpha[j] * split.s_minus[i, j]
            )
            assert abs(out[i, j] - want) < 1e-10


def test_general_disc_similarity_rejects_bad_split():
    s_raw = np.array([[1.0, 0.5], [0.5, 1.0]])
    split = psd_split(np.array([[1.0, 0.2], [0.2, 1.0]]))
    with pytest.raises(ValidationError):
        general_disc_similarity(s_raw, split, [0.5, 0.5], 1.0)


def test_laplacian_quadratic_matches_pair_sum():
    rng = np.random.default_rng(5)
    k = _gram_from_points(rng.normal(size=(6, 2)))
    g = disc_similarity(k, _random_alpha(rng, 6), 0.5)
    y = rng.normal(size=(6, 2))
    got = laplacian_quadratic(y, g)
    want = 0.0
    for i in range(6):
        for j in range(6):
            want += 0.5 * g.s[i, j] * np.sum((y[i] - y[j]) ** 2)
    assert abs(got - want) < 1e-8 * max(1.0, abs(want))


def test_laplacian_quadratic_constant_rows_zero():
    rng = np.random.default_rng(6)
    k = _gram_from_points(rng.normal(size=(5, 2)))
    g = disc_similarity(k, _random_alpha(rng, 5), 0.5)
    y = np.tile([2.0, -1.0], (5, 1))
    assert abs(laplacian_quadratic(y, g)) < 1e-10


def test_alpha_objective_terms_closed_form():
    rng = np.random.default_rng(7)
    k = _gram_from_points(rng.normal(size=(5, 2)))
    alpha = _random_alpha(rng, 5)
    lam = 0.9
    want = -float(alpha @ k.values @ np.ones(5)) + lam * float(alpha @ k.values @ alpha)
    assert abs(alpha_objective_terms(k, alpha, lam) - want) < 1e-12


def test_cdsk_objective_zero_embedding():
    rng = np.random.default_rng(8)
    k = _gram_from_points(rng.normal(size=(5, 2)))
    alpha = _random_alpha(rng, 5)
    g = disc_similarity(k, alpha, 1.0)
    got = cdsk_objective(np.zeros((5, 2)), g, k, alpha, 1.0)
    assert abs(got - alpha_objective_terms(k, alpha, 1.0)) < 1e-12


def test_cdsk_objective_hand_pair():
    pts = np.array([[0.0], [1.0]])
    k = _gram_from_points(pts, bandwidth=1.0)
    kv = np.exp(-0.5)
    assert abs(k.values[0, 1] - kv) < 1e-15
    alpha = np.array([0.5, 0.5])
    g = disc_similarity(k, alpha, 1.0)
    y = np.tile([0.3, -0.2], (2, 1))  # equal rows kill the Laplacian term
    got = cdsk_objective(y, g, k, alpha, 1.0)
    want = -(1.0 + kv) + (1.0 + kv) / 2.0
    assert abs(got - want) < 1e-12


def test_cdsk_objective_middle_term_identity():
    rng = np.random.default_rng(9)
    k = _gram_from_points(rng.normal(size=(7, 3)))
    alpha = _random_alpha(rng, 7)
    pair_sum = 0.0
    for i in range(7):
        for j in range(7):
            pair_sum += 0.5 * (alpha[i] + alpha[j]) * k.values[i, j]
    assert abs(pair_sum - float(alpha @ k.values @ np.ones(7))) < 1e-10


def _two_point_train(k1, k2, bandwidth=1.0):
    # place 1-D training points so the query at the origin sees the
    # requested kernel values
    t1 = np.sqrt(-2.0 * bandwidth**2 * np.log(k1))
    t2 = np.sqrt(-2.0 * bandwidth**2 * np.log(k2))
    return SampleMatrix(np.array([[t1], [t2]]), labels=np.array([1, 2]))


def test_hypothesis_score_hand_values():
    train = _two_point_train(0.8, 0.2)
    spec = KernelSpec(1.0)
    assert abs(hypothesis_score([0.0], 1, train, [0.5, 0.5], spec) - 0.4) < 1e-12
    assert abs(hypothesis_score([0.0], 2, train, [0.5, 0.5], spec) - 0.1) < 1e-12


def test_hypothesis_score_concentrated_alpha():
    train = _two_point_train(0.8, 0.2)
    spec = KernelSpec(1.0)
    assert abs(hypothesis_score([0.0], 1, train, [1.0, 0.0], spec) - 0.8) < 1e-12
    assert abs(hypothesis_score([0.0], 2, train, [1.0, 0.0], spec)) < 1e-15


def test_hypothesis_score_sum_identity():
    rng = np.random.default_rng(10)
    pts = rng.normal(size=(8, 2))
    labels = rng.integers(1, 4, size=8)
    labels[:3] = [1, 2, 3]
    train = SampleMatrix(pts, labels=labels)
    alpha = _random_alpha(rng, 8)
    spec = KernelSpec(1.3)
    x = rng.normal(size=2)
    total = sum(hypothesis_score(x, y, train, alpha, spec) for y in (1, 2, 3))
    direct = sum(
        alpha[i] * np.exp(-np.sum((x - pts[i]) ** 2) / (2 * 1.3**2)) for i in range(8)
    )
    assert abs(total - direct) < 1e-12


def test_hypothesis_score_bad_class():
    train = _two_point_train(0.8, 0.2)
    with pytest.raises(ValidationError):
        hypothesis_score([0.0], 3, train, [0.5, 0.5], KernelSpec(1.0))


def test_classify_tie_prefers_smaller_id():
    train = SampleMatrix(np.array([[-1.0], [1.0]]), labels=np.array([2, 1]))
    # equidistant query: both classes score identically
    assert classify([0.0], train, [0.5, 0.5], KernelSpec(1.0)) == 1


def test_classify_matches_argmax_of_scores():
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(10, 2))
    labels = np.repeat([1, 2], 5)
    train = SampleMatrix(pts, labels=labels)
    alpha = _random_alpha(rng, 10)
    spec = KernelSpec(0.8)
    for _ in range(5):
        x = rng.normal(size=2)
        scores = class_scores(x, train, alpha, spec)
        assert classify(x, train, alpha, spec) == int(np.argmax(scores)) + 1
