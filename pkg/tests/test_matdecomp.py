import numpy as np
import pytest

from flagdyn import (
    ComplexSpectrumError,
    InvalidElementError,
    NotRegularError,
    NumericalRankError,
    group_element,
    is_regular_positive,
    iwasawa_decompose,
    iwasawa_project,
    kappa_batch,
    regular_split_decompose,
)


def hand_gram_schmidt_2x2():
    # Iwasawa factors of [[2,1],[1,1]] worked out by hand:
    # first column (2,1) normalizes to (2,1)/sqrt5, so a11 = sqrt5;
    # projecting the second column gives n12 = 3/5 and a22 = 1/sqrt5.
    s5 = np.sqrt(5.0)
    k = np.array([[2.0, -1.0], [1.0, 2.0]]) / s5
    a = np.diag([s5, 1.0 / s5])
    n = np.array([[1.0, 3.0 / 5.0], [0.0, 1.0]])
    return k, a, n


def test_iwasawa_matches_hand_oracle():
    g = group_element([[2, 1], [1, 1]])
    triple = iwasawa_decompose(g)
    k, a, n = hand_gram_schmidt_2x2()
    assert np.allclose(triple.k, k, atol=1e-12)
    assert np.allclose(triple.a, a, atol=1e-12)
    assert np.allclose(triple.nfac, n, atol=1e-12)


def test_iwasawa_reconstruction_random():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(2, 5))
        g = group_element_from_rng(rng, n)
        t = iwasawa_decompose(g)
        assert np.allclose(t.k @ t.a @ t.nfac, g, atol=1e-10)
        assert np.allclose(t.k.T @ t.k, np.eye(n), atol=1e-10)
        assert np.all(np.diag(t.a) > 0)
        assert np.allclose(t.nfac, np.triu(t.nfac), atol=0)
        assert np.allclose(np.diag(t.nfac), 1.0, atol=0)


def group_element_from_rng(rng, n):
    while True:
        m = rng.normal(size=(n, n))
        d = np.linalg.det(m)
        if abs(d) > 1e-3:
            if d < 0:
                m[:, 0] = -m[:, 0]
            return group_element(m * abs(np.linalg.det(m)) ** (-1.0 / n))


def test_group_element_rejects_bad_input():
    with pytest.raises(InvalidElementError):
        group_element([[1, 2, 3], [4, 5, 6]])
    with pytest.raises(InvalidElementError):
        group_element([[1]])
    with pytest.raises(InvalidElementError):
        group_element([[1, 0], [0, -1]])
    with pytest.raises(InvalidElementError):
        group_element([[np.nan, 0], [0, 1]])
    with pytest.raises(InvalidElementError):
        group_element([[2, 0], [0, 1]])


def test_group_element_rescales_near_misses():
    m = np.array([[1.0 + 2e-5, 0.0], [0.0, 1.0]])
    with pytest.warns(RuntimeWarning):
        g = group_element(m)
    assert abs(np.linalg.det(g) - 1.0) < 1e-12


def test_iwasawa_rank_failure():
    # det is exactly 1 but the triangular factor underflows the rank floor
    g = np.array([[1e15, 0.0], [0.0, 1e-15]])
    with pytest.raises(NumericalRankError):
        iwasawa_decompose(g)


def test_kappa_batch_matches_single():
    rng = np.random.default_rng(5)
    mats = np.array([group_element_from_rng(rng, 3) for _ in range(40)])
    batched = kappa_batch(mats)
    for i in range(40):
        assert np.allclose(batched[i], iwasawa_project(mats[i]), atol=1e-12)


def test_regular_split_conventions():
    g = group_element([[2, 1], [1, 1]])
    split = regular_split_decompose(g)
    assert split.logs[0] > split.logs[1]
    assert abs(split.logs.sum()) < 1e-12
    assert np.allclose(split.reconstruct(), g, atol=1e-10)
    assert abs(np.linalg.det(split.conjugator) - 1.0) < 1e-10
    # golden ratio eigenvalues of [[2,1],[1,1]]
    phi = (3.0 + np.sqrt(5.0)) / 2.0
    assert abs(split.logs[0] - 0.5 * np.log(phi / (1.0 / phi))) < 1e-10


def test_regular_split_rejects_rotation():
    theta = 1.0
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    with pytest.raises(ComplexSpectrumError):
        regular_split_decompose(group_element(rot))


def test_regular_split_rejects_repeated_spectrum():
    with pytest.raises(NotRegularError):
        regular_split_decompose(group_element(np.eye(2)))
    assert not is_regular_positive(np.eye(3))
    assert is_regular_positive(group_element([[2, 1], [1, 1]]))
