import numpy as np
import pytest

from flagdyn import (
    NoConvergenceError,
    NotRegularError,
    act_on_K,
    enumerate_M,
    enumerate_Mstar,
    fixed_points_on_K,
    group_element,
    iterate_to_attractor,
    iwasawa_project,
    right_translate,
)


def random_element(rng, n):
    m = rng.normal(size=(n, n))
    if np.linalg.det(m) < 0:
        m[:, 0] = -m[:, 0]
    return group_element(m * abs(np.linalg.det(m)) ** (-1.0 / n))


def random_rotation(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diagonal(r))
    if np.linalg.det(q) < 0:
        q[:, -1] = -q[:, -1]
    return q


def test_action_cocycle():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(2, 4))
        g, h = random_element(rng, n), random_element(rng, n)
        k = random_rotation(rng, n)
        assert np.allclose(
            act_on_K(g @ h, k), act_on_K(g, act_on_K(h, k)), atol=1e-9
        )


def test_action_of_identity_is_identity():
    rng = np.random.default_rng(2)
    k = random_rotation(rng, 3)
    assert np.allclose(act_on_K(np.eye(3), k), k, atol=1e-12)


def test_right_translation_commutes_with_action():
    # kappa(g k) m = kappa(g k m) for sign-diagonal m
    rng = np.random.default_rng(4)
    for m in enumerate_M(3):
        g = random_element(rng, 3)
        k = random_rotation(rng, 3)
        lhs = right_translate(act_on_K(g, k), m)
        rhs = act_on_K(g, right_translate(k, m))
        assert np.allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_fixed_point_count_and_fixedness(n):
    rng = np.random.default_rng(9)
    found = 0
    while found < 50:
        g = random_element(rng, n)
        try:
            fps = fixed_points_on_K(g)
        except Exception:
            continue
        found += 1
        assert len(fps) == len(enumerate_Mstar(n))
        for fp in fps:
            moved = act_on_K(g, fp.point)
            assert np.linalg.norm(moved - fp.point) < 1e-7
        # all fixed points distinct
        pts = np.array([fp.point for fp in fps])
        flat = pts.reshape(len(fps), -1)
        gram = np.linalg.norm(flat[:, None] - flat[None, :], axis=2)
        assert np.min(gram + np.eye(len(fps)) * 10) > 1e-6


def test_fixed_points_reject_non_regular():
    with pytest.raises(NotRegularError):
        fixed_points_on_K(np.eye(2))


def test_iterate_to_attractor_reaches_attracting_fixed_point():
    g = group_element([[2, 1], [1, 1]])
    fps = fixed_points_on_K(g)
    attractors = [
        fp for fp in fps if fp.u_label.perm == tuple(range(2))
    ]
    rng = np.random.default_rng(3)
    k = random_rotation(rng, 2)
    limit, steps = iterate_to_attractor(g, k, tol=1e-9)
    assert steps <= 500
    assert limit.u_label.perm == tuple(range(2))
    assert attractors


def test_iterate_to_attractor_rejects_rotations():
    # a rotation has no regular fixed-point structure to converge to
    from flagdyn import ComplexSpectrumError

    theta = 0.7
    rot = np.array(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    )
    with pytest.raises((NoConvergenceError, NotRegularError, ComplexSpectrumError)):
        iterate_to_attractor(rot, np.eye(2), max_steps=50)
