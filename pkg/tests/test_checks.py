import numpy as np
import pytest

from flagdyn import (
    FactorizationError,
    build_reach_graph,
    compute_CS,
    compute_WS,
    enumerate_Mstar,
    enumerate_W,
    find_control_sets,
    label_control_sets,
    order_control_sets,
    sample_space,
    unipotent_factor,
    verify_counting,
    verify_nu_decomposition,
    verify_right_translation,
)
from flagdyn.presets import slplus2_generators
from flagdyn.signedperm import identity_sign_vector


def u_with_perm(perm):
    return next(u for u in enumerate_Mstar(3) if u.perm == perm)


def test_unipotent_factor_entry_pattern_oracle():
    # For the order-reversing permutation, N_u is the full lower unipotent
    # group: nu = L, and the split must reproduce strictly triangular parts.
    u = u_with_perm((2, 1, 0))
    umat = u.matrix()
    upper = np.array([[1.0, 0.7, -0.3], [0.0, 1.0, 1.1], [0.0, 0.0, 1.0]])
    nu = umat @ upper @ np.linalg.inv(umat)
    lo, hi = unipotent_factor(nu, u)
    assert np.allclose(lo @ hi, nu, atol=1e-12)
    assert np.allclose(np.triu(lo, 1), 0.0, atol=1e-12)
    assert np.allclose(np.tril(hi, -1), 0.0, atol=1e-12)
    assert np.allclose(np.diag(lo), 1.0)
    assert np.allclose(np.diag(hi), 1.0)


def test_unipotent_factor_identity_weyl_class():
    # trivial inversion set: nu itself must be the upper factor
    u = u_with_perm((0, 1, 2))
    nu = np.array([[1.0, 2.0, 3.0], [0.0, 1.0, -1.0], [0.0, 0.0, 1.0]])
    lo, hi = unipotent_factor(nu, u)
    assert np.allclose(lo, np.eye(3), atol=1e-12)
    assert np.allclose(hi, nu, atol=1e-12)


def test_unipotent_factor_rejects_out_of_pattern_input():
    u = u_with_perm((0, 1, 2))
    bad = np.array([[1.0, 0.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(FactorizationError):
        unipotent_factor(bad, u)


@pytest.mark.parametrize("perm", [(0, 1, 2), (1, 0, 2), (2, 1, 0), (1, 2, 0)])
def test_nu_decomposition_random_samples(perm):
    report = verify_nu_decomposition(u_with_perm(perm), samples=30, seed=5)
    assert report.passed, report.details
    assert report.lhs == report.rhs == 30


@pytest.fixture(scope="module")
def circle_k_analysis():
    gens = slplus2_generators()
    cloud = sample_space("K", 2, 1440, 7)
    graph = build_reach_graph(gens, cloud, word_depth=8)
    records = find_control_sets(graph)
    order_control_sets(records, graph)
    label_control_sets(records, graph)
    return graph, records


@pytest.fixture(scope="module")
def circle_flag_analysis():
    gens = slplus2_generators()
    cloud = sample_space("FLAG", 2, 720, 7)
    graph = build_reach_graph(gens, cloud, word_depth=8)
    records = find_control_sets(graph)
    order_control_sets(records, graph)
    label_control_sets(records, graph)
    return graph, records


def test_compute_CS_is_trivial_for_positive_circle_system(circle_k_analysis):
    graph, records = circle_k_analysis
    cs = compute_CS(records, graph, 2)
    assert cs == [identity_sign_vector(2)]


def test_compute_WS_is_trivial_for_positive_circle_system(circle_flag_analysis):
    graph, records = circle_flag_analysis
    ws = compute_WS(records)
    assert len(ws) == 1
    assert ws[0].perm == (0, 1)


def test_counting_theorem_on_circle(circle_k_analysis, circle_flag_analysis):
    k_graph, k_records = circle_k_analysis
    f_graph, f_records = circle_flag_analysis
    report = verify_counting(k_records, f_records, k_graph, 2)
    assert report.passed, report.details
    assert report.lhs == 4
    assert report.rhs == 4


def test_right_translation_covariance_on_circle(circle_k_analysis):
    graph, records = circle_k_analysis
    report = verify_right_translation(records, graph, 2)
    assert report.passed, report.details
