import numpy as np
import pytest

from flagdyn import (
    build_reach_graph,
    enumerate_words,
    find_control_sets,
    group_element,
    label_control_sets,
    order_control_sets,
    sample_space,
)
from flagdyn.presets import full_group_generators, slplus2_generators


def test_enumerate_words_counts_and_dedup():
    g = group_element([[2, 1], [1, 1]])
    ginv = np.linalg.inv(g)
    words = enumerate_words([g, ginv], 3)
    # g and g^-1 cancel, so distinct products are g^k for -3 <= k <= 3, k != 0
    assert len(words) == 6
    lengths = sorted(len(w[0]) for w in words)
    assert lengths == [1, 1, 2, 2, 3, 3]
    mats = [w[1] for w in words]
    assert all(abs(np.linalg.det(m) - 1.0) < 1e-9 for m in mats)


def test_enumerate_words_free_semigroup():
    gens = slplus2_generators()
    words = enumerate_words(gens, 4)
    assert len(words) == 2 + 4 + 8 + 16


def test_empty_generator_list_gives_empty_graph():
    cloud = sample_space("PROJ", 2, 64, 0)
    graph = build_reach_graph([], cloud, epsilon=0.1, word_depth=3)
    assert graph.adjacency.nnz == 0
    assert find_control_sets(graph) == []


def angle_edge_oracle(gens, depth, count, eps_deg):
    """Edges of the circle system computed with plain angle arithmetic."""
    thetas = np.pi * np.arange(count) / count
    words = enumerate_words(gens, depth)
    edges = set()
    for _, w in words:
        v = np.stack([np.cos(thetas), np.sin(thetas)])
        img = w @ v
        phi = np.arctan2(img[1], img[0]) % np.pi
        for i, p in enumerate(phi):
            diff = np.abs((thetas - p + np.pi / 2) % np.pi - np.pi / 2)
            j = int(np.argmin(diff))
            if diff[j] <= np.radians(eps_deg):
                edges.add((i, j))
    return edges


def test_projective_edges_match_angle_oracle():
    gens = slplus2_generators()
    cloud = sample_space("PROJ", 2, 120, 0)
    eps = np.radians(1.5)
    graph = build_reach_graph(gens, cloud, epsilon=eps, word_depth=3)
    got = set(zip(*graph.edge_arrays()))
    expected = angle_edge_oracle(gens, 3, 120, 1.5)
    assert got == expected


def test_full_group_single_invariant_control_set():
    gens = full_group_generators()
    cloud = sample_space("K", 2, 360, 7)
    graph = build_reach_graph(gens, cloud, word_depth=4)
    records = find_control_sets(graph)
    assert len(records) == 1
    assert records[0].invariant
    assert len(records[0].member_indices) == 360
    order_control_sets(records, graph)
    assert records[0].order_rank == 0
    label_control_sets(records, graph)
    assert len(records[0].labels) == 4


def test_control_set_cores_are_recurrent():
    gens = slplus2_generators()
    cloud = sample_space("PROJ", 2, 720, 7)
    graph = build_reach_graph(gens, cloud, word_depth=8)
    records = find_control_sets(graph)
    adj = graph.adjacency
    for record in records:
        core = set(record.core_indices.tolist())
        assert core <= set(record.member_indices.tolist())
        for i in list(core)[:20]:
            targets = set(adj[i].indices.tolist())
            assert targets & core or len(core) == 1


def test_order_relation_on_circle():
    gens = slplus2_generators()
    cloud = sample_space("K", 2, 1440, 7)
    graph = build_reach_graph(gens, cloud, word_depth=8)
    records = find_control_sets(graph)
    pairs = order_control_sets(records, graph)
    invariant = {r.record_id for r in records if r.invariant}
    transient = {r.record_id for r in records} - invariant
    # every non-invariant set reaches some invariant set, never the reverse
    for t in transient:
        assert any((t, i) in pairs for i in invariant)
    for i in invariant:
        assert not any((i, j) in pairs for j in set(r.record_id for r in records) - {i})


def test_labels_partition_types():
    gens = slplus2_generators()
    cloud = sample_space("K", 2, 1440, 7)
    graph = build_reach_graph(gens, cloud, word_depth=8)
    records = find_control_sets(graph)
    records = label_control_sets(records, graph)
    all_labels = [l for r in records for l in r.labels]
    assert len(all_labels) == len(set(all_labels)) == 4
    for r in records:
        assert len(r.labels) == 1
