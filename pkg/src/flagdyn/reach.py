"""Discretized reachability: graphs, control sets, invariance, order, labels.

A reach graph has one node per cloud point and an edge i -> j whenever some
generator word of bounded length maps point i within epsilon of point j
(j being the nearest cloud point to the image). Control sets are built from
strongly connected components that carry at least one internal edge: the
component is the approximate transitivity core, and the member set collects
the points that reach the core intersected with an epsilon fattening of the
core's forward closure.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .errors import CycleError, NoRegularElementError
from .matdecomp import is_regular_positive, kappa_batch, regular_split_decompose
from .projective import canonical_dir_batch
from .compact_action import canonical_flag_batch
from .signedperm import enumerate_Mstar, enumerate_W
from .spaces import SampleCloud, SpaceIndex, apply_word

DEFAULT_WORD_DEPTH = {2: 8, 3: 6, 4: 6}
EPSILON_DISPERSION_FACTOR = 2.0


def _renormalize(mat):
    n = mat.shape[0]
    return mat * float(np.linalg.det(mat)) ** (-1.0 / n)


def enumerate_words(gens, word_depth):
    """Breadth-first generator words up to word_depth, deduplicated.

    Returns (letters, matrix) pairs; matrices are det-renormalized after
    every multiplication so round-off cannot accumulate along long words.
    """
    n = gens[0].shape[0]
    ident_key = np.round(np.eye(n), 12).tobytes()
    seen = set()
    words = []
    level = [((), np.eye(n))]
    for _ in range(word_depth):
        nxt = []
        for letters, mat in level:
            for gi, g in enumerate(gens):
                new = _renormalize(mat @ g)
                key = np.round(new, 12).tobytes()
                nxt.append((letters + (gi,), new))
                if key in seen or key == ident_key:
                    # identity products would only add trivial self-loops
                    continue
                seen.add(key)
                words.append((letters + (gi,), new))
        level = nxt
    return words


@dataclass
class ReachGraph:
    cloud: SampleCloud
    index: SpaceIndex
    adjacency: csr_matrix
    epsilon: float
    word_depth: int
    words: list

    def edge_arrays(self):
        coo = self.adjacency.tocoo()
        return coo.row, coo.col


@dataclass
class ControlSetRecord:
    record_id: int
    space_tag: str
    member_indices: np.ndarray
    core_indices: np.ndarray
    invariant: bool
    labels: list = field(default_factory=list)
    order_rank: int = 0


def _edges_for_word(wmat, cloud, index, epsilon, neighbor_cap):
    images = apply_word(wmat, cloud)
    if neighbor_cap is None:
        return index.within_ball(images, epsilon)
    idx, dist = index.nearest_k(images, neighbor_cap, within=epsilon)
    src, col = np.nonzero(dist <= epsilon)
    return src, idx[src, col]


def _finalize_graph(codes, count):
    if codes:
        merged = np.unique(np.concatenate(codes))
    else:
        merged = np.empty(0, dtype=np.int64)
    row = (merged // count).astype(np.int64)
    col = (merged % count).astype(np.int64)
    adj = csr_matrix(
        (np.ones(len(merged), dtype=bool), (row, col)), shape=(count, count)
    )
    if len(merged) < count:
        warnings.warn("reach graph is sparse: average out-degree below 1")
    return adj


DEFAULT_NEIGHBOR_CAP = 1


def build_reach_graph(gens, cloud, epsilon=None, word_depth=None, index=None,
                      words=None, neighbor_cap=DEFAULT_NEIGHBOR_CAP):
    """Directed epsilon-reachability graph under all short generator words.

    Each (point, word) pair contributes edges to the nearest neighbor_cap
    cloud points whose quotient distance from the image is at most epsilon.
    """
    if index is None:
        index = SpaceIndex(cloud)
    if word_depth is None:
        word_depth = DEFAULT_WORD_DEPTH.get(cloud.n, 6)
    if epsilon is None:
        epsilon = EPSILON_DISPERSION_FACTOR * index.dispersion()
    if words is None:
        words = enumerate_words(gens, word_depth) if gens else []
    count = cloud.count
    codes = []
    for _, wmat in words:
        src, dst = _edges_for_word(wmat, cloud, index, epsilon, neighbor_cap)
        codes.append(src.astype(np.int64) * count + dst)
        if len(codes) >= 128:
            codes = [np.unique(np.concatenate(codes))]
    adj = _finalize_graph(codes, count)
    return ReachGraph(cloud=cloud, index=index, adjacency=adj, epsilon=epsilon,
                      word_depth=word_depth, words=words)


def build_matched_graphs(gens, k_cloud, flag_cloud, epsilon_k=None,
                         epsilon_flag=None, word_depth=None,
                         neighbor_cap=DEFAULT_NEIGHBOR_CAP):
    """Reach graphs on K and on the flag quotient of the same cloud.

    The flag cloud holds the projected K points (possibly deduplicated);
    the kappa images on K are reused for the flag edges, since the canonical
    flag representative of kappa(g k m) does not depend on m.
    """
    k_index = SpaceIndex(k_cloud)
    f_index = SpaceIndex(flag_cloud)
    if word_depth is None:
        word_depth = DEFAULT_WORD_DEPTH.get(k_cloud.n, 6)
    if epsilon_k is None:
        epsilon_k = EPSILON_DISPERSION_FACTOR * k_index.dispersion()
    if epsilon_flag is None:
        epsilon_flag = EPSILON_DISPERSION_FACTOR * f_index.dispersion()
    words = enumerate_words(gens, word_depth) if gens else []
    count = k_cloud.count
    fcount = flag_cloud.count
    fsrc, _ = f_index.nearest(canonical_flag_batch(k_cloud.points))
    k_codes, f_codes = [], []
    for _, wmat in words:
        images = kappa_batch(np.matmul(wmat, k_cloud.points))
        if neighbor_cap is None:
            src, dst = k_index.within_ball(images, epsilon_k)
        else:
            idx, dist = k_index.nearest_k(images, neighbor_cap, within=epsilon_k)
            src, col = np.nonzero(dist <= epsilon_k)
            dst = idx[src, col]
        k_codes.append(src.astype(np.int64) * count + dst)
        fimages = canonical_flag_batch(images)
        if neighbor_cap is None:
            src, dst = f_index.within_ball(fimages, epsilon_flag)
        else:
            idx, dist = f_index.nearest_k(fimages, neighbor_cap, within=epsilon_flag)
            src, col = np.nonzero(dist <= epsilon_flag)
            dst = idx[src, col]
        f_codes.append(fsrc[src].astype(np.int64) * fcount + dst)
        if len(k_codes) >= 128:
            k_codes = [np.unique(np.concatenate(k_codes))]
            f_codes = [np.unique(np.concatenate(f_codes))]
    k_graph = ReachGraph(cloud=k_cloud, index=k_index,
                         adjacency=_finalize_graph(k_codes, count),
                         epsilon=epsilon_k, word_depth=word_depth, words=words)
    f_graph = ReachGraph(cloud=flag_cloud, index=f_index,
                         adjacency=_finalize_graph(f_codes, fcount),
                         epsilon=epsilon_flag, word_depth=word_depth, words=words)
    return k_graph, f_graph


def _condensation(graph):
    ncomp, labels = connected_components(graph.adjacency, connection="strong")
    row, col = graph.edge_arrays()
    pairs = np.unique(labels[row].astype(np.int64) * ncomp + labels[col])
    crow = (pairs // ncomp).astype(np.int64)
    ccol = (pairs % ncomp).astype(np.int64)
    cond = csr_matrix(
        (np.ones(len(pairs), dtype=bool), (crow, ccol)), shape=(ncomp, ncomp)
    )
    return ncomp, labels, cond


def _reachable_comps(cond, start):
    order = breadth_first_order(cond, start, directed=True, return_predecessors=False)
    return np.asarray(order)


def classify_invariant(record, graph):
    """True iff no other recurrent core is reachable from the record's core.

    This is the symbolic-image notion of an invariant (absorbing) chain
    component: once in the core, the dynamics can never transfer to any
    other core. Edges into the non-recurrent epsilon halo do not count
    against invariance.
    """
    ncomp, labels, cond = _condensation(graph)
    row, col = graph.edge_arrays()
    internal = labels[row] == labels[col]
    core_comps = set(np.unique(labels[row[internal]]).tolist())
    comp = int(labels[record.core_indices[0]])
    desc = _reachable_comps(cond, comp)
    return not any(int(d) in core_comps and int(d) != comp for d in desc)


def find_control_sets(graph, min_core_size=1):
    """Control sets of a reach graph, ordered by smallest member index.

    Cores smaller than min_core_size are treated as transient noise and do
    not spawn records of their own.
    """
    if graph.adjacency.nnz == 0:
        return []
    ncomp, labels, cond = _condensation(graph)
    row, col = graph.edge_arrays()
    internal = labels[row] == labels[col]
    core_comps = np.unique(labels[row[internal]])
    comp_sizes = np.bincount(labels, minlength=ncomp)
    core_comps = core_comps[comp_sizes[core_comps] >= min_core_size]
    core_set = set(core_comps.tolist())
    records = []
    for comp in core_comps:
        desc = _reachable_comps(cond, comp)
        anc = _reachable_comps(cond.T.tocsr(), comp)
        desc_mask = np.isin(labels, desc)
        anc_mask = np.isin(labels, anc)
        members_mask = anc_mask & graph.index.fatten(desc_mask, graph.epsilon)
        invariant = not any(
            int(d) in core_set and int(d) != int(comp) for d in desc
        )
        record = ControlSetRecord(
            record_id=-1,
            space_tag=graph.cloud.space_tag,
            member_indices=np.flatnonzero(members_mask),
            core_indices=np.flatnonzero(labels == comp),
            invariant=invariant,
        )
        records.append(record)
    records.sort(key=lambda r: int(r.member_indices.min()))
    for i, record in enumerate(records):
        record.record_id = i
    return records


def order_control_sets(records, graph):
    """Pairs (i, j) with record j reachable from record i, plus order ranks.

    The relation follows reachability between transitivity cores and is
    transitively closed by construction. Mutual reachability between two
    distinct records would contradict the component extraction and raises
    CycleError.
    """
    ncomp, labels, cond = _condensation(graph)
    core_comp = [int(labels[r.core_indices[0]]) for r in records]
    reach = [set(_reachable_comps(cond, c).tolist()) for c in core_comp]
    pairs = []
    for i in range(len(records)):
        for j in range(len(records)):
            if i == j:
                continue
            if core_comp[j] in reach[i]:
                if core_comp[i] in reach[j]:
                    raise CycleError(
                        "records %d and %d are mutually reachable" % (i, j)
                    )
                pairs.append((i, j))
    above = {i: [j for (a, j) in pairs if a == i] for i in range(len(records))}
    ranks = {}

    def rank(i):
        if i not in ranks:
            ranks[i] = 0 if not above[i] else 1 + max(rank(j) for j in above[i])
        return ranks[i]

    for record in records:
        record.order_rank = rank(record.record_id)
    return pairs


def _typed_points(wmat, space_tag, n, tol):
    """Typed fixed points of a regular word on the requested space."""
    split = regular_split_decompose(wmat, tol)
    g = split.conjugator
    if space_tag == "K":
        types = enumerate_Mstar(n)
        stack = kappa_batch(np.stack([g @ u.matrix() for u in types]))
        return list(zip(types, stack))
    if space_tag == "FLAG":
        out = []
        frames = []
        types = enumerate_W(n)
        for w in types:
            cols = g[:, list(w.perm)].copy()
            if w.sign() < 0:
                cols[:, -1] = -cols[:, -1]
            frames.append(cols)
        stack = canonical_flag_batch(kappa_batch(np.stack(frames)))
        return list(zip(types, stack))
    dirs = canonical_dir_batch(g.T)
    out = []
    for w in enumerate_W(n):
        out.append((w, dirs[w.perm[0]]))
    return out


def label_control_sets(records, graph, tol=1e-6, max_regular_words=200):
    """Assign fixed-point type labels to control sets.

    Scans generator words in breadth-first order for regular positive
    elements; each typed fixed point within epsilon of a core point labels
    that record. Types keep their first assignment; later words only fill in
    types that earlier chambers failed to place.
    """
    count = graph.cloud.count
    core_of = np.full(count, -1, dtype=np.int64)
    for record in records:
        core_of[record.core_indices] = record.record_id
    n = graph.cloud.n
    assigned = {}
    scanned = 0
    saw_regular = False
    for _, wmat in graph.words:
        if not is_regular_positive(wmat, tol):
            continue
        saw_regular = True
        scanned += 1
        for label, point in _typed_points(wmat, graph.cloud.space_tag, n, tol):
            if label in assigned:
                continue
            idx, dist = graph.index.nearest(point[None])
            if dist[0] <= graph.epsilon and core_of[idx[0]] >= 0:
                assigned[label] = int(core_of[idx[0]])
        full = len(assigned) == _type_count(graph.cloud.space_tag, n)
        if (full and all_labeled(records, assigned)) or scanned >= max_regular_words:
            break
    if not saw_regular:
        raise NoRegularElementError("no regular positive generator word found")
    for record in records:
        record.labels = sorted(
            label for label, rid in assigned.items() if rid == record.record_id
        )
    return records


def _type_count(space_tag, n):
    if space_tag == "K":
        return len(enumerate_Mstar(n))
    return len(enumerate_W(n))


def all_labeled(records, assigned):
    hit = set(assigned.values())
    return all(r.record_id in hit for r in records)
