"""Verification of the structure theorems on computed control-set data.

Everything here consumes the outputs of the reach engine: labeled control
set records on SO(n) and on the flag manifold over matched clouds. Counting
checks are exact integer equalities; point-set comparisons use one-sided
nearest-neighbor mismatch fractions at a 2-epsilon collar with a 1% budget.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import FactorizationError, NoRegularElementError, NotASubgroupError
from .matdecomp import is_regular_positive, regular_split_decompose
from .compact_action import canonical_flag_batch
from .reach import _typed_points
from .signedperm import (
    SignVector,
    check_subgroup,
    conjugate_C_by_W,
    enumerate_M,
    enumerate_Mstar,
    enumerate_W,
    identity_signed_permutation,
    right_cosets,
)

MISMATCH_BUDGET = 0.01


@dataclass
class VerificationReport:
    theorem_tag: str
    passed: bool
    lhs: object
    rhs: object
    details: str = ""

    def serialize(self):
        return {
            "theorem_tag": self.theorem_tag,
            "passed": bool(self.passed),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "details": self.details,
        }


def _one_sided_mismatch(pts_a, pts_b, radius):
    """Fraction of rows of pts_a with no row of pts_b within radius."""
    if len(pts_a) == 0:
        return 0.0
    tree = cKDTree(pts_b.reshape(len(pts_b), -1))
    dist, _ = tree.query(pts_a.reshape(len(pts_a), -1))
    return float(np.mean(dist > radius))


def _sets_match(pts_a, pts_b, radius):
    return (
        _one_sided_mismatch(pts_a, pts_b, radius) < MISMATCH_BUDGET
        and _one_sided_mismatch(pts_b, pts_a, radius) < MISMATCH_BUDGET
    )


def compute_WS(flag_records):
    """W(S): the Weyl labels of the invariant flag control set, as a subgroup."""
    invariant = [r for r in flag_records if r.invariant]
    if len(invariant) != 1:
        raise NotASubgroupError(
            "expected exactly one invariant flag control set, found %d"
            % len(invariant)
        )
    labels = sorted(set(invariant[0].labels))
    if not labels:
        raise NotASubgroupError("invariant flag control set carries no labels")
    n = labels[0].n
    check_subgroup(labels, enumerate_W(n))
    return labels


def _anchor_invariant(k_records, n):
    ident = identity_signed_permutation(n)
    for record in k_records:
        if record.invariant and ident in record.labels:
            return record
    for record in k_records:
        if record.invariant:
            return record
    raise NotASubgroupError("no invariant control set on K")


def compute_CS_for_record(record, k_graph, n):
    """Sign vectors whose right translation maps the record onto itself."""
    pts = k_graph.cloud.points[record.member_indices]
    radius = 2.0 * k_graph.epsilon
    out = []
    for m in enumerate_M(n):
        translated = pts * np.asarray(m.signs, dtype=float)[None, None, :]
        if _sets_match(translated, pts, radius):
            out.append(m)
    return sorted(out)


def compute_CS(k_records, k_graph, n, record=None):
    """C(S): the right-translation stabilizer of the anchor invariant record."""
    if record is None:
        record = _anchor_invariant(k_records, n)
    subgroup = compute_CS_for_record(record, k_graph, n)
    check_subgroup(subgroup, enumerate_M(n))
    return subgroup


def verify_counting(k_records, flag_records, k_graph, n):
    """|control sets on K| = |C(S)\\C| * |W(S)\\W| (exact integers)."""
    ws = compute_WS(flag_records)
    cs = compute_CS(k_records, k_graph, n)
    c_cosets = right_cosets(cs, enumerate_M(n)).count
    w_cosets = right_cosets(ws, enumerate_W(n)).count
    lhs = len(k_records)
    rhs = c_cosets * w_cosets
    return VerificationReport(
        theorem_tag="counting",
        passed=lhs == rhs,
        lhs=lhs,
        rhs=rhs,
        details="|C(S)\\C|=%d, |W(S)\\W|=%d" % (c_cosets, w_cosets),
    )


def fiber_decomposition(k_records, flag_records, k_graph, flag_graph):
    """Map flag record id -> K record ids whose cores project into it.

    Each K core is projected to canonical flag representatives and snapped
    to the flag cloud; the majority flag record wins.
    """
    member_of = {}
    for fr in flag_records:
        for i in fr.member_indices:
            member_of.setdefault(int(i), fr.record_id)
    over = {fr.record_id: [] for fr in flag_records}
    for kr in k_records:
        reps = canonical_flag_batch(k_graph.cloud.points[kr.core_indices])
        fidx, _ = flag_graph.index.nearest(reps)
        hits = [member_of.get(int(i), -1) for i in fidx]
        values, counts = np.unique(np.asarray(hits), return_counts=True)
        target = int(values[np.argmax(counts)])
        if target >= 0:
            over[target].append(kr.record_id)
    return over


def verify_fiber_unions(k_records, flag_records, k_graph, flag_graph, n):
    """pi^-1 of each flag core equals a union of right M-translates of one core.

    Also checks that the number of K control sets over each flag control set
    equals the coset count |C(S,w)\\C|.
    """
    over = fiber_decomposition(k_records, flag_records, k_graph, flag_graph)
    m_list = enumerate_M(n)
    radius = 2.0 * k_graph.epsilon
    fsrc, _ = flag_graph.index.nearest(canonical_flag_batch(k_graph.cloud.points))
    details = []
    passed = True
    for fr in flag_records:
        k_ids = over[fr.record_id]
        if not k_ids:
            passed = False
            details.append("flag record %d has no K records over it" % fr.record_id)
            continue
        anchor = next(kr for kr in k_records if kr.record_id == k_ids[0])
        csw = compute_CS_for_record(anchor, k_graph, n)
        expected = len(m_list) // max(len(csw), 1)
        if len(k_ids) != expected:
            passed = False
        upstairs = k_graph.cloud.points[np.isin(fsrc, fr.core_indices)]
        core_pts = k_graph.cloud.points[anchor.core_indices]
        union = np.concatenate(
            [core_pts * np.asarray(m.signs, dtype=float)[None, None, :] for m in m_list]
        )
        frac_a = _one_sided_mismatch(upstairs, union, radius)
        frac_b = _one_sided_mismatch(union, upstairs, radius)
        if max(frac_a, frac_b) >= MISMATCH_BUDGET:
            passed = False
        details.append(
            "flag %d: %d K records (expected %d), mismatch %.4f/%.4f"
            % (fr.record_id, len(k_ids), expected, frac_a, frac_b)
        )
    return VerificationReport(
        theorem_tag="fiber-unions",
        passed=passed,
        lhs=sum(len(v) for v in over.values()),
        rhs=len(k_records),
        details="; ".join(details),
    )


def verify_conjugacy_CSw(k_records, flag_records, k_graph, flag_graph, n):
    """C(S, w) = w^-1 C(S) w, exactly as subgroups of M."""
    cs = compute_CS(k_records, k_graph, n)
    over = fiber_decomposition(k_records, flag_records, k_graph, flag_graph)
    details = []
    passed = True
    for fr in flag_records:
        if not over[fr.record_id] or not fr.labels:
            passed = False
            details.append("flag record %d unlabeled or empty fiber" % fr.record_id)
            continue
        anchor = next(
            kr for kr in k_records if kr.record_id == over[fr.record_id][0]
        )
        csw = set(compute_CS_for_record(anchor, k_graph, n))
        for w in fr.labels:
            expected = {conjugate_C_by_W(w.inverse(), c) for c in cs}
            if csw != expected:
                passed = False
                details.append(
                    "flag %d, w=%s: C(S,w) != w^-1 C(S) w" % (fr.record_id, w.perm)
                )
    return VerificationReport(
        theorem_tag="conjugacy",
        passed=passed,
        lhs=len([m for m in cs]),
        rhs=len([m for m in cs]),
        details="; ".join(details) if details else "all fibers conjugate correctly",
    )


def _inversion_positions(perm):
    n = len(perm)
    return [(i, j) for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j]]


def unipotent_factor(nu, u):
    """Factor nu in N_u = u N u^-1 as nu_minus nu_plus.

    nu_minus is unit lower triangular in N_u, nu_plus unit upper triangular
    in N_u. The split follows the inversion set of the Weyl class of u,
    filled in superdiagonal by superdiagonal.
    """
    n = u.n
    umat = u.matrix()
    inner = np.linalg.inv(umat) @ nu @ umat
    pos = _inversion_positions(u.perm)
    n1 = np.eye(n)
    for h in range(1, n):
        r = np.linalg.solve(n1, inner)
        for (i, j) in pos:
            if j - i == h:
                n1[i, j] += r[i, j]
    n2 = np.linalg.solve(n1, inner)
    nu_minus = umat @ n1 @ np.linalg.inv(umat)
    nu_plus = umat @ n2 @ np.linalg.inv(umat)
    scale = max(1.0, float(np.abs(nu).max()))
    if np.abs(np.triu(nu_minus, 1)).max() > 1e-12 * scale:
        raise FactorizationError("nu_minus is not lower triangular")
    if np.abs(np.tril(nu_plus, -1)).max() > 1e-12 * scale:
        raise FactorizationError("nu_plus is not upper triangular")
    allowed = np.eye(n, dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            allowed[u.perm[i], u.perm[j]] = True
    for factor in (nu_minus, nu_plus):
        if np.abs(factor[~allowed]).max() > 1e-12 * scale:
            raise FactorizationError("factor leaves the root pattern of N_u")
    if np.linalg.norm(nu_minus @ nu_plus - nu) > 1e-10 * scale:
        raise FactorizationError("reconstruction error above tolerance")
    return nu_minus, nu_plus


def verify_nu_decomposition(u, samples=100, seed=0):
    """Random elements of N_u factor as (N_u cap N^-)(N_u cap N)."""
    n = u.n
    rng = np.random.default_rng(seed)
    umat = u.matrix()
    uinv = np.linalg.inv(umat)
    failures = 0
    detail = ""
    for _ in range(samples):
        upper = np.eye(n)
        idx = np.triu_indices(n, 1)
        upper[idx] = rng.uniform(-2.0, 2.0, size=len(idx[0]))
        nu = umat @ upper @ uinv
        try:
            unipotent_factor(nu, u)
        except FactorizationError as exc:
            failures += 1
            detail = str(exc)
    return VerificationReport(
        theorem_tag="nu-decomposition",
        passed=failures == 0,
        lhs=samples - failures,
        rhs=samples,
        details=detail or "perm=%s, %d samples" % (list(u.perm), samples),
    )


def _random_regular_words(gens, trials, seed, n, max_len=10, tol=1e-6):
    rng = np.random.default_rng(seed)
    seen = set()
    words = []
    attempts = 0
    while len(words) < trials and attempts < 200 * trials:
        attempts += 1
        length = int(rng.integers(1, max_len + 1))
        letters = tuple(int(x) for x in rng.integers(0, len(gens), size=length))
        if letters in seen:
            continue
        seen.add(letters)
        mat = np.eye(n)
        for li in letters:
            mat = mat @ gens[li]
            mat = mat * float(np.linalg.det(mat)) ** (-1.0 / n)
        if is_regular_positive(mat, tol):
            words.append((letters, mat))
    if len(words) < trials:
        raise NoRegularElementError(
            "found only %d regular words of %d requested" % (len(words), trials)
        )
    return words


class _CircleAddress:
    """Builds SL(2) generator words with a prescribed fixed direction.

    Uses nested cylinder refinement of the two-map iterated function system
    spanned by the generators. Forward cylinders target attractor directions;
    inverse cylinders target repeller directions.
    """

    def __init__(self, gens, tol_angle):
        self.gens = [g / float(np.linalg.det(g)) ** 0.5 for g in gens]
        self.inv = [np.linalg.inv(g) for g in self.gens]
        self.tol = tol_angle
        self._cache = {}

    @staticmethod
    def _line_angle(v):
        ang = np.arctan2(v[1], v[0]) % np.pi
        return float(ang)

    @staticmethod
    def _apply(mat, ang):
        v = mat @ np.array([np.cos(ang), np.sin(ang)])
        return _CircleAddress._line_angle(v)

    def _fixed_dirs(self, mat):
        vals, vecs = np.linalg.eig(mat)
        order = np.argsort(-vals.real)
        att = self._line_angle(vecs[:, order[0]].real)
        rep = self._line_angle(vecs[:, order[1]].real)
        return att, rep

    def word_with_fixed_dir(self, target, kind, max_len=400):
        """Word whose attractor ('att') or repeller ('rep') is near target.

        Returns (letters, matrix) or None on failure. Angles are line angles
        in [0, pi).
        """
        key = (kind, round(target / self.tol) * 1)
        if key in self._cache:
            return self._cache[key]
        maps = self.gens if kind == "att" else self.inv
        anchors = [self._fixed_dirs(g)[0 if kind == "att" else 1] for g in self.gens]
        lo, hi = sorted(anchors)
        ends = np.array([lo, hi])
        letters = []
        t = target
        for _ in range(max_len):
            spans = []
            for mi, mat in enumerate(maps):
                a = self._apply(mat, ends[0])
                b = self._apply(mat, ends[1])
                spans.append((min(a, b), max(a, b)))
            inside = [mi for mi, (a, b) in enumerate(spans) if a - 1e-12 <= t <= b + 1e-12]
            if not inside:
                inside = [
                    int(
                        np.argmin(
                            [min(abs(t - a), abs(t - b)) for (a, b) in spans]
                        )
                    )
                ]
            pick = min(
                inside, key=lambda mi: abs(t - 0.5 * (spans[mi][0] + spans[mi][1]))
            )
            letters.append(pick)
            t = self._apply(np.linalg.inv(maps[pick]), t)
            word = letters if kind == "att" else letters[::-1]
            mat = np.eye(2)
            for li in word:
                mat = mat @ self.gens[li]
                mat = mat * float(np.linalg.det(mat)) ** -0.5
            att, rep = self._fixed_dirs(mat)
            got = att if kind == "att" else rep
            diff = abs((got - target + np.pi / 2) % np.pi - np.pi / 2)
            if diff <= self.tol:
                self._cache[key] = (tuple(word), mat)
                return self._cache[key]
        self._cache[key] = None
        return None


def verify_transitivity_fixed_points(k_records, k_graph, gens, trials=50, seed=11,
                                     tol=1e-6):
    """Typed fixed points of regular words land in the matching cores.

    Forward direction (all n): for `trials` random regular positive words,
    each typed fixed point snaps within epsilon to a core point of the record
    labeled with its type, and the types distribute evenly over the records.
    Converse direction (n = 2 only): every sampled core point lies within
    epsilon of a typed fixed point of some constructed witness word.
    """
    n = k_graph.cloud.n
    count = k_graph.cloud.count
    core_of = np.full(count, -1, dtype=np.int64)
    for record in k_records:
        core_of[record.core_indices] = record.record_id
    label_to_record = {}
    for record in k_records:
        for u in record.labels:
            label_to_record[u] = record.record_id
    counterexamples = []
    n_types = len(enumerate_Mstar(n))
    share = n_types // len(k_records) if k_records else 0
    words = _random_regular_words(gens, trials, seed, n, tol=tol)
    probe = min(256, k_graph.cloud.count)
    for letters, mat in words:
        per_record = {r.record_id: 0 for r in k_records}
        for u, point in _typed_points(mat, "K", n, tol):
            rid = label_to_record.get(u, -1)
            idx, _ = k_graph.index.nearest_k(point[None], probe,
                                             within=k_graph.epsilon)
            owners = idx[0][idx[0] >= 0]
            if rid < 0 or not (core_of[owners] == rid).any():
                counterexamples.append("word %s type %s" % (letters, u))
            else:
                per_record[rid] += 1
        if any(v != share for v in per_record.values()):
            counterexamples.append("word %s uneven distribution" % (letters,))
    witness_count = 0
    if n == 2:
        eps_angle = 2.0 * np.arcsin(min(1.0, k_graph.epsilon / (2.0 * np.sqrt(2.0))))
        addresser = _CircleAddress(gens, 0.5 * eps_angle)
        for record in k_records:
            if not record.labels:
                counterexamples.append("record %d unlabeled" % record.record_id)
                continue
            u = record.labels[0]
            kind = "att" if u.perm == (0, 1) else "rep"
            for node in record.core_indices:
                frame = k_graph.cloud.points[node]
                target = float(np.arctan2(frame[1, 0], frame[0, 0]) % np.pi)
                built = addresser.word_with_fixed_dir(target, kind)
                if built is None:
                    counterexamples.append("no witness for core node %d" % node)
                    continue
                witness_count += 1
                _, mat = built
                hit = False
                for tu, point in _typed_points(mat, "K", n, tol):
                    if np.linalg.norm(point - frame) <= k_graph.epsilon:
                        hit = True
                        break
                if not hit:
                    counterexamples.append("witness misses core node %d" % node)
    return VerificationReport(
        theorem_tag="transitivity",
        passed=not counterexamples,
        lhs=0 if not counterexamples else len(counterexamples),
        rhs=0,
        details="%d words, %d witnesses; %s"
        % (
            len(words),
            witness_count,
            "; ".join(counterexamples[:5]) if counterexamples else "no counterexamples",
        ),
    )


def verify_right_translation(k_records, k_graph, n):
    """Right translation by every m in M maps each record onto some record."""
    radius = 2.0 * k_graph.epsilon
    passed = True
    details = []
    for record in k_records:
        pts = k_graph.cloud.points[record.member_indices]
        for m in enumerate_M(n):
            translated = pts * np.asarray(m.signs, dtype=float)[None, None, :]
            hit = any(
                _sets_match(
                    translated,
                    k_graph.cloud.points[other.member_indices],
                    radius,
                )
                for other in k_records
            )
            if not hit:
                passed = False
                details.append(
                    "record %d, m=%s unmatched" % (record.record_id, m.signs)
                )
    return VerificationReport(
        theorem_tag="right-translation",
        passed=passed,
        lhs=len(k_records) * len(enumerate_M(n)),
        rhs=len(k_records) * len(enumerate_M(n)),
        details="; ".join(details) if details else "all translates matched",
    )


def verify_pi_compatibility(k_records, flag_records, k_graph, flag_graph):
    """pi maps each K core into a single flag core with < 1% mismatch."""
    radius = 2.0 * flag_graph.epsilon
    passed = True
    details = []
    flag_pts = flag_graph.cloud.points
    for kr in k_records:
        projected = canonical_flag_batch(k_graph.cloud.points[kr.core_indices])
        best = None
        for fr in flag_records:
            frac = _one_sided_mismatch(projected, flag_pts[fr.core_indices], radius)
            if best is None or frac < best[1]:
                best = (fr.record_id, frac)
        if best is None or best[1] >= MISMATCH_BUDGET:
            passed = False
        details.append(
            "K record %d -> flag %s (mismatch %.4f)"
            % (kr.record_id, best[0] if best else None, best[1] if best else 1.0)
        )
    return VerificationReport(
        theorem_tag="pi-compatibility",
        passed=passed,
        lhs=len(k_records),
        rhs=len(k_records),
        details="; ".join(details),
    )
