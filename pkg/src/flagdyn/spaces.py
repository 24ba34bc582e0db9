"""Sample clouds on SO(n), the flag manifold and projective space.

Clouds are deterministic given (space_tag, n, count, seed). Distances are
Euclidean on the stored representatives: Frobenius for SO(n) frames, chordal
for projective directions (converted to line angle for P^1, where the spec
of the reach graph is stated in angles). Quotient spaces are indexed through
KD-trees holding all translates of each representative, so nearest-neighbor
queries respect the quotient metric.
"""

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import UnsupportedSpaceError
from .compact_action import canonical_flag_batch
from .matdecomp import kappa_batch
from .projective import canonical_dir_batch
from .signedperm import enumerate_M

SPACE_TAGS = ("K", "FLAG", "PROJ")


def _workers():
    try:
        return int(os.environ["FLAGDYN_THREADS"])
    except (KeyError, ValueError):
        return -1


@dataclass
class SampleCloud:
    space_tag: str
    n: int
    points: np.ndarray
    seed: int
    count: int


def _haar_so3(count, rng):
    q = rng.normal(size=(count, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q.T
    out = np.empty((count, 3, 3))
    out[:, 0, 0] = 1 - 2 * (y * y + z * z)
    out[:, 0, 1] = 2 * (x * y - z * w)
    out[:, 0, 2] = 2 * (x * z + y * w)
    out[:, 1, 0] = 2 * (x * y + z * w)
    out[:, 1, 1] = 1 - 2 * (x * x + z * z)
    out[:, 1, 2] = 2 * (y * z - x * w)
    out[:, 2, 0] = 2 * (x * z - y * w)
    out[:, 2, 1] = 2 * (y * z + x * w)
    out[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return out


def _haar_so4(count, rng):
    mats = rng.normal(size=(count, 4, 4))
    q = kappa_batch(mats)
    dets = np.linalg.det(q)
    flip = dets < 0
    q[flip, :, -1] = -q[flip, :, -1]
    return q


def _so_n_samples(n, count, seed):
    rng = np.random.default_rng(seed)
    if n == 2:
        theta = 2.0 * np.pi * np.arange(count) / count
        out = np.empty((count, 2, 2))
        out[:, 0, 0] = np.cos(theta)
        out[:, 0, 1] = -np.sin(theta)
        out[:, 1, 0] = np.sin(theta)
        out[:, 1, 1] = np.cos(theta)
        return out
    if n == 3:
        return _haar_so3(count, rng)
    if n == 4:
        return _haar_so4(count, rng)
    raise UnsupportedSpaceError("SO(n) sampling supported only for n <= 4")


def _frames_to_quat(frames):
    """Unit quaternions (one sign choice) for a batch of SO(3) frames."""
    m = np.asarray(frames)
    w2 = 1.0 + m[:, 0, 0] + m[:, 1, 1] + m[:, 2, 2]
    x2 = 1.0 + m[:, 0, 0] - m[:, 1, 1] - m[:, 2, 2]
    y2 = 1.0 - m[:, 0, 0] + m[:, 1, 1] - m[:, 2, 2]
    z2 = 1.0 - m[:, 0, 0] - m[:, 1, 1] + m[:, 2, 2]
    choice = np.argmax(np.stack([w2, x2, y2, z2], axis=1), axis=1)
    q = np.empty((len(m), 4))
    for case, big in enumerate((w2, x2, y2, z2)):
        sel = choice == case
        if not sel.any():
            continue
        s = np.sqrt(np.maximum(big[sel], 0.0))
        inv = 0.25 / np.maximum(s * 0.5, 1e-300)
        a = m[sel]
        if case == 0:
            q[sel, 0] = 0.5 * s
            q[sel, 1] = (a[:, 2, 1] - a[:, 1, 2]) * inv
            q[sel, 2] = (a[:, 0, 2] - a[:, 2, 0]) * inv
            q[sel, 3] = (a[:, 1, 0] - a[:, 0, 1]) * inv
        elif case == 1:
            q[sel, 1] = 0.5 * s
            q[sel, 0] = (a[:, 2, 1] - a[:, 1, 2]) * inv
            q[sel, 2] = (a[:, 0, 1] + a[:, 1, 0]) * inv
            q[sel, 3] = (a[:, 0, 2] + a[:, 2, 0]) * inv
        elif case == 2:
            q[sel, 2] = 0.5 * s
            q[sel, 0] = (a[:, 0, 2] - a[:, 2, 0]) * inv
            q[sel, 1] = (a[:, 0, 1] + a[:, 1, 0]) * inv
            q[sel, 3] = (a[:, 1, 2] + a[:, 2, 1]) * inv
        else:
            q[sel, 3] = 0.5 * s
            q[sel, 0] = (a[:, 1, 0] - a[:, 0, 1]) * inv
            q[sel, 1] = (a[:, 0, 2] + a[:, 2, 0]) * inv
            q[sel, 2] = (a[:, 1, 2] + a[:, 2, 1]) * inv
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def _quat_right_units(q):
    """Right translates q, q i, q j, q k (the lifts of the M translates)."""
    w, x, y, z = q.T
    return np.stack(
        [
            q,
            np.stack([-x, w, z, -y], axis=1),
            np.stack([-y, -z, w, x], axis=1),
            np.stack([-z, y, -x, w], axis=1),
        ],
        axis=1,
    )


def _dedupe(points):
    flat = np.round(points.reshape(len(points), -1), 9)
    _, keep = np.unique(flat, axis=0, return_index=True)
    keep.sort()
    return points[keep]


def sample_space(space_tag, n, count, seed):
    """Quasi-uniform deterministic sample of one of the three spaces."""
    if space_tag not in SPACE_TAGS:
        raise UnsupportedSpaceError("unknown space tag %r" % (space_tag,))
    if count < 1:
        raise UnsupportedSpaceError("count must be at least 1")
    if n > 4:
        raise UnsupportedSpaceError("spaces supported only for n <= 4")
    if space_tag == "K":
        pts = _so_n_samples(n, count, seed)
    elif space_tag == "FLAG":
        pts = canonical_flag_batch(_so_n_samples(n, count, seed))
    else:
        if n == 2:
            theta = np.pi * np.arange(count) / count
            pts = canonical_dir_batch(np.stack([np.cos(theta), np.sin(theta)], axis=1))
        else:
            pts = canonical_dir_batch(_so_n_samples(n, count, seed)[:, :, 0])
    pts = _dedupe(pts)
    return SampleCloud(space_tag=space_tag, n=n, points=pts, seed=seed, count=len(pts))


def project_cloud(cloud, space_tag, dedupe=False):
    """Projection of a K cloud; index-aligned unless dedupe drops repeats.

    Structured K clouds (the equispaced circle) project onto each quotient
    point several times; dedupe=True keeps one representative each.
    """
    if cloud.space_tag != "K":
        raise UnsupportedSpaceError("can only project a K cloud")
    if space_tag == "FLAG":
        pts = canonical_flag_batch(cloud.points)
    elif space_tag == "PROJ":
        pts = canonical_dir_batch(cloud.points[:, :, 0])
    else:
        raise UnsupportedSpaceError("projection target must be FLAG or PROJ")
    if dedupe:
        pts = _dedupe(pts)
    return SampleCloud(
        space_tag=space_tag, n=cloud.n, points=pts, seed=cloud.seed, count=len(pts)
    )


@dataclass
class SpaceIndex:
    """KD-tree over all quotient translates of a cloud's representatives."""

    cloud: SampleCloud
    translates: int = field(init=False)
    tree: cKDTree = field(init=False)

    def __post_init__(self):
        pts = self.cloud.points
        count = len(pts)
        self._quat = self.cloud.n == 3 and self.cloud.space_tag in ("K", "FLAG")
        if self._quat:
            q = _frames_to_quat(pts)
            if self.cloud.space_tag == "FLAG":
                stack = _quat_right_units(q)
            else:
                stack = q.reshape(count, 1, 4)
            stack = np.concatenate([stack, -stack], axis=1)
        elif self.cloud.space_tag == "K":
            stack = pts.reshape(count, 1, -1)
        elif self.cloud.space_tag == "FLAG":
            signs = np.array(
                [m.signs for m in enumerate_M(self.cloud.n)], dtype=float
            )
            stack = (pts[:, None, :, :] * signs[None, :, None, :]).reshape(
                count, len(signs), -1
            )
        else:
            stack = np.stack([pts, -pts], axis=1)
        self.translates = stack.shape[1]
        self.tree = cKDTree(stack.reshape(count * self.translates, -1))
        self._angle = self.cloud.space_tag == "PROJ" and self.cloud.n == 2
        self._neighbor_cache = {}

    def _embed(self, points):
        if self._quat:
            return _frames_to_quat(points)
        return np.asarray(points).reshape(len(points), -1)

    def _to_metric(self, d):
        if self._angle:
            return 2.0 * np.arcsin(np.clip(np.asarray(d) / 2.0, 0.0, 1.0))
        if self._quat:
            d = np.asarray(d)
            dd = np.clip(d, 0.0, np.sqrt(2.0))
            return np.where(
                np.isfinite(d), np.sqrt(8.0 * dd * dd - 2.0 * dd ** 4), np.inf
            )
        return d

    def _to_chord(self, eps):
        if self._angle:
            return 2.0 * np.sin(min(eps, np.pi) / 2.0)
        if self._quat:
            half = min(eps * eps / 2.0, 4.0)
            return float(np.sqrt(2.0 - np.sqrt(4.0 - half)))
        return eps

    def nearest(self, points):
        """Nearest cloud index and quotient distance for each query point."""
        flat = self._embed(points)
        dist, row = self.tree.query(flat, workers=_workers())
        return row // self.translates, self._to_metric(dist)

    def nearest_k(self, points, k, within=None):
        """Up to k nearest distinct cloud indices per query, with distances.

        Entries beyond the number of reachable distinct indices are padded
        with index -1 and distance inf. Results are sorted by distance.
        Passing within prunes the search to that quotient radius.

        Distinct translates of one representative sit at least sqrt(2) apart
        in the embedding, so a search bounded well inside that separation
        cannot see the same owner twice and k candidates suffice; otherwise
        the search widens to k per translate before deduplication.
        """
        flat = self._embed(points)
        total = self.cloud.count * self.translates
        bound = np.inf if within is None else self._to_chord(within)
        if 2.0 * bound < np.sqrt(2.0):
            kk = min(k, total)
        else:
            kk = min(k * self.translates, total)
        dist, row = self.tree.query(
            flat, k=kk, distance_upper_bound=bound, workers=_workers()
        )
        if kk == 1:
            dist = dist[:, None]
            row = row[:, None]
        missing = row == total
        owner = np.where(missing, -1, row // self.translates)
        if self.translates == 1:
            return owner[:, :k], self._to_metric(dist[:, :k])
        dup = missing.copy()
        for j in range(1, kk):
            dup[:, j] |= (owner[:, :j] == owner[:, j : j + 1]).any(axis=1)
        pos = np.cumsum(~dup, axis=1) - 1
        keep = ~dup & (pos < k)
        rows = np.nonzero(keep)[0]
        out_idx = np.full((len(flat), k), -1, dtype=np.int64)
        out_dist = np.full((len(flat), k), np.inf)
        out_idx[rows, pos[keep]] = owner[keep]
        out_dist[rows, pos[keep]] = dist[keep]
        return out_idx, self._to_metric(out_dist)

    def within_ball(self, points, eps):
        """(query_row, cloud_index) pairs for every match within eps."""
        flat = self._embed(points)
        balls = self.tree.query_ball_point(
            flat, self._to_chord(eps), workers=_workers(), return_sorted=False
        )
        lens = np.fromiter((len(b) for b in balls), dtype=np.int64, count=len(balls))
        src = np.repeat(np.arange(len(balls)), lens)
        if len(src) == 0:
            return src, src
        hits = np.concatenate([np.asarray(b, dtype=np.int64) for b in balls])
        codes = np.unique(src * self.cloud.count + hits // self.translates)
        return codes // self.cloud.count, codes % self.cloud.count

    def dispersion(self):
        """Max over the cloud of the nearest-neighbor quotient distance."""
        count = self.cloud.count
        flat = self._embed(self.cloud.points)
        k = 2 * self.translates + 1
        dist, row = self.tree.query(flat, k=min(k, count * self.translates),
                                    workers=_workers())
        owner = row // self.translates
        other = owner != np.arange(count)[:, None]
        masked = np.where(other, dist, np.inf)
        return float(self._to_metric(masked.min(axis=1)).max())

    def neighbors_within(self, eps):
        """List, per cloud index, of cloud indices within quotient distance eps."""
        key = round(float(eps), 15)
        if key not in self._neighbor_cache:
            count = self.cloud.count
            flat = self._embed(self.cloud.points)
            balls = self.tree.query_ball_point(
                flat, self._to_chord(eps), workers=_workers()
            )
            self._neighbor_cache[key] = [
                np.unique(np.asarray(rows, dtype=np.int64) // self.translates)
                for rows in balls
            ]
        return self._neighbor_cache[key]

    def fatten(self, mask, eps):
        """Indicator of all cloud points within eps of the masked subset."""
        nbrs = self.neighbors_within(eps)
        out = np.array(mask, dtype=bool)
        for i in np.flatnonzero(mask):
            out[nbrs[i]] = True
        return out


def apply_word(wmat, cloud):
    """Image of every cloud point under one group element, canonicalized."""
    if cloud.space_tag == "K":
        return kappa_batch(np.matmul(wmat, cloud.points))
    if cloud.space_tag == "FLAG":
        return canonical_flag_batch(kappa_batch(np.matmul(wmat, cloud.points)))
    return canonical_dir_batch(cloud.points @ wmat.T)
