"""The action of SL(n, R) on SO(n) and the projection to the flag manifold.

The group acts by delta(g, k) = kappa(g k). Right translation by the sign
group M commutes with the action and generates the fibers of the projection
pi : SO(n) -> SO(n)/M, stored via a canonical coset representative.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergenceError, NotRegularError
from .matdecomp import (
    REGULAR_TOL,
    group_element,
    iwasawa_project,
    regular_split_decompose,
)
from .signedperm import enumerate_Mstar

FIXED_POINT_TOL = 1e-8


def act_on_K(g, k):
    """delta(g, k) = kappa(g k)."""
    g = group_element(g)
    return iwasawa_project(g @ k)


def right_translate(k, m):
    """k . m for a sign vector m: scale column j by signs[j]."""
    return k * np.asarray(m.signs, dtype=float)[None, :]


def canonical_flag_batch(frames):
    """Canonical M-coset representative for a stack of SO(n) frames.

    Each column sign is flipped to make its largest-magnitude entry positive;
    if the flips have odd parity, the column with the smallest maximum
    magnitude is flipped back so the representative stays in SO(n).
    """
    frames = np.ascontiguousarray(frames)
    batch, n, _ = frames.shape
    absf = np.abs(frames)
    top = np.argmax(absf, axis=1)
    rows = np.arange(batch)[:, None]
    cols = np.arange(n)[None, :]
    signs = np.sign(frames[rows, top, cols])
    signs[signs == 0] = 1.0
    parity = np.prod(signs, axis=1)
    colmax = absf.max(axis=1)
    weakest = np.argmin(colmax, axis=1)
    odd = parity < 0
    signs[odd, weakest[odd]] *= -1.0
    return frames * signs[:, None, :]


def project_to_flag(k):
    """Canonical representative of the coset k M."""
    return canonical_flag_batch(k[None])[0]


@dataclass(frozen=True)
class FixedPointOnK:
    """Fixed point kappa(g u) of a regular chamber, typed by u in M*."""

    point: np.ndarray
    u_label: object
    chamber: object


def fixed_points_on_K(h, tol=REGULAR_TOL):
    """All 2^(n-1) n! fixed points of delta(h, .) for a regular positive h.

    The points are kappa(g u) for u in M*, with g the eigenframe of h.
    Each returned point is re-verified fixed under the action within 1e-8.
    """
    h = group_element(h)
    split = regular_split_decompose(h, tol)
    g = split.conjugator
    out = []
    for u in enumerate_Mstar(h.shape[0]):
        point = iwasawa_project(g @ u.matrix())
        moved = iwasawa_project(h @ point)
        if np.linalg.norm(moved - point) > FIXED_POINT_TOL:
            raise NotRegularError("fixed point drifted beyond tolerance")
        out.append(FixedPointOnK(point=point, u_label=u, chamber=split))
    return out


def iterate_to_attractor(h, k0, max_steps=500, tol=1e-6):
    """Iterate delta(h, .) from k0 until within tol of a single fixed point.

    Raises NoConvergenceError if max_steps elapse or two fixed points are
    simultaneously within tol (k0 sits near an unstable set).
    """
    fps = fixed_points_on_K(h)
    points = np.stack([fp.point for fp in fps])
    k = np.array(k0, dtype=float)
    h = group_element(h)
    for step in range(max_steps + 1):
        dists = np.linalg.norm(points - k[None], axis=(1, 2))
        order = np.argsort(dists)
        if dists[order[0]] <= tol:
            if len(order) > 1 and dists[order[1]] <= tol:
                raise NoConvergenceError("ambiguous limit between two fixed points")
            return fps[int(order[0])], step
        if step == max_steps:
            break
        k = iwasawa_project(h @ k)
    raise NoConvergenceError("no fixed point reached in %d steps" % max_steps)
