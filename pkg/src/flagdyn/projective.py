"""Actions on projective space and on the full flag manifold SO(n)/M."""

import numpy as np

from .matdecomp import (
    REGULAR_TOL,
    group_element,
    iwasawa_project,
    regular_split_decompose,
)
from .compact_action import act_on_K, project_to_flag
from .signedperm import enumerate_W


def canonical_dir_batch(vecs):
    """Normalize rows to unit vectors with the largest-magnitude entry positive."""
    vecs = np.asarray(vecs, dtype=float)
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    vecs = vecs / norms
    top = np.argmax(np.abs(vecs), axis=1)
    signs = np.sign(vecs[np.arange(len(vecs)), top])
    signs[signs == 0] = 1.0
    return vecs * signs[:, None]


def canonical_dir(v):
    return canonical_dir_batch(np.asarray(v, dtype=float)[None])[0]


def act_on_projective(g, p):
    """g [x] = [g x] with canonical representative."""
    g = group_element(g)
    return canonical_dir(g @ p)


def act_on_flag(g, f):
    """Induced action on SO(n)/M via a coset representative."""
    return project_to_flag(act_on_K(g, f))


def fixed_points_on_flag(h, tol=REGULAR_TOL):
    """The n! fixed flags of a regular positive h, labeled by Weyl elements.

    The flag of type w is spanned by the eigenvectors in the order
    v_{w(1)}, v_{w(2)}, ..., realized as the coset of kappa applied to the
    column-permuted eigenframe.
    """
    h = group_element(h)
    split = regular_split_decompose(h, tol)
    g = split.conjugator
    out = []
    for w in enumerate_W(h.shape[0]):
        cols = g[:, list(w.perm)].copy()
        if w.sign() < 0:
            cols[:, -1] = -cols[:, -1]
        out.append((w, project_to_flag(iwasawa_project(cols))))
    return out


def fixed_points_on_projective(h, tol=REGULAR_TOL):
    """The n fixed points of h on P^(n-1): the eigenvector directions.

    Returned in descending eigenvalue order, so index 0 is the attractor.
    """
    h = group_element(h)
    split = regular_split_decompose(h, tol)
    return [canonical_dir(split.conjugator[:, i]) for i in range(h.shape[0])]
