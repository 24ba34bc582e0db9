"""Generator presets and their default run parameters.

slplus2 and slplus3 generate subsemigroups of the positive-matrix semigroups
Sl+(2, R) and Sl+(3, R); full-group generates a dense subgroup of SL(2, R).

The slplus2 pair consists of two symmetric positive matrices with attracting
directions 0.5 degrees inside each end of the first-quadrant arc. Under the
induced iterated function system the arc [0.5, 89.5] degrees is a single
overlapping attractor, so the invariant control sets fill the quadrant arcs
up to a collar smaller than the default graph epsilon; the repelling
directions sit 0.5 degrees inside the complementary arcs, which pins the
non-invariant control sets the same way.

The slplus3 pair combines a strongly regular pull toward a positive
direction with a cycled circulant "rotator" whose secondary eigenvalues are
complex: it turns the fiber circle over its attracting line, which is what
glues each fixed-point fiber into whole control sets. Two generators keep
the word count at depth 6 small enough for the default 20000-point cloud.
The repelling classes only recur through chains of small back-jumps, so the
slplus3 preset widens the edge fan (neighbor_cap) and prunes the stray
micro-components that a wide fan produces (min_core_size).
"""

import numpy as np

from .errors import UnsupportedSpaceError


def _rot2(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def _sym2(theta, lam):
    r = _rot2(theta)
    return r @ np.diag([lam, 1.0 / lam]) @ r.T


def _unit_det(mat):
    mat = np.asarray(mat, dtype=float)
    return mat * float(np.linalg.det(mat)) ** (-1.0 / mat.shape[0])


def slplus2_generators():
    theta = np.pi / 320.0
    return [_sym2(theta, 3.0), _sym2(np.pi / 2.0 - theta, 3.0)]


def slplus3_generators():
    pull = _unit_det(
        [[12.0, 6.0, 6.0], [2.0, 4.0, 2.0], [1.0, 1.0, 2.0]]
    )
    rotator = _unit_det(
        [[2.0, 1.5, 0.5], [0.5, 2.0, 1.5], [1.5, 0.5, 2.0]]
    )
    cycle = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    return [pull, _unit_det(cycle @ rotator)]


def full_group_generators():
    g = np.array([[2.0, 1.0], [1.0, 1.0]])
    r = _rot2(1.0)
    return [g, np.linalg.inv(g), r, r.T.copy()]


PRESETS = {
    "slplus2": {
        "generators": slplus2_generators,
        "n": 2,
        "base_space": "PROJ",
        "cloud_count": {"K": 1440, "PROJ": 720, "FLAG": 720},
        "word_depth": 8,
        "seed": 7,
    },
    "slplus3": {
        "generators": slplus3_generators,
        "n": 3,
        "base_space": "FLAG",
        "cloud_count": {"K": 20000, "PROJ": 20000, "FLAG": 20000},
        "word_depth": 6,
        "seed": 7,
        "neighbor_cap": 24,
        "min_core_size": 10,
    },
    "full-group": {
        "generators": full_group_generators,
        "n": 2,
        "base_space": "PROJ",
        "cloud_count": {"K": 360, "PROJ": 180, "FLAG": 180},
        "word_depth": 4,
        "seed": 7,
    },
}


def preset_generators(name):
    if name not in PRESETS:
        raise UnsupportedSpaceError("unknown preset %r" % (name,))
    return PRESETS[name]["generators"]()
