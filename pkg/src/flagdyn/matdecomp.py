"""Dense small-matrix decompositions: Iwasawa (QR) and regular eigensplits.

Conventions. The Iwasawa factorization g = k a n uses the QR decomposition
with the R diagonal forced positive, which pins the unique K x A x N
factorization of SL(n, R). Regular splits sort eigenvalues in descending
order and canonicalize eigenvector signs so repeated runs are reproducible.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ComplexSpectrumError,
    InvalidElementError,
    NotRegularError,
    NumericalRankError,
)

DET_EXACT_TOL = 1e-9
DET_RESCALE_TOL = 1e-4
RANK_TOL = 1e-14
REGULAR_TOL = 1e-6


def group_element(entries):
    """Validate a matrix as an element of SL(n, R) and return it as ndarray.

    Determinant drift in (1e-9, 1e-4] relative to the entry scale is fixed by
    rescaling with det^(-1/n) and a warning; anything worse is rejected.
    """
    g = np.asarray(entries, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise InvalidElementError("expected a square matrix, got shape %s" % (g.shape,))
    n = g.shape[0]
    if n < 2:
        raise InvalidElementError("matrix size must be at least 2")
    if not np.all(np.isfinite(g)):
        raise InvalidElementError("matrix has non-finite entries")
    d = float(np.linalg.det(g))
    if d <= 0.0:
        raise InvalidElementError("determinant must be positive, got %g" % d)
    scale = max(1.0, float(np.abs(g).max()))
    err = abs(d - 1.0)
    if err <= DET_EXACT_TOL * scale:
        return g
    if err <= DET_RESCALE_TOL * scale:
        warnings.warn(
            "determinant %.3e off unity, rescaling" % d, RuntimeWarning, stacklevel=2
        )
        return g * d ** (-1.0 / n)
    raise InvalidElementError("determinant %g too far from 1" % d)


@dataclass(frozen=True)
class IwasawaTriple:
    """Factors of g = k a n with k in SO(n), a positive diagonal, n unit upper."""

    k: np.ndarray
    a: np.ndarray
    nfac: np.ndarray


@dataclass(frozen=True)
class RegularSplit:
    """Eigenframe of a regular element: h = conjugator exp(diag(logs)) conjugator^-1."""

    conjugator: np.ndarray
    logs: np.ndarray

    def reconstruct(self):
        v = self.conjugator
        return v @ np.diag(np.exp(self.logs)) @ np.linalg.inv(v)


def iwasawa_decompose(g):
    """Unique Iwasawa factorization of g with positive diagonal A part."""
    g = group_element(g)
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r)
    if np.any(np.abs(diag) <= RANK_TOL):
        raise NumericalRankError("QR diagonal entry below %g" % RANK_TOL)
    s = np.sign(diag)
    q = q * s
    r = r * s[:, None]
    a_diag = np.diagonal(r).copy()
    a = np.diag(a_diag)
    nfac = r / a_diag[:, None]
    return IwasawaTriple(k=q, a=a, nfac=nfac)


def iwasawa_project(g):
    """K component kappa(g) of the Iwasawa decomposition."""
    return iwasawa_decompose(g).k


def kappa_batch(mats):
    """kappa applied along the first axis of a stack of matrices.

    Inputs are assumed to have positive determinant; no per-item validation.
    """
    q, r = np.linalg.qr(mats)
    s = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    return q * s[:, None, :]


def regular_split_decompose(h, tol=REGULAR_TOL):
    """Eigendecomposition of a regular element with real positive spectrum.

    Eigenvalues come out strictly descending with zero-sum logs. Eigenvector
    columns are unit norm with the largest-magnitude entry positive; if that
    leaves the frame with negative determinant the last column is negated,
    and a final uniform rescale makes the determinant exactly one.
    """
    h = group_element(h)
    n = h.shape[0]
    vals, vecs = np.linalg.eig(h)
    scale = float(np.abs(vals).max())
    if np.any(np.abs(vals.imag) > tol * scale):
        raise ComplexSpectrumError("eigenvalues have imaginary parts")
    vals = vals.real
    vecs = vecs.real
    if np.any(vals <= 0.0):
        raise NotRegularError("spectrum is not positive")
    order = np.argsort(-vals)
    vals = vals[order]
    vecs = vecs[:, order]
    logs = np.log(vals)
    if np.min(-np.diff(logs)) <= tol:
        raise NotRegularError("log-eigenvalue gap below tolerance %g" % tol)
    logs = logs - logs.mean()
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    top = np.argmax(np.abs(vecs), axis=0)
    sign = np.sign(vecs[top, np.arange(n)])
    vecs = vecs * sign
    d = float(np.linalg.det(vecs))
    if d < 0.0:
        vecs = vecs.copy()
        vecs[:, -1] = -vecs[:, -1]
        d = -d
    vecs = vecs * d ** (-1.0 / n)
    return RegularSplit(conjugator=vecs, logs=logs)


def is_regular_positive(h, tol=REGULAR_TOL):
    """True iff regular_split_decompose(h, tol) would succeed."""
    try:
        regular_split_decompose(h, tol)
    except (ComplexSpectrumError, NotRegularError, InvalidElementError):
        return False
    return True
