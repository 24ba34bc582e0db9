"""Exact arithmetic for the finite groups M, M* and W of SL(n, R).

M is the group of determinant-one sign diagonals, M* the determinant-one
signed permutation matrices, and W = M*/M the Weyl group, realized here as
plain permutations. Permutations are stored zero-based in one-line notation;
serialization converts to one-based indices.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import NotASubgroupError


def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True, order=True)
class WeylElement:
    """Permutation of {0..n-1}, acting on diagonals by coordinate permutation."""

    perm: tuple

    @property
    def n(self):
        return len(self.perm)

    def compose(self, other):
        # (self . other)(j) = self(other(j))
        return WeylElement(tuple(self.perm[other.perm[j]] for j in range(self.n)))

    def inverse(self):
        inv = [0] * self.n
        for j, i in enumerate(self.perm):
            inv[i] = j
        return WeylElement(tuple(inv))

    def sign(self):
        return _perm_sign(self.perm)

    def matrix(self):
        m = np.zeros((self.n, self.n))
        for j, i in enumerate(self.perm):
            m[i, j] = 1.0
        return m

    def serialize(self):
        return {"perm": [i + 1 for i in self.perm]}


@dataclass(frozen=True, order=True)
class SignVector:
    """Element of M: diagonal of +-1 entries with product +1."""

    signs: tuple

    @property
    def n(self):
        return len(self.signs)

    def compose(self, other):
        return SignVector(tuple(a * b for a, b in zip(self.signs, other.signs)))

    def inverse(self):
        return self

    def matrix(self):
        return np.diag(np.asarray(self.signs, dtype=float))

    def serialize(self):
        return {"signs": list(self.signs)}


@dataclass(frozen=True, order=True)
class SignedPermutation:
    """Element of M*: column j carries signs[j] into row perm[j]."""

    perm: tuple
    signs: tuple

    @property
    def n(self):
        return len(self.perm)

    def compose(self, other):
        # matrix(self) @ matrix(other)
        perm = tuple(self.perm[other.perm[j]] for j in range(self.n))
        signs = tuple(
            other.signs[j] * self.signs[other.perm[j]] for j in range(self.n)
        )
        return SignedPermutation(perm, signs)

    def inverse(self):
        perm = [0] * self.n
        signs = [1] * self.n
        for j in range(self.n):
            perm[self.perm[j]] = j
            signs[self.perm[j]] = self.signs[j]
        return SignedPermutation(tuple(perm), tuple(signs))

    def matrix(self):
        m = np.zeros((self.n, self.n))
        for j in range(self.n):
            m[self.perm[j], j] = float(self.signs[j])
        return m

    def serialize(self):
        return {"perm": [i + 1 for i in self.perm], "signs": list(self.signs)}


def identity_sign_vector(n):
    return SignVector((1,) * n)


def identity_weyl(n):
    return WeylElement(tuple(range(n)))


def identity_signed_permutation(n):
    return SignedPermutation(tuple(range(n)), (1,) * n)


def sign_vector_to_signed_permutation(c):
    return SignedPermutation(tuple(range(c.n)), c.signs)


def enumerate_M(n):
    """All sign vectors with product +1, lexicographic with +1 before -1."""
    out = []
    for signs in itertools.product((1, -1), repeat=n):
        if int(np.prod(signs)) == 1:
            out.append(SignVector(signs))
    return out


def enumerate_Mstar(n):
    """All signed permutations of determinant +1, ordered by (perm, signs)."""
    out = []
    for perm in sorted(itertools.permutations(range(n))):
        psign = _perm_sign(perm)
        for signs in itertools.product((1, -1), repeat=n):
            if psign * int(np.prod(signs)) == 1:
                out.append(SignedPermutation(perm, signs))
    return out


def enumerate_W(n):
    return [WeylElement(p) for p in sorted(itertools.permutations(range(n)))]


def weyl_class(u):
    """Image of u in W = M*/M: the underlying permutation."""
    return WeylElement(u.perm)


def conjugate_C_by_W(w, c):
    """w c w^-1 for w in W and c in M, again a sign vector."""
    signs = [1] * c.n
    for j in range(c.n):
        signs[w.perm[j]] = c.signs[j]
    return SignVector(tuple(signs))


@dataclass(frozen=True)
class CosetTable:
    """Right cosets of a subgroup inside a finite group (lists of elements)."""

    subgroup: tuple
    cosets: tuple

    @property
    def count(self):
        return len(self.cosets)


def check_subgroup(subgroup, group):
    """Raise NotASubgroupError unless subgroup is closed in group."""
    sset = set(subgroup)
    gset = set(group)
    if not sset:
        raise NotASubgroupError("subgroup is empty")
    if not sset <= gset:
        raise NotASubgroupError("subgroup is not contained in the group")
    for a in subgroup:
        if a.inverse() not in sset:
            raise NotASubgroupError("subgroup not closed under inverse")
        for b in subgroup:
            if a.compose(b) not in sset:
                raise NotASubgroupError("subgroup not closed under composition")


def right_cosets(subgroup, group):
    """Partition the group into right cosets H g, in group enumeration order."""
    check_subgroup(subgroup, group)
    order = {g: i for i, g in enumerate(group)}
    assigned = set()
    cosets = []
    for g in group:
        if g in assigned:
            continue
        coset = sorted((h.compose(g) for h in subgroup), key=order.__getitem__)
        for x in coset:
            if x not in order:
                raise NotASubgroupError("group is not closed under composition")
        assigned.update(coset)
        cosets.append(tuple(coset))
    return CosetTable(subgroup=tuple(subgroup), cosets=tuple(cosets))
