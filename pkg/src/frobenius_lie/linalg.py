"""Row-echelon linear algebra over GF and canonical subspaces."""
from __future__ import annotations

import numpy as np

from .errors import ContractViolation
from .field import GF

_CHUNK = 256


def rref(gf: GF, M) -> tuple[np.ndarray, tuple[int, ...]]:
    """Reduced row-echelon form with zero rows dropped, and the pivot columns."""
    M = np.array(M, dtype=np.int64, copy=True)
    if M.ndim != 2:
        raise ContractViolation("rref expects a 2-d matrix")
    rows, cols = M.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            M[[r, piv]] = M[[piv, r]]
        lead = M[r, c]
        if lead != 1:
            M[r, c:] = gf.mul(M[r, c:], gf.inv(lead))
        col = M[:, c].copy()
        col[r] = 0
        idx = np.flatnonzero(col)
        if idx.size:
            M[idx, c:] = gf.sub(M[idx, c:], gf.mul(col[idx, None], M[r, c:][None, :]))
        pivots.append(c)
        r += 1
    return M[:r], tuple(pivots)


def _reduce(gf: GF, V: np.ndarray, basis: np.ndarray, pivots) -> np.ndarray:
    if basis.shape[0] == 0 or V.shape[0] == 0:
        return V
    return gf.sub(V, gf.matmul(V[:, list(pivots)], basis))


def _merge(gf: GF, basis: np.ndarray, pivots: tuple, new: np.ndarray, newpiv: tuple):
    """Combine an RREF basis with RREF rows that vanish on its pivots."""
    if new.shape[0] == 0:
        return basis, pivots
    if basis.shape[0]:
        basis = _reduce(gf, basis, new, newpiv)
    allrows = np.vstack([basis, new])
    allpiv = list(pivots) + list(newpiv)
    order = np.argsort(allpiv, kind="stable")
    return allrows[order], tuple(int(allpiv[i]) for i in order)


def row_space(gf: GF, V, ambient: int | None = None) -> tuple[np.ndarray, tuple[int, ...]]:
    """Canonical RREF basis of the span of the rows of V (chunked for tall inputs)."""
    V = np.asarray(V, dtype=np.int64)
    if V.ndim == 1:
        V = V[None, :]
    if ambient is None:
        ambient = V.shape[1]
    if V.shape[0] <= _CHUNK:
        return rref(gf, V.reshape(-1, ambient))
    basis = np.zeros((0, ambient), dtype=np.int64)
    pivots: tuple[int, ...] = ()
    for s in range(0, V.shape[0], _CHUNK):
        rem = _reduce(gf, V[s:s + _CHUNK], basis, pivots)
        rem = rem[np.any(rem != 0, axis=1)]
        if rem.shape[0] == 0:
            continue
        new, newpiv = rref(gf, rem)
        basis, pivots = _merge(gf, basis, pivots, new, newpiv)
        if len(pivots) == ambient:
            break
    return basis, pivots


def left_kernel(gf: GF, M) -> np.ndarray:
    """Basis (rows) of {x : x M = 0}."""
    M = np.asarray(M, dtype=np.int64)
    m = M.shape[0]
    if M.shape[1] == 0:
        return np.eye(m, dtype=np.int64)
    R, piv = rref(gf, M.T)
    free = [c for c in range(m) if c not in set(piv)]
    K = np.zeros((len(free), m), dtype=np.int64)
    for t, f in enumerate(free):
        K[t, f] = 1
        if R.shape[0]:
            K[t, list(piv)] = gf.neg(R[:, f])
    return K


def solve_left(gf: GF, A, B) -> np.ndarray | None:
    """X with X A = B (one row per row of B), or None if some row is unsolvable.

    The solution uses only the greedy (earliest) independent rows of A.
    """
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if B.ndim == 1:
        B = B[None, :]
    m = A.shape[0]
    aug = np.hstack([A.T, B.T])
    R, piv = rref(gf, aug)
    if any(c >= m for c in piv):
        return None
    X = np.zeros((B.shape[0], m), dtype=np.int64)
    if R.shape[0]:
        X[:, list(piv)] = R[:, m:].T
    return X


def inverse(gf: GF, M) -> np.ndarray:
    M = np.asarray(M, dtype=np.int64)
    d = M.shape[0]
    if M.shape != (d, d):
        raise ContractViolation("inverse of a non-square matrix")
    R, piv = rref(gf, np.hstack([M, np.eye(d, dtype=np.int64)]))
    if tuple(piv[:d]) != tuple(range(d)):
        raise ContractViolation("matrix is singular")
    return R[:d, d:]


def independent_rows(gf: GF, V) -> list[int]:
    """Indices of the greedy lexicographically-first independent rows of V."""
    V = np.asarray(V, dtype=np.int64)
    if V.shape[0] == 0:
        return []
    _, piv = rref(gf, V.T)
    return list(piv)


class Subspace:
    """A subspace of GF^d stored by its canonical RREF basis."""

    __slots__ = ("gf", "ambient", "basis", "pivots", "_hash")

    def __init__(self, gf: GF, ambient: int, basis: np.ndarray, pivots: tuple[int, ...]):
        self.gf = gf
        self.ambient = int(ambient)
        basis = np.asarray(basis, dtype=np.int64)
        basis = basis.reshape(-1, self.ambient) if self.ambient else basis.reshape(0, 0)
        basis.setflags(write=False)
        self.basis = basis
        self.pivots = tuple(int(p) for p in pivots)
        self._hash = None

    @classmethod
    def span(cls, gf: GF, vectors, ambient: int) -> "Subspace":
        V = np.asarray(vectors, dtype=np.int64).reshape(-1, ambient)
        if V.shape[0] == 0:
            return cls.zero(gf, ambient)
        R, piv = row_space(gf, V, ambient)
        return cls(gf, ambient, R, piv)

    @classmethod
    def zero(cls, gf: GF, ambient: int) -> "Subspace":
        return cls(gf, ambient, np.zeros((0, ambient), dtype=np.int64), ())

    @classmethod
    def full(cls, gf: GF, ambient: int) -> "Subspace":
        return cls(gf, ambient, np.eye(ambient, dtype=np.int64), tuple(range(ambient)))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def codim(self) -> int:
        return self.ambient - self.dim

    def complement_coords(self) -> list[int]:
        piv = set(self.pivots)
        return [c for c in range(self.ambient) if c not in piv]

    def _as_rows(self, V) -> np.ndarray:
        V = np.asarray(V, dtype=np.int64)
        if V.ndim == 1:
            V = V[None, :]
        if V.shape[1] != self.ambient:
            raise ContractViolation(f"vector length {V.shape[1]} != ambient {self.ambient}")
        return V

    def reduce(self, V) -> np.ndarray:
        """Canonical remainder of each row modulo this subspace."""
        return _reduce(self.gf, self._as_rows(V), self.basis, self.pivots)

    def contains(self, V) -> bool:
        V = self._as_rows(V)
        if V.shape[0] == 0:
            return True
        return not np.any(self.reduce(V))

    def coords(self, V) -> np.ndarray:
        """Coordinates w.r.t. the echelon basis; raises if a row is outside."""
        V = self._as_rows(V)
        if not self.contains(V):
            raise ContractViolation("vector does not lie in the subspace")
        return V[:, list(self.pivots)]

    def __add__(self, other: "Subspace") -> "Subspace":
        self._check(other)
        if other.dim == 0:
            return self
        if self.dim == 0:
            return other
        rem = self.reduce(other.basis)
        rem = rem[np.any(rem != 0, axis=1)]
        if rem.shape[0] == 0:
            return self
        new, newpiv = rref(self.gf, rem)
        B, piv = _merge(self.gf, self.basis, self.pivots, new, newpiv)
        return Subspace(self.gf, self.ambient, B, piv)

    def add_vectors(self, V) -> "Subspace":
        V = self._as_rows(V)
        if V.shape[0] == 0:
            return self
        rem = self.reduce(V)
        rem = rem[np.any(rem != 0, axis=1)]
        if rem.shape[0] == 0:
            return self
        new, newpiv = row_space(self.gf, rem, self.ambient)
        B, piv = _merge(self.gf, self.basis, self.pivots, new, newpiv)
        return Subspace(self.gf, self.ambient, B, piv)

    def intersect(self, other: "Subspace") -> "Subspace":
        self._check(other)
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.gf, self.ambient)
        K = left_kernel(self.gf, np.vstack([self.basis, other.basis]))
        if K.shape[0] == 0:
            return Subspace.zero(self.gf, self.ambient)
        return Subspace.span(self.gf, self.gf.matmul(K[:, : self.dim], self.basis), self.ambient)

    def issubspace(self, other: "Subspace") -> bool:
        self._check(other)
        return other.contains(self.basis)

    def image(self, M) -> "Subspace":
        M = np.asarray(M, dtype=np.int64)
        if self.dim == 0:
            return Subspace.zero(self.gf, M.shape[1])
        return Subspace.span(self.gf, self.gf.matmul(self.basis, M), M.shape[1])

    def _check(self, other: "Subspace"):
        if other.gf != self.gf or other.ambient != self.ambient:
            raise ContractViolation("subspaces live in different spaces")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.gf == other.gf
            and self.ambient == other.ambient
            and self.basis.shape == other.basis.shape
            and bool(np.array_equal(self.basis, other.basis))
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.gf, self.ambient, self.basis.tobytes()))
        return self._hash

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"


def kernel_space(gf: GF, M, domain: Subspace | None = None) -> Subspace:
    """{x in domain : x M = 0}; domain defaults to the whole space."""
    M = np.asarray(M, dtype=np.int64)
    d = M.shape[0]
    if domain is None:
        return Subspace.span(gf, left_kernel(gf, M), d)
    if domain.dim == 0:
        return domain
    K = left_kernel(gf, gf.matmul(domain.basis, M))
    if K.shape[0] == 0:
        return Subspace.zero(gf, d)
    return Subspace.span(gf, gf.matmul(K, domain.basis), d)
