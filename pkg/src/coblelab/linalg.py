"""Dense exact linear algebra: rank, nullspace and solving over any FieldSpec.

Prime fields go through a vectorised numpy elimination (int64, p < 2^31 keeps
every product below 2^62).  The rationals use fraction-free (Bareiss)
elimination; extension fields fall back to plain Python field operations.
Pivoting is always "first row with a nonzero entry in the current column", so
results do not depend on anything but the input.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from coblelab.fields import FieldError, FieldSpec

__all__ = ["MatrixF", "nullspace", "rank", "solve", "nullspace_mod_p", "echelon_mod_p"]


class MatrixF:
    """Dense row-major matrix of raw field values."""

    def __init__(self, rows, field: FieldSpec, raw: bool = False):
        """``raw=True`` takes entries as canonical raw values (needed for extension codes)."""
        self.field = field
        if isinstance(rows, np.ndarray) and field.kind == "prime":
            self._np = np.asarray(rows, dtype=np.int64) % field.p
            self.rows, self.cols = self._np.shape
            self._list = None
        else:
            self._list = [list(row) if raw else [field.coerce(x) for x in row] for row in rows]
            self.rows = len(self._list)
            self.cols = len(self._list[0]) if self._list else 0
            if any(len(r) != self.cols for r in self._list):
                raise ValueError("ragged matrix")
            self._np = None

    def to_numpy(self) -> np.ndarray:
        if self._np is None:
            if self.field.kind != "prime":
                raise FieldError("numpy view only for prime fields")
            self._np = np.array(self._list, dtype=np.int64).reshape(self.rows, self.cols)
        return self._np

    def to_lists(self) -> list[list]:
        if self._list is None:
            self._list = [[int(x) for x in row] for row in self._np]
        return self._list

    def __matmul__(self, v: Sequence):
        f = self.field
        return [f.sum(f.mul(a, b) for a, b in zip(row, v)) for row in self.to_lists()]

    def rank(self) -> int:
        return len(self._echelon()[1])

    def nullspace(self) -> list[list]:
        """Canonical basis: one vector per free column, with a 1 in that column."""
        f = self.field
        if self.cols == 0:
            return []
        if f.kind == "prime":
            return [list(map(int, v)) for v in nullspace_mod_p(self.to_numpy(), f.p)]
        R, piv = self._echelon(reduced=True)
        free = [j for j in range(self.cols) if j not in set(piv)]
        basis = []
        for j in free:
            v = [f.zero()] * self.cols
            v[j] = f.one()
            for i, pc in enumerate(piv):
                v[pc] = f.neg(R[i][j])
            basis.append(v)
        return basis

    def solve(self, b: Sequence) -> list:
        """Some x with M x = b; raises if the system is inconsistent."""
        f = self.field
        b = [f.coerce(x) for x in b]
        if len(b) != self.rows:
            raise ValueError("right-hand side has the wrong length")
        aug = MatrixF([list(row) + [bi] for row, bi in zip(self.to_lists(), b)], f, raw=True)
        R, piv = aug._echelon(reduced=True)
        if piv and piv[-1] == self.cols:
            raise FieldError("inconsistent linear system")
        x = [f.zero()] * self.cols
        for i, pc in enumerate(piv):
            x[pc] = R[i][self.cols]
        return x

    # -- elimination back ends --------------------------------------------
    def _echelon(self, reduced: bool = False):
        f = self.field
        if f.kind == "prime":
            R, piv = echelon_mod_p(self.to_numpy(), f.p, reduced=reduced)
            return R.tolist(), piv
        if f.kind == "rational":
            return _echelon_bareiss(self.to_lists(), reduced)
        return _echelon_generic(self.to_lists(), f, reduced)


def echelon_mod_p(M: np.ndarray, p: int, reduced: bool = False) -> tuple[np.ndarray, list[int]]:
    """Row echelon form of M mod p (pivots scaled to 1); reduced form on request."""
    if not reduced and min(np.shape(M)) > 192:
        return _blocked_echelon_mod_p(np.asarray(M), p)
    M = np.array(M, dtype=np.int64) % p
    rows, cols = M.shape
    piv: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            M[[r, i]] = M[[i, r]]
        inv = pow(int(M[r, c]), -1, p)
        M[r, c:] = M[r, c:] * inv % p
        lo = 0 if reduced else r + 1
        col = M[lo:, c].copy()
        if not reduced:
            targets = np.flatnonzero(col)
        else:
            col[r - lo] = 0
            targets = np.flatnonzero(col)
        if targets.size:
            rowsel = targets + lo
            M[rowsel, c:] = (M[rowsel, c:] - np.outer(col[targets], M[r, c:]) % p) % p
        piv.append(c)
        r += 1
    return M[:r], piv


def _blocked_echelon_mod_p(M: np.ndarray, p: int, block: int = 96) -> tuple[np.ndarray, list[int]]:
    """Forward echelon form (unit pivots) with BLAS trailing updates.

    Each panel of ``block`` columns is eliminated exactly in int64 while the
    row operations are recorded; the trailing columns then receive them as a
    short replay on the pivot rows plus one float64 product for the rest.
    Entries stay below p, so that product is bounded by block * p^2 < 2^53.
    """
    if block * (p - 1) ** 2 >= 2**53:
        return echelon_mod_p(M, p)
    A = np.array(M, dtype=np.int64) % p
    rows, cols = A.shape
    piv: list[int] = []
    r = 0
    c0 = 0
    while c0 < cols and r < rows:
        c1 = min(c0 + block, cols)
        P = A[r:, c0:c1]
        T = A[r:, c1:]
        nloc = P.shape[0]
        invs: list[int] = []
        L = np.zeros((nloc, min(block, nloc)), dtype=np.int64)  # multipliers, column s = step s
        k = 0
        for j in range(c1 - c0):
            if k == nloc:
                break
            nz = np.flatnonzero(P[k:, j])
            if nz.size == 0:
                continue
            i = k + int(nz[0])
            if i != k:
                P[[k, i]] = P[[i, k]]
                T[[k, i]] = T[[i, k]]
                L[[k, i]] = L[[i, k]]
            inv = pow(int(P[k, j]), -1, p)
            P[k, j:] = P[k, j:] * inv % p
            col = P[k + 1:, j].copy()
            if col.any():
                P[k + 1:, j:] = (P[k + 1:, j:] - np.outer(col, P[k, j:]) % p) % p
            L[k + 1:, k] = col
            invs.append(inv)
            piv.append(c0 + j)
            k += 1
        if k and T.shape[1]:
            for s in range(k):
                T[s] = T[s] * invs[s] % p
                if s + 1 < k:
                    T[s + 1:k] = (T[s + 1:k] - np.outer(L[s + 1:k, s], T[s]) % p) % p
            if nloc > k:
                prod = L[k:, :k].astype(np.float64) @ T[:k].astype(np.float64)
                T[k:] = (T[k:] - np.fmod(prod, p).astype(np.int64)) % p
        r += k
        c0 = c1
    return A[:r], piv


def nullspace_mod_p(M: np.ndarray, p: int) -> list[np.ndarray]:
    """Canonical nullspace basis from a forward elimination plus back substitution."""
    M = np.asarray(M, dtype=np.int64)
    cols = M.shape[1]
    R, piv = _blocked_echelon_mod_p(M, p)
    pivset = set(piv)
    free = [j for j in range(cols) if j not in pivset]
    basis = []
    for j in free:
        v = np.zeros(cols, dtype=np.int64)
        v[j] = 1
        for i in range(len(piv) - 1, -1, -1):
            pc = piv[i]
            s = int(R[i, pc + 1:] @ v[pc + 1:] % p) if pc + 1 < cols else 0
            v[pc] = (-s) % p
        basis.append(v)
    return basis


def _echelon_generic(rows: list[list], f: FieldSpec, reduced: bool):
    M = [list(r) for r in rows]
    nrows = len(M)
    ncols = len(M[0]) if M else 0
    piv = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        i = next((i for i in range(r, nrows) if not f.is_zero(M[i][c])), None)
        if i is None:
            continue
        M[r], M[i] = M[i], M[r]
        inv = f.inv(M[r][c])
        M[r] = [f.mul(x, inv) for x in M[r]]
        for i2 in range(0 if reduced else r + 1, nrows):
            if i2 != r and not f.is_zero(M[i2][c]):
                fac = M[i2][c]
                M[i2] = [f.sub(x, f.mul(fac, y)) for x, y in zip(M[i2], M[r])]
        piv.append(c)
        r += 1
    return M[:r], piv


def _echelon_bareiss(rows: list[list], reduced: bool):
    """Fraction-free forward pass on an integer copy, then exact rational cleanup."""
    M = []
    for row in rows:
        d = lcm(*[Fraction(x).denominator for x in row]) if row else 1
        M.append([int(Fraction(x) * d) for x in row])
    nrows = len(M)
    ncols = len(M[0]) if M else 0
    piv = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        i = next((i for i in range(r, nrows) if M[i][c] != 0), None)
        if i is None:
            continue
        M[r], M[i] = M[i], M[r]
        pv = M[r][c]
        for i2 in range(r + 1, nrows):
            a = M[i2][c]
            M[i2] = [(pv * x - a * y) // prev for x, y in zip(M[i2], M[r])]
        prev = pv
        piv.append(c)
        r += 1
    E = [[Fraction(x, row[pc]) for x in row] for row, pc in zip(M[:r], piv)]
    if reduced:
        for k in range(r - 1, -1, -1):
            pc = piv[k]
            for i2 in range(k):
                a = E[i2][pc]
                if a:
                    E[i2] = [x - a * y for x, y in zip(E[i2], E[k])]
    return E, piv


def nullspace(M: MatrixF) -> list[list]:
    return M.nullspace()


def rank(M: MatrixF) -> int:
    return M.rank()


def solve(M: MatrixF, b: Sequence) -> list:
    return M.solve(b)
