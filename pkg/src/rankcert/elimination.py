"""Gaussian elimination over prime fields.

Two PLUQ variants live here.  `pluq_crp` pivots on the first usable
column and only ever swaps rows, which makes the column rank profile
readable from the factorization.  `pluq_rpm` pivots lexicographically
and applies rotations instead of transpositions, which preserves enough
of the original row/column order that the whole rank profile matrix is
readable.  Both return the same dataclass.

Also here: the no-pivoting LU used once a matrix is known to have
generic rank profile, the LDUP factorization built on top of it, dense
triangular solves, and the random instance generators shared by tests
and the command line tool.
"""

from __future__ import annotations

from dataclasses import dataclass
import random

import numpy as np

from .field import PrimeField
from .matrix import (
    DenseMatrix,
    Diagonal,
    DimensionError,
    Permutation,
    RankProfileMatrix,
    conjugate_by_permutations,
    dot_mod,
    is_lower_triangular,
    is_upper_triangular,
    pad_matrix,
)


class SingularPivotError(ValueError):
    """Raised when elimination without pivoting meets a zero pivot."""


class InconsistentSystemError(ValueError):
    """Raised when a linear system has no solution."""


@dataclass(frozen=True)
class PluqFactorization:
    """A = row_perm . L . U . col_perm with L of shape m x r, U of shape r x n.

    `row_perm` maps tracked-row index k to the original row holding
    pivot k; `col_perm` is the inverse of the tracked column order, so
    `col_perm.inverse()(k)` is the original column of pivot k.
    """

    field: PrimeField
    m: int
    n: int
    r: int
    row_perm: Permutation
    lower: DenseMatrix
    upper: DenseMatrix
    col_perm: Permutation

    def reconstruct(self) -> DenseMatrix:
        core = self.lower @ self.upper
        return self.row_perm.permute_rows(self.col_perm.permute_cols(core))

    def pivot_rows(self) -> tuple[int, ...]:
        return tuple(self.row_perm(k) for k in range(self.r))

    def pivot_cols(self) -> tuple[int, ...]:
        inv = self.col_perm.inverse()
        return tuple(inv(k) for k in range(self.r))

    def echelon_form(self) -> DenseMatrix:
        """U with its columns put back in original order."""
        return self.col_perm.permute_cols(self.upper)

    def rank_profile_matrix(self) -> RankProfileMatrix:
        inv = self.col_perm.inverse()
        pos = tuple((self.row_perm(k), inv(k)) for k in range(self.r))
        return RankProfileMatrix(self.m, self.n, pos)

    def left_conjugate(self) -> DenseMatrix:
        """row_perm . [L | 0] . row_perm^T, square m x m."""
        padded = pad_matrix(self.lower, self.m, self.m)
        return conjugate_by_permutations(self.row_perm, padded, self.row_perm.inverse())

    def right_conjugate(self) -> DenseMatrix:
        """col_perm^T . [U ; 0] . col_perm, square n x n."""
        padded = pad_matrix(self.upper, self.n, self.n)
        return conjugate_by_permutations(self.col_perm.inverse(), padded, self.col_perm)

    def reveals_rank_profile_matrix(self) -> bool:
        """True when the conjugated factors stay triangular.

        This is the checkable condition under which the positions in
        `rank_profile_matrix` really are the rank profile matrix of the
        reconstructed matrix.
        """
        return is_lower_triangular(self.left_conjugate()) and is_upper_triangular(
            self.right_conjugate()
        )


@dataclass(frozen=True)
class LdupFactorization:
    """A = L . D . U . P with L unit lower, D invertible diagonal,
    U unit upper and P a permutation matrix.  Only for nonsingular A."""

    field: PrimeField
    n: int
    lower: DenseMatrix
    diag: Diagonal
    upper: DenseMatrix
    perm: Permutation

    def reconstruct(self) -> DenseMatrix:
        core = self.lower @ self.diag.matrix() @ self.upper
        return self.perm.permute_cols(core)

    def determinant(self) -> int:
        return self.field.mul(self.diag.product(), self.perm.sign() % self.field.p)


def pluq_crp(a: DenseMatrix) -> PluqFactorization:
    """Row-transposition PLUQ whose pivot columns are the column rank profile.

    Columns are scanned left to right; a column with no nonzero entry at
    or below the current pivot row is skipped for good.  Skipped columns
    are never touched by later updates, so the tracked column order is
    the pivot columns followed by the skipped ones in original order.
    """
    p = a.field.p
    w = a.array.copy()
    m, n = w.shape
    rp = list(range(m))
    pivcols: list[int] = []
    k = 0
    for c in range(n):
        if k == m:
            break
        nz = np.nonzero(w[k:, c])[0]
        if nz.size == 0:
            continue
        i = k + int(nz[0])
        if i != k:
            w[[k, i]] = w[[i, k]]
            rp[k], rp[i] = rp[i], rp[k]
        inv = pow(int(w[k, c]), -1, p)
        if k + 1 < m:
            mult = (w[k + 1 :, c] * inv) % p
            if c + 1 < n:
                w[k + 1 :, c + 1 :] = (
                    w[k + 1 :, c + 1 :] - np.outer(mult, w[k, c + 1 :])
                ) % p
            w[k + 1 :, c] = mult
        pivcols.append(c)
        k += 1
    r = k
    pivset = set(pivcols)
    cp = pivcols + [c for c in range(n) if c not in pivset]

    lower = np.zeros((m, r), dtype=np.int64)
    for j, c in enumerate(pivcols):
        lower[j, j] = 1
        lower[j + 1 :, j] = w[j + 1 :, c]
    upper = w[:r][:, cp].copy()
    upper[:, :r] = np.triu(upper[:, :r])

    return PluqFactorization(
        field=a.field,
        m=m,
        n=n,
        r=r,
        row_perm=Permutation(tuple(rp)),
        lower=DenseMatrix(a.field, lower),
        upper=DenseMatrix(a.field, upper),
        col_perm=Permutation(tuple(cp)).inverse(),
    )


def pluq_rpm(a: DenseMatrix) -> PluqFactorization:
    """Rotation-based PLUQ that reveals the rank profile matrix.

    At each step the pivot is the nonzero entry of the untouched
    trailing block with lexicographically smallest (row, column)
    position, and it is brought to the front by rotating the
    intervening rows and columns rather than swapping.
    """
    p = a.field.p
    w = a.array.copy()
    m, n = w.shape
    rp = list(range(m))
    cp = list(range(n))
    k = 0
    while k < m and k < n:
        piv = None
        for i in range(k, m):
            nz = np.nonzero(w[i, k:])[0]
            if nz.size:
                piv = (i, k + int(nz[0]))
                break
        if piv is None:
            break
        i, j = piv
        if i != k:
            w[k : i + 1] = np.roll(w[k : i + 1], 1, axis=0)
            rp[k : i + 1] = [rp[i]] + rp[k:i]
        if j != k:
            w[:, k : j + 1] = np.roll(w[:, k : j + 1], 1, axis=1)
            cp[k : j + 1] = [cp[j]] + cp[k:j]
        inv = pow(int(w[k, k]), -1, p)
        if k + 1 < m:
            mult = (w[k + 1 :, k] * inv) % p
            if k + 1 < n:
                w[k + 1 :, k + 1 :] = (
                    w[k + 1 :, k + 1 :] - np.outer(mult, w[k, k + 1 :])
                ) % p
            w[k + 1 :, k] = mult
        k += 1
    r = k

    lower = np.tril(w[:, :r], -1)
    for i in range(r):
        lower[i, i] = 1
    upper = np.triu(w[:r, :])

    return PluqFactorization(
        field=a.field,
        m=m,
        n=n,
        r=r,
        row_perm=Permutation(tuple(rp)),
        lower=DenseMatrix(a.field, lower),
        upper=DenseMatrix(a.field, upper),
        col_perm=Permutation(tuple(cp)).inverse(),
    )


def lu_nopivot(a: DenseMatrix) -> tuple[DenseMatrix, DenseMatrix]:
    """A = L . U with no pivoting; A must be square with all leading
    principal minors nonzero, otherwise SingularPivotError."""
    if a.m != a.n:
        raise DimensionError("no-pivot LU needs a square matrix")
    p = a.field.p
    n = a.n
    w = a.array.copy()
    for k in range(n):
        if w[k, k] == 0:
            raise SingularPivotError(f"zero pivot at step {k}")
        inv = pow(int(w[k, k]), -1, p)
        if k + 1 < n:
            mult = (w[k + 1 :, k] * inv) % p
            w[k + 1 :, k + 1 :] = (
                w[k + 1 :, k + 1 :] - np.outer(mult, w[k, k + 1 :])
            ) % p
            w[k + 1 :, k] = mult
    lower = np.tril(w, -1)
    np.fill_diagonal(lower, 1)
    upper = np.triu(w)
    return DenseMatrix(a.field, lower), DenseMatrix(a.field, upper)


def ldup(a: DenseMatrix) -> LdupFactorization:
    """LDUP factorization of a nonsingular square matrix.

    The permutation is read off the rank profile matrix of A; pushing
    its transpose into A from the right leaves a matrix whose rank
    profile is generic, so the no-pivot LU always goes through.
    """
    if a.m != a.n:
        raise DimensionError("LDUP needs a square matrix")
    fact = pluq_rpm(a)
    n = a.n
    if fact.r < n:
        raise SingularPivotError("matrix is singular")
    images = [0] * n
    inv_cp = fact.col_perm.inverse()
    for k in range(n):
        images[inv_cp(k)] = fact.row_perm(k)
    perm = Permutation(tuple(images))
    b = perm.inverse().permute_cols(a)
    lower, upper_full = lu_nopivot(b)
    d = np.diag(upper_full.array).copy()
    inv_d = np.array([pow(int(x), -1, a.field.p) for x in d], dtype=np.int64)
    upper_unit = (upper_full.array * inv_d[:, None]) % a.field.p
    return LdupFactorization(
        field=a.field,
        n=n,
        lower=lower,
        diag=Diagonal(a.field, tuple(int(x) for x in d)),
        upper=DenseMatrix(a.field, upper_unit),
        perm=perm,
    )


# Triangular and general solves ----------------------------------------------


def trsv_lower(l: DenseMatrix, b: np.ndarray, *, unit: bool = False) -> np.ndarray:
    """Solve L x = b for square lower triangular L by forward substitution."""
    p = l.field.p
    n = l.n
    if l.m != n or b.shape != (n,):
        raise DimensionError("triangular solve shape mismatch")
    x = np.zeros(n, dtype=np.int64)
    for i in range(n):
        s = (int(b[i]) - dot_mod(l.field, l.array[i, :i], x[:i])) % p
        x[i] = s if unit else (s * pow(int(l.array[i, i]), -1, p)) % p
    return x


def trsv_upper(u: DenseMatrix, b: np.ndarray, *, unit: bool = False) -> np.ndarray:
    """Solve U x = b for square upper triangular U by back substitution."""
    p = u.field.p
    n = u.n
    if u.m != n or b.shape != (n,):
        raise DimensionError("triangular solve shape mismatch")
    x = np.zeros(n, dtype=np.int64)
    for i in reversed(range(n)):
        s = (int(b[i]) - dot_mod(u.field, u.array[i, i + 1 :], x[i + 1 :])) % p
        x[i] = s if unit else (s * pow(int(u.array[i, i]), -1, p)) % p
    return x


def solve_square(a: DenseMatrix, b: np.ndarray) -> np.ndarray:
    """Solve A x = b for nonsingular square A."""
    if a.m != a.n:
        raise DimensionError("solve_square needs a square matrix")
    fact = pluq_crp(a)
    if fact.r < a.n:
        raise SingularPivotError("matrix is singular")
    bp = fact.row_perm.apply_inverse_to_vector(np.asarray(b, dtype=np.int64))
    y = trsv_lower(fact.lower, bp, unit=True)
    z = trsv_upper(fact.upper, y)
    return fact.col_perm.apply_inverse_to_vector(z)


def solve_consistent(a: DenseMatrix, b: np.ndarray) -> np.ndarray:
    """One solution of A x = b with the free variables set to zero.

    Raises InconsistentSystemError when the system has no solution.
    """
    p = a.field.p
    b = np.asarray(b, dtype=np.int64)
    if b.shape != (a.m,):
        raise DimensionError("right-hand side length mismatch")
    fact = pluq_crp(a)
    r = fact.r
    bp = fact.row_perm.apply_inverse_to_vector(b)
    if r == 0:
        if np.any(bp):
            raise InconsistentSystemError("zero matrix, nonzero right-hand side")
        return np.zeros(a.n, dtype=np.int64)
    lead = DenseMatrix(a.field, fact.lower.array[:r].copy())
    t = trsv_lower(lead, bp[:r], unit=True)
    if fact.m - r > 0:
        lo = fact.lower.array[r:]
        tail = np.array(
            [dot_mod(a.field, lo[i], t) for i in range(lo.shape[0])], dtype=np.int64
        )
        if np.any(tail != bp[r:]):
            raise InconsistentSystemError("right-hand side outside the column span")
    z = np.zeros(a.n, dtype=np.int64)
    uarr = fact.upper.array
    for i in reversed(range(r)):
        s = (int(t[i]) - dot_mod(a.field, uarr[i, i + 1 :], z[i + 1 :])) % p
        z[i] = (s * pow(int(uarr[i, i]), -1, p)) % p
    return fact.col_perm.apply_inverse_to_vector(z)


def solve_on_columns(a: DenseMatrix, cols: tuple[int, ...], b: np.ndarray) -> np.ndarray:
    """Solve A[:, cols] beta = b; returns beta of length len(cols)."""
    sub = a.submatrix(tuple(range(a.m)), cols)
    return solve_consistent(sub, b)


def rank(a: DenseMatrix) -> int:
    return pluq_crp(a).r


def determinant(a: DenseMatrix) -> int:
    """Determinant through elimination (fast path, used by provers)."""
    if a.m != a.n:
        raise DimensionError("determinant needs a square matrix")
    fact = pluq_crp(a)
    if fact.r < a.n:
        return 0
    p = a.field.p
    prod = 1
    for i in range(a.n):
        prod = (prod * int(fact.upper.array[i, i])) % p
    sign = (fact.row_perm.sign() * fact.col_perm.sign()) % p
    return (prod * sign) % p


# Instance generators ---------------------------------------------------------


def random_unit_lower(field: PrimeField, n: int, rng: random.Random) -> DenseMatrix:
    arr = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        arr[i, i] = 1
        for j in range(i):
            arr[i, j] = rng.randrange(field.p)
    return DenseMatrix(field, arr)


def random_unit_upper(field: PrimeField, n: int, rng: random.Random) -> DenseMatrix:
    return random_unit_lower(field, n, rng).transpose()


def random_nonsingular(field: PrimeField, n: int, rng: random.Random) -> DenseMatrix:
    while True:
        cand = DenseMatrix.random(field, n, n, rng)
        if pluq_crp(cand).r == n:
            return cand


def random_grp_matrix(field: PrimeField, n: int, rng: random.Random) -> DenseMatrix:
    """Random matrix all of whose leading principal minors are nonzero."""
    lower = random_unit_lower(field, n, rng)
    upper = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        upper[i, i] = rng.randrange(1, field.p)
        for j in range(i + 1, n):
            upper[i, j] = rng.randrange(field.p)
    return lower @ DenseMatrix(field, upper)


def random_rank_deficient(
    field: PrimeField, m: int, n: int, r: int, rng: random.Random
) -> DenseMatrix:
    """Random m x n matrix of rank exactly r."""
    if r < 0 or r > min(m, n):
        raise ValueError("rank out of range")
    if r == 0:
        return DenseMatrix.zeros(field, m, n)
    while True:
        left = DenseMatrix.random(field, m, r, rng)
        right = DenseMatrix.random(field, r, n, rng)
        prod = left @ right
        if pluq_crp(prod).r == r:
            return prod
