"""Slow, independent reference computations.

Everything here works by minor expansion and exhaustive subset search, on
purpose: these functions validate the elimination-based code paths and the
protocol outputs, so they must not share any algorithmic machinery with
them.  Intended for small matrices (dimensions up to about 8).
"""

from __future__ import annotations

from itertools import combinations

from .matrix import DenseMatrix, RankProfileMatrix


def _det_expand(mat: DenseMatrix, rows: tuple, cols: tuple, memo: dict) -> int:
    """Determinant of the (rows x cols) submatrix by first-row expansion."""
    if len(rows) != len(cols):
        raise ValueError("minor must be square")
    if not rows:
        return 1  # empty minor
    key = (rows, cols)
    if key in memo:
        return memo[key]
    p = mat.field.p
    arr = mat.array
    if len(rows) == 1:
        val = int(arr[rows[0], cols[0]]) % p
        memo[key] = val
        return val
    r0 = rows[0]
    rest = rows[1:]
    acc = 0
    sign = 1
    for k, c in enumerate(cols):
        a = int(arr[r0, c])
        if a:
            sub = _det_expand(mat, rest, cols[:k] + cols[k + 1:], memo)
            term = (a * sub) % p
            acc = (acc + sign * term) % p
        sign = -sign
    memo[key] = acc % p
    return memo[key]


def minor(mat: DenseMatrix, rows, cols) -> int:
    """det of the submatrix on the given (0-based) rows and columns.
    The empty minor is 1."""
    return _det_expand(mat, tuple(rows), tuple(cols), {})


def oracle_det(mat: DenseMatrix) -> int:
    if mat.m != mat.n:
        raise ValueError("determinant of a non-square matrix")
    return minor(mat, range(mat.m), range(mat.n))


def oracle_rank(mat: DenseMatrix) -> int:
    """Largest r with a nonzero r x r minor."""
    memo: dict = {}
    for r in range(min(mat.m, mat.n), 0, -1):
        for rows in combinations(range(mat.m), r):
            for cols in combinations(range(mat.n), r):
                if _det_expand(mat, rows, cols, memo):
                    return r
    return 0


def _prefix_col_rank(mat: DenseMatrix, j: int, memo: dict) -> int:
    """Rank of the first j columns, by subset search."""
    for r in range(min(mat.m, j), 0, -1):
        for rows in combinations(range(mat.m), r):
            for cols in combinations(range(j), r):
                if _det_expand(mat, rows, cols, memo):
                    return r
    return 0


def oracle_crp(mat: DenseMatrix) -> tuple:
    """Column rank profile: 0-based indices where the prefix rank steps up."""
    memo: dict = {}
    out = []
    prev = 0
    for j in range(1, mat.n + 1):
        cur = _prefix_col_rank(mat, j, memo)
        if cur > prev:
            out.append(j - 1)
            prev = cur
    return tuple(out)


def oracle_rrp(mat: DenseMatrix) -> tuple:
    return oracle_crp(mat.transpose())


def _leading_rank_table(mat: DenseMatrix) -> list:
    """rho[i][j] = rank of the leading i x j submatrix (0 <= i <= m)."""
    memo: dict = {}
    rho = [[0] * (mat.n + 1) for _ in range(mat.m + 1)]
    for i in range(1, mat.m + 1):
        for j in range(1, mat.n + 1):
            r = 0
            for k in range(min(i, j), 0, -1):
                found = False
                for rows in combinations(range(i), k):
                    for cols in combinations(range(j), k):
                        if _det_expand(mat, rows, cols, memo):
                            found = True
                            break
                    if found:
                        break
                if found:
                    r = k
                    break
            rho[i][j] = r
    return rho


def oracle_rpm(mat: DenseMatrix) -> RankProfileMatrix:
    """The unique 0/1 matrix whose leading submatrices all match the rank
    of the corresponding leading submatrix of ``mat``: its entries are the
    mixed differences of the leading-rank table."""
    rho = _leading_rank_table(mat)
    ones = []
    for i in range(1, mat.m + 1):
        for j in range(1, mat.n + 1):
            d = rho[i][j] - rho[i - 1][j] - rho[i][j - 1] + rho[i - 1][j - 1]
            if d == 1:
                ones.append((i - 1, j - 1))
            elif d not in (0, 1):  # cannot happen for a rank table
                raise AssertionError("rank table is not bimonotone")
    return RankProfileMatrix(mat.m, mat.n, ones)


def has_grp(mat: DenseMatrix) -> bool:
    """All leading principal minors d_1..d_n nonzero (implies nonsingular)."""
    if mat.m != mat.n:
        raise ValueError("generic rank profile is defined for square matrices")
    memo: dict = {}
    for k in range(1, mat.n + 1):
        if _det_expand(mat, tuple(range(k)), tuple(range(k)), memo) == 0:
            return False
    return True


def check_dodgson(mat: DenseMatrix) -> bool:
    """Two contiguous-minor determinant identities, evaluated literally.

    Central form (n >= 2):
        det(A) * det(interior) == det(NW)*det(SE) - det(NE)*det(SW)
    where interior drops the first and last row and column and the four
    corner minors drop one boundary row and column each.

    Corner form: drop rows/cols {n-2, n-1} instead of {0, n-1}:
        det(A) * det(leading n-2) ==
            det(drop n-2) * det(drop n-1) - (cross terms)
    Both hold for every square matrix, repeated rows included.
    """
    n = mat.n
    if mat.m != n or n < 2:
        raise ValueError("needs a square matrix of dimension >= 2")
    p = mat.field.p
    memo: dict = {}
    full = tuple(range(n))

    def d(rows, cols):
        return _det_expand(mat, tuple(rows), tuple(cols), memo)

    det_a = d(full, full)

    inner = tuple(range(1, n - 1))
    head = tuple(range(n - 1))          # drop last
    tail = tuple(range(1, n))           # drop first
    lhs = (det_a * d(inner, inner)) % p
    rhs = (d(head, head) * d(tail, tail) - d(head, tail) * d(tail, head)) % p
    if lhs != rhs:
        return False

    keep_a = tuple(range(n - 2)) + (n - 1,)   # drop index n-2
    keep_b = tuple(range(n - 1))              # drop index n-1
    lead = tuple(range(n - 2))
    lhs = (det_a * d(lead, lead)) % p
    rhs = (d(keep_a, keep_a) * d(keep_b, keep_b) - d(keep_a, keep_b) * d(keep_b, keep_a)) % p
    return lhs == rhs
