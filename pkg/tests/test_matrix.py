import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rankcert.field import PrimeField
from rankcert.matrix import (
    DenseMatrix,
    Diagonal,
    DimensionError,
    Permutation,
    RankProfileMatrix,
    conjugate_by_permutations,
    dot_mod,
    dump_matrix,
    is_lower_triangular,
    is_row_echelon,
    is_unit_lower_leading,
    is_upper_triangular,
    load_matrix,
    pad_matrix,
)

F7 = PrimeField(7)


def mat(rows, field=F7):
    return DenseMatrix.from_rows(field, rows)


def rand_mat(field, m, n, seed):
    return DenseMatrix.random(field, m, n, random.Random(seed))


def test_constructors_and_validation():
    z = DenseMatrix.zeros(F7, 2, 3)
    assert z.shape == (2, 3) and z.is_zero()
    i = DenseMatrix.identity(F7, 3)
    assert i @ i == i
    assert mat([[7, 0], [0, 0]]).is_zero()  # from_rows reduces for convenience
    with pytest.raises(ValueError):
        DenseMatrix(F7, np.array([[7, 0], [0, 0]], dtype=np.int64))
    with pytest.raises(ValueError):
        DenseMatrix(F7, np.array([[-1, 0], [0, 0]], dtype=np.int64))


def test_matrices_are_immutable():
    a = mat([[1, 2], [3, 4]])
    with pytest.raises(Exception):
        a.array[0, 0] = 5


def test_product_matches_python_ints():
    a = rand_mat(F7, 4, 5, 1)
    b = rand_mat(F7, 5, 3, 2)
    c = a @ b
    for i in range(4):
        for j in range(3):
            want = sum(int(a.array[i, k]) * int(b.array[k, j]) for k in range(5)) % 7
            assert int(c.array[i, j]) == want


def test_blocked_product_near_overflow_boundary():
    # p close to 2^31 forces single-column accumulation blocks
    f = PrimeField(2147483647)
    v = f.p - 1
    a = DenseMatrix(f, np.full((2, 40), v, dtype=np.int64))
    b = DenseMatrix(f, np.full((40, 2), v, dtype=np.int64))
    c = a @ b
    want = (40 * v * v) % f.p
    assert np.all(c.array == want)
    x = np.full(40, v, dtype=np.int64)
    assert dot_mod(f, x, x) == want


def test_matvec_vecmat_and_meter_hook():
    class Meter:
        def __init__(self):
            self.calls = []

        def count_matvec(self, m, n):
            self.calls.append((m, n))

    a = mat([[1, 2, 3], [4, 5, 6]])
    v = np.array([1, 1, 1], dtype=np.int64)
    w = np.array([1, 2], dtype=np.int64)
    meter = Meter()
    assert a.matvec(v, meter=meter).tolist() == [6, 1]
    assert a.vecmat(w, meter=meter).tolist() == [2, 5, 1]
    # vecmat reports the transposed shape so ops = 2mn - output length holds
    assert meter.calls == [(2, 3), (3, 2)]


@given(st.integers(2, 30), st.integers(0, 10 **6))
@settings(max_examples=40, deadline=None)
def test_permutation_roundtrip(n, seed):
    rng = random.Random(seed)
    images = list(range(n))
    rng.shuffle(images)
    perm = Permutation(tuple(images))
    inv = perm.inverse()
    for i in range(n):
        assert inv(perm(i)) == i
    v = np.array([rng.randrange(7) for _ in range(n)], dtype=np.int64)
    assert np.array_equal(perm.apply_inverse_to_vector(perm.apply_to_vector(v)), v)
    a = rand_mat(F7, n, n, seed + 1)
    assert perm.matrix(F7) @ a == perm.permute_rows(a)
    assert a @ perm.matrix(F7) == perm.permute_cols(a)
    assert perm.inverse().permute_rows(perm.permute_rows(a)) == a


def test_permutation_sign_and_compose():
    ident = Permutation.identity(4)
    swap = Permutation((1, 0, 2, 3))
    cycle = Permutation((1, 2, 0))
    assert ident.sign() == 1
    assert swap.sign() == -1
    assert cycle.sign() == 1
    other = Permutation((0, 2, 1, 3))
    composed = swap.compose(other)
    for i in range(4):
        assert composed(i) == swap(other(i))
    with pytest.raises(ValueError):
        Permutation((0, 0, 1))


def test_permutation_matrix_convention():
    # the matrix of p has its ones at (p(i), i)
    perm = Permutation((2, 0, 1))
    pm = perm.matrix(F7)
    for i in range(3):
        assert pm.array[perm(i), i] == 1
    assert int(pm.array.sum()) == 3


def test_diagonal_requires_invertible_entries():
    d = Diagonal(F7, (1, 3, 6))
    assert d.product() == 4
    assert d.matrix().array[1, 1] == 3
    v = np.array([1, 2, 3], dtype=np.int64)
    assert d.apply(v).tolist() == [1, 6, 4]
    with pytest.raises(ValueError):
        Diagonal(F7, (1, 0, 2))


def test_triangularity_predicates():
    low = mat([[1, 0, 0], [2, 3, 0], [4, 5, 6]])
    up = low.transpose()
    assert is_lower_triangular(low) and not is_upper_triangular(low)
    assert is_upper_triangular(up) and not is_lower_triangular(up)
    assert not is_lower_triangular(low, strict=True)
    assert is_lower_triangular(mat([[0, 0], [1, 0]]), strict=True)
    tall = mat([[1, 0], [2, 1], [3, 4]])
    assert is_unit_lower_leading(tall, 2)
    assert not is_unit_lower_leading(mat([[2, 0], [1, 1]]), 2)


def test_row_echelon_predicate():
    assert is_row_echelon(mat([[1, 2, 0], [0, 0, 3]]))
    assert is_row_echelon(mat([[0, 0], [0, 0]]))
    assert not is_row_echelon(mat([[0, 1], [1, 0]]))
    assert not is_row_echelon(mat([[0, 0, 3], [1, 2, 0]]))  # zero row not trailing


def test_pad_and_conjugate():
    a = mat([[1, 2], [3, 4], [5, 6]])
    padded = pad_matrix(a, 3, 3)
    assert padded.array[:, 2].tolist() == [0, 0, 0]
    eye_tail = pad_matrix(mat([[2]]), 3, 3, identity_tail=True)
    assert eye_tail.array.tolist() == [[2, 0, 0], [0, 1, 0], [0, 0, 1]]
    p = Permutation((1, 2, 0))
    q = p.inverse()
    b = rand_mat(F7, 3, 3, 9)
    assert conjugate_by_permutations(p, b, q) == p.matrix(F7) @ b @ q.matrix(F7)


def test_rank_profile_matrix_container():
    rpm = RankProfileMatrix(3, 4, ((2, 1), (0, 2)))
    assert rpm.positions == ((0, 2), (2, 1))  # sorted
    assert rpm.rank == 2
    assert rpm.row_support() == (0, 2)
    assert rpm.column_support() == (1, 2)
    dense = rpm.to_dense(F7)
    assert dense.array[0, 2] == 1 and dense.array[2, 1] == 1
    assert int(dense.array.sum()) == 2
    with pytest.raises(ValueError):
        RankProfileMatrix(3, 4, ((0, 1), (0, 2)))  # two ones in one row


def test_text_roundtrip_and_validation():
    a = rand_mat(PrimeField(131071), 3, 5, 4)
    text = dump_matrix(a)
    again = load_matrix(text)
    assert again == a
    with pytest.raises(ValueError):
        load_matrix("2 2 7\n1 2\n3 9\n")  # residue out of range
    with pytest.raises(ValueError):
        load_matrix("2 2 7\n1 2\n3\n")  # short row
