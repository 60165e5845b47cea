import pytest
from hypothesis import given, strategies as st

from rankcert.field import FieldMismatchError, PrimeField, SampleSet


SMALL_PRIMES = [2, 3, 5, 7, 101, 131071]


def test_rejects_composite_and_out_of_range():
    for bad in (0, 1, 4, 9, 15, 2**31, 2**31 + 11):
        with pytest.raises(ValueError):
            PrimeField(bad)


def test_default_sized_prime_accepted():
    f = PrimeField(131071)
    assert f.p == 131071
    assert f.inv(2) == 65536


@given(st.sampled_from(SMALL_PRIMES), st.data())
def test_field_axioms(p, data):
    f = PrimeField(p)
    a = data.draw(st.integers(0, p - 1))
    b = data.draw(st.integers(0, p - 1))
    c = data.draw(st.integers(0, p - 1))
    assert f.add(a, f.add(b, c)) == f.add(f.add(a, b), c)
    assert f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c)
    assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
    assert f.add(a, f.neg(a)) == 0
    assert f.sub(a, b) == f.add(a, f.neg(b))
    if a != 0:
        assert f.mul(a, f.inv(a)) == 1


def test_inverse_of_zero_fails():
    f = PrimeField(7)
    with pytest.raises(ValueError):
        f.inv(0)


def test_element_arithmetic_and_mismatch():
    f = PrimeField(7)
    g = PrimeField(5)
    x = f.element(3)
    y = f.element(6)
    assert (x + y).value == 2
    assert (x * y).value == 4
    assert (-x).value == 4
    assert x.inverse().value == 5
    with pytest.raises(FieldMismatchError):
        _ = x + g.element(1)


def test_sample_set_membership_and_star():
    f = PrimeField(7)
    s = SampleSet(f)
    assert s.size == 7
    star = s.star()
    assert star.size == 6
    assert 0 not in star
    assert 3 in star
    narrowed = s.without(2, 5)
    assert narrowed.size == 5
    assert 2 not in narrowed


def test_draw_is_uniform_over_allowed_residues():
    # deterministic bit feed: walk the acceptance region one chunk at a time
    f = PrimeField(5)
    s = SampleSet(f).without(1)
    feed = iter(range(0, 40))
    got = [s.draw(lambda: next(feed)) for _ in range(8)]
    # k = 4 allowed residues {0,2,3,4}; chunks 0..7 map 0,2,3,4,0,2,3,4
    assert got == [0, 2, 3, 4, 0, 2, 3, 4]


def test_draw_respects_forbid_and_rejection():
    f = PrimeField(5)
    s = SampleSet(f)
    vals = {s.draw((lambda v: lambda: v)(u), forbid=(3,)) for u in range(12)}
    assert 3 not in vals
    assert vals == {0, 1, 2, 4}


def test_empty_sample_set_rejected_at_construction():
    f = PrimeField(2)
    with pytest.raises(ValueError):
        SampleSet(f).without(0, 1)


def test_draw_with_everything_forbidden_fails():
    f = PrimeField(2)
    s = SampleSet(f).without(0)
    with pytest.raises(ValueError):
        s.draw(lambda: 0, forbid=(1,))


def test_draw_rejects_high_chunks():
    # chunks at or above the acceptance limit must be skipped, not folded in
    f = PrimeField(3)
    s = SampleSet(f)
    limit = (2**64 // 3) * 3
    feed = iter([limit, limit + 1, 2**64 - 1, limit - 1])
    assert s.draw(lambda: next(feed)) == (limit - 1) % 3
