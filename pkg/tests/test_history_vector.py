import pytest
from hypothesis import given
from hypothesis import strategies as st

from rwcrdc import history_vector as hv


def test_zero():
    assert hv.zero(2) == (0, 0)
    assert hv.zero(3) == (0, 0, 0)
    assert hv.zero(1) == (0,)


def test_zero_rejects_empty_system():
    with pytest.raises(ValueError):
        hv.zero(0)


def test_increment():
    assert hv.increment((0, 0, 0), 0) == (1, 0, 0)
    assert hv.increment((0, 0), 1) == (0, 1)
    assert hv.increment((2, 5), 0) == (3, 5)


def test_increment_out_of_range():
    with pytest.raises(IndexError):
        hv.increment((0, 0), 2)
    with pytest.raises(IndexError):
        hv.increment((0, 0), -1)


def test_merge():
    assert hv.merge((0, 0, 0), (1, 0, 0)) == (1, 0, 0)
    assert hv.merge((3, 1), (2, 4)) == (3, 4)
    v = (4, 0, 7)
    assert hv.merge(v, hv.zero(3)) == v


def test_length_mismatches_rejected():
    for op in (hv.merge, hv.has_unseen, hv.equals):
        with pytest.raises(ValueError):
            op((0, 0), (0, 0, 0))


def test_has_unseen():
    assert hv.has_unseen((0, 0), (0, 1))
    assert not hv.has_unseen((1, 0, 0), (1, 0, 0))
    assert not hv.has_unseen((3, 1), (3, 1))


def test_equals():
    assert hv.equals((0, 0), (0, 0))
    assert not hv.equals((0, 1), (0, 0))
    assert hv.equals(hv.zero(3), hv.zero(3))


vectors = st.integers(min_value=1, max_value=5).flatmap(
    lambda n: st.tuples(*[st.integers(min_value=0, max_value=9)] * n))

paired = st.integers(min_value=1, max_value=5).flatmap(
    lambda n: st.tuples(
        st.tuples(*[st.integers(min_value=0, max_value=9)] * n),
        st.tuples(*[st.integers(min_value=0, max_value=9)] * n),
        st.tuples(*[st.integers(min_value=0, max_value=9)] * n)))


@given(paired)
def test_merge_is_a_semilattice(vws):
    a, b, c = vws
    assert hv.merge(a, b) == hv.merge(b, a)
    assert hv.merge(hv.merge(a, b), c) == hv.merge(a, hv.merge(b, c))
    assert hv.merge(a, a) == a
    assert hv.merge(a, hv.zero(len(a))) == a


@given(paired)
def test_has_unseen_duality(vws):
    a, b, _ = vws
    both_quiet = not hv.has_unseen(a, b) and not hv.has_unseen(b, a)
    assert both_quiet == hv.equals(a, b)


@given(paired)
def test_merge_dominates_both_inputs(vws):
    a, b, _ = vws
    m = hv.merge(a, b)
    assert not hv.has_unseen(m, a)
    assert not hv.has_unseen(m, b)
