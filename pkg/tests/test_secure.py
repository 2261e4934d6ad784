import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hesim.ckks import CkksContext, FormatError, LevelExhaustedError
from hesim.secure import (
    MASKS, EncryptedBackend, ExactBackend, add_const, circshift_mat, circshift_vec, dec_matrix, dumps_array,
    dec_vector, enc_matrix, enc_vector, ew_add, ew_mul, ew_sub, levels_remaining, maybe_refresh,
    loads_array, next_pow2, refresh, scale_by,
)
from hesim.secure.arrays import _row_masks, _vec_masks


@pytest.fixture(scope="module")
def enc():
    ctx = CkksContext(ring_dim=2**11, l_max=8, l_refresh=5, batch_size=64)
    return EncryptedBackend(ctx, seed=3, auto_rotation_keys=True)


def test_capacity_policy():
    be = ExactBackend()
    assert enc_vector(np.ones(7), be).capacity == 8
    assert enc_vector(np.ones(8), be).capacity == 8
    assert enc_vector(np.ones(1), be).capacity == 1
    assert enc_vector(np.ones(7), be, capacity=32).capacity == 32
    assert [next_pow2(n) for n in (1, 2, 3, 5, 16, 17)] == [1, 2, 4, 8, 16, 32]
    with pytest.raises(ValueError):
        enc_vector(np.ones(9), be, capacity=8)
    with pytest.raises(ValueError):
        enc_vector([], be)
    with pytest.raises(ValueError):
        enc_vector(np.ones(4), be, capacity=6)


def test_matrix_packing_order():
    be = ExactBackend()
    a = np.arange(12.0).reshape(4, 3)
    m = enc_matrix(a, be)
    assert m.capacity == 16
    slots = m.payload
    for i in range(4):
        for j in range(3):
            assert slots[j * 4 + i] == a[i, j]
    assert not slots[12:].any()
    assert np.array_equal(dec_matrix(m), a)


def test_exact_round_trip_bit_exact():
    be = ExactBackend()
    v = np.random.default_rng(0).normal(size=13)
    assert np.array_equal(dec_vector(enc_vector(v, be)), v)


def test_encrypted_round_trip(enc):
    v = np.random.default_rng(1).uniform(-1, 1, 13)
    assert np.abs(dec_vector(enc_vector(v, enc)) - v).max() < 1e-6
    a = np.random.default_rng(2).uniform(-1, 1, (5, 4))
    assert np.abs(dec_matrix(enc_matrix(a, enc)) - a).max() < 1e-6


def test_circshift_small_example():
    be = ExactBackend()
    out = circshift_vec(enc_vector([1.0, 2.0, 3.0], be), 1)
    assert list(dec_vector(out)) == [3.0, 1.0, 2.0]


def test_circshift_zero_is_free():
    be = ExactBackend()
    x = enc_vector(np.arange(5.0), be)
    out = circshift_vec(x, 0)
    assert out.level == x.level
    assert be.counts.as_tuple() == (0, 0, 0)
    assert np.array_equal(dec_vector(circshift_vec(x, 5)), np.arange(5.0))


def test_circshift_vec_brute_force():
    be = ExactBackend()
    v = np.random.default_rng(3).normal(size=13)
    x = enc_vector(v, be, capacity=16)
    for k in range(-13, 14):
        out = circshift_vec(x, k)
        assert np.array_equal(dec_vector(out), np.roll(v, k))
        assert x.level - out.level == (0 if k % 13 == 0 else 1)


def test_circshift_mat_worked_example():
    be = ExactBackend()
    a = np.array([list("abc"), list("def"), list("ghi")])
    idx = {ch: float(n) for n, ch in enumerate("abcdefghi")}
    num = np.vectorize(idx.get)(a)
    out = dec_matrix(circshift_mat(enc_matrix(num, be), 1, 2))
    names = np.array(list("abcdefghi"))[out.astype(int)]
    assert names.tolist() == [list("hig"), list("bca"), list("efd")]


def test_circshift_mat_brute_force():
    be = ExactBackend()
    a = np.random.default_rng(4).normal(size=(5, 4))
    x = enc_matrix(a, be)
    for k in range(-5, 6):
        for l in range(-4, 5):
            assert np.array_equal(dec_matrix(circshift_mat(x, k, l)), np.roll(a, (k, l), axis=(0, 1)))


@pytest.mark.parametrize("at_capacity", [False, True])
def test_circshift_mat_level_table(at_capacity):
    table = {False: {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2},
             True: {(0, 0): 0, (0, 1): 0, (1, 0): 1, (1, 1): 1}}[at_capacity]
    be = ExactBackend()
    x = enc_matrix(np.ones((4, 4)), be, capacity=16 if at_capacity else 32)
    for k in (-1, 0, 2):
        for l in (-3, 0, 1):
            used = x.level - circshift_mat(x, k, l).level
            assert used == table[(int(k != 0), int(l != 0))], (k, l)


def test_group_law():
    be = ExactBackend()
    v = np.random.default_rng(5).normal(size=11)
    x = enc_vector(v, be)
    for k in range(-4, 5):
        for k2 in (-3, 2, 7):
            lhs = dec_vector(circshift_vec(circshift_vec(x, k), k2))
            assert np.array_equal(lhs, dec_vector(circshift_vec(x, k + k2)))


def test_masks_partition():
    for length, cap in ((13, 16), (5, 8), (3, 32)):
        for k in list(range(-length + 1, 0)) + list(range(1, length)):
            m1, m2 = _vec_masks(length, k, cap)
            assert set(np.unique(np.r_[m1, m2])) <= {0.0, 1.0}
            assert np.array_equal((m1 + m2)[:length], np.ones(length))
            assert not (m1 + m2)[length:].any()
    m1, m2 = _row_masks(4, 3, 1, 16)
    assert np.array_equal(m1 + m2, np.r_[np.ones(12), np.zeros(4)])
    assert _vec_masks(13, 2, 16)[0] is _vec_masks(13, 2, 16)[0]


def test_elementwise_exact():
    be = ExactBackend()
    rng = np.random.default_rng(6)
    a, b = rng.normal(size=(8, 8)), rng.normal(size=(8, 8))
    x, y = enc_matrix(a, be), enc_matrix(b, be)
    assert np.array_equal(dec_matrix(ew_add(x, y)), a + b)
    assert np.array_equal(dec_matrix(ew_sub(x, y)), a - b)
    assert np.array_equal(dec_matrix(ew_mul(x, y)), a * b)
    assert np.array_equal(dec_matrix(scale_by(x, 0.5)), 0.5 * a)
    assert np.array_equal(dec_matrix(add_const(x, 2.0)), a + 2.0)
    ones = ew_mul(x, enc_matrix(np.ones((8, 8)), be))
    assert ones.level == x.level - 1
    assert np.array_equal(dec_matrix(ones), a)
    assert be.counts.as_tuple() == (3, 3, 0)


def test_elementwise_errors():
    be = ExactBackend()
    with pytest.raises(ValueError):
        ew_add(enc_vector(np.ones(4), be), enc_vector(np.ones(5), be))
    with pytest.raises(ValueError):
        ew_add(enc_vector(np.ones(4), be), enc_vector(np.ones(4), ExactBackend()))
    x = enc_vector(np.ones(4), ExactBackend(l_max=1, l_refresh=1))
    with pytest.raises(LevelExhaustedError):
        scale_by(scale_by(x, 2.0), 2.0)


def test_hadamard_encrypted(enc):
    rng = np.random.default_rng(7)
    a, b = rng.uniform(-1, 1, (8, 8)), rng.uniform(-1, 1, (8, 8))
    out = ew_mul(enc_matrix(a, enc), enc_matrix(b, enc))
    assert np.abs(dec_matrix(out) - a * b).max() < 1e-4


def test_circshift_encrypted(enc):
    rng = np.random.default_rng(8)
    v = rng.uniform(-1, 1, 13)
    x = enc_vector(v, enc, capacity=16)
    for k in (-5, -1, 1, 4, 12):
        assert np.abs(dec_vector(circshift_vec(x, k)) - np.roll(v, k)).max() < 1e-6
    a = rng.uniform(-1, 1, (5, 4))
    m = enc_matrix(a, enc)
    for k, l in ((1, 0), (0, -1), (-2, 3), (1, 1)):
        got = dec_matrix(circshift_mat(m, k, l))
        assert np.abs(got - np.roll(a, (k, l), axis=(0, 1))).max() < 1e-6


def expression(be):
    x = enc_matrix(np.arange(20.0).reshape(5, 4) / 20, be)
    y = circshift_mat(x, 1, -1)
    z = ew_add(scale_by(y, 0.5), x)
    return ew_mul(z, circshift_vec(enc_matrix(np.ones((5, 4)), be), 0))


def test_trace_equality(enc):
    ex = ExactBackend(l_max=enc.l_max, l_refresh=enc.l_refresh, record_trace=True)
    enc.trace = []
    a = expression(ex)
    b = expression(enc)
    assert ex.trace == enc.trace
    assert a.level == b.level
    assert np.abs(dec_matrix(a) - dec_matrix(b)).max() < 1e-4


def test_maybe_refresh_guard(enc):
    for be in (ExactBackend(l_max=8, l_refresh=5), enc):
        x = enc_vector(np.ones(8), be)
        while x.level > 3:
            x = scale_by(x, 1.0)
        assert maybe_refresh(x, 2) is x
        x = scale_by(x, 1.0)
        assert levels_remaining(x) == 2
        y = maybe_refresh(x, 2)
        assert y.level == be.l_refresh
        assert np.abs(dec_vector(y) - 1).max() < 1e-5


def test_refresh_needs_a_level():
    be = ExactBackend(l_max=2, l_refresh=2)
    x = scale_by(scale_by(enc_vector(np.ones(4), be), 1.0), 1.0)
    assert x.level == 0
    with pytest.raises(LevelExhaustedError):
        refresh(x)
    it = ExactBackend(l_max=3, l_refresh=3, mode="iterative")
    y = enc_vector(np.ones(4), it)
    assert maybe_refresh(y, 1) is y
    y = scale_by(y, 1.0)
    assert maybe_refresh(y, 1).level == 3
    with pytest.raises(LevelExhaustedError):
        refresh(scale_by(y, 1.0))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), m=st.integers(1, 6), k=st.integers(-20, 20), l=st.integers(-20, 20),
       extra=st.sampled_from([1, 2]))
def test_circshift_mat_property(n, m, k, l, extra):
    be = ExactBackend()
    a = np.arange(n * m, dtype=float).reshape(n, m) + 1
    x = enc_matrix(a, be, capacity=next_pow2(n * m) * extra)
    assert np.array_equal(dec_matrix(circshift_mat(x, k, l)), np.roll(a, (k, l), axis=(0, 1)))


def test_mask_cache_memoises():
    before = len(MASKS)
    MASKS.get(((0, 3),), 1024)
    MASKS.get(((0, 3),), 1024)
    assert len(MASKS) == before + 1


def test_array_serialization_exact():
    be = ExactBackend()
    v = enc_vector(np.arange(5.0), be, 8)
    back = loads_array(dumps_array(v), be)
    assert (back.length, back.capacity, back.level) == (5, 8, v.level)
    assert np.array_equal(dec_vector(back), np.arange(5.0))
    m = enc_matrix(np.arange(12.0).reshape(4, 3), be)
    back = loads_array(dumps_array(m), be)
    assert (back.nrows, back.ncols) == (4, 3)
    assert np.array_equal(dec_matrix(back), dec_matrix(m))


def test_array_serialization_encrypted(enc):
    u = np.random.default_rng(3).normal(size=(4, 4))
    m = circshift_mat(enc_matrix(u, enc), 1, 2)
    data = dumps_array(m)
    back = loads_array(data, enc)
    assert back.level == m.level and dumps_array(back) == data
    assert np.abs(dec_matrix(back) - np.roll(u, (1, 2), axis=(0, 1))).max() < 1e-6
    with pytest.raises(ValueError):
        loads_array(data, ExactBackend())
    with pytest.raises(FormatError):
        loads_array(b"XXXX" + data[4:], enc)
    with pytest.raises(FormatError):
        loads_array(data[:10], enc)
