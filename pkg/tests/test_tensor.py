import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfshift.errors import InvalidDims, RangeError, ShapeMismatch
from dfshift.tensor import ChannelRange, ClipTensor, concat_channels, make_clip, slice_channels

from conftest import labeled_clip


def test_make_clip_examples():
    x = make_clip(1, 1, 1, 1, 0.0)
    assert x.data.tolist() == [0.0]
    x = make_clip(2, 3, 4, 4, 1.0)
    assert x.data.size == 96 and np.all(x.data == 1.0)
    x = make_clip(8, 8, 16, 16, 0.0)
    assert x.data.size == 16384 and not x.data.any()
    assert x.shape == (8, 8, 16, 16)


@pytest.mark.parametrize("dims", [(0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0)])
def test_make_clip_rejects_zero_dims(dims):
    with pytest.raises(InvalidDims):
        make_clip(*dims)


def test_from_flat_checks_length():
    with pytest.raises(InvalidDims):
        ClipTensor.from_flat(np.zeros(5), 1, 1, 2, 2)


def test_slice_examples():
    x = labeled_clip(4, 2)  # channels a,b,c,d = 1,2,3,4 at t=0
    d = slice_channels(x, ChannelRange(3, 4))
    assert d.channels == 1 and d.at(0, 0, 0, 0) == 4 and d.at(1, 0, 0, 0) == 14
    full = slice_channels(x, ChannelRange(0, 4))
    assert full.equals(x) and full.array is not x.array
    bc = slice_channels(x, ChannelRange(1, 3))
    assert bc.array[0, :, 0, 0].tolist() == [2, 3]


@pytest.mark.parametrize("r", [ChannelRange(-1, 2), ChannelRange(2, 1), ChannelRange(0, 5)])
def test_slice_out_of_range(r):
    with pytest.raises(RangeError):
        slice_channels(make_clip(4, 1, 1, 1), r)


def test_concat_examples():
    x = labeled_clip(3, 1)
    ab = slice_channels(x, ChannelRange(0, 2))
    c = slice_channels(x, ChannelRange(2, 3))
    assert concat_channels([ab, c]).equals(x)
    single = concat_channels([x])
    assert single.equals(x) and single.array is not x.array


def test_concat_mismatch():
    with pytest.raises(ShapeMismatch):
        concat_channels([make_clip(1, 2, 3, 3), make_clip(1, 3, 3, 3)])
    with pytest.raises(ShapeMismatch):
        concat_channels([])


dims = st.tuples(st.integers(1, 6), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))


@settings(max_examples=60, deadline=None)
@given(dims, st.data())
def test_round_trip_any_split(shape, data):
    c, t, h, w = shape
    k = data.draw(st.integers(0, c))
    x = ClipTensor(np.random.default_rng(c * 1000 + k).normal(size=(t, c, h, w)))
    y = concat_channels([slice_channels(x, ChannelRange(0, k)), slice_channels(x, ChannelRange(k, c))])
    assert y.array.tobytes() == x.array.tobytes()


@settings(max_examples=40, deadline=None)
@given(dims, st.data())
def test_slice_touches_only_its_range(shape, data):
    c, t, h, w = shape
    a = data.draw(st.integers(0, c))
    b = data.draw(st.integers(a, c))
    arr = np.full((t, c, h, w), np.nan)
    arr[:, a:b] = 1.5  # everything outside the range is a NaN canary
    x = ClipTensor(arr)
    before = x.array.copy()
    y = slice_channels(x, ChannelRange(a, b))
    assert not np.isnan(y.array).any()
    np.testing.assert_array_equal(x.array, before)


@settings(max_examples=40, deadline=None)
@given(dims)
def test_layout_law(shape):
    c, t, h, w = shape
    flat = np.arange(c * t * h * w, dtype=float)
    x = ClipTensor.from_flat(flat, c, t, h, w)
    for tt in range(t):
        for cc in range(c):
            for hh in range(h):
                for ww in range(w):
                    idx = tt * (c * h * w) + cc * (h * w) + hh * w + ww
                    assert x.at(tt, cc, hh, ww) == flat[idx]
