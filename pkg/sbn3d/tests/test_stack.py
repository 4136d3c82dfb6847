import warnings

import numpy as np
import pytest

import sbn3d
from sbn3d.stack import FrameStack, MatricizedVideo, matricize, tensorize, window, window_bounds
from sbn3d.registration import register_translation, estimate_shift
from sbn3d.baselines import histogram_equalize, temporal_median_subtract, equalize_stack

warnings.simplefilter('ignore')


def test_framestack_validation():
    """
    Stacks must be finite, 3D and non-empty
    """

    st = FrameStack(np.zeros((2, 3, 4)))
    assert (st.frames, st.height, st.width) == (2, 3, 4)
    assert len(st) == 2
    assert FrameStack(np.ones((3, 4))).shape == (1, 3, 4)

    with pytest.raises(ValueError):
        FrameStack(np.zeros((0, 3, 4)))
    with pytest.raises(ValueError):
        FrameStack(np.array([[[np.nan]]]))
    with pytest.raises(ValueError):
        FrameStack(np.zeros(5))

    with pytest.raises(ValueError):
        st.data[0, 0, 0] = 1.


def test_matricize_tensorize():
    """
    Matricization puts one row-major frame per column and inverts exactly
    """

    rng = np.random.default_rng(3)
    st = FrameStack(rng.random((2, 2, 2)))
    mat = matricize(st)
    assert mat.shape == (4, 2)
    np.testing.assert_array_equal(mat.matrix[:, 1], st.frame(1).ravel())
    assert tensorize(mat) == st
    assert tensorize(mat.matrix, 2, 2) == st

    m = rng.random((4, 2))
    np.testing.assert_array_equal(matricize(tensorize(m, 2, 2)).matrix, m)

    with pytest.raises(ValueError):
        tensorize(m, 3, 2)
    with pytest.raises(ValueError):
        MatricizedVideo(m, height=3, width=3)


def test_static_stack_is_rank_one():
    """
    Identical frames give identical columns
    """

    frame = np.random.default_rng(0).random((5, 6))
    mat = matricize(FrameStack(np.stack([frame] * 7)))
    assert np.linalg.matrix_rank(mat.matrix) == 1
    assert np.all(mat.matrix == mat.matrix[:, :1])


def test_window():
    """
    Windows copy consecutive frames and reject out-of-range requests
    """

    st = FrameStack(np.arange(900 * 2 * 2, dtype=float).reshape(900, 2, 2))
    assert window(st, 0, st.frames) == st

    subs = [window(st, s, n) for s, n in window_bounds(st.frames, 100)]
    assert len(subs) == 9
    assert subs[3].frames == 100
    np.testing.assert_array_equal(subs[3].frame(0), st.frame(300))

    for length in (50, 75, 100, 125, 150):
        assert window(st, 0, length).frames == length

    with pytest.raises(ValueError):
        window(st, 850, 100)
    with pytest.raises(ValueError):
        window(st, -1, 10)


def test_window_bounds_remainder():
    """
    A remainder becomes a final shorter window
    """

    assert window_bounds(250, 100) == [(0, 100), (100, 100), (200, 50)]
    assert window_bounds(100, 100) == [(0, 100)]
    assert window_bounds(40, 100) == [(0, 40)]
    with pytest.raises(ValueError):
        window_bounds(10, 0)


def test_register_identical_frames():
    """
    Identical frames need no shift
    """

    frame = np.random.default_rng(1).random((32, 32))
    st = FrameStack(np.stack([frame] * 3))
    out, rep = register_translation(st)
    assert rep.shifts == [(0, 0)] * 3
    assert out == st


def test_register_recovers_shift():
    """
    A circularly shifted copy is found and moved back
    """

    f0 = np.random.default_rng(2).random((32, 32))
    f1 = np.roll(f0, (2, 3), axis=(0, 1))
    st = FrameStack(np.stack([f0, f1]))

    out, rep = register_translation(st, reference=0)
    assert rep.shifts[0] == (0, 0)
    assert rep.shifts[1] == (2, 3)
    assert out.shape == st.shape
    np.testing.assert_array_equal(out.frame(1)[:30, :29], f0[:30, :29])

    (dy, dx), _ = estimate_shift(np.roll(f0, (-5, 4), axis=(0, 1)), f0)
    assert (dy, dx) == (-5, 4)


def test_register_flat_frame():
    """
    A flat frame gets shift (0, 0)
    """

    f0 = np.random.default_rng(4).random((16, 16))
    st = FrameStack(np.stack([f0, np.full((16, 16), 0.5)]))
    _, rep = register_translation(st)
    assert rep.shifts[1] == (0, 0)
    assert rep.scores[1] == 0.


def test_histogram_equalize():
    """
    Constant images stay constant, extremes stay extremes and the histogram flattens
    """

    const = np.full((8, 8), 0.4)
    out = histogram_equalize(const)
    assert np.all(out == out[0, 0])

    half = np.zeros((4, 4))
    half[:, 2:] = 1.
    out = histogram_equalize(half)
    assert out.min() == 0. and out.max() == 1.
    np.testing.assert_array_equal(out, half)

    img = np.random.default_rng(5).beta(2., 5., size=(64, 64))

    def chi2(x):
        counts, _ = np.histogram(x, bins=16, range=(0., 1.))
        expected = x.size / 16.
        return np.sum((counts - expected) ** 2 / expected)

    eq = histogram_equalize(img)
    assert eq.min() >= 0. and eq.max() <= 1.
    assert chi2(eq) < chi2(img)

    st = equalize_stack(FrameStack(np.stack([img, img])))
    np.testing.assert_array_equal(st.frame(1), eq)


def test_temporal_median_subtract():
    """
    Background difference removes everything static
    """

    frame = np.random.default_rng(6).random((6, 6))
    static = FrameStack(np.stack([frame] * 4))
    assert np.all(temporal_median_subtract(static).data == 0.)

    data = np.stack([frame] * 4)
    data[2, 1:3, 1:4] -= 0.3
    st = FrameStack(data)
    out = temporal_median_subtract(st)
    assert np.all(out.data[[0, 1, 3]] == 0.)
    np.testing.assert_allclose(out.data[2, 1:3, 1:4], -0.3)
    np.testing.assert_allclose(out.data + np.median(st.data, axis=0), st.data, rtol=0, atol=1e-15)

    with pytest.raises(ValueError):
        temporal_median_subtract(FrameStack(frame))


def test_top_level_exports():
    """
    Main types are importable from the package root
    """

    assert sbn3d.FrameStack is FrameStack
    assert callable(sbn3d.decompose)
    assert callable(sbn3d.generate_scene)
