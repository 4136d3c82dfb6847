import json
import math
import warnings

import numpy as np
import pytest

from sbn3d import metrics
from sbn3d.metrics import (
    glcm_contrast, edge_preservation_index, entropy_2d, pixel_statistics, quantize,
    stack_metrics, noise_statistics, shadow_chips, grow_box
)
from sbn3d.stack import FrameStack, matricize
from sbn3d.solver import decompose
from sbn3d.scene import canonical_scene, generate_scene
from sbn3d.report import compare_enhancements, enhancement_outputs

warnings.simplefilter('ignore')


def _contrast_loop(img, offsets):
    levels = quantize(img).astype(int)
    h, w = levels.shape
    values = []
    for dy, dx in offsets:
        total, count = 0., 0
        for i in range(h):
            for j in range(w):
                k, l = i + dy, j + dx
                if 0 <= k < h and 0 <= l < w:
                    total += (levels[i, j] - levels[k, l]) ** 2
                    count += 1
        values.append(total / count)
    return sum(values) / len(values)


def _epi_loop(ev, ref):
    def grad(x):
        h, w = x.shape
        g = 0.
        for i in range(h):
            for j in range(w):
                if i + 1 < h:
                    g += abs(x[i + 1, j] - x[i, j])
                if j + 1 < w:
                    g += abs(x[i, j + 1] - x[i, j])
        return g
    return grad(ev) / grad(ref)


def _entropy_loop(img):
    levels = quantize(img).astype(int)
    h, w = levels.shape
    counts = {}
    for i in range(1, h - 1):
        for j in range(1, w - 1):
            total = 0
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    if di or dj:
                        total += levels[i + di, j + dj]
            key = (levels[i, j], round(total / 8.))
            counts[key] = counts.get(key, 0) + 1
    n = float((h - 2) * (w - 2))
    return -sum(c / n * math.log(c / n, 2) for c in counts.values())


def test_contrast_cases():
    """
    Constant images have no contrast, a black/white pair has the maximum
    """

    assert glcm_contrast(np.full((8, 8), 0.4)) == 0.
    assert glcm_contrast(np.array([[0., 1.]]), offsets=((0, 1),)) == pytest.approx(65025.)

    with pytest.raises(ValueError):
        glcm_contrast(np.zeros((4, 4)), offsets=())
    with pytest.raises(ValueError):
        glcm_contrast(np.zeros((3, 4)), offsets=((0, 5),))
    with pytest.raises(ValueError):
        glcm_contrast(np.zeros((3, 4)), offsets=((0, 0),))


def test_epi_cases():
    """
    EPI is exactly one against itself and scales with the edges
    """

    rng = np.random.default_rng(20)
    x = rng.random((16, 16))
    assert edge_preservation_index(x, x) == 1.
    assert edge_preservation_index(x.copy(), x) == 1.
    assert edge_preservation_index(2. * x, x) == pytest.approx(2.)
    assert edge_preservation_index(np.full((16, 16), 0.3), x) == 0.

    with pytest.raises(ValueError):
        edge_preservation_index(x, np.full((16, 16), 0.5))
    with pytest.raises(ValueError):
        edge_preservation_index(x, x[:8])


def test_entropy_cases():
    """
    Constant images carry no information, a lone bright pixel carries one bit
    """

    assert entropy_2d(np.full((6, 6), 0.7)) == 0.

    img = np.zeros((3, 4))
    img[1, 2] = 1.
    assert entropy_2d(img) == pytest.approx(1.)

    with pytest.raises(ValueError):
        entropy_2d(np.zeros((2, 5)))


def test_metrics_match_loop_oracles():
    """
    All three metrics agree with direct double loops
    """

    rng = np.random.default_rng(21)
    offsets = ((0, 1), (1, 0), (1, 1), (2, -1))
    for _ in range(100):
        a = rng.random((16, 16))
        b = rng.random((16, 16))
        assert glcm_contrast(a, offsets) == pytest.approx(_contrast_loop(a, offsets), rel=1e-12, abs=1e-9)
        assert edge_preservation_index(a, b) == pytest.approx(_epi_loop(a, b), rel=1e-12, abs=1e-9)
        assert entropy_2d(a) == pytest.approx(_entropy_loop(a), rel=1e-12, abs=1e-9)
        assert 0. <= entropy_2d(a) <= 16.


def test_contrast_diagonal_direction():
    """
    Diagonal offsets follow rows down and columns right
    """

    i, j = np.indices((8, 8))
    stripes = ((i - j) % 8) / 7.
    assert glcm_contrast(stripes, ((1, 1),)) == 0.
    assert glcm_contrast(stripes, ((1, -1),)) > 0.
    for offset in ((1, 1), (1, -1), (2, -1), (-1, 2)):
        assert glcm_contrast(stripes, (offset,)) == pytest.approx(
            _contrast_loop(stripes, (offset,)), rel=1e-12, abs=1e-9)


def test_pixel_statistics():
    """
    Histogram counts every pixel and the gray percentage ends at one
    """

    img = np.zeros((4, 6))
    img[:, 3:] = 1.
    hist, cum = pixel_statistics(img)
    assert hist.shape == (256,) and cum.shape == (256,)
    assert hist[0] == 12 and hist[255] == 12 and hist.sum() == 24
    assert cum[0] == 0.5 and cum[254] == 0.5 and cum[-1] == 1.
    assert np.all(np.diff(cum) >= 0)


def test_chips():
    """
    Chips grow around boxes and stop at the frame edge
    """

    assert grow_box((10, 20, 7, 5), 4, 64, 64) == (6, 16, 15, 13)
    assert grow_box((1, 1, 5, 5), 4, 64, 64) == (0, 0, 10, 10)
    assert grow_box((60, 60, 4, 4), 4, 64, 64) == (56, 56, 8, 8)

    frame = np.arange(64 * 64, dtype=float).reshape(64, 64)
    chips = shadow_chips(frame, [(10, 20, 7, 5), (1, 1, 5, 5)], margin=4)
    assert [c.shape for c in chips] == [(13, 15), (10, 10)]
    assert chips[0][0, 0] == frame[16, 6]


def test_stack_metrics_report():
    """
    Per-frame values, aggregate means and JSON layout
    """

    rng = np.random.default_rng(22)
    ref = FrameStack(rng.random((4, 12, 12)))
    rep = stack_metrics(ref, ref)
    assert rep.frames == [0, 1, 2, 3]
    assert rep.epi == [1.] * 4
    assert rep.mean_epi == 1.

    doc = json.loads(rep.to_json())
    assert set(doc) == {'frames', 'contrast', 'epi', 'entropy'}
    assert set(doc['contrast']) == {'per_frame', 'mean'}

    chips = {1: [(2, 2, 3, 3)], 3: [(1, 1, 2, 2), (6, 6, 3, 3)]}
    rep = stack_metrics(ref, ref, chips=chips, margin=1)
    assert rep.frames == [1, 3]

    rep = stack_metrics(ref, ref, crop_box=(0, 0, 6, 6))
    assert len(rep.contrast) == 4

    with pytest.raises(ValueError):
        stack_metrics(ref, ref, crop_box=(0, 0, 6, 6), chips=chips)
    with pytest.raises(ValueError):
        stack_metrics(ref, FrameStack(rng.random((3, 12, 12))))


def test_noise_statistics():
    """
    Gaussian residuals are recognised as Gaussian
    """

    rng = np.random.default_rng(23)
    stats = noise_statistics(rng.normal(scale=0.02, size=20000))
    assert stats['best'] == 'gaussian'
    assert stats['std'] == pytest.approx(0.02, rel=0.05)
    assert abs(stats['skewness']) < 0.1
    assert set(stats['loglike']) == set(metrics.NOISE_DISTRIBUTIONS)

    assert noise_statistics(np.zeros(10))['best'] is None
    with pytest.raises(ValueError):
        noise_statistics(np.zeros(1))


def test_enhancement_outputs():
    """
    Every comparison method yields a stack of the input shape
    """

    d, s, _, _, _ = generate_scene(canonical_scene(), seed=0)
    outs = enhancement_outputs(d, s)
    assert sorted(outs) == ['bgdiff', 'histeq', 'raw', 'sbn']
    for st in outs.values():
        assert st.shape == d.shape
    assert np.all(outs['sbn'].data >= 0.)


def test_decomposition_enhances_shadow_contrast():
    """
    On the canonical scene the shadow component beats the raw video and the
    background difference in contrast, with lower entropy than the raw video
    """

    d, _, _, _, gt = generate_scene(canonical_scene(sigma=0.02), seed=0)
    res = decompose(matricize(d))
    s_hat = res.stacks()[0]

    table = compare_enhancements(d, s_hat, chips=gt.chips(), margin=4)
    assert list(table.columns) == ['epi', 'entropy', 'contrast']
    assert table.loc['sbn', 'contrast'] >= 2. * table.loc['raw', 'contrast']
    assert table.loc['sbn', 'entropy'] < table.loc['raw', 'entropy']
    assert table.loc['sbn', 'contrast'] > table.loc['bgdiff', 'contrast']
    assert table.loc['raw', 'epi'] == 1.
