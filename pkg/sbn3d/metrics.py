"""
Image quality metrics for enhanced shadow imagery

- contrast of the gray-level co-occurrence distribution
- edge preservation index against a reference image
- two-dimensional (pixel, neighbourhood) entropy
- pixel histogram and cumulative gray percentage
"""
import json
import math

import numpy as np
from scipy import ndimage, stats
from skimage.feature import graycomatrix, graycoprops

DEFAULT_OFFSETS = ((0, 1), (1, 0))


def quantize(img):
    """Clamp to [0, 1] and map to 256 integer gray levels"""
    img = np.asarray(img, dtype=np.float64)
    return np.rint(np.clip(img, 0., 1.) * 255.).astype(np.uint8)


def normalize_unit(x):
    """Min-max map to [0, 1]; a constant input maps to all zeros"""
    x = np.asarray(x, dtype=np.float64)
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def glcm_contrast(img, offsets=DEFAULT_OFFSETS):
    """Contrast of the gray-level co-occurrence distribution

    For each (dy, dx) offset the symmetric normalized co-occurrence matrix
    of the quantized image is built and sum((i - j)^2 P(i, j)) taken; the
    result is the mean over offsets.

    Args:
        img (array): 2D real image, values nominally in [0, 1]
        offsets (iterable): (dy, dx) pixel displacements

    Returns:
        float: contrast in squared gray levels
    """

    offsets = list(offsets)
    if len(offsets) == 0:
        raise ValueError("glcm_contrast: offset set is empty")

    levels = quantize(img)
    h, w = levels.shape
    values = []
    for dy, dx in offsets:
        if (dy, dx) == (0, 0):
            raise ValueError("glcm_contrast: offset (0, 0) is not a displacement")
        if abs(dy) >= h or abs(dx) >= w:
            raise ValueError("glcm_contrast: offset ({}, {}) admits no pixel pair in a {} x {} image".format(
                dy, dx, h, w))
        # graycomatrix steps round(sin(angle)*d) rows and round(cos(angle)*d) columns
        glcm = graycomatrix(levels, [math.hypot(dy, dx)], [math.atan2(dy, dx)],
                            levels=256, symmetric=True, normed=True)
        values.append(float(graycoprops(glcm, 'contrast')[0, 0]))

    return float(np.mean(values))


def edge_preservation_index(evaluation, reference):
    """Edge preservation index

    Summed absolute vertical and horizontal neighbour differences of the
    evaluation image over the same sum for the reference image. Computed
    on the real pixel values, so EPI(x, x) is exactly 1.

    Args:
        evaluation (array): 2D image under evaluation
        reference (array): 2D reference image of the same shape

    Returns:
        float: EPI
    """

    ev = np.asarray(evaluation, dtype=np.float64)
    ref = np.asarray(reference, dtype=np.float64)
    if ev.shape != ref.shape:
        raise ValueError("edge_preservation_index: shapes differ, {} vs {}".format(ev.shape, ref.shape))

    def _gradient_sum(x):
        return np.sum(np.abs(np.diff(x, axis=0))) + np.sum(np.abs(np.diff(x, axis=1)))

    den = _gradient_sum(ref)
    if den == 0:
        raise ValueError("edge_preservation_index: reference image is flat")
    return float(_gradient_sum(ev) / den)


def neighbourhood_mean(levels):
    """Rounded mean gray level of the 8 neighbours of each interior pixel"""

    levels = np.asarray(levels, dtype=np.int64)
    kernel = np.ones((3, 3), dtype=np.int64)
    kernel[1, 1] = 0
    total = ndimage.convolve(levels, kernel, mode='constant', cval=0)
    return np.rint(total[1:-1, 1:-1] / 8.).astype(np.int64)


def entropy_2d(img):
    """Joint entropy of (gray level, neighbourhood mean gray level)

    Pairs are formed for interior pixels only; the result is
    -sum(P log2 P) in bits.

    Args:
        img (array): 2D real image at least 3 x 3

    Returns:
        float: entropy in bits, within [0, 16]
    """

    levels = quantize(img).astype(np.int64)
    if min(levels.shape) < 3:
        raise ValueError("entropy_2d: image must be at least 3 x 3, got {}".format(levels.shape))

    center = levels[1:-1, 1:-1]
    mean = neighbourhood_mean(levels)
    counts = np.bincount((center * 256 + mean).ravel(), minlength=256 * 256)
    p = counts[counts > 0] / float(center.size)
    return float(max(-np.sum(p * np.log2(p)), 0.))


def pixel_statistics(img):
    """Pixel statistic and gray percentage curves

    Returns:
        tuple: (counts per gray level 0..255, cumulative fraction of pixels
            at or below each level)
    """

    levels = quantize(img)
    hist = np.bincount(levels.ravel(), minlength=256)
    return hist, np.cumsum(hist) / float(levels.size)


def crop(img, box):
    """Sub-image for box (x, y, w, h), clipped to the image"""

    x, y, w, h = box
    height, width = np.shape(img)
    x0, y0 = max(int(x), 0), max(int(y), 0)
    x1, y1 = min(int(x + w), width), min(int(y + h), height)
    if x1 <= x0 or y1 <= y0:
        raise ValueError("crop: box {} lies outside a {} x {} image".format(box, height, width))
    return np.asarray(img)[y0:y1, x0:x1]


def grow_box(box, margin, height, width):
    """Box enlarged by ``margin`` pixels per side and clipped to the frame"""

    x, y, w, h = box
    x0, y0 = max(x - margin, 0), max(y - margin, 0)
    x1, y1 = min(x + w + margin, width), min(y + h + margin, height)
    return (x0, y0, x1 - x0, y1 - y0)


def shadow_chips(frame, boxes, margin=4):
    """Shadow-centred crops of a frame

    Args:
        frame (array): 2D image
        boxes (list): (x, y, w, h) shadow boxes
        margin (int): pixels added around each box

    Returns:
        list of arrays
    """

    height, width = np.shape(frame)
    return [crop(frame, grow_box(b, margin, height, width)) for b in boxes]


class MetricsReport(object):
    """Per-frame quality metrics with stack aggregates

    Attributes:
        frames (list): frame indices that were evaluated
        contrast, epi, entropy (list): per-frame values
    """

    def __init__(self, frames, contrast, epi, entropy):
        self.frames = list(frames)
        self.contrast = list(contrast)
        self.epi = list(epi)
        self.entropy = list(entropy)

    @staticmethod
    def _mean(values):
        return float(np.mean(values)) if len(values) > 0 else float('nan')

    @property
    def mean_contrast(self):
        return self._mean(self.contrast)

    @property
    def mean_epi(self):
        return self._mean(self.epi)

    @property
    def mean_entropy(self):
        return self._mean(self.entropy)

    def to_dict(self):
        return {
            'frames': [int(f) for f in self.frames],
            'contrast': {'per_frame': self.contrast, 'mean': self.mean_contrast},
            'epi': {'per_frame': self.epi, 'mean': self.mean_epi},
            'entropy': {'per_frame': self.entropy, 'mean': self.mean_entropy},
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def __repr__(self):
        return "MetricsReport: {} frames, contrast={:.4f} epi={:.4f} entropy={:.4f}".format(
            len(self.frames), self.mean_contrast, self.mean_epi, self.mean_entropy)


def stack_metrics(evaluation, reference, crop_box=None, chips=None, margin=4,
                  offsets=DEFAULT_OFFSETS, normalize=True):
    """Contrast, EPI and entropy of every frame of a stack

    Both stacks are min-max normalized over the whole stack first (unless
    ``normalize`` is off). Metrics are then taken on the full frame, on a
    fixed crop rectangle, or on shadow chips; a frame with several chips
    scores the mean over its chips and a frame without chips is skipped.

    Args:
        evaluation (FrameStack): enhanced stack under evaluation
        reference (FrameStack): reference stack for EPI, usually the raw video
        crop_box (tuple [optional]): (x, y, w, h) applied to every frame
        chips (dict [optional]): frame index -> list of (x, y, w, h) boxes
        margin (int): pixels added around every chip box
        offsets (iterable): co-occurrence offsets for contrast
        normalize (bool): min-max normalize each stack

    Returns:
        MetricsReport
    """

    if evaluation.shape != reference.shape:
        raise ValueError("stack_metrics: stack shapes differ, {} vs {}".format(
            evaluation.shape, reference.shape))
    if crop_box is not None and chips is not None:
        raise ValueError("stack_metrics: use either a crop rectangle or shadow chips, not both")

    ev = normalize_unit(evaluation.data) if normalize else evaluation.data
    ref = normalize_unit(reference.data) if normalize else reference.data

    frames, contrast, epi, entropy = [], [], [], []
    for i in range(evaluation.frames):
        if chips is not None:
            boxes = chips.get(i, [])
            if len(boxes) == 0:
                continue
            ev_imgs = shadow_chips(ev[i], boxes, margin)
            ref_imgs = shadow_chips(ref[i], boxes, margin)
        elif crop_box is not None:
            ev_imgs, ref_imgs = [crop(ev[i], crop_box)], [crop(ref[i], crop_box)]
        else:
            ev_imgs, ref_imgs = [ev[i]], [ref[i]]

        frames.append(i)
        contrast.append(float(np.mean([glcm_contrast(e, offsets) for e in ev_imgs])))
        epi.append(float(np.mean([edge_preservation_index(e, r) for e, r in zip(ev_imgs, ref_imgs)])))
        entropy.append(float(np.mean([entropy_2d(e) for e in ev_imgs])))

    return MetricsReport(frames, contrast, epi, entropy)


NOISE_DISTRIBUTIONS = {
    'gaussian': stats.norm,
    'rayleigh': stats.rayleigh,
    'exponential': stats.expon,
}


def noise_statistics(residual, max_samples=200000):
    """Shape statistics of a noise residual

    Moments plus the maximum-likelihood fit of each candidate noise
    distribution; ``best`` names the distribution with the highest mean
    log-likelihood.

    Args:
        residual (array): noise samples, any shape
        max_samples (int): evenly strided subsample used for the fits

    Returns:
        dict
    """

    x = np.asarray(residual, dtype=np.float64).ravel()
    if x.size < 2:
        raise ValueError("noise_statistics: need at least 2 samples")
    if x.size > max_samples:
        x = x[::int(math.ceil(x.size / float(max_samples)))]

    out = {
        'mean': float(np.mean(x)),
        'std': float(np.std(x)),
        'skewness': float(stats.skew(x)),
        'kurtosis': float(stats.kurtosis(x)),
        'loglike': {},
    }
    if np.std(x) == 0:
        out['best'] = None
        return out

    for kind, dist in NOISE_DISTRIBUTIONS.items():
        params = dist.fit(x)
        out['loglike'][kind] = float(np.mean(dist.logpdf(x, *params)))
    out['best'] = max(sorted(out['loglike']), key=lambda k: out['loglike'][k])
    return out
