"""
Classical enhancement baselines the decomposition is compared against
"""
import numpy as np

from sbn3d.stack import FrameStack


def histogram_equalize(frame):
    """256-bin histogram equalization

    The image is clamped to [0, 1] and quantized to 256 levels, then each
    level is remapped through the normalized cumulative histogram so the
    darkest occupied level goes to 0 and the brightest to 1.

    Args:
        frame (array): 2D real image

    Returns:
        array: equalized image in [0, 1]
    """

    frame = np.asarray(frame, dtype=np.float64)
    levels = np.rint(np.clip(frame, 0., 1.) * 255.).astype(np.intp)
    cdf = np.cumsum(np.bincount(levels.ravel(), minlength=256))
    cdf_min = cdf[levels.min()]
    npix = levels.size
    if npix == cdf_min:
        # single occupied level
        return levels / 255.
    lut = np.clip((cdf - cdf_min) / float(npix - cdf_min), 0., 1.)
    return lut[levels]


def equalize_stack(stack):
    """Histogram-equalize every frame of a stack"""
    return FrameStack(np.stack([histogram_equalize(stack.frame(i)) for i in range(stack.frames)]))


def temporal_median_subtract(stack):
    """Background difference: subtract the per-pixel temporal median

    Args:
        stack (FrameStack): input video with at least 2 frames

    Returns:
        FrameStack: input minus its per-pixel median across frames
    """

    if stack.frames < 2:
        raise ValueError("temporal_median_subtract: needs >= 2 frames, got {}".format(stack.frames))
    return FrameStack(stack.data - np.median(stack.data, axis=0))
