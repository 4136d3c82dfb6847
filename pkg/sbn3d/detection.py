"""
Threshold and connected-component shadow detector
"""
import logging

import numpy as np
from scipy import ndimage

logger = logging.getLogger(__name__)

POLARITIES = ('dark', 'bright')

# 8-connectivity
_STRUCTURE = np.ones((3, 3), dtype=bool)


class Detection(object):
    """A detected shadow box

    Args:
        frame (int): frame index
        box (tuple): (x, y, w, h) in pixels; (x, y) is the column and row
            of the top-left pixel
        score (float): confidence in [0, 1]
        id (int [optional]): track id, None for untracked detections
    """

    def __init__(self, frame, box, score, id=None):
        x, y, w, h = box
        if w <= 0 or h <= 0:
            raise ValueError("Detection: box width and height must be > 0, got {}".format(box))
        self.frame = int(frame)
        self.box = (int(x), int(y), int(w), int(h))
        self.score = float(score)
        self.id = id

    def sort_key(self):
        return (self.frame, self.box[0], self.box[1])

    def to_row(self):
        return [self.frame, -1 if self.id is None else int(self.id)] + list(self.box) + [self.score]

    def __repr__(self):
        return "Detection(frame={}, box={}, score={:.3f}, id={})".format(
            self.frame, self.box, self.score, self.id)


def iou(a, b):
    """Intersection over union of two (x, y, w, h) boxes"""

    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    iw = min(ax + aw, bx + bw) - max(ax, bx)
    ih = min(ay + ah, by + bh) - max(ay, by)
    if iw <= 0 or ih <= 0:
        return 0.
    inter = float(iw * ih)
    return inter / (aw * ah + bw * bh - inter)


def _component_score(frame, mask, polarity, span):
    ring = ndimage.binary_dilation(mask, structure=_STRUCTURE, iterations=2) & ~mask
    if span == 0 or not np.any(ring):
        return 0.
    diff = np.mean(frame[ring]) - np.mean(frame[mask])
    if polarity == 'bright':
        diff = -diff
    return float(np.clip(diff / span, 0., 1.))


def detect_frame(frame, threshold, min_area=4, polarity='dark', index=0):
    """Detections in a single 2D frame

    Returns:
        list of Detection sorted by (x, y)
    """

    if polarity not in POLARITIES:
        raise ValueError("polarity must be one of {}, got {!r}".format(POLARITIES, polarity))

    frame = np.asarray(frame, dtype=np.float64)
    binary = frame < threshold if polarity == 'dark' else frame > threshold
    labels, nlabels = ndimage.label(binary, structure=_STRUCTURE)
    if nlabels == 0:
        return []

    span = float(frame.max() - frame.min())
    dets = []
    for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None:
            continue
        mask = labels == lab
        if np.count_nonzero(mask[sl]) < min_area:
            continue
        ys, xs = sl
        box = (xs.start, ys.start, xs.stop - xs.start, ys.stop - ys.start)
        dets.append(Detection(index, box, _component_score(frame, mask, polarity, span)))

    return sorted(dets, key=Detection.sort_key)


def detect_shadows(stack, threshold, min_area=4, polarity='dark'):
    """Detect shadows in every frame of a stack

    Each frame is binarized (below ``threshold`` for dark shadows, above it
    for bright ones), split into 8-connected components, and every
    component of at least ``min_area`` pixels becomes one detection. The
    score is the component's mean contrast against a two-pixel surrounding
    ring, divided by the frame's value range and clamped to [0, 1].

    Args:
        stack (FrameStack): raw frames, or |S| of a decomposition
        threshold (float): binarization level
        min_area (int): smallest component kept, in pixels
        polarity (str): 'dark' or 'bright'

    Returns:
        list of Detection ordered by (frame, x, y)
    """

    dets = []
    for i in range(stack.frames):
        dets.extend(detect_frame(stack.frame(i), threshold, min_area, polarity, index=i))
    logger.info("Detected %d shadows in %d frames", len(dets), stack.frames)
    return dets
