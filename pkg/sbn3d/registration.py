"""
Translation-only frame registration by FFT cross-correlation
"""
import logging

import numpy as np
from scipy import ndimage

from sbn3d.stack import FrameStack

logger = logging.getLogger(__name__)


class RegistrationReport(object):
    """Per-frame translations found by `register_translation`

    Attributes:
        reference (int): index of the reference frame
        shifts (list): (dy, dx) per frame; frame i matched the reference
            displaced by (dy, dx) and was moved back by (-dy, -dx)
        scores (list): normalized cross-correlation peak per frame
    """

    def __init__(self, reference, shifts, scores):
        self.reference = reference
        self.shifts = shifts
        self.scores = scores

    def to_dict(self):
        return {
            'reference': self.reference,
            'shifts': [[int(dy), int(dx)] for dy, dx in self.shifts],
            'scores': [float(s) for s in self.scores],
        }

    def __repr__(self):
        moved = sum(1 for s in self.shifts if s != (0, 0))
        return "RegistrationReport: {} frames, {} shifted, reference {}".format(
            len(self.shifts), moved, self.reference)


def _signed(idx, n):
    return idx - n if idx > n // 2 else idx


def estimate_shift(frame, ref, max_shift=None):
    """Integer translation of ``frame`` relative to ``ref``

    Circular normalized cross-correlation computed with FFTs; the peak is
    searched within ``max_shift`` pixels per axis (a quarter of the frame
    size by default).

    Returns:
        tuple: ((dy, dx), peak score). Flat frames give ((0, 0), 0.0).
    """

    frame = np.asarray(frame, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    h, w = ref.shape
    if max_shift is None:
        max_shift = (h // 4, w // 4)

    a = frame - frame.mean()
    r = ref - ref.mean()
    denom = np.linalg.norm(a) * np.linalg.norm(r)
    if denom == 0:
        return (0, 0), 0.

    corr = np.real(np.fft.ifft2(np.fft.fft2(a) * np.conj(np.fft.fft2(r)))) / denom

    dys = np.array([_signed(i, h) for i in range(h)])
    dxs = np.array([_signed(j, w) for j in range(w)])
    allowed = (np.abs(dys)[:, np.newaxis] <= max_shift[0]) & (np.abs(dxs)[np.newaxis, :] <= max_shift[1])
    corr = np.where(allowed, corr, -np.inf)

    i, j = np.unravel_index(np.argmax(corr), corr.shape)
    return (int(dys[i]), int(dxs[j])), float(corr[i, j])


def register_translation(stack, reference=0):
    """Align every frame to a reference frame

    Each frame is moved back by its estimated integer translation. Pixels
    uncovered by the move take the frame's median value.

    Args:
        stack (FrameStack): input video
        reference (int): reference frame index

    Returns:
        tuple: (registered FrameStack, RegistrationReport)
    """

    if not 0 <= reference < stack.frames:
        raise ValueError("register_translation: reference frame {} out of range for {} frames".format(
            reference, stack.frames))

    ref = stack.frame(reference)
    out = np.empty(stack.shape)
    shifts = []
    scores = []
    for i in range(stack.frames):
        frame = stack.frame(i)
        if i == reference:
            shift, score = (0, 0), 1.
        else:
            shift, score = estimate_shift(frame, ref)
        shifts.append(shift)
        scores.append(score)

        if shift == (0, 0):
            out[i] = frame
        else:
            out[i] = ndimage.shift(frame, (-shift[0], -shift[1]), order=0,
                                   mode='constant', cval=np.median(frame))

    report = RegistrationReport(reference, shifts, scores)
    logger.info("%s", report)
    return FrameStack(out), report
