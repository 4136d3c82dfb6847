"""
File formats

- SBNT binary frame stacks
- binary PGM (P5, maxval 255) frame directories
- ground-truth JSON, detection CSV, trace and CDF CSV
"""
import os
import json
import glob
import logging

import numpy as np
import pandas as pd
from PIL import Image

from sbn3d.stack import FrameStack, FormatError

logger = logging.getLogger(__name__)

SBNT_MAGIC = b'SBNT'
SBNT_VERSION = 1
SBNT_HEADER = np.dtype([
    ('magic', 'S4'),
    ('version', '<u2'),
    ('na', '<u4'),
    ('nr', '<u4'),
    ('f', '<u4'),
])

DETECTION_COLUMNS = ['frame', 'id', 'x', 'y', 'w', 'h', 'score']
TRACE_COLUMNS = ['iter', 'mu', 'rel_error', 'objective']


def save_stack(stack, path):
    """Write a FrameStack as an SBNT file

    Pixels are stored as little-endian float32. A float64 stack (a
    generated scene, a decomposition output) is rounded on the way out,
    so loading it back gives differences up to about 3e-8 for values in
    [0, 1]. A stack that was itself read from SBNT round-trips bit-exactly.

    Args:
        stack (FrameStack): stack to write
        path (string): output file name
    """

    header = np.zeros(1, dtype=SBNT_HEADER)
    header['magic'] = SBNT_MAGIC
    header['version'] = SBNT_VERSION
    header['na'] = stack.height
    header['nr'] = stack.width
    header['f'] = stack.frames

    payload = stack.data.astype('<f4')
    try:
        with open(path, 'wb') as f:
            f.write(header.tobytes())
            f.write(payload.tobytes(order='C'))
    except OSError as err:
        raise OSError("save_stack: unable to write {}: {}".format(path, err))

    logger.debug("Wrote %s to %s", stack, path)


def load_stack(path):
    """Read an SBNT file

    Args:
        path (string): input file name

    Returns:
        FrameStack

    Raises:
        FormatError: bad magic, unsupported version, truncated payload or
            non-finite pixel values; the message names the byte offset
    """

    with open(path, 'rb') as f:
        raw = f.read()

    hsize = SBNT_HEADER.itemsize
    if len(raw) < 4 or raw[:4] != SBNT_MAGIC:
        raise FormatError("{}: bad magic {!r} at byte offset 0".format(path, raw[:4]))
    if len(raw) < hsize:
        raise FormatError("{}: truncated header, expected {} bytes at byte offset 0, found {}".format(
            path, hsize, len(raw)))

    header = np.frombuffer(raw, dtype=SBNT_HEADER, count=1)[0]
    if header['version'] != SBNT_VERSION:
        raise FormatError("{}: unsupported version {} at byte offset 4".format(path, header['version']))

    na, nr, nf = int(header['na']), int(header['nr']), int(header['f'])
    if min(na, nr, nf) < 1:
        raise FormatError("{}: zero dimension in header ({} x {} x {}) at byte offset 6".format(
            path, na, nr, nf))

    count = na * nr * nf
    if len(raw) - hsize < 4 * count:
        raise FormatError("{}: truncated payload at byte offset {}, expected {} bytes of pixels".format(
            path, len(raw), 4 * count))

    pixels = np.frombuffer(raw, dtype='<f4', count=count, offset=hsize)
    bad = np.flatnonzero(~np.isfinite(pixels))
    if bad.size > 0:
        raise FormatError("{}: non-finite pixel value at byte offset {}".format(
            path, hsize + 4 * int(bad[0])))

    return FrameStack(pixels.astype(np.float64).reshape(nf, na, nr))


def read_pgm(path):
    """Read a binary 8-bit PGM image

    Returns:
        array: uint8 image of shape (height, width)

    Raises:
        FormatError: not a binary P5 file, not 8-bit, or unreadable pixels
    """

    with open(path, 'rb') as f:
        magic = f.read(2)
    if magic != b'P5':
        raise FormatError("{}: unsupported PGM variant {!r} (only binary P5 is read)".format(path, magic))

    try:
        with Image.open(path) as img:
            fmt, mode = img.format, img.mode
            if fmt == 'PPM' and mode == 'L':
                img.load()
                levels = np.asarray(img, dtype=np.uint8).copy()
    except (OSError, SyntaxError, ValueError) as err:
        raise FormatError("{}: unreadable PGM: {}".format(path, err))

    if fmt != 'PPM' or mode != 'L':
        raise FormatError("{}: unsupported PGM pixel mode {} (only 8-bit gray is read)".format(path, mode))
    return levels


def write_pgm(path, image):
    """Write a uint8 image as binary PGM"""

    image = np.ascontiguousarray(image, dtype=np.uint8)
    Image.fromarray(image).save(path, format='PPM')


def import_frames(directory):
    """Import a directory of PGM frames

    Files are ordered by sorted file name. Pixel value v maps to v/255.

    Args:
        directory (string): directory holding ``*.pgm`` files

    Returns:
        FrameStack
    """

    files = sorted(glob.glob(os.path.join(directory, '*.pgm')))
    if len(files) == 0:
        raise FormatError("{}: no .pgm files found".format(directory))

    frames = []
    for fn in files:
        img = read_pgm(fn)
        if frames and img.shape != frames[0].shape:
            raise FormatError("{}: frame dimensions {} do not match {} of {}".format(
                fn, img.shape, frames[0].shape, files[0]))
        frames.append(img)

    logger.info("Imported %d frames from %s", len(frames), directory)
    return FrameStack(np.stack(frames).astype(np.float64) / 255.)


def to_uint8(data, normalize=False):
    """Map real pixels to 8-bit levels

    Args:
        data (array): real pixel values
        normalize (bool): if True the minimum maps to 0 and the maximum
            to 255; otherwise values are clamped to [0, 1] and scaled

    Returns:
        array: uint8 levels
    """

    data = np.asarray(data, dtype=np.float64)
    if normalize:
        lo, hi = data.min(), data.max()
        if hi > lo:
            data = (data - lo) / (hi - lo)
        else:
            data = np.zeros_like(data)
    return np.rint(np.clip(data, 0., 1.) * 255.).astype(np.uint8)


def export_frames(stack, directory, normalize=False):
    """Export a stack as one PGM file per frame

    Args:
        stack (FrameStack): stack to write
        directory (string): output directory, created if missing
        normalize (bool): stretch the stack's min/max to 0/255
    """

    if not os.path.isdir(directory):
        os.makedirs(directory)

    levels = to_uint8(stack.data, normalize=normalize)
    ndigits = max(5, len(str(stack.frames)))
    for i in range(stack.frames):
        fn = os.path.join(directory, 'frame_{:0{}d}.pgm'.format(i, ndigits))
        write_pgm(fn, levels[i])

    logger.info("Exported %d frames to %s", stack.frames, directory)


def write_json(path, obj):
    """Write a JSON document with sorted keys"""

    with open(path, 'w') as f:
        json.dump(obj, f, sort_keys=True, indent=1)
        f.write('\n')


def read_json(path):
    """Read a JSON document, raising FormatError on malformed input"""

    with open(path, 'r') as f:
        try:
            return json.load(f)
        except ValueError as err:
            raise FormatError("{}: malformed JSON: {}".format(path, err))


def save_ground_truth(gt, path):
    """Write ground truth as JSON (``frames: [{frame, objects: [...]}]``)"""

    write_json(path, gt.to_dict())


def load_ground_truth(path):
    """Read a ground-truth JSON document

    Returns:
        sbn3d.evaluation.GroundTruth
    """

    from sbn3d.evaluation import GroundTruth

    doc = read_json(path)
    try:
        return GroundTruth.from_dict(doc)
    except (KeyError, TypeError) as err:
        raise FormatError("{}: malformed ground truth: missing {}".format(path, err))


def save_detections(dets, path):
    """Write detections as CSV ``frame,id,x,y,w,h,score``

    Args:
        dets (list): Detection objects; an ``id`` attribute of None is
            written as -1
        path (string): output CSV
    """

    rows = [d.to_row() for d in dets]
    df = pd.DataFrame(rows, columns=DETECTION_COLUMNS)
    df.to_csv(path, index=False, float_format='%.6f')


def load_detections(path):
    """Read a detection CSV

    Returns:
        list of Detection, with ``id`` None where the file holds -1
    """

    from sbn3d.detection import Detection

    try:
        df = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise FormatError("{}: malformed detections CSV: {}".format(path, err))

    missing = [c for c in DETECTION_COLUMNS if c not in df.columns]
    if missing:
        raise FormatError("{}: detections CSV is missing columns {}".format(path, missing))

    dets = []
    for row in df.itertuples(index=False):
        tid = int(row.id)
        dets.append(Detection(
            int(row.frame), (int(row.x), int(row.y), int(row.w), int(row.h)), float(row.score),
            id=None if tid < 0 else tid
        ))
    return dets


def save_trace(result, path):
    """Write a decomposition trace as CSV ``iter,mu,rel_error,objective``"""

    df = pd.DataFrame(result.trace, columns=TRACE_COLUMNS)
    df.to_csv(path, index=False, float_format='%.10g')


def load_trace(path):
    """Read a trace CSV into a DataFrame"""

    return pd.read_csv(path)
