"""
Video tensor containers and the reshaping operations the solver runs on.
"""
import numpy as np


class FormatError(ValueError):
    """Raised when a file does not match the format it claims to be."""


class FrameStack(object):
    """Stack of grayscale frames

    A video of ``frames`` grayscale images, each ``height`` x ``width``
    real pixels. Pixels are stored as an array of shape
    (frames, height, width); each frame is row-major.

    Args:
        data (array): pixel values with shape (frames, height, width)

    Attributes:
        data (array): float64 pixel array, read-only
        height (int): pixels per column (Na)
        width (int): pixels per row (Nr)
        frames (int): frame count (f)
    """

    def __init__(self, data):
        data = np.array(data, dtype=np.float64)
        if data.ndim == 2:
            data = data[np.newaxis, :, :]
        if data.ndim != 3:
            raise ValueError(
                "FrameStack: expected a 3D array (frames, height, width), got shape {}".format(data.shape)
            )
        if min(data.shape) < 1:
            raise ValueError(
                "FrameStack: every dimension must be >= 1, got shape {}".format(data.shape)
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("FrameStack: pixel values must be finite")

        data.setflags(write=False)
        self.data = data

    @property
    def frames(self):
        return self.data.shape[0]

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]

    @property
    def shape(self):
        return self.data.shape

    def frame(self, i):
        """Return frame ``i`` as a 2D array."""
        return self.data[i]

    def __len__(self):
        return self.frames

    def __eq__(self, other):
        if not isinstance(other, FrameStack):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.data, other.data)

    def __repr__(self):
        return "FrameStack: {} frames of {} x {} pixels".format(
            self.frames, self.height, self.width
        )


class MatricizedVideo(object):
    """Matrix form of a FrameStack

    One vectorized frame per column: an Nc x f matrix with Nc = height * width.

    Args:
        matrix (array): Nc x f real matrix
        height (int [optional]): frame height of the originating stack
        width (int [optional]): frame width of the originating stack
    """

    def __init__(self, matrix, height=None, width=None):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError(
                "MatricizedVideo: expected a 2D matrix, got shape {}".format(matrix.shape)
            )
        if height is not None and width is not None and height * width != matrix.shape[0]:
            raise ValueError(
                "MatricizedVideo: height x width = {} does not match Nc = {}".format(
                    height * width, matrix.shape[0])
            )
        self.matrix = matrix
        self.height = height
        self.width = width

    @property
    def pixels_per_frame(self):
        return self.matrix.shape[0]

    @property
    def frames(self):
        return self.matrix.shape[1]

    @property
    def shape(self):
        return self.matrix.shape

    def __repr__(self):
        return "MatricizedVideo: {} pixels x {} frames".format(
            self.pixels_per_frame, self.frames
        )


def matricize(stack):
    """Matricize a frame stack

    Args:
        stack (FrameStack): input video

    Returns:
        MatricizedVideo: column j is frame j flattened row-major
    """

    matrix = stack.data.reshape(stack.frames, stack.height * stack.width).T.copy()
    return MatricizedVideo(matrix, height=stack.height, width=stack.width)


def tensorize(mat, height=None, width=None):
    """Inverse of `matricize`

    Args:
        mat (MatricizedVideo or array): Nc x f matrix
        height (int): frame height; defaults to the value stored on ``mat``
        width (int): frame width; defaults to the value stored on ``mat``

    Returns:
        FrameStack
    """

    if isinstance(mat, MatricizedVideo):
        if height is None:
            height = mat.height
        if width is None:
            width = mat.width
        matrix = mat.matrix
    else:
        matrix = np.asarray(mat, dtype=np.float64)

    if height is None or width is None:
        raise ValueError("tensorize: frame height and width are required")
    nc, f = matrix.shape
    if height * width != nc:
        raise ValueError(
            "tensorize: height x width = {} x {} does not match Nc = {}".format(height, width, nc)
        )

    return FrameStack(matrix.T.reshape(f, height, width))


def window(stack, start, length):
    """Sub-video of consecutive frames

    Args:
        stack (FrameStack): input video
        start (int): first frame index
        length (int): number of frames

    Returns:
        FrameStack: frames [start, start+length) in order
    """

    if start < 0 or length < 1 or start + length > stack.frames:
        raise ValueError(
            "window: frames [{}, {}) out of range for a {}-frame stack".format(
                start, start + length, stack.frames)
        )
    return FrameStack(stack.data[start:start + length])


def window_bounds(nframes, length):
    """Consecutive window boundaries

    Split ``nframes`` frames into windows of ``length`` frames. A remainder
    forms a final shorter window.

    Returns:
        list of tuples: (start, length) per window
    """

    if length < 1:
        raise ValueError("window length must be >= 1, got {}".format(length))
    bounds = []
    for start in range(0, nframes, length):
        bounds.append((start, min(length, nframes - start)))
    return bounds


def concatenate(stacks):
    """Concatenate frame stacks along the time axis."""

    return FrameStack(np.concatenate([s.data for s in stacks], axis=0))
