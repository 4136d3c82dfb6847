"""
Synthetic moving-shadow scenes with known decompositions

A scene is a static smooth background B, dark moving target footprints S
and random noise N; the generated video is D = S + B + N, together with
ground-truth boxes and identities for every target in every frame.
"""
import math

import numpy as np

from sbn3d.stack import FrameStack
from sbn3d.evaluation import GroundTruth

SHAPES = ('rectangle', 'ellipse')
NOISE_KINDS = ('gaussian', 'rayleigh', 'exponential')


class SmoothProfile(object):
    """Raised-cosine profile along one image axis

    ``lo + (hi - lo) * (0.5 - 0.5 cos(2 pi cycles t / (n - 1) + phase))``
    for t = 0 .. n-1.
    """

    def __init__(self, lo, hi, cycles=1.0, phase=0.0):
        self.lo = float(lo)
        self.hi = float(hi)
        self.cycles = float(cycles)
        self.phase = float(phase)

    def values(self, n):
        t = np.arange(n, dtype=np.float64)
        denom = max(n - 1, 1)
        s = 0.5 - 0.5 * np.cos(2. * np.pi * self.cycles * t / denom + self.phase)
        return self.lo + (self.hi - self.lo) * s

    def to_dict(self):
        return dict(lo=self.lo, hi=self.hi, cycles=self.cycles, phase=self.phase)

    @classmethod
    def from_dict(cls, doc):
        return cls(**doc)


class TargetSpec(object):
    """A moving shadow

    Args:
        size (tuple): (height, width) in pixels
        start (tuple): (y, x) of the top-left corner at frame 0
        velocity (tuple): (vy, vx) pixels per frame
        acceleration (tuple): (ay, ax) pixels per frame squared, for
            quadratic paths
        depth (float): intensity offset inside the footprint, < 0
        shape (str): 'rectangle' or 'ellipse' inscribed in the size box
    """

    def __init__(self, size, start, velocity=(0., 0.), acceleration=(0., 0.),
                 depth=-0.3, shape='rectangle'):
        self.size = (int(size[0]), int(size[1]))
        self.start = (float(start[0]), float(start[1]))
        self.velocity = (float(velocity[0]), float(velocity[1]))
        self.acceleration = (float(acceleration[0]), float(acceleration[1]))
        self.depth = float(depth)
        self.shape = shape

    def validate(self):
        if self.shape not in SHAPES:
            raise ValueError("TargetSpec: shape must be one of {}, got {!r}".format(SHAPES, self.shape))
        if not self.depth < 0:
            raise ValueError("TargetSpec: depth must be < 0, got {}".format(self.depth))
        if np.count_nonzero(self.footprint()) < 4:
            raise ValueError("TargetSpec: footprint {} covers fewer than 4 pixels".format(self.size))

    def footprint(self):
        """Boolean mask of the target within its size box"""

        h, w = self.size
        if h < 1 or w < 1:
            return np.zeros((max(h, 0), max(w, 0)), dtype=bool)
        if self.shape == 'rectangle':
            return np.ones((h, w), dtype=bool)
        yy, xx = np.mgrid[0:h, 0:w]
        cy, cx = (h - 1) / 2., (w - 1) / 2.
        return ((yy - cy) / (h / 2.)) ** 2 + ((xx - cx) / (w / 2.)) ** 2 <= 1.

    def position(self, frame):
        """Integer (y, x) of the size box's top-left corner at ``frame``"""

        pos = []
        for axis in range(2):
            p = self.start[axis] + self.velocity[axis] * frame + 0.5 * self.acceleration[axis] * frame ** 2
            pos.append(int(math.floor(p + 0.5)))
        return tuple(pos)

    def to_dict(self):
        return dict(size=list(self.size), start=list(self.start), velocity=list(self.velocity),
                    acceleration=list(self.acceleration), depth=self.depth, shape=self.shape)

    @classmethod
    def from_dict(cls, doc):
        return cls(**doc)


class NoiseModel(object):
    """Additive noise distribution

    Args:
        kind (str): 'gaussian', 'rayleigh' or 'exponential'
        scale (float): standard deviation (gaussian) or distribution scale
        center (bool): subtract the distribution mean so N is zero-mean
    """

    def __init__(self, kind='gaussian', scale=0.02, center=True):
        self.kind = kind
        self.scale = float(scale)
        self.center = center

    def validate(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError("NoiseModel: kind must be one of {}, got {!r}".format(NOISE_KINDS, self.kind))
        if not self.scale > 0:
            raise ValueError("NoiseModel: scale must be > 0, got {}".format(self.scale))

    def mean(self):
        return {
            'gaussian': 0.,
            'rayleigh': self.scale * math.sqrt(math.pi / 2.),
            'exponential': self.scale,
        }[self.kind]

    def sample(self, rng, shape):
        if self.kind == 'gaussian':
            x = rng.normal(0., self.scale, size=shape)
        elif self.kind == 'rayleigh':
            x = rng.rayleigh(self.scale, size=shape)
        else:
            x = rng.exponential(self.scale, size=shape)
        if self.center:
            x = x - self.mean()
        return x

    def to_dict(self):
        return dict(kind=self.kind, scale=self.scale, center=self.center)

    @classmethod
    def from_dict(cls, doc):
        return cls(**doc)


class SceneSpec(object):
    """Description of a synthetic scene

    Args:
        height, width, frames (int): stack dimensions
        background (list): (row profile, column profile) SmoothProfile pairs;
            the background is the sum of their outer products, rank <= r
        targets (list): TargetSpec objects
        noise (NoiseModel or None): None generates a noise-free scene
        clamp (bool): clip D to [0, 1]
    """

    def __init__(self, height, width, frames, background, targets, noise=None, clamp=False):
        self.height = int(height)
        self.width = int(width)
        self.frames = int(frames)
        self.background = list(background)
        self.targets = list(targets)
        self.noise = noise
        self.clamp = clamp

    def validate(self):
        """Reject malformed specs and targets leaving the frame"""

        if min(self.height, self.width, self.frames) < 1:
            raise ValueError("SceneSpec: dimensions must be >= 1, got {} x {} x {}".format(
                self.height, self.width, self.frames))
        if len(self.background) < 1:
            raise ValueError("SceneSpec: background needs at least one profile pair")
        if self.noise is not None:
            self.noise.validate()

        for k, t in enumerate(self.targets):
            t.validate()
            h, w = t.size
            for f in range(self.frames):
                y, x = t.position(f)
                if y < 0 or x < 0 or y + h > self.height or x + w > self.width:
                    raise ValueError(
                        "SceneSpec: target {} leaves the {} x {} frame at frame {} (corner y={}, x={})".format(
                            k, self.height, self.width, f, y, x))

    def to_dict(self):
        return {
            'height': self.height, 'width': self.width, 'frames': self.frames,
            'background': [[r.to_dict(), c.to_dict()] for r, c in self.background],
            'targets': [t.to_dict() for t in self.targets],
            'noise': None if self.noise is None else self.noise.to_dict(),
            'clamp': self.clamp,
        }

    @classmethod
    def from_dict(cls, doc):
        noise = doc.get('noise')
        return cls(
            doc['height'], doc['width'], doc['frames'],
            [(SmoothProfile.from_dict(r), SmoothProfile.from_dict(c)) for r, c in doc['background']],
            [TargetSpec.from_dict(t) for t in doc.get('targets', [])],
            noise=None if noise is None else NoiseModel.from_dict(noise),
            clamp=doc.get('clamp', False),
        )

    def __repr__(self):
        return "SceneSpec: {} x {} x {}, rank-{} background, {} targets, noise={}".format(
            self.height, self.width, self.frames, len(self.background), len(self.targets),
            None if self.noise is None else self.noise.to_dict())


def canonical_scene(sigma=0.02):
    """The standard 64 x 64 x 100 verification scene

    Rank-1 raised-cosine background spanning [0.3, 0.7], two rectangular
    shadows of depth -0.3 (5 x 7 and 6 x 6 pixels) whose straight paths
    cross the same region at different times, and mean-centred Gaussian
    noise.

    Args:
        sigma (float): Gaussian noise standard deviation; 0 for a noise-free scene
    """

    profile = SmoothProfile(math.sqrt(0.3), math.sqrt(0.7))
    targets = [
        TargetSpec((5, 7), (20., 4.), velocity=(0.2, 0.48), depth=-0.3),
        TargetSpec((6, 6), (50., 40.), velocity=(-0.48, 0.), depth=-0.3),
    ]
    noise = NoiseModel('gaussian', sigma) if sigma > 0 else None
    return SceneSpec(64, 64, 100, [(profile, profile)], targets, noise=noise, clamp=False)


def background_image(spec):
    """Static background frame of a spec"""

    img = np.zeros((spec.height, spec.width))
    for row, col in spec.background:
        img += np.outer(row.values(spec.height), col.values(spec.width))
    return img


def generate_scene(spec, seed=0):
    """Render a scene

    Args:
        spec (SceneSpec): scene description
        seed (int): seed of the PCG64 generator drawing the noise

    Returns:
        tuple: (D, S, B, N FrameStacks, GroundTruth)
    """

    spec.validate()
    rng = np.random.Generator(np.random.PCG64(seed))
    shape = (spec.frames, spec.height, spec.width)

    b = np.broadcast_to(background_image(spec), shape).copy()
    s = np.zeros(shape)
    frames = {f: [] for f in range(spec.frames)}
    for tid, t in enumerate(spec.targets, start=1):
        mask = t.footprint()
        ys, xs = np.nonzero(mask)
        y0, x0 = ys.min(), xs.min()
        bh, bw = ys.max() - y0 + 1, xs.max() - x0 + 1
        h, w = t.size
        for f in range(spec.frames):
            y, x = t.position(f)
            s[f, y:y + h, x:x + w] += t.depth * mask
            frames[f].append((tid, (x + x0, y + y0, bw, bh)))

    if spec.noise is None:
        n = np.zeros(shape)
    else:
        n = spec.noise.sample(rng, shape)

    d = s + b + n
    if spec.clamp:
        d = np.clip(d, 0., 1.)

    gt = GroundTruth(frames, nframes=spec.frames)
    return FrameStack(d), FrameStack(s), FrameStack(b), FrameStack(n), gt


def load_scene_spec(name):
    """Scene spec by name: 'canonical', a JSON file, or a Python setup file

    A Python setup file must define a module-level ``scene`` SceneSpec.
    """

    from sbn3d import io, utils
    from sbn3d.stack import FormatError

    if name == 'canonical':
        return canonical_scene()
    if name.endswith('.py'):
        module = utils.load_setup_file(name, 'sbn3d_scene')
        if not isinstance(getattr(module, 'scene', None), SceneSpec):
            raise FormatError("{}: setup file does not define a SceneSpec named `scene`".format(name))
        return module.scene
    doc = io.read_json(name)
    try:
        return SceneSpec.from_dict(doc)
    except (KeyError, TypeError) as err:
        raise FormatError("{}: malformed scene spec: {}".format(name, err))
