import json
import warnings

import numpy as np
import pytest

import sbn3d
from sbn3d.stack import FormatError, matricize
from sbn3d.scene import (
    SmoothProfile, TargetSpec, NoiseModel, SceneSpec, canonical_scene, generate_scene, load_scene_spec
)

warnings.simplefilter('ignore')


def test_generation_is_deterministic():
    """
    Equal seeds give identical videos, different seeds different noise
    """

    spec = canonical_scene()
    d1 = generate_scene(spec, seed=5)[0]
    d2 = generate_scene(spec, seed=5)[0]
    d3 = generate_scene(spec, seed=6)[0]
    assert np.array_equal(d1.data, d2.data)
    assert not np.array_equal(d1.data, d3.data)


def test_components_sum_to_video():
    """
    The video is exactly the sum of its components
    """

    d, s, b, n, _ = generate_scene(canonical_scene(), seed=1)
    assert d.shape == (100, 64, 64)
    assert np.array_equal(d.data, s.data + b.data + n.data)


def test_canonical_components():
    """
    Rank-1 background in [0.3, 0.7], 71 shadow pixels per frame, 0.02 noise
    """

    _, s, b, n, _ = generate_scene(canonical_scene(sigma=0), seed=0)
    assert not np.any(n.data)
    for f in range(s.frames):
        assert np.count_nonzero(s.frame(f)) == 35 + 36
    assert set(np.unique(s.data)) == {-0.3, 0.}

    assert np.linalg.matrix_rank(matricize(b).matrix) == 1
    assert b.data.min() >= 0.3 - 1e-12
    assert b.data.max() <= 0.7 + 1e-12
    assert b.data.max() > 0.69

    n = generate_scene(canonical_scene(sigma=0.02), seed=0)[3]
    assert np.std(n.data) == pytest.approx(0.02, rel=0.02)
    assert abs(np.mean(n.data)) < 1e-3


def test_ground_truth_bounds_shadows():
    """
    Every shadow pixel lies inside a ground-truth box of its frame
    """

    _, s, _, _, gt = generate_scene(canonical_scene(sigma=0), seed=0)
    assert gt.nframes == 100
    assert gt.ids() == [1, 2]
    assert gt.total() == 200
    for f in range(s.frames):
        covered = np.zeros((64, 64), dtype=bool)
        for x, y, w, h in gt.boxes(f):
            covered[y:y + h, x:x + w] = True
            assert np.all(s.frame(f)[y:y + h, x:x + w] == -0.3)
        assert np.all(covered == (s.frame(f) != 0))

    assert gt.objects(0) == [(1, (4, 20, 7, 5)), (2, (40, 50, 6, 6))]


def test_target_motion():
    """
    Positions follow the constant-velocity and quadratic paths
    """

    t = TargetSpec((5, 7), (20., 4.), velocity=(0.2, 0.48))
    assert t.position(0) == (20, 4)
    assert t.position(10) == (22, 9)

    q = TargetSpec((4, 4), (0., 0.), acceleration=(0.5, 0.))
    assert q.position(4) == (4, 0)


def test_ellipse_footprint():
    """
    Ellipses stay inside their size box and touch all four sides
    """

    mask = TargetSpec((7, 9), (0., 0.), shape='ellipse').footprint()
    assert mask.shape == (7, 9)
    assert mask[3, 4] and not mask[0, 0]
    assert mask[0].any() and mask[-1].any() and mask[:, 0].any() and mask[:, -1].any()


def test_spec_validation():
    """
    Malformed targets, noise and out-of-frame paths are rejected
    """

    bg = [(SmoothProfile(0.5, 0.5), SmoothProfile(1., 1.))]
    bad_targets = [
        TargetSpec((4, 4), (0., 0.), depth=0.1),
        TargetSpec((4, 4), (0., 0.), shape='star'),
        TargetSpec((1, 3), (0., 0.)),
    ]
    for t in bad_targets:
        with pytest.raises(ValueError):
            generate_scene(SceneSpec(16, 16, 4, bg, [t]))

    for noise in (NoiseModel('uniform'), NoiseModel('gaussian', 0.)):
        with pytest.raises(ValueError):
            generate_scene(SceneSpec(16, 16, 4, bg, [], noise=noise))

    leaving = TargetSpec((5, 5), (0., 10.), velocity=(0., 1.))
    with pytest.raises(ValueError) as err:
        generate_scene(SceneSpec(16, 16, 4, bg, [leaving]))
    assert 'frame 2' in str(err.value)

    with pytest.raises(ValueError):
        generate_scene(SceneSpec(16, 16, 0, bg, []))
    with pytest.raises(ValueError):
        generate_scene(SceneSpec(16, 16, 4, [], []))


def test_clamped_scene():
    """
    Clamping keeps the video in the unit interval
    """

    spec = canonical_scene(sigma=0.2)
    spec.clamp = True
    d = generate_scene(spec, seed=0)[0]
    assert d.data.min() >= 0. and d.data.max() <= 1.


def test_skewed_noise_is_centred():
    """
    Rayleigh and exponential noise are shifted to zero mean
    """

    rng = np.random.Generator(np.random.PCG64(3))
    for kind in ('rayleigh', 'exponential'):
        x = NoiseModel(kind, 0.015).sample(rng, (200000,))
        assert abs(np.mean(x)) < 2e-4
        assert np.mean(NoiseModel(kind, 0.015, center=False).sample(rng, (200000,))) > 0.01


def test_spec_json_round_trip(tmp_path):
    """
    Specs survive JSON and regenerate the same video
    """

    spec = canonical_scene()
    doc = json.loads(json.dumps(spec.to_dict()))
    again = SceneSpec.from_dict(doc)
    assert again.to_dict() == spec.to_dict()
    assert np.array_equal(generate_scene(spec, 4)[0].data, generate_scene(again, 4)[0].data)

    fn = tmp_path / 'scene.json'
    fn.write_text(json.dumps(doc))
    assert load_scene_spec(str(fn)).to_dict() == spec.to_dict()

    bad = tmp_path / 'bad.json'
    bad.write_text(json.dumps({'height': 8}))
    with pytest.raises(FormatError):
        load_scene_spec(str(bad))


def test_load_named_and_setup_specs(tmp_path, setupfn='example_scenes/rayleigh_ellipses.py'):
    """
    The canonical name, the bundled setup file and the bundled JSON scene
    """

    assert load_scene_spec('canonical').to_dict() == canonical_scene().to_dict()

    spec = load_scene_spec(setupfn)
    assert isinstance(spec, sbn3d.SceneSpec)
    assert spec.noise.kind == 'rayleigh'
    d, s, b, _, gt = generate_scene(spec, seed=0)
    assert np.linalg.matrix_rank(b.frame(0)) == 2
    assert np.linalg.matrix_rank(matricize(b).matrix) == 1
    assert gt.total() == 2 * spec.frames

    long_spec = load_scene_spec('example_scenes/long_crossing.json')
    assert long_spec.frames == 150
    long_spec.validate()

    empty = tmp_path / 'empty.py'
    empty.write_text("scene = None\n")
    with pytest.raises(FormatError):
        load_scene_spec(str(empty))
