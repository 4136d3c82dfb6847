import os
import json
import types
import warnings
import subprocess

import numpy as np
import pandas as pd

import sbn3d
import sbn3d.cli
import sbn3d.driver
from sbn3d import io
from sbn3d.detection import Detection

warnings.simplefilter('ignore')


def _run_cmd(cmd):
    p = subprocess.Popen(cmd.split())
    p.wait()
    status = p.poll()
    out, stderr = p.communicate()

    return (status, out)


def _last_summary(capsys):
    lines = [l for l in capsys.readouterr().out.splitlines() if l.strip()]
    return json.loads(lines[-1])


def test_help():
    """
    Test command-line install
    """

    cmd = 'sbn3d --help'
    stat, out = _run_cmd(cmd)
    assert stat == 0, "{} failed with exit code {}".format(cmd, stat)


def test_version():
    """
    Version printing exits cleanly
    """

    assert sbn3d.cli.main(['--version']) == 0


def test_usage_errors(tmp_path):
    """
    Bad flags and missing subcommands exit with code 1
    """

    assert sbn3d.cli.main([]) == 1
    assert sbn3d.cli.main(['decompose']) == 1
    assert sbn3d.cli.main(['detect', '--in', 'x.sbnt', '--out', 'y.csv', '--threshold', 'low']) == 1
    assert sbn3d.cli.main(['metrics', '--in', 'x.sbnt', '--crop', '1,2,0,4']) == 1
    assert sbn3d.cli.main(['cdf', '--in', 'x.sbnt', '--k', '0']) == 1
    assert sbn3d.cli.main(['plot', '-t', 'cdf']) == 1
    assert sbn3d.cli.main(['report']) == 1


def test_input_errors(tmp_path):
    """
    Unreadable inputs and invalid settings exit with code 2
    """

    bad = tmp_path / 'bad.sbnt'
    bad.write_bytes(b'XXXX' + bytes(14))
    outdir = str(tmp_path / 'out')
    assert sbn3d.cli.main(['decompose', '--in', str(bad), '--out-dir', outdir]) == 2
    assert sbn3d.cli.main(['decompose', '--in', str(tmp_path / 'missing.sbnt'), '--out-dir', outdir]) == 2

    good = str(tmp_path / 'd.sbnt')
    assert sbn3d.cli.main(['synth', '--out', good, '--sigma', '0']) == 0
    assert sbn3d.cli.main(['decompose', '--in', good, '--out-dir', outdir, '--window', '0']) == 2
    assert sbn3d.cli.main(['decompose', '--in', good, '--out-dir', outdir, '--rho', '0']) == 2
    assert sbn3d.cli.main(['report', '-d', str(tmp_path / 'nowhere')]) == 2
    assert sbn3d.cli.main(['compare', '--in', good, '--shadow', good, '--det-out',
                           str(tmp_path / 'det.csv')]) == 2


def test_synth_is_deterministic(tmp_path):
    """
    Equal seeds write identical stacks
    """

    a, b, c = (str(tmp_path / n) for n in ('a.sbnt', 'b.sbnt', 'c.sbnt'))
    for fn, seed in ((a, '3'), (b, '3'), (c, '4')):
        assert sbn3d.cli.main(['synth', '--out', fn, '--seed', seed]) == 0
    with open(a, 'rb') as fa, open(b, 'rb') as fb, open(c, 'rb') as fc:
        da, db, dc = fa.read(), fb.read(), fc.read()
    assert da == db
    assert da != dc


def test_nonconverged_strict(tmp_path, capsys):
    """
    A strict run that stops at the iteration cap exits with code 3
    """

    fn = str(tmp_path / 'd.sbnt')
    assert sbn3d.cli.main(['synth', '--out', fn]) == 0
    outdir = str(tmp_path / 'out')
    assert sbn3d.cli.main(['decompose', '--in', fn, '--out-dir', outdir, '--max-iter', '1', '--strict']) == 3
    summary = _last_summary(capsys)
    assert summary['converged'] is False

    assert sbn3d.cli.main(['decompose', '--in', fn, '--out-dir', outdir, '--max-iter', '1']) == 0


def test_evaluate_ground_truth_as_detections(tmp_path, capsys):
    """
    Ground truth scored against itself gives AP and MOTA of one
    """

    fn = str(tmp_path / 'd.sbnt')
    gtfn = str(tmp_path / 'gt.json')
    assert sbn3d.cli.main(['synth', '--out', fn, '--gt', gtfn, '--sigma', '0']) == 0
    gt = io.load_ground_truth(gtfn)

    detfn = str(tmp_path / 'gt_dets.csv')
    io.save_detections([Detection(f, box, 1., id=i) for f in gt.frames for i, box in gt.objects(f)], detfn)

    assert sbn3d.cli.main(['evaluate', '--det', detfn, '--gt', gtfn, '--metric', 'ap']) == 0
    result = _last_summary(capsys)
    assert result['ap'] == 1.
    assert (result['tp'], result['fp'], result['fn']) == (200, 0, 0)

    out = str(tmp_path / 'mota.json')
    assert sbn3d.cli.main(['evaluate', '--det', detfn, '--gt', gtfn, '--metric', 'mota', '--out', out]) == 0
    assert _last_summary(capsys)['mota'] == 1.
    assert io.read_json(out)['idsw'] == 0


def test_full_pipeline(tmp_path, capsys):
    """
    Every subcommand in sequence on the canonical scene
    """

    out = str(tmp_path / 'run')
    d = os.path.join(out, 'd.sbnt')
    gt = os.path.join(out, 'gt.json')
    comps = [os.path.join(out, 'true_{}.sbnt'.format(k)) for k in 'sbn']

    def run(*argv):
        assert sbn3d.cli.main(list(argv)) == 0, argv
        return _last_summary(capsys)

    summary = run('synth', '-d', out, '--out', d, '--gt', gt, '--components', *comps)
    assert summary['frames'] == 100 and summary['boxes'] == 200

    summary = run('register', '-d', out, '--in', d, '--out', os.path.join(out, 'reg.sbnt'))
    assert len(summary['shifts']) == 100
    assert summary['shifts'][0] == [0, 0]

    summary = run('decompose', '--in', d, '--out-dir', out, '--window', '50')
    assert summary['converged'] is True
    assert len(summary['windows']) == 2
    for k in ('S', 'B', 'N'):
        assert io.load_stack(os.path.join(out, '{}.sbnt'.format(k))).shape == (100, 64, 64)
    trace = pd.read_csv(os.path.join(out, 'trace.csv'))
    assert list(trace.columns) == ['iter', 'mu', 'rel_error', 'objective']
    assert (trace['iter'] == 1).sum() == 2

    shadow = os.path.join(out, 'S.sbnt')
    summary = run('metrics', '-d', out, '--in', shadow, '--ref', d, '--abs', '--gt', gt,
                  '--out', os.path.join(out, 'metrics.json'))
    assert summary['frames'] == 100

    summary = run('cdf', '-d', out, '--in', d, '--k', '5', '100', '--out', os.path.join(out, 'cdf.csv'))
    assert summary['k_percent'] == [5., 100.]
    assert np.isclose(summary['cdf'][1], 1.)

    dets = os.path.join(out, 'dets.csv')
    summary = run('detect', '-d', out, '--in', shadow, '--abs', '--polarity', 'bright',
                  '--threshold', '0.06', '--min-area', '10', '--out', dets)
    assert summary['detections'] > 0

    tracks = os.path.join(out, 'tracks.csv')
    summary = run('track', '-d', out, '--det', dets, '--out', tracks)
    assert summary['tracks'] >= 2

    assert run('evaluate', '-d', out, '--det', dets, '--gt', gt)['ap'] >= 0.8
    assert run('evaluate', '-d', out, '--det', tracks, '--gt', gt, '--metric', 'mota')['mota'] > 0.5

    summary = run('compare', '-d', out, '--in', d, '--shadow', shadow, '--gt', gt,
                  '--out', os.path.join(out, 'compare.csv'), '--det-out', os.path.join(out, 'detection.csv'))
    assert sorted(summary['methods']) == ['bgdiff', 'histeq', 'raw', 'sbn']
    assert sorted(summary['detection']) == ['raw', 'sbn']
    assert summary['detection']['sbn']['tp'] + summary['detection']['sbn']['fn'] == 200
    det_table = pd.read_csv(os.path.join(out, 'detection.csv'), index_col=0)
    assert list(det_table.columns) == ['tp', 'fp', 'fn', 'precision', 'recall', 'ap', 'idsw', 'mota']

    summary = run('sweep', '-d', out, '--in', d, '--windows', '50', '100', '--gt', gt,
                  '--out', os.path.join(out, 'sweep.csv'))
    assert [row['window'] for row in summary['rows']] == [50, 100]

    summary = run('plot', '-d', out, '-t', 'convergence', 'cdf', 'pixels', 'decomposition')
    assert len(summary['outputs']) == 4
    for fn in summary['outputs']:
        assert os.path.isfile(fn)

    summary = run('report', '-d', out)
    with open(summary['outputs'][0]) as f:
        text = f.read()
    assert 'bgdiff' in text or 'Background difference' in text
    assert 'with and without the decomposition' in text

    status = sbn3d.utils.load_status(os.path.join(out, sbn3d.driver.STATUS_FILE))
    for section in ('synth', 'register', 'decompose', 'metrics', 'cdf', 'detect', 'track',
                    'evaluate', 'compare', 'sweep', 'plot'):
        assert status.has_section(section), section


def test_sweep_long_scene(tmp_path, capsys):
    """
    The default window sweep runs on a 150-frame scene
    """

    d = str(tmp_path / 'long.sbnt')
    gt = str(tmp_path / 'long.json')
    assert sbn3d.cli.main(['synth', '--spec', 'example_scenes/long_crossing.json', '--out', d, '--gt', gt]) == 0
    assert _last_summary(capsys)['frames'] == 150

    out = str(tmp_path / 'sweep.csv')
    assert sbn3d.cli.main(['sweep', '--in', d, '--gt', gt, '--out', out]) == 0
    rows = _last_summary(capsys)['rows']
    assert [row['window'] for row in rows] == [50, 75, 100, 125, 150]
    assert [row['nwindows'] for row in rows] == [3, 2, 2, 2, 1]
    for row in rows:
        assert np.isfinite(row['contrast']) and np.isfinite(row['max_rel_error'])

    table = pd.read_csv(out)
    assert len(table) == 5
    assert 'seconds' in table.columns


class _args(types.SimpleNamespace):
    outputdir = None
    verbose = False
    xi = None
    gamma = 'auto'
    rho = 1.5
    mu0 = 'auto'
    tol = 1e-3
    max_iter = 100


def test_driver_functions(tmp_path, capsys):
    """
    Driver functions run directly from a namespace of arguments
    """

    d = str(tmp_path / 'd.sbnt')
    args = _args(spec='example_scenes/rayleigh_ellipses.py', seed=0, sigma=None, noise_kind='gaussian',
                 out=d, gt=None, components=None)
    assert sbn3d.driver.synth(args) == 0
    assert _last_summary(capsys)['targets'] == 2

    args = _args(input=d, outputdir=str(tmp_path / 'dec'), window=100, jobs=1, strict=False)
    assert sbn3d.driver.decompose(args) == 0
    assert _last_summary(capsys)['converged'] is True

    cfg = sbn3d.driver.solver_config(_args(gamma=2.5, mu0=0.1))
    assert cfg.gamma == 2.5 and cfg.mu0 == 0.1
