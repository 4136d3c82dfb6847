"""
Driver functions for the sbn3d pipeline.
These functions are meant to be used only with
the `cli.py` command line interface.

Each function takes the parsed arguments, writes its outputs, records them
in the output directory's status file and prints a single JSON summary
line on standard output. The return value is the process exit code.
"""
import os
import json
import time
import logging

import numpy as np
import pandas as pd

from sbn3d import io, metrics, solver, scene, utils, registration, report
from sbn3d import detection, tracking, evaluation
from sbn3d.plot import decomposition_plots
from sbn3d.stack import FrameStack, matricize

logger = logging.getLogger(__name__)

STATUS_FILE = 'sbn3d.stat'
EXIT_OK = 0
EXIT_NONCONVERGED = 3


def _emit(summary):
    print(json.dumps(summary, sort_keys=True))


def _outdir(args, path=None):
    """Directory holding the status file for this invocation"""

    outdir = getattr(args, 'outputdir', None)
    if outdir is None:
        outdir = os.path.dirname(path) if path else '.'
        outdir = outdir or '.'
    if not os.path.isdir(outdir):
        os.makedirs(outdir)
    return outdir


def _record(args, section, statevars, path=None):
    statfile = os.path.join(_outdir(args, path), STATUS_FILE)
    utils.save_status(statfile, section, statevars)


def _makedirs_for(path):
    d = os.path.dirname(path)
    if d and not os.path.isdir(d):
        os.makedirs(d)


def solver_config(args):
    """SolverConfig from command line flags, validated"""

    cfg = solver.SolverConfig(
        xi=args.xi, gamma=args.gamma, rho=args.rho, mu0=args.mu0,
        tol=args.tol, max_iter=args.max_iter
    )
    cfg.validate()
    return cfg


def synth(args):
    """
    Generate a synthetic scene

    Args:
        args (ArgumentParser): command line arguments
    """

    spec = scene.load_scene_spec(args.spec)
    if args.sigma is not None:
        spec.noise = scene.NoiseModel(args.noise_kind, args.sigma) if args.sigma > 0 else None
    d, s, b, n, gt = scene.generate_scene(spec, seed=args.seed)

    _makedirs_for(args.out)
    io.save_stack(d, args.out)
    written = {'stack': os.path.abspath(args.out)}
    if args.gt is not None:
        _makedirs_for(args.gt)
        io.save_ground_truth(gt, args.gt)
        written['gt'] = os.path.abspath(args.gt)
    if args.components is not None:
        for name, st, fn in zip('sbn', (s, b, n), args.components):
            _makedirs_for(fn)
            io.save_stack(st, fn)
            written[name] = os.path.abspath(fn)

    logger.info("Generated %s with seed %d", spec, args.seed)
    written['seed'] = args.seed
    written['spec'] = args.spec
    _record(args, 'synth', written, args.out)

    _emit({
        'command': 'synth', 'seed': args.seed, 'frames': d.frames, 'height': d.height,
        'width': d.width, 'targets': len(spec.targets), 'boxes': gt.total(),
        'outputs': sorted(v for k, v in written.items() if k not in ('seed', 'spec')),
    })
    return EXIT_OK


def register(args):
    """
    Translation-register a stack against a reference frame

    Args:
        args (ArgumentParser): command line arguments
    """

    stack = io.load_stack(args.input)
    out, rep = registration.register_translation(stack, reference=args.reference)
    _makedirs_for(args.out)
    io.save_stack(out, args.out)
    if args.report is not None:
        io.write_json(args.report, rep.to_dict())

    _record(args, 'register', {'input': os.path.abspath(args.input),
                               'stack': os.path.abspath(args.out)}, args.out)
    _emit({
        'command': 'register', 'frames': stack.frames, 'reference': args.reference,
        'shifted': sum(1 for sh in rep.shifts if sh != (0, 0)),
        'shifts': rep.to_dict()['shifts'],
    })
    return EXIT_OK


def decompose(args):
    """
    Decompose a stack window by window

    Writes S.sbnt, B.sbnt, N.sbnt and trace.csv into the output directory.

    Args:
        args (ArgumentParser): command line arguments
    """

    cfg = solver_config(args)
    if args.window < 1 or args.jobs < 1:
        raise ValueError("--window and --jobs must be >= 1")
    stack = io.load_stack(args.input)

    t0 = time.time()
    s, b, n, results = solver.decompose_windows(stack, cfg, window=args.window, jobs=args.jobs)
    tdiff, units = utils.time_print(time.time() - t0)
    logger.info("Decomposed %d frames in %d windows in %.1f %s", stack.frames, len(results), tdiff, units)

    outdir = args.outputdir
    if not os.path.isdir(outdir):
        os.makedirs(outdir)
    paths = {k: os.path.join(outdir, '{}.sbnt'.format(k.upper())) for k in 'sbn'}
    for k, st in zip('sbn', (s, b, n)):
        io.save_stack(st, paths[k])

    tracefile = os.path.join(outdir, 'trace.csv')
    trace = pd.concat([r.trace_frame() for r in results], ignore_index=True)
    trace.to_csv(tracefile, index=False, float_format='%.10g')

    converged = all(r.converged for r in results)
    statevars = {'input': os.path.abspath(args.input), 'trace': os.path.abspath(tracefile),
                 'window': args.window, 'nwindows': len(results), 'converged': converged}
    statevars.update({k: os.path.abspath(v) for k, v in paths.items()})
    _record(args, 'decompose', statevars)

    _emit({
        'command': 'decompose',
        'converged': converged,
        'rel_error': max(r.rel_error for r in results),
        'windows': [r.summary() for r in results],
        'outputs': sorted([os.path.abspath(p) for p in paths.values()] + [os.path.abspath(tracefile)]),
    })

    if args.strict and not converged:
        logger.error("Decomposition did not converge below tol=%g", cfg.tol)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _load_chips(args):
    if getattr(args, 'gt', None) is None:
        return None
    return io.load_ground_truth(args.gt).chips()


def quality(args):
    """
    Contrast, EPI and entropy of a stack

    Args:
        args (ArgumentParser): command line arguments
    """

    stack = io.load_stack(args.input)
    ref = stack if args.ref is None else io.load_stack(args.ref)
    if args.abs:
        stack = FrameStack(np.abs(stack.data))

    rep = metrics.stack_metrics(stack, ref, crop_box=args.crop, chips=_load_chips(args),
                                margin=args.margin, offsets=args.offsets)
    if args.out is not None:
        _makedirs_for(args.out)
        with open(args.out, 'w') as f:
            f.write(rep.to_json() + '\n')
        _record(args, 'metrics', {'report': os.path.abspath(args.out)}, args.out)

    _emit({'command': 'metrics', 'frames': len(rep.frames), 'contrast': rep.mean_contrast,
           'epi': rep.mean_epi, 'entropy': rep.mean_entropy})
    return EXIT_OK


def cdf(args):
    """
    Singular-value CDF of a stack

    Args:
        args (ArgumentParser): command line arguments
    """

    stack = io.load_stack(args.input)
    curve = solver.cdf_curve(matricize(stack), args.k)
    if args.out is not None:
        _makedirs_for(args.out)
        curve.to_csv(args.out, index=False, float_format='%.10g')
        _record(args, 'cdf', {'table': os.path.abspath(args.out)}, args.out)

    _emit({'command': 'cdf', 'k_percent': [float(k) for k in curve['k_percent']],
           'cdf': [float(c) for c in curve['cdf']]})
    return EXIT_OK


def detect(args):
    """
    Threshold and connected-component detection

    Args:
        args (ArgumentParser): command line arguments
    """

    stack = io.load_stack(args.input)
    if args.abs:
        stack = FrameStack(np.abs(stack.data))
    dets = detection.detect_shadows(stack, args.threshold, min_area=args.min_area,
                                    polarity=args.polarity)
    _makedirs_for(args.out)
    io.save_detections(dets, args.out)
    _record(args, 'detect', {'detections': os.path.abspath(args.out)}, args.out)

    _emit({'command': 'detect', 'frames': stack.frames, 'detections': len(dets)})
    return EXIT_OK


def track(args):
    """
    Link detections into tracks

    Args:
        args (ArgumentParser): command line arguments
    """

    dets = io.load_detections(args.det)
    tracks = tracking.associate_tracks(dets, iou_thresh=args.iou, max_missed=args.max_missed)
    _makedirs_for(args.out)
    io.save_detections(tracking.tracks_to_detections(tracks), args.out)
    _record(args, 'track', {'tracks': os.path.abspath(args.out)}, args.out)

    _emit({'command': 'track', 'detections': len(dets), 'tracks': len(tracks)})
    return EXIT_OK


def evaluate(args):
    """
    Score detections (AP) or tracks (MOTA) against ground truth

    Args:
        args (ArgumentParser): command line arguments
    """

    dets = io.load_detections(args.det)
    gt = io.load_ground_truth(args.gt)

    if args.metric == 'ap':
        result = evaluation.detection_counts(dets, gt, args.iou)
        result['ap'] = evaluation.average_precision(dets, gt, args.iou)
    else:
        tracks = tracking.detections_to_tracks(dets)
        result = evaluation.tracking_counts(tracks, gt, args.iou)
        result['mota'] = evaluation.mota(tracks, gt, args.iou)
        del result['gt']

    if args.out is not None:
        _makedirs_for(args.out)
        io.write_json(args.out, result)
    _record(args, 'evaluate', dict(('{}_{}'.format(args.metric, k), v) for k, v in result.items()),
            args.out or args.det)

    _emit(result)
    return EXIT_OK


def compare(args):
    """
    Compare enhancement methods on the same frames

    Args:
        args (ArgumentParser): command line arguments
    """

    if args.det_out is not None and args.gt is None:
        raise ValueError("compare: --det-out needs --gt")
    d = io.load_stack(args.input)
    s = io.load_stack(args.shadow)
    table = report.compare_enhancements(d, s, chips=_load_chips(args), crop_box=args.crop,
                                        margin=args.margin, offsets=args.offsets)
    summary = {'command': 'compare', 'methods': {
        m: {k: float(v) for k, v in row.items()} for m, row in table.iterrows()
    }}
    statevars = {}
    if args.out is not None:
        _makedirs_for(args.out)
        table.to_csv(args.out, float_format='%.6f')
        statevars['table'] = os.path.abspath(args.out)

    if args.gt is not None:
        dets = report.detection_comparison(
            d, s, io.load_ground_truth(args.gt), raw_threshold=args.raw_threshold,
            shadow_threshold=args.shadow_threshold, min_area=args.min_area
        )
        summary['detection'] = {
            m: {k: (v.item() if hasattr(v, 'item') else v) for k, v in row.items()}
            for m, row in dets.iterrows()
        }
        if args.det_out is not None:
            _makedirs_for(args.det_out)
            dets.to_csv(args.det_out, float_format='%.6f')
            statevars['detection_table'] = os.path.abspath(args.det_out)

    if statevars:
        _record(args, 'compare', statevars, args.out or args.det_out)

    _emit(summary)
    return EXIT_OK


def sweep(args):
    """
    Window-length trade study

    Args:
        args (ArgumentParser): command line arguments
    """

    cfg = solver_config(args)
    d = io.load_stack(args.input)
    table = report.window_sweep(d, cfg, args.windows, chips=_load_chips(args), margin=args.margin)
    if args.out is not None:
        _makedirs_for(args.out)
        table.to_csv(args.out, index=False, float_format='%.6f')
        _record(args, 'sweep', {'table': os.path.abspath(args.out)}, args.out)

    _emit({'command': 'sweep', 'rows': [
        {k: (v.item() if hasattr(v, 'item') else v) for k, v in row.items()}
        for row in table.drop(columns=['seconds']).to_dict(orient='records')
    ]})
    return EXIT_OK


def plots(args):
    """
    Generate plots from the decomposition recorded in the status file

    Args:
        args (ArgumentParser): command line arguments
    """

    statfile = os.path.join(args.outputdir, STATUS_FILE)
    status = utils.load_status(statfile)
    if not status.has_section('decompose'):
        raise ValueError("{}: run `sbn3d decompose` before plotting".format(statfile))
    dec = dict(status.items('decompose'))

    saved = {}
    for ptype in args.type:
        saveto = os.path.join(args.outputdir, '{}.png'.format(ptype))
        logger.info("Creating %s plot", ptype)

        if ptype == 'convergence':
            trace = pd.read_csv(dec['trace'])
            starts = list(np.flatnonzero(trace['iter'].values == 1)) + [len(trace)]
            traces = [trace.iloc[a:b] for a, b in zip(starts[:-1], starts[1:])]
            decomposition_plots.ConvergencePlot(traces, tol=args.tol, outfile=saveto).plot()

        elif ptype == 'cdf':
            curves = {
                'raw': solver.cdf_curve(matricize(io.load_stack(dec['input']))),
                'background': solver.cdf_curve(matricize(io.load_stack(dec['b']))),
            }
            decomposition_plots.CDFPlot(curves, outfile=saveto).plot()

        elif ptype == 'pixels':
            d = io.load_stack(dec['input'])
            decomposition_plots.PixelStatisticsPlot(d.frame(args.frame), outfile=saveto).plot()

        elif ptype == 'decomposition':
            stacks = [io.load_stack(dec[k]) for k in ('input', 's', 'b', 'n')]
            decomposition_plots.DecompositionPlot(*stacks, frame=args.frame, outfile=saveto).plot()

        saved['{}_plot'.format(ptype)] = os.path.abspath(saveto)

    utils.save_status(statfile, 'plot', saved)
    _emit({'command': 'plot', 'outputs': sorted(saved.values())})
    return EXIT_OK


def summary_report(args):
    """
    Render the Markdown summary of an output directory

    Args:
        args (ArgumentParser): command line arguments
    """

    statfile = os.path.join(args.outputdir, STATUS_FILE)
    if not os.path.isfile(statfile):
        raise ValueError("{}: no status file; run the pipeline first".format(statfile))
    status = utils.load_status(statfile)
    outfile = os.path.join(args.outputdir, 'report.md')
    report.SummaryReport(status, args.outputdir).save(outfile)
    _emit({'command': 'report', 'outputs': [os.path.abspath(outfile)]})
    return EXIT_OK
