"""
Comparison tables and the rendered summary report
"""
import os
import time
import logging

import numpy as np
import pandas as pd
from jinja2 import Environment, PackageLoader

import sbn3d
from sbn3d import baselines, detection, evaluation, metrics, solver, tracking
from sbn3d.stack import FrameStack

env = Environment(loader=PackageLoader('sbn3d', 'templates'))
logger = logging.getLogger(__name__)

METHODS = ['raw', 'histeq', 'bgdiff', 'sbn']
METHOD_LABELS = {
    'raw': 'Raw video',
    'histeq': 'Histogram equalization',
    'bgdiff': 'Background difference',
    'sbn': 'Sparse + low-rank + noise',
}
DETECTION_COLUMNS = ['tp', 'fp', 'fn', 'precision', 'recall', 'ap', 'idsw', 'mota']


def enhancement_outputs(d, s):
    """Enhanced stacks of every method

    Args:
        d (FrameStack): raw video
        s (FrameStack): shadow component of its decomposition

    Returns:
        dict: method -> FrameStack
    """

    return {
        'raw': d,
        'histeq': baselines.equalize_stack(d),
        'bgdiff': baselines.temporal_median_subtract(d),
        'sbn': FrameStack(np.abs(s.data)),
    }


def compare_enhancements(d, s, chips=None, crop_box=None, margin=4, offsets=metrics.DEFAULT_OFFSETS):
    """EPI, entropy and contrast of each enhancement method

    Args:
        d (FrameStack): raw video, also the EPI reference
        s (FrameStack): shadow component
        chips (dict [optional]): frame -> shadow boxes, evaluates chips
        crop_box (tuple [optional]): fixed (x, y, w, h) crop

    Returns:
        DataFrame indexed by method with columns epi, entropy, contrast
    """

    rows = []
    for method, st in enhancement_outputs(d, s).items():
        rep = metrics.stack_metrics(st, d, crop_box=crop_box, chips=chips, margin=margin, offsets=offsets)
        rows.append(dict(method=method, epi=rep.mean_epi, entropy=rep.mean_entropy,
                         contrast=rep.mean_contrast))
        logger.info("%s: %s", method, rep)
    return pd.DataFrame(rows, columns=['method', 'epi', 'entropy', 'contrast']).set_index('method')


def detection_comparison(d, s, gt, raw_threshold=0.35, shadow_threshold=0.04, min_area=10,
                         iou_thresh=0.5, track_iou=0.3):
    """Detection and tracking scores with and without the decomposition

    The same detector and tracker run twice: on the raw frames, looking
    for dark components below ``raw_threshold``, and on |S|, looking for
    bright components above ``shadow_threshold``.

    Args:
        d (FrameStack): raw video
        s (FrameStack): shadow component of its decomposition
        gt (GroundTruth): shadow annotations
        min_area (int): smallest component kept, in pixels
        iou_thresh (float): IoU for a true positive and a tracking match
        track_iou (float): IoU linking detections into tracks

    Returns:
        DataFrame indexed by 'raw' and 'sbn' with columns tp, fp, fn,
        precision, recall, ap, idsw, mota
    """

    runs = {
        'raw': detection.detect_shadows(d, raw_threshold, min_area=min_area, polarity='dark'),
        'sbn': detection.detect_shadows(FrameStack(np.abs(s.data)), shadow_threshold,
                                        min_area=min_area, polarity='bright'),
    }

    rows = []
    for method, dets in runs.items():
        row = evaluation.detection_counts(dets, gt, iou_thresh)
        row['ap'] = evaluation.average_precision(dets, gt, iou_thresh)
        tracks = tracking.associate_tracks(dets, iou_thresh=track_iou)
        counts = evaluation.tracking_counts(tracks, gt, iou_thresh)
        row['idsw'] = counts['idsw']
        row['mota'] = 1. - (counts['fn'] + counts['fp'] + counts['idsw']) / float(counts['gt'])
        row['method'] = method
        rows.append(row)
        logger.info("%s: AP %.3f, MOTA %.3f", method, row['ap'], row['mota'])
    return pd.DataFrame(rows, columns=['method'] + DETECTION_COLUMNS).set_index('method')


def window_sweep(d, cfg, windows, chips=None, margin=4):
    """Trade study over sub-video lengths

    Args:
        d (FrameStack): raw video
        cfg (SolverConfig): solver settings
        windows (list): window lengths in frames
        chips (dict [optional]): frame -> shadow boxes for the contrast column

    Returns:
        DataFrame with one row per window length
    """

    rows = []
    for length in windows:
        t0 = time.time()
        s, _, _, results = solver.decompose_windows(d, cfg, window=length)
        elapsed = time.time() - t0
        rep = metrics.stack_metrics(FrameStack(np.abs(s.data)), d, chips=chips, margin=margin)
        rows.append(dict(
            window=int(length),
            nwindows=len(results),
            converged=all(r.converged for r in results),
            mean_iterations=float(np.mean([r.iterations for r in results])),
            max_rel_error=float(max(r.rel_error for r in results)),
            contrast=rep.mean_contrast,
            entropy=rep.mean_entropy,
            seconds=elapsed,
        ))
        logger.info("window %d: %d windows in %.2f s", length, len(results), elapsed)
    return pd.DataFrame(rows)


class SummaryReport(object):
    """Markdown summary of an output directory

    Collects what the pipeline status file records and renders it through
    the ``report.md`` template.

    Args:
        status (configparser.RawConfigParser): pipeline status
        outdir (string): output directory the status refers to
    """

    def __init__(self, status, outdir):
        self.status = status
        self.outdir = outdir

    def _section(self, name):
        if not self.status.has_section(name):
            return None
        return dict(self.status.items(name))

    def _table(self, key, section):
        sec = self._section(section)
        if sec is None or key not in sec or not os.path.isfile(sec[key]):
            return None
        df = pd.read_csv(sec[key])
        return {
            'columns': list(df.columns),
            'rows': [[_fmt(v) for v in row] for row in df.itertuples(index=False)],
        }

    def context(self):
        figures = []
        plots = self._section('plot') or {}
        for key in sorted(plots):
            figures.append(dict(name=key, path=os.path.relpath(plots[key], self.outdir)))

        return dict(
            version=sbn3d.__version__,
            outdir=self.outdir,
            synth=self._section('synth'),
            decompose=self._section('decompose'),
            evaluate=self._section('evaluate'),
            compare=self._table('table', 'compare'),
            detection=self._table('detection_table', 'compare'),
            sweep=self._table('table', 'sweep'),
            figures=figures,
            labels=METHOD_LABELS,
        )

    def render(self):
        return env.get_template('report.md').render(**self.context())

    def save(self, outfile):
        with open(outfile, 'w') as f:
            f.write(self.render())
        logger.info("Report saved to %s", outfile)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return '{:.4f}'.format(v)
    return str(v)
