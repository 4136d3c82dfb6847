"""
Command Line Interface
"""
import sys
import logging
import warnings
from argparse import ArgumentParser, ArgumentTypeError

import numpy as np

import sbn3d
import sbn3d.driver
from sbn3d.stack import FormatError

EXIT_USAGE = 1
EXIT_INPUT = 2


class UsageError(Exception):
    pass


class _Parser(ArgumentParser):
    """ArgumentParser reporting usage errors with exit code 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("{}: error: {}\n".format(self.prog, message))
        raise UsageError(message)


def _auto_float(value):
    if value == 'auto':
        return value
    try:
        return float(value)
    except ValueError:
        raise ArgumentTypeError("expected a number or 'auto', got {!r}".format(value))


def _box(value):
    try:
        box = tuple(int(v) for v in value.split(','))
    except ValueError:
        box = ()
    if len(box) != 4 or box[2] <= 0 or box[3] <= 0:
        raise ArgumentTypeError("expected x,y,w,h with w, h > 0, got {!r}".format(value))
    return box


def _offsets(value):
    try:
        offsets = tuple(tuple(int(v) for v in pair.split(',')) for pair in value.split(';') if pair)
    except ValueError:
        offsets = ()
    if len(offsets) == 0 or any(len(o) != 2 or o == (0, 0) for o in offsets):
        raise ArgumentTypeError("expected dy,dx[;dy,dx...] without (0,0), got {!r}".format(value))
    return offsets


def _percent(value):
    k = float(value)
    if not 0 < k <= 100:
        raise ArgumentTypeError("k must lie in (0, 100], got {}".format(value))
    return k


def _solver_flags(psr):
    psr.add_argument('--xi', dest='xi', type=float, default=None,
                     help="Low-rank weight [sqrt(max(pixels, frames))]")
    psr.add_argument('--gamma', dest='gamma', type=_auto_float, default='auto',
                     help="Noise weight, a number or 'auto' [auto]")
    psr.add_argument('--rho', dest='rho', type=float, default=1.5,
                     help="Penalty schedule factor [1.5]")
    psr.add_argument('--mu0', dest='mu0', type=_auto_float, default='auto',
                     help="Initial penalty, a number or 'auto' [auto]")
    psr.add_argument('--tol', dest='tol', type=float, default=1e-3,
                     help="Relative reconstruction error threshold [0.001]")
    psr.add_argument('--max-iter', dest='max_iter', type=int, default=100,
                     help="Iteration cap per window [100]")


def _metric_flags(psr):
    psr.add_argument('--crop', dest='crop', type=_box, default=None,
                     help="Evaluate the rectangle x,y,w,h of every frame")
    psr.add_argument('--gt', dest='gt', type=str, default=None,
                     help="Ground-truth JSON; evaluates shadow chips around its boxes")
    psr.add_argument('--margin', dest='margin', type=int, default=4,
                     help="Pixels added around ground-truth boxes for chips [4]")
    psr.add_argument('--offsets', dest='offsets', type=_offsets, default=((0, 1), (1, 0)),
                     help="Co-occurrence offsets for contrast as dy,dx;dy,dx [0,1;1,0]")


def build_parser():
    psr = _Parser(
        description="sbn3d: sparse + low-rank + noise decomposition of moving-shadow video",
        prog='sbn3d'
    )
    psr.add_argument('--version',
                     action='version',
                     version="%(prog)s {}".format(sbn3d.__version__),
                     help="Print version number and exit."
                     )

    subpsr = psr.add_subparsers(title="subcommands", dest='subcommand')

    # options shared by every subcommand
    psr_parent = _Parser(add_help=False)
    psr_parent.add_argument('-d', dest='outputdir', type=str, default=None,
                            help="Directory holding the status file. Default is the directory \
                            of the main output file")
    psr_parent.add_argument('-v', '--verbose', dest='verbose', action='store_true', default=False,
                            help="Log debug messages, including every solver iteration")

    # Synthetic scenes
    psr_synth = subpsr.add_parser('synth', parents=[psr_parent],
                                  description="Generate a synthetic scene with known decomposition")
    psr_synth.add_argument('--spec', dest='spec', type=str, default='canonical',
                           help="'canonical', a scene JSON file or a Python setup file defining `scene`")
    psr_synth.add_argument('--seed', dest='seed', type=int, default=0, help="Noise seed [0]")
    psr_synth.add_argument('--sigma', dest='sigma', type=float, default=None,
                           help="Override the noise scale; 0 removes the noise")
    psr_synth.add_argument('--noise-kind', dest='noise_kind', default='gaussian',
                           choices=['gaussian', 'rayleigh', 'exponential'],
                           help="Noise distribution used with --sigma [gaussian]")
    psr_synth.add_argument('--out', dest='out', type=str, required=True, help="Output SBNT stack")
    psr_synth.add_argument('--gt', dest='gt', type=str, default=None, help="Output ground-truth JSON")
    psr_synth.add_argument('--components', dest='components', type=str, nargs=3, default=None,
                           metavar=('S', 'B', 'N'), help="Output SBNT files of the true components")
    psr_synth.set_defaults(func=sbn3d.driver.synth)

    # Registration
    psr_reg = subpsr.add_parser('register', parents=[psr_parent],
                                description="Translation-register frames to a reference frame")
    psr_reg.add_argument('--in', dest='input', type=str, required=True, help="Input SBNT stack")
    psr_reg.add_argument('--out', dest='out', type=str, required=True, help="Output SBNT stack")
    psr_reg.add_argument('--reference', dest='reference', type=int, default=0,
                         help="Reference frame index [0]")
    psr_reg.add_argument('--report', dest='report', type=str, default=None,
                         help="Output JSON with per-frame shifts and scores")
    psr_reg.set_defaults(func=sbn3d.driver.register)

    # Decomposition
    psr_dec = subpsr.add_parser('decompose', parents=[psr_parent],
                                description="Decompose a stack into shadow, background and noise")
    psr_dec.add_argument('--in', dest='input', type=str, required=True, help="Input SBNT stack")
    psr_dec.add_argument('--out-dir', dest='outputdir', type=str, required=True,
                         help="Output directory for S.sbnt, B.sbnt, N.sbnt and trace.csv")
    _solver_flags(psr_dec)
    psr_dec.add_argument('--window', dest='window', type=int, default=100,
                         help="Frames per independently decomposed window [100]")
    psr_dec.add_argument('--jobs', dest='jobs', type=int, default=1,
                         help="Windows decomposed in parallel [1]")
    psr_dec.add_argument('--strict', dest='strict', action='store_true', default=False,
                         help="Exit with code 3 if any window fails to converge")
    psr_dec.set_defaults(func=sbn3d.driver.decompose)

    # Quality metrics
    psr_met = subpsr.add_parser('metrics', parents=[psr_parent],
                                description="Contrast, EPI and entropy of a stack")
    psr_met.add_argument('--in', dest='input', type=str, required=True, help="Stack under evaluation")
    psr_met.add_argument('--ref', dest='ref', type=str, default=None,
                         help="Reference stack for EPI [the evaluated stack]")
    psr_met.add_argument('--abs', dest='abs', action='store_true', default=False,
                         help="Evaluate absolute values, e.g. of a shadow component")
    _metric_flags(psr_met)
    psr_met.add_argument('--out', dest='out', type=str, default=None, help="Output JSON report")
    psr_met.set_defaults(func=sbn3d.driver.quality)

    # Singular value CDF
    psr_cdf = subpsr.add_parser('cdf', parents=[psr_parent],
                                description="Cumulative distribution of singular values")
    psr_cdf.add_argument('--in', dest='input', type=str, required=True, help="Input SBNT stack")
    psr_cdf.add_argument('--k', dest='k', type=_percent, nargs='+',
                         default=list(np.arange(1, 101)), help="Percentages of singular values [1..100]")
    psr_cdf.add_argument('--out', dest='out', type=str, default=None, help="Output CSV k_percent,cdf")
    psr_cdf.set_defaults(func=sbn3d.driver.cdf)

    # Detection
    psr_det = subpsr.add_parser('detect', parents=[psr_parent],
                                description="Threshold and connected-component shadow detection")
    psr_det.add_argument('--in', dest='input', type=str, required=True, help="Input SBNT stack")
    psr_det.add_argument('--out', dest='out', type=str, required=True, help="Output detections CSV")
    psr_det.add_argument('--threshold', dest='threshold', type=float, required=True,
                         help="Binarization level")
    psr_det.add_argument('--min-area', dest='min_area', type=int, default=4,
                         help="Smallest component kept, in pixels [4]")
    psr_det.add_argument('--polarity', dest='polarity', choices=['dark', 'bright'], default='dark',
                         help="Detect values below (dark) or above (bright) the threshold [dark]")
    psr_det.add_argument('--abs', dest='abs', action='store_true', default=False,
                         help="Detect on absolute values, e.g. of a shadow component")
    psr_det.set_defaults(func=sbn3d.driver.detect)

    # Tracking
    psr_trk = subpsr.add_parser('track', parents=[psr_parent],
                                description="Link detections into tracks")
    psr_trk.add_argument('--det', dest='det', type=str, required=True, help="Input detections CSV")
    psr_trk.add_argument('--out', dest='out', type=str, required=True, help="Output tracked detections CSV")
    psr_trk.add_argument('--iou', dest='iou', type=float, default=0.3,
                         help="Minimum IoU to extend a track [0.3]")
    psr_trk.add_argument('--max-missed', dest='max_missed', type=int, default=3,
                         help="Frames a track may go unmatched before it ends [3]")
    psr_trk.set_defaults(func=sbn3d.driver.track)

    # Evaluation
    psr_eval = subpsr.add_parser('evaluate', parents=[psr_parent],
                                 description="Score detections (AP) or tracks (MOTA)")
    psr_eval.add_argument('--det', dest='det', type=str, required=True, help="Detections or tracks CSV")
    psr_eval.add_argument('--gt', dest='gt', type=str, required=True, help="Ground-truth JSON")
    psr_eval.add_argument('--metric', dest='metric', choices=['ap', 'mota'], default='ap',
                          help="Metric to compute [ap]")
    psr_eval.add_argument('--iou', dest='iou', type=float, default=0.5,
                          help="Minimum IoU for a match [0.5]")
    psr_eval.add_argument('--out', dest='out', type=str, default=None, help="Output JSON")
    psr_eval.set_defaults(func=sbn3d.driver.evaluate)

    # Comparison of enhancement methods
    psr_cmp = subpsr.add_parser('compare', parents=[psr_parent],
                                description="Compare raw, histogram equalization, background \
                                difference and the decomposition")
    psr_cmp.add_argument('--in', dest='input', type=str, required=True, help="Raw SBNT stack")
    psr_cmp.add_argument('--shadow', dest='shadow', type=str, required=True,
                         help="Shadow component S of the raw stack")
    _metric_flags(psr_cmp)
    psr_cmp.add_argument('--out', dest='out', type=str, default=None, help="Output CSV table")
    psr_cmp.add_argument('--det-out', dest='det_out', type=str, default=None,
                         help="Output CSV of detection and tracking scores with and without \
                         the decomposition; needs --gt")
    psr_cmp.add_argument('--raw-threshold', dest='raw_threshold', type=float, default=0.35,
                         help="Dark-shadow level on the raw frames [0.35]")
    psr_cmp.add_argument('--shadow-threshold', dest='shadow_threshold', type=float, default=0.04,
                         help="Bright-shadow level on |S| [0.04]")
    psr_cmp.add_argument('--min-area', dest='min_area', type=int, default=10,
                         help="Smallest detected component in pixels [10]")
    psr_cmp.set_defaults(func=sbn3d.driver.compare)

    # Window length sweep
    psr_swp = subpsr.add_parser('sweep', parents=[psr_parent],
                                description="Decompose with several window lengths")
    psr_swp.add_argument('--in', dest='input', type=str, required=True, help="Raw SBNT stack")
    psr_swp.add_argument('--windows', dest='windows', type=int, nargs='+',
                         default=[50, 75, 100, 125, 150], help="Window lengths [50 75 100 125 150]")
    psr_swp.add_argument('--gt', dest='gt', type=str, default=None,
                         help="Ground-truth JSON; contrast is measured on shadow chips")
    psr_swp.add_argument('--margin', dest='margin', type=int, default=4,
                         help="Pixels added around ground-truth boxes [4]")
    _solver_flags(psr_swp)
    psr_swp.add_argument('--out', dest='out', type=str, default=None, help="Output CSV table")
    psr_swp.set_defaults(func=sbn3d.driver.sweep)

    # Plotting
    psr_plot = subpsr.add_parser('plot', parents=[psr_parent],
                                 description="Figures of the decomposition recorded in -d")
    psr_plot.add_argument('-t', '--type', type=str, nargs='+', required=True,
                          choices=['convergence', 'cdf', 'pixels', 'decomposition'],
                          help="type of plot(s) to generate")
    psr_plot.add_argument('--frame', dest='frame', type=int, default=0, help="Frame shown [0]")
    psr_plot.add_argument('--tol', dest='tol', type=float, default=1e-3,
                          help="Threshold line on the convergence plot [0.001]")
    psr_plot.set_defaults(func=sbn3d.driver.plots)

    # Report
    psr_report = subpsr.add_parser('report', parents=[psr_parent],
                                   description="Merge tables and plots into a Markdown report")
    psr_report.set_defaults(func=sbn3d.driver.summary_report)

    return psr


def configure_logging(verbose=False):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('%(asctime)s %(name)s %(levelname)s: %(message)s'))
    root = logging.getLogger('sbn3d')
    root.handlers = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    root.propagate = False
    logging.captureWarnings(True)


def main(argv=None):
    """Run the command line interface

    Args:
        argv (list [optional]): arguments without the program name;
            defaults to ``sys.argv[1:]``

    Returns:
        int: exit code
    """

    psr = build_parser()
    try:
        args = psr.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    except SystemExit as err:
        # --help and --version
        return err.code if isinstance(err.code, int) else 0

    if getattr(args, 'func', None) is None:
        psr.print_help(sys.stderr)
        return EXIT_USAGE
    if args.subcommand == 'plot' and args.outputdir is None:
        sys.stderr.write("sbn3d plot: error: -d output directory is required\n")
        return EXIT_USAGE
    if args.subcommand == 'report' and args.outputdir is None:
        sys.stderr.write("sbn3d report: error: -d output directory is required\n")
        return EXIT_USAGE

    configure_logging(args.verbose)
    logger = logging.getLogger('sbn3d.cli')

    try:
        with warnings.catch_warnings():
            warnings.simplefilter('always', sbn3d.solver.ConvergenceWarning)
            return args.func(args)
    except (FormatError, ValueError, OSError) as err:
        logger.error("%s", err)
        return EXIT_INPUT


if __name__ == '__main__':
    sys.exit(main())
