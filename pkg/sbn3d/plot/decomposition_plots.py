import logging

import numpy as np
from matplotlib import pyplot as pl

from sbn3d import plot
from sbn3d.metrics import pixel_statistics, normalize_unit

"""
Figures for decomposition results:
    - relative-error attenuation curve
    - singular-value CDF curves
    - pixel statistic and gray percentage curves
    - raw / shadow / background / noise panel
"""

logger = logging.getLogger(__name__)


class ConvergencePlot(object):
    """
    Relative reconstruction error against iteration number,
    one line per decomposed window.

    Args:
        traces (list): DataFrames with columns iter, rel_error
        tol (float): stopping threshold, drawn as a horizontal line
        outfile (string): output image file
    """

    def __init__(self, traces, tol=None, outfile='convergence.png'):
        self.traces = traces
        self.tol = tol
        self.outfile = outfile

    def plot(self):
        fig = pl.figure(figsize=(6, 4))
        colors = [plot.cmap(x) for x in np.linspace(0.05, 0.95, max(len(self.traces), 1))]
        for i, tr in enumerate(self.traces):
            label = 'window {}'.format(i) if len(self.traces) > 1 else None
            pl.semilogy(tr['iter'], tr['rel_error'], 'o-', color=colors[i], label=label)
        if self.tol is not None:
            pl.axhline(self.tol, color='0.5', ls='--', lw=1)
        pl.xlabel('Iteration')
        pl.ylabel('Relative error')
        if len(self.traces) > 1:
            pl.legend(loc='upper right', fontsize=7)
        fig.savefig(self.outfile, dpi=150, bbox_inches='tight')
        pl.close(fig)
        logger.info("Convergence plot saved to %s", self.outfile)


class CDFPlot(object):
    """
    Singular-value CDF curves.

    Args:
        curves (dict): label -> DataFrame with columns k_percent, cdf
        outfile (string): output image file
    """

    def __init__(self, curves, outfile='cdf.png'):
        self.curves = curves
        self.outfile = outfile

    def plot(self):
        fig = pl.figure(figsize=(6, 4))
        for label, df in sorted(self.curves.items()):
            pl.plot(df['k_percent'], df['cdf'], '-', label=label)
        pl.xlabel('k (% of singular values)')
        pl.ylabel('CDF')
        pl.ylim(0, 1.02)
        pl.legend(loc='lower right')
        fig.savefig(self.outfile, dpi=150, bbox_inches='tight')
        pl.close(fig)
        logger.info("CDF plot saved to %s", self.outfile)


class PixelStatisticsPlot(object):
    """
    Gray-level histogram and cumulative gray percentage of one frame.

    Args:
        image (array): 2D frame, values in [0, 1]
        outfile (string): output image file
    """

    def __init__(self, image, outfile='pixel_statistics.png'):
        self.image = image
        self.outfile = outfile

    def plot(self):
        hist, cum = pixel_statistics(self.image)
        fig, (ax0, ax1) = pl.subplots(1, 2, figsize=(9, 3.5))
        ax0.bar(np.arange(256), hist, width=1., color='k')
        ax0.set_xlabel('Gray level')
        ax0.set_ylabel('Pixels')
        ax1.plot(np.arange(256), 100. * cum, 'k-')
        ax1.set_xlabel('Gray level')
        ax1.set_ylabel('Gray percentage (%)')
        ax1.set_xlim(0, 255)
        fig.savefig(self.outfile, dpi=150, bbox_inches='tight')
        pl.close(fig)
        logger.info("Pixel statistics plot saved to %s", self.outfile)


class DecompositionPlot(object):
    """
    One frame of the raw video beside its shadow, background and noise
    components.

    Args:
        d, s, b, n (FrameStack): raw video and components
        frame (int): frame index shown
        outfile (string): output image file
    """

    def __init__(self, d, s, b, n, frame=0, outfile='decomposition.png'):
        self.panels = [('Raw', d), ('|Shadow|', s), ('Background', b), ('Noise', n)]
        self.frame = frame
        self.outfile = outfile

    def plot(self):
        fig, axes = pl.subplots(1, 4, figsize=(12, 3.4))
        for ax, (title, st) in zip(axes, self.panels):
            img = st.frame(self.frame)
            if title == '|Shadow|':
                img = np.abs(img)
            ax.imshow(normalize_unit(img), cmap='gray', vmin=0, vmax=1, interpolation='nearest')
            ax.set_title(title)
            ax.set_xticks([])
            ax.set_yticks([])
        fig.suptitle('Frame {}'.format(self.frame))
        fig.savefig(self.outfile, dpi=150, bbox_inches='tight')
        pl.close(fig)
        logger.info("Decomposition plot saved to %s", self.outfile)
