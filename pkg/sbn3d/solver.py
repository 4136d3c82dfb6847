"""
Sparse + low-rank + noise decomposition by ADMM

Solves

    min  ||S||_1 + xi ||B||_* + gamma ||N||_F^2   s.t.  D = S + B + N

on a matricized video D (one vectorized frame per column), with the
cyclic closed-form updates B -> S -> N -> Y -> mu.
"""
import math
import time
import logging
import warnings
import multiprocessing as mp

import numpy as np
import pandas as pd

from sbn3d import stack as sbstack
from sbn3d.prox import soft_threshold, shrink_singular_values, nuclear_norm

logger = logging.getLogger(__name__)

AUTO = 'auto'

# noise-to-shadow split of the automatic gamma, in noise standard deviations
GAMMA_SIGMAS = 3.0

# automatic mu0 as a multiple of xi / sigma_1(D)
MU0_SCALE = 1.25


class ConvergenceWarning(UserWarning):
    """Issued when `decompose` stops at ``max_iter`` above tolerance."""


class SolverConfig(object):
    """Solver settings

    Args:
        xi (float [optional]): low-rank weight; defaults to sqrt(max(Nc, f))
            of the data being decomposed
        gamma (float or 'auto'): noise weight. 'auto' places the
            shadow/noise split at three robust noise standard deviations
        rho (float): penalty schedule factor, mu_{k+1} = rho * mu_k
        mu0 (float or 'auto'): initial penalty. 'auto' is
            1.25 * xi / sigma_1(D), which starts both thresholds above
            the data so the background enters B top singular value first
        tol (float): stopping threshold on the relative reconstruction error
        max_iter (int): iteration cap
        confidence_map (array [optional]): Nc x f weights in [0, 1] applied
            elementwise to the background update input

    """

    def __init__(self, xi=None, gamma=AUTO, rho=1.5, mu0=AUTO, tol=1e-3,
                 max_iter=100, confidence_map=None):
        self.xi = xi
        self.gamma = gamma
        self.rho = rho
        self.mu0 = mu0
        self.tol = tol
        self.max_iter = max_iter
        self.confidence_map = confidence_map

    def validate(self, shape=None):
        """Check every field

        Args:
            shape (tuple [optional]): Nc x f shape of the data the config
                will be used with; required to check the confidence map

        Raises:
            ValueError: naming the first offending field
        """

        if self.xi is not None and not (self.xi >= 0 and np.isfinite(self.xi)):
            raise ValueError("SolverConfig: xi must be a finite value >= 0, got {}".format(self.xi))
        if self.gamma != AUTO and not (self.gamma >= 0 and np.isfinite(self.gamma)):
            raise ValueError("SolverConfig: gamma must be >= 0 or 'auto', got {}".format(self.gamma))
        if not (self.rho > 0 and np.isfinite(self.rho)):
            raise ValueError("SolverConfig: rho must be > 0, got {}".format(self.rho))
        if self.mu0 != AUTO and not (self.mu0 > 0 and np.isfinite(self.mu0)):
            raise ValueError("SolverConfig: mu0 must be > 0 or 'auto', got {}".format(self.mu0))
        if not self.tol > 0:
            raise ValueError("SolverConfig: tol must be > 0, got {}".format(self.tol))
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("SolverConfig: max_iter must be an integer >= 1, got {}".format(self.max_iter))

        if self.confidence_map is not None:
            pi = np.asarray(self.confidence_map, dtype=np.float64)
            if shape is not None and pi.shape != tuple(shape):
                raise ValueError("SolverConfig: confidence map shape {} does not match data {}".format(
                    pi.shape, tuple(shape)))
            if not np.all((pi >= 0) & (pi <= 1)):
                raise ValueError("SolverConfig: confidence map values must lie in [0, 1]")

    def resolve(self, d):
        """Concrete (xi, gamma, mu0) for data matrix ``d``"""

        nc, f = d.shape
        xi = math.sqrt(max(nc, f)) if self.xi is None else float(self.xi)

        if self.gamma == AUTO:
            sigma = max(estimate_noise_level(d), 1e-3 * np.max(np.abs(d)))
            gamma = 1. / (2. * GAMMA_SIGMAS * sigma)
        else:
            gamma = float(self.gamma)

        if self.mu0 == AUTO:
            mu0 = MU0_SCALE * max(xi, 1.) / np.linalg.norm(d, 2)
        else:
            mu0 = float(self.mu0)

        return xi, gamma, mu0

    def to_dict(self):
        return dict(xi=self.xi, gamma=self.gamma, rho=self.rho, mu0=self.mu0,
                    tol=self.tol, max_iter=self.max_iter,
                    confidence_map=self.confidence_map is not None)

    def __repr__(self):
        return "SolverConfig(xi={}, gamma={}, rho={}, mu0={}, tol={}, max_iter={})".format(
            self.xi, self.gamma, self.rho, self.mu0, self.tol, self.max_iter
        )


class DecompositionResult(object):
    """Output of `decompose`

    Attributes:
        shadow (array): sparse component S
        background (array): low-rank component B
        noise (array): noise component N
        multiplier (array): final Lagrange multiplier Y
        trace (list): one (iter, mu, rel_error, objective) tuple per iteration
        converged (bool): relative error fell below tolerance
        xi, gamma, mu0 (float): parameter values actually used
        height, width (int): frame size of the originating stack, if known
    """

    def __init__(self, shadow, background, noise, multiplier, trace, converged,
                 xi, gamma, mu0, height=None, width=None):
        self.shadow = shadow
        self.background = background
        self.noise = noise
        self.multiplier = multiplier
        self.trace = trace
        self.converged = converged
        self.xi = xi
        self.gamma = gamma
        self.mu0 = mu0
        self.height = height
        self.width = width

    @property
    def iterations(self):
        return len(self.trace)

    @property
    def rel_error(self):
        return self.trace[-1][2]

    def trace_frame(self):
        """Trace as a DataFrame with columns iter, mu, rel_error, objective"""
        return pd.DataFrame(self.trace, columns=['iter', 'mu', 'rel_error', 'objective'])

    def stacks(self, height=None, width=None):
        """Tensorize the three components

        Returns:
            tuple: (S, B, N) FrameStacks
        """

        height = self.height if height is None else height
        width = self.width if width is None else width
        return tuple(
            sbstack.tensorize(m, height, width) for m in (self.shadow, self.background, self.noise)
        )

    def summary(self):
        return dict(
            iterations=self.iterations, rel_error=self.rel_error, converged=self.converged,
            xi=self.xi, gamma=self.gamma, mu0=self.mu0
        )

    def __repr__(self):
        return "DecompositionResult: {} iterations, rel_error={:.3g}, converged={}".format(
            self.iterations, self.rel_error, self.converged)


def _check_mu(mu):
    if not mu > 0:
        raise ValueError("penalty mu must be > 0, got {}".format(mu))


def _check_shapes(*mats):
    shapes = set(np.shape(m) for m in mats)
    if len(shapes) != 1:
        raise ValueError("matrix shapes disagree: {}".format(sorted(shapes)))


def update_background(d, s, n, y, mu, xi, confidence_map=None):
    """Background step: SVT(D - S - N + Y/mu, xi/mu)"""

    _check_mu(mu)
    _check_shapes(d, s, n, y)
    q = d - s - n + y / mu
    if confidence_map is not None:
        q = confidence_map * q
    return shrink_singular_values(q, xi / mu)[0]


def update_shadow(d, b, n, y, mu):
    """Shadow step: soft(D - B - N + Y/mu, 1/mu)"""

    _check_mu(mu)
    _check_shapes(d, b, n, y)
    return soft_threshold(d - b - n + y / mu, 1. / mu)


def update_noise(d, b, s, y, mu, gamma):
    """Noise step: (D - B - S + Y/mu) / (1 + 2 gamma/mu)"""

    _check_mu(mu)
    if gamma < 0:
        raise ValueError("gamma must be >= 0, got {}".format(gamma))
    _check_shapes(d, b, s, y)
    return (d - b - s + y / mu) / (1. + 2. * gamma / mu)


def update_multiplier(y, mu, d, s, b, n):
    """Dual ascent: Y + mu (D - S - B - N)"""

    _check_shapes(y, d, s, b, n)
    return y + mu * (d - s - b - n)


def update_penalty(mu, rho):
    return rho * mu


def relative_error(d, s, b, n):
    """||D - (B + S + N)||_F / ||D||_F"""

    dnorm = np.linalg.norm(d)
    if dnorm == 0:
        raise ValueError("relative_error: input matrix D is all zeros")
    return float(np.linalg.norm(d - (b + s + n)) / dnorm)


def objective(s, b, n, xi, gamma, nuclear=None):
    """||S||_1 + xi ||B||_* + gamma ||N||_F^2

    Args:
        nuclear (float [optional]): precomputed nuclear norm of ``b``
    """

    if nuclear is None:
        nuclear = nuclear_norm(b)
    return float(np.sum(np.abs(s)) + xi * nuclear + gamma * np.sum(n ** 2))


def estimate_noise_level(d):
    """Robust noise standard deviation of a matricized video

    Uses the median absolute deviation of first differences along time,
    which cancels the static background. A single-frame input falls back
    to first differences along the pixel axis.

    Args:
        d (array): Nc x f matrix

    Returns:
        float: sigma estimate
    """

    d = np.asarray(d, dtype=np.float64)
    if d.shape[1] > 1:
        diffs = np.diff(d, axis=1)
    else:
        diffs = np.diff(d[:, 0])
    if diffs.size == 0:
        return 0.
    mad = np.median(np.abs(diffs - np.median(diffs)))
    return float(mad / 0.6745 / math.sqrt(2.))


def decompose(mat, cfg=None):
    """Decompose a matricized video into shadow, background and noise

    Iteration k updates B, then S, then N, then the multiplier Y, then the
    penalty mu. The loop stops once the relative reconstruction error drops
    below ``cfg.tol``; reaching ``cfg.max_iter`` first issues a
    ConvergenceWarning and flags the result as not converged.

    Args:
        mat (MatricizedVideo or array): Nc x f data matrix D
        cfg (SolverConfig [optional]): settings, defaults to SolverConfig()

    Returns:
        DecompositionResult
    """

    if cfg is None:
        cfg = SolverConfig()

    if isinstance(mat, sbstack.MatricizedVideo):
        d, height, width = mat.matrix, mat.height, mat.width
    else:
        d, height, width = np.asarray(mat, dtype=np.float64), None, None

    if d.ndim != 2 or min(d.shape) < 1:
        raise ValueError("decompose: expected a non-empty Nc x f matrix, got shape {}".format(d.shape))
    if not np.all(np.isfinite(d)):
        raise ValueError("decompose: input contains non-finite values")
    if np.linalg.norm(d) == 0:
        raise ValueError("decompose: input matrix D is all zeros")

    cfg.validate(d.shape)
    xi, gamma, mu = cfg.resolve(d)
    mu0 = mu
    pi = None if cfg.confidence_map is None else np.asarray(cfg.confidence_map, dtype=np.float64)

    logger.debug("decompose: %d x %d, xi=%.4g gamma=%.4g mu0=%.4g rho=%.4g",
                 d.shape[0], d.shape[1], xi, gamma, mu0, cfg.rho)

    s = np.zeros_like(d)
    n = np.zeros_like(d)
    y = np.zeros_like(d)
    b = np.zeros_like(d)

    trace = []
    converged = False
    t0 = time.time()
    for k in range(1, int(cfg.max_iter) + 1):
        q = d - s - n + y / mu
        if pi is not None:
            q = pi * q
        b, sv = shrink_singular_values(q, xi / mu)
        s = update_shadow(d, b, n, y, mu)
        n = update_noise(d, b, s, y, mu, gamma)

        err = relative_error(d, s, b, n)
        obj = objective(s, b, n, xi, gamma, nuclear=float(np.sum(sv)))
        trace.append((k, mu, err, obj))
        logger.debug("iter %d: mu=%.4g rel_error=%.4g objective=%.6g rank=%d",
                     k, mu, err, obj, len(sv))

        y = update_multiplier(y, mu, d, s, b, n)
        mu = update_penalty(mu, cfg.rho)

        if err < cfg.tol:
            converged = True
            break

    elapsed = time.time() - t0
    if converged:
        logger.debug("decompose: converged after %d iterations in %.2f s", len(trace), elapsed)
    else:
        warnings.warn(
            "decompose: relative error {:.3g} above tol {:g} after {} iterations".format(
                trace[-1][2], cfg.tol, len(trace)),
            ConvergenceWarning
        )

    return DecompositionResult(s, b, n, y, trace, converged, xi, gamma, mu0,
                               height=height, width=width)


def _decompose_window(data, cfg):
    mat = sbstack.matricize(sbstack.FrameStack(data))
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', ConvergenceWarning)
        return decompose(mat, cfg)


def decompose_windows(stack, cfg=None, window=100, jobs=1):
    """Decompose consecutive sub-videos independently

    The stack is cut into windows of ``window`` frames (a remainder forms a
    final shorter window), each window is decomposed on its own and the
    components are concatenated back in frame order.

    Args:
        stack (FrameStack): input video
        cfg (SolverConfig [optional]): settings shared by every window
        window (int): frames per window
        jobs (int): worker processes; 1 runs sequentially

    Returns:
        tuple: (S, B, N FrameStacks, list of DecompositionResult per window)
    """

    if cfg is None:
        cfg = SolverConfig()
    if cfg.confidence_map is not None and window < stack.frames:
        raise ValueError("decompose_windows: a confidence map applies to a single window only")
    if jobs < 1:
        raise ValueError("jobs must be >= 1, got {}".format(jobs))

    bounds = sbstack.window_bounds(stack.frames, window)
    chunks = [stack.data[start:start + length] for start, length in bounds]

    if jobs > 1 and len(chunks) > 1:
        logger.info("Decomposing %d windows on %d processes", len(chunks), jobs)
        pool = mp.Pool(processes=min(jobs, len(chunks)))
        try:
            results = pool.starmap(_decompose_window, [(c, cfg) for c in chunks])
        finally:
            pool.close()
            pool.join()
    else:
        results = []
        for i, c in enumerate(chunks):
            results.append(_decompose_window(c, cfg))
            logger.info("Window %d/%d (frames %d-%d): %d iterations, rel_error=%.3g",
                        i + 1, len(chunks), bounds[i][0], bounds[i][0] + bounds[i][1] - 1,
                        results[-1].iterations, results[-1].rel_error)

    for res in results:
        if not res.converged:
            warnings.warn("decompose_windows: a window did not converge ({})".format(res), ConvergenceWarning)

    parts = [res.stacks(stack.height, stack.width) for res in results]
    s, b, n = (sbstack.concatenate([p[i] for p in parts]) for i in range(3))
    return s, b, n, results


def singular_value_spectrum(mat):
    """Singular values of a matricized video in descending order"""

    m = mat.matrix if isinstance(mat, sbstack.MatricizedVideo) else np.asarray(mat, dtype=np.float64)
    return np.linalg.svd(m, compute_uv=False)


def singular_value_cdf(mat, k):
    """Share of singular-value mass in the top ``k`` percent

    Args:
        mat (MatricizedVideo or array): Nc x f matrix
        k (float): percentage in (0, 100]

    Returns:
        float: sum of the top ceil(k/100 * min(Nc, f)) singular values over
            the sum of all singular values
    """

    if not 0 < k <= 100:
        raise ValueError("singular_value_cdf: k must lie in (0, 100], got {}".format(k))
    sv = singular_value_spectrum(mat)
    return _cdf_from_spectrum(sv, k)


def _cdf_from_spectrum(sv, k):
    total = np.sum(sv)
    if total == 0:
        raise ValueError("singular_value_cdf: matrix is all zeros")
    # guard against k/100 * n landing a hair above an integer
    ntop = int(math.ceil(round(k / 100. * len(sv), 9)))
    ntop = min(max(ntop, 1), len(sv))
    return float(np.sum(sv[:ntop]) / total)


def cdf_curve(mat, ks=None):
    """Singular-value CDF over a grid of percentages

    Args:
        mat (MatricizedVideo or array): Nc x f matrix
        ks (list [optional]): percentages; defaults to 1, 2, ..., 100

    Returns:
        DataFrame: columns k_percent, cdf
    """

    if ks is None:
        ks = np.arange(1, 101)
    sv = singular_value_spectrum(mat)
    for k in ks:
        if not 0 < k <= 100:
            raise ValueError("cdf_curve: k must lie in (0, 100], got {}".format(k))
    return pd.DataFrame({'k_percent': list(ks), 'cdf': [_cdf_from_spectrum(sv, k) for k in ks]})
