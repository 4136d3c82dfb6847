"""
Proximal operators for the l1 and nuclear norms
"""
import numpy as np


def soft_threshold(m, eps):
    """Elementwise shrinkage

    sign(q) * max(|q| - eps, 0), the proximal operator of eps * ||.||_1.

    Args:
        m (array): real matrix
        eps (float): shrinkage threshold, must be >= 0

    Returns:
        array: shrunk matrix with the shape of ``m``
    """

    if eps < 0:
        raise ValueError("soft_threshold: eps must be >= 0, got {}".format(eps))
    m = np.asarray(m, dtype=np.float64)
    return np.sign(m) * np.maximum(np.abs(m) - eps, 0.)


def singular_value_threshold(m, eps):
    """Singular value thresholding

    U diag(max(s - eps, 0)) V^T, the proximal operator of eps * ||.||_*.
    Rank never increases.

    Args:
        m (array): real matrix
        eps (float): threshold, must be >= 0

    Returns:
        array: matrix with the shape of ``m``
    """

    return shrink_singular_values(m, eps)[0]


def shrink_singular_values(m, eps):
    """Singular value thresholding that also returns the kept spectrum

    Returns:
        tuple: (thresholded matrix, array of its nonzero singular values)
    """

    if eps < 0:
        raise ValueError("singular_value_threshold: eps must be >= 0, got {}".format(eps))
    m = np.asarray(m, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise np.linalg.LinAlgError("singular_value_threshold: SVD of a non-finite matrix")

    u, s, vt = np.linalg.svd(m, full_matrices=False)
    s = np.maximum(s - eps, 0.)
    keep = s > 0
    if not np.any(keep):
        return np.zeros_like(m), s[keep]
    return (u[:, keep] * s[keep]) @ vt[keep, :], s[keep]


def nuclear_norm(m):
    """Sum of singular values"""
    return float(np.sum(np.linalg.svd(np.asarray(m, dtype=np.float64), compute_uv=False)))
