"""Pure-numpy reference kernels; loaded when the compiled core is unavailable."""
import numpy as np


def herglotz_sum(axis, lam, nodes, coeffs):
    """Sum_m coeffs[m] * exp(-i lam x . nodes[m]) over the tensor lattice axis^n."""
    axis = np.asarray(axis, dtype=float)
    nodes = np.asarray(nodes, dtype=float)
    coeffs = np.asarray(coeffs, dtype=complex)
    n = nodes.shape[1]
    out = np.zeros((axis.size,) * n, dtype=complex)
    for theta, c in zip(nodes, coeffs):
        p = [np.exp(-1j * lam * theta[i] * axis) for i in range(n)]
        if n == 2:
            out += c * np.multiply.outer(p[0], p[1])
        else:
            out += c * np.multiply.outer(np.multiply.outer(p[0], p[1]), p[2])
    return out


def annulus_reduce(values, labels, nbins):
    """Per-label (sum |v|^2, max |v|) for labels in [0, nbins)."""
    a = np.abs(np.asarray(values).ravel())
    lab = np.asarray(labels).ravel()
    sumsq = np.bincount(lab, weights=a * a, minlength=nbins)[:nbins]
    peak = np.zeros(nbins)
    np.maximum.at(peak, lab, a)
    return sumsq, peak
