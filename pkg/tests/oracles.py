"""Independent oracles shared by the unit and acceptance suites.

These deliberately avoid the library's closed-form code paths: brute-force
grid minimization only, so they can vouch for the implementations.
"""

import numpy as np


def grid_search_closest(left, right, lo=0.0, hi=2.0):
    """Coarse-to-fine grid minimization of |L(s)-R(t)| at 1e-4 resolution.

    The objective is a convex quadratic in (s, t), so refining around the
    coarse argmin is sound.
    """
    o1, d1 = np.array(left.origin), np.array(left.direction)
    o2, d2 = np.array(right.origin), np.array(right.direction)
    lo_s, hi_s, lo_t, hi_t = lo, hi, lo, hi
    for step in (1e-2, 1e-4):
        s = np.arange(lo_s, hi_s + step / 2, step)
        t = np.arange(lo_t, hi_t + step / 2, step)
        S, T = np.meshgrid(s, t, indexing="ij")
        P = o1[None, None, :] + S[..., None] * d1
        Q = o2[None, None, :] + T[..., None] * d2
        D = ((P - Q) ** 2).sum(-1)
        i, j = np.unravel_index(np.argmin(D), D.shape)
        s_best, t_best = s[i], t[j]
        lo_s, hi_s = s_best - 2 * step, s_best + 2 * step
        lo_t, hi_t = t_best - 2 * step, t_best + 2 * step
    p = o1 + s_best * d1
    q = o2 + t_best * d2
    return s_best, t_best, (p + q) / 2, float(np.linalg.norm(p - q))


def grid_search_fit(points, g_range=(0.5, 2.0), b_range=(-1.0, 1.0), step=1e-3):
    """Brute-force OLS objective over a (gain, bias) grid."""
    xs = np.array([p.measured_vergence for p in points])
    ys = np.array([p.true_vergence for p in points])
    g = np.arange(g_range[0], g_range[1] + step / 2, step)
    b = np.arange(b_range[0], b_range[1] + step / 2, step)
    G, B = np.meshgrid(g, b, indexing="ij")
    J = np.zeros_like(G)
    for x, y in zip(xs, ys):
        J += (G * x + B - y) ** 2
    i, j = np.unravel_index(np.argmin(J), J.shape)
    return float(g[i]), float(b[j]), float(J[i, j])


def fit_objective(points, gain, bias):
    return sum((gain * p.measured_vergence + bias - p.true_vergence) ** 2 for p in points)
