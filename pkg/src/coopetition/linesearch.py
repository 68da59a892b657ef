"""Bracketed golden-section maximization of a unimodal scalar function."""
from __future__ import annotations

import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, a: float, b: float, tol: float = 1e-10, max_iter: int = 200):
    """Maximize a unimodal ``f`` on [a, b]; ties keep the left part.

    Returns ``(x, f(x))`` for the best point evaluated.
    """
    if b - a <= tol:
        fa = f(a)
        return a, fa
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    if fc >= fd:
        return c, fc
    return d, fd


def scan_then_golden(f, f_vec, lo: float, hi: float, n_scan: int = 64, tol: float = 1e-10):
    """Coarse grid scan over [lo, hi], then golden section inside the winning bracket.

    ``f_vec`` evaluates ``f`` over a numpy array. The scan guards against the
    kinks and flat stretches of clamped demand. Ties resolve to the lower x.
    """
    xs = np.linspace(lo, hi, n_scan)
    ys = np.asarray(f_vec(xs), dtype=float)
    k = int(np.argmax(ys))
    best_x, best_y = float(xs[k]), float(ys[k])
    a = float(xs[max(k - 1, 0)])
    b = float(xs[min(k + 1, n_scan - 1)])
    x, y = golden_section_max(f, a, b, tol)
    if y > best_y:
        return x, y
    return best_x, best_y
