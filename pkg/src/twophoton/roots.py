"""Root scans in kappa on (0, 1) for determinant-like functions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class KappaRoot:
    kappa: float
    order: int = 1
    at_edge: bool = False

    def __float__(self):
        return self.kappa


def scan_roots(f, f_complex, extended_abs, exact_sign, grid=2000, xtol=1e-14, touch_tol=1e-12, step=1e-20):
    """Sign changes of f on a midpoint grid, refined by Brent's method, plus
    double roots at interior minima of |f| without a sign change.

    ``f`` should be scale-free (e.g. det / condition scale); ``f_complex`` is
    its analytic continuation, used for complex-step slopes; ``extended_abs``
    returns |f| in extended precision; ``exact_sign`` the exact sign.
    """
    ks = (np.arange(grid) + 0.5) / grid
    vals = np.array([f(float(k)) for k in ks])
    roots: list[KappaRoot] = []
    for i in range(grid - 1):
        if vals[i] == 0:
            roots.append(KappaRoot(float(ks[i]), 1, i == 0))
        elif vals[i] * vals[i + 1] < 0:
            r = brentq(f, ks[i], ks[i + 1], xtol=xtol, rtol=4 * EPS)
            roots.append(KappaRoot(float(r), 1, i == 0 or i == grid - 2))

    def slope(k):
        return f_complex(complex(k, step)).imag / step

    for i in range(1, grid - 1):
        v0, v1, v2 = abs(vals[i - 1]), abs(vals[i]), abs(vals[i + 1])
        if not (v1 < v0 and v1 < v2):
            continue
        if vals[i - 1] * vals[i] <= 0 or vals[i] * vals[i + 1] <= 0:
            continue
        a, b = ks[i - 1], ks[i + 1]
        if slope(a) * slope(b) >= 0:
            continue
        r = float(brentq(slope, a, b, xtol=xtol, rtol=4 * EPS))
        if extended_abs(r) > touch_tol:
            continue
        # a genuine touch keeps one sign on both sides
        left, right = exact_sign(r - 1e-6), exact_sign(r + 1e-6)
        if left != right or left == 0:
            continue
        if all(abs(r - q.kappa) > 1e-9 for q in roots):
            roots.append(KappaRoot(r, 2, False))
    roots.sort(key=lambda q: q.kappa)
    return roots
