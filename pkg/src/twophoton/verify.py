"""Independent checks on constructed states: equation residuals, Z4 parity,
Bargmann norm and degeneracy of the eigenvalue.

A state is anything with ``params``, ``energy``, ``derivatives(which, z, order)``
and ``scaled_taylor(which, K)``; both ``TranscendentalState`` and ``JuddState``
qualify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import degeneracy_window_count
from .model import ModelParams, Parity, SECTOR_ORDER

NORM_TERMS = 400
TAIL = 100


def default_grid() -> np.ndarray:
    """24 points on [-2, 2] and 8 on the unit circle."""
    return np.concatenate([np.linspace(-2, 2, 24), np.exp(2j * np.pi * (np.arange(8) + 0.5) / 8)])


@dataclass
class ResidualReport:
    max_residual: float
    equation: str
    grid: str
    degenerate: bool = False


def _normalized(terms):
    terms = np.array(terms)
    total = np.abs(terms.sum(axis=0))
    scale = np.abs(terms).max(axis=0)
    if np.all(scale == 0):
        return 0.0, True
    ok = scale > 0
    return float(np.max(total[ok] / scale[ok])), False


def _grid_label(z):
    return f"{len(z)} points, |z| <= {np.abs(z).max():.3g}"


def ode_residual(state, m: ModelParams | None = None, E: float | None = None, z=None):
    """Fourth-order residual of psi1 and coupled-system residual of (psi1, psi2),
    each divided pointwise by the largest term."""
    m = state.params if m is None else m
    E = state.energy if E is None else E
    z = default_grid() if z is None else np.asarray(z, dtype=complex)
    x, mu = m.x, m.mu
    f = state.derivatives(1, z, 4)
    g = state.derivatives(2, z, 2)
    fourth = [
        f[4],
        ((2 - 4 * x * x) * z ** 2 + 4 * x) * f[2],
        4 * z * (1 + E * x - x * x) * f[1],
        (2 - E * E + mu * mu - 4 * x * z ** 2 + z ** 4) * f[0],
    ]
    first = [f[2], 2 * x * z * f[1], (z * z - E) * f[0], mu * g[0]]
    second = [g[2], -2 * x * z * g[1], (z * z + E) * g[0], -mu * f[0]]
    r4, deg4 = _normalized(fourth)
    r1, deg1 = _normalized(first)
    r2, deg2 = _normalized(second)
    label = _grid_label(z)
    return (
        ResidualReport(r4, "fourth-order", label, deg4),
        ResidualReport(max(r1, r2), "system", label, deg1 and deg2),
    )


def parity_deviation(state, s, z=None) -> float:
    """max over z of |psi1(iz) - s psi2(z)| and |psi2(iz) - s psi1(z)|, relative to the component scale."""
    z = default_grid() if z is None else np.asarray(z, dtype=complex)
    s = complex(s.value if isinstance(s, Parity) else s)
    p1, p2 = state.derivatives(1, z, 0)[0], state.derivatives(2, z, 0)[0]
    q1, q2 = state.derivatives(1, 1j * z, 0)[0], state.derivatives(2, 1j * z, 0)[0]
    scale = max(np.abs(p1).max(), np.abs(p2).max(), np.abs(q1).max(), np.abs(q2).max(), 1e-300)
    return float(max(np.abs(q1 - s * p2).max(), np.abs(q2 - s * p1).max()) / scale)


def parity_check(state, s, z=None, tol: float = 1e-9) -> tuple[bool, float]:
    dev = parity_deviation(state, s, z)
    return dev < tol, dev


def infer_parity(state, z=None) -> tuple[Parity, float]:
    """The fourth root of unity that best satisfies psi1(iz) = s psi2(z), and its deviation."""
    devs = [(parity_deviation(state, s, z), s) for s in SECTOR_ORDER]
    dev, s = min(devs, key=lambda t: t[0])
    return s, dev


@dataclass
class NormReport:
    partial_sums: np.ndarray
    verdict: str
    tail_ratio: float
    type_estimate: float
    norm_squared: float

    @property
    def convergent(self) -> bool:
        return self.verdict == "convergent"


def norm_from_scaled(t, tail: int = TAIL, band: float = 1e-2) -> NormReport:
    """Bargmann norm from t_j = sqrt(j!) f_j (one array per component, summed).

    The ratio w_j / w_{j-2} of w_j = |t_j|^2 + |t_{j-1}|^2 tends to 4 sigma^2
    for a function of order 2 and type sigma.  The limit is read off a fit over
    the last ``tail`` terms; the verdict is convergent below 1 - band,
    divergent above 1 + band and inconclusive in between (in particular for a
    ratio tending to exactly 1).
    """
    if isinstance(t, np.ndarray) and t.ndim == 1:
        t = [t]
    w = sum(np.abs(np.asarray(ti)) ** 2 for ti in t)
    partial = np.cumsum(w)
    pair = w[1:] + w[:-1]
    if not np.any(pair > 0):
        return NormReport(partial, "convergent", 0.0, 0.0, 0.0)
    # fast-decaying series underflow long before K: end the window at the
    # last term that is still representable
    alive = np.flatnonzero(pair > 1e-280 * pair.max())
    pair = pair[: alive[-1] + 1]
    tail = min(tail, (pair.size - 3) // 2 * 2)
    if tail < 10:
        return NormReport(partial, "convergent", 0.0, 0.0, float(partial[-1]))
    j = np.arange(pair.size - tail, pair.size, dtype=float) + 1
    win = pair[-tail:]
    pos = win > 0
    if pos.sum() < 10:
        return NormReport(partial, "inconclusive", float("nan"), float("nan"), float("inf"))
    # log w = a j + p log j + c: the power p absorbs algebraic prefactors, so a
    # type-1/2 function (ratio -> 1 from below) is not mistaken for convergent
    A = np.column_stack([j[pos], np.log(j[pos]), np.ones(pos.sum())])
    coef, *_ = np.linalg.lstsq(A, np.log(win[pos]), rcond=None)
    ratio = float(np.exp(2 * coef[0]))
    if ratio < 1 - band:
        verdict = "convergent"
    elif ratio > 1 + band:
        verdict = "divergent"
    else:
        verdict = "inconclusive"
    sigma = math.sqrt(ratio) / 2 if np.isfinite(ratio) else float("inf")
    total = float(partial[-1]) if verdict == "convergent" else float("inf")
    return NormReport(partial, verdict, ratio, sigma, total)


def bargmann_norm(state, K: int = NORM_TERMS) -> NormReport:
    return norm_from_scaled([state.scaled_taylor(1, K), state.scaled_taylor(2, K)])


def gaussian_scaled_taylor(sigma: float, K: int) -> np.ndarray:
    """sqrt(j!) f_j for f = exp(sigma z^2), a reference function of type sigma."""
    t = np.zeros(K + 1)
    for m in range(K // 2 + 1):
        j = 2 * m
        t[j] = math.exp(0.5 * math.lgamma(j + 1) - math.lgamma(m + 1) + m * math.log(sigma))
    return t


def norm_by_quadrature(components, radius: float = 8.0, nr: int = 200, ntheta: int = 128) -> float:
    """(1/pi) sum_c int |f_c|^2 exp(-|z|^2) dA by Gauss-Legendre in r and the
    trapezoid rule in theta; ``components`` are vectorised callables.

    A low-accuracy cross-check on the series norm.
    """
    x, w = np.polynomial.legendre.leggauss(nr)
    r = (x + 1) * radius / 2
    wr = w * radius / 2
    th = 2 * np.pi * np.arange(ntheta) / ntheta
    Z = r[:, None] * np.exp(1j * th[None, :])
    vals = sum(np.abs(f(Z)) ** 2 for f in components) * np.exp(-r[:, None] ** 2) * r[:, None]
    return float((vals.mean(axis=1) * 2 * np.pi * wr).sum() / np.pi)


@dataclass
class DegeneracyReport:
    count: int
    window: float
    probes: dict = field(default_factory=dict)


def degeneracy_count(kappa: float, mu: float, E_star: float, N: int = 240, tol: float = 1e-7) -> DegeneracyReport:
    """Eigenvalues of all four sectors in |E - E*| < tol.

    A count other than 2 is re-examined in narrower and wider windows, so a
    nearby unrelated level shows up in the report instead of being silently
    counted.
    """
    m = ModelParams(kappa, mu)
    c = degeneracy_window_count(m, E_star, N, tol)
    rep = DegeneracyReport(c, tol)
    if c != 2:
        for f in (0.01, 0.1, 10.0, 100.0):
            rep.probes[f * tol] = degeneracy_window_count(m, E_star, N, f * tol)
    return rep


@dataclass
class VerificationSummary:
    fourth_order: float
    system: float
    parity: str
    parity_deviation: float
    norm_verdict: str
    type_estimate: float
    degeneracy: int
    passed: bool
    failures: list


def verify_state(state, residual_tol=1e-8, parity_tol=1e-9, N=240, degeneracy_tol=1e-7, expected_parity=None):
    """Full chain: residuals, parity, norm and degeneracy count at the state's energy."""
    r4, rs = ode_residual(state)
    s, dev = infer_parity(state)
    if expected_parity is not None:
        dev = parity_deviation(state, expected_parity)
        s = expected_parity
    norm = bargmann_norm(state)
    deg = degeneracy_count(state.params.kappa, state.params.mu, state.energy, N, degeneracy_tol)
    failures = []
    if r4.degenerate or not r4.max_residual < residual_tol:
        failures.append("fourth_order_residual")
    if not rs.max_residual < residual_tol:
        failures.append("system_residual")
    if not dev < parity_tol:
        failures.append("parity")
    if not norm.convergent:
        failures.append("norm")
    if deg.count != 2:
        failures.append("degeneracy")
    return VerificationSummary(
        r4.max_residual, rs.max_residual, s.label, dev, norm.verdict, norm.type_estimate, deg.count, not failures, failures
    )
