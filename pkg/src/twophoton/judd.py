"""Degenerate states of the form Gaussian times polynomial, at chi = n/2.

Substituting psi1 = exp(a z^2) P(z) into the fourth-order equation turns every
derivative into D = d/dz + 2 a z acting on P.  For (2a)^2 = kappa^2 the z^{k+4}
terms cancel, and the z^{k+2} coefficient is proportional to 2 chi - 2 - k,
so at chi = n/2 the polynomial closes at degree n - 2.  Only the decaying
exponent 2a = -kappa is used; 2a = +kappa reappears as the tau image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .model import ModelParams, Parity, energy_from_chi
from .roots import scan_roots

DEGREE_CAP = 64


class ClosureError(RuntimeError):
    pass


# plain-list polynomial helpers so that Fractions and complex values pass through

def _padd(p, q):
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def _pscale(p, c):
    return [c * v for v in p]


def _pshift(p, k):
    """Multiply by z^k."""
    return [0] * k + list(p)


def _pderiv(p):
    return [i * p[i] for i in range(1, len(p))] or [0]


def _apply_D(p, a):
    return _padd(_pderiv(p), _pscale(_pshift(p, 1), 2 * a))


def conjugated_operator(p, a, x, E, mu):
    """exp(-a z^2) L [exp(a z^2) p] for the fourth-order operator L."""
    d1 = _apply_D(p, a)
    d2 = _apply_D(d1, a)
    d4 = _apply_D(_apply_D(d2, a), a)
    out = d4
    out = _padd(out, _padd(_pscale(_pshift(d2, 2), 2 - 4 * x * x), _pscale(d2, 4 * x)))
    out = _padd(out, _pscale(_pshift(d1, 1), 4 * (1 + E * x - x * x)))
    out = _padd(out, _padd(_pscale(p, 2 - E * E + mu * mu), _padd(_pscale(_pshift(p, 2), -4 * x), _pshift(p, 4))))
    return out


def _params(kappa, n):
    chi = Fraction(n, 2) if isinstance(kappa, Fraction) else n / 2
    x = (kappa + 1 / kappa) / 2
    E = 2 * (1 / kappa - kappa) * (chi - 1) - kappa
    return x, E, -kappa / 2


def closing_degree(n: int, kappa=0.3, mu=1.0, cap: int = DEGREE_CAP) -> int:
    """Smallest degree K whose image has no z^{K+2} term, searched upward."""
    x, E, a = _params(kappa, n)
    for K in range(cap + 1):
        img = conjugated_operator(_pshift([1], K), a, x, E, mu)
        lead = img[K + 2] if len(img) > K + 2 else 0
        if abs(lead) <= 1e-12 * max(1.0, max(abs(v) for v in img)):
            return K
    raise ClosureError(f"polynomial ansatz does not close below degree {cap} at chi = {n}/2")


def judd_matrix(n: int, kappa, mu):
    """Square system for P = sum p_k z^k, k = d, d-2, ...; rows are the z^m
    coefficients with m of the same parity, m <= d."""
    d = n - 2
    x, E, a = _params(kappa, n)
    ks = list(range(d % 2, d + 1, 2))
    cols = [conjugated_operator(_pshift([1], k), a, x, E, mu) for k in ks]
    return [[(c[m] if m < len(c) else 0) for c in cols] for m in ks], ks


def _det(rows):
    """Determinant by Gaussian elimination; exact for Fractions."""
    A = [list(r) for r in rows]
    n = len(A)
    det = 1
    for i in range(n):
        piv = max(range(i, n), key=lambda r: abs(A[r][i]))
        if A[piv][i] == 0:
            return 0 * det
        if piv != i:
            A[i], A[piv] = A[piv], A[i]
            det = -det
        det = det * A[i][i]
        for r in range(i + 1, n):
            f = A[r][i] / A[i][i]
            for c in range(i, n):
                A[r][c] = A[r][c] - f * A[i][c]
    return det


def judd_determinant(n: int, kappa, mu, scaled: bool = True):
    rows, _ = judd_matrix(n, kappa, mu)
    if scaled:
        # divide each row by its largest entry so the value is scale-free
        rows = [[v / max(max(abs(u) for u in r), 1e-300) for v in r] for r in rows]
    return _det(rows)


def find_judd_roots(n: int, mu: float, grid: int = 2000):
    if n < 2 or not mu > 0:
        raise ValueError("need n >= 2 and mu > 0")

    def f(k):
        return float(judd_determinant(n, k, mu))

    def fc(k):
        rows, _ = judd_matrix(n, k, mu)
        # fixed real row scales keep the complex continuation analytic
        sc = [max(abs(v.real) for v in r) or 1.0 for r in judd_matrix(n, k.real, mu)[0]]
        return _det([[v / s for v in r] for r, s in zip(rows, sc)])

    def extended(k):
        with mpmath.workdps(50):
            return float(abs(judd_determinant(n, mpmath.mpf(k), mpmath.mpf(mu))))

    def exact_sign(k):
        v = judd_determinant(n, Fraction(k), Fraction(mu), scaled=False)
        return (v > 0) - (v < 0)

    return scan_roots(f, fc, extended, exact_sign, grid=grid)


@dataclass(frozen=True)
class JuddAnsatz:
    n: int
    a: float
    P: tuple


@dataclass
class GaussPoly:
    """sum over terms of exp(a z^2) p(z); coefficients ascending in z."""

    terms: list

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for a, p in self.terms:
            out = out + np.exp(a * z * z) * np.polynomial.polynomial.polyval(z, np.asarray(p, dtype=complex))
        return out

    def derivative(self) -> "GaussPoly":
        return GaussPoly([(a, _apply_D(list(p), a)) for a, p in self.terms])

    def derivatives(self, z, order):
        out, e = [], self
        for _ in range(order + 1):
            out.append(e.evaluate(z))
            e = e.derivative()
        return out

    def scaled_taylor(self, K: int) -> np.ndarray:
        """sqrt(j!) times the z^j coefficient, j = 0..K, without forming factorials."""
        t = np.zeros(K + 1, dtype=complex)
        for a, p in self.terms:
            for k, c in enumerate(p):
                if c == 0:
                    continue
                for m in range((K - k) // 2 + 1):
                    j = k + 2 * m
                    if a == 0:
                        if m > 0:
                            break
                        mag = 0.5 * math.lgamma(j + 1)
                        t[j] += c * math.exp(mag)
                        continue
                    mag = 0.5 * math.lgamma(j + 1) - math.lgamma(m + 1) + m * math.log(abs(a))
                    t[j] += c * math.copysign(1.0, a) ** m * math.exp(mag)
        return t


@dataclass
class JuddState:
    n: int
    params: ModelParams
    ansatz: JuddAnsatz
    parity: Parity
    psi1: GaussPoly
    psi2: GaussPoly

    @property
    def chi(self):
        return self.n / 2

    @property
    def energy(self) -> float:
        return float(energy_from_chi(self.chi, self.params))

    def component(self, which):
        return self.psi1 if which == 1 else self.psi2

    def derivatives(self, which, z, order):
        return self.component(which).derivatives(z, order)

    def scaled_taylor(self, which, K):
        return self.component(which).scaled_taylor(K)


def judd_null_vector(n: int, m: ModelParams):
    rows, ks = judd_matrix(n, m.kappa, m.mu)
    A = np.array(rows, dtype=float)
    A = A / np.abs(A).max(axis=1, keepdims=True)
    _, sv, vt = np.linalg.svd(A)
    v = vt[-1]
    P = np.zeros(n - 1)
    P[ks] = v / v[-1]
    return P, sv


def _rotate(p, phase):
    """Coefficients of p(phase z)."""
    return [c * phase ** k for k, c in enumerate(p)]


def build_judd_states(n: int, m: ModelParams):
    """The two tau-definite states at a root: psi + s^{-1} tau psi with s^2 = (-1)^(n-2)."""
    P, _ = judd_null_vector(n, m)
    x, E, a = _params(m.kappa, n)
    p = list(P)
    d2 = _apply_D(_apply_D(p, a), a)
    Q = _padd(_padd(d2, _pscale(_pshift(_apply_D(p, a), 1), 2 * x)), _padd(_pshift(p, 2), _pscale(p, -E)))
    Q = _pscale(Q, -1 / m.mu)
    ansatz = JuddAnsatz(n, a, tuple(P))
    pair = (Parity.PLUS_ONE, Parity.MINUS_ONE) if (n - 2) % 2 == 0 else (Parity.PLUS_I, Parity.MINUS_I)
    out = []
    for s in pair:
        inv = 1 / complex(s.value)
        psi1 = GaussPoly([(a, [complex(c) for c in p]), (-a, _pscale(_rotate(Q, 1j), inv))])
        psi2 = GaussPoly([(a, [complex(c) for c in Q]), (-a, _pscale(_rotate(p, 1j), inv))])
        out.append(JuddState(n, m, ansatz, s, psi1, psi2))
    return out


def judd_states(n: int, mu: float):
    """[(kappa*, JuddAnsatz)] at chi = n/2; empty when the condition has no root in (0, 1)."""
    closing_degree(n)
    out = []
    for r in find_judd_roots(n, mu):
        m = ModelParams(r.kappa, mu)
        P, _ = judd_null_vector(n, m)
        _, _, a = _params(r.kappa, n)
        out.append((r, JuddAnsatz(n, a, tuple(P))))
    return out
