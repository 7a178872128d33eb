"""Degenerate eigenstates at chi = (2l + 3)/4 as finite sums of parabolic-cylinder functions.

With zeta = sqrt(2 kappa) z the eigenvalue problem becomes, in terms of the
ladder operators b, b^dag of ``pcf`` and N = b^dag b,

    N psi1 + (1+k^2)/(1-k^2) b^2 psi1 + (2 - 2 chi) psi1 + mu k/(1-k^2) psi2 = 0
    N psi2 + (1+k^2)/(1-k^2) b^dag^2 psi2 - (1 - 2 chi) psi2 - mu k/(1-k^2) psi1 = 0

The first line gives psi2 = -(1/(mu k)) [(1-k^2)(N + 2 - 2 chi) + (1+k^2) b^2] psi1,
and eliminating psi2 leaves L psi1 = 0 where L maps Dn to
beta_n Dn + alpha_n D_{n+2} + gamma_n D_{n-2}.  The ansatz
psi1 = sum_j a_j D_{l1+2j}, l1 = -1-l, j = 0..l turns this into a tridiagonal
system whose determinant vanishes exactly on the degenerate (kappa, mu).

Row 0 of that system reads beta_{l1} a_0 + gamma_{l1+2} a_1 with
gamma_{1-l} = 0 identically, so a_0 = 0 at every root and the singular part is
the trailing l x l block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from numpy.polynomial import polynomial as npoly

from .model import ModelParams, energy_from_chi
from .pcf import DIndex, eval_D, scaled_taylor, taylor
from .roots import scan_roots
from .tridiag import inverse_iteration, tridiagonal_matvec

ROOT_GRID = 2000
ROOT_XTOL = 1e-14
NULL_RESIDUAL = 1e-9


class NullSpaceError(RuntimeError):
    pass


def chi_of_ell(ell):
    return Fraction(2 * ell + 3, 4)


def coeff_abc(n, m: ModelParams, chi):
    """(alpha_n, beta_n, gamma_n); exact when kappa, mu, chi are Fractions."""
    k2 = m.kappa * m.kappa
    k4 = k2 * k2
    alpha = (1 - k4) * (5 + 2 * n - 4 * chi)
    beta = (1 + k4) * (4 * n * n - 1) + 2 * (1 - k2) ** 2 * (2 * n - 1 - 2 * chi * (2 * chi - 3)) + 2 * k2 * m.mu ** 2
    gamma = (1 - k4) * (4 * n * n - 1) * (4 * chi + 2 * n - 5) / 4
    return alpha, beta, gamma


@dataclass(frozen=True)
class TridiagSystem:
    """Band of the (l+1) x (l+1) system for a_0..a_l.

    ``lower[j]`` = alpha_{l1+2j} at (j+1, j); ``diag[j]`` = beta_{l1+2j};
    ``upper[j]`` = gamma_{l1+2j+2} at (j, j+1).
    """

    ell: int
    params: ModelParams
    lower: tuple
    diag: tuple
    upper: tuple

    @property
    def chi(self):
        return chi_of_ell(self.ell)

    @property
    def l1(self) -> int:
        return -1 - self.ell

    @property
    def size(self) -> int:
        return self.ell + 1

    @classmethod
    def build(cls, ell: int, m: ModelParams) -> "TridiagSystem":
        if ell < 1:
            raise ValueError("ell must be >= 1")
        chi = _chi_like(ell, m.kappa)
        l1 = -1 - ell
        coeffs = [coeff_abc(l1 + 2 * j, m, chi) for j in range(ell + 1)]
        diag = tuple(c[1] for c in coeffs)
        lower = tuple(coeffs[j][0] for j in range(ell))
        upper = tuple(coeffs[j + 1][2] for j in range(ell))
        return cls(ell, m, lower, diag, upper)

    def dense(self) -> np.ndarray:
        n = self.size
        M = np.zeros((n, n))
        M[np.arange(n), np.arange(n)] = [float(v) for v in self.diag]
        M[np.arange(1, n), np.arange(n - 1)] = [float(v) for v in self.lower]
        M[np.arange(n - 1), np.arange(1, n)] = [float(v) for v in self.upper]
        return M

    def top_leak(self):
        """alpha_{l1+2l}: coefficient that would push the expansion above the block."""
        return coeff_abc(self.l1 + 2 * self.ell, self.params, self.chi)[0]

    def bottom_coupling(self):
        """gamma_{l1+2}: couples a_1 into row 0; vanishes identically."""
        return self.upper[0] if self.ell >= 1 else 0


def _chi_like(ell, kappa):
    """chi = (2l+3)/4 in the number type of kappa."""
    if isinstance(kappa, Fraction):
        return chi_of_ell(ell)
    if isinstance(kappa, mpmath.mpf):
        return mpmath.mpf(2 * ell + 3) / 4
    return (2 * ell + 3) / 4


def _leading_minors(lower, diag, upper):
    d_prev, d = 1, diag[0]
    s_prev, s = 1, abs(diag[0])
    for k in range(1, len(diag)):
        lu = lower[k - 1] * upper[k - 1]
        d_prev, d = d, diag[k] * d - lu * d_prev
        s_prev, s = s, abs(diag[k]) * s + abs(lu) * s_prev
    return d, s


def determinant(ell: int, m: ModelParams, mode: str = "double"):
    """Determinant of the system via the leading-minor recurrence.

    mode ``double`` uses floats, ``extended`` mpmath at 50 digits, ``exact``
    Fractions (kappa and mu are converted exactly from their float values).
    """
    if mode == "exact":
        m = ModelParams(Fraction(m.kappa), Fraction(m.mu))
        t = TridiagSystem.build(ell, m)
        return _leading_minors(t.lower, t.diag, t.upper)[0]
    if mode == "extended":
        with mpmath.workdps(50):
            mm = ModelParams(mpmath.mpf(m.kappa), mpmath.mpf(m.mu))
            t = TridiagSystem.build(ell, mm)
            return _leading_minors(t.lower, t.diag, t.upper)[0]
    if mode != "double":
        raise ValueError(f"unknown mode {mode!r}")
    t = TridiagSystem.build(ell, ModelParams(float(m.kappa), float(m.mu)))
    return _leading_minors(t.lower, t.diag, t.upper)[0]


def scaled_determinant(ell: int, kappa, mu):
    """det / S with S the same recurrence in absolute values (a condition scale)."""
    t = TridiagSystem.build(ell, ModelParams(kappa, mu))
    d, s = _leading_minors(t.lower, t.diag, t.upper)
    return d / s


def _det_complex(ell, kappa: complex, mu: float):
    # analytic continuation in kappa for complex-step derivatives; ModelParams
    # rejects complex kappa so the band is assembled directly
    chi = (2 * ell + 3) / 4
    m = _Loose(kappa, mu)
    l1 = -1 - ell
    coeffs = [coeff_abc(l1 + 2 * j, m, chi) for j in range(ell + 1)]
    diag = [c[1] for c in coeffs]
    lower = [coeffs[j][0] for j in range(ell)]
    upper = [coeffs[j + 1][2] for j in range(ell)]
    return _leading_minors(lower, diag, upper)


@dataclass
class _Loose:
    kappa: complex
    mu: float


def _exact_sign(ell, kappa: float, mu: float) -> int:
    d = determinant(ell, ModelParams(kappa, mu), mode="exact")
    return (d > 0) - (d < 0)


def find_kappa_roots(ell: int, mu: float, grid: int = ROOT_GRID, xtol: float = ROOT_XTOL, touch_tol: float = 1e-12):
    """Roots of the determinant in kappa on (0, 1), simple and double.

    The double-root test bisects the complex-step slope, requires the scaled
    determinant to vanish in 50-digit arithmetic, and checks with exact
    rationals that the sign is the same on both sides.
    """
    if ell < 1 or not mu > 0:
        raise ValueError("need ell >= 1 and mu > 0")

    def extended(k):
        with mpmath.workdps(50):
            t = TridiagSystem.build(ell, ModelParams(mpmath.mpf(k), mpmath.mpf(mu)))
            d, s = _leading_minors(t.lower, t.diag, t.upper)
            return float(abs(d / s))

    return scan_roots(
        lambda k: scaled_determinant(ell, k, mu),
        lambda k: _det_complex(ell, k, mu)[0],
        extended,
        lambda k: _exact_sign(ell, k, mu),
        grid=grid, xtol=xtol, touch_tol=touch_tol,
    )


@dataclass
class NullVector:
    coefficients: np.ndarray
    residual: float
    singular_ratio: float
    extended: bool = False


def null_vector(ell: int, m: ModelParams, seed: int = 0) -> NullVector:
    """Null vector a_0..a_l at a root, scaled so that a_l (coefficient of D_{l-1}) is 1."""
    t = TridiagSystem.build(ell, ModelParams(float(m.kappa), float(m.mu)))
    lower = np.array(t.lower, dtype=float)
    diag = np.array(t.diag, dtype=float)
    upper = np.array(t.upper, dtype=float)
    # a_0 is pinned to zero by row 0; the singular block is rows/cols 1..l
    inner = inverse_iteration(lower[1:], diag[1:], upper[1:], iterations=2, seed=seed)
    a = np.concatenate([[0.0], inner])
    a /= a[-1]
    M = t.dense()
    sv = np.linalg.svd(M[1:, 1:], compute_uv=False)
    ratio = sv[-2] / sv[0] if sv.size > 1 else 1.0
    if ratio < 1e-8:
        raise NullSpaceError(f"second singular value {ratio:.2e} of the scale: null space is not one-dimensional")
    res = np.linalg.norm(tridiagonal_matvec(lower, diag, upper, a)) / (np.abs(M).max() * np.linalg.norm(a))
    if res < NULL_RESIDUAL:
        return NullVector(a, float(res), float(ratio))
    ext = null_vector_extended(ell, m)
    if ext.residual >= NULL_RESIDUAL:
        raise NullSpaceError(f"null-vector residual {ext.residual:.2e} even in extended precision")
    ext.singular_ratio = float(ratio)
    return ext


def null_vector_extended(ell: int, m: ModelParams) -> NullVector:
    """Root polished in 50 digits, then back-substitution through the inner block."""
    with mpmath.workdps(50):
        mu = mpmath.mpf(m.mu)

        def det_at(k):
            t = TridiagSystem.build(ell, ModelParams(k, mu))
            d, s = _leading_minors(t.lower, t.diag, t.upper)
            return d / s

        k = mpmath.findroot(det_at, mpmath.mpf(m.kappa))
        t = TridiagSystem.build(ell, ModelParams(k, mu))
        # rows j >= 1: alpha a_{j-1} + beta a_j + gamma a_{j+1} = 0 with a_0 = 0, a_1 = 1
        a = [mpmath.mpf(0), mpmath.mpf(1)]
        for j in range(1, ell):
            a.append(-(t.lower[j - 1] * a[j - 1] + t.diag[j] * a[j]) / t.upper[j])
        a = [v / a[-1] for v in a]
    af = np.array([float(v) for v in a])
    tf = TridiagSystem.build(ell, ModelParams(float(m.kappa), float(m.mu)))
    M = tf.dense()
    res = np.linalg.norm(M @ af) / (np.abs(M).max() * np.linalg.norm(af))
    return NullVector(af, float(res), float("nan"), extended=True)


@dataclass
class DExpansion:
    """sum_j coefficients[j] D_{l_start+2j}(scale z), all with literal branch ``branch``.

    Every index in the sum has the parity of l_start, which is what keeps the
    literal branch uniform under N, b^2 and b^dag^2.
    """

    l_start: int
    coefficients: np.ndarray
    branch: int
    scale: float
    tag: str = ""

    def indices(self):
        return [self.l_start + 2 * j for j in range(len(self.coefficients))]

    def terms(self):
        return zip(self.indices(), self.coefficients)

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for n, c in self.terms():
            if c != 0:
                out = out + c * eval_D(DIndex(n, self.branch), self.scale * z).value
        return out

    def derivative(self) -> "DExpansion":
        """z-derivative, exact through d/dzeta Dn = [(n+1/2) D_{n-1} - D_{n+1}]/2."""
        out = {}
        for n, c in self.terms():
            out[n - 1] = out.get(n - 1, 0) + self.scale * c * (n + 0.5) / 2
            out[n + 1] = out.get(n + 1, 0) - self.scale * c / 2
        return _from_dict(out, -self.branch, self.scale, self.tag)

    def derivatives(self, z, order: int):
        vals = []
        e = self
        for _ in range(order + 1):
            vals.append(e.evaluate(z))
            e = e.derivative()
        return vals

    def scaled_taylor(self, K: int) -> np.ndarray:
        """sqrt(j!) times the z^j Maclaurin coefficient, j = 0..K."""
        t = np.zeros(K + 1)
        for n, c in self.terms():
            if c != 0:
                t = t + c * scaled_taylor(DIndex(n, self.branch), K, self.scale)
        return t

    def taylor(self, K: int) -> np.ndarray:
        c = np.zeros(K + 1)
        powers = self.scale ** np.arange(K + 1)
        for n, a in self.terms():
            if a != 0:
                c = c + a * taylor(DIndex(n, self.branch), K).coefficients * powers
        return c

    def as_dict(self):
        return {n: c for n, c in self.terms()}


def _from_dict(d, branch, scale, tag):
    keys = sorted(d)
    lo, hi = keys[0], keys[-1]
    coeffs = np.array([d.get(n, 0.0) for n in range(lo, hi + 1, 2)])
    return DExpansion(lo, coeffs, branch, scale, tag)


@dataclass
class TranscendentalState:
    ell: int
    params: ModelParams
    psi1: DExpansion
    psi2: DExpansion
    null: NullVector | None = None

    @property
    def chi(self):
        return (2 * self.ell + 3) / 4

    @property
    def energy(self) -> float:
        return float(energy_from_chi(self.chi, self.params))

    @property
    def branch(self) -> int:
        return self.psi1.branch

    def component(self, which: int) -> DExpansion:
        return self.psi1 if which == 1 else self.psi2

    def derivatives(self, which: int, z, order: int):
        return self.component(which).derivatives(z, order)

    def scaled_taylor(self, which: int, K: int):
        return self.component(which).scaled_taylor(K)


def psi2_from_psi1(a, ell: int, m: ModelParams):
    """c_j with psi2 = sum c_j D_{l1-2+2j}, from the first component equation."""
    k2 = m.kappa * m.kappa
    chi = (2 * ell + 3) / 4
    l1 = -1 - ell
    out = {}
    for j, aj in enumerate(a):
        n = l1 + 2 * j
        out[n] = out.get(n, 0.0) + (1 - k2) * (n + 0.5 + 2 - 2 * chi) * aj
        out[n - 2] = out.get(n - 2, 0.0) + (1 + k2) * (n + 0.5) * (n - 0.5) * aj
    top = l1 + 2 * ell
    # N + 2 - 2 chi annihilates the top index at chi = (2l+3)/4
    assert abs(out.get(top, 0.0)) <= 1e-12 * max(1.0, max(abs(v) for v in out.values()))
    out.pop(top, None)
    c = np.array([-out.get(l1 - 2 + 2 * j, 0.0) / (m.mu * m.kappa) for j in range(ell + 1)])
    return c


def build_state(ell: int, m: ModelParams, branch: int, null: NullVector | None = None) -> TranscendentalState:
    if null is None:
        null = null_vector(ell, m)
    a = null.coefficients
    scale = math.sqrt(2 * m.kappa)
    l1 = -1 - ell
    c = psi2_from_psi1(a, ell, m)
    psi1 = DExpansion(l1, a.copy(), branch, scale, "psi1")
    psi2 = DExpansion(l1 - 2, c, branch, scale, "psi2")
    return TranscendentalState(ell, m, psi1, psi2, null)


@dataclass
class ADBRepresentation:
    """psi(z) = A(z) d(z) + B(z) d'(z) with d(z) = D0^(d_branch)(sqrt(2 kappa) z).

    A and B are ascending coefficient arrays in z.
    """

    A: np.ndarray
    B: np.ndarray
    d_branch: int
    kappa: float
    flags: list = field(default_factory=list)

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        s = math.sqrt(2 * self.kappa)
        v = eval_D(DIndex(0, self.d_branch), s * z)
        d, dp = v.value, s * v.derivative
        return npoly.polyval(z, self.A) * d + npoly.polyval(z, self.B) * dp

    @property
    def degree_A(self) -> int:
        return _degree(self.A)

    @property
    def degree_B(self) -> int:
        return _degree(self.B)


def _degree(p, tol=1e-13):
    p = np.asarray(p)
    if p.size == 0:
        return -1
    big = np.abs(p).max()
    nz = np.flatnonzero(np.abs(p) > tol * big) if big > 0 else []
    return int(nz[-1]) if len(nz) else -1


def _zeta_rep(n: int):
    """(p, q) with Dn = p(zeta) D0 + q(zeta) D0', zeta-polynomials as arrays."""
    reps = {0: (np.array([1.0]), np.array([0.0])), 1: (np.array([0.0, 0.5]), np.array([-1.0]))}
    zeta = np.array([0.0, 1.0])
    if n >= 0:
        for k in range(1, n):
            p1, q1 = reps[k]
            p0, q0 = reps[k - 1]
            reps[k + 1] = (npoly.polysub(npoly.polymul(zeta, p1), (k + 0.5) * p0),
                           npoly.polysub(npoly.polymul(zeta, q1), (k + 0.5) * q0))
        return reps[n]
    for k in range(0, n, -1):
        p1, q1 = reps[k]
        p2, q2 = reps[k + 1]
        reps[k - 1] = (npoly.polysub(npoly.polymul(zeta, p1), p2) / (k + 0.5),
                       npoly.polysub(npoly.polymul(zeta, q1), q2) / (k + 0.5))
    return reps[n]


def reduce_to_AdB(e: DExpansion, kappa: float, ell: int | None = None) -> ADBRepresentation:
    """Rewrite an expansion as A(z) d(z) + B(z) d'(z).

    zeta Dn = (n+1/2) D_{n-1} + D_{n+1} carries every index to D0, D1, and
    D1 = zeta D0/2 - D0' leaves D0 and its derivative.
    """
    s = math.sqrt(2 * kappa)
    A = np.zeros(1)
    B = np.zeros(1)
    for n, c in e.terms():
        if c == 0:
            continue
        p, q = _zeta_rep(n)
        A = npoly.polyadd(A, c * p)
        B = npoly.polyadd(B, c * q)
    # zeta -> s z, and D0'(zeta) = d'(z)/s
    A = A * s ** np.arange(A.size)
    B = B * s ** np.arange(B.size) / s
    # branch flips once per unit index step
    d_branch = e.branch * (-1) ** (e.l_start % 2)
    rep = ADBRepresentation(A, B, d_branch, kappa)
    if ell is not None:
        rep.flags.extend(adb_law_violations(rep, ell))
    return rep


def adb_law_violations(rep: ADBRepresentation, ell: int, tol: float = 1e-10):
    """Degree and parity laws for A, B: deg A = l-1 with A(-z) = (-1)^(l+1) A(z);
    deg B <= l-2 with B(-z) = (-1)^l B(z)."""
    out = []
    if rep.degree_A != ell - 1:
        out.append(f"deg A = {rep.degree_A}, expected {ell - 1}")
    if rep.degree_B > ell - 2:
        out.append(f"deg B = {rep.degree_B}, expected <= {ell - 2}")
    if ell == 2 and rep.degree_B >= 0:
        out.append("B is nonzero at l = 2")
    for name, p, par in (("A", rep.A, (-1) ** (ell + 1)), ("B", rep.B, (-1) ** ell)):
        if p.size == 0:
            continue
        big = max(np.abs(p).max(), 1e-300)
        wrong = [k for k in range(p.size) if (-1) ** k != par and abs(p[k]) > tol * big]
        if wrong:
            out.append(f"{name} has terms of the wrong parity at powers {wrong}")
    return out


def l2_factor_residual(state: TranscendentalState, z=None) -> float:
    """Max over z of |psi1'' + kappa (2 - kappa z^2) psi1| / (scale of the terms)."""
    if z is None:
        z = np.linspace(-2, 2, 41)
    k = state.params.kappa
    f, _, f2 = state.psi1.derivatives(z, 2)
    pot = k * (2 - k * np.asarray(z) ** 2) * f
    scale = np.maximum(np.abs(f2), np.abs(pot))
    scale = np.where(scale == 0, 1.0, scale)
    return float(np.max(np.abs(f2 + pot) / scale))


def l2_factor_check(kappa: float, branch: int, z=None) -> float:
    """L2 = d^2 + kappa(2 - kappa z^2) applied to D0^(branch)(sqrt(2 kappa) z)."""
    e = DExpansion(0, np.array([1.0]), branch, math.sqrt(2 * kappa))
    st = TranscendentalState(1, _Loose(kappa, 0.0), e, e)
    return l2_factor_residual(st, z)
