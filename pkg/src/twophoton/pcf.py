"""The doubly infinite parabolic-cylinder family

    Dn^(+-)(zeta) = D_{n+1/2}(zeta) +- D_{n+1/2}(-zeta),      n in Z,

with D_nu in Whittaker's convention.  Every member solves

    Dn'' + (n + 1 - zeta^2/4) Dn = 0

and is entire.  The branch label is the literal sign in the definition, so
Dn^(+) is even and Dn^(-) is odd.  The ladder operators b^dag = zeta/2 - d and
b = zeta/2 + d change the parity of the function, hence they flip the literal
branch:

    b^dag Dn^(s) = D_{n+1}^(-s),     b Dn^(s) = (n + 1/2) D_{n-1}^(-s).

Evaluation: for moderate |zeta| the even/odd Kummer series with seeds
D_nu(0), D_nu'(0); for |zeta| >= ASYMPTOTIC_RADIUS near the real axis the
large-argument expansions of U(a, z) and V(a, z).  Points where the series
loses too many digits are recomputed in extended precision with mpmath.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np

ASYMPTOTIC_RADIUS = 12.0
# largest |Re zeta^2|/4 whose exponential is a finite double
OVERFLOW_EXPONENT = 700.0
# cond above this costs more than ~3 of 16 digits
ESCALATE_CONDITION = 1e3
SERIES_TOL = 1e-17
ASYMPTOTIC_TOL = 1e-14


class OverflowGuardError(OverflowError):
    pass


@dataclass(frozen=True)
class DIndex:
    n: int
    branch: int = 1

    def __post_init__(self):
        if self.branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")
        if int(self.n) != self.n:
            raise ValueError("only integer n is supported")

    @property
    def nu(self) -> float:
        return self.n + 0.5

    def raised(self) -> "DIndex":
        return DIndex(self.n + 1, -self.branch)

    def lowered(self) -> "DIndex":
        return DIndex(self.n - 1, -self.branch)


@dataclass
class DValue:
    value: np.ndarray
    derivative: np.ndarray
    condition: np.ndarray


def seed_value(nu: float) -> float:
    """D_nu(0)."""
    return 2 ** (nu / 2) * math.sqrt(math.pi) / math.gamma((1 - nu) / 2)


def seed_slope(nu: float) -> float:
    """D_nu'(0)."""
    return -(2 ** ((nu + 1) / 2)) * math.sqrt(math.pi) / math.gamma(-nu / 2)


def _kummer(a, b, w):
    """M(a, b, w), dM/dw and sum |terms| on an array of complex w."""
    w = np.asarray(w, dtype=complex)
    t = np.ones_like(w)
    M = np.ones_like(w)
    dM = np.zeros_like(w)
    absum = np.ones(w.shape)
    kmax = int(200 + 4 * (np.abs(w).max() if w.size else 0) + 4 * abs(a))
    for k in range(kmax):
        u = t * ((a + k) / (b + k))  # k-th term of M' = (a/b) M(a+1, b+1, w)
        dM += u
        t = u * w / (k + 1)
        M += t
        at = np.abs(t)
        absum += at
        if k > abs(a) + 2 and np.all(at <= SERIES_TOL * np.abs(M)) and np.all(np.abs(u) <= SERIES_TOL * np.maximum(np.abs(dM), 1e-300)):
            break
    return M, dM, absum


def _series(idx: DIndex, zeta: np.ndarray):
    nu = idx.nu
    w = zeta * zeta / 2
    flip = w.real < 0
    if idx.branch == 1:
        a, b, c0 = -nu / 2, 0.5, 2 * seed_value(nu)
    else:
        a, b, c0 = (1 - nu) / 2, 1.5, 2 * seed_slope(nu)
    g = np.empty_like(w)
    dg = np.empty_like(w)
    cond = np.empty(w.shape)
    direct = ~flip
    if direct.any():
        M, dM, s = _kummer(a, b, w[direct])
        e = np.exp(-w[direct] / 2)
        g[direct] = e * M
        dg[direct] = e * (dM - M / 2)
        cond[direct] = s / np.maximum(np.abs(M), 1e-300)
    if flip.any():
        # Kummer transformation keeps the series free of cancellation on Re w < 0
        M, dM, s = _kummer(b - a, b, -w[flip])
        e = np.exp(w[flip] / 2)
        g[flip] = e * M
        dg[flip] = e * (M / 2 - dM)
        cond[flip] = s / np.maximum(np.abs(M), 1e-300)
    if idx.branch == 1:
        value = c0 * g
        deriv = c0 * dg * zeta
    else:
        value = c0 * zeta * g
        deriv = c0 * (g + 2 * w * dg)
    return value, deriv, cond


def _series_mp(idx: DIndex, zeta: complex, dps: int):
    """Series in extended precision; dps grows until the cancellation it
    measures leaves at least 20 digits."""
    while True:
        out, cond = _series_mp_once(idx, zeta, dps)
        lost = math.log10(max(cond, 1.0))
        if dps - lost >= 20:
            return out
        dps = int(lost) + 30


def _series_mp_once(idx: DIndex, zeta: complex, dps: int):
    with mpmath.workdps(dps):
        nu = mpmath.mpf(idx.n) + mpmath.mpf(1) / 2
        z = mpmath.mpc(zeta)
        w = z * z / 2
        if idx.branch == 1:
            a, b = -nu / 2, mpmath.mpf(1) / 2
            c0 = 2 * 2 ** (nu / 2) * mpmath.sqrt(mpmath.pi) / mpmath.gamma((1 - nu) / 2)
        else:
            a, b = (1 - nu) / 2, mpmath.mpf(3) / 2
            c0 = -2 * 2 ** ((nu + 1) / 2) * mpmath.sqrt(mpmath.pi) / mpmath.gamma(-nu / 2)
        t = mpmath.mpc(1)
        M = mpmath.mpc(1)
        dM = mpmath.mpc(0)
        absum = mpmath.mpf(1)
        tol = mpmath.mpf(10) ** (-dps)
        k = 0
        while True:
            u = t * (a + k) / (b + k)
            dM += u
            t = u * w / (k + 1)
            M += t
            absum += abs(t)
            k += 1
            if k > abs(w) + abs(a) + 4 and abs(t) <= tol * abs(M) and abs(u) <= tol * abs(dM):
                break
        cond = float(absum / abs(M)) if M != 0 else float("inf")
        e = mpmath.exp(-w / 2)
        g = e * M
        dg = e * (dM - M / 2)
        if idx.branch == 1:
            return (complex(c0 * g), complex(c0 * dg * z)), cond
        return (complex(c0 * z * g), complex(c0 * (g + 2 * w * dg))), cond


def _asym_sum(zeta, p, eps, coeff):
    """e^{eps zeta^2/4} zeta^p sum_s c_s zeta^{-2s} and its zeta-derivative.

    ``coeff(s)`` yields the s-th coefficient; the divergent sum is cut at its
    smallest term.
    """
    inv = 1 / (zeta * zeta)
    total = np.zeros_like(zeta)
    dtotal = np.zeros_like(zeta)
    prev = np.full(zeta.shape, np.inf)
    last = np.zeros(zeta.shape)
    active = np.ones(zeta.shape, dtype=bool)
    term_pow = np.ones_like(zeta)
    for s in range(200):
        c = coeff(s)
        term = c * term_pow
        mag = np.abs(term)
        active &= mag < prev
        if not active.any():
            break
        last = np.where(active, mag, last)
        total = np.where(active, total + term, total)
        dtotal = np.where(active, dtotal + term * (eps * zeta / 2 + (p - 2 * s) / zeta), dtotal)
        small = mag <= SERIES_TOL * np.abs(total)
        last = np.where(active & small, 0.0, last)
        prev = mag
        active &= ~small
        term_pow = term_pow * inv
        if c == 0:
            break
    front = np.exp(eps * zeta * zeta / 4) * zeta ** p
    # truncation error of an alternating-type asymptotic sum ~ its last retained term
    err = np.abs(front) * last
    return front * total, front * dtotal, err


def _asymptotic(idx: DIndex, zeta: np.ndarray):
    """Valid for Re zeta > 0, |arg zeta| well inside pi/4."""
    nu = idx.nu

    def u_coeff(s, _cache={}):
        key = (nu, s)
        if key not in _cache:
            # (-1)^s (-nu)_{2s} / (s! 2^s)
            _cache[key] = (-1) ** s * _poch(-nu, 2 * s) / (math.factorial(s) * 2 ** s)
        return _cache[key]

    def v_coeff(s, _cache={}):
        key = (nu, s)
        if key not in _cache:
            _cache[key] = _poch(nu + 1, 2 * s) / (math.factorial(s) * 2 ** s)
        return _cache[key]

    U, dU, eU = _asym_sum(zeta, nu, -1, u_coeff)
    V, dV, eV = _asym_sum(zeta, -nu - 1, 1, v_coeff)
    pref = math.sqrt(2 * math.pi) / math.gamma(-nu)
    # D_nu(-zeta) = pi/Gamma(-nu) V(-nu-1/2, zeta) since sin(pi a) = 0 for integer a
    value = U + idx.branch * pref * V
    deriv = dU + idx.branch * pref * dV
    # the V expansion omits a recessive piece of the size of U (Stokes phenomenon)
    rel_err = (eU + np.abs(U) + abs(pref) * eV) / np.maximum(np.abs(value), 1e-300)
    return value, deriv, rel_err


def _poch(x, k):
    out = 1.0
    for j in range(k):
        out *= x + j
    return out


def eval_D(idx: DIndex, zeta, escalate=True) -> DValue:
    """Value and zeta-derivative of Dn^(branch) at (complex) zeta."""
    shape = np.shape(zeta)
    z = np.asarray(zeta, dtype=complex).ravel()
    if np.any(np.abs(z.real ** 2 - z.imag ** 2) / 4 > OVERFLOW_EXPONENT):
        raise OverflowGuardError("exp(zeta^2/4) is not representable for some zeta")
    value = np.empty_like(z)
    deriv = np.empty_like(z)
    cond = np.ones(z.shape)
    # parity: evaluate on Re zeta >= 0 and map back
    sgn = np.where(z.real < 0, -1.0, 1.0)
    zr = z * sgn
    use_asym = (np.abs(zr) >= ASYMPTOTIC_RADIUS) & (np.abs(np.angle(zr)) <= math.pi / 8)
    if use_asym.any():
        v, d, err = _asymptotic(idx, zr[use_asym])
        value[use_asym], deriv[use_asym] = v, d
        # not accurate enough yet (large |n| at moderate |zeta|): hand back to the series
        where = np.flatnonzero(use_asym)
        use_asym[where[err > ASYMPTOTIC_TOL]] = False
    rest = ~use_asym
    if rest.any():
        v, d, c = _series(idx, zr[rest])
        value[rest], deriv[rest], cond[rest] = v, d, c
        if escalate:
            bad = np.flatnonzero(rest & (cond > ESCALATE_CONDITION))
            for q in bad:
                dps = 20 + int(math.log10(cond[q]) + 1)
                value[q], deriv[q] = _series_mp(idx, complex(zr[q]), dps)
                cond[q] = 1.0
    b = idx.branch
    # f(z) = b f(-z), f'(z) = -b f'(-z)
    neg = sgn < 0
    value[neg] *= b
    deriv[neg] *= -b
    if shape == ():
        return DValue(value[0], deriv[0], cond[0])
    return DValue(value.reshape(shape), deriv.reshape(shape), cond.reshape(shape))


def second_derivative(idx: DIndex, zeta, value):
    return (np.asarray(zeta) ** 2 / 4 - idx.n - 1) * value


def ladder(idx: DIndex, direction: str, zeta) -> DValue:
    """D_{n+1} (``raise``) or D_{n-1} (``lower``) built from Dn and Dn' alone."""
    z = np.asarray(zeta, dtype=complex)
    v = eval_D(idx, z)
    f, fp = v.value, v.derivative
    fpp = second_derivative(idx, z, f)
    if direction == "raise":
        return DValue(z * f / 2 - fp, f / 2 + z * fp / 2 - fpp, v.condition)
    if direction == "lower":
        c = idx.n + 0.5
        return DValue((z * f / 2 + fp) / c, (f / 2 + z * fp / 2 + fpp) / c, v.condition)
    raise ValueError("direction must be 'raise' or 'lower'")


def connection(idx: DIndex, zeta):
    """Right-hand side of Dn(i zeta) = i Gamma(n+3/2)/sqrt(2 pi) [i^{n-1/2} D_{-n-2}(-zeta) - i^{1/2-n} D_{-n-2}(zeta)]."""
    z = np.asarray(zeta, dtype=complex)
    n = idx.n
    pre = 1j * math.gamma(n + 1.5) / math.sqrt(2 * math.pi)
    mirror = DIndex(-n - 2, idx.branch)
    left = eval_D(mirror, -z).value
    right = eval_D(mirror, z).value
    p1 = cmath.exp((n - 0.5) * cmath.log(1j))
    p2 = cmath.exp((0.5 - n) * cmath.log(1j))
    return pre * (p1 * left - p2 * right)


@dataclass(frozen=True)
class TaylorSeries:
    coefficients: np.ndarray
    n: int
    branch: int

    def __call__(self, zeta):
        return np.polynomial.polynomial.polyval(np.asarray(zeta), self.coefficients)


def taylor(idx: DIndex, K: int) -> TaylorSeries:
    """Maclaurin coefficients c_0..c_K of Dn from (k+1)(k+2) c_{k+2} = c_{k-2}/4 - (n+1) c_k."""
    seed = eval_D(idx, 0.0)
    c = np.zeros(K + 1)
    c[0] = float(np.real(seed.value))
    if K >= 1:
        c[1] = float(np.real(seed.derivative))
    for k in range(0, K - 1):
        prev = c[k - 2] if k >= 2 else 0.0
        c[k + 2] = (prev / 4 - (idx.n + 1) * c[k]) / ((k + 1) * (k + 2))
    return TaylorSeries(c, idx.n, idx.branch)


def scaled_taylor(idx: DIndex, K: int, scale: float) -> np.ndarray:
    """t_j = sqrt(j!) c_j scale^j for j <= K, i.e. the z-series of Dn(scale z) in
    Bargmann-normalised form (sum |t_j|^2 is the squared norm).

    Carried by its own recursion so that no factorial is ever formed.
    """
    seed = eval_D(idx, 0.0)
    t = np.zeros(K + 1)
    t[0] = float(np.real(seed.value))
    if K >= 1:
        t[1] = float(np.real(seed.derivative)) * scale
    s2 = scale * scale
    s4 = s2 * s2
    for k in range(0, K - 1):
        acc = -(idx.n + 1) * s2 * math.sqrt((k + 1) * (k + 2)) * t[k]
        if k >= 2:
            acc += 0.25 * s4 * math.sqrt((k - 1) * k * (k + 1) * (k + 2)) * t[k - 2]
        t[k + 2] = acc / ((k + 1) * (k + 2))
    return t


def bessel_i(nu: float, x):
    """Modified Bessel I_nu(x) for real x > 0 from its power series."""
    x = np.asarray(x, dtype=float)
    half = x / 2
    term = half ** nu / math.gamma(nu + 1)
    total = term.copy()
    for k in range(1, 400):
        term = term * half * half / (k * (k + nu))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def bessel_d(branch: int, z, kappa: float):
    """z^{3/2} [I_{+-1/4}(kappa z^2/2) - I_{-+3/4}(kappa z^2/2)] for real z > 0."""
    z = np.asarray(z, dtype=float)
    arg = kappa * z * z / 2
    if branch == 1:
        return z ** 1.5 * (bessel_i(0.25, arg) - bessel_i(-0.75, arg))
    return z ** 1.5 * (bessel_i(-0.25, arg) - bessel_i(0.75, arg))


@dataclass
class RatioCheck:
    ratio: complex
    deviation: float
    ratios: np.ndarray


def _ratio_check(num, den):
    keep = np.abs(den) > 1e-8 * np.abs(den).max()
    r = num[keep] / den[keep]
    mean = r.mean()
    return RatioCheck(mean, float(np.max(np.abs(r - mean)) / abs(mean)), r)


def bessel_crosscheck(branch: int, z, kappa: float, d_branch: int | None = None) -> RatioCheck:
    """Ratio of the Bessel-form d(z) to D0(sqrt(2 kappa) z); constant iff the forms agree.

    ``d_branch`` chooses the D0 branch independently, so a mismatch can be
    exercised on purpose.
    """
    z = np.asarray(z, dtype=float)
    d = bessel_d(branch, z, kappa)
    D0 = eval_D(DIndex(0, branch if d_branch is None else d_branch), np.sqrt(2 * kappa) * z).value
    return _ratio_check(d, D0)


def hyp1f1_crosscheck(branch: int, z, kappa: float) -> RatioCheck:
    """Ratio of the confluent-hypergeometric form of d(z) to D0(sqrt(2 kappa) z).

    The 1F1 values come from mpmath so that the check does not share code
    with eval_D.
    """
    z = np.asarray(z, dtype=float)
    vals = []
    for zz in z:
        x = kappa * zz * zz
        if branch == 1:
            vals.append(float(mpmath.exp(-x / 2) * mpmath.hyp1f1(-0.25, 0.5, x)))
        else:
            vals.append(float(zz * mpmath.exp(-x / 2) * mpmath.hyp1f1(0.25, 1.5, x)))
    D0 = eval_D(DIndex(0, branch), np.sqrt(2 * kappa) * z).value
    return _ratio_check(np.array(vals), D0)


def growth_type(idx: DIndex, kappa: float, zmin=8.0, zmax=15.0, points=64) -> float:
    """Estimated type sigma of z -> Dn(sqrt(2 kappa) z) along the real axis.

    log|d(z)| is fitted by sigma z^2 + p log z + c; the free power p absorbs
    the algebraic prefactor that would otherwise bias a bare z^2 slope.
    """
    z = np.linspace(zmin, zmax, points)
    v = eval_D(idx, np.sqrt(2 * kappa) * z).value
    y = np.log(np.abs(v))
    A = np.column_stack([z * z, np.log(z), np.ones_like(z)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])
