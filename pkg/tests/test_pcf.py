import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twophoton.pcf import (
    DIndex,
    OverflowGuardError,
    _asymptotic,
    _series_mp,
    bessel_crosscheck,
    connection,
    eval_D,
    growth_type,
    hyp1f1_crosscheck,
    ladder,
    scaled_taylor,
    seed_slope,
    seed_value,
    taylor,
)

BRANCHES = (1, -1)


def oracle(n, branch, zeta):
    """D_{n+1/2}(z) +- D_{n+1/2}(-z) from mpmath at 30 digits."""
    with mpmath.workdps(30):
        z = mpmath.mpc(zeta)
        v = mpmath.pcfd(n + 0.5, z) + branch * mpmath.pcfd(n + 0.5, -z)
        scale = abs(mpmath.pcfd(n + 0.5, z)) + abs(mpmath.pcfd(n + 0.5, -z))
    return complex(v), float(scale)


def complex_grid(radius=6.0, count=40, seed=7):
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(count))
    return r * np.exp(2j * np.pi * rng.random(count))


def test_branch_validation():
    with pytest.raises(ValueError):
        DIndex(0, 0)
    with pytest.raises(ValueError):
        DIndex(0.5, 1)


def test_values_at_origin():
    assert eval_D(DIndex(0, -1), 0.0).value == 0
    assert eval_D(DIndex(0, 1), 0.0).derivative == 0
    assert eval_D(DIndex(0, 1), 0.0).value == pytest.approx(2 * float(mpmath.pcfd(0.5, 0)), rel=1e-15)
    for n in range(-6, 7):
        assert seed_value(n + 0.5) == pytest.approx(float(mpmath.pcfd(n + 0.5, 0)), rel=1e-13, abs=1e-300)
        assert seed_slope(n + 0.5) == pytest.approx(float(mpmath.diff(lambda t: mpmath.pcfd(n + 0.5, t), 0)), rel=1e-12)


@pytest.mark.parametrize("n", [-10, -7, -3, -1, 0, 1, 2, 5, 10])
@pytest.mark.parametrize("branch", BRANCHES)
def test_against_mpmath(n, branch):
    idx = DIndex(n, branch)
    for radius, tol in ((8.0, 1e-12), (20.0, 1e-10)):
        zs = complex_grid(radius, 30, seed=n + 20)
        zs = zs[np.abs(zs.real ** 2 - zs.imag ** 2) / 4 < 690]
        got = eval_D(idx, zs).value
        for z, g in zip(zs, got):
            ref, scale = oracle(n, branch, z)
            assert abs(g - ref) <= tol * scale


def test_wronskian_constant():
    # W[D_nu(z), D_nu(-z)] = sqrt(2 pi)/Gamma(-nu), and W[f + g, f - g] = -2 W[f, g];
    # this pins the normalisation of the seeds
    z = np.linspace(-3, 3, 13)
    for n in range(-5, 6):
        e = eval_D(DIndex(n, 1), z)
        o = eval_D(DIndex(n, -1), z)
        w = e.value * o.derivative - e.derivative * o.value
        ref = -2 * math.sqrt(2 * math.pi) / math.gamma(-(n + 0.5))
        scale = np.abs(e.value * o.derivative) + np.abs(e.derivative * o.value)
        assert np.max(np.abs(w - ref) / scale) < 1e-13


def cauchy_second_derivative(idx, z, h=0.5, M=48):
    """f''(z) from eval_D samples on a circle of radius h (trapezoid rule on
    the Cauchy integral, error O(h^M) for an entire function)."""
    w = np.exp(2j * np.pi * np.arange(M) / M)
    pts = z[:, None] + h * w[None, :]
    f = eval_D(idx, pts.ravel()).value.reshape(pts.shape)
    return 2 * (f * w[None, :] ** -2).mean(axis=1) / h ** 2


@pytest.mark.parametrize("branch", BRANCHES)
def test_ode_residual_from_samples(branch):
    z = np.linspace(-6, 6, 25).astype(complex)
    for n in range(-8, 9):
        idx = DIndex(n, branch)
        f = eval_D(idx, z).value
        fpp = cauchy_second_derivative(idx, z)
        res = np.abs(fpp + (n + 1 - z ** 2 / 4) * f)
        # the |f| term covers turning points, the floor covers the zero of an odd branch
        scale = np.abs(fpp) + np.abs((n + 1 - z ** 2 / 4) * f) + np.abs(f)
        scale = np.maximum(scale, 1e-6 * scale.max())
        assert np.max(res / scale) < 1e-10


def test_parity():
    z = complex_grid(10.0, 40)
    for n in (-4, 0, 3):
        for b in BRANCHES:
            idx = DIndex(n, b)
            assert np.allclose(eval_D(idx, -z).value, b * eval_D(idx, z).value, rtol=0, atol=0)


def _rel(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def test_ladder_identities():
    z = complex_grid(6.0, 40, seed=3)
    for n in range(-10, 11):
        for b in BRANCHES:
            idx = DIndex(n, b)
            up = eval_D(idx.raised(), z)
            down = eval_D(idx.lowered(), z)
            r = ladder(idx, "raise", z)
            lo = ladder(idx, "lower", z)
            sc_up = np.abs(up.value).max()
            sc_dn = np.abs(down.value).max()
            assert np.max(np.abs(r.value - up.value)) < 1e-10 * sc_up
            assert np.max(np.abs(lo.value - down.value)) < 1e-10 * sc_dn
            assert np.max(np.abs(r.derivative - up.derivative)) < 1e-10 * np.abs(up.derivative).max()


def test_number_operator_and_raise_lower():
    # N = b+ b acts as (n + 1/2); b b+ acts as (n + 3/2)
    z = complex_grid(5.0, 20, seed=11)
    for n in (-5, -1, 0, 2, 6):
        idx = DIndex(n, 1)
        f = eval_D(idx, z)
        fpp = (z ** 2 / 4 - n - 1) * f.value
        bf = z * f.value / 2 + f.derivative
        bfp = f.value / 2 + z * f.derivative / 2 + fpp
        Nf = z * bf / 2 - bfp
        assert _rel(Nf, (n + 0.5) * f.value) < 1e-10
        up = eval_D(idx.raised(), z)
        bbf = z * up.value / 2 + up.derivative
        assert _rel(bbf, (n + 1.5) * f.value) < 1e-10


def test_three_term_recurrence():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(-10, 11))
        b = int(rng.choice(BRANCHES))
        z = complex(*(rng.uniform(-5, 5, 2)))
        idx = DIndex(n, b)
        lhs = z * eval_D(idx, z).value
        rhs = (n + 0.5) * eval_D(idx.lowered(), z).value + eval_D(idx.raised(), z).value
        scale = abs(z * eval_D(idx, z).value) + abs((n + 0.5) * eval_D(idx.lowered(), z).value) + 1e-300
        assert abs(lhs - rhs) < 1e-10 * scale


def test_lower_at_zero_matches_direct():
    z = np.linspace(-4, 4, 17)
    for b in BRANCHES:
        d0 = eval_D(DIndex(0, b), z)
        direct = eval_D(DIndex(-1, -b), z).value
        assert _rel(2 * (z * d0.value / 2 + d0.derivative), direct) < 1e-12 or np.max(np.abs(direct)) < 1e-300


def test_connection_formula():
    z = complex_grid(4.0, 40, seed=9)
    for n in range(-10, 11):
        idx = DIndex(n, 1)
        lhs = eval_D(idx, 1j * z).value
        rhs = connection(idx, z)
        scale = np.abs(lhs).max()
        assert np.max(np.abs(lhs - rhs)) < 1e-9 * scale
    assert eval_D(DIndex(0, -1), 0.0).value == 0
    assert abs(connection(DIndex(0, -1), 0.0)) < 1e-15


def test_connection_twice_prefactors():
    # D_n(i(i z)) = D_n(-z): compose the prefactors symbolically on a point
    n = 2
    z = 0.7 + 0.2j
    val = eval_D(DIndex(n, 1), -z).value
    step = connection(DIndex(n, 1), 1j * z)
    assert abs(step - val) < 1e-12 * abs(val)


@pytest.mark.parametrize("n", [-3, 0, 4])
def test_taylor(n):
    for b in BRANCHES:
        t = taylor(DIndex(n, b), 120)
        c = t.coefficients
        if b == -1:
            assert np.all(c[0::2] == 0)
        else:
            assert np.all(c[1::2] == 0)
            assert c[2] == pytest.approx(-(n + 1) * c[0] / 2, rel=1e-15)
        v1 = eval_D(DIndex(n, b), 1.0).value
        v2 = eval_D(DIndex(n, b), 2.0).value
        assert abs(t(1.0) - v1) < 1e-12 * max(abs(v1), 1e-300) + 1e-300
        assert abs(t(2.0) - v2) < 1e-11 * max(abs(v2), abs(c).max())


def test_taylor_entirety_proxy():
    idx = DIndex(1, 1)
    t = taylor(idx, 200)
    v = eval_D(idx, 10.0).value
    terms = np.abs(t.coefficients * 10.0 ** np.arange(201))
    assert abs(t(10.0) - v) < 1e-8 * terms.max()


def test_scaled_taylor_matches_plain():
    idx = DIndex(-2, 1)
    K, s = 40, 0.6
    plain = taylor(idx, K).coefficients
    ref = np.array([math.sqrt(math.factorial(j)) * plain[j] * s ** j for j in range(K + 1)])
    assert np.allclose(scaled_taylor(idx, K, s), ref, rtol=1e-12, atol=1e-300)


def _series_reference(idx, z):
    return np.array([_series_mp(idx, complex(q), 30)[0] for q in z])


@pytest.mark.parametrize("n", [-10, -8, -2, 0, 3, 8, 10])
def test_overlap_band_real_axis(n):
    z = np.linspace(10, 14, 9).astype(complex)
    for b in BRANCHES:
        idx = DIndex(n, b)
        va, _, _ = _asymptotic(idx, z)
        ref = _series_reference(idx, z)
        assert np.max(np.abs(va - ref) / np.abs(ref)) < 1e-8


@pytest.mark.parametrize("n", [-6, 0, 5, 10])
def test_overlap_band_off_axis(n):
    # off the axis the expansion is only as good as its own error bound; where
    # that bound is below 1e-8 the two methods must agree, and the bound is honest
    r = np.linspace(10, 14, 9)
    z = np.concatenate([r * np.exp(0.25j), r * np.exp(0.39j)])
    for b in BRANCHES:
        idx = DIndex(n, b)
        va, _, err = _asymptotic(idx, z)
        ref = _series_reference(idx, z)
        actual = np.abs(va - ref) / np.abs(ref)
        ok = err < 1e-8
        assert ok.sum() >= 8
        assert np.all(actual[ok] < 1e-8)
        assert np.all(actual <= 10 * err + 1e-14)
        # eval_D picks whichever is accurate
        assert np.max(np.abs(eval_D(idx, z).value - ref) / np.abs(ref)) < 1e-10


def test_overflow_guard():
    with pytest.raises(OverflowGuardError):
        eval_D(DIndex(0, 1), 60.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(-10, 10), st.sampled_from(BRANCHES), st.floats(-8, 8), st.floats(-8, 8))
def test_ladder_property(n, b, x, y):
    z = complex(x, y)
    idx = DIndex(n, b)
    up = eval_D(idx.raised(), z).value
    r = ladder(idx, "raise", z).value
    f = eval_D(idx, z)
    scale = abs(z * f.value / 2) + abs(f.derivative) + 1e-300
    assert abs(r - up) < 1e-10 * scale


@pytest.mark.parametrize("branch", BRANCHES)
def test_bessel_and_hyp1f1_forms(branch):
    z = np.linspace(0.5, 3, 26)
    assert bessel_crosscheck(branch, z, 0.5).deviation < 1e-9
    assert hyp1f1_crosscheck(branch, z, 0.5).deviation < 1e-9


def test_bessel_branch_mismatch_fails():
    z = np.linspace(0.5, 3, 26)
    assert bessel_crosscheck(1, z, 0.5, d_branch=-1).deviation > 1e-3


@pytest.mark.parametrize("kappa", [0.2, 0.5, 0.8])
def test_growth_type(kappa):
    sigma = growth_type(DIndex(0, 1), kappa)
    assert abs(sigma - kappa / 2) < 0.05 * kappa / 2
    assert sigma < 0.5
