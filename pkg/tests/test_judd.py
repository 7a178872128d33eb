from fractions import Fraction

import numpy as np
import pytest

from twophoton.fock import Family, find_crossings, scan_spectrum
from twophoton.judd import (
    GaussPoly,
    build_judd_states,
    closing_degree,
    conjugated_operator,
    find_judd_roots,
    judd_determinant,
    judd_matrix,
    judd_states,
)
from twophoton.model import ModelParams, Parity
from twophoton.verify import infer_parity, ode_residual, parity_deviation

# roots of the closure condition found by the sign scan, checked below by residuals
JUDD_MU1 = {4: [0.5], 5: [0.350781059], 6: [0.270650597, 0.687638625]}


@pytest.mark.parametrize("n", range(2, 9))
def test_closing_degree(n):
    assert closing_degree(n) == n - 2


def test_conjugated_operator_closes_exactly():
    # with 2a = -kappa the top two powers of the image vanish for any P of degree n - 2
    k, mu, n = Fraction(2, 5), Fraction(3), 6
    x = (k + 1 / k) / 2
    E = 2 * (1 / k - k) * (Fraction(n, 2) - 1) - k
    img = conjugated_operator([Fraction(1, 3), 0, Fraction(-2), 0, Fraction(5)], -k / 2, x, E, mu)
    assert img[-1] == 0 and img[-2] == 0 and img[-3] == 0 and img[-4] == 0


def test_matrix_is_square_and_parity_restricted():
    rows, ks = judd_matrix(7, 0.4, 1.0)
    assert ks == [1, 3, 5]
    assert len(rows) == 3 and all(len(r) == 3 for r in rows)


def test_exact_and_float_determinants_agree():
    d_exact = judd_determinant(6, Fraction(3, 10), Fraction(1), scaled=False)
    d_float = judd_determinant(6, 0.3, 1.0, scaled=False)
    assert float(d_exact) == pytest.approx(d_float, rel=1e-10)


@pytest.mark.parametrize("n", [2, 3])
def test_lowest_members_have_no_roots(n):
    for mu in (0.5, 1.0, 3.0, 10.0):
        assert find_judd_roots(n, mu) == []
        assert judd_states(n, mu) == []


@pytest.mark.parametrize("n,kappas", sorted(JUDD_MU1.items()))
def test_roots_mu1(n, kappas):
    got = [r.kappa for r in find_judd_roots(n, 1.0)]
    assert np.allclose(got, kappas, atol=1e-8)


def test_input_validation():
    with pytest.raises(ValueError):
        find_judd_roots(1, 1.0)
    with pytest.raises(ValueError):
        find_judd_roots(4, 0.0)


@pytest.mark.parametrize("n,mu", [(4, 1.0), (5, 1.0), (6, 1.0), (4, 3.0), (5, 3.0), (7, 2.0), (8, 5.0)])
def test_states_solve_and_have_parity(n, mu):
    roots = find_judd_roots(n, mu)
    for r in roots:
        m = ModelParams(r.kappa, mu)
        states = build_judd_states(n, m)
        assert len(states) == 2
        parities = {st.parity for st in states}
        expected = {Parity.PLUS_ONE, Parity.MINUS_ONE} if n % 2 == 0 else {Parity.PLUS_I, Parity.MINUS_I}
        assert parities == expected
        for st in states:
            r4, rs = ode_residual(st, z=np.linspace(-2, 2, 41))
            assert r4.max_residual < 1e-9 and rs.max_residual < 1e-9
            assert parity_deviation(st, st.parity) < 1e-9
            assert infer_parity(st)[0] is st.parity


def test_gauss_poly_scaled_taylor():
    import math

    g = GaussPoly([(-0.3, [1.0, 0.0, 2.0])])
    K = 30
    t = g.scaled_taylor(K)
    # plain Maclaurin coefficients of exp(-0.3 z^2)(1 + 2 z^2)
    e = [(-0.3) ** (j // 2) / math.factorial(j // 2) if j % 2 == 0 else 0.0 for j in range(K + 1)]
    c = [e[j] + (2 * e[j - 2] if j >= 2 else 0) for j in range(K + 1)]
    ref = [math.sqrt(math.factorial(j)) * c[j] for j in range(K + 1)]
    assert np.allclose(t.real, ref, rtol=1e-12, atol=1e-15)


def test_roots_coincide_with_spectrum_crossings():
    t = scan_spectrum(1.0, np.linspace(0.45, 0.55, 41), k=8)
    recs = [r for r in find_crossings(t) if r.family is Family.JUDDIAN and r.index == 4]
    assert len(recs) == 1
    assert abs(recs[0].kappa_star - 0.5) < 1e-6
    assert set(recs[0].parity_pair) == {Parity.PLUS_ONE, Parity.MINUS_ONE}
