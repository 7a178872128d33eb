import math
import warnings

import pytest
from hypothesis import given, strategies as st

from twophoton.model import (
    ConditioningWarning,
    ModelParams,
    Parity,
    PhysicalParams,
    SECTOR_ORDER,
    chi_from_energy,
    energy_from_chi,
    kappa_from_x,
    nearest_quarter,
    parity_initial_conditions,
    to_model_params,
    x_from_kappa,
)


def test_kappa_from_x_known_value():
    # x = 3/sqrt(8) is attained at kappa = 1/sqrt(2)
    assert kappa_from_x(3 / math.sqrt(8)) == pytest.approx(1 / math.sqrt(2), rel=1e-15)


@given(st.floats(min_value=1e-6, max_value=0.999))
def test_kappa_x_round_trip(kappa):
    assert kappa_from_x(x_from_kappa(kappa)) == pytest.approx(kappa, rel=1e-9)


@given(st.floats(min_value=0.01, max_value=0.99), st.floats(min_value=-5, max_value=20))
def test_energy_chi_inverse(kappa, chi):
    m = ModelParams(kappa, 1.0)
    assert chi_from_energy(energy_from_chi(chi, m), m) == pytest.approx(chi, rel=1e-9, abs=1e-9)


def test_transcendental_energy_l1():
    m = ModelParams(3 - 2 * math.sqrt(2), 3.0)
    assert m.energy(1.25) == pytest.approx(4 * math.sqrt(2) - 3, rel=1e-14)


def test_rejects_out_of_range():
    with pytest.raises(ValueError):
        kappa_from_x(1.0)
    with pytest.raises(ValueError):
        ModelParams(1.0, 1.0)
    with pytest.raises(ValueError):
        ModelParams(0.5, -1.0)
    with pytest.raises(ValueError):
        PhysicalParams(1.0, 1.0, 0.0)


def test_near_boundary_warns():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        k = kappa_from_x(1 + 1e-9)
    assert any(issubclass(x.category, ConditioningWarning) for x in w)
    assert 0 < k < 1


def test_physical_to_model():
    m = to_model_params(PhysicalParams(omega=1.0, omega0=1.0, g=0.1))
    assert m.x == pytest.approx(2.5, rel=1e-14)
    assert m.mu == pytest.approx(2.5)


def test_parity_algebra():
    assert Parity.PLUS_I * Parity.PLUS_I is Parity.MINUS_ONE
    assert Parity.PLUS_I ** 4 is Parity.PLUS_ONE
    assert Parity.MINUS_I.conjugate is Parity.PLUS_I
    assert [p.label for p in SECTOR_ORDER] == ["+1", "-1", "+i", "-i"]
    assert all(Parity.from_label(p.label) is p for p in Parity)
    assert Parity.PLUS_ONE.is_even and not Parity.MINUS_I.is_even
    with pytest.raises(ValueError):
        Parity.from_value(0.5)


def test_parity_initial_conditions():
    psi0, dpsi0 = parity_initial_conditions(Parity.MINUS_ONE)
    assert psi0 == (1, -1) and dpsi0 == (0, 0)
    psi0, dpsi0 = parity_initial_conditions(Parity.PLUS_I)
    assert psi0 == (0, 0) and dpsi0 == (1, 1)


def test_nearest_quarter():
    assert nearest_quarter(1.2500001) == (5, pytest.approx(1e-7))
