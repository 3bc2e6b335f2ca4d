import math
from decimal import Decimal, getcontext

import pytest
from hypothesis import given, strategies as st

from efimov import (DomainError, MediumParams, ThreeBodyParams, UnitSystem, coherence_length,
                    density_to_kf, dimer_energy, fermi_energy, kf_to_density)

positive = st.floats(min_value=1e-8, max_value=1e8, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("inv_a, expected", [(1.0, -1.0), (0.5, -0.25), (3.0, -9.0)])
def test_dimer_energy(inv_a, expected):
    assert dimer_energy(inv_a) == expected


@pytest.mark.parametrize("inv_a", [-1.0, 0.0, -1e-12])
def test_no_dimer_for_nonpositive_a(inv_a):
    assert dimer_energy(inv_a) is None


@pytest.mark.parametrize("k_f, expected", [(0.0, 0.0), (1.0, 0.5), (2.0, 2.0)])
def test_fermi_energy(k_f, expected):
    assert fermi_energy(k_f) == expected


def test_density_of_unit_fermi_momentum():
    assert kf_to_density(1.0) == pytest.approx(1.0 / (6 * math.pi**2), rel=1e-15)
    assert kf_to_density(1.0) == pytest.approx(0.0168869, abs=1e-7)
    assert density_to_kf(0.0) == 0.0


def test_lab_density_to_fermi_momentum():
    # oracle: 40-digit decimal cube root of 6 pi^2 1e12
    getcontext().prec = 40
    pi = Decimal("3.141592653589793238462643383279502884197")
    target = 6 * pi * pi * Decimal(10) ** 12
    oracle = float(target ** (Decimal(1) / Decimal(3)))
    assert density_to_kf(1e12) == pytest.approx(oracle, rel=1e-14)
    assert density_to_kf(1e12) == pytest.approx(3.90e4, rel=2e-3)


def test_coherence_length_examples():
    assert coherence_length(1.0, 1.0 / (8 * math.pi)) == pytest.approx(1.0, rel=1e-15)
    assert coherence_length(1e14, 5e-7) == pytest.approx(2.82e-5, rel=2e-3)


def test_coherence_length_grows_as_a_b_vanishes():
    vals = [coherence_length(1.0, a) for a in (1e-1, 1e-3, 1e-6, 1e-12)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("n, a_b", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
def test_coherence_length_domain(n, a_b):
    with pytest.raises(DomainError):
        coherence_length(n, a_b)


@given(positive)
def test_density_round_trip(k_f):
    assert density_to_kf(kf_to_density(k_f)) == pytest.approx(k_f, rel=1e-12)


@given(positive)
def test_fermi_energy_density_consistency(n):
    # E_F = (6 pi^2 n)^(2/3) / 2
    assert fermi_energy(density_to_kf(n)) == pytest.approx(0.5 * (6 * math.pi**2 * n) ** (2 / 3),
                                                           rel=1e-12)


def test_params_validation():
    with pytest.raises(DomainError):
        ThreeBodyParams(cutoff=math.inf)
    with pytest.raises(DomainError):
        ThreeBodyParams(cutoff=-1.0)
    with pytest.raises(DomainError):
        ThreeBodyParams(cutoff=1.0, mass_ratio=0.0)
    p = ThreeBodyParams(cutoff=10.0).with_inv_a(0.3)
    assert (p.cutoff, p.inv_a) == (10.0, 0.3)


def test_medium_params():
    assert MediumParams.vacuum().is_vacuum
    assert MediumParams.fermi_sea(0.0).is_vacuum
    assert not MediumParams.fermi_sea(0.1).is_vacuum
    bec = MediumParams.bose_condensate(1.0, 1.0 / (8 * math.pi))
    assert bec.coherence_length == pytest.approx(1.0)
    with pytest.raises(DomainError):
        MediumParams.bose_condensate(1.0, 0.0)
    with pytest.raises(DomainError):
        MediumParams.fermi_sea(-1.0)
    with pytest.raises(DomainError):
        MediumParams.fermi_sea(0.5).coherence_length


def test_unit_system_scaling():
    u = UnitSystem(momentum_per_cm=2.0)
    assert u.momentum_to_lab(3.0) == 6.0
    assert u.density_to_lab(1.0) == 8.0
    # kinetic energy hbar^2 k^2 / m for k = 200 m^-1
    from scipy import constants
    assert u.energy_to_lab(1.0) == pytest.approx(constants.hbar**2 * 200.0**2 / u.mass_kg)
    with pytest.raises(DomainError):
        UnitSystem(momentum_unit="furlong")
