import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from efimov import (DomainError, SingularityError, ThreeBodyParams, build_kernel,
                    calibrate_kstar, efimov_factor, exchange_kernel, lambda_of_E,
                    pair_amplitude, scan_spectrum, solve_s0, threshold_point, trimer_energies)
from efimov.stm import continuum_threshold, count_at_threshold, kernel_eigenvalues

# zero-range universal products for the Efimov tower (independent literature values):
# a_- kappa* at the three-atom threshold and a_* kappa* at the atom-dimer threshold
A_MINUS_KAPPA = -1.50763
A_STAR_KAPPA = 0.0707645


@pytest.fixture(scope="module")
def unitary_states(small_params, small_mesh):
    return trimer_energies(small_params, small_mesh, n_max=6)


def test_pair_amplitude_examples():
    assert pair_amplitude(-1.0, 0.0) == 1.0
    assert pair_amplitude(-4.0, -1.0) == pytest.approx(1.0 / 3.0)
    with pytest.raises(SingularityError):
        pair_amplitude(-1.0, 1.0)
    with pytest.raises(DomainError):
        pair_amplitude(0.0, 0.0)


def test_pair_amplitude_pole_slope():
    # 1/tau -> 0 linearly at z = -1 with d(1/tau)/dz = -1/(2 sqrt(-z)) = -1/2
    h = 1e-6
    inv_tau = lambda z: -1.0 + math.sqrt(-z)
    assert (1.0 / pair_amplitude(-1.0 + h, 1.0) - 1.0 / pair_amplitude(-1.0 - h, 1.0)) / (2 * h) \
        == pytest.approx(-0.5, rel=1e-6)
    assert 1.0 / pair_amplitude(-1.0 - h, 1.0) == pytest.approx(inv_tau(-1.0 - h), rel=1e-9)


@pytest.mark.parametrize("p, q, E", [(1.0, 2.0, -1.0), (0.01, 5.0, -0.3), (7.0, 7.0, -1e-3)])
def test_exchange_kernel_against_angular_integral(p, q, E):
    oracle, _ = quad(lambda x: 0.5 / (p * p + q * q + p * q * x - E), -1.0, 1.0,
                     epsabs=0, epsrel=1e-13)
    assert exchange_kernel([p], [q], E)[0, 0] == pytest.approx(oracle, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(-1e3, -1e-6))
def test_exchange_kernel_symmetric_positive(p, q, E):
    g = exchange_kernel([p, q], [p, q], E)
    assert np.all(g > 0)
    assert g[0, 1] == pytest.approx(g[1, 0], rel=1e-14)


def test_kernel_symmetric_form_is_similar(small_params, small_mesh):
    km = build_kernel(-2.0, small_params, small_mesh)
    ev_general = np.sort(np.linalg.eigvals(km.entries).real)[::-1]
    assert np.allclose(km.eigenvalues()[:10], ev_general[:10], rtol=1e-9, atol=1e-12)
    assert km.metadata["mesh"] == small_mesh.mesh_id


def test_build_kernel_rejects_continuum(small_params, small_mesh):
    with pytest.raises(DomainError, match="three-atom"):
        build_kernel(0.0, small_params, small_mesh)
    with pytest.raises(DomainError, match="atom-dimer"):
        build_kernel(-0.5, small_params.with_inv_a(1.0), small_mesh)


def test_lambda_vanishes_deep_and_grows_toward_threshold(small_params, small_mesh):
    energies = [-1e12, -1e8, -1e4, -1.0, -1e-3]
    lams = [lambda_of_E(e, small_params, small_mesh) for e in energies]
    assert lams[0] < 1e-3
    assert all(b > a for a, b in zip(lams, lams[1:]))


def test_leading_eigenvalue_matches_dense(small_params, small_mesh):
    lam = lambda_of_E(-3.0, small_params, small_mesh)
    assert lam == pytest.approx(kernel_eigenvalues(-3.0, small_params, small_mesh)[0], rel=1e-10)


def test_levels_are_unit_eigenvalue_crossings(unitary_states, small_params, small_mesh):
    assert len(unitary_states) >= 3
    for s in unitary_states:
        assert s.energy < s.threshold == 0.0
        lam = lambda_of_E(s.energy, small_params, small_mesh, index=s.index)
        assert lam == pytest.approx(1.0, abs=1e-7)
    energies = [s.energy for s in unitary_states]
    assert energies == sorted(energies)
    assert count_at_threshold(small_params, small_mesh) == len(unitary_states)


def test_discrete_scaling_small_mesh(unitary_states):
    clean = [s for s in unitary_states if not s.cutoff_contaminated]
    assert len(clean) >= 2
    ratio = clean[0].energy / clean[1].energy
    assert ratio == pytest.approx(math.exp(2 * math.pi / solve_s0()), rel=0.02)
    # the deepest state feels the cutoff
    assert unitary_states[0].cutoff_contaminated


def test_states_below_atom_dimer_threshold(small_params, small_mesh):
    p = small_params.with_inv_a(1.0)
    states = trimer_energies(p, small_mesh, n_max=6)
    assert states and all(s.energy < -1.0 and s.threshold == -1.0 for s in states)
    assert continuum_threshold(-1.0) == 0.0 and continuum_threshold(2.0) == -4.0


def test_negative_a_removes_shallow_states(small_params, small_mesh, unitary_states):
    states = trimer_energies(small_params.with_inv_a(-5.0), small_mesh, n_max=6)
    assert 0 < len(states) < len(unitary_states)


def test_appearance_point_universal_product(unitary_states, small_params, small_mesh):
    n = 2
    kappa = math.sqrt(unitary_states[n].binding)
    x = threshold_point(n, small_params, small_mesh, -1.0, -0.05)
    assert x < 0
    assert (1.0 / x) * kappa == pytest.approx(A_MINUS_KAPPA, rel=5e-3)


def test_merge_point_universal_product(unitary_states, small_params, small_mesh):
    n = 2
    kappa = math.sqrt(unitary_states[n].binding)
    x = threshold_point(n, small_params, small_mesh, 2.0, 10.0)
    assert kappa / x == pytest.approx(A_STAR_KAPPA, rel=1e-2)


def test_scan_spectrum_endpoints_and_order(small_params, small_mesh):
    grid = [-1.0, -0.5, -0.1, 0.0, 2.0, 6.0]
    scan = scan_spectrum(grid, small_params, small_mesh, n_max=4)
    assert not scan.failures
    br = scan.branches[2]
    assert br.appearance is not None and -0.5 < br.appearance < -0.1
    assert br.merge is not None and 2.0 < br.merge < 6.0
    assert br.appearance_a == pytest.approx(1.0 / br.appearance)
    xs = [x for x, _ in br.points]
    assert xs == sorted(xs)
    again = scan_spectrum(grid, small_params, small_mesh, n_max=4)
    assert [b.points for b in again.branches] == [b.points for b in scan.branches]


def test_scan_spectrum_rejects_bad_grid(small_params, small_mesh):
    with pytest.raises(DomainError):
        scan_spectrum([0.0, -1.0], small_params, small_mesh)
    with pytest.raises(DomainError):
        scan_spectrum([], small_params, small_mesh)


def test_s0_solves_transcendental_equation():
    s0 = solve_s0()
    lhs = s0 * math.cosh(math.pi * s0 / 2)
    rhs = 8 / math.sqrt(3) * math.sinh(math.pi * s0 / 6)
    assert lhs == pytest.approx(rhs, rel=1e-13)
    # well-known value of the equal-mass bosonic exponent
    assert s0 == pytest.approx(1.00623782510, abs=1e-10)
    assert efimov_factor() == pytest.approx(22.6943825954, rel=1e-10)


def test_kstar_calibration_is_state_independent(unitary_states):
    clean = [s for s in unitary_states if not s.cutoff_contaminated]
    k1 = calibrate_kstar(clean)
    k2 = calibrate_kstar(clean[1:])
    assert k1 == pytest.approx(k2, rel=1e-2)
    assert calibrate_kstar([]) is None
