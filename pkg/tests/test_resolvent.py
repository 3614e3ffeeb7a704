import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from mollowqed import ConvergenceError, make_params
from mollowqed.dynamics import expm, mollow_generator
from mollowqed.resolvent import (LevelShifts, PoleError, determinant, evolution_elements,
                                 extract_generator, level_energies, poles, resolvent_matrix,
                                 transfer)


def P(delta=0.0, rabi=1.0, gamma=1.0, phase=0.0):
    return make_params(1000.0, 1000.0 + delta, gamma, rabi * np.exp(1j * phase))


params_st = st.builds(P, st.floats(-5, 5), st.floats(0.1, 50.0), st.floats(0.1, 3.0),
                      st.floats(0, 2 * math.pi))


def test_decoupled_resolvent():
    p = P(2.0, 0.0)
    e_a, e_b = level_energies(p)
    z = 0.5 * (e_a + e_b) + 0.1
    np.testing.assert_allclose(resolvent_matrix(z, p), np.diag([1 / (z - e_a), 1 / (z - e_b)]),
                               rtol=1e-15)


def test_resolvent_conjugate_partner():
    p = P(1.0, 3.0, phase=0.8)
    q = make_params(p.omega0, p.omega_l, p.gamma, np.conj(p.rabi))
    z = 0.3 + 0.2j
    assert resolvent_matrix(z, p)[0, 1] == pytest.approx(resolvent_matrix(z, q)[1, 0], rel=1e-15)


def test_resolvent_is_inverse():
    p = P(1.5, 2.0, phase=0.3)
    z = 0.4 - 0.7j
    h = oracles.effective_hamiltonian(p, 0.1j, -0.5j)
    g = resolvent_matrix(z, p, 0.1j, -0.5j)
    np.testing.assert_allclose(g @ (z * np.eye(2) - h), np.eye(2), atol=1e-14)


def test_pole_raises():
    p = P(0.0, 2.0)
    pp = poles(p, LevelShifts())
    with pytest.raises(PoleError) as err:
        resolvent_matrix(pp.z_plus, p)
    assert abs(err.value.det) < 1e-12


def test_residue_limit():
    p = P(1.0, 3.0, phase=0.5)
    sh = LevelShifts.mollow(p.gamma)
    pp = poles(p, sh)
    lam, vec = np.linalg.eig(oracles.effective_hamiltonian(p, sh.r_a0, sh.r_b0))
    k = int(np.argmin(np.abs(lam - pp.z_plus)))
    proj = np.outer(vec[:, k], np.linalg.inv(vec)[k])
    for theta in np.linspace(0, 2 * np.pi, 4, endpoint=False):
        z = pp.z_plus + 1e-6 * np.exp(1j * theta)
        np.testing.assert_allclose((z - pp.z_plus) * resolvent_matrix(z, p, sh.r_a0, sh.r_b0),
                                   proj, atol=1e-5)


def test_determinant_zeros():
    p = P(2.0, 0.0)
    for e in level_energies(p):
        assert determinant(e, p) == 0
    q = P(0.0, 4.0)
    z0 = 0.5 * sum(level_energies(q))
    for s in (1, -1):
        assert abs(determinant(z0 + s * 2.0, q)) < 1e-15


def test_pole_examples():
    pp = poles(P(0.0, 4.0), LevelShifts())
    assert (pp.z_plus - pp.z0, pp.z_minus - pp.z0) == (2.0, -2.0)
    assert poles(P(3.0, 0.0), LevelShifts()).splitting == pytest.approx(3.0, rel=1e-15)
    pp = poles(P(1.0, 2.0), LevelShifts.mollow(1.0))
    assert pp.z_plus.imag + pp.z_minus.imag == pytest.approx(-0.5, rel=1e-15)


def test_large_shift_warning():
    with pytest.warns(RuntimeWarning):
        poles(P(), LevelShifts.constant(0, -200j))


@given(params_st)
def test_pole_sum_rule(p):
    pp = poles(p, LevelShifts.mollow(p.gamma))
    assert abs(pp.z_plus.imag + pp.z_minus.imag + 0.5 * p.gamma) <= 1e-12 * p.scale


def test_elements_at_zero():
    el = evolution_elements(P(1.0, 3.0, phase=1.0), LevelShifts.mollow(1.0), 0.0)
    assert (el.u_a, el.u_b, el.u_ab, el.u_ba) == (1, 1, 0, 0)


def test_rabi_flop_elements():
    p = P(0.0, 3.0, 0.0)
    t = np.linspace(0, 5, 51)
    el = evolution_elements(p, LevelShifts(), t)
    np.testing.assert_allclose(np.abs(el.u_ab) ** 2, np.sin(1.5 * t) ** 2, atol=1e-14)
    for tk in (0.7, 2.9):
        ref = oracles.contour_evolution(p, tk)
        assert np.abs(evolution_elements(p, LevelShifts(), tk).as_matrix() - ref).max() < 1e-10


@settings(deadline=None, max_examples=40)
@given(params_st, st.floats(0.0, 5.0))
def test_elements_equal_heff_exponential(p, t):
    sh = LevelShifts.mollow(p.gamma)
    got = evolution_elements(p, sh, t).as_matrix()
    np.testing.assert_allclose(got, oracles.heff_evolution(p, t, sh.r_a0, sh.r_b0), atol=1e-10)


@pytest.mark.parametrize("offset", [0.0, 1e-9, 1e-6, 1e-3])
def test_exceptional_point_continuity(offset):
    p = P(0.0, 0.5 + offset, 1.0)
    sh = LevelShifts.mollow(1.0)
    for t in (0.5, 3.0, 10.0):
        got = evolution_elements(p, sh, t).as_matrix()
        assert np.all(np.isfinite(got))
        np.testing.assert_allclose(got, oracles.heff_evolution(p, t, 0, -0.5j), atol=1e-9)


def test_excited_amplitude_envelope():
    p = P(0.0, 10.0, 1.0)
    t = np.linspace(0, 8, 4001)
    ub2 = np.abs(evolution_elements(p, LevelShifts.mollow(1.0), t).u_b) ** 2
    assert np.all(ub2 <= np.exp(-0.5 * t) * (1 + 1e-2))
    # peaks of the oscillation stay above the full-rate envelope
    period = 2 * np.pi / 10.0
    for t0 in np.arange(0, 7, period):
        window = (t >= t0) & (t < t0 + period)
        assert ub2[window].max() >= np.exp(-t[window][-1])


def test_transfer_identity_and_small_t():
    p = P(1.0, 3.0, 1.0, phase=0.4)
    sh = LevelShifts.mollow(1.0)
    tm = transfer(p, sh, 0.0)
    np.testing.assert_allclose(tm.u, np.eye(3), atol=0)
    np.testing.assert_allclose(tm.v, 0, atol=0)
    eps = 1e-6
    assert transfer(p, sh, eps).u[0, 0].real - 1 == pytest.approx(-eps, rel=1e-4)


def test_transfer_decoupled_structure():
    p = P(1.5, 0.0, 0.8)
    t = 1.3
    tm = transfer(p, LevelShifts.mollow(0.8), t)
    lam = (-1j * 1.5 - 0.4) * t
    np.testing.assert_allclose(tm.u, np.diag([np.exp(-0.8 * t), np.exp(lam), np.exp(np.conj(lam))]),
                               atol=1e-15)
    np.testing.assert_allclose(tm.v, 0, atol=1e-15)


def test_transfer_is_exponential_without_decay():
    p = P(1.0, 3.0, 0.0, phase=0.7)
    gen = extract_generator(p, LevelShifts())
    aug = np.zeros((4, 4), dtype=complex)
    aug[:3, :3], aug[:3, 3] = gen.m, gen.b
    for t in (0.5, 2.0, 5.0):
        tm = transfer(p, LevelShifts(), t)
        ex = expm(aug, t)
        np.testing.assert_allclose(tm.u, ex[:3, :3], atol=1e-9)
        np.testing.assert_allclose(tm.v, ex[:3, 3], atol=1e-9)


def test_transfer_agrees_with_exponential_to_first_order():
    # with damping the map is only first-order generated: errors scale as t^2
    p = P(1.0, 3.0, 1.0)
    gen = mollow_generator(p)
    dev = []
    for t in (1e-2, 5e-3):
        dev.append(np.abs(transfer(p, LevelShifts.mollow(1.0), t).u - expm(gen.m, t)).max())
    assert dev[0] / dev[1] == pytest.approx(4.0, rel=0.05)


def test_extract_decoupled():
    p = P(2.0, 0.0, 1.0)
    g = extract_generator(p, LevelShifts.mollow(1.0))
    np.testing.assert_allclose(g.m, np.diag([-1.0, -2j - 0.5, 2j - 0.5]), atol=1e-9)
    np.testing.assert_allclose(g.b, 0, atol=1e-9)


def test_extract_unitary_case():
    g = extract_generator(P(1.0, 4.0, 0.0), LevelShifts())
    assert np.abs(g.eigenvalues().real).max() < 1e-8


@settings(deadline=None, max_examples=30)
@given(params_st)
def test_extract_matches_mollow(p):
    g = extract_generator(p, LevelShifts.mollow(p.gamma))
    assert g.max_abs_diff(mollow_generator(p)) <= 1e-8 * p.scale


def test_extract_rejects_pole_dependent_shifts():
    p = P(1.0, 3.0)
    sh = LevelShifts(0, 0, 0, -0.5j, -0.51j, -0.49j)
    assert not sh.is_constant()
    with pytest.raises(ConvergenceError):
        extract_generator(p, sh)
