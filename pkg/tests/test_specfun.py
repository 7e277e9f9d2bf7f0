import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skly.specfun import (
    EllipticParams,
    InvalidParams,
    TruncationPolicy,
    elliptic_gamma,
    g_constant,
    nu_from_mu,
    parse_complex,
    r_delta,
    theta1,
    theta1_diagnostics,
    theta_variant,
)
from skly.specfun import _theta1_tau

from . import oracles
from .conftest import random_points

TAU08 = EllipticParams(0.8j, 0.21j)
MOD = EllipticParams.from_modular(1.0, 0.7)

reals = st.floats(-0.5, 0.5, allow_nan=False)
ims = st.floats(-0.25, 0.25, allow_nan=False)
zs = st.builds(complex, reals, ims)


def test_theta_zero_at_origin():
    assert abs(theta1(0, TAU08)) < 1e-15


def test_theta_odd():
    assert theta1(0.3, TAU08) == pytest.approx(-theta1(-0.3, TAU08), rel=1e-14)


def test_theta_matches_doubled_series_and_oracle():
    z = 0.3 + 0.1j
    direct = _theta1_tau(z, TAU08.tau, terms=64)
    assert abs(theta1(z, TAU08) - direct) < 1e-12 * abs(direct)
    assert abs(theta1(z, TAU08) - oracles.THETA1_03_01I_TAU08I) < 1e-12


def test_theta_diagnostics_tail_tiny():
    info = theta1_diagnostics(0.3, TAU08)
    assert info.terms >= 16
    assert info.tail_estimate < 1e-18


def test_theta_rejects_small_im_tau():
    with pytest.raises(InvalidParams):
        EllipticParams(1e-4j, 0.1j)


def test_theta2_vanishes_at_minus_half():
    assert abs(theta_variant(2, -0.5, TAU08)) < 1e-15


def test_theta4_is_shifted_theta3(rng):
    z = random_points(rng, 10)
    np.testing.assert_allclose(theta_variant(4, z, TAU08), theta_variant(3, z + 0.5, TAU08), rtol=1e-13)


def test_theta3_oracle():
    p = EllipticParams(1j, 0.2j)
    assert theta_variant(3, 0.2, p) == pytest.approx(oracles.THETA3_02_TAUI, rel=1e-13)


def test_g_constant_limit_and_oracle():
    assert abs(g_constant(EllipticParams(40j, 0.2j)) - 1) < 1e-15
    assert g_constant(TAU08) == pytest.approx(oracles.G_TAU08I, rel=1e-14)


def test_g_enters_duplication(rng):
    p = TAU08
    z = random_points(rng, 20)
    q, G, tau = p.q, g_constant(p), p.tau
    rhs = 1j * q ** 0.25 * G ** -3 * theta1(z, p) * theta1(z + 0.5, p) * theta1(z + tau / 2, p) \
        * theta1(z - 0.5 - tau / 2, p)
    np.testing.assert_allclose(theta1(2 * z, p), rhs, rtol=1e-12)


def test_gamma_at_zero_and_oracle():
    assert elliptic_gamma(0, MOD) == pytest.approx(1, abs=1e-15)
    assert elliptic_gamma(0.2 + 0.1j, MOD) == pytest.approx(oracles.GAMMA_02_01I_AP1_AM07, rel=1e-13)


@given(zs)
def test_gamma_reflection(z):
    assert elliptic_gamma(z, MOD) * elliptic_gamma(-z, MOD) == pytest.approx(1, rel=1e-12)


def test_gamma_modular_symmetry(rng):
    z = random_points(rng, 10, 0.1)
    swapped = EllipticParams.from_modular(0.7, 1.0)
    np.testing.assert_allclose(elliptic_gamma(z, MOD), elliptic_gamma(z, swapped), rtol=1e-13)


def test_gamma_requires_positive_real_parts():
    with pytest.raises(InvalidParams):
        elliptic_gamma(0.1, EllipticParams(0.9j, -0.2j))


def test_gamma_flags_exact_pole():
    # the factor 1 - q_+ q_- e^{2 i pi z} vanishes at z = -i a; z = +i a is a zero
    assert not np.isfinite(elliptic_gamma(-1j * MOD.a, MOD))
    assert abs(elliptic_gamma(1j * MOD.a, MOD)) < 1e-14


@pytest.mark.parametrize("delta", [1, -1])
@given(z=zs)
def test_r_even_and_periodic(delta, z):
    assert r_delta(delta, z, MOD) == pytest.approx(r_delta(delta, -z, MOD), rel=1e-13)
    assert r_delta(delta, z + 1, MOD) == pytest.approx(r_delta(delta, z, MOD), rel=1e-12)


def test_r_oracle():
    p = EllipticParams.from_modular(0.9, 0.5)
    assert r_delta(1, 0.3, p) == pytest.approx(oracles.RPLUS_03_AP09, rel=1e-14)


@pytest.mark.parametrize("tau", [0.5j, 0.9j, 1.7j, 0.2 + 1.1j])
def test_theta_quasi_periodicity(tau, rng):
    p = EllipticParams(tau, 0.2j)
    z = random_points(rng, 50)
    np.testing.assert_allclose(theta1(z + 1, p), -theta1(z, p), rtol=1e-10, atol=1e-13)
    np.testing.assert_allclose(theta1(z + tau, p), -np.exp(-2j * np.pi * z) / p.q * theta1(z, p),
                               rtol=1e-10, atol=1e-13)


@pytest.mark.parametrize("delta", [1, -1])
def test_gamma_difference_equation(delta, rng):
    z = random_points(rng, 30, 0.1)
    am = MOD.a_delta(-delta)
    lhs = elliptic_gamma(z + 0.5j * am, MOD) / elliptic_gamma(z - 0.5j * am, MOD)
    np.testing.assert_allclose(lhs, r_delta(delta, z, MOD), rtol=1e-12)


@pytest.mark.parametrize("delta", [1, -1])
def test_r_difference_and_duplication(delta, rng):
    z = random_points(rng, 30, 0.1)
    ad = MOD.a_delta(delta)
    R = lambda w: r_delta(delta, w, MOD)
    np.testing.assert_allclose(R(z + 0.5j * ad) / R(z - 0.5j * ad), -np.exp(-2j * np.pi * z), rtol=1e-12)
    rhs = R(z + 0.25j * ad) * R(z - 0.25j * ad) * R(z + 0.5 + 0.25j * ad) * R(z + 0.5 - 0.25j * ad)
    np.testing.assert_allclose(R(2 * z), rhs, rtol=1e-12)


def test_theta_r_bridge(rng):
    p = EllipticParams.from_modular(0.8, 0.6)
    z = random_points(rng, 30, 0.1)
    rhs = 1j * p.q ** 0.25 * g_constant(p) * np.exp(-1j * np.pi * z) * r_delta(1, z - p.tau / 2, p)
    np.testing.assert_allclose(theta1(z, p), rhs, rtol=1e-12)


@given(st.floats(-3, 3), st.floats(-math.pi, math.pi))
def test_nu_from_mu_round_trip(log_abs, arg):
    mu = math.exp(log_abs) * complex(math.cos(arg), math.sin(arg))
    nu = nu_from_mu(mu)
    assert 0 <= nu.real < 0.25
    assert np.exp(8j * np.pi * nu) == pytest.approx(mu, rel=1e-12)


@pytest.mark.parametrize("text, value", [("0.8i", 0.8j), ("1+2i", 1 + 2j), ("-0.5", -0.5),
                                         ("i", 1j), ("0.3-0.1j", 0.3 - 0.1j)])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_complex_rejects_garbage():
    with pytest.raises(ValueError):
        parse_complex("abc")


def test_modular_conventions():
    p = EllipticParams.from_modular(1.2, 0.6)
    assert p.tau == pytest.approx(1.2j)
    assert p.eta == pytest.approx(0.3j)
    assert p.a == pytest.approx(0.9)
    dual = p.modular_dual()
    assert dual.a_plus == pytest.approx(p.a_minus) and dual.a_minus == pytest.approx(p.a_plus)


def test_policy_invariants():
    with pytest.raises(ValueError):
        TruncationPolicy(series_terms=4)
