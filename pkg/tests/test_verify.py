import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skly import adops as ad
from skly.checks import random_h, random_l
from skly.specfun import EllipticParams, jacobi_structure_constants, kernel_function, theta1
from skly.verify import appendix as B
from skly.verify import kernels as K
from skly.verify import sklyanin as S
from skly.verify.report import (
    ConstraintViolated,
    DegenerateEta,
    PoleCollision,
    VerificationReport,
    combine,
    relative_residual,
)

from .conftest import random_points

MOD = EllipticParams.from_modular(0.9 + 0.1j, 0.7 - 0.05j, 0.06 + 0.02j)


# ---------------------------------------------------------------------------
# report plumbing

def test_report_verdicts(params):
    ok = VerificationReport("x", {}, 1e-9, 1e-8)
    bad = VerificationReport("y", {}, 1e-7, 1e-8)
    big = VerificationReport("z", {}, 2.0, 1e-3, comparison="gt")
    assert ok.passed and not bad.passed and big.passed
    assert not VerificationReport("n", {}, float("nan"), 1.0).passed
    merged = combine("m", [ok, big], params)
    assert merged.passed
    assert not combine("m", [ok, bad], params).passed


def test_relative_residual_floor():
    assert relative_residual(1e-3, 0.0) == pytest.approx(1e-3 / 1.001)
    assert relative_residual(2.0, 2.0) == 0.0


# ---------------------------------------------------------------------------
# Sklyanin relations

def test_relations_reference_point(params):
    rep = S.check_sklyanin_relations(params, 9, seed=0)
    assert rep.passed and rep.residual < 1e-7


def test_relations_scale_invariant(params):
    rep = S.check_sklyanin_relations(params, 9, seed=0, scale=2.0)
    assert rep.passed


def test_relations_fail_for_wrong_structure_constant(params):
    D = [ad.sklyanin_D(t, params) for t in range(4)]
    J = jacobi_structure_constants(params.eta, params)
    z = ad.sample_points(np.random.default_rng(0), 9, params, ad.pole_candidates(params, 3))
    lhs = ad.commutator(D[0], D[1])
    rhs = 1.1j * J["23"] * ad.anticommutator(D[2], D[3])
    assert not ad.coefficients_equal(lhs, rhs, z, tol=1e-7).passed


@given(st.floats(-0.5, 0.5), st.floats(0.05, 0.4))
def test_structure_constants_elliptic(re, im):
    p = EllipticParams(0.9j, 0.21j)
    eta = complex(re, im)
    J = jacobi_structure_constants(eta, p)
    for shifted in (eta + 1, eta + p.tau):
        Js = jacobi_structure_constants(shifted, p)
        for key in J:
            assert Js[key] == pytest.approx(J[key], rel=1e-9, abs=1e-12)


def test_degenerate_eta_rejected():
    with pytest.raises(DegenerateEta):
        S.check_sklyanin_relations(EllipticParams(0.9j, 0.5 + 0.001j), 9)
    with pytest.raises(DegenerateEta):
        S.require_generic_eta(0.3j + 1e-3, 0.9j)


# ---------------------------------------------------------------------------
# Sklyanin-type checker

def test_twofold_product_is_sklyanin_type(params, rng):
    A = S.product_operator([S.random_v1(params, rng) for _ in range(2)], params.eta)
    rep = S.check_sklyanin_type(A, 2, params, tol=1e-7)
    assert rep.passed, rep.violations


def test_constant_operator_is_sklyanin_type(params):
    rep = S.check_sklyanin_type(ad.identity(params.eta), 1, params)
    assert rep.passed and rep.residual < 1e-12


def test_perturbation_gives_localized_violation(params, rng):
    f = S.random_v1(params, rng)
    A = ad.from_theta_ratio(f)
    bump = lambda z: f(z) + 0.01 / theta1(2 * z, params)
    bad = ad.DifferenceOperator(A.eta, {1: bump, -1: A.coeffs[-1]}, A.mu_tag)
    assert S.check_sklyanin_type(A, 1, params).passed
    rep = S.check_sklyanin_type(bad, 1, params)
    assert not rep.passed
    v = rep.violations
    assert v, "expected residue-relation violations"
    # only the pair relations at the poles of 1/theta(2z), i.e. l = 0, are broken
    assert all(key[0] == "pair" and key[3] == 0 for key in v)
    assert {key[2] for key in v} == {0, 1, 2, 3}


def test_double_pole_detected(params):
    f = lambda z: 1 / theta1(2 * z, params) ** 2
    A = ad.DifferenceOperator(params.eta, {0: lambda z: f(z) + f(-z)})
    rep = S.check_sklyanin_type(A, 1, params)
    assert any(key[0] == "double-pole" for key in rep.violations)


def test_pole_collision(params):
    p = params.with_(eta=params.tau / 3 + 1e-4)
    A = S.product_operator([S.random_v1(p, np.random.default_rng(0)) for _ in range(2)], p.eta)
    with pytest.raises(PoleCollision):
        S.check_sklyanin_type(A, 2, p)


def test_support_exceeding_order(params):
    A = S.product_operator([S.random_v1(params, np.random.default_rng(0)) for _ in range(2)], params.eta)
    with pytest.raises(ValueError):
        S.check_sklyanin_type(A, 1, params)


@pytest.mark.parametrize("delta", [1, -1])
def test_van_diejen_type_random(delta, rng):
    rep = K.check_van_diejen_type(random_h(MOD, rng), delta, MOD, MOD.mu)
    assert rep.passed, rep.violations
    assert max(v for k, v in rep.extra.items() if k[0] == "c0res") < 1e-6
    assert max(v for k, v in rep.extra.items() if k[0] == "c2/c0") < 1e-6


def test_van_diejen_type_wrong_mu_fails(rng):
    rep = K.check_van_diejen_type(random_h(MOD, rng), 1, MOD, -MOD.mu)
    assert not rep.passed


def test_van_diejen_type_special_couplings(rng):
    h = list(0.3 * rng.normal(size=4)) + [-0.5j * MOD.a_plus, -0.5j * MOD.a_plus + 0.5, 0, 0.5]
    rep = K.check_van_diejen_type(h, 1, MOD)
    assert rep.passed, rep.violations
    shift0 = [abs(v) for (j, t, ell), v in rep.residues.items() if j == 0]
    assert max(shift0) < 1e-12


@pytest.mark.parametrize("delta", [1, -1])
def test_sum_of_van_diejen_operators(delta, rng):
    A1 = ad.van_diejen(ad.VanDiejenCouplings(random_h(MOD, rng), delta=delta), MOD, MOD.mu)
    A2 = ad.van_diejen(ad.VanDiejenCouplings(random_h(MOD, rng), delta=delta), MOD, MOD.mu)
    total = ad.reindex(A1 + 2.5 * A2, 2)
    rep = S.check_sklyanin_type(total, 2, MOD, 2, tau=1j * MOD.a_delta(delta), mu=MOD.mu)
    assert rep.passed, rep.violations


def test_hmu_enforced(rng):
    h = list(random_h(MOD, rng))
    h[0] += 0.1
    with pytest.raises(ConstraintViolated):
        K.check_van_diejen_type(h, 1, MOD, MOD.mu)


# ---------------------------------------------------------------------------
# eta dependence of products

@pytest.mark.parametrize("k, m, expected", [(1, 0, 0), (1, 1, 0), (2, 0, 1), (2, 1, -1), (2, 2, 1),
                                            (3, 0, 3), (3, 1, -1), (3, 2, -1), (3, 3, 3)])
def test_e_exponent(k, m, expected):
    assert S.e_exponent(k, m) == expected


@pytest.mark.parametrize("k, m", [(1, 0), (2, 1), (3, 1), (3, 0)])
def test_eta_quasiperiodicity(k, m, params):
    rep = S.check_eta_quasiperiodicity(k, m, params, seed=2)
    assert rep.passed and rep.residual < 1e-6


def test_h_holomorphy_single_eta(params):
    # tau = 0.9i would put 4 eta within 0.02 of tau, so use a wider lattice
    rep = S.check_H_holomorphy(2, 1, [0.23j], params.with_(tau=1.1j), seed=1, tol=1e-8)
    assert rep.passed


@pytest.mark.parametrize("m", [0, 2])
def test_h_holomorphy_grid(m, params):
    rep = S.check_H_holomorphy(3, m, S.eta_grid(params, 5, seed=4, k=3), params, seed=4)
    assert rep.passed


def test_constants_in_v2(params):
    rep = S.check_constants_in_V2(params, seed=5)
    assert rep.passed
    assert rep.extra["constant"] == pytest.approx(rep.extra["minus_k1k3"], rel=1e-8)


def test_invariant_spaces(params):
    assert S.check_invariant_spaces(params, seed=5).passed


def test_antiautomorphisms():
    assert S.check_antiautomorphisms(MOD, seed=1).passed


# ---------------------------------------------------------------------------
# kernel identities

def test_kernel_trivial_at_unit_multiplier(rng):
    l = list(0.3 * rng.normal(size=4) + 0j)
    l[-1] += -2j * MOD.a - sum(l)
    z = random_points(rng, 5, 0.1)
    y = random_points(rng, 5, 0.1)
    np.testing.assert_allclose(kernel_function(0, z, y, MOD), 1, atol=1e-12)
    f = ad.f_delta(1, l, MOD)
    lhs = f(z) + f(-z)
    for j in (1, 2):
        g = ad.f_delta(1, ad.phi_map(l, j), MOD)
        np.testing.assert_allclose(lhs, g(y) + g(-y), rtol=1e-10)
    assert K.check_kernel_identity_R(1, l, 0, MOD).passed


@pytest.mark.parametrize("delta", [1, -1])
def test_kernel_identity_generic(delta, rng):
    l = random_l(MOD, rng)
    gamma, _ = K.gamma_hat(l, MOD)
    rep = K.check_kernel_identity_R(delta, l, gamma, MOD, seed=3, n_samples=10)
    assert rep.passed and rep.residual < 1e-7


def test_kernel_constraint_enforced(rng):
    l = random_l(MOD, rng)
    with pytest.raises(ConstraintViolated):
        K.check_kernel_identity_R(1, l, 0.123, MOD)


@pytest.mark.parametrize("delta", [1, -1])
@pytest.mark.parametrize("j", [1, 2])
def test_kernel_corollary(delta, j, rng):
    rep = K.check_kernel_identity_corollary(delta, random_l(MOD, rng), j, MOD, seed=2)
    assert rep.passed and rep.residual < 1e-7


@pytest.mark.parametrize("delta", [1, -1])
@pytest.mark.parametrize("j", [1, 2])
def test_kernel_identity_van_diejen(delta, j, rng):
    rep = K.check_kernel_identity_D(delta, random_h(MOD, rng), j, MOD, MOD.mu, seed=2)
    assert rep.passed and rep.residual < 1e-6


@pytest.mark.parametrize("delta", [1, -1])
def test_e8_sum(delta, rng):
    assert K.check_e8_sum(delta, random_h(MOD, rng), MOD).residual < 1e-8


def test_gamma_hat_normalisation(rng):
    work, shown = K.gamma_hat(random_l(MOD, rng), MOD)
    assert 0 <= work.real < 1 and 0 <= shown.real < 0.5


# ---------------------------------------------------------------------------
# squares of generators

@pytest.mark.parametrize("delta", [1, -1])
def test_ar_square_is_van_diejen(delta, rng):
    rep = K.check_ar2_equals_vandiejen(random_l(MOD, rng), random_l(MOD, rng), delta, MOD, seed=1)
    assert rep.passed and rep.residual < 1e-7


def test_ar_square_special_couplings():
    p = MOD.with_(nu=0)
    s = 0.25j * p.a_minus
    m = (-0.5j * p.a_plus - s, -0.5j * p.a_plus + 0.5 - s, -s, 0.5 - s)
    rep = K.check_ar2_equals_vandiejen(m, m, 1, p, seed=1)
    assert rep.passed
    # the van Diejen side has no additive part here, so the constant is the whole shift-0 term
    A2 = ad.compose(ad.a_r_delta(1, m, p), ad.a_r_delta(1, m, p))
    z = ad.sample_points(np.random.default_rng(1), 9, p, ad.pole_candidates(p, 3, 1j * p.a_plus, A2.eta),
                         tau=1j * p.a_plus)
    np.testing.assert_allclose(A2.coefficient(0, z), rep.extra["constant"], rtol=1e-7)


def test_ar_square_swapped_pair(rng):
    l, m = random_l(MOD, rng), random_l(MOD, rng)
    a = K.check_ar2_equals_vandiejen(l, m, 1, MOD, seed=1)
    b = K.check_ar2_equals_vandiejen(m, l, 1, MOD, seed=1)
    assert a.passed and b.passed
    # the two orderings have different shift coefficients ...
    A = ad.compose(ad.a_r_delta(1, l, MOD), ad.a_r_delta(1, m, MOD))
    Bop = ad.compose(ad.a_r_delta(1, m, MOD), ad.a_r_delta(1, l, MOD))
    z = np.array([0.13 + 0.05j, 0.31 - 0.02j])
    assert np.max(np.abs(A.coefficient(2, z) / Bop.coefficient(2, z) - 1)) > 1e-2
    # ... but the same additive constant
    assert a.extra["constant"] == pytest.approx(b.extra["constant"], rel=1e-10)


def test_shift_coefficient_permutation_invariant(rng):
    h = random_h(MOD, rng)
    perm = tuple(np.asarray(h)[rng.permutation(8)])
    z = random_points(rng, 6, 0.1) + 0.03
    np.testing.assert_allclose(ad.v_shift(h, 1, MOD)(z), ad.v_shift(perm, 1, MOD)(z), rtol=1e-12)


# ---------------------------------------------------------------------------
# tensors, Casimirs, appendix suite

def test_casimirs(params):
    rep = B.check_casimirs(params, seed=3)
    assert rep.passed and rep.residual < 1e-8


def test_casimir_display_form_differs(params, rng):
    # the printed K_2 uses z1 + z2 + 2 eta and z1 + z2, which is not in V (x) V
    th = lambda w: theta1(w, params)
    eta, nu = params.eta, params.nu
    K2 = lambda z1, z2: (2 * th(eta + z1 - z2) * th(eta - z1 + z2) * th(z1 + z2 + 2 * eta) * th(z1 + z2))
    A = ad.tensor_to_operator(K2, nu, params)
    z = ad.sample_points(rng, 9, params, ad.pole_candidates(params, 3))
    _, v2 = B.casimir_values(params)
    c0 = A.coefficient(0, z)
    assert np.max(np.abs(c0 - v2)) > 1e-3 * abs(v2) or np.max(np.abs(A.coefficient(2, z))) > 1e-3


def test_casimir_operator_route(params, rng):
    D = [ad.sklyanin_D(t, params) for t in range(4)]
    C0 = D[0] @ D[0] + D[1] @ D[1] + D[2] @ D[2] + D[3] @ D[3]
    z = ad.sample_points(rng, 9, params, ad.pole_candidates(params, 3))
    v0, _ = B.casimir_values(params)
    np.testing.assert_allclose(C0.coefficient(0, z), v0, rtol=1e-9)
    assert np.max(np.abs(C0.coefficient(2, z))) < 1e-9 * abs(v0)


def test_f_eta_vanishes_on_diagonal(params, rng):
    a, b, c1, c2 = (complex(x) for x in 0.3 * rng.normal(size=4) + 0.1j * rng.normal(size=4))
    F = B.f_eta(a, b, c1, c2, params)
    z = random_points(rng, 20)
    t1, _ = B.f_eta_parts(a, b, c1, c2, params)
    scale = np.max(np.abs(t1(z - params.nu, z - params.nu + params.eta)))
    for sign in (1, -1):
        vals = F(sign * z - params.nu, sign * z - params.nu + params.eta)
        assert np.max(np.abs(vals)) < 1e-9 * scale


def test_f_eta_zero_operator(params, rng):
    a, b, c1, c2 = (complex(x) for x in 0.3 * rng.normal(size=4) + 0.1j * rng.normal(size=4))
    A = ad.tensor_to_operator(B.f_eta(a, b, c1, c2, params), params.nu, params)
    t1, _ = B.f_eta_parts(a, b, c1, c2, params)
    ref = ad.tensor_to_operator(t1, params.nu, params)
    z = ad.sample_points(rng, 9, params, ad.pole_candidates(params, 3))
    scale = max(np.max(np.abs(ref.coefficient(j, z))) for j in ref.coeffs)
    for j in A.coeffs:
        assert np.max(np.abs(A.coefficient(j, z))) < 1e-8 * scale


def test_appendix_suite(params):
    reps = B.check_appendix_B_suite(params, seed=2)
    assert all(r.passed for r in reps), [(r.check_name, r.notes) for r in reps if not r.passed]
    ranks = {r.check_name: r.extra.get("rank") for r in reps}
    assert ranks["appendix_B_c_rank_R_eta"] == 6
    assert ranks["appendix_B_d_rank_A_nu_VV"] == 9


def test_appendix_rank_nine_at_019i():
    reps = B.check_appendix_B_suite(EllipticParams(0.9j, 0.19j, 0.03), seed=1)
    d = next(r for r in reps if r.check_name == "appendix_B_d_rank_A_nu_VV")
    assert d.extra["rank"] == 9 and d.passed


@pytest.mark.parametrize("k, expected", [(1, 4), (2, 8), (3, 12)])
def test_dimension_counts(k, expected, params):
    reps = {r.check_name: r for r in B.check_dimension_counts(params, seed=1)}
    rep = reps[f"dimension_V{k}"]
    assert rep.extra["rank"] == expected and rep.extra["gap"] >= 1e2


def test_product_span(params):
    rep = B.check_product_span_V2(params, seed=1)
    assert rep.passed and rep.extra["rank"] == 8


def test_three_term_identity(params, rng):
    z = random_points(rng, 10)
    a, b, c = random_points(rng, 3)
    terms = B.three_term(z, a, b, c, params)
    scale = max(np.max(np.abs(t)) for t in terms)
    assert np.max(np.abs(sum(terms))) < 1e-9 * scale


def test_b_relations_at_half(params):
    rep = B.check_b_relations_half(params.with_(eta=0.5 + 0j), seed=1)
    assert rep.passed
    parts = {r.check_name: r for r in rep.extra["parts"]}
    nonzero = [r for r in parts.values() if r.comparison == "gt"]
    assert nonzero and all(r.residual > 1e-3 for r in nonzero)


def test_b_relations_individual(params):
    p = params.with_(eta=0.5 + 0j)
    b = B.b_generators(p)
    z = ad.sample_points(np.random.default_rng(0), 9, p, ad.pole_candidates(p, 2))
    scale = max(np.max(np.abs((b[0] @ b[2]).coefficient(j, z))) for j in (-2, 0, 2))
    for op in (ad.anticommutator(b[0], b[2]), ad.commutator(b[2], b[3])):
        assert max(np.max(np.abs(op.coefficient(j, z))) for j in op.coeffs) < 1e-9 * scale
    ac = ad.anticommutator(b[0], b[1])
    assert max(np.max(np.abs(ac.coefficient(j, z))) for j in ac.coeffs) > 1e-3 * scale
