"""Tensor-algebra picture: relation space R_eta, the map A_nu on V (x) V,
Casimir images, the I-map and the degenerate point eta = 1/2."""
from __future__ import annotations

import numpy as np

from .. import adops as ad
from ..coeffspace import matrix_rank, random_theta_ratio, rank_of_span
from ..specfun import EllipticParams, theta1, theta_variant
from .report import VerificationReport, combine, echo, relative_residual
from .sklyanin import half_lattice_distance, random_v1

RANK_GAP_MIN = 1e2


class RankAmbiguous(ValueError):
    pass


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _box(rng: np.random.Generator, params: EllipticParams) -> complex:
    return complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3) * params.tau.imag)


def _samples(params: EllipticParams, seed: int, n: int) -> np.ndarray:
    return ad.sample_points(_rng(seed), n, params, ad.pole_candidates(params, 3))


def four_theta(alpha: complex, beta: complex, gamma: complex, params: EllipticParams):
    """f(alpha, beta, gamma; z) = theta(z + alpha, z + beta, z + gamma, z - alpha - beta - gamma)."""
    th = lambda w: theta1(w, params)
    return lambda z: th(z + alpha) * th(z + beta) * th(z + gamma) * th(z - alpha - beta - gamma)


def f_eta_parts(a, b, c1, c2, params: EllipticParams, eta: complex | None = None):
    """The two tensor products whose difference is F_eta(a, b, c1, c2)."""
    u = (params.eta if eta is None else eta) / 2
    f = lambda x, y, w: four_theta(x, y, w, params)
    t1 = ad.tensor_product(f(a - u, b - u, c1 + u), f(a + u, b + u, c2 - u))
    t2 = ad.tensor_product(f(a - u, b - u, c2 + u), f(a + u, b + u, c1 - u))
    return t1, t2


def f_eta(a, b, c1, c2, params: EllipticParams, eta: complex | None = None):
    t1, t2 = f_eta_parts(a, b, c1, c2, params, eta)
    return lambda z1, z2: t1(z1, z2) - t2(z1, z2)


def casimir_tensor(gamma: complex, params: EllipticParams):
    """2 theta(eta +- (z1 - z2)) theta(z1 + z2 +- gamma); gamma = 0 gives K_0, gamma = eta gives K_2."""
    th = lambda w: theta1(w, params)
    eta = params.eta
    return lambda z1, z2: (2 * th(eta + z1 - z2) * th(eta - z1 + z2)
                           * th(z1 + z2 + gamma) * th(z1 + z2 - gamma))


def casimir_values(params: EllipticParams) -> tuple[complex, complex]:
    th = lambda w: theta1(w, params)
    nu, eta = params.nu, params.eta
    return complex(4 * th(2 * nu + eta) ** 2), complex(4 * th(2 * nu) * th(2 * nu + 2 * eta))


def i_map_theta_forms(params: EllipticParams) -> list:
    """theta_t(eta) theta_t(2z) forms of I(S_t) (with the factor i for t = 2)."""
    eta = params.eta
    out = []
    for t in range(4):
        c = theta_variant(t + 1, eta, params) * (1j if t == 2 else 1.0)
        out.append(lambda z, c=c, k=t + 1: c * theta_variant(k, 2 * np.asarray(z, dtype=complex), params))
    return out


def i_map_f_forms(params: EllipticParams) -> list:
    """prefactor * f(zero set; z) forms of I(S_t)."""
    th = lambda w: theta1(w, params)
    out = []
    for t, zs in enumerate(ad.sklyanin_zero_sets(params)):
        c = ad.sklyanin_prefactor(t, params)
        out.append(lambda z, c=c, zs=zs: c * np.prod([th(z + a) for a in zs], axis=0))
    return out


def k2_weights(params: EllipticParams) -> list[complex]:
    eta = params.eta
    return [complex(theta_variant(k + 1, 2 * eta, params) * theta_variant(k + 1, 0, params)
                    / theta_variant(k + 1, eta, params) ** 2) for k in (1, 2, 3)]


def _op_scale(ops, zs) -> float:
    return max(float(np.max(np.abs(A.coefficient(j, zs)))) for A in ops for j in A.coeffs)


def check_casimirs(params: EllipticParams, seed: int = 0, n_samples: int = 9,
                   tol: float = 1e-8) -> VerificationReport:
    """A_nu(K_0), A_nu(K_2) are the stated constants; the operator route
    sum D_t^2 and sum w_k D_k^2 gives the same constants."""
    zs = _samples(params, seed, n_samples)
    v0, v2 = casimir_values(params)
    parts = {}
    for name, gamma, val in (("K0", 0.0, v0), ("K2", params.eta, v2)):
        A = ad.tensor_to_operator(casimir_tensor(gamma, params), params.nu, params)
        c0 = A.coefficient(0, zs)
        scale = max(float(np.max(np.abs(c0))), abs(val))
        parts[f"{name} shifts"] = max(float(np.max(np.abs(A.coefficient(s, zs)))) for s in (-2, 2)) / scale
        parts[f"{name} value"] = relative_residual(c0, np.full_like(c0, val), floor=0.0)
    D = [ad.sklyanin_D(t, params) for t in range(4)]
    C0 = D[0] @ D[0] + D[1] @ D[1] + D[2] @ D[2] + D[3] @ D[3]
    w = k2_weights(params)
    C2 = w[0] * (D[1] @ D[1]) + w[1] * (D[2] @ D[2]) + w[2] * (D[3] @ D[3])
    for name, C, val in (("sum D_t^2", C0, v0), ("sum w_k D_k^2", C2, v2)):
        c0 = C.coefficient(0, zs)
        scale = max(_op_scale([C], zs), abs(val))
        parts[f"{name} shifts"] = max(float(np.max(np.abs(C.coefficient(s, zs)))) for s in (-2, 2)) / scale
        parts[f"{name} value"] = relative_residual(c0, np.full_like(c0, val), floor=0.0)
    worst = max(parts.values())
    return VerificationReport("casimirs", echo(params, seed), worst, tol, tuple(zs),
                              notes="; ".join(f"{k} {v:.1e}" for k, v in parts.items()), seed=seed,
                              extra={"K0": v0, "K2": v2})


def _rank_report(name: str, fs, points, expected: int, params: EllipticParams, seed: int,
                 extra_rows=None) -> VerificationReport:
    res = rank_of_span(fs, points, details=True) if extra_rows is None else matrix_rank(extra_rows)
    if res.gap < RANK_GAP_MIN:
        raise RankAmbiguous(f"{name}: singular-value gap {res.gap:.3g} below {RANK_GAP_MIN}")
    return VerificationReport(name, echo(params, seed), float(abs(res.rank - expected)), 0.5,
                              notes=f"rank {res.rank} (expected {expected}), gap {res.gap:.3g}",
                              seed=seed, extra={"rank": res.rank, "gap": res.gap})


def check_dimension_counts(params: EllipticParams, seed: int = 0, n_points: int = 40) -> list[VerificationReport]:
    """rank of random order-k theta ratios = 4k for k = 1, 2, 3."""
    rng = _rng(seed)
    out = []
    for k in (1, 2, 3):
        fs = [random_theta_ratio(k, params, rng) for _ in range(4 * k + 6)]
        pts = ad.sample_points(rng, n_points, params, ad.pole_candidates(params, k + 1))
        out.append(_rank_report(f"dimension_V{k}", fs, pts, 4 * k, params, seed))
    return out


def check_product_span_V2(params: EllipticParams, seed: int = 0, n_products: int = 14,
                          n_points: int = 40) -> VerificationReport:
    """Shift-2 coefficients of products A(f) A(g), f, g in V_1(mu), span an 8-dimensional space."""
    rng = _rng(seed)
    eta = params.eta
    fs = []
    for _ in range(n_products):
        f, g = random_v1(params, rng), random_v1(params, rng)
        fs.append(lambda z, f=f, g=g: f(z) * g(z + eta))
    pts = ad.sample_points(rng, n_points, params, ad.pole_candidates(params, 2))
    return _rank_report("product_span_V2", fs, pts, 8, params, seed)


def three_term(z, alpha, beta, gamma, params: EllipticParams):
    th = lambda w: theta1(w, params)
    p = lambda x, y, u, v: th(x + y) * th(x - y) * th(u + v) * th(u - v)
    terms = (p(z, alpha, beta, gamma), p(z, beta, gamma, alpha), p(z, gamma, alpha, beta))
    return terms


def check_appendix_B_suite(params: EllipticParams, seed: int = 0, n_samples: int = 20,
                           n_tensors: int = 20) -> list[VerificationReport]:
    if half_lattice_distance(params.eta, params.tau) <= 0.02:
        raise ValueError("eta too close to a half period for the appendix suite")
    rng = _rng(seed)
    eta, nu = params.eta, params.nu
    zs = _samples(params, seed, n_samples)
    quads = [tuple(_box(rng, params) for _ in range(4)) for _ in range(n_tensors)]
    reports = []

    # (a) F_eta vanishes on (d z - nu, d z - nu + eta)
    worst = 0.0
    for q in quads:
        t1, t2 = f_eta_parts(*q, params)
        for d in (1, -1):
            z1, z2 = d * zs - nu, d * zs - nu + eta
            a, b = t1(z1, z2), t2(z1, z2)
            scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
            worst = max(worst, float(np.max(np.abs(a - b))) / scale)
    reports.append(VerificationReport("appendix_B_a_F_eta_vanishing", echo(params, seed), worst, 1e-9,
                                      tuple(zs), seed=seed))

    # (b) A_nu(F_eta) is the zero operator
    worst = 0.0
    for q in quads:
        t1, t2 = f_eta_parts(*q, params)
        A1 = ad.tensor_to_operator(t1, nu, params)
        A2 = ad.tensor_to_operator(t2, nu, params)
        worst = max(worst, max(float(np.max(np.abs((A1 - A2).coefficient(j, zs)))) for j in (-2, 0, 2))
                    / _op_scale([A1, A2], zs))
    reports.append(VerificationReport("appendix_B_b_A_of_F_eta_zero", echo(params, seed), worst, 1e-8,
                                      tuple(zs), seed=seed))

    # (c) dim R_eta = 6
    Fs = [f_eta(*q, params) for q in quads]
    Z1 = np.array([_box(rng, params) for _ in range(30)])
    Z2 = np.array([_box(rng, params) for _ in range(30)])
    reports.append(_rank_report("appendix_B_c_rank_R_eta", Fs, (Z1, Z2), 6, params, seed))

    # (d) dim A_nu(V (x) V) = 9, and it contains the constants
    basis = [four_theta(*(0.3 * rng.normal(size=3) + 0.1j * rng.normal(size=3)), params) for _ in range(4)]
    ops = [ad.tensor_to_operator(ad.tensor_product(f, g), nu, params) for f in basis for g in basis]
    pts = ad.sample_points(rng, 30, params, ad.pole_candidates(params, 3))
    rows = np.array([np.concatenate([A.coefficient(j, pts) for j in (-2, 0, 2)]) for A in ops])
    reports.append(_rank_report("appendix_B_d_rank_A_nu_VV", None, None, 9, params, seed, extra_rows=rows))
    const = np.concatenate([np.zeros(30), np.ones(30), np.zeros(30)])
    reports.append(_rank_report("appendix_B_d_constants_in_image", None, None, 9, params, seed,
                                extra_rows=np.vstack([rows, const])))

    # (e) 3-term identity
    worst = 0.0
    for _ in range(10):
        al, be, ga = (_box(rng, params) for _ in range(3))
        terms = three_term(zs, al, be, ga, params)
        big = max(float(np.max(np.abs(t))) for t in terms)
        worst = max(worst, float(np.max(np.abs(sum(terms)))) / big)
    reports.append(VerificationReport("appendix_B_e_three_term", echo(params, seed), worst, 1e-9,
                                      tuple(zs), seed=seed))

    # (f) I-map: f-form = theta_t form; A_nu(I(S_t)) = D_t; Casimir tensors from I-map sums
    tf, ff = i_map_theta_forms(params), i_map_f_forms(params)
    worst = max(relative_residual(ff[t](zs), tf[t](zs), floor=0.0) for t in range(4))
    for t in range(4):
        A = ad.generator_from_v(tf[t], nu, params)
        D = ad.sklyanin_D(t, params)
        worst = max(worst, ad.coefficients_equal(A, D, zs).residual)
    w = k2_weights(params)
    z1, z2 = zs, zs[::-1] * 0.7 + 0.1
    k0 = sum(tf[t](z1) * tf[t](z2) for t in range(4))
    k2 = sum(w[k - 1] * tf[k](z1) * tf[k](z2) for k in (1, 2, 3))
    worst = max(worst, relative_residual(k0, casimir_tensor(0.0, params)(z1, z2), floor=0.0),
                relative_residual(k2, casimir_tensor(eta, params)(z1, z2), floor=0.0))
    reports.append(VerificationReport("appendix_B_f_i_map", echo(params, seed), worst, 1e-9,
                                      tuple(zs), seed=seed))
    return reports


B_RELATIONS = (
    ("[b0,b2]+", 0, 2, +1), ("[b0,b3]+", 0, 3, +1), ("[b2,b3]-", 2, 3, -1),
    ("[b1,b2]+", 1, 2, +1), ("[b3,b1]+", 3, 1, +1), ("[b0,b1]-", 0, 1, -1),
)


def b_generators(params: EllipticParams) -> list[ad.DifferenceOperator]:
    return [ad.generator_from_v(lambda z, k=k: theta_variant(k, 2 * np.asarray(z, dtype=complex), params),
                                params.nu, params) for k in (1, 2, 3, 4)]


def _bracket_size(b, x, y, sign, zs) -> float:
    xy, yx = b[x] @ b[y], b[y] @ b[x]
    op = xy + yx if sign > 0 else xy - yx
    return max(float(np.max(np.abs(op.coefficient(j, zs)))) for j in op.coeffs) / _op_scale([xy, yx], zs)


def check_b_relations_half(params: EllipticParams, seed: int = 0, n_samples: int = 9,
                           tol: float = 1e-9, nonzero: float = 1e-3) -> VerificationReport:
    if abs(params.eta - 0.5) > 1e-14:
        raise ValueError("the b-relations are stated at eta = 1/2")
    zs = _samples(params, seed, n_samples)
    b = b_generators(params)
    parts = {name: _bracket_size(b, x, y, s, zs) for name, x, y, s in B_RELATIONS}
    anti01 = _bracket_size(b, 0, 1, +1, zs)
    worst = max(parts.values())
    rel = VerificationReport("b_relations", echo(params, seed), worst, tol, tuple(zs), seed=seed)
    non = VerificationReport("b0_b1_anticommutator_nonzero", echo(params, seed), anti01, nonzero,
                             tuple(zs), seed=seed, comparison="gt")
    notes = "; ".join(f"{k} {v:.1e}" for k, v in parts.items()) + f"; [b0,b1]+ {anti01:.3g}"
    return combine("b_relations_half", [rel, non], params, seed, notes=notes)
