"""Kernel identities for the Ruijsenaars and van Diejen operators, the
product formula linking them, and the Sklyanin-type property of van Diejen
operators."""
from __future__ import annotations

import math

import numpy as np

from .. import adops as ad
from ..coeffspace import ResidueProbe, contour_moment, contour_scale, lattice_distance
from ..specfun import EllipticParams, kernel_function, r_delta
from .report import (
    ConstraintViolated,
    VerificationReport,
    combine,
    echo,
    relative_residual,
)
from .sklyanin import SklyaninTypeReport, check_sklyanin_type

GAMMA_POLE_MARGIN = 0.05


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def gamma_pole_distance(w: complex, params: EllipticParams, depth: int = 3) -> float:
    """Distance from w to the nearest pole i a + i (j a_+ + k a_-) + n of G."""
    best = math.inf
    for j in range(depth + 1):
        for k in range(depth + 1):
            p = 1j * params.a + 1j * (j * params.a_plus + k * params.a_minus)
            d = w - p
            best = min(best, abs(d - round(d.real)))
    return best


def kernel_pairs(rng: np.random.Generator, n: int, gamma: complex, steps, params: EllipticParams,
                 box: float = 0.3, margin: float = GAMMA_POLE_MARGIN) -> list[tuple[complex, complex]]:
    """Seeded (z, y) pairs keeping every gamma argument +-z' +-y' - gamma, for z', y'
    shifted by the operator steps, at least ``margin`` away from gamma poles."""
    scale_im = box * min(params.a_plus.real, params.a_minus.real)
    out = []
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 5000 * n:
            raise RuntimeError("could not place kernel sample pairs")
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(-scale_im, scale_im))
        y = complex(rng.uniform(-0.5, 0.5), rng.uniform(-scale_im, scale_im))
        args = []
        for s in steps:
            for zz, yy in ((z + s, y), (z, y + s)):
                args += [sz * zz + sy * yy - gamma for sz in (1, -1) for sy in (1, -1)]
        if all(gamma_pole_distance(w, params) > margin for w in args):
            out.append((z, y))
    return out


def _two_sided_residual(A: ad.DifferenceOperator, B: ad.DifferenceOperator, gamma: complex,
                        pairs, params: EllipticParams) -> float:
    """max over pairs of |(A_z - B_y) K| / (largest single term)."""
    worst = 0.0
    for z, y in pairs:
        Kz = lambda zz: kernel_function(gamma, zz, y, params)
        Ky = lambda yy: kernel_function(gamma, z, yy, params)
        terms = [complex(A.coefficient(j, z)) * Kz(z + j * A.eta) for j in A.coeffs]
        terms_b = [complex(B.coefficient(j, y)) * Ky(y + j * B.eta) for j in B.coeffs]
        big = max(abs(t) for t in terms + terms_b)
        if not math.isfinite(big):
            return math.inf
        worst = max(worst, abs(sum(terms) - sum(terms_b)) / max(big, 1e-300))
    return worst


def _steps(*ops) -> set:
    return {j * A.eta for A in ops for j in A.coeffs} | {0j}


# ---------------------------------------------------------------------------
# Ruijsenaars operators

def dual_couplings(l, gamma: complex, params: EllipticParams) -> tuple[complex, ...]:
    """k_n = -l_n + gamma - i a."""
    return tuple(-complex(x) + gamma - 1j * params.a for x in l)


def check_kernel_identity_R(delta: int, l, gamma: complex, params: EllipticParams, seed: int = 0,
                            n_samples: int = 10, tol: float = 1e-7) -> VerificationReport:
    params.require_modular()
    l = tuple(complex(x) for x in l)
    lhs = np.exp(4j * np.pi * gamma)
    rhs = np.exp(2j * np.pi * (sum(l) + 2j * params.a))
    if abs(lhs - rhs) > 1e-10 * max(1.0, abs(lhs), abs(rhs)):
        raise ConstraintViolated("exp(4 pi i gamma) != exp(2 pi i (sum l + 2 i a))")
    A = ad.a_r_delta(delta, l, params)
    B = ad.a_r_delta(delta, dual_couplings(l, gamma, params), params)
    pairs = kernel_pairs(_rng(seed), n_samples, gamma, _steps(A), params)
    res = _two_sided_residual(A, B, gamma, pairs, params)
    return VerificationReport(f"kernel_identity_R_{'+' if delta > 0 else '-'}",
                              echo(params, seed, delta=delta, gamma=complex(gamma)), res, tol,
                              tuple(z for z, _ in pairs), seed=seed)


def gamma_hat(l, params: EllipticParams) -> tuple[complex, complex]:
    """(working representative, reported representative) of gamma_hat.

    The working value is (sum l + 2 i a)/2 reduced to Re in [0, 1): it keeps
    the pairing K_1 <-> phi_1 for every l.  The reported value is the
    representative with Re in [0, 1/2).
    """
    g = (sum(complex(x) for x in l) + 2j * params.a) / 2
    work = g - math.floor(g.real)
    shown = g - 0.5 * math.floor(2 * g.real)
    return work, shown


def check_kernel_identity_corollary(delta: int, l, j: int, params: EllipticParams, seed: int = 0,
                                    n_samples: int = 10, tol: float = 1e-7) -> VerificationReport:
    params.require_modular()
    l = tuple(complex(x) for x in l)
    work, shown = gamma_hat(l, params)
    gamma = work + (0.5 if j == 2 else 0.0)
    A = ad.a_r_delta(delta, l, params)
    B = ad.a_r_delta(delta, ad.phi_map(l, j), params)
    pairs = kernel_pairs(_rng(seed), n_samples, gamma, _steps(A), params)
    res = _two_sided_residual(A, B, gamma, pairs, params)
    inv1 = max(abs(x - y) for x, y in zip(ad.phi_map(ad.phi_map(l, 1), 1), l))
    inv2 = max(abs(x - y - 1) for x, y in zip(ad.phi_map(ad.phi_map(l, 2), 2), l))
    inv = max(inv1, inv2) / max(1.0, max(abs(x) for x in l))
    return VerificationReport(
        f"kernel_identity_K{j}_{'+' if delta > 0 else '-'}",
        echo(params, seed, delta=delta, j=j), max(res, inv), tol,
        tuple(z for z, _ in pairs),
        notes=f"gamma_hat (Re in [0,1/2)) = {shown:.6g}; identity {res:.1e}; involutions {inv:.1e}",
        seed=seed)


# ---------------------------------------------------------------------------
# van Diejen operators

def require_hmu(h, mu: complex, params: EllipticParams) -> None:
    lhs = np.exp(-2j * np.pi * (sum(complex(x) for x in h) + 4j * params.a))
    if abs(lhs - mu ** 2) > 1e-10 * max(1.0, abs(lhs)):
        raise ConstraintViolated(f"couplings give mu^2 = {lhs}, declared mu^2 = {mu ** 2}")


def _require_finite_casimir(params: EllipticParams) -> None:
    for d in (1, -1):
        if abs(r_delta(d, 1j * params.a, params)) <= 1e-8:
            raise ad.CasimirDivergence(f"R_{d:+d}(i a) vanishes")


def check_kernel_identity_D(delta: int, h, j: int, params: EllipticParams, mu: complex | None = None,
                            seed: int = 0, n_samples: int = 10, tol: float = 1e-6,
                            xi: complex = 0.37 + 0.11j) -> VerificationReport:
    params.require_modular()
    h = tuple(complex(x) for x in h)
    if mu is not None:
        require_hmu(h, mu, params)
    _require_finite_casimir(params)
    g = sum(h) / 4 + 1j * params.a
    gamma = g - math.floor(g.real) + (0.5 if j == 2 else 0.0)
    hj = ad.chi_map(h, j)
    A = ad.van_diejen(ad.VanDiejenCouplings(h, xi, delta), params, mu)
    B = ad.van_diejen(ad.VanDiejenCouplings(hj, xi, delta), params, mu)
    pairs = kernel_pairs(_rng(seed), n_samples, gamma, _steps(A), params)
    res = _two_sided_residual(A, B, gamma, pairs, params)
    s1 = sum(ad.p_functions(h, delta, params))
    s2 = sum(ad.p_functions(hj, delta, params))
    e8 = relative_residual(s1, s2, floor=0.0)
    hs = max(1.0, max(abs(x) for x in h))
    inv = max(max(abs(x - y) for x, y in zip(ad.chi_map(ad.chi_map(h, 1), 1), h)),
              max(abs(x - y - 1) for x, y in zip(ad.chi_map(ad.chi_map(h, 2), 2), h))) / hs
    return VerificationReport(
        f"kernel_identity_D{j}_{'+' if delta > 0 else '-'}",
        echo(params, seed, delta=delta, j=j), max(res, e8, inv), tol, tuple(z for z, _ in pairs),
        notes=f"identity {res:.1e}; E8 sums {e8:.1e}; involutions {inv:.1e}", seed=seed,
        extra={"identity": res, "e8": e8, "involutions": inv})


def check_e8_sum(delta: int, h, params: EllipticParams, tol: float = 1e-8) -> VerificationReport:
    s = sum(ad.p_functions(h, delta, params))
    res = max(relative_residual(sum(ad.p_functions(ad.chi_map(h, j), delta, params)), s, floor=0.0)
              for j in (1, 2))
    return VerificationReport(f"e8_sum_{'+' if delta > 0 else '-'}", echo(params, delta=delta),
                              res, tol)


def _sample_for_step(params: EllipticParams, seed: int, n: int, eta: complex, tau: complex,
                     window: int = 3) -> np.ndarray:
    return ad.sample_points(_rng(seed), n, params, ad.pole_candidates(params, window, tau, eta), tau=tau)


def check_ar2_equals_vandiejen(l, m, delta: int, params: EllipticParams, seed: int = 0,
                               n_samples: int = 9, tol: float = 1e-7,
                               xi: complex = 0.37 + 0.11j) -> VerificationReport:
    """A_R(l) A_R(m) - A_D(h(l, m)) is a constant c_delta."""
    params.require_modular()
    mu_l, mu_m = ad.r_multiplier(l, params), ad.r_multiplier(m, params)
    if abs(mu_l - mu_m) > 1e-10 * max(1.0, abs(mu_l)):
        raise ConstraintViolated("l and m give different multipliers")
    _require_finite_casimir(params)
    A2 = ad.compose(ad.a_r_delta(delta, l, params), ad.a_r_delta(delta, m, params))
    h = ad.couplings_from_pair(l, m, delta, params)
    D = ad.reindex(ad.van_diejen(ad.VanDiejenCouplings(h, xi, delta), params, mu_l), 2)
    zs = _sample_for_step(params, seed, n_samples, A2.eta, 1j * params.a_delta(delta))
    scale2 = max(float(np.max(np.abs(A2.coefficient(s, zs)))) for s in (-2, 2))
    shift = max(float(np.max(np.abs(A2.coefficient(s, zs) - D.coefficient(s, zs)))) for s in (-2, 2))
    shift /= scale2
    d0 = A2.coefficient(0, zs) - D.coefficient(0, zs)
    scale0 = max(float(np.max(np.abs(A2.coefficient(0, zs)))), float(np.max(np.abs(D.coefficient(0, zs)))))
    spread = float(np.std(d0)) / scale0
    c = complex(np.mean(d0))
    return VerificationReport(
        f"ar2_equals_vandiejen_{'+' if delta > 0 else '-'}", echo(params, seed, delta=delta),
        max(shift, spread), tol, tuple(zs),
        notes=f"shift coefficients {shift:.1e}; constant spread {spread:.1e}; c = {c:.6g}",
        seed=seed, extra={"constant": c})


def rho_delta(delta: int, params: EllipticParams, n_points: int = 128) -> complex:
    """Res(1 / R_delta) at -i a_delta / 2, by contour."""
    c = -0.5j * params.a_delta(delta)
    r = 0.25 * min(0.5, abs(params.a_delta(delta)) / 2)
    return contour_moment(lambda z: 1 / r_delta(delta, z, params), ResidueProbe(c, r, n_points), 0)


def _vd_probe(c: complex, params: EllipticParams, delta: int) -> ResidueProbe:
    tau = 1j * params.a_delta(delta)
    eta = 0.5j * params.a_delta(-delta)
    others = [w - ell * eta for w in (0, 0.5, 0.5 + tau / 2, tau / 2) for ell in range(-3, 4)]
    d = [lattice_distance(o - c, tau) for o in others]
    d = [x for x in d if x > 1e-9]
    return ResidueProbe(c, min(0.05, 0.25 * min(d)), 64)


def check_van_diejen_type(h, delta: int, params: EllipticParams, mu: complex | None = None,
                          seed: int = 0, n_samples: int = 9, tol: float = 1e-6,
                          xi: complex = 0.37 + 0.11j, window_L: int = 2) -> SklyaninTypeReport:
    """Sklyanin-type conditions on the re-indexed van Diejen operator, plus the
    closed-form residues of c_0 and the residue ratios c_2 / c_0."""
    params.require_modular()
    h = tuple(complex(x) for x in h)
    if mu is None:
        mu = complex(np.sqrt(np.exp(-2j * np.pi * (sum(h) + 4j * params.a))))
    require_hmu(h, mu, params)
    A = ad.van_diejen(ad.VanDiejenCouplings(h, xi, delta), params, mu)
    tau = 1j * params.a_delta(delta)
    report = check_sklyanin_type(ad.reindex(A, 2), 2, params, window_L, tau=tau, mu=mu,
                                 seed=seed, n_samples=n_samples, tol=tol)

    ad_, am = params.a_delta(delta), params.a_delta(-delta)
    rho = rho_delta(delta, params)
    p = ad.p_functions(h, delta, params)
    denom = r_delta(delta, 0.5j * ad_ + 1j * am, params)
    omegas = ad.half_periods(delta, params)
    c0, c2 = A.coeffs[0], A.coeffs[1]
    for t in range(4):
        for s in (1, -1):
            probe = _vd_probe(omegas[t] + s * 0.5j * am, params, delta)
            r0 = contour_moment(c0, probe, 0)
            pred = s * rho / 2 * p[t] / denom
            scale = max(abs(pred), contour_scale(c0, probe), contour_scale(c2, probe), 1e-300)
            report.extra[("c0res", t, s)] = abs(r0 - pred) / scale
    points = {
        "-ia/2": (-0.5j * am, -1.0),
        "1/2-ia/2": (0.5 - 0.5j * am, -1.0),
        "ia_d/2-ia/2": (0.5j * ad_ - 0.5j * am, -mu),
        "1/2+ia_d/2-ia/2": (0.5 + 0.5j * ad_ - 0.5j * am, -mu),
    }
    for name, (c, factor) in points.items():
        probe = _vd_probe(c, params, delta)
        r0 = contour_moment(c0, probe, 0)
        r2 = contour_moment(c2, probe, 0)
        scale = max(abs(r2), abs(factor * r0), contour_scale(c0, probe), contour_scale(c2, probe), 1e-300)
        report.extra[("c2/c0", name)] = abs(r2 - factor * r0) / scale
    return report


def check_commutativity(params: EllipticParams, h_plus, h_minus, l_plus, l_minus,
                        mu: complex | None = None, seed: int = 0, n_samples: int = 9,
                        tol: float = 1e-8, nonzero: float = 1e-3) -> VerificationReport:
    """[A_D+(h), A_D-(h')] = 0 while [A_R+(l), A_R-(l')] is not."""
    params.require_modular()
    zs = ad.sample_points(_rng(seed), n_samples, params, (), tau=1j * params.a_plus)
    Dp = ad.van_diejen(ad.VanDiejenCouplings(h_plus, delta=1), params, mu)
    Dm = ad.van_diejen(ad.VanDiejenCouplings(h_minus, delta=-1), params, mu)
    Ap = ad.a_r_delta(1, l_plus, params)
    Am = ad.a_r_delta(-1, l_minus, params)

    def size(A, B):
        cc = ad.mixed_commutator_coefficients(A, B)
        top = max(float(np.max(np.abs(A.coefficient(j, zs) * B.coefficient(k, zs + j * A.eta))))
                  for j in A.coeffs for k in B.coeffs)
        return max(float(np.max(np.abs(f(zs)))) for f in cc.values()) / top

    d = VerificationReport("vandiejen_modular_commute", echo(params, seed), size(Dp, Dm), tol,
                           tuple(zs), seed=seed)
    r = VerificationReport("ruijsenaars_modular_noncommute", echo(params, seed), size(Ap, Am),
                           nonzero, tuple(zs), seed=seed, comparison="gt")
    return combine("modular_commutativity", [d, r], params, seed,
                   notes=f"[A_D+,A_D-] {d.residual:.1e}; [A_R+,A_R-] {r.residual:.2g}")
