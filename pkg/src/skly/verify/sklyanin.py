"""Checks on the Sklyanin generators, the Sklyanin-type characterisation of
difference operators, and the eta-dependence of product coefficients."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import adops as ad
from ..coeffspace import (
    ResidueProbe,
    ThetaRatio,
    contour_moment,
    contour_scale,
    lattice_distance,
    make_v1,
    pkm_product,
)
from ..specfun import EllipticParams, _as_complex_array, jacobi_structure_constants, theta1
from .report import (
    DegenerateEta,
    PoleCollision,
    VerificationReport,
    echo,
    relative_residual,
    scaled_residual,
)

GENERIC_ETA_QMAX = 12
GENERIC_ETA_TOL = 0.02
MIN_PROBE_RADIUS = 0.004

CYCLIC = ((1, 2, 3), (2, 3, 1), (3, 1, 2))


def sklyanin_half_periods(tau: complex) -> tuple[complex, ...]:
    return (0j, 0.5 + 0j, 0.5 + tau / 2, tau / 2)


def half_lattice_distance(eta: complex, tau: complex) -> float:
    return min(lattice_distance(eta - w, tau) for w in sklyanin_half_periods(tau))


def rational_lattice_distance(eta: complex, tau: complex, qmax: int = GENERIC_ETA_QMAX) -> float:
    """min over 1 <= q <= qmax of dist(q eta, Z + tau Z)."""
    return min(lattice_distance(q * eta, tau) for q in range(1, qmax + 1))


def require_generic_eta(eta: complex, tau: complex, qmax: int = GENERIC_ETA_QMAX,
                        tol: float = GENERIC_ETA_TOL) -> None:
    d = rational_lattice_distance(eta, tau, qmax)
    if d < tol:
        raise DegenerateEta(f"eta = {eta} is within {d:.3g} of a torsion point of order <= {qmax}")


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _samples(params: EllipticParams, seed: int, n: int, window: int = 3,
             eta: complex | None = None, tau: complex | None = None) -> np.ndarray:
    tau = params.tau if tau is None else tau
    eta = params.eta if eta is None else eta
    return ad.sample_points(_rng(seed), n, params, ad.pole_candidates(params, window, tau, eta), tau=tau)


def _max_coeff(ops, zs) -> float:
    return max(float(np.max(np.abs(A.coefficient(j, zs)))) for A in ops for j in A.coeffs)


def _max_coeff_diff(A, B, zs) -> float:
    out = 0.0
    for j in set(A.coeffs) | set(B.coeffs):
        out = max(out, float(np.max(np.abs(A.coefficient(j, zs) - B.coefficient(j, zs)))))
    return out


# ---------------------------------------------------------------------------
# Sklyanin relations

def relation_operators(D: list, params: EllipticParams) -> list[tuple[str, ad.DifferenceOperator, ad.DifferenceOperator]]:
    """The six quadratic relations as (label, lhs, rhs) operator pairs."""
    J = jacobi_structure_constants(params.eta, params)
    out = []
    for k, l, m in CYCLIC:
        out.append((f"[S0,S{k}]- = iJ{l}{m}[S{l},S{m}]+", ad.commutator(D[0], D[k]),
                    1j * J[f"{l}{m}"] * ad.anticommutator(D[l], D[m])))
    for k, l, m in CYCLIC:
        out.append((f"[S{k},S{l}]- = i[S0,S{m}]+", ad.commutator(D[k], D[l]),
                    1j * ad.anticommutator(D[0], D[m])))
    return out


def check_sklyanin_relations(params: EllipticParams, n_samples: int = 9, seed: int = 0,
                             tol: float = 1e-7, scale: complex = 1.0) -> VerificationReport:
    if half_lattice_distance(params.eta, params.tau) <= GENERIC_ETA_TOL:
        raise DegenerateEta(f"eta = {params.eta} is too close to a half period")
    zs = _samples(params, seed, n_samples)
    D = [ad.scale(ad.sklyanin_D(t, params), scale) for t in range(4)]
    rels = relation_operators(D, params)
    norm = _max_coeff([op for _, a, b in rels for op in (a, b)], zs)
    parts = {name: _max_coeff_diff(a, b, zs) / norm for name, a, b in rels}
    worst = max(parts.values())
    return VerificationReport("sklyanin_relations", echo(params, seed), worst, tol, tuple(zs),
                              notes="; ".join(f"{k}: {v:.2e}" for k, v in parts.items()), seed=seed)


def check_structure_constants_elliptic(params: EllipticParams, n_samples: int = 9, seed: int = 0,
                                       tol: float = 1e-9) -> VerificationReport:
    rng = _rng(seed)
    tau = params.tau
    worst = 0.0
    etas = []
    while len(etas) < n_samples:
        e = rng.uniform(-0.5, 0.5) + rng.uniform(-0.5, 0.5) * tau
        if half_lattice_distance(e, tau) > 0.05:
            etas.append(e)
    for e in etas:
        J0 = jacobi_structure_constants(e, params)
        for shift in (1, tau):
            J1 = jacobi_structure_constants(e + shift, params)
            for key in J0:
                worst = max(worst, relative_residual(J1[key], J0[key]))
    return VerificationReport("structure_constants_elliptic", echo(params, seed), worst, tol,
                              tuple(etas), seed=seed)


# ---------------------------------------------------------------------------
# Sklyanin-type characterisation

@dataclass
class SklyaninTypeReport:
    k: int
    tolerance: float
    symmetry_residual: float
    pole_simplicity: dict = field(default_factory=dict)
    simplicity_residuals: dict = field(default_factory=dict)
    residues: dict = field(default_factory=dict)
    relation_residuals: dict = field(default_factory=dict)
    samples: tuple = ()
    extra: dict = field(default_factory=dict)

    @property
    def violations(self) -> list[tuple]:
        out = [key for key, r in self.relation_residuals.items() if not r < self.tolerance]
        out += [("double-pole",) + key for key, ok in self.pole_simplicity.items() if not ok]
        out += [key for key, r in self.extra.items() if not r < self.tolerance]
        return out

    @property
    def max_relation_residual(self) -> float:
        return max(self.relation_residuals.values(), default=0.0)

    @property
    def residual(self) -> float:
        return max(self.symmetry_residual, self.max_relation_residual,
                   max(self.simplicity_residuals.values(), default=0.0),
                   max(self.extra.values(), default=0.0))

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance

    def to_report(self, name: str, params: EllipticParams, seed: int | None = None,
                  notes: str = "") -> VerificationReport:
        v = self.violations
        text = notes + (f"; violations: {v[:6]}" if v else "")
        return VerificationReport(name, echo(params, seed), self.residual, self.tolerance,
                                  self.samples, text.strip("; "), seed)


def check_sklyanin_type(A: ad.DifferenceOperator, k: int, params: EllipticParams,
                        window_L: int | None = None, tau: complex | None = None,
                        mu: complex | None = None, seed: int = 0, n_samples: int = 9,
                        tol: float = 1e-6, n_points: int = 64) -> SklyaninTypeReport:
    """Conditions (i)-(iii) for sum_{|j|<=k} c_j(z) exp(j eta d/dz), eta = A.eta.

    ``tau`` and ``mu`` default to the parameter bundle; pass them explicitly
    for operators living on another lattice (modular partners).  ``mu`` is the
    space multiplier, not ``A.mu_tag``: a k-fold product carries tag mu^k.
    """
    if any(abs(j) > k for j in A.coeffs):
        raise ValueError(f"support {A.support} exceeds order {k}")
    tau = params.tau if tau is None else complex(tau)
    mu = params.mu if mu is None else complex(mu)
    eta = A.eta
    L = k if window_L is None else window_L
    omegas = sklyanin_half_periods(tau)
    lam = (1.0, 1.0, mu, mu)
    js = range(-k, k + 1)

    # (i) symmetry
    zs = ad.sample_points(_rng(seed), n_samples, params,
                          ad.pole_candidates(params, L + 1, tau, eta), tau=tau)
    lhs_all, rhs_all = [], []
    for t, w in enumerate(omegas):
        for j in js:
            lhs_all.append(A.coefficient(j, zs + w))
            rhs_all.append(lam[t] ** j * A.coefficient(-j, -zs + w))
    lhs_all, rhs_all = np.concatenate(lhs_all), np.concatenate(rhs_all)
    scale = max(float(np.max(np.abs(lhs_all))), float(np.max(np.abs(rhs_all))), 1e-300)
    sym = scaled_residual(lhs_all - rhs_all, scale)

    # (ii) simple poles, residues
    window = range(-L, L + 1)
    cands = {(t, ell): omegas[t] - ell * eta for t in range(4) for ell in window}
    outer = list(cands.values()) + [w - ell * eta for w in omegas for ell in (-L - 1, L + 1)]
    keys = list(cands)
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            if lattice_distance(cands[a] - cands[b], tau) < 4 * MIN_PROBE_RADIUS:
                raise PoleCollision(f"pole candidates {a} and {b} nearly coincide")
    report = SklyaninTypeReport(k, tol, sym, samples=tuple(zs))
    scales = {}
    for key, c in cands.items():
        others = [o for o in outer if lattice_distance(o - c, tau) > 1e-9]
        r = min(0.05, 0.25 * min(lattice_distance(o - c, tau) for o in others))
        probe = ResidueProbe(c, r, n_points)
        local = 0.0
        for j in js:
            if j not in A.coeffs:
                report.residues[(j,) + key] = 0j
                continue
            f = A.coeffs[j]
            res = contour_moment(f, probe, 0)
            m1 = contour_moment(f, probe, 1)
            sc = contour_scale(f, probe)
            local = max(local, sc)
            simp = abs(m1) / max(r * sc, 1e-300)
            report.residues[(j,) + key] = res
            report.simplicity_residuals[(j,) + key] = simp
            report.pole_simplicity[(j,) + key] = simp < tol
        scales[key] = max(local, 1e-300)

    # (iii) residue relations
    for (t, ell) in cands:
        sc = scales[(t, ell)]
        for j in js:
            r_j = report.residues[(j, t, ell)]
            if ell == j:
                val = abs(r_j)
                label = "vanish(l=j)"
            elif abs(2 * ell - j) > k:
                val = abs(r_j)
                label = "vanish(|2l-j|>k)"
            else:
                partner = report.residues[(2 * ell - j, t, ell)]
                val = abs(r_j + lam[t] ** (j - ell) * partner)
                label = "pair"
            report.relation_residuals[(label, j, t, ell)] = val / sc
    return report


# ---------------------------------------------------------------------------
# products of generators built from eta-independent coefficients

def random_v1(params: EllipticParams, rng: np.random.Generator, nu: complex | None = None,
              spread: float = 0.4) -> ThetaRatio:
    a = rng.uniform(-spread, spread, 4) + 1j * rng.uniform(-spread, spread, 4) * params.tau.imag
    a = a - a.mean()
    return make_v1(a, params.nu if nu is None else nu, params, complex(rng.normal(), rng.normal()))


def product_operator(fs, eta: complex) -> ad.DifferenceOperator:
    """A(f_1) A(f_2) ... A(f_k) with step eta."""
    op = None
    for f in fs:
        g = ad.generator(f, eta, mu_tag=complex(f.mu))
        op = g if op is None else ad.compose(op, g)
    return op


def e_exponent(k: int, m: int) -> int:
    """e(k, m) = (k - 2m)^2 / 2 - k / 2."""
    twice = (k - 2 * m) ** 2 - k
    if twice % 2:
        raise ValueError("exponent is not an integer")
    return twice // 2


def check_eta_quasiperiodicity(k: int, m: int, params: EllipticParams, fs=None, seed: int = 0,
                               n_samples: int = 9, tol: float = 1e-6) -> VerificationReport:
    rng = _rng(seed)
    if fs is None:
        fs = [random_v1(params, rng) for _ in range(k)]
    if len(fs) != k or not 0 <= m <= k:
        raise ValueError("need k coefficient functions and 0 <= m <= k")
    mu = complex(fs[0].mu)
    j = k - 2 * m
    eta, tau = params.eta, params.tau
    zs = _samples(params, seed + 1, n_samples, window=k)
    base = product_operator(fs, eta).coefficient(j, zs)
    by_tau = product_operator(fs, eta + tau).coefficient(j, zs)
    by_one = product_operator(fs, eta + 1).coefficient(j, zs)
    e = e_exponent(k, m)
    res = max(relative_residual(by_tau, mu ** e * base, floor=0.0),
              relative_residual(by_one, base, floor=0.0))
    return VerificationReport(f"eta_quasiperiodicity_k{k}_m{m}", echo(params, seed), res, tol,
                              tuple(zs), notes=f"e(k,m) = {e}", seed=seed)


def eta_grid(params: EllipticParams, n: int = 5, seed: int = 0, k: int = 3) -> list[complex]:
    """Seeded eta values away from the torsion set D_k (and from half periods)."""
    rng = _rng(seed)
    tau = params.tau
    out = []
    while len(out) < n:
        e = params.eta + 0.06 * complex(rng.normal(), rng.normal())
        if min(lattice_distance(2 * ell * e, tau) / (2 * ell) for ell in range(1, 2 * k)) > 0.02:
            out.append(e)
    return out


def check_H_holomorphy(k: int, m: int, etas, params: EllipticParams, fs=None, seed: int = 0,
                       tol: float = 1e-7, n_points: int = 64) -> VerificationReport:
    """H = P^(k)_m c^(k)_{k-2m}: zero contour residue and no growth on shrinking
    circles around every z-pole candidate omega_t - l eta, |l| <= k - 1."""
    rng = _rng(seed)
    if fs is None:
        fs = [random_v1(params, rng) for _ in range(k)]
    tau = params.tau
    omegas = sklyanin_half_periods(tau)
    j = k - 2 * m
    worst = 0.0
    centers = []
    for eta in etas:
        if min(lattice_distance(2 * ell * eta, tau) / (2 * ell) for ell in range(1, k + 1)) <= 0.02:
            raise DegenerateEta(f"eta = {eta} is within 0.02 of the torsion set D_{k}")
        coeff = product_operator(fs, eta).coeffs.get(j)
        if coeff is None:
            continue

        def H(z, coeff=coeff, eta=eta):
            return pkm_product(k, m, eta, _as_complex_array(z), params) * coeff(z)

        cands = [w - ell * eta for w in omegas for ell in range(-(k - 1), k)]
        outer = cands + [w - ell * eta for w in omegas for ell in (-k, k)]
        for c in cands:
            others = [lattice_distance(o - c, tau) for o in outer]
            others = [d for d in others if d > 1e-9]
            r = min(0.05, 0.25 * min(others))
            big = ResidueProbe(c, r, n_points)
            small = ResidueProbe(c, r / 4, n_points)
            vals_big = np.abs(H(big.nodes()))
            vals_small = np.abs(H(small.nodes()))
            scale = r * float(np.max(vals_big))
            res = abs(contour_moment(H, big, 0)) / max(scale, 1e-300)
            growth = max(0.0, float(np.max(vals_small)) / max(float(np.max(vals_big)), 1e-300) - 1.0)
            worst = max(worst, res, growth)
            centers.append(c)
    return VerificationReport(f"H_holomorphy_k{k}_m{m}", echo(params, seed), worst, tol,
                              tuple(centers), notes=f"{len(list(etas))} eta values", seed=seed)


# ---------------------------------------------------------------------------
# constants in V_2(mu)

def check_constants_in_V2(params: EllipticParams, seed: int = 0, n_samples: int = 9,
                          tol: float = 1e-8) -> VerificationReport:
    rng = _rng(seed)
    eta, nu = params.eta, params.nu
    th = lambda w: theta1(w, params)

    def pick():
        return complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.3, 0.3) * params.tau.imag)

    for _ in range(50):
        b = [pick() for _ in range(4)]
        alpha = pick()
        beta = 4 * nu + 2 * eta - alpha
        k1 = th(-alpha) * th(b[1] - b[0]) * th(-alpha - b[0] - b[1])
        k3 = th(-beta) * th(b[3] - b[2]) * th(-beta - b[2] - b[3])
        if min(abs(th(-alpha)), abs(th(-beta)), abs(th(b[1] - b[0])), abs(th(b[3] - b[2])),
               abs(th(-alpha - b[0] - b[1])), abs(th(-beta - b[2] - b[3]))) > 1e-2:
            break
    else:
        raise ValueError("no non-degenerate b-choice found")

    e = [lambda z, bb=b[0]: th(z + bb) * th(z - alpha - bb),
         lambda z, bb=b[1]: th(z + bb) * th(z - alpha - bb),
         lambda z, bb=b[2]: th(z + bb) * th(z - beta - bb),
         lambda z, bb=b[3]: th(z + bb) * th(z - beta - bb)]
    f = lambda z: e[0](z) * e[2](z + eta) / th(2 * z)
    g = lambda z: e[3](z) * e[1](z + eta) / th(2 * z)
    fp = lambda z: e[0](z) * e[3](z + eta) / th(2 * z)
    gp = lambda z: e[2](z) * e[1](z + eta) / th(2 * z)

    zs = _samples(params, seed + 1, n_samples)
    mu = params.mu
    tau = params.tau
    in_v1 = max(relative_residual(h(zs + tau), mu * h(zs), floor=0.0) for h in (f, g, fp, gp))
    in_v1 = max(in_v1, max(relative_residual(h(zs + 1), h(zs), floor=0.0) for h in (f, g, fp, gp)))
    fg2 = relative_residual(f(zs) * g(zs + eta), fp(zs) * gp(zs + eta), floor=0.0)

    A = lambda h: ad.generator(h, eta, mu_tag=mu)
    P, Q = ad.compose(A(f), A(g)), ad.compose(A(fp), A(gp))
    diff = P - Q
    scale2 = max(float(np.max(np.abs(P.coefficient(s, zs)))) for s in (-2, 2))
    shift2 = max(float(np.max(np.abs(diff.coefficient(s, zs)))) for s in (-2, 2)) / scale2
    c0 = diff.coefficient(0, zs)
    scale0 = max(float(np.max(np.abs(P.coefficient(0, zs)))), float(np.max(np.abs(Q.coefficient(0, zs)))))
    spread = float(np.std(c0)) / scale0
    const = relative_residual(c0, np.full_like(c0, -k1 * k3), floor=0.0)
    worst = max(in_v1, fg2, shift2, spread, const)
    notes = (f"V1 membership {in_v1:.1e}; fg2 {fg2:.1e}; shift+-2 {shift2:.1e}; "
             f"c0 spread {spread:.1e}; c0 vs -k1k3 {const:.1e}")
    return VerificationReport("constants_in_V2", echo(params, seed), worst, tol, tuple(zs),
                              notes=notes, seed=seed, extra={"constant": complex(np.mean(c0)),
                                                             "minus_k1k3": complex(-k1 * k3)})


# ---------------------------------------------------------------------------
# invariance of the spaces M_t

def check_invariant_spaces(params: EllipticParams, seed: int = 0, n_samples: int = 9,
                           tol: float = 1e-8, n_points: int = 64) -> VerificationReport:
    """A(a, nu) g stays in M_t for g = Phi_t^{-1}(h), h an even cosine polynomial."""
    rng = _rng(seed)
    eta, tau = params.eta, params.tau
    lam_exp = (0j, 0j, 8j * np.pi * params.nu, 8j * np.pi * params.nu)
    coeffs = rng.normal(size=5) + 1j * rng.normal(size=5)
    h = lambda z: sum(c * np.cos(2 * np.pi * n * z) for n, c in enumerate(coeffs))
    f = random_v1(params, rng)
    A = ad.generator(f, eta, mu_tag=complex(f.mu))
    zs = _samples(params, seed + 1, n_samples) * 0.3
    worst = 0.0
    for t, w in enumerate(sklyanin_half_periods(tau)):
        lam = lam_exp[t]

        def g(z, w=w, lam=lam):
            zz = _as_complex_array(z)
            return np.exp(-lam * (zz - w) / (2 * eta)) * h(zz - w)

        Ag = lambda z, g=g: ad.apply(A, g, z)
        others = [w - ell * eta for ell in (-2, -1, 1, 2)] + [
            v for v in sklyanin_half_periods(tau) if v != w]
        r = min(0.05, 0.25 * min(lattice_distance(o - w, tau) for o in others))
        probe = ResidueProbe(w, r, n_points)
        term = lambda z: f(_as_complex_array(z)) * g(_as_complex_array(z) + eta)
        scale = abs(contour_moment(term, probe, 0)) + r * contour_scale(Ag, probe)
        res = abs(contour_moment(Ag, probe, 0)) / max(scale, 1e-300)
        lhs = Ag(w - zs)
        rhs = np.exp(lam * zs / eta) * Ag(w + zs)
        auto = relative_residual(lhs, rhs, floor=0.0)
        worst = max(worst, res, auto)
    return VerificationReport("invariant_spaces_Mt", echo(params, seed), worst, tol, tuple(zs),
                              seed=seed)


# ---------------------------------------------------------------------------
# anti-automorphisms induced by the kernel functions

ANTI_SIGNS = {1: (1, 1, 1, -1), 2: (1, 1, -1, 1)}


def sklyanin_as_r_generator(t: int, params: EllipticParams) -> tuple[complex, tuple]:
    """(c, l) with D_t = c A_{R,+}(l) (theta(z) expressed through R_+)."""
    ap, am, nu = params.a_plus, params.a_minus, params.nu
    a = ad.sklyanin_zero_sets(params)[t]
    l = (a[0] - nu + 0.5j * ap - 0.25j * am,) + tuple(x - nu - 0.5j * ap - 0.25j * am for x in a[1:])
    z0 = 0.123 + 0.0456j
    D = ad.sklyanin_D(t, params)
    c = complex(D.coefficient(1, z0) / ad.f_delta(1, l, params)(z0))
    return c, l


def check_antiautomorphisms(params: EllipticParams, seed: int = 0, n_samples: int = 9,
                            tol: float = 1e-9) -> VerificationReport:
    """Phi_j(A_{R,+}(l)) = A_{R,+}(phi_j(l)) on D_t: sign patterns and the
    relations for twofold products taken in reversed order."""
    params.require_modular()
    zs = _samples(params, seed, n_samples)
    D = [ad.sklyanin_D(t, params) for t in range(4)]
    worst = 0.0
    notes = []
    for j in (1, 2):
        images = []
        for t in range(4):
            c, l = sklyanin_as_r_generator(t, params)
            images.append(c * ad.a_r_delta(1, ad.phi_map(l, j), params))
        for t in range(4):
            expected = ANTI_SIGNS[j][t] * D[t]
            img = ad.DifferenceOperator(D[t].eta, images[t].coeffs, D[t].mu_tag)
            r = _max_coeff_diff(img, expected, zs) / _max_coeff([D[t]], zs)
            worst = max(worst, r)
        # relations for reversed products of the images
        imgs = [ad.DifferenceOperator(D[0].eta, im.coeffs, D[0].mu_tag) for im in images]
        rev = [(lambda X, Y: ad.compose(Y, X)) for _ in range(1)][0]
        J = jacobi_structure_constants(params.eta, params)
        rels = []
        for k, l, m in CYCLIC:
            lhs = rev(imgs[0], imgs[k]) - rev(imgs[k], imgs[0])
            rhs = 1j * J[f"{l}{m}"] * (rev(imgs[l], imgs[m]) + rev(imgs[m], imgs[l]))
            rels.append((lhs, rhs))
            lhs = rev(imgs[k], imgs[l]) - rev(imgs[l], imgs[k])
            rhs = 1j * (rev(imgs[0], imgs[m]) + rev(imgs[m], imgs[0]))
            rels.append((lhs, rhs))
        norm = _max_coeff([op for pair in rels for op in pair], zs)
        rr = max(_max_coeff_diff(a, b, zs) for a, b in rels) / norm
        worst = max(worst, rr)
        notes.append(f"Phi_{j} signs {ANTI_SIGNS[j]}, reversed relations {rr:.1e}")
    return VerificationReport("anti_automorphisms", echo(params, seed), worst, tol, tuple(zs),
                              notes="; ".join(notes), seed=seed)
