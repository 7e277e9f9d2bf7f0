"""Named check registry used by the command line and the acceptance suite.

Every runner takes ``(params, seed, samples, tol)`` and returns a list of
reports; ``tol=None`` keeps each check's own tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import adops as ad
from . import repn
from .coeffspace import BadZeroSum, ContourHitsPole, DegenerateSamples
from .specfun import EllipticParams, InvalidParams
from .verify import appendix as B
from .verify import kernels as K
from .verify import sklyanin as S
from .verify.specfun_checks import check_special_functions
from .verify.report import (
    ConstraintViolated,
    DegenerateEta,
    PoleCollision,
    VerificationReport,
    echo,
)

Runner = Callable[[EllipticParams, int, int, "float | None"], list]

CHECK_ERRORS = (DegenerateEta, PoleCollision, ConstraintViolated, DegenerateSamples, ContourHitsPole,
                BadZeroSum, InvalidParams, B.RankAmbiguous, ad.CasimirDivergence, ad.BadXi,
                repn.BasisDegenerate, repn.FitFailure, repn.MultiplierMismatch, RuntimeError)


@dataclass(frozen=True)
class Check:
    name: str
    description: str
    runner: Runner
    modular: bool = False


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def coupling_sum_l(params: EllipticParams) -> complex:
    """sum l with r_multiplier(l) = mu."""
    return -2j * params.a - 4 * params.nu


def random_l(params: EllipticParams, rng: np.random.Generator) -> tuple[complex, ...]:
    return repn.random_couplings(coupling_sum_l(params), rng)


def random_h(params: EllipticParams, rng: np.random.Generator) -> tuple[complex, ...]:
    """Eight couplings with exp(-2 pi i (sum h + 4 i a)) = mu^2."""
    h = 0.3 * rng.normal(size=8) + 0.1j * rng.normal(size=8)
    h[-1] += 2 * coupling_sum_l(params) - h.sum()
    return tuple(complex(x) for x in h)


# ---------------------------------------------------------------------------
# runners

def _special(p, seed, n, tol):
    return check_special_functions(p, seed, max(n, 50), tol or 1e-8)


def _relations(p, seed, n, tol):
    return [S.check_sklyanin_relations(p, n, seed, tol or 1e-7),
            S.check_structure_constants_elliptic(p, n, seed)]


def _sklyanin_type(p, seed, n, tol):
    out = []
    rng = _rng(seed)
    for k in (2, 3):
        fs = [S.random_v1(p, rng) for _ in range(k)]
        rep = S.check_sklyanin_type(S.product_operator(fs, p.eta), k, p, seed=seed, n_samples=n,
                                    tol=tol or 1e-6)
        out.append(rep.to_report(f"sklyanin_type_product_k{k}", p, seed))
    return out


def _theorem_eta(p, seed, n, tol):
    out = [S.check_eta_quasiperiodicity(k, m, p, seed=seed, n_samples=n, tol=tol or 1e-6)
           for k in (1, 2, 3) for m in range(k + 1)]
    grid = S.eta_grid(p, 5, seed, k=3)
    out += [S.check_H_holomorphy(k, m, grid, p, seed=seed, tol=tol or 1e-7)
            for k in (2, 3) for m in range(k + 1)]
    return out


def _lemma_spaces(p, seed, n, tol):
    return [S.check_constants_in_V2(p, seed, n, tol or 1e-8),
            S.check_invariant_spaces(p, seed, n, tol or 1e-8)]


def _anti(p, seed, n, tol):
    return [S.check_antiautomorphisms(p, seed, n, tol or 1e-9)]


def _kernels_R(p, seed, n, tol):
    rng = _rng(seed)
    out = []
    for d in (1, -1):
        l = random_l(p, rng)
        g, _ = K.gamma_hat(l, p)
        out.append(K.check_kernel_identity_R(d, l, g, p, seed, max(n, 10), tol or 1e-7))
        for j in (1, 2):
            out.append(K.check_kernel_identity_corollary(d, l, j, p, seed, max(n, 10), tol or 1e-7))
    return out


def _kernels_D(p, seed, n, tol):
    rng = _rng(seed)
    out = []
    for d in (1, -1):
        h = random_h(p, rng)
        for j in (1, 2):
            out.append(K.check_kernel_identity_D(d, h, j, p, p.mu, seed, max(n, 10), tol or 1e-6))
    return out


def _vandiejen(p, seed, n, tol):
    rng = _rng(seed)
    out = []
    for d in (1, -1):
        out.append(K.check_ar2_equals_vandiejen(random_l(p, rng), random_l(p, rng), d, p, seed, n,
                                                tol or 1e-7))
        rep = K.check_van_diejen_type(random_h(p, rng), d, p, p.mu, seed, n, tol or 1e-6)
        out.append(rep.to_report(f"van_diejen_type_{'+' if d > 0 else '-'}", p, seed))
    out.append(K.check_commutativity(p, random_h(p, rng), random_h(p, rng), random_l(p, rng),
                                     random_l(p, rng), p.mu, seed, n, tol or 1e-8))
    return out


def _casimirs(p, seed, n, tol):
    return [B.check_casimirs(p, seed, n, tol or 1e-8)]


def _appendix(p, seed, n, tol):
    return B.check_appendix_B_suite(p, seed)


def _dimensions(p, seed, n, tol):
    return B.check_dimension_counts(p, seed) + [B.check_product_span_V2(p, seed)]


def _b_half(p, seed, n, tol):
    return [B.check_b_relations_half(p.with_(eta=0.5 + 0j), seed, n)]


def _modules(p, seed, n, tol):
    out = []
    for d in (1, -1):
        for N in (1, 2):
            mod = repn.build_theta_module(d, N, None, p, seed)
            out.append(repn.check_generator_invariance(mod, p, d, seed=seed, tol=tol or 1e-6))
            out.append(repn.check_modular_invariance(mod, p, seed=seed, tol=tol or 1e-6))
    mod = repn.build_theta_module(1, 1, None, p, seed)
    out.append(repn.check_matrix_relations(mod, p))
    mixed = repn.build_mixed_module(1, 1, p, seed)
    out.append(VerificationReport("mixed_module_1_1_rank", echo(p, seed), float(max(0, mixed.rank - 4)),
                                  0.5, notes=f"rank {mixed.rank} (bound 4)", seed=seed))
    for d in (1, -1):
        out.append(repn.check_generator_invariance(mixed, p, d, seed=seed, tol=tol or 1e-5))
    return out


REGISTRY: dict[str, Check] = {c.name: c for c in (
    Check("special_functions", "functional equations of theta, G and R_delta", _special),
    Check("sklyanin_relations", "quadratic relations of D_0..D_3 and ellipticity of J", _relations),
    Check("sklyanin_type", "Sklyanin-type conditions on twofold and threefold products", _sklyanin_type),
    Check("eta_dependence", "eta-quasi-periodicity of product coefficients and holomorphy of H", _theorem_eta),
    Check("coefficient_spaces", "constants in V_2(mu) and invariance of the spaces M_t", _lemma_spaces),
    Check("dimensions", "numerical ranks of V_1, V_2, V_3 and of the product span", _dimensions),
    Check("anti_automorphisms", "sign patterns of the kernel involutions on D_t", _anti, True),
    Check("kernel_identities_R", "Ruijsenaars kernel identities, both signs and both kernels", _kernels_R, True),
    Check("kernel_identities_D", "van Diejen kernel identities and E8 sums", _kernels_D, True),
    Check("van_diejen", "A_R^2 = A_D + c, Sklyanin type of A_D, modular commutativity", _vandiejen, True),
    Check("casimirs", "Casimir images by tensor and operator routes", _casimirs),
    Check("appendix_B", "relation space, image dimension, 3-term identity and I-map", _appendix),
    Check("b_relations_half", "degenerate relations at eta = 1/2", _b_half),
    Check("modules", "theta modules: invariance, modular partner, matrix relations, mixed module", _modules, True),
)}


def check_names() -> list[str]:
    return sorted(REGISTRY)


def _failed(name: str, params: EllipticParams, seed: int, err: Exception) -> VerificationReport:
    return VerificationReport(name, echo(params, seed), math.inf, 0.0,
                              notes=f"{type(err).__name__}: {err}", seed=seed)


def run_check(name: str, params: EllipticParams, seed: int = 0, samples: int = 9,
              tol: float | None = None) -> list[VerificationReport]:
    if name not in REGISTRY:
        raise KeyError(f"unknown check {name!r}")
    check = REGISTRY[name]
    try:
        if check.modular:
            params.require_modular()
        reports = check.runner(params, seed, samples, tol)
    except CHECK_ERRORS as err:
        return [_failed(name, params, seed, err)]
    return reports


def run_checks(names, params: EllipticParams, seed: int = 0, samples: int = 9,
               tol: float | None = None) -> list[VerificationReport]:
    out = []
    for name in sorted(names):
        out.extend(run_check(name, params, seed, samples, tol))
    return out
