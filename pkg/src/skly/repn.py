"""Finite-dimensional theta modules spanned by kernel sections, and matrices
of difference operators acting on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import adops as ad
from .coeffspace import lattice_distance, matrix_rank
from .specfun import EllipticParams, jacobi_structure_constants, r_delta
from .verify.appendix import casimir_tensor, casimir_values, k2_weights
from .verify.report import VerificationReport, echo
from .verify.sklyanin import CYCLIC

MAX_RETRIES = 5
FIT_FAILURE = 1e-4
HOLDOUT_FRACTION = 0.3


class BasisDegenerate(ValueError):
    pass


class MultiplierMismatch(ValueError):
    pass


class FitFailure(ValueError):
    pass


def kernel_section(delta: int, N: int, params: EllipticParams) -> Callable:
    """(z, y) -> prod_{k=0}^{N-1} R_delta(z +- y + (2k - N + 1) i a_{-delta} / 2)."""
    am = params.a_delta(-delta)

    def K(z, y):
        zz = np.asarray(z, dtype=complex)
        out = np.ones(zz.shape, dtype=complex)
        for k in range(N):
            s = (2 * k - N + 1) * 0.5j * am
            out = out * r_delta(delta, zz + y + s, params) * r_delta(delta, zz - y + s, params)
        return out
    return K


def mixed_section(n_plus: int, n_minus: int, params: EllipticParams) -> Callable:
    """K_-^{(N+)}(z + i N- a_- / 2, y) K_+^{(N-)}(z - i N+ a_+ / 2, y)."""
    km = kernel_section(-1, n_plus, params)
    kp = kernel_section(1, n_minus, params)
    sm, sp = 0.5j * n_minus * params.a_minus, -0.5j * n_plus * params.a_plus
    return lambda z, y: km(np.asarray(z, dtype=complex) + sm, y) * kp(np.asarray(z, dtype=complex) + sp, y)


def module_multiplier(delta: int, N: int, params: EllipticParams) -> complex:
    return complex(np.exp(-2 * N * np.pi * params.a_delta(-delta)))


def module_coupling_sum(delta: int, N: int, params: EllipticParams) -> complex:
    """sum l giving the multiplier exp(-2 N pi a_{-delta})."""
    return -2j * params.a - 1j * N * params.a_delta(-delta)


def mixed_coupling_sum(n_plus: int, n_minus: int, params: EllipticParams) -> complex:
    return -2j * params.a - 1j * (n_plus * params.a_plus + n_minus * params.a_minus)


def random_couplings(total: complex, rng: np.random.Generator, spread: float = 0.3) -> tuple[complex, ...]:
    l = spread * rng.normal(size=4) + 0.3 * spread * 1j * rng.normal(size=4)
    l[-1] += total - l.sum()
    return tuple(complex(x) for x in l)


def module_grid(params: EllipticParams, rng: np.random.Generator, n: int,
                min_distance: float = 0.05) -> np.ndarray:
    """Points in a strip around the real axis, away from the half-lattice
    pole candidates of both modular families."""
    params.require_modular()
    h = 0.25 * min(params.a_plus.real, params.a_minus.real)
    avoid = []
    for d in (1, -1):
        tau, eta = 1j * params.a_delta(d), 0.5j * params.a_delta(-d)
        avoid.append((tau, ad.pole_candidates(params, 2, tau, eta)))
    out = []
    while len(out) < n:
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(-h, h))
        if all(lattice_distance(z - w, tau) >= min_distance for tau, ws in avoid for w in ws):
            out.append(z)
    return np.asarray(out)


@dataclass
class ThetaModule:
    delta: int | None
    N: int | tuple
    ys: tuple
    sample_grid: np.ndarray
    mu_context: complex
    params: EllipticParams = field(repr=False)
    section: Callable = field(repr=False)
    coupling_sum: complex = 0j
    rank: int = 0
    gap: float = math.inf
    seed: int = 0

    @property
    def dim(self) -> int:
        return len(self.ys)

    def basis_values(self, z) -> np.ndarray:
        """Matrix with rows = points, columns = basis sections."""
        zz = np.asarray(z, dtype=complex)
        return np.stack([self.section(zz, y) for y in self.ys], axis=-1)

    def images(self, A: ad.DifferenceOperator, z) -> np.ndarray:
        zz = np.asarray(z, dtype=complex)
        return np.stack([ad.apply(A, lambda w, y=y: self.section(w, y), zz) for y in self.ys], axis=-1)


def _ys(rng: np.random.Generator, n: int, params: EllipticParams) -> tuple:
    h = 0.2 * min(params.a_plus.real, params.a_minus.real)
    while True:
        ys = [complex(rng.uniform(-0.5, 0.5), rng.uniform(-h, h)) for _ in range(n)]
        if all(abs(a - b) > 0.05 for i, a in enumerate(ys) for b in ys[i + 1:]):
            return tuple(ys)


def _rank(values: np.ndarray):
    return matrix_rank(values.T)


def build_theta_module(delta: int, N: int, ys: Sequence[complex] | None, params: EllipticParams,
                       seed: int = 0, n_grid: int | None = None) -> ThetaModule:
    if N < 1:
        raise ValueError("N must be >= 1")
    params.require_modular()
    rng = np.random.default_rng(seed)
    n_grid = n_grid or max(2 * N + 6, 4 * N + 16)
    grid = module_grid(params, rng, n_grid)
    section = kernel_section(delta, N, params)
    if ys is not None:
        ys = tuple(complex(y) for y in ys)
        if len(ys) != N + 1:
            raise ValueError(f"need {N + 1} section parameters")
        if any(abs(a - b) <= 0.05 for i, a in enumerate(ys) for b in ys[i + 1:]):
            raise ValueError("section parameters must be pairwise separated by more than 0.05")
    candidates = ys or _ys(rng, N + 1, params)
    for _ in range(MAX_RETRIES):
        mod = ThetaModule(delta, N, candidates, grid, module_multiplier(delta, N, params), params,
                          section, module_coupling_sum(delta, N, params), seed=seed)
        r = _rank(mod.basis_values(grid))
        mod.rank, mod.gap = r.rank, r.gap
        if r.rank == N + 1:
            return mod
        candidates = _ys(rng, N + 1, params)
    raise BasisDegenerate(f"no rank-{N + 1} section basis after {MAX_RETRIES} attempts")


def build_mixed_module(n_plus: int, n_minus: int, params: EllipticParams, seed: int = 0,
                       n_sections: int | None = None) -> ThetaModule:
    """Span of mixed kernel sections, reduced to an independent subset."""
    if n_plus < 1 or n_minus < 1:
        raise ValueError("N_plus and N_minus must be >= 1")
    params.require_modular()
    rng = np.random.default_rng(seed)
    bound = (n_plus + 1) * (n_minus + 1)
    n_sections = n_sections or bound + 4
    grid = module_grid(params, rng, 4 * bound + 16)
    section = mixed_section(n_plus, n_minus, params)
    ys = _ys(rng, n_sections, params)
    full = ThetaModule(None, (n_plus, n_minus), ys, grid,
                       complex(np.exp(-2 * np.pi * (n_plus * params.a_plus + n_minus * params.a_minus))),
                       params, section, mixed_coupling_sum(n_plus, n_minus, params), seed=seed)
    r = _rank(full.basis_values(grid))
    chosen: list[complex] = []
    for y in ys:
        trial = chosen + [y]
        vals = np.stack([section(grid, t) for t in trial], axis=-1)
        if _rank(vals).rank == len(trial):
            chosen = trial
        if len(chosen) == r.rank:
            break
    full.ys = tuple(chosen)
    full.rank, full.gap = r.rank, r.gap
    return full


@dataclass(frozen=True)
class OperatorMatrix:
    dim: int
    entries: np.ndarray
    fit_residual: float

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.dim, self.entries @ other.entries,
                              max(self.fit_residual, other.fit_residual))


def _split(n: int) -> tuple[np.ndarray, np.ndarray]:
    n_hold = max(1, int(round(HOLDOUT_FRACTION * n)))
    idx = np.arange(n)
    return idx[: n - n_hold], idx[n - n_hold:]


def operator_matrix(A: ad.DifferenceOperator, mod: ThetaModule, check_multiplier: bool = True,
                    fit_tol: float = FIT_FAILURE) -> OperatorMatrix:
    """M with (A b_i) = sum_j M[j, i] b_j: columns hold the images."""
    if check_multiplier and A.mu_tag is not None:
        if abs(A.mu_tag - mod.mu_context) > 1e-10 * max(1.0, abs(mod.mu_context)):
            raise MultiplierMismatch(f"operator multiplier {A.mu_tag} vs module {mod.mu_context}")
    B = mod.basis_values(mod.sample_grid)
    AB = mod.images(A, mod.sample_grid)
    fit, hold = _split(len(mod.sample_grid))
    norms = np.linalg.norm(B[fit], axis=0)
    norms[norms == 0] = 1.0
    M, *_ = np.linalg.lstsq(B[fit] / norms, AB[fit], rcond=None)
    M = M / norms[:, None]
    pred = B[hold] @ M
    denom = max(np.linalg.norm(AB[hold]), np.linalg.norm(B[hold] @ np.abs(M)), 1e-300)
    resid = float(np.linalg.norm(AB[hold] - pred) / denom)
    if not math.isfinite(resid):
        resid = math.inf
    if resid > fit_tol:
        raise FitFailure(f"held-out fit residual {resid:.3g} exceeds {fit_tol:g}")
    return OperatorMatrix(mod.dim, M, resid)


def section_symmetry_residual(mod: ThetaModule) -> float:
    """Evenness and 1-periodicity of every section on the grid."""
    z = mod.sample_grid
    v = mod.basis_values(z)
    scale = float(np.max(np.abs(v)))
    d = max(float(np.max(np.abs(mod.basis_values(-z) - v))),
            float(np.max(np.abs(mod.basis_values(z + 1) - v))))
    return d / scale


def sklyanin_params_for_module(mod: ThetaModule) -> EllipticParams:
    """Bundle whose D_t act on Theta_{N,delta}: nu = N eta / 2 on the delta lattice."""
    p = mod.params if mod.delta == 1 else mod.params.modular_dual()
    return p.with_(nu=mod.N * p.eta / 2)


def _norm_rel(lhs: np.ndarray, rhs: np.ndarray, scale: float) -> float:
    return float(np.linalg.norm(lhs - rhs, 2)) / max(scale, 1e-300)


def check_matrix_relations(mod: ThetaModule, params: EllipticParams | None = None, tol: float = 1e-6,
                           casimir_tol: float = 1e-5) -> VerificationReport:
    """The quadratic relations and the Casimir values as matrix identities on the module."""
    if mod.delta is None:
        raise ValueError("matrix relations are checked on single modules")
    sp = sklyanin_params_for_module(mod)
    S = [operator_matrix(ad.sklyanin_D(t, sp), mod).entries for t in range(4)]
    J = jacobi_structure_constants(sp.eta, sp)
    pairs = []
    for k, l, m in CYCLIC:
        pairs.append((S[0] @ S[k] - S[k] @ S[0], 1j * J[f"{l}{m}"] * (S[l] @ S[m] + S[m] @ S[l])))
        pairs.append((S[k] @ S[l] - S[l] @ S[k], 1j * (S[0] @ S[m] + S[m] @ S[0])))
    scale = max(max(np.linalg.norm(a, 2), np.linalg.norm(b, 2)) for a, b in pairs)
    rel = max(_norm_rel(a, b, scale) for a, b in pairs)
    trace = max(abs(np.trace(a)) for a, _ in pairs[::2]) / scale

    eye = np.eye(mod.dim)
    v0, v2 = casimir_values(sp)
    w = k2_weights(sp)
    C0 = sum(s @ s for s in S)
    C2 = w[0] * S[1] @ S[1] + w[1] * S[2] @ S[2] + w[2] * S[3] @ S[3]
    A0 = operator_matrix(ad.tensor_to_operator(casimir_tensor(0.0, sp), sp.nu, sp), mod,
                         check_multiplier=False).entries
    A2 = operator_matrix(ad.tensor_to_operator(casimir_tensor(sp.eta, sp), sp.nu, sp), mod,
                         check_multiplier=False).entries
    cas = max(_norm_rel(C0, v0 * eye, abs(v0)), _norm_rel(C2, v2 * eye, abs(v2)),
              _norm_rel(A0, v0 * eye, abs(v0)), _norm_rel(A2, v2 * eye, abs(v2)))
    worst = max(rel / tol, trace / tol, cas / casimir_tol)
    notes = (f"relations {rel:.1e}; commutator traces {trace:.1e}; Casimir matrices {cas:.1e} "
             f"(K0 = {v0:.6g}, K2 = {v2:.6g})")
    return VerificationReport(f"matrix_relations_N{mod.N}_{'+' if mod.delta > 0 else '-'}",
                              echo(sp, mod.seed, N=mod.N), worst, 1.0, tuple(mod.sample_grid),
                              notes=notes, seed=mod.seed,
                              extra={"relations": rel, "trace": trace, "casimir": cas})


def check_generator_invariance(mod: ThetaModule, params: EllipticParams, delta_gen: int,
                               n_ops: int = 3, seed: int = 0, tol: float = 1e-6) -> VerificationReport:
    """Max held-out fit residual of A_{R,delta_gen}(l) on the module, for random
    l at the module's multiplier."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = 0
    for _ in range(n_ops):
        l = random_couplings(mod.coupling_sum, rng)
        A = ad.a_r_delta(delta_gen, l, params)
        try:
            worst = max(worst, operator_matrix(A, mod).fit_residual)
        except FitFailure:
            worst, failures = math.inf, failures + 1
    which = "native" if delta_gen == mod.delta else "partner"
    if mod.delta is None:
        which = "+" if delta_gen > 0 else "-"
        name = f"mixed_module_{mod.N[0]}_{mod.N[1]}_generators_{which}"
    else:
        name = f"module_N{mod.N}_{'+' if mod.delta > 0 else '-'}_{which}_generators"
    return VerificationReport(name, echo(params, seed, N=str(mod.N)), worst, tol, tuple(mod.sample_grid),
                              notes=f"{n_ops} generators; fit failures {failures}; rank {mod.rank}",
                              seed=seed)


def check_modular_invariance(mod: ThetaModule, params: EllipticParams, n_ops: int = 3, seed: int = 0,
                             tol: float = 1e-6) -> VerificationReport:
    return check_generator_invariance(mod, params, -mod.delta, n_ops, seed, tol)
