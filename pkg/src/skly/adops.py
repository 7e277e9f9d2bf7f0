"""Analytic difference operators as finite maps shift index -> coefficient.

An operator ``A = sum_j c_j(z) exp(j * eta * d/dz)`` acts on a function F by
``(A F)(z) = sum_j c_j(z) F(z + j eta)``.  Coefficients are vectorised
closures; products build closure chains rather than symbolic expressions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .coeffspace import ThetaRatio, lattice_distance, make_v1
from .specfun import (
    EllipticParams,
    InvalidParams,
    _as_complex_array,
    _theta1_tau,
    g_constant,
    r_delta,
    theta1,
)

Evaluator = Callable[[np.ndarray], np.ndarray]


class StepMismatch(ValueError):
    pass


class CasimirDivergence(ValueError):
    pass


class BadXi(ValueError):
    pass


def _const(c: complex) -> Evaluator:
    c = complex(c)
    return lambda z: np.full(np.shape(z), c, dtype=complex)


def _reflect(f: Evaluator) -> Evaluator:
    return lambda z: f(-_as_complex_array(z))


@dataclass(frozen=True)
class DifferenceOperator:
    eta: complex
    coeffs: Mapping[int, Evaluator]
    mu_tag: complex | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "eta", complex(self.eta))
        object.__setattr__(self, "coeffs", dict(sorted(self.coeffs.items())))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self.coeffs)

    def coefficient(self, j: int, z):
        zz = _as_complex_array(z)
        if j not in self.coeffs:
            return np.zeros(zz.shape, dtype=complex)
        return np.asarray(self.coeffs[j](zz), dtype=complex)

    def __call__(self, F: Evaluator, z):
        return apply(self, F, z)

    def __add__(self, other: "DifferenceOperator") -> "DifferenceOperator":
        return add(self, other)

    def __sub__(self, other: "DifferenceOperator") -> "DifferenceOperator":
        return add(self, scale(other, -1))

    def __neg__(self) -> "DifferenceOperator":
        return scale(self, -1)

    def __rmul__(self, c: complex) -> "DifferenceOperator":
        return scale(self, c)

    def __mul__(self, c: complex) -> "DifferenceOperator":
        return scale(self, c)

    def __matmul__(self, other: "DifferenceOperator") -> "DifferenceOperator":
        return compose(self, other)


def identity(eta: complex, c: complex = 1.0) -> DifferenceOperator:
    return DifferenceOperator(eta, {0: _const(c)}, mu_tag=None, label="id")


def zero(eta: complex) -> DifferenceOperator:
    return DifferenceOperator(eta, {}, label="0")


def apply(A: DifferenceOperator, F: Evaluator, z):
    zz = _as_complex_array(z)
    out = np.zeros(zz.shape, dtype=complex)
    for j, c in A.coeffs.items():
        out = out + c(zz) * np.asarray(F(zz + j * A.eta), dtype=complex)
    return complex(out) if np.ndim(z) == 0 else out


def _check_steps(A: DifferenceOperator, B: DifferenceOperator) -> None:
    if abs(A.eta - B.eta) > 1e-14 * max(1.0, abs(A.eta)):
        raise StepMismatch(f"steps differ: {A.eta} vs {B.eta}")


def _tag_product(a, b):
    return None if a is None or b is None else a * b


def compose(A: DifferenceOperator, B: DifferenceOperator) -> DifferenceOperator:
    """Operator product A B: shift j + k collects a_j(z) b_k(z + j eta)."""
    _check_steps(A, B)
    eta = A.eta
    terms: dict[int, list] = {}
    for j, a in A.coeffs.items():
        for k, b in B.coeffs.items():
            terms.setdefault(j + k, []).append((j, a, b))

    def make(parts):
        def coeff(z):
            zz = _as_complex_array(z)
            out = np.zeros(zz.shape, dtype=complex)
            for j, a, b in parts:
                out = out + a(zz) * b(zz + j * eta)
            return out
        return coeff

    return DifferenceOperator(eta, {s: make(p) for s, p in terms.items()},
                              mu_tag=_tag_product(A.mu_tag, B.mu_tag))


def add(A: DifferenceOperator, B: DifferenceOperator) -> DifferenceOperator:
    _check_steps(A, B)
    coeffs = {}
    for j in sorted(set(A.coeffs) | set(B.coeffs)):
        ca, cb = A.coeffs.get(j), B.coeffs.get(j)
        if ca is None:
            coeffs[j] = cb
        elif cb is None:
            coeffs[j] = ca
        else:
            coeffs[j] = (lambda f, g: lambda z: f(z) + g(z))(ca, cb)
    tag = A.mu_tag if A.mu_tag is not None and B.mu_tag is not None and \
        abs(A.mu_tag - B.mu_tag) <= 1e-10 * abs(A.mu_tag) else None
    return DifferenceOperator(A.eta, coeffs, mu_tag=tag)


def scale(A: DifferenceOperator, c: complex) -> DifferenceOperator:
    c = complex(c)
    coeffs = {j: (lambda f: lambda z: c * f(z))(f) for j, f in A.coeffs.items()}
    return DifferenceOperator(A.eta, coeffs, mu_tag=A.mu_tag)


def commutator(A: DifferenceOperator, B: DifferenceOperator) -> DifferenceOperator:
    return compose(A, B) - compose(B, A)


def anticommutator(A: DifferenceOperator, B: DifferenceOperator) -> DifferenceOperator:
    return compose(A, B) + compose(B, A)


def reindex(A: DifferenceOperator, factor: int = 2) -> DifferenceOperator:
    """Same operator on a finer grid: step eta / factor, shift j -> factor * j."""
    return DifferenceOperator(A.eta / factor, {factor * j: c for j, c in A.coeffs.items()},
                              mu_tag=A.mu_tag, label=A.label)


def mixed_commutator_coefficients(A: DifferenceOperator, B: DifferenceOperator) -> dict:
    """Coefficients of [A, B] for operators with different steps.

    Keys are (j, k) for the total shift j * A.eta + k * B.eta, which is
    unambiguous when the two steps are independent over the integers.
    """
    out = {}
    for j, a in A.coeffs.items():
        for k, b in B.coeffs.items():
            def coeff(z, a=a, b=b, j=j, k=k):
                zz = _as_complex_array(z)
                return a(zz) * b(zz + j * A.eta) - b(zz) * a(zz + k * B.eta)
            out[(j, k)] = coeff
    return out


# ---------------------------------------------------------------------------
# generator families

def generator(f: Evaluator, eta: complex, mu_tag: complex | None = None,
              label: str = "") -> DifferenceOperator:
    """A(f) = f(z) exp(eta d/dz) + (z -> -z)."""
    return DifferenceOperator(eta, {1: f, -1: _reflect(f)}, mu_tag=mu_tag, label=label)


def a_operator(a: Sequence[complex], nu: complex, params: EllipticParams,
               prefactor: complex = 1.0) -> DifferenceOperator:
    """A(a, nu) with coefficient theta(z + a - nu) / theta(2z)."""
    f = make_v1(a, nu, params, prefactor)
    return generator(f, params.eta, mu_tag=f.mu, label="A(a,nu)")


def from_theta_ratio(f: ThetaRatio) -> DifferenceOperator:
    if f.order_k != 1:
        raise ValueError("generators need an order-1 coefficient")
    return generator(f, f.params.eta, mu_tag=f.mu)


def sklyanin_zero_sets(params: EllipticParams) -> list[tuple[complex, ...]]:
    tau = params.tau
    return [
        (0, 0.5, tau / 2, (-1 - tau) / 2),
        (0.25, -0.25, (1 + 2 * tau) / 4, (-1 - 2 * tau) / 4),
        ((1 + tau) / 4, (1 - tau) / 4, (-1 + tau) / 4, (-1 - tau) / 4),
        (tau / 4, -tau / 4, (2 + tau) / 4, (-2 - tau) / 4),
    ]


def sklyanin_prefactor(t: int, params: EllipticParams) -> complex:
    eta, tau = params.eta, params.tau
    base = 1j * params.q ** 0.25 * g_constant(params) ** -3
    if t == 0:
        return base * theta1(eta, params)
    if t == 1:
        return -base * theta1(eta + 0.5, params)
    if t == 2:
        return base * np.exp(1j * np.pi * eta) * theta1(eta + 0.5 + tau / 2, params)
    if t == 3:
        return base * np.exp(1j * np.pi * eta) * theta1(eta + tau / 2, params)
    raise ValueError(f"t must be in 0..3, got {t}")


def sklyanin_D(t: int, params: EllipticParams) -> DifferenceOperator:
    """Sklyanin generator D_t = (constant) * A(a_t, nu)."""
    op = a_operator(sklyanin_zero_sets(params)[t], params.nu, params,
                    prefactor=sklyanin_prefactor(t, params))
    return DifferenceOperator(op.eta, op.coeffs, op.mu_tag, label=f"D{t}")


def r_multiplier(l: Sequence[complex], params: EllipticParams) -> complex:
    """mu = exp(-2 pi i (sum l + 2 i a))."""
    return complex(np.exp(-2j * np.pi * (sum(complex(x) for x in l) + 2j * params.a)))


def f_delta(delta: int, l: Sequence[complex], params: EllipticParams) -> Evaluator:
    """R_delta(z + l + i a_{-delta}/4) / R_delta(2z - i a_delta / 2)."""
    params.require_modular()
    l = [complex(x) for x in l]
    if len(l) != 4:
        raise ValueError("l must have four components")
    am, ad = params.a_delta(-delta), params.a_delta(delta)

    def f(z):
        zz = _as_complex_array(z)
        num = np.ones(zz.shape, dtype=complex)
        for ln in l:
            num = num * r_delta(delta, zz + ln + 1j * am / 4, params)
        return num / r_delta(delta, 2 * zz - 1j * ad / 2, params)
    return f


def a_r_delta(delta: int, l: Sequence[complex], params: EllipticParams) -> DifferenceOperator:
    """A_{R,delta}(l; z): step i a_{-delta} / 2, coefficient f_delta(l; z)."""
    params.require_modular()
    step = 0.5j * params.a_delta(-delta)
    return generator(f_delta(delta, l, params), step, mu_tag=r_multiplier(l, params),
                     label=f"A_R{'+' if delta > 0 else '-'}")


# ---------------------------------------------------------------------------
# van Diejen operators

@dataclass(frozen=True)
class VanDiejenCouplings:
    h: tuple
    xi: complex = 0.37 + 0.11j
    delta: int = 1

    def __post_init__(self):
        h = tuple(complex(x) for x in self.h)
        if len(h) != 8:
            raise ValueError("van Diejen couplings need eight components")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "xi", complex(self.xi))
        if self.delta not in (1, -1):
            raise ValueError("delta must be +1 or -1")


def half_periods(delta: int, params: EllipticParams) -> tuple[complex, ...]:
    ad = params.a_delta(delta)
    return (0j, 0.5 + 0j, 0.5j * ad, -0.5 - 0.5j * ad)


def p_functions(h: Sequence[complex], delta: int, params: EllipticParams) -> tuple[complex, ...]:
    """p_{t,delta}(h), t = 0..3."""
    h = np.asarray([complex(x) for x in h])
    ad = params.a_delta(delta)
    R = lambda w: r_delta(delta, w, params)
    p0 = np.prod(R(h))
    p1 = np.prod(R(h - 0.5))
    p2 = np.exp(-2 * np.pi * ad) * np.prod(np.exp(-1j * np.pi * h) * R(h - 0.5j * ad))
    p3 = np.exp(-2 * np.pi * ad) * np.prod(np.exp(1j * np.pi * h) * R(h + 0.5 + 0.5j * ad))
    return tuple(complex(p) for p in (p0, p1, p2, p3))


def cal_e(t: int, delta: int, xi: complex, z, params: EllipticParams):
    a = params.a
    w = _as_complex_array(z) - half_periods(delta, params)[t]
    R = lambda u: r_delta(delta, u, params)
    return R(w + xi - 1j * a) * R(w - xi + 1j * a) / (R(w - 1j * a) * R(w + 1j * a))


def v_shift(h: Sequence[complex], delta: int, params: EllipticParams) -> Evaluator:
    """V_delta(h; z)."""
    h = [complex(x) for x in h]
    am, ad = params.a_delta(-delta), params.a_delta(delta)

    def v(z):
        zz = _as_complex_array(z)
        num = np.ones(zz.shape, dtype=complex)
        for hn in h:
            num = num * r_delta(delta, zz - hn - 0.5j * am, params)
        den = r_delta(delta, 2 * zz + 0.5j * ad, params) * \
            r_delta(delta, 2 * zz - 1j * am + 0.5j * ad, params)
        return num / den
    return v


def v_additive(couplings: VanDiejenCouplings, params: EllipticParams) -> Evaluator:
    """V_{b,delta}(h; z): each E_t term is offset by its value at omega_{t,delta}."""
    delta, xi = couplings.delta, couplings.xi
    am, ad = params.a_delta(-delta), params.a_delta(delta)
    if abs(r_delta(delta, 1j * params.a, params)) <= 1e-8:
        raise CasimirDivergence("R_delta(i a) vanishes; the additive constant diverges")
    den = 2 * r_delta(delta, xi - 0.5j * ad, params) * r_delta(delta, xi - 1j * am - 0.5j * ad, params)
    if abs(den) < 1e-10:
        raise BadXi(f"xi = {xi} hits a zero of the V_b denominator")
    p = p_functions(couplings.h, delta, params)
    omegas = half_periods(delta, params)
    offsets = [complex(cal_e(t, delta, xi, omegas[t], params)) for t in range(4)]

    def vb(z):
        zz = _as_complex_array(z)
        out = np.zeros(zz.shape, dtype=complex)
        for t in range(4):
            out = out + p[t] * (cal_e(t, delta, xi, zz, params) - offsets[t])
        return out / den
    return vb


def van_diejen(couplings: VanDiejenCouplings, params: EllipticParams,
               mu: complex | None = None) -> DifferenceOperator:
    """A_{D,delta}(h; z) = V(h; z) T^{-1} + V(h; -z) T + V_b(h; z), T = exp(i a_{-delta} d/dz)."""
    params.require_modular()
    delta = couplings.delta
    v = v_shift(couplings.h, delta, params)
    coeffs = {-1: v, 1: _reflect(v), 0: v_additive(couplings, params)}
    if mu is None:
        mu2 = np.exp(-2j * np.pi * (sum(couplings.h) + 4j * params.a))
        mu = complex(np.sqrt(mu2))
    return DifferenceOperator(1j * params.a_delta(-delta), coeffs, mu_tag=mu,
                              label=f"A_D{'+' if delta > 0 else '-'}")


def couplings_from_pair(l: Sequence[complex], m: Sequence[complex], delta: int,
                        params: EllipticParams) -> tuple[complex, ...]:
    """h_n = l_n - i a_{-delta}/4, h_{n+4} = m_n + i a_{-delta}/4."""
    s = 0.25j * params.a_delta(-delta)
    return tuple(complex(x) - s for x in l) + tuple(complex(x) + s for x in m)


def chi_map(h: Sequence[complex], j: int) -> tuple[complex, ...]:
    """chi_1(h) = -h + <zeta, h> zeta / 4; chi_2 = chi_1 + zeta / 2."""
    h = [complex(x) for x in h]
    s = sum(h) / 4
    out = [-x + s for x in h]
    if j == 2:
        out = [x + 0.5 for x in out]
    elif j != 1:
        raise ValueError("j must be 1 or 2")
    return tuple(out)


def phi_map(l: Sequence[complex], j: int) -> tuple[complex, ...]:
    """phi_1(l) = -l + <kappa, l> kappa / 2; phi_2 = phi_1 + kappa / 2."""
    l = [complex(x) for x in l]
    s = sum(l) / 2
    out = [-x + s for x in l]
    if j == 2:
        out = [x + 0.5 for x in out]
    elif j != 1:
        raise ValueError("j must be 1 or 2")
    return tuple(out)


# ---------------------------------------------------------------------------
# tensors in V (x) V

def tensor_to_operator(K: Callable, nu: complex, params: EllipticParams) -> DifferenceOperator:
    """The order-2 operator attached to K(z1, z2) in V (x) V."""
    eta, tau, pol = params.eta, params.tau, params.policy
    th = lambda w: _theta1_tau(w, tau, pol)

    def c2(z):
        zz = _as_complex_array(z)
        return K(zz - nu, zz - nu + eta) / (th(2 * zz) * th(2 * zz + 2 * eta))

    def x(z):
        return K(z - nu, -z - nu - eta) / th(-2 * z - 2 * eta)

    def c0(z):
        zz = _as_complex_array(z)
        return (x(zz) - x(-zz)) / th(2 * zz)

    return DifferenceOperator(eta, {2: c2, -2: _reflect(c2), 0: c0},
                              mu_tag=complex(np.exp(16j * np.pi * nu)), label="A_nu(K)")


def v_element(f: Callable) -> Callable:
    """Wrap a one-variable element of V for use as a tensor factor."""
    return f


def tensor_product(f: Callable, g: Callable) -> Callable:
    return lambda z1, z2: f(z1) * g(z2)


def generator_from_v(f: Callable, nu: complex, params: EllipticParams) -> DifferenceOperator:
    """A_nu(f) = f(z - nu) / theta(2z) exp(eta d/dz) + (z -> -z), f in V."""
    tau, pol = params.tau, params.policy
    coeff = lambda z: f(_as_complex_array(z) - nu) / _theta1_tau(2 * _as_complex_array(z), tau, pol)
    return generator(coeff, params.eta, mu_tag=complex(np.exp(8j * np.pi * nu)))


# ---------------------------------------------------------------------------
# comparison

@dataclass(frozen=True)
class CoefficientComparison:
    residual: float
    tolerance: float
    worst_shift: int | None

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance


def coefficients_equal(A: DifferenceOperator, B: DifferenceOperator, samples,
                       tol: float = 1e-9, scale: float | None = None) -> CoefficientComparison:
    """Max coefficient discrepancy over the union of supports, relative to the
    largest coefficient magnitude seen (or to ``scale`` when given)."""
    _check_steps(A, B)
    zz = _as_complex_array(samples)
    worst, worst_j, biggest = 0.0, None, 0.0
    for j in sorted(set(A.coeffs) | set(B.coeffs)):
        ca, cb = A.coefficient(j, zz), B.coefficient(j, zz)
        if not (np.all(np.isfinite(ca)) and np.all(np.isfinite(cb))):
            return CoefficientComparison(math.inf, tol, j)
        biggest = max(biggest, float(np.max(np.abs(ca), initial=0)), float(np.max(np.abs(cb), initial=0)))
        d = float(np.max(np.abs(ca - cb), initial=0))
        if d > worst:
            worst, worst_j = d, j
    denom = scale if scale is not None else max(biggest, 1e-300)
    return CoefficientComparison(worst / denom, tol, worst_j)


def sample_points(rng: np.random.Generator, n: int, params: EllipticParams,
                  avoid: Sequence[complex] = (), min_distance: float = 0.05,
                  tau: complex | None = None) -> np.ndarray:
    """Seeded points in the period cell, at least ``min_distance`` (cell metric)
    from every point in ``avoid``."""
    tau = params.tau if tau is None else tau
    out = []
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 10_000 * max(n, 1):
            raise RuntimeError("could not place sample points away from the avoided set")
        z = rng.uniform(-0.5, 0.5) + rng.uniform(-0.5, 0.5) * tau
        if all(lattice_distance(z - w, tau) >= min_distance for w in avoid):
            out.append(z)
    return np.asarray(out, dtype=complex)


def pole_candidates(params: EllipticParams, window: int, tau: complex | None = None,
                    eta: complex | None = None) -> list[complex]:
    """Points omega_t - l eta for t = 0..3 and |l| <= window."""
    tau = params.tau if tau is None else tau
    eta = params.eta if eta is None else eta
    omegas = (0, 0.5, 0.5 + tau / 2, tau / 2)
    return [w - ell * eta for w in omegas for ell in range(-window, window + 1)]
