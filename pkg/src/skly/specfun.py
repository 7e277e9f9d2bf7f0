"""Elliptic building blocks: Jacobi theta functions, the constant G, the
elliptic gamma function and the R-functions.

Everything is vectorised over ``z`` (scalars or numpy arrays) and evaluated
from truncated series/products.  Exactly singular points (a denominator
factor below ``policy.product_eps``) evaluate to complex NaN, which is the
flag that propagates through operator algebra and is rejected by residue and
rank routines.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

ArrayLike = Union[complex, float, np.ndarray]

NAN = complex("nan+nanj")


class InvalidParams(ValueError):
    """Parameters outside the domain where the series converge."""


@dataclass(frozen=True)
class TruncationPolicy:
    series_terms: int = 8
    product_eps: float = 1e-17
    min_im_tau: float = 0.05

    def __post_init__(self):
        if self.series_terms < 8:
            raise InvalidParams("series_terms must be >= 8")
        if not 0 < self.product_eps < 1:
            raise InvalidParams("product_eps must lie in (0, 1)")
        if self.min_im_tau <= 0:
            raise InvalidParams("min_im_tau must be positive")


DEFAULT_POLICY = TruncationPolicy()


def nu_from_mu(mu: complex) -> complex:
    """Return nu with exp(8 i pi nu) = mu and Re nu in [0, 1/4)."""
    mu = complex(mu)
    if mu == 0:
        raise InvalidParams("mu must be nonzero")
    nu = cmath.phase(mu) / (8 * math.pi) - 1j * math.log(abs(mu)) / (8 * math.pi)
    shift = math.floor(nu.real / 0.25)
    nu -= 0.25 * shift
    if nu.real >= 0.25:  # rounding at the upper edge
        nu -= 0.25
    return nu


def _normalize_nu(nu: complex) -> complex:
    nu = complex(nu)
    return nu - 0.25 * math.floor(nu.real / 0.25 + 1e-14)


@dataclass(frozen=True)
class EllipticParams:
    """Parameter bundle shared by all modules.

    The lattice is ``Z + tau Z`` with shift step ``eta``.  The modular
    parameters are tied to these by ``a_plus = -i tau`` and
    ``a_minus = -2 i eta``; ``mu = exp(8 i pi nu)``.
    """

    tau: complex
    eta: complex
    nu: complex = 0j
    policy: TruncationPolicy = field(default=DEFAULT_POLICY, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tau", complex(self.tau))
        object.__setattr__(self, "eta", complex(self.eta))
        object.__setattr__(self, "nu", complex(self.nu))
        if self.tau.imag <= self.policy.min_im_tau:
            raise InvalidParams(
                f"Im tau = {self.tau.imag:g} is below min_im_tau = {self.policy.min_im_tau:g}"
            )

    @classmethod
    def from_modular(cls, a_plus: complex, a_minus: complex, nu: complex = 0j,
                     policy: TruncationPolicy = DEFAULT_POLICY) -> "EllipticParams":
        a_plus, a_minus = complex(a_plus), complex(a_minus)
        if a_plus.real <= 0 or a_minus.real <= 0:
            raise InvalidParams("Re a_+ and Re a_- must be positive")
        return cls(tau=1j * a_plus, eta=0.5j * a_minus, nu=nu, policy=policy)

    @classmethod
    def from_mu(cls, tau: complex, eta: complex, mu: complex,
                policy: TruncationPolicy = DEFAULT_POLICY) -> "EllipticParams":
        return cls(tau=tau, eta=eta, nu=nu_from_mu(mu), policy=policy)

    # derived quantities
    @property
    def q(self) -> complex:
        return cmath.exp(1j * math.pi * self.tau)

    @property
    def mu(self) -> complex:
        return cmath.exp(8j * math.pi * self.nu)

    @property
    def a_plus(self) -> complex:
        return -1j * self.tau

    @property
    def a_minus(self) -> complex:
        return -2j * self.eta

    @property
    def a(self) -> complex:
        return (self.a_plus + self.a_minus) / 2

    @property
    def q_plus(self) -> complex:
        return cmath.exp(-math.pi * self.a_plus)

    @property
    def q_minus(self) -> complex:
        return cmath.exp(-math.pi * self.a_minus)

    def a_delta(self, delta: int) -> complex:
        return self.a_plus if delta > 0 else self.a_minus

    def q_delta(self, delta: int) -> complex:
        return self.q_plus if delta > 0 else self.q_minus

    def require_modular(self) -> None:
        if self.a_plus.real <= 0 or self.a_minus.real <= 0:
            raise InvalidParams("modular conventions need Re a_+ > 0 and Re a_- > 0 (Im eta > 0)")

    def with_(self, **changes) -> "EllipticParams":
        return replace(self, **changes)

    def modular_dual(self) -> "EllipticParams":
        """Swap a_+ and a_-: lattice Z + i a_- Z with step i a_+ / 2."""
        self.require_modular()
        return EllipticParams.from_modular(self.a_minus, self.a_plus, self.nu, self.policy)

    def as_dict(self) -> dict:
        return {
            "tau": _cstr(self.tau),
            "eta": _cstr(self.eta),
            "nu": _cstr(self.nu),
            "mu": _cstr(self.mu),
            "a_plus": _cstr(self.a_plus),
            "a_minus": _cstr(self.a_minus),
        }


def _cstr(c: complex) -> str:
    c = complex(c)
    return f"{c.real:.17g}{c.imag:+.17g}i"


def parse_complex(text: str) -> complex:
    """Parse ``"a+bi"`` style strings (also accepts ``j``)."""
    s = str(text).strip().replace(" ", "").replace("I", "i").replace("j", "i")
    if not s:
        raise ValueError("empty complex literal")
    if s.endswith("i"):
        body = s[:-1]
        if body in ("", "+", "-"):
            s = body + "1i"
    try:
        return complex(s.replace("i", "j"))
    except ValueError as exc:
        raise ValueError(f"cannot parse complex number {text!r}") from exc


def _as_complex_array(z: ArrayLike) -> np.ndarray:
    return np.asarray(z, dtype=complex)


def _unwrap(result: np.ndarray, z: ArrayLike):
    if np.ndim(z) == 0:
        return complex(result)
    return result


# ---------------------------------------------------------------------------
# theta functions

@dataclass(frozen=True)
class TruncationInfo:
    terms: int
    tail_estimate: float


def _theta_terms(tau: complex, max_abs_im_z: float, policy: TruncationPolicy) -> int:
    # Gaussian terms centred at n - 1/2 ~ -Im z / Im tau; pad until below 1e-18 relative
    im_tau = tau.imag
    width = math.sqrt(44.0 / (math.pi * im_tau))
    centre = max_abs_im_z / im_tau
    return max(policy.series_terms, int(math.ceil(centre + width)) + 2)


def _theta1_tau(z: ArrayLike, tau: complex, policy: TruncationPolicy = DEFAULT_POLICY,
                terms: int | None = None) -> np.ndarray:
    zz = _as_complex_array(z)
    if tau.imag <= policy.min_im_tau:
        raise InvalidParams(f"Im tau = {tau.imag:g} too small for the theta series")
    if terms is None:
        max_im = float(np.max(np.abs(zz.imag))) if zz.size else 0.0
        terms = _theta_terms(tau, max_im, policy)
    n = np.arange(-terms + 1, terms + 1)
    half = n - 0.5
    expo = 1j * np.pi * tau * half**2 + 1j * np.pi * (2 * n - 1) * zz[..., None]
    signs = np.where(n % 2 == 0, 1.0, -1.0)
    return 1j * np.sum(signs * np.exp(expo), axis=-1)


def theta1(z: ArrayLike, params: EllipticParams, policy: TruncationPolicy | None = None):
    """Odd Jacobi theta function theta_1(z | tau)."""
    policy = policy or params.policy
    return _unwrap(_theta1_tau(z, params.tau, policy), z)


def theta1_diagnostics(z: ArrayLike, params: EllipticParams,
                       policy: TruncationPolicy | None = None) -> TruncationInfo:
    """Terms used and magnitude of the first omitted term relative to the value."""
    policy = policy or params.policy
    zz = _as_complex_array(z)
    max_im = float(np.max(np.abs(zz.imag))) if zz.size else 0.0
    terms = _theta_terms(params.tau, max_im, policy)
    value = np.abs(_theta1_tau(zz, params.tau, policy, terms))
    tail = 0.0
    for n in (-terms, terms + 1):
        half = n - 0.5
        mag = np.exp(-np.pi * params.tau.imag * half**2 + np.pi * abs(2 * n - 1) * max_im)
        tail = max(tail, float(mag))
    scale = float(np.max(value)) if value.size else 1.0
    return TruncationInfo(terms=2 * terms, tail_estimate=tail / max(scale, 1e-300))


def theta_variant(k: int, z: ArrayLike, params: EllipticParams,
                  policy: TruncationPolicy | None = None):
    """theta_2, theta_3, theta_4 composed from theta_1 as in the standard shifts."""
    policy = policy or params.policy
    zz = _as_complex_array(z)
    tau = params.tau
    if k == 1:
        out = _theta1_tau(zz, tau, policy)
    elif k == 2:
        out = _theta1_tau(zz + 0.5, tau, policy)
    elif k == 3:
        out = params.q ** 0.25 * np.exp(1j * np.pi * zz) * _theta1_tau(zz + 0.5 + tau / 2, tau, policy)
    elif k == 4:
        w = zz + 0.5
        out = params.q ** 0.25 * np.exp(1j * np.pi * w) * _theta1_tau(w + 0.5 + tau / 2, tau, policy)
    else:
        raise ValueError(f"theta index must be in 1..4, got {k}")
    return _unwrap(out, z)


def theta_prod(args, params: EllipticParams):
    """Product notation: theta(a_1, ..., a_n) = prod theta(a_m)."""
    out = 1.0 + 0j
    for arg in args:
        out = out * theta1(arg, params)
    return out


def g_constant(params: EllipticParams, policy: TruncationPolicy | None = None) -> complex:
    """G = prod_{m >= 1} (1 - q^{2m})."""
    policy = policy or params.policy
    return _qpoch_even(params.q, policy.product_eps)


def _qpoch_even(q: complex, eps: float) -> complex:
    out = 1.0 + 0j
    qq = q * q
    p = qq
    while abs(p) > eps:
        out *= 1 - p
        p *= qq
    return out


def jacobi_structure_constants(eta: complex, params: EllipticParams) -> dict[str, complex]:
    """J_23, J_31, J_12 as functions of eta."""
    t1, t2, t3, t4 = (theta_variant(k, eta, params) for k in (1, 2, 3, 4))
    return {
        "23": (t1 * t2 / (t3 * t4)) ** 2,
        "31": -((t1 * t3 / (t2 * t4)) ** 2),
        "12": (t1 * t4 / (t2 * t3)) ** 2,
    }


# ---------------------------------------------------------------------------
# elliptic gamma and R-functions

def _check_modular(params: EllipticParams) -> None:
    try:
        params.require_modular()
    except InvalidParams:
        raise


def _odd_powers(q: complex, eps: float, boost: float) -> np.ndarray:
    powers = []
    p = q
    while abs(p) * boost > eps:
        powers.append(p)
        p *= q * q
        if len(powers) > 10_000:
            raise InvalidParams("q too close to the unit circle")
    return np.asarray(powers, dtype=complex)


def elliptic_gamma(z: ArrayLike, params: EllipticParams, policy: TruncationPolicy | None = None):
    """Elliptic gamma function G(a_+, a_-; z) with real period 1."""
    policy = policy or params.policy
    _check_modular(params)
    zz = _as_complex_array(z)
    boost = float(np.exp(2 * np.pi * np.max(np.abs(zz.imag)))) if zz.size else 1.0
    qp = _odd_powers(params.q_plus, policy.product_eps, boost)
    qm = _odd_powers(params.q_minus, policy.product_eps, boost)
    p = np.outer(qp, qm).ravel()
    p = p[np.abs(p) * boost > policy.product_eps]
    e = np.exp(2j * np.pi * zz)[..., None]
    num = 1 - p / e
    den = 1 - p * e
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.prod(num, axis=-1) / np.prod(den, axis=-1)
    near = np.min(np.abs(den), axis=-1) < policy.product_eps if p.size else np.zeros(zz.shape, bool)
    out = np.where(near, NAN, out)
    return _unwrap(out, z)


def r_delta(delta: int, z: ArrayLike, params: EllipticParams, policy: TruncationPolicy | None = None):
    """R_delta(z) = prod_k (1 - q_delta^{2k-1} e^{2 i pi z})(1 - q_delta^{2k-1} e^{-2 i pi z})."""
    policy = policy or params.policy
    _check_modular(params)
    zz = _as_complex_array(z)
    boost = float(np.exp(2 * np.pi * np.max(np.abs(zz.imag)))) if zz.size else 1.0
    p = _odd_powers(params.q_delta(delta), policy.product_eps, boost)
    e = np.exp(2j * np.pi * zz)[..., None]
    out = np.prod((1 - p * e) * (1 - p / e), axis=-1)
    return _unwrap(out, z)


def r_prod(delta: int, args, params: EllipticParams):
    out = 1.0 + 0j
    for arg in args:
        out = out * r_delta(delta, arg, params)
    return out


def kernel_function(gamma: complex, z: ArrayLike, y: ArrayLike, params: EllipticParams):
    """K(gamma; z, y) = G(+-z +-y - gamma)."""
    zz = _as_complex_array(z)
    yy = _as_complex_array(y)
    out = (elliptic_gamma(zz + yy - gamma, params) * elliptic_gamma(zz - yy - gamma, params)
           * elliptic_gamma(-zz + yy - gamma, params) * elliptic_gamma(-zz - yy - gamma, params))
    if np.ndim(out) == 0:
        return complex(out)
    return out
