"""Coefficient spaces V_k(mu) of theta ratios, the pole products P_k and
P^(k)_m, contour residues and numerical rank of function families."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .specfun import NAN, EllipticParams, _as_complex_array, _theta1_tau, _unwrap

Evaluator = Callable[[np.ndarray], np.ndarray]

MAX_INTEGER_SHIFT = 16


class BadZeroSum(ValueError):
    pass


class ContourHitsPole(ValueError):
    pass


class DegenerateSamples(ValueError):
    pass


def pk_product(k: int, eta: complex, z, params: EllipticParams):
    """P_k(eta, z) = prod_{l=0}^{k-1} theta(2z + 2 l eta)."""
    if k < 1:
        raise IndexError("k must be >= 1")
    zz = _as_complex_array(z)
    out = np.ones_like(zz)
    for ell in range(k):
        out = out * _theta1_tau(2 * zz + 2 * ell * eta, params.tau, params.policy)
    return _unwrap(out, z)


def pkm_product(k: int, m: int, eta: complex, z, params: EllipticParams):
    """P^(k)_m: product of theta(2z + 2 l eta) over l = -m..k-m, skipping l = k - 2m."""
    if k < 1 or not 0 <= m <= k:
        raise IndexError(f"need 0 <= m <= k, got k={k}, m={m}")
    zz = _as_complex_array(z)
    out = np.ones_like(zz)
    for ell in range(-m, k - m + 1):
        if ell == k - 2 * m:
            continue
        out = out * _theta1_tau(2 * zz + 2 * ell * eta, params.tau, params.policy)
    return _unwrap(out, z)


@dataclass(frozen=True)
class ThetaRatio:
    """g(z) = prefactor * prod_i theta(z + a_i - nu) / P_k(eta, z), an element of V_k(mu)."""

    order_k: int
    prefactor: complex
    zeros: tuple
    nu: complex
    params: EllipticParams = field(repr=False)

    def __post_init__(self):
        zeros = tuple(complex(a) for a in self.zeros)
        if len(zeros) != 4 * self.order_k:
            raise ValueError(f"order {self.order_k} needs {4 * self.order_k} zeros, got {len(zeros)}")
        target = 2 * self.order_k * (self.order_k - 1) * self.params.eta
        excess = sum(zeros) - target
        shift = round(excess.real)
        if abs(excess - shift) > 1e-9:
            raise BadZeroSum(f"zero sum off target by {excess!r}")
        if abs(shift) > MAX_INTEGER_SHIFT:
            raise BadZeroSum(f"integer shift {shift} exceeds cap {MAX_INTEGER_SHIFT}")
        # rebalance the last component exactly
        zeros = zeros[:-1] + (zeros[-1] - (sum(zeros) - target),)
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "prefactor", complex(self.prefactor))
        object.__setattr__(self, "nu", complex(self.nu))

    @property
    def mu(self) -> complex:
        return np.exp(8j * np.pi * self.nu)

    def __call__(self, z):
        return evaluate(self, z)


def evaluate(f: ThetaRatio, z):
    zz = _as_complex_array(z)
    p = f.params
    num = np.full_like(zz, f.prefactor)
    for a in f.zeros:
        num = num * _theta1_tau(zz + a - f.nu, p.tau, p.policy)
    den = pk_product(f.order_k, p.eta, zz, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(np.abs(den) < p.policy.product_eps, NAN, num / den)
    return _unwrap(out, z)


def make_v1(a: Sequence[complex], nu: complex, params: EllipticParams,
            prefactor: complex = 1.0) -> ThetaRatio:
    """theta(z + a - nu) / theta(2z) with a in C^4, sum(a) = 0."""
    a = [complex(x) for x in a]
    if len(a) != 4:
        raise ValueError("need four zeros")
    if abs(sum(a)) > 1e-12:
        raise BadZeroSum(f"sum of a is {sum(a)!r}, expected 0")
    return ThetaRatio(1, prefactor, tuple(a), nu, params)


def random_theta_ratio(k: int, params: EllipticParams, rng: np.random.Generator,
                       nu: complex | None = None, spread: float = 0.5) -> ThetaRatio:
    """A generic order-k ratio with zeros drawn from a box around the origin."""
    n = 4 * k
    a = rng.uniform(-spread, spread, n) + 1j * rng.uniform(-spread, spread, n) * params.tau.imag
    a = a - a.mean() + 2 * k * (k - 1) * params.eta / n
    pref = complex(rng.normal(), rng.normal())
    return ThetaRatio(k, pref, tuple(a), params.nu if nu is None else nu, params)


# ---------------------------------------------------------------------------
# residues

@dataclass(frozen=True)
class ResidueProbe:
    center: complex
    radius: float = 0.05
    n_points: int = 64

    def nodes(self) -> np.ndarray:
        theta = 2 * np.pi * np.arange(self.n_points) / self.n_points
        return self.center + self.radius * np.exp(1j * theta)


def contour_moment(f: Evaluator, probe: ResidueProbe, power: int = 0) -> complex:
    """(1 / 2 pi i) * contour integral of (z - center)^power f(z) dz (trapezoid rule)."""
    w = probe.radius * np.exp(2j * np.pi * np.arange(probe.n_points) / probe.n_points)
    vals = np.asarray(f(probe.center + w), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise ContourHitsPole(f"flagged value on contour around {probe.center}")
    # dz = i w dtheta, so (1/2 pi i) sum f w^p i w (2 pi / n) = mean(f w^{p+1})
    return complex(np.mean(vals * w ** (power + 1)))


def residue(f: Evaluator, probe: ResidueProbe) -> complex:
    return contour_moment(f, probe, 0)


def contour_scale(f: Evaluator, probe: ResidueProbe) -> float:
    """radius * max |f| on the contour: natural size of a residue there."""
    vals = np.asarray(f(probe.nodes()), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise ContourHitsPole(f"flagged value on contour around {probe.center}")
    return float(probe.radius * np.max(np.abs(vals)))


def lattice_distance(z: complex, tau: complex) -> float:
    """Distance from z to the nearest point of Z + tau Z (cell metric)."""
    z = complex(z)
    n = round(z.imag / tau.imag)
    best = math.inf
    for dn in (-1, 0, 1):
        w = z - (n + dn) * tau
        for dm in (-1, 0, 1):
            best = min(best, abs(w - (round(w.real) + dm)))
    return best


def default_probe(center: complex, others: Sequence[complex], tau: complex,
                  n_points: int = 64, max_radius: float = 0.1) -> ResidueProbe:
    """Radius = min(max_radius, quarter distance to the nearest other pole candidate)."""
    dists = [lattice_distance(center - o, tau) for o in others]
    dists = [d for d in dists if d > 1e-12]
    r = max_radius
    if dists:
        r = min(r, 0.25 * min(dists))
    return ResidueProbe(complex(center), r, n_points)


# ---------------------------------------------------------------------------
# numerical rank

RANK_REL_THRESHOLD = 1e-8


@dataclass(frozen=True)
class RankResult:
    rank: int
    singular_values: np.ndarray

    @property
    def gap(self) -> float:
        """Ratio sigma_rank / sigma_{rank+1} (inf when the spectrum is exhausted)."""
        s = self.singular_values
        if self.rank == 0 or self.rank >= len(s):
            return math.inf
        if s[self.rank] == 0:
            return math.inf
        return float(s[self.rank - 1] / s[self.rank])


def matrix_rank(matrix: np.ndarray, rel_threshold: float = RANK_REL_THRESHOLD) -> RankResult:
    m = np.asarray(matrix, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise DegenerateSamples("evaluation matrix contains flagged values")
    # equilibrate rows so one large function does not swamp the rest
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    s = np.linalg.svd(m / norms, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return RankResult(0, s)
    return RankResult(int(np.sum(s > rel_threshold * s[0])), s)


def evaluation_matrix(fs: Sequence[Callable], sample_points) -> np.ndarray:
    """Rows = functions, columns = sample points.  Two-variable evaluators get
    sample_points as a pair of arrays (z1, z2)."""
    rows = []
    for f in fs:
        if isinstance(sample_points, tuple):
            rows.append(np.asarray(f(*sample_points), dtype=complex))
        else:
            rows.append(np.asarray(f(_as_complex_array(sample_points)), dtype=complex))
    return np.vstack(rows)


def rank_of_span(fs: Sequence[Callable], sample_points, details: bool = False):
    """Numerical rank of the span of ``fs`` from their values at ``sample_points``.

    With fewer than ``len(fs) + 4`` points the result is accepted only when the
    rank stays at least 4 below the point count, so it cannot be an artefact of
    too few samples.
    """
    npts = len(sample_points[0]) if isinstance(sample_points, tuple) else len(sample_points)
    result = matrix_rank(evaluation_matrix(fs, sample_points))
    if npts < len(fs) + 4 and result.rank > npts - 4:
        raise DegenerateSamples(f"rank {result.rank} not resolved by {npts} sample points")
    return result if details else result.rank
