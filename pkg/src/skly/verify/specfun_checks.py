"""Functional equations of theta, the elliptic gamma function and R_delta."""
from __future__ import annotations

import numpy as np

from ..specfun import (
    EllipticParams,
    elliptic_gamma,
    g_constant,
    r_delta,
    theta1,
)
from .appendix import three_term
from .report import VerificationReport, echo, relative_residual


def _points(params: EllipticParams, rng: np.random.Generator, n: int, im_scale: float) -> np.ndarray:
    return rng.uniform(-0.5, 0.5, n) + 1j * rng.uniform(-im_scale, im_scale, n)


def check_special_functions(params: EllipticParams, seed: int = 0, n_points: int = 50,
                            tol: float = 1e-8) -> list[VerificationReport]:
    rng = np.random.default_rng(seed)
    tau, q = params.tau, params.q
    th = lambda w: theta1(w, params)
    z = _points(params, rng, n_points, 0.3 * tau.imag)
    out = []

    def rep(name, res):
        out.append(VerificationReport(name, echo(params, seed), res, tol, tuple(z[:5]), seed=seed))

    rep("theta_automorphy", max(
        relative_residual(th(z + 1), -th(z), floor=0.0),
        relative_residual(th(z + tau), -np.exp(-2j * np.pi * z) / q * th(z), floor=0.0)))
    G = g_constant(params)
    rep("theta_duplication", relative_residual(
        th(2 * z),
        1j * q ** 0.25 * G ** -3 * th(z) * th(z + 0.5) * th(z + tau / 2) * th(z - 0.5 - tau / 2),
        floor=0.0))
    # 3-term identity with absolute scale = largest term
    worst = 0.0
    for _ in range(10):
        a, b, c = _points(params, rng, 3, 0.3 * tau.imag)
        terms = three_term(z, a, b, c, params)
        worst = max(worst, float(np.max(np.abs(sum(terms)))) / max(float(np.max(np.abs(t))) for t in terms))
    rep("three_term_identity", worst)

    if params.a_plus.real > 0 and params.a_minus.real > 0:
        zm = _points(params, rng, n_points, 0.15 * min(params.a_plus.real, params.a_minus.real))
        gam = lambda w: elliptic_gamma(w, params)
        res = 0.0
        for d in (1, -1):
            am, ad_ = params.a_delta(-d), params.a_delta(d)
            R = lambda w: r_delta(d, w, params)
            res = max(res, relative_residual(gam(zm + 0.5j * am) / gam(zm - 0.5j * am), R(zm), floor=0.0))
        rep("gamma_difference_equations", res)
        res_a = res_d = 0.0
        for d in (1, -1):
            ad_ = params.a_delta(d)
            R = lambda w: r_delta(d, w, params)
            res_a = max(res_a, relative_residual(R(zm + 0.5j * ad_) / R(zm - 0.5j * ad_),
                                                 -np.exp(-2j * np.pi * zm), floor=0.0))
            rhs = (R(zm + 0.25j * ad_) * R(zm - 0.25j * ad_)
                   * R(zm + 0.5 + 0.25j * ad_) * R(zm + 0.5 - 0.25j * ad_))
            res_d = max(res_d, relative_residual(R(2 * zm), rhs, floor=0.0))
        rep("r_difference_equation", res_a)
        rep("r_duplication", res_d)
        bridge = 1j * q ** 0.25 * G * np.exp(-1j * np.pi * zm) * r_delta(1, zm - tau / 2, params)
        rep("theta_r_bridge", relative_residual(th(zm), bridge, floor=0.0))
    return out
