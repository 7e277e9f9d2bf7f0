"""Command line front end: ``skly eval | check | rep | list``.

Reports are JSON with sorted keys and no timestamps, so identical configs
give byte-identical output.  Exit codes: 0 all pass, 1 any failure,
2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import adops as ad
from . import checks, repn
from .specfun import (
    EllipticParams,
    InvalidParams,
    _cstr,
    elliptic_gamma,
    g_constant,
    kernel_function,
    nu_from_mu,
    parse_complex,
    r_delta,
    theta1,
    theta1_diagnostics,
    theta_variant,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
DEFAULT_TAU = "0.9i"
DEFAULT_ETA = "0.21i"
DEFAULT_NU = "0.03"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    params: EllipticParams
    seed: int = 0
    tol: float | None = None
    samples: int = 9
    checks: list = field(default_factory=lambda: ["all"])
    output_path: str | None = None

    def resolved_checks(self) -> list[str]:
        if "all" in self.checks:
            return checks.check_names()
        unknown = [c for c in self.checks if c not in checks.REGISTRY]
        if unknown:
            raise ConfigError(f"unknown check(s): {', '.join(unknown)}")
        return sorted(set(self.checks))

    def as_dict(self) -> dict:
        return {"params": self.params.as_dict(), "seed": self.seed, "tol": self.tol,
                "samples": self.samples, "checks": self.resolved_checks()}


def _complex(text: str, name: str) -> complex:
    try:
        return parse_complex(text)
    except ValueError as exc:
        raise ConfigError(f"--{name}: {exc}") from exc


def params_from_args(args) -> EllipticParams:
    try:
        if args.a_plus is not None or args.a_minus is not None:
            if args.a_plus is None or args.a_minus is None:
                raise ConfigError("--a-plus and --a-minus go together")
            if args.tau is not None or args.eta is not None:
                raise ConfigError("give either --tau/--eta or --a-plus/--a-minus")
            base = EllipticParams.from_modular(_complex(args.a_plus, "a-plus"), _complex(args.a_minus, "a-minus"))
        else:
            base = EllipticParams(_complex(args.tau or DEFAULT_TAU, "tau"),
                                  _complex(args.eta or DEFAULT_ETA, "eta"))
        if args.mu is not None:
            nu = nu_from_mu(_complex(args.mu, "mu"))
        else:
            nu = _complex(args.nu if args.nu is not None else DEFAULT_NU, "nu")
        return base.with_(nu=nu)
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from exc


def default_tol(cli_tol: float | None) -> float | None:
    if cli_tol is not None:
        return cli_tol
    env = os.environ.get("SKLY_TOL")
    if env:
        try:
            return float(env)
        except ValueError as exc:
            raise ConfigError(f"SKLY_TOL={env!r} is not a number") from exc
    return None


def _jsonable(x):
    if isinstance(x, (complex, np.complexfloating)):
        return _cstr(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def dump(document: dict) -> str:
    return json.dumps(_jsonable(document), sort_keys=True, indent=2) + "\n"


def emit(document: dict, out: str | None) -> None:
    text = dump(document)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(config: RunConfig) -> tuple[int, dict]:
    names = config.resolved_checks()
    reports = checks.run_checks(names, config.params, config.seed, config.samples, config.tol)
    records = [r.to_record() for r in reports]
    failed = [r["name"] for r in records if r["verdict"] != "pass"]
    doc = {"config": config.as_dict(), "reports": records,
           "summary": {"total": len(records), "passed": len(records) - len(failed), "failed": failed}}
    return (EXIT_FAIL if failed else EXIT_OK), doc


# ---------------------------------------------------------------------------
# subcommands

EVAL_FUNCTIONS = ("theta1", "theta2", "theta3", "theta4", "elliptic_gamma", "r_delta",
                  "g_constant", "kernel")


def cmd_eval(args) -> int:
    params = params_from_args(args)
    z = _complex(args.z, "z")
    fn = args.function
    doc = {"function": fn, "z": z, "params": params.as_dict()}
    try:
        if fn == "theta1":
            info = theta1_diagnostics(z, params)
            doc["value"] = theta1(z, params)
            doc["truncation"] = {"terms": info.terms, "tail_estimate": info.tail_estimate}
        elif fn in ("theta2", "theta3", "theta4"):
            doc["value"] = theta_variant(int(fn[-1]), z, params)
        elif fn == "elliptic_gamma":
            doc["value"] = elliptic_gamma(z, params)
        elif fn == "r_delta":
            doc["delta"] = args.delta
            doc["value"] = r_delta(_sign(args.delta), z, params)
        elif fn == "g_constant":
            doc["value"] = g_constant(params)
        elif fn == "kernel":
            gamma, y = _complex(args.gamma, "gamma"), _complex(args.y, "y")
            doc.update(gamma=gamma, y=y, value=kernel_function(gamma, z, y, params))
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from exc
    emit(doc, args.out)
    return EXIT_OK


def _sign(text: str) -> int:
    return 1 if text in ("plus", "+", "1", "+1") else -1


def cmd_check(args) -> int:
    names = ["all"] if args.all or not args.check else args.check
    config = RunConfig(params_from_args(args), args.seed, default_tol(args.tol), args.samples, names, args.out)
    code, doc = run(config)
    emit(doc, args.out)
    return code


def cmd_rep(args) -> int:
    params = params_from_args(args)
    delta = _sign(args.delta)
    try:
        mod = repn.build_theta_module(delta, args.N, None, params, args.seed)
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from exc
    sp = repn.sklyanin_params_for_module(mod)
    rng = np.random.default_rng(args.seed)
    matrices = {}
    ok = True
    for t in range(4):
        try:
            m = repn.operator_matrix(ad.sklyanin_D(t, sp), mod)
            matrices[f"D{t}"] = {"entries": m.entries, "fit_residual": m.fit_residual}
        except repn.FitFailure as exc:
            matrices[f"D{t}"] = {"error": str(exc)}
            ok = False
    for d in (1, -1):
        l = repn.random_couplings(mod.coupling_sum, rng)
        key = f"A_R{'+' if d > 0 else '-'}"
        try:
            m = repn.operator_matrix(ad.a_r_delta(d, l, params), mod)
            matrices[key] = {"couplings": list(l), "entries": m.entries, "fit_residual": m.fit_residual}
        except repn.FitFailure as exc:
            matrices[key] = {"couplings": list(l), "error": str(exc)}
            ok = False
    rel = repn.check_matrix_relations(mod, params)
    ok = ok and rel.passed
    doc = {"module": {"delta": args.delta, "N": args.N, "dim": mod.dim, "ys": list(mod.ys),
                      "mu": mod.mu_context, "rank": mod.rank},
           "params": params.as_dict(), "seed": args.seed, "matrices": matrices,
           "relations": rel.to_record()}
    emit(doc, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_list(args) -> int:
    for name in checks.check_names():
        c = checks.REGISTRY[name]
        tag = " [needs Im eta > 0]" if c.modular else ""
        print(f"{name:22s} {c.description}{tag}")
    return EXIT_OK


def _add_params(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("parameters (complex numbers as 'a+bi')")
    g.add_argument("--tau", help=f"lattice parameter (default {DEFAULT_TAU})")
    g.add_argument("--eta", help=f"shift step (default {DEFAULT_ETA})")
    g.add_argument("--a-plus", dest="a_plus", help="modular parameter a_+ (tau = i a_+)")
    g.add_argument("--a-minus", dest="a_minus", help="modular parameter a_- (eta = i a_- / 2)")
    m = g.add_mutually_exclusive_group()
    m.add_argument("--nu", help=f"nu (default {DEFAULT_NU})")
    m.add_argument("--mu", help="multiplier mu = exp(8 i pi nu)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skly", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("eval", help="evaluate one special function")
    pe.add_argument("function", choices=EVAL_FUNCTIONS)
    pe.add_argument("--z", default="0")
    pe.add_argument("--delta", default="plus", choices=("plus", "minus"))
    pe.add_argument("--gamma", default="0")
    pe.add_argument("--y", default="0")
    _add_params(pe)
    pe.set_defaults(func=cmd_eval)

    pc = sub.add_parser("check", help="run verification checks")
    pc.add_argument("--all", action="store_true", help="run every registered check")
    pc.add_argument("--check", action="append", help="check name (repeatable)")
    pc.add_argument("--tol", type=float, help="override every identity tolerance (env SKLY_TOL)")
    pc.add_argument("--samples", type=int, default=9)
    _add_params(pc)
    pc.set_defaults(func=cmd_check)

    pr = sub.add_parser("rep", help="generator matrices on a theta module")
    pr.add_argument("--N", type=int, default=1)
    pr.add_argument("--delta", default="plus", choices=("plus", "minus"))
    _add_params(pr)
    pr.set_defaults(func=cmd_rep)

    pl = sub.add_parser("list", help="list check names")
    pl.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, KeyError) as exc:
        print(f"skly: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
