"""Command-line interface: ``fidlab <command> ...``.

Results go to stdout as JSON; diagnostics go to stderr. Exit codes:
0 success, 1 a sweep or self-test failed, 2 invalid input.

Input paths that do not exist are looked up among the bundled fixtures,
so ``fidlab order paper-omega.json`` works from any directory.
"""
from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import acceptance
from .algebra import DensityElement
from .car import car_level, fidelity_stability, level_of
from .channels import (apply, is_completely_positive, is_order_zero_sampled,
                       is_schwarz_sampled, is_trace_preserving)
from .config import RunConfig, load
from .errors import AlgebraMismatch, FidlabError, LevelMismatch, ValidationError
from .fidelity import (ROUTES, OptimizerConfig, bures_distance, fidelity, fidelity_routes,
                       max_disagreement)
from .harness import (CHANNEL_SOURCES, injectivity_probe, metric_sweep,
                      monotonicity_sweep, preservation_classify, write_csv)
from .predual import is_predual_positive, operator_matrix
from .sampling import random_density
from .serialize import (channel_from_json, dumps, element_from_json, load_json,
                        predual_from_json)


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("fidlab") / "fixtures" / name))


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    bundled = fixture_path(p.name)
    return bundled if bundled.exists() else p


def _density(path: str, field: str, cfg: RunConfig) -> DensityElement:
    x = element_from_json(load_json(_resolve(path), field), field)
    try:
        return DensityElement(x, psd_tol=cfg.psd_tol, trace_tol=cfg.trace_tol)
    except ValidationError as exc:
        raise type(exc)(f"{field}: {exc}") from exc


def _channel(path: str, cfg: RunConfig):
    try:
        return channel_from_json(load_json(_resolve(path), "channel"), tp_tol=cfg.tp_tol)
    except ValidationError as exc:
        raise type(exc)(f"channel: {exc}") from exc


def _pair(args, cfg):
    s = _density(args.sigma, "sigma", cfg)
    r = _density(args.rho, "rho", cfg)
    if s.algebra != r.algebra:
        raise AlgebraMismatch("sigma and rho live in different algebras")
    return s, r


# -- commands -------------------------------------------------------------------------

def cmd_fidelity(args, cfg: RunConfig) -> tuple[dict, int]:
    s, r = _pair(args, cfg)
    routes = ROUTES if args.routes == "all" else tuple(x.strip() for x in args.routes.split(","))
    unknown = set(routes) - set(ROUTES)
    if unknown:
        raise ValidationError(f"--routes: unknown route(s) {sorted(unknown)}")
    rng = np.random.default_rng(cfg.seed)
    values, diag = fidelity_routes(s, r, routes, config=OptimizerConfig.from_run_config(cfg),
                                   n_samples=cfg.n_contractions, rng=rng, psd_tol=cfg.psd_tol)
    f = fidelity(s, r, cfg.psd_tol)
    return {"fidelity": f, "routes": values, "max_disagreement": max_disagreement(values),
            "bures": bures_distance(s, r), "witness_diagnostics": diag}, 0


def cmd_bures(args, cfg):
    s, r = _pair(args, cfg)
    return {"bures": bures_distance(s, r), "fidelity": fidelity(s, r, cfg.psd_tol)}, 0


def cmd_channel_apply(args, cfg):
    ch = _channel(args.channel, cfg)
    rho = _density(args.rho, "rho", cfg)
    return {"output": apply(ch, rho)}, 0


def cmd_channel_certify(args, cfg):
    ch = _channel(args.channel, cfg)
    cp = is_completely_positive(ch, cfg.psd_tol)
    schwarz = is_schwarz_sampled(ch.dual(), args.n, seed=cfg.seed)
    order_zero = is_order_zero_sampled(ch, min(args.n, 200), seed=cfg.seed,
                                       tol=cfg.classify_tol)
    return {"completely_positive": cp, "trace_preserving": is_trace_preserving(ch, cfg.tp_tol),
            "dual_schwarz": {"verdict": schwarz.verdict, "summary": schwarz.summary,
                             "worst_violation": schwarz.worst_violation},
            "order_zero": {"verdict": order_zero.verdict, "summary": order_zero.summary,
                           "counterexample": order_zero.counterexample},
            "injectivity": injectivity_probe(ch, seed=cfg.seed)}, 0


def cmd_sweep(args, cfg):
    if args.kind == "preserve":
        if not args.channel:
            raise ValidationError("--channel is required for 'sweep preserve'")
        ch = _channel(args.channel, cfg)
        c = preservation_classify(ch, args.n, seed=cfg.seed, tol=cfg.classify_tol)
        return {"classification": c.verdict, "summary": c.summary, "n_pairs": c.n_pairs,
                "max_abs_change": c.max_abs_change, "max_increase": c.max_increase,
                "witness": c.witness, "unitary": c.unitary,
                "recovery_error": c.recovery_error,
                "injectivity": injectivity_probe(ch, seed=cfg.seed)}, 0
    if args.d < 1:
        raise ValidationError("--d must be a positive integer")
    if args.n < 1:
        raise ValidationError("--n must be a positive integer")
    if args.kind == "monotonicity":
        source = _channel(args.channel, cfg) if args.channel else args.source
        rep = monotonicity_sweep(source, args.d, args.n, seed=cfg.seed,
                                 margin_tol=cfg.margin_tol)
    else:
        rep = metric_sweep(args.d, args.n, seed=cfg.seed, tol=cfg.metric_tol)
    print(rep.summary, file=sys.stderr)
    if args.csv:
        write_csv(rep, args.csv)
    return rep.to_dict(), 0 if rep.passed else 1


def cmd_order(args, cfg):
    omega = predual_from_json(load_json(_resolve(args.omega), "omega"))
    cert = is_predual_positive(omega, cfg.psd_tol)
    ops = operator_matrix(omega, cfg.psd_tol)
    return {"predual_positive": cert.verdict, "operator_matrix_psd": ops.psd,
            "choi_min_eig": cert.min_choi_eigenvalue, "operator_min_eig": ops.min_eigenvalue,
            "operator_eigenvalues": ops.eigenvalues}, 0


def cmd_car(args, cfg):
    k = args.car_level
    alg = car_level(k, cfg.car_max_level)
    if args.sigma and args.rho:
        s, r = _pair(args, cfg)
        level_of(s)
        if s.algebra != alg:
            raise LevelMismatch(f"inputs are at level {level_of(s)}, not {k}")
    else:
        rng = np.random.default_rng(cfg.seed)
        s, r = random_density(alg, rng), random_density(alg, rng)
    values = fidelity_stability(s, r, args.depth, max_level=cfg.car_max_level)
    return {"level": k, "dim": alg.dims[0], "depth": args.depth, "fidelities": values,
            "spread": max(values) - min(values)}, 0


def cmd_selftest(args, cfg):
    try:
        only = [int(x) for x in args.only.split(",")] if args.only else None
    except ValueError:
        raise ValidationError(f"--only: expected comma-separated integers, got {args.only!r}")
    if only and any(not 1 <= k <= len(acceptance.CRITERIA) for k in only):
        raise ValidationError(f"--only: criteria are numbered 1..{len(acceptance.CRITERIA)}")
    results = []
    for k in only or range(1, len(acceptance.CRITERIA) + 1):
        res = acceptance.run_criterion(k, cfg)
        print(res.line(), file=sys.stderr, flush=True)
        results.append(res)
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed", file=sys.stderr)
    return {"passed": ok, "criteria": [{"number": r.number, "name": r.name, "pass": r.passed,
                                        "detail": r.detail} for r in results]}, 0 if ok else 1


# -- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted both before and after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="flat JSON config file (default: $FIDLAB_CONFIG)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="override the configured seed")
    p = argparse.ArgumentParser(prog="fidlab", parents=[common],
                                description="Fidelity of density elements in tracial algebras.")
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)
    sub.add_parser = add_parser

    f = sub.add_parser("fidelity", help="fidelity by one or more routes")
    f.add_argument("sigma")
    f.add_argument("rho")
    f.add_argument("--routes", default="all",
                   help="'all' or a comma list of " + ",".join(ROUTES))
    f.set_defaults(func=cmd_fidelity)

    b = sub.add_parser("bures", help="Bures distance sqrt(1 - F)")
    b.add_argument("sigma")
    b.add_argument("rho")
    b.set_defaults(func=cmd_bures)

    ch = sub.add_parser("channel", help="apply or certify a Kraus channel")
    chsub = ch.add_subparsers(dest="action", required=True)
    _chadd = chsub.add_parser
    chsub.add_parser = lambda name, **kw: _chadd(name, parents=[common], **kw)
    ap = chsub.add_parser("apply")
    ap.add_argument("channel")
    ap.add_argument("rho")
    ap.set_defaults(func=cmd_channel_apply)
    ce = chsub.add_parser("certify")
    ce.add_argument("channel")
    ce.add_argument("--n", type=int, default=1000, help="samples for sampled certificates")
    ce.set_defaults(func=cmd_channel_certify)

    sw = sub.add_parser("sweep", help="randomised property sweeps")
    sw.add_argument("kind", choices=["monotonicity", "metric", "preserve"])
    sw.add_argument("--d", type=int, default=2)
    sw.add_argument("--n", type=int, default=100)
    sw.add_argument("--source", default="random_cptp", choices=sorted(CHANNEL_SOURCES))
    sw.add_argument("--channel", help="channel JSON (required for 'preserve')")
    sw.add_argument("--csv", help="write per-trial margins to this CSV file")
    sw.set_defaults(func=cmd_sweep)

    o = sub.add_parser("order", help="predual matrix order vs operator-matrix positivity")
    o.add_argument("omega")
    o.set_defaults(func=cmd_order)

    c = sub.add_parser("car", help="fidelity stability along the CAR tower")
    c.add_argument("--car-level", type=int, default=1)
    c.add_argument("--depth", type=int, default=3)
    c.add_argument("sigma", nargs="?")
    c.add_argument("rho", nargs="?")
    c.set_defaults(func=cmd_car)

    st = sub.add_parser("selftest", help="run the acceptance suite")
    st.add_argument("--only", help="comma list of criterion numbers")
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(getattr(args, "config", None), seed=getattr(args, "seed", None))
        payload, code = args.func(args, cfg)
    except FidlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(dumps(payload) + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
