"""Command-line entry point: ``swashmass {simulate,sizing,verify}``.

Exit codes: 0 success, 1 configuration or input error, 2 simulation
diverged, 3 determinism re-run mismatch, 4 a verify check failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from . import verify as verify_mod
from .config import load_config
from .errors import ConfigError, Diverged, SwashMassError
from .sim import MODELS, rmse, run_closed_loop, summary_json
from .sizing import phi_max_surface, pitch_response
from .vehicle import DesignParams

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_NONDETERMINISTIC, EXIT_CHECK_FAILED = 0, 1, 2, 3, 4


def _out_dir(args, cfg) -> Path:
    out = Path(args.out) if args.out else Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.model:
        cfg = dataclasses.replace(cfg, model=args.model)
    gains = cfg.gains()
    sim_cfg = cfg.sim_config()
    reference = cfg.reference()
    out = _out_dir(args, cfg)
    try:
        log = run_closed_loop(sim_cfg, gains, reference)
    except Diverged as exc:
        if exc.log is not None:
            exc.log.to_csv(out / "trace.csv")
            (out / "summary.json").write_text(summary_json(exc.log), encoding="utf-8")
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    text = log.csv_text()
    (out / "trace.csv").write_text(text, encoding="utf-8")
    (out / "summary.json").write_text(summary_json(log), encoding="utf-8")
    for axis in log.active_axes:
        print(f"RMSE_{axis} = {rmse(log, axis):.4f} m")
    print(f"RMSE_overall = {rmse(log, 'overall'):.4f} m")
    print(f"wrote {out / 'trace.csv'} and {out / 'summary.json'}")
    if args.seed_check:
        again = run_closed_loop(sim_cfg, gains, reference).csv_text()
        if again != text:
            print("determinism check FAILED: re-run trace differs", file=sys.stderr)
            return EXIT_NONDETERMINISTIC
        print("determinism check passed: re-run trace is byte-identical")
    return EXIT_OK


def cmd_sizing(args) -> int:
    cfg = load_config(args.config)
    s = cfg.sizing
    out = _out_dir(args, cfg)
    sweep = phi_max_surface(
        s.betas, s.Ls, s.amplitude, s.period, s.Tf, s.dt, M=cfg.params.M, g=cfg.params.g
    )
    (out / "surface.csv").write_text(sweep.csv_text(), encoding="utf-8")
    for beta, L in s.traces:
        params = DesignParams.from_beta(beta, L, M=cfg.params.M, g=cfg.params.g)
        resp = pitch_response(params, s.amplitude, s.period, s.Tf, s.dt)
        lines = ["t,ell_y,phi_deg"]
        lines += [
            f"{t:.12g},{e:.12g},{math.degrees(p):.12g}" for t, e, p in zip(resp.t, resp.ell, resp.phi)
        ]
        (out / f"response_beta{beta:g}_L{L:g}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    report = {
        "cells": int(sweep.phi_max.size),
        "monotone_in_beta": sweep.monotone_in_beta(),
        "monotone_in_L": sweep.monotone_in_L(),
    }
    (out / "summary.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {out / 'surface.csv'} ({report['cells']} cells)")
    print(f"monotone in beta: {report['monotone_in_beta']}; monotone in L: {report['monotone_in_L']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify_mod.run_checks()
    print(verify_mod.format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swashmass", description="Swash-mass UAV simulation tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="closed-loop trajectory tracking run")
    p.add_argument("--config", default="linear", help="config file or bundled preset name")
    p.add_argument("--out", help="output directory (overrides [output] dir)")
    p.add_argument("--model", choices=MODELS, help="override the plant model")
    p.add_argument("--seed-check", action="store_true", help="re-run and require a byte-identical trace")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sizing", help="peak pitch sweep over (beta, L)")
    p.add_argument("--config", default="sizing", help="config file or bundled preset name")
    p.add_argument("--out", help="output directory (overrides [output] dir)")
    p.set_defaults(func=cmd_sizing)

    p = sub.add_parser("verify", help="run the fast invariant checks")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SwashMassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
