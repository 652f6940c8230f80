"""Command-line interface: ``gen``, ``assign``, ``verify``, ``oracle``, ``cover``.

Exit codes: 0 success, 1 certification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import io as sio
from .analysis import AnalysisError, convergence_report, oracle_min_residual, partial_sums
from .assignment import AssignConfig, ConfigError, assign_signs, certify
from .blocking import plan_blocks
from .generators import FAMILIES, GeneratorError, SequenceSpec, generate
from .geometry import SECTOR_COUNT, CoverError, GeometryError, build_cone_cover, read_cover, verify_cover, write_cover
from .reduction import POLICIES

log = logging.getLogger("signbalance")

SEED_ENV = "SIGN_BALANCE_SEED"
CONFIG_KEYS = ("policy", "seed", "dim", "cover", "max_k")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    policy: str = "ordered"
    seed: int = 0
    dim: Optional[int] = None
    cover: Optional[str] = None
    max_k: int = 64


def load_config_file(path) -> dict:
    """Read ``key = value`` lines (no section header needed)."""
    parser = configparser.ConfigParser()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    parser.read_string("[run]\n" + text)
    out = dict(parser["run"])
    unknown = set(out) - set(CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys in {path}: {', '.join(sorted(unknown))}")
    return out


def resolve_config(args) -> RunConfig:
    """Flags win over the config file, which wins over the environment."""
    file_cfg = load_config_file(args.config) if args.config else {}
    cfg = RunConfig()
    env_seed = os.environ.get(SEED_ENV)
    try:
        if env_seed is not None:
            cfg.seed = int(env_seed)
        if "seed" in file_cfg:
            cfg.seed = int(file_cfg["seed"])
        if "max_k" in file_cfg:
            cfg.max_k = int(file_cfg["max_k"])
        if "dim" in file_cfg and file_cfg["dim"] != "n":
            cfg.dim = int(file_cfg["dim"])
    except ValueError as exc:
        raise UsageError(f"bad integer in configuration: {exc}") from None
    cfg.policy = file_cfg.get("policy", cfg.policy)
    cfg.cover = file_cfg.get("cover", cfg.cover)
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if cfg.policy not in POLICIES:
        raise UsageError(f"policy must be one of {POLICIES}, got {cfg.policy!r}")
    if cfg.seed < 0 or cfg.seed >= 1 << 64:
        raise UsageError("seed must fit in an unsigned 64-bit integer")
    if cfg.max_k < 0:
        raise UsageError("max-k must be >= 0")
    return cfg


def _load_cover(cfg: RunConfig, dim: int):
    if cfg.dim is not None and cfg.dim != dim:
        raise UsageError(f"--dim {cfg.dim} but the input vectors have dimension {dim}")
    if cfg.cover is None:
        return None
    return read_cover(cfg.cover)


def _distinct(*paths):
    given = [Path(p).resolve() for p in paths if p is not None]
    if len(set(given)) != len(given):
        raise UsageError("input and output paths must be distinct")


def cmd_gen(args) -> int:
    spec = SequenceSpec(args.family, args.length, args.p, args.theta, args.c, _seed(args), args.dim)
    sio.write_vectors(args.output, generate(spec))
    log.info("wrote %d vectors to %s", args.length, args.output)
    return 0


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get(SEED_ENV, "0"))


def cmd_assign(args) -> int:
    _distinct(args.input, args.signs, args.summary, args.diagnostics, args.trace)
    cfg = resolve_config(args)
    seq = sio.read_vectors(args.input)
    cover = _load_cover(cfg, seq.shape[1])
    config = AssignConfig(cfg.policy, cfg.seed, cfg.max_k, cover, keep_reductions=args.trace is not None)
    assignment, report = assign_signs(seq, config)
    sio.write_signs(args.signs, assignment.signs)
    if args.summary:
        sio.atomic_write_text(args.summary, sio.block_summary_csv(report))
    if args.diagnostics:
        trace = partial_sums(seq, assignment.signs, report.plan)
        sio.atomic_write_text(args.diagnostics, sio.diagnostics_csv(assignment.signs, trace))
    if args.trace:
        sio.atomic_write_text(args.trace, sio.trace_text(report.reductions))
    ok = certify(report)
    failed = [r.level for r in report.level_rows if not r.ok]
    print(
        f"{len(seq)} terms, {len(report.level_rows)} level blocks, "
        f"constant {report.bound_constant}: {'certified' if ok else f'FAILED at levels {failed}'}"
    )
    return 0 if ok else 1


def cmd_verify(args) -> int:
    _distinct(args.input, args.signs)
    cfg = resolve_config(args)
    seq = sio.read_vectors(args.input)
    signs = sio.read_signs(args.signs)
    if len(signs) != len(seq):
        raise UsageError(f"{len(seq)} vectors but {len(signs)} signs")
    cover = _load_cover(cfg, seq.shape[1])
    constant = cover.size if cover is not None else SECTOR_COUNT
    plan = plan_blocks(seq, cfg.max_k)
    trace = partial_sums(seq, signs, plan)
    conv = convergence_report(seq, signs, plan, constant)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sio.atomic_write_text(out / "diagnostics.csv", sio.diagnostics_csv(signs, trace))
    sio.atomic_write_text(out / "boundaries.csv", sio.boundaries_csv(conv))
    sio.atomic_write_text(out / "cauchy.csv", sio.cauchy_csv(conv))
    if not args.no_plot:
        from .plotting import render_all

        render_all(trace, conv, out)
    ok = conv.blocks_ok and conv.cauchy_ok
    finals = ", ".join(f"{k}={v:.6g}" for k, v in conv.alt_norm_finals.items())
    print(f"blocks {'ok' if conv.blocks_ok else 'FAIL'}, cauchy {'ok' if conv.cauchy_ok else 'FAIL'}; final norms {finals}")
    return 0 if ok else 1


def cmd_oracle(args) -> int:
    seq = sio.read_vectors(args.input)
    try:
        res = oracle_min_residual(seq, cap=args.cap)
    except AnalysisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"min_residual_norm={res.min_residual_norm:.17g} enumerated={res.enumerated_count}")
    if args.signs:
        sio.write_signs(args.signs, res.argmin_signs)
    else:
        sys.stdout.write(sio.signs_text(res.argmin_signs))
    return 0


def cmd_cover(args) -> int:
    try:
        cover = build_cone_cover(args.dim, args.half_angle, args.budget, _seed(args))
    except CoverError as exc:
        print(f"error: {exc} (achieved radius {exc.achieved_radius:.6g})", file=sys.stderr)
        return 1
    radius = verify_cover(cover, args.verify_samples, _seed(args) + 1)
    write_cover(args.output, cover)
    ok = radius <= cover.half_angle
    print(
        f"{cover.size} centers, verified radius {radius:.17g} rad "
        f"({math.degrees(radius):.4f} deg) {'<=' if ok else '>'} half angle"
    )
    return 0 if ok else 1


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--policy", choices=POLICIES, help="pairing policy (default ordered)")
    p.add_argument("--seed", type=int, help=f"seed for random pairing (default ${SEED_ENV} or 0)")
    p.add_argument("--max-k", dest="max_k", type=int, help="highest threshold level (default 64)")
    p.add_argument("--dim", type=int, help="expected input dimension")
    p.add_argument("--cover", help="cone cover file; required when the dimension is not 2")
    p.add_argument("--config", help="file of key = value lines: policy, seed, dim, cover, max_k")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signbalance", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a generated sequence as vector CSV")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--length", type=int, required=True)
    g.add_argument("--p", type=float, default=1.0, help="decay exponent (default 1)")
    g.add_argument("--theta", type=float, default=1.0, help="rotation step in radians (default 1)")
    g.add_argument("--c", type=float, default=1.0, help="norm of constant_rotation / ball radius (default 1)")
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--seed", type=int)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    a = sub.add_parser("assign", help="compute and certify a sign assignment")
    a.add_argument("input", help="vector CSV")
    a.add_argument("--signs", required=True, help="output signs file")
    a.add_argument("--summary", help="block summary CSV output")
    a.add_argument("--diagnostics", help="per-term diagnostics CSV output")
    a.add_argument("--trace", help="reduction trace output")
    _common(a)
    a.set_defaults(func=cmd_assign)

    v = sub.add_parser("verify", help="convergence diagnostics for vectors and signs")
    v.add_argument("input", help="vector CSV")
    v.add_argument("signs", help="signs file")
    v.add_argument("--out-dir", required=True, help="directory for CSVs and figures")
    v.add_argument("--no-plot", action="store_true", help="skip the PNG figures")
    _common(v)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="brute-force minimum residual of a small set")
    o.add_argument("input", help="vector CSV")
    o.add_argument("--cap", type=int, default=24, help="refuse inputs longer than this (default 24)")
    o.add_argument("--signs", help="write the minimizing signs here instead of stdout")
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("cover", help="build and verify a cone cover")
    c.add_argument("--dim", type=int, required=True)
    c.add_argument("--half-angle", dest="half_angle", type=float, default=math.pi / 6,
                   help="cap half angle in radians (default pi/6)")
    c.add_argument("--budget", type=int, default=200_000, help="greedy sample size")
    c.add_argument("--verify-samples", dest="verify_samples", type=int, default=1_000_000)
    c.add_argument("--seed", type=int)
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_cover)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, GeometryError, GeneratorError, sio.FormatError, AnalysisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
