"""
bbqlab command line: theory curves, gamma estimates, RD simulation and the
verification suites, written out as CSV or JSON plot data.

  gamma     gamma1 and gamma12 against alpha for one transform
  snrloss   predicted SNR loss against alpha
  simulate  RD points with coarse and negligible q1, and the gaps between them
  verify    closed forms against their brute-force references
  bitdepth  effective bitdepth and baseband step for a list of value ranges

EXIT CODES
----------
0 on success, 1 for bad input (flags, config, unwritable output), 2 when a
verification check fails.
"""

import argparse
import dataclasses
import logging
import math
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

from analysis.gamma_cache import GammaCache
from analysis.simulation import SimulationCase, run_case
from analysis.theory import (GammaEstimator, snr_loss_from_gammas,
                             snr_loss_one_baseband, snr_loss_two_baseband)
from analysis.verify import SUITES, run_suites
from cli.manifest import RunManifest, write_json, write_table
from cli.settings import (cases_from_config, configure_logging,
                          estimator_from_config, load_config)
from coding.errors import BbqError, ConfigError, UsageError
from coding.pipeline import RDPoint
from coding.quant import baseband_step, effective_bitdepth
from coding.transform import make_transform
from sources.signals import stationary_sigma

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2

SCENARIOS = ("one_baseband", "two_baseband", "extended")
GAMMA_HEADER = ("alpha", "gamma1", "gamma1_se", "gamma12", "gamma12_se",
                "jittered", "degenerate_fraction")
RD_HEADER = ("bits_per_sample", "mse", "snr_db", "q2")
GAP_HEADER = ("q2", "alpha", "gap_db", "theory_db")


class LabArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ------------------------------------------------------------- flag types

def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def sample_count(text: str) -> int:
    value = positive_int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"need at least 2 samples, got {value}")
    return value


def float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def parse_alpha_grid(text: str) -> List[float]:
    """"a:b:step" to the inclusive grid a, a+step, ..., b."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"alpha grid must look like start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"alpha grid must be numeric, got {text!r}") from None
    if not step > 0:
        raise UsageError(f"alpha grid step must be > 0, got {step}")
    if stop < start:
        raise UsageError(f"alpha grid runs backwards: {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _alphas(args, default_grid: str) -> List[float]:
    alphas = list(args.alpha or [])
    if args.alphas:
        alphas += parse_alpha_grid(args.alphas)
    if not alphas:
        alphas = parse_alpha_grid(default_grid)
    bad = [a for a in alphas if not a >= 1.0]
    if bad:
        raise UsageError(f"alpha must be >= 1, got {bad[0]:g}")
    return alphas


def _seed(args, config: Dict[str, Any], section: str) -> int:
    """--seed when given, else the seed of that config section."""
    if args.seed is not None:
        return args.seed
    try:
        return int(config[section]["seed"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"bad {section}.seed in config: {e}") from None


def _manifest(args, config: Dict[str, Any], seeds: Sequence[int] = (), **extra) -> RunManifest:
    params = {k: v for k, v in vars(args).items() if k != "handler"}
    params.update(extra)
    return RunManifest(command=args.command, parameters=params, seeds=list(seeds))


def _emit(args, header: Sequence[str], rows: List[Sequence[Any]],
          manifest: RunManifest) -> None:
    if (args.format or "csv") == "json":
        write_json(args.out, {"manifest": manifest.to_dict(),
                              "rows": [dict(zip(header, row)) for row in rows]})
    else:
        write_table(args.out, header, rows, manifest)


def _gamma_cache(args, config: Dict[str, Any]) -> GammaCache:
    return GammaCache(args.cache or config["gamma"].get("cache_file"))


def _estimator(args, config: Dict[str, Any]) -> GammaEstimator:
    return estimator_from_config(config, samples=args.samples, m_range=args.m_range,
                                 seed=_seed(args, config, "gamma"), workers=args.workers)


def _save_cache(cache: GammaCache) -> None:
    if cache.path:
        cache.save()


# --------------------------------------------------------------- commands

def cmd_gamma(args, config: Dict[str, Any]) -> int:
    alphas = _alphas(args, config["snrloss"]["alphas"])
    block_len = args.block_len or int(config["gamma"]["block_len"])
    t = make_transform(args.transform or config["gamma"]["transform"], block_len)
    estimator = _estimator(args, config)
    cache = _gamma_cache(args, config)
    rows = []
    for alpha in alphas:
        g = cache.get_or_estimate(t, alpha, estimator)
        rows.append((alpha, g.gamma1, g.se_gamma1, g.gamma12, g.se_gamma12,
                     g.jittered, g.degenerate_fraction))
    _save_cache(cache)
    _emit(args, GAMMA_HEADER, rows,
          _manifest(args, config, [estimator.seed], transform=t.fingerprint,
                    m_range=estimator.m_range, samples=estimator.samples))
    return EXIT_OK


def cmd_snrloss(args, config: Dict[str, Any]) -> int:
    alphas = _alphas(args, config["snrloss"]["alphas"])
    scenario = args.scenario or config["snrloss"]["scenario"]
    block_len = args.block_len or int(config["gamma"]["block_len"])
    t = make_transform(args.transform or config["gamma"]["transform"], block_len)
    estimator = _estimator(args, config)
    cache = _gamma_cache(args, config)
    rows = []
    for alpha in alphas:
        if scenario == "one_baseband":
            loss = snr_loss_one_baseband(alpha)
        elif scenario == "two_baseband":
            gammas = cache.get_or_estimate(t, alpha, estimator) if alpha < 2.0 else None
            loss = snr_loss_two_baseband(alpha, gammas)
        else:
            g = cache.get_or_estimate(t, alpha, estimator)
            loss = snr_loss_from_gammas(alpha, g.gamma1, g.gamma12)
        rows.append((alpha, loss))
    _save_cache(cache)
    _emit(args, ("alpha", "snr_loss_db"), rows,
          _manifest(args, config, [estimator.seed], scenario=scenario,
                    transform=t.fingerprint))
    return EXIT_OK


def _simulation_case(args, config: Dict[str, Any]) -> SimulationCase:
    cases = cases_from_config(config)
    if args.case == "custom":
        if args.rho is None or args.block_len is None:
            raise UsageError("--case custom needs --rho and --block-len")
        sigma = args.sigma if args.sigma is not None else stationary_sigma(args.rho)
        base = SimulationCase("custom", block_len=args.block_len, rho=args.rho, sigma=sigma,
                              transform=config["simulation"]["transform"],
                              q1_fraction=float(config["simulation"]["q1_fraction"]),
                              q2_multipliers=[float(m) for m in
                                              config["simulation"]["q2_multipliers"]])
    else:
        if args.case not in cases:
            raise UsageError(f"case {args.case!r} is not defined in the config")
        base = cases[args.case]
        changes = {k: v for k, v in (("rho", args.rho), ("sigma", args.sigma),
                                      ("block_len", args.block_len)) if v is not None}
        base = dataclasses.replace(base, **changes)
    if args.transform:
        base = dataclasses.replace(base, transform=args.transform)
    if args.q2_multipliers:
        base = dataclasses.replace(base, q2_multipliers=args.q2_multipliers)
    if args.q1 is not None:
        if not args.q1 > 0:
            raise UsageError(f"--q1 must be > 0, got {args.q1}")
        base = dataclasses.replace(base, q1_fraction=args.q1 / base.sigma)
    return base


def _rd_rows(points: List[RDPoint]) -> List[Sequence[Any]]:
    return [(p.bits_per_sample, p.mse, p.snr_db, p.q2) for p in points]


def cmd_simulate(args, config: Dict[str, Any]) -> int:
    case = _simulation_case(args, config)
    sim = config["simulation"]
    blocks = args.blocks or int(sim["blocks"])
    scenario = args.scenario or sim["scenario"]
    transform = make_transform(case.transform, case.block_len)
    estimator = _estimator(args, config)
    cache = _gamma_cache(args, config)

    seed = _seed(args, config, "simulation")
    result = run_case(case, blocks=blocks, seed=seed,
                      gamma_lookup=lambda alpha: cache.get_or_estimate(transform, alpha, estimator),
                      scenario=scenario, chunk_blocks=int(sim["chunk_blocks"]))
    _save_cache(cache)
    for row in result.gaps:
        logger.info("q2=%.4g alpha=%g: gap %.3f dB, predicted %.3f dB",
                    row.q2, row.alpha, row.gap_db, row.theory_db)

    manifest = _manifest(args, config, list(dict.fromkeys((seed, estimator.seed))),
                         case=dataclasses.asdict(case), blocks=blocks,
                         scenario=scenario, transform=transform.fingerprint)
    gap_rows = [(r.q2, r.alpha, r.gap_db, r.theory_db) for r in result.gaps]
    if args.out == "-":
        if args.format == "json":
            write_json("-", {"manifest": manifest.to_dict(),
                             "gaps": [dict(zip(GAP_HEADER, r)) for r in gap_rows]})
        else:
            write_table("-", GAP_HEADER, gap_rows)
        return EXIT_OK

    stem, _ = os.path.splitext(args.out)
    if args.format == "json":
        write_json(f"{stem}.json", {
            "manifest": manifest.to_dict(),
            "coarse": [dict(zip(RD_HEADER, r)) for r in _rd_rows(result.coarse)],
            "negligible": [dict(zip(RD_HEADER, r)) for r in _rd_rows(result.negligible)],
            "gaps": [dict(zip(GAP_HEADER, r)) for r in gap_rows]})
    else:
        write_table(f"{stem}_coarse.csv", RD_HEADER, _rd_rows(result.coarse), manifest)
        write_table(f"{stem}_negligible.csv", RD_HEADER, _rd_rows(result.negligible), manifest)
        write_table(f"{stem}_gaps.csv", GAP_HEADER, gap_rows, manifest)
    return EXIT_OK


def cmd_verify(args, config: Dict[str, Any]) -> int:
    params = dict(config.get("verify", {}))
    for key, value in (("blocks", args.blocks), ("rd_blocks", args.blocks),
                       ("gamma_samples", args.samples), ("m_range", args.m_range),
                       ("workers", args.workers)):
        if value is not None:
            params[key] = value
    seed = _seed(args, config, "verify")
    checks = run_suites(args.suites or ["all"], seed=seed, params=params)
    failed = [c for c in checks if not c.passed]
    for c in checks:
        print(c.describe(), file=sys.stderr)

    manifest = _manifest(args, config, [seed], suite_parameters=params)
    if args.format == "csv":
        write_table(args.out, ("name", "value", "reference", "tolerance", "passed", "mode"),
                    [(c.name, c.value, c.reference, c.tolerance, c.passed, c.mode)
                     for c in checks], manifest)
    else:
        write_json(args.out, {"manifest": manifest.to_dict(),
                              "checks": [c.to_json() for c in checks]})
    if failed:
        logger.error("%d of %d checks failed", len(failed), len(checks))
        return EXIT_CHECK_FAILED
    logger.info("all %d checks passed", len(checks))
    return EXIT_OK


def cmd_bitdepth(args, config: Dict[str, Any]) -> int:
    source_bits = args.source_bits or int(config["bitdepth"]["source_bits"])
    ranges = args.ranges or [float(r) for r in config["bitdepth"]["ranges"]]
    rows = [(r, effective_bitdepth(r), baseband_step(source_bits, r)) for r in ranges]
    _emit(args, ("value_range", "effective_bits", "q1"), rows,
          _manifest(args, config, source_bits=source_bits))
    return EXIT_OK


# ----------------------------------------------------------------- parser

def build_parser() -> LabArgumentParser:
    common = LabArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="YAML file merged over the defaults")
    common.add_argument("--log-level", default=None,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    common.add_argument("--seed", type=int, default=None,
                        help="overrides the seed of every config section the command uses")
    common.add_argument("--format", default=None, choices=("csv", "json"),
                        help="csv (default) or json; verify defaults to json")
    common.add_argument("--workers", type=positive_int, default=None,
                        help="threads for gamma estimation (results do not depend on it)")

    gamma_flags = LabArgumentParser(add_help=False)
    gamma_flags.add_argument("--samples", type=sample_count, default=None)
    gamma_flags.add_argument("--m-range", type=positive_int, default=None)
    gamma_flags.add_argument("--transform", default=None,
                             help="rot2x2, dct, dct2d, identity or random[:seed]")
    gamma_flags.add_argument("--block-len", type=positive_int, default=None)
    gamma_flags.add_argument("--cache", default=None,
                             help="JSON file of gamma estimates reused across runs")

    alpha_flags = LabArgumentParser(add_help=False)
    alpha_flags.add_argument("--alpha", type=float, action="append",
                             help="one alpha value; repeatable")
    alpha_flags.add_argument("--alphas", default=None, help="inclusive grid start:stop:step")

    ap = LabArgumentParser(prog="bbqlab", description=__doc__.split("\n\n")[0].strip())
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma", parents=[common, gamma_flags, alpha_flags],
                       help="gamma1 and gamma12 against alpha")
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_gamma)

    p = sub.add_parser("snrloss", parents=[common, gamma_flags, alpha_flags],
                       help="SNR loss against alpha")
    p.add_argument("--scenario", default=None, choices=SCENARIOS)
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_snrloss)

    p = sub.add_parser("simulate", parents=[common, gamma_flags],
                       help="RD curves and SNR gaps on an AR(1) source")
    p.add_argument("--case", default="a", help="a, b or custom")
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--q1", type=float, default=None)
    p.add_argument("--q2-multipliers", type=float_list, default=None,
                   help="comma-separated, each >= 1 (default 8,4,2,1)")
    p.add_argument("--blocks", type=positive_int, default=None)
    p.add_argument("--scenario", default=None, choices=SCENARIOS[:2])
    p.add_argument("--out", default="rd",
                   help="output stem; '-' prints only the gap table to stdout")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("verify", parents=[common],
                       help="run verification suites; exit 2 if any check fails")
    p.add_argument("suites", nargs="*", help=f"{', '.join(SUITES)} or all (default)")
    p.add_argument("--samples", type=sample_count, default=None)
    p.add_argument("--m-range", type=positive_int, default=None)
    p.add_argument("--blocks", type=positive_int, default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("bitdepth", parents=[common],
                       help="effective bitdepth and baseband step per value range")
    p.add_argument("--source-bits", type=positive_int, default=None)
    p.add_argument("--ranges", type=float_list, default=None,
                   help="comma-separated value ranges (default 300,500,700,900)")
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_bitdepth)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        config = load_config(args.config)
        configure_logging(args.log_level or config["logging"]["level"],
                          config["logging"].get("file"))
        return args.handler(args, config)
    except BbqError as e:
        print(f"bbqlab: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"bbqlab: cannot write output: {e}", file=sys.stderr)
        return EXIT_USAGE
