"""
Command-line front end.

Subcommands:
    coordinated     single-arrival-rate Monte Carlo summary (full-CSI schemes)
    uncoordinated   single-arrival-rate design point, analysis and optional MC
    sweep           throughput-versus-arrival-rate CSV over a rate grid
    cap             closed-form quantities (capacity bound, SNR target,
                    optimizer output) in key=value form for scripting

Configuration is flat ``key=value`` lines with ``#`` comment lines;
precedence is command-line flags > config file > MA_BENCH_SEED (seed only)
> built-in defaults. Diagnostics go to stderr, data to stdout or the
output path.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .model import (COORDINATED, FDMA, NOMA, TDMA, UNCOORDINATED,
                    SystemParams, TrafficModel)
from . import sim
from . import uncoordinated as un

SCHEME_TOKENS = tuple(f"{family}-{scheme}"
                      for family in (COORDINATED, UNCOORDINATED)
                      for scheme in (FDMA, TDMA, NOMA))
MODES = ("analytic", "montecarlo", "both")
SEED_ENV_VAR = "MA_BENCH_SEED"
DEFAULT_SEED = 42

CSV_HEADER = "scheme,lambda,trials,mean_throughput_pps,ci95_halfwidth,seed,params_digest"


class ConfigError(ValueError):
    """Bad configuration; the message names the offending key or line."""


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_schemes(text) -> list[str]:
    if isinstance(text, str):
        tokens = [t.strip() for t in text.split(",") if t.strip()]
    else:
        tokens = list(text)
    for token in tokens:
        if token not in SCHEME_TOKENS:
            raise ValueError(f"unknown scheme {token!r}; choose from "
                             + ", ".join(SCHEME_TOKENS))
    if not tokens:
        raise ValueError("schemes must name at least one scheme")
    return tokens


_KEY_PARSERS = {
    "bandwidth_hz": float,
    "slot_s": float,
    "payload_bits": float,
    "ref_snr": float,
    "pathloss_exp": float,
    "min_slot_s": float,
    "min_subchannel_hz": float,
    "schemes": _parse_schemes,
    "mode": str,
    "lambda_min": float,
    "lambda_max": float,
    "lambda_steps": int,
    "trials": int,
    "master_seed": int,
    "output_path": str,
    "noma_snr_rule": str,
    "enforce_minimum": _parse_bool,
    "workers": int,
}

_PARAM_KEYS = ("bandwidth_hz", "slot_s", "payload_bits", "ref_snr",
               "pathloss_exp", "min_slot_s", "min_subchannel_hz")


@dataclass
class RunConfig:
    """Everything one invocation needs, fully validated."""

    params: SystemParams = field(default_factory=SystemParams)
    schemes: list[str] = field(default_factory=lambda: list(SCHEME_TOKENS))
    mode: str = "both"
    lambda_min: float = 1000.0
    lambda_max: float = 20000.0
    lambda_steps: int = 8
    trials: int = 10_000
    master_seed: int = DEFAULT_SEED
    output_path: str = "sweep.csv"
    noma_snr_rule: str = un.NOMINAL
    enforce_minimum: bool = False
    workers: int = 1

    def lambda_grid(self) -> list[float]:
        if self.lambda_steps == 1:
            return [self.lambda_min]
        return [float(x) for x in
                np.linspace(self.lambda_min, self.lambda_max, self.lambda_steps)]


def parse_config(file_text: str, flag_overrides: dict | None = None,
                 env: dict | None = None) -> RunConfig:
    """Build a RunConfig from file text, flag overrides and the environment.

    Precedence: flags > file > MA_BENCH_SEED (master_seed only) > defaults.
    Unknown keys and malformed lines are rejected with the line named.
    """
    env = os.environ if env is None else env
    values: dict = {}

    if SEED_ENV_VAR in env:
        try:
            values["master_seed"] = int(env[SEED_ENV_VAR])
        except ValueError:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, "
                              f"got {env[SEED_ENV_VAR]!r}")

    for lineno, raw in enumerate(file_text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KEY_PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _KEY_PARSERS[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}")

    for key, value in (flag_overrides or {}).items():
        if value is None:
            continue
        if key not in _KEY_PARSERS:
            raise ConfigError(f"unknown key {key!r}")
        try:
            values[key] = _KEY_PARSERS[key](value) if isinstance(value, str) else value
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}")

    try:
        params = SystemParams(**{k: values.pop(k) for k in _PARAM_KEYS if k in values})
    except ValueError as exc:
        raise ConfigError(str(exc))
    config = RunConfig(params=params, **values)

    if config.mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, "
                          f"got {config.mode!r}")
    if config.noma_snr_rule not in un.SNR_RULES:
        raise ConfigError("noma_snr_rule must be one of "
                          + ", ".join(un.SNR_RULES))
    if config.lambda_min < 0:
        raise ConfigError("lambda_min must be >= 0")
    if config.lambda_min > config.lambda_max:
        raise ConfigError("lambda_min exceeds lambda_max")
    if config.lambda_steps < 1:
        raise ConfigError("lambda_steps must be >= 1")
    if config.trials < 1:
        raise ConfigError("trials must be >= 1")
    if config.master_seed < 0:
        raise ConfigError("master_seed must be >= 0")
    if config.workers < 1:
        raise ConfigError("workers must be >= 1")
    config.schemes = _parse_schemes(config.schemes)
    return config


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(rows: list[sim.SweepRow], path: str) -> None:
    """Write sweep rows as CSV; byte-identical output for identical rows."""
    if not rows:
        raise ValueError("no rows to write")
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(",".join((
            row.scheme,
            _format_value(row.lam),
            str(row.trials),
            _format_value(row.mean_throughput_pps),
            _format_value(row.ci95_halfwidth),
            str(row.seed),
            row.params_digest,
        )))
    payload = "\n".join(lines) + "\n"
    try:
        with open(path, "w", newline="") as handle:
            handle.write(payload)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _scheme_configs(config: RunConfig, family: str | None = None) -> list[sim.SchemeConfig]:
    selected = []
    for token in config.schemes:
        fam, _, scheme = token.partition("-")
        if family is not None and fam != family:
            continue
        selected.append(sim.SchemeConfig(fam, scheme,
                                         enforce_minimum=config.enforce_minimum,
                                         noma_rule=config.noma_snr_rule))
    if not selected:
        raise ConfigError(f"no {family} schemes configured (schemes="
                          + ",".join(config.schemes) + ")")
    return selected


def _cmd_sweep(config: RunConfig) -> int:
    grid = config.lambda_grid()
    rows: list[sim.SweepRow] = []
    for scheme_config in _scheme_configs(config):
        if config.mode in ("analytic", "both"):
            if scheme_config.family == COORDINATED:
                if config.mode == "analytic":
                    raise ConfigError(
                        f"{scheme_config.tag}: coordinated schemes have no "
                        "closed form; use mode=montecarlo or mode=both")
            else:
                rows.extend(sim.analytic_rows(scheme_config, config.params,
                                              grid, config.master_seed))
        if config.mode in ("montecarlo", "both"):
            rows.extend(sim.run_sweep(scheme_config, config.params, grid,
                                      config.trials, config.master_seed,
                                      workers=config.workers))
    emit_csv(rows, config.output_path)
    print(f"wrote {len(rows)} rows to {config.output_path}", file=sys.stderr)
    return 0


def _cmd_coordinated(config: RunConfig, arrival_rate: float) -> int:
    if config.mode == "analytic":
        raise ConfigError("coordinated schemes have no closed form; "
                          "use mode=montecarlo or mode=both")
    traffic = TrafficModel(arrival_rate)
    print(f"arrival_rate={arrival_rate:g} packets/s  trials={config.trials}  "
          f"seed={config.master_seed}  enforce_minimum={config.enforce_minimum}")
    print(f"{'scheme':<20} {'mean_served':>12} {'throughput_pps':>15} {'ci95':>10}")
    for scheme_config in _scheme_configs(config, COORDINATED):
        outcomes = sim._trial_block(scheme_config, config.params, traffic,
                                    config.master_seed, 0, config.trials)
        stats = sim.aggregate(outcomes, config.params)
        print(f"{scheme_config.tag:<20} {stats.mean_served:>12.3f} "
              f"{stats.mean_throughput_pps:>15.3f} {stats.ci95_halfwidth_pps:>10.3f}")
    return 0


def _cmd_uncoordinated(config: RunConfig, arrival_rate: float) -> int:
    traffic = TrafficModel(arrival_rate)
    with_mc = config.mode in ("montecarlo", "both")
    print(f"arrival_rate={arrival_rate:g} packets/s  trials={config.trials}  "
          f"seed={config.master_seed}")
    header = (f"{'scheme':<20} {'access_p':>9} {'parts':>6} {'target_snr':>12} "
              f"{'E[active]':>10} {'E[tx]':>10} {'P_coll':>8} {'analytic_pps':>13}")
    if with_mc:
        header += f" {'mc_pps':>10} {'mc_ci95':>9}"
    print(header)
    for scheme_config in _scheme_configs(config, UNCOORDINATED):
        concrete = sim.resolve_design(scheme_config, config.params, traffic)
        design = concrete.design
        analysis = un.uncoordinated_throughput(design, config.params, traffic)
        target = f"{design.target_snr:.6g}" if design.target_snr else "-"
        line = (f"{concrete.tag:<20} {design.access_prob:>9.4f} "
                f"{design.partitions:>6d} {target:>12} "
                f"{analysis.expected_active:>10.2f} "
                f"{analysis.expected_transmitting:>10.2f} "
                f"{analysis.collision_prob:>8.4f} "
                f"{analysis.expected_success / config.params.slot_s:>13.3f}")
        if with_mc:
            outcomes = sim._trial_block(concrete, config.params, traffic,
                                        config.master_seed, 0, config.trials)
            stats = sim.aggregate(outcomes, config.params)
            line += (f" {stats.mean_throughput_pps:>10.3f} "
                     f"{stats.ci95_halfwidth_pps:>9.3f}")
        print(line)
    return 0


def _cmd_cap(config: RunConfig, arrival_rate: float) -> int:
    params = config.params
    traffic = TrafficModel(arrival_rate)
    print(f"noma_device_cap={_format_value(un.noma_device_cap(params))}")
    design = un.noma_design(params, traffic, config.noma_snr_rule)
    print(f"noma_target_snr={_format_value(design.target_snr)}")
    for scheme in (FDMA, TDMA):
        best = un.optimize_design(scheme, params, traffic)
        analysis = un.uncoordinated_throughput(best, params, traffic)
        print(f"{scheme}_access_prob={_format_value(best.access_prob)}")
        print(f"{scheme}_partitions={best.partitions}")
        print(f"{scheme}_expected_success_pps="
              f"{_format_value(analysis.expected_success / params.slot_s)}")
    return 0


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="key=value config file")
    parser.add_argument("--bandwidth-hz", type=float, dest="bandwidth_hz")
    parser.add_argument("--slot-s", type=float, dest="slot_s")
    parser.add_argument("--payload-bits", type=float, dest="payload_bits")
    parser.add_argument("--ref-snr", type=float, dest="ref_snr",
                        help="linear reference SNR at the cell edge")
    parser.add_argument("--pathloss-exp", type=float, dest="pathloss_exp")
    parser.add_argument("--min-slot-s", type=float, dest="min_slot_s")
    parser.add_argument("--min-subchannel-hz", type=float, dest="min_subchannel_hz")
    parser.add_argument("--schemes", dest="schemes",
                        help="comma-separated list, e.g. coordinated-noma,uncoordinated-fdma")
    parser.add_argument("--mode", choices=MODES, dest="mode")
    parser.add_argument("--lambda-min", type=float, dest="lambda_min")
    parser.add_argument("--lambda-max", type=float, dest="lambda_max")
    parser.add_argument("--lambda-steps", type=int, dest="lambda_steps")
    parser.add_argument("--trials", type=int, dest="trials")
    parser.add_argument("--master-seed", type=int, dest="master_seed")
    parser.add_argument("--output", dest="output_path", metavar="PATH")
    parser.add_argument("--noma-snr-rule", choices=un.SNR_RULES,
                        dest="noma_snr_rule")
    parser.add_argument("--enforce-minimum", action=argparse.BooleanOptionalAction,
                        dest="enforce_minimum", default=None,
                        help="pad coordinated allocations up to the partition minima")
    parser.add_argument("--workers", type=int, dest="workers")


def _load_config(args: argparse.Namespace) -> RunConfig:
    file_text = ""
    if args.config:
        try:
            with open(args.config) as handle:
                file_text = handle.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
    overrides = {key: getattr(args, key) for key in _KEY_PARSERS
                 if getattr(args, key, None) is not None}
    return parse_config(file_text, overrides)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ma-bench",
        description="Throughput models for coordinated and uncoordinated "
                    "multiple access in M2M uplinks")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("coordinated", "single-rate Monte Carlo summary of full-CSI schemes"),
            ("uncoordinated", "single-rate design point and analysis"),
            ("sweep", "throughput-versus-arrival-rate CSV"),
            ("cap", "closed-form quantities for scripting")):
        sub = subparsers.add_parser(name, help=help_text)
        _add_common_flags(sub)
        if name in ("coordinated", "uncoordinated", "cap"):
            sub.add_argument("--arrival-rate", type=float, default=None,
                             help="packets per second (default: lambda_min)")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        config = _load_config(args)
        if args.command == "sweep":
            return _cmd_sweep(config)
        rate = args.arrival_rate if args.arrival_rate is not None else config.lambda_min
        if rate < 0:
            raise ConfigError("arrival rate must be >= 0")
        if args.command == "coordinated":
            return _cmd_coordinated(config, rate)
        if args.command == "uncoordinated":
            return _cmd_uncoordinated(config, rate)
        return _cmd_cap(config, rate)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
