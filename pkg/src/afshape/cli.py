"""Command-line front end: configure a solve, run it, export artifacts.

A run writes six files into --out (plus trace.json when --verbose):

    code.csv        index, phase_rad, re, im (17 significant digits)
    af_grid.csv     |r| magnitude grid, lags as rows, Doppler bins as columns
    af_grid_db.csv  the same grid in mainlobe-referenced dB
    trace.csv       outer_iter, C, m2_objective
    report.json     before/after region reports and the suppression figure
    manifest.json   config echo, version, timestamps, file paths, headline numbers

Settings come from flags, from a JSON config file (--config), or both;
flags win over file values, and AFSHAPE_SEED supplies the seed when
neither does. Exit codes: 0 success, 2 configuration error, 3 numerical
failure (partial outputs are removed on failure).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .af_core import CodeSequence, RegionSpec, af_grid
from .metrics import compare
from .reformulation import LoadingError
from .solver import SolverConfig, init_random_code, run

logger = logging.getLogger("afshape")


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


_CONFIG_KEYS = {"n", "k", "p", "gamma1", "gamma2", "epsilon", "seed",
                "zeta_policy", "delta", "gamma_x_mode", "inner_epsilon"}
_OUTPUT_NAMES = {
    "code": "code.csv",
    "af_grid": "af_grid.csv",
    "af_grid_db": "af_grid_db.csv",
    "trace": "trace.csv",
    "report": "report.json",
    "manifest": "manifest.json",
}


@dataclass
class RunManifest:
    """Everything needed to identify and reproduce one finished run."""

    config: dict
    tool_version: str
    started: str
    finished: str
    outputs: dict
    final_c: float
    suppression_db: float

    def to_json_dict(self) -> dict:
        return {
            "config": dict(self.config),
            "tool_version": self.tool_version,
            "started": self.started,
            "finished": self.finished,
            "outputs": dict(self.outputs),
            "final_c": self.final_c,
            "suppression_db": self.suppression_db,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "RunManifest":
        fields = {"config", "tool_version", "started", "finished", "outputs",
                  "final_c", "suppression_db"}
        unknown = set(data) - fields
        if unknown:
            raise ValueError(f"unknown manifest keys: {sorted(unknown)}")
        return cls(**{name: data[name] for name in fields})


def _parse_int(token: str, field_name: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ConfigError(f"{field_name}: expected an integer, got {token!r}") from None


def _parse_index_text(text: str, field_name: str) -> list:
    items = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            raise ConfigError(f"{field_name}: empty entry in {text!r}")
        if ".." in token:
            lo_text, hi_text = token.split("..", 1)
            lo = _parse_int(lo_text, field_name)
            hi = _parse_int(hi_text, field_name)
            if lo > hi:
                raise ConfigError(f"{field_name}: inclusive range {token!r} is empty")
            items.extend(range(lo, hi + 1))
        else:
            items.append(_parse_int(token, field_name))
    return items


def parse_index_set(value, field_name: str) -> tuple:
    """Accept an int list, "5,6,7", or inclusive ranges like "-15..-13,11..14"."""
    if isinstance(value, str):
        items = _parse_index_text(value, field_name)
    elif isinstance(value, (list, tuple)):
        items = []
        for entry in value:
            if isinstance(entry, str):
                items.extend(_parse_index_text(entry, field_name))
            elif isinstance(entry, bool):
                raise ConfigError(f"{field_name}: entries must be integers, got {entry!r}")
            elif isinstance(entry, int):
                items.append(entry)
            else:
                raise ConfigError(f"{field_name}: entries must be integers or range "
                                  f"strings, got {entry!r}")
    elif isinstance(value, int) and not isinstance(value, bool):
        items = [value]
    else:
        raise ConfigError(f"{field_name}: expected integers or range strings, got {value!r}")
    if not items:
        raise ConfigError(f"{field_name}: index set must be nonempty")
    return tuple(sorted(set(items)))


def load_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afshape",
        description="Design slow-time radar codes whose ambiguity function is "
                    "suppressed over chosen delay/Doppler regions.",
    )
    parser.add_argument("--n", type=int, help="code length (number of chirps)")
    parser.add_argument("--k", help="delay lags, e.g. '5,6,7' or '5..7'")
    parser.add_argument("--p", help="Doppler bins, e.g. '-15..-13,11..14'")
    parser.add_argument("--gamma1", type=int, help="max outer iterations (default 1000)")
    parser.add_argument("--gamma2", type=int,
                        help="inner power-method iterations per outer step (default 500)")
    parser.add_argument("--epsilon", type=float,
                        help="relative stopping tolerance on the region energy (default 1e-6)")
    parser.add_argument("--seed", type=int,
                        help="RNG seed for the initial code (default: AFSHAPE_SEED, then 0)")
    parser.add_argument("--zeta-policy", dest="zeta_policy", choices=("exact", "bound"),
                        help="loading level policy (default exact)")
    parser.add_argument("--delta", type=float, help="loading margin (default 0.01)")
    parser.add_argument("--out", default="afshape_out",
                        help="output directory (default ./afshape_out)")
    parser.add_argument("--config", help="JSON config file; flags override file values")
    parser.add_argument("--dry-run", action="store_true",
                        help="validate the configuration, print it, and exit")
    parser.add_argument("--verbose", action="store_true",
                        help="log progress and record the inner-iteration objective trace")
    return parser


_REGION_FLAGS = ("--k", "--p")


def _merge_negative_values(argv) -> list:
    """Join '--k'/'--p' with a following negative-looking value.

    argparse refuses values like '-15..-13,11..14' after a space because
    they look like option strings; folding them into the '--flag=value'
    form keeps the documented syntax working.
    """
    out = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if (token in _REGION_FLAGS and i + 1 < len(argv)
                and argv[i + 1].startswith("-") and not argv[i + 1].startswith("--")):
            out.append(f"{token}={argv[i + 1]}")
            i += 2
        else:
            out.append(token)
            i += 1
    return out


def resolve_config(args: argparse.Namespace, env=None) -> SolverConfig:
    """Merge config file, flags, and environment into a SolverConfig."""
    env = os.environ if env is None else env
    merged = load_config_file(args.config) if args.config else {}
    for name in ("n", "gamma1", "gamma2", "epsilon", "seed", "delta",
                 "zeta_policy", "k", "p"):
        value = getattr(args, name)
        if value is not None:
            merged[name] = value
    if "seed" not in merged and "AFSHAPE_SEED" in env:
        raw = env["AFSHAPE_SEED"]
        try:
            merged["seed"] = int(raw)
        except ValueError:
            raise ConfigError(f"AFSHAPE_SEED must be an integer, got {raw!r}") from None
    for required in ("n", "k", "p"):
        if required not in merged:
            raise ConfigError(f"missing required setting {required!r} (give a flag or a config file)")
    delays = parse_index_set(merged.pop("k"), "k")
    dopplers = parse_index_set(merged.pop("p"), "p")
    try:
        region = RegionSpec(delays=delays, dopplers=dopplers)
        return SolverConfig(n=merged.pop("n"), region=region, **merged)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(argv=None, env=None):
    """Parse argv into a validated SolverConfig plus the raw namespace."""
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_merge_negative_values(argv))
    return resolve_config(args, env=env), args


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _write_code_csv(x: CodeSequence, path: Path) -> None:
    values = x.values
    lines = ["index,phase_rad,re,im"]
    for i, (phase, value) in enumerate(zip(x.phases, values)):
        lines.append(f"{i},{phase:.17g},{value.real:.17g},{value.imag:.17g}")
    path.write_text("\n".join(lines) + "\n")


def _log_outer(state) -> None:
    t = state.outer_iter
    if t == 1 or t % 50 == 0:
        logger.info("outer %4d: C=%.6e  M2=%.6e", t,
                     state.trace.c_values[-1], state.trace.m2_values[-1])


def run_and_export(config: SolverConfig, outdir, verbose: bool = False) -> RunManifest:
    """Solve, evaluate, and write every run artifact into outdir.

    Any failure after files have started to appear removes the partial
    outputs before the exception propagates.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    started = _utc_now()
    if verbose:
        logger.info("starting solve: n=%d, region %dx%d, gamma1=%d, gamma2=%d",
                    config.n, len(config.region.delays), len(config.region.dopplers),
                    config.gamma1, config.gamma2)
    x_final, trace = run(config, collect_inner=verbose,
                         on_outer=_log_outer if verbose else None)
    x_initial = init_random_code(config.n, config.seed)
    comparison = compare(x_initial, x_final, config.region)
    grid = af_grid(x_final)

    paths = {name: outdir / fname for name, fname in _OUTPUT_NAMES.items()}
    if verbose:
        paths["trace_json"] = outdir / "trace.json"
    written = []
    try:
        _write_code_csv(x_final, paths["code"])
        written.append(paths["code"])
        grid.to_csv(paths["af_grid"])
        written.append(paths["af_grid"])
        grid.to_csv(paths["af_grid_db"], db=True)
        written.append(paths["af_grid_db"])
        trace.to_csv(paths["trace"])
        written.append(paths["trace"])
        _write_json(paths["report"], comparison.to_json_dict())
        written.append(paths["report"])
        if verbose:
            _write_json(paths["trace_json"], trace.to_json_dict())
            written.append(paths["trace_json"])
        manifest = RunManifest(
            config=config.to_json_dict(),
            tool_version=__version__,
            started=started,
            finished=_utc_now(),
            outputs={name: str(path.resolve()) for name, path in paths.items()},
            final_c=trace.c_values[-1],
            suppression_db=comparison.suppression_db,
        )
        _write_json(paths["manifest"], manifest.to_json_dict())
        written.append(paths["manifest"])
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    if verbose:
        logger.info("finished after %d outer iterations: C=%.6e, suppression %.2f dB",
                    trace.outer_iters[-1], trace.c_values[-1], comparison.suppression_db)
    return manifest


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_merge_negative_values(argv))
    if args.verbose:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                            format="%(name)s %(message)s")
    try:
        config = resolve_config(args)
    except ConfigError as exc:
        print(f"afshape: config error: {exc}", file=sys.stderr)
        return 2
    if args.dry_run:
        print(json.dumps(config.to_json_dict(), indent=2))
        return 0
    try:
        manifest = run_and_export(config, args.out, verbose=args.verbose)
    except OSError as exc:
        print(f"afshape: cannot write outputs: {exc}", file=sys.stderr)
        return 2
    except (LoadingError, FloatingPointError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"afshape: numerical failure: {exc}", file=sys.stderr)
        return 3
    print(f"final region energy {manifest.final_c:.6g}; region average suppressed by "
          f"{manifest.suppression_db:.2f} dB; outputs in {args.out}")
    return 0
