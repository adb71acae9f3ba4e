"""Command-line front end for the experiment harness.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.  A
configuration error is diagnosed before any file is written.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import ConfigError, ExperimentConfig, report, run_experiment

_SUBCOMMAND_KIND = {
    "spectrum": "spectrum",
    "lebesgue": "lebesgue-scan",
    "offline": "offline-amplification",
    "online": "online-regret",
    "compare": "baseline-compare",
}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kernopt",
        description="spectral kernel experiments: bounds, plug-in "
                    "maximization, domain-splitting bandits",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMAND_KIND:
        p = sub.add_parser(name, help=f"run a {_SUBCOMMAND_KIND[name]} "
                                      "experiment")
        p.add_argument("--config", required=True,
                       help="path to a JSON experiment config")
        p.add_argument("--out", required=True, help="run directory to create")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config master seed")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker processes for seed-parallel kinds")
    rp = sub.add_parser("report", help="summarize a finished run directory")
    rp.add_argument("--out", required=True, help="run directory to read")
    return ap


def _load_config(path: str, kind: str, seed: int | None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    declared = raw.get("kind", kind)
    if declared != kind:
        raise ConfigError(f"config kind {declared!r} does not match "
                          f"subcommand ({kind})")
    raw = dict(raw)
    raw["kind"] = kind
    return ExperimentConfig.from_dict(raw, master_seed=seed)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "report":
        try:
            text, _ = report(args.out)
        except FileNotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(text)
        return 0

    kind = _SUBCOMMAND_KIND[args.command]
    try:
        cfg = _load_config(args.config, kind, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    status = run_experiment(cfg, Path(args.out), jobs=max(1, args.jobs))
    if status != 0:
        print(f"run failed; see {Path(args.out) / 'FAILED'}",
              file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
