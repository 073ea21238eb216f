"""``pendula-lab <kind> --config <path> [--out DIR] [--threads N]``.

Exit status: 0 success, 1 invalid configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from .. import __version__
from ..errors import BracketError, ConfigError, ConvergenceError, IntegrationError, SaturationError
from .config import KINDS, load_config
from .manifest import RunManifest
from .scenarios import RUNNERS

NUMERICAL = (IntegrationError, SaturationError, BracketError, ConvergenceError, FloatingPointError, OverflowError)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run(kind: str, config: Path, out: Path, threads: int = 1) -> RunManifest:
    scenario = load_config(config, kind, out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(scenario.snapshot(), __version__, scenario.config_hash(), _now())
    manifest_path = out / "manifest.json"
    if manifest_path.exists():
        manifest_path.unlink()
    result = RUNNERS[kind](scenario, threads)
    for f in result.files:
        manifest.add(f, out)
    manifest.results = {"seed": scenario["seed"], **result.results}
    manifest.finished = _now()
    manifest.write(out)
    return manifest


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pendula-lab", description="Run a Morse-pendula chain scenario.")
    ap.add_argument("kind", choices=KINDS)
    ap.add_argument("--config", required=True, type=Path, help="flat key = value scenario file")
    ap.add_argument("--out", type=Path, default=Path("."), help="output directory (default: current)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for independent probes")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 1
    try:
        manifest = run(args.kind, args.config, args.out, args.threads)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except NUMERICAL as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2
    for f in manifest.files:
        print(f["path"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
