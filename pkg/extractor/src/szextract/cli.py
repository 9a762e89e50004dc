"""Command-line entry point.

    szextract run job.cfg [--encoder melproj-v1] [--checkpoint DIR]
                          [--revision REV] [--output OUT.cemb]

The job file pins paths and the encoder; flags override it. Exit code
is 0 when the job completes (even with per-file failures, which land in
the failures CSV) and 1 on configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .job import load_job, run_job


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="szextract", description="Audio embedding extraction")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute an extraction job")
    run.add_argument("job", type=Path, help="job file (key = value)")
    run.add_argument("--encoder", default=None, help="encoder name override")
    run.add_argument("--checkpoint", default=None, help="pretrained checkpoint path")
    run.add_argument("--revision", default=None, help="pretrained checkpoint revision")
    run.add_argument("--output", default=None, help="output CEMB path override")
    run.add_argument("--cache-dir", dest="cache_dir", default=None, help="cache directory override")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "encoder": args.encoder,
        "checkpoint": args.checkpoint,
        "revision": args.revision,
        "output": args.output,
        "cache_dir": args.cache_dir,
    }
    try:
        job = load_job(args.job, overrides)
        result = run_job(job)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"szextract: error: {exc}", file=sys.stderr)
        return 1
    print(
        f"run: {result.records_written} records, {result.encoder_calls} encoder calls, "
        f"{result.cache_hits} cache hits, {len(result.failures)} failures -> {job.output}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
