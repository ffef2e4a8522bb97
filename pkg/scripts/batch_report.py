#!/usr/bin/env python3
"""Import every trace in a directory and print a human-readable summary.

Usage: python scripts/batch_report.py DIR [--jobs N]
"""
import argparse
import json
import sys
from io import StringIO

from exproof.cli import main as cli_main


def run(directory: str, jobs: int) -> dict:
    buf = StringIO()
    stdout = sys.stdout
    sys.stdout = buf
    try:
        cli_main(["batch", "--jobs", str(jobs), directory])
    finally:
        sys.stdout = stdout
    return json.loads(buf.getvalue())


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("directory")
    ap.add_argument("--jobs", type=int, default=4)
    args = ap.parse_args()

    summary = run(args.directory, args.jobs)
    files = summary["files"]
    print(f"{summary['total']} files: {summary['proof']} proofs, "
          f"{summary['not_proof']} not-proofs, {summary['errors']} errors")
    if files:
        times = sorted(e["seconds"] for e in files.values())
        print(f"import+check time: min {times[0]:.4f}s, "
              f"median {times[len(times) // 2]:.4f}s, max {times[-1]:.4f}s")
    slow = sorted(files.items(), key=lambda kv: -kv[1]["seconds"])[:5]
    for name, entry in slow:
        print(f"  {entry['seconds']:8.4f}s  {entry['status']:<12} {name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
