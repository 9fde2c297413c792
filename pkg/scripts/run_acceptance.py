"""Run the twelve acceptance checks and print one line per check.

    python scripts/run_acceptance.py [--seed N] [--json out.json]
"""

import argparse
import json
import sys

from prismlab.acceptance import CRITERIA, format_line, run_criterion


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json")
    args = ap.parse_args()
    results = []
    for c in CRITERIA:
        r = run_criterion(c, args.seed)
        print(format_line(r), flush=True)
        results.append(r)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)
    passed = sum(r["passed"] for r in results)
    print(f"{passed}/{len(results)} passed")
    return 0 if passed == len(results) else 1


if __name__ == "__main__":
    sys.exit(main())
