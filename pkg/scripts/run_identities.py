"""Run the identity suite and write both the JSON report and the table.

    python scripts/run_identities.py --profile full --out reports/
"""

import argparse
import pathlib
import sys

from fracforms.identities import report_json, report_table, run_suite, suite_failed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", choices=("fast", "full"), default="fast")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--filter", action="append")
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("."))
    args = ap.parse_args()

    report = run_suite(args.filter, profile=args.profile, seed=args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / f"identities-{args.profile}.json").write_text(report_json(report), encoding="utf-8")
    table = report_table(report)
    (args.out / f"identities-{args.profile}.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    sys.exit(1 if suite_failed(report) else 0)


if __name__ == "__main__":
    main()
