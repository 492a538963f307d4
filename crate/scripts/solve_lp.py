#!/usr/bin/env python3
"""Solve an LP/MILP file with HiGHS and write `name value` lines.

usage: solve_lp.py MODEL.lp OUT.sol [TIME_LIMIT_SECONDS]
"""
import sys

import highspy


def main() -> int:
    if len(sys.argv) not in (3, 4):
        print(__doc__, file=sys.stderr)
        return 2
    model, out = sys.argv[1], sys.argv[2]
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    if len(sys.argv) == 4:
        h.setOptionValue("time_limit", float(sys.argv[3]))
    if h.readModel(model) != highspy.HighsStatus.kOk:
        print(f"cannot read {model}", file=sys.stderr)
        return 2
    h.run()
    status = h.getModelStatus()
    if status != highspy.HighsModelStatus.kOptimal:
        print(f"status: {h.modelStatusToString(status)}", file=sys.stderr)
        return 1
    names = h.getLp().col_names_
    values = h.getSolution().col_value
    with open(out, "w") as f:
        f.write(f"# objective {h.getInfo().objective_function_value}\n")
        for name, value in zip(names, values):
            f.write(f"{name} {value!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
