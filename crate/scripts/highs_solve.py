#!/usr/bin/env python3
"""Solve an MPS file with HiGHS and write `objective <v>` then `name value` lines.

usage: highs_solve.py MODEL.mps SOLUTION.txt [TIME_LIMIT_S]
"""
import sys

import highspy


def main(argv):
    if len(argv) < 3:
        print(__doc__, file=sys.stderr)
        return 64
    model, out = argv[1], argv[2]
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 1e-9)
    h.setOptionValue("mip_abs_gap", 1e-9)
    if len(argv) > 3:
        h.setOptionValue("time_limit", float(argv[3]))
    if h.readModel(model) != highspy.HighsStatus.kOk:
        print(f"cannot read {model}", file=sys.stderr)
        return 1
    h.run()
    status = h.getModelStatus()
    names = {
        highspy.HighsModelStatus.kOptimal: "optimal",
        highspy.HighsModelStatus.kInfeasible: "infeasible",
        highspy.HighsModelStatus.kUnbounded: "unbounded",
        highspy.HighsModelStatus.kTimeLimit: "time-limit",
    }
    if status not in names:
        print(f"unexpected status {h.modelStatusToString(status)}", file=sys.stderr)
        return 2
    lines = [f"status {names[status]}"]
    sol = h.getSolution()
    if status in (highspy.HighsModelStatus.kOptimal, highspy.HighsModelStatus.kTimeLimit) and sol.value_valid:
        lines.append(f"objective {h.getInfo().objective_function_value!r}")
        lp = h.getLp()
        for name, value in zip(lp.col_names_, sol.col_value):
            lines.append(f"{name} {value!r}")
    with open(out, "w") as f:
        f.write("\n".join(lines) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
