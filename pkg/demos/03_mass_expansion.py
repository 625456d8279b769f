"""Closed-form mass-expansion classes checked against the graded oracle."""

import collections

from thirring_qca.mass_pert import Boundaries, class_report, compare_with_oracle

b = Boundaries(0, 4, 4, 0, 4)
for n in (0, 2):
    rep = class_report(b, n)
    print(f"order f = {n}")
    for cls in rep["classes"]:
        print(f"  class ({cls['f1']}, {cls['f2']}):", cls.get("terms", cls.get("unsupported")))

for regime, T in (("low-mass", 5), ("high-mass", 6)):
    status = collections.Counter()
    for y_in in range(0, 4):
        for a in (0, 1):
            for bb in (0, 1):
                if y_in == 0 and (a, bb) != (0, 1):
                    continue
                for row in compare_with_oracle([(0, a), (y_in, bb)], T, regime):
                    status[row["status"]] += 1
    print(f"{regime}, T = {T}: {dict(status)}")
