"""
Which gait parameters drive joint load?
=======================================

Fits the multiple linear regression the `regress` command uses, on a
synthetic archive where the answer is known: load depends only on swing
height, with slope 2.
"""

import numpy as np

from modgait.analysis import ArchiveEntry, ParetoArchive, regress_load
from modgait.gait import gait_bounds

rng = np.random.default_rng(7)
lo, hi = gait_bounds("tetrapod")

# 60 hexapod genomes, uniform within bounds; the fake load response is
# 2 * swing_height + 1 plus a little noise.
G = lo + rng.random((60, 14)) * (hi - lo)
loads = 2.0 * G[:, 12] + 1.0 + rng.normal(scale=0.01, size=60)
entries = [
    ArchiveEntry(genome=g, objectives=np.array([0.0, 0.0, ld]))
    for g, ld in zip(G, loads)
]
archive = ParetoArchive(entries=entries, metadata={"seed": 7})

report = regress_load(archive)
print("R^2 = %.4f" % report.r_squared)
print("\n  variable        coef     std coef   p-value")
for v in report.variables:
    print("  %-14s %8.3f  %9.3f  %8.2e" % (v.name, v.coef, v.standardized_coef, v.p_value))

# swing height should be the only significant variable, near coef 2.
sig = [v.name for v in report.variables if v.p_value < 0.01]
print("\nsignificant at p < 0.01:", sig)
