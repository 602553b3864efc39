"""
Small optimization run, then a look at the archive
==================================================

Runs the optimizer through the same entry point the command line uses,
then loads the archive it wrote and prints the trade-off front.
"""

import tempfile
from pathlib import Path

import numpy as np

from modgait import cli
from modgait.io import read_archive

CONFIG = """
morphology = "quad"
gait = "trot"

[terrain]
kind = "flat"

[optimizer]
population_size = 16
generations = 6
seed = 42

[simulation]
control_rate_hz = 30.0
cycles = 3
warmup_cycles = 1
"""

workdir = Path(tempfile.mkdtemp(prefix="modgait_demo_"))
cfg = workdir / "run.toml"
cfg.write_text(CONFIG)

# Deliberately tiny so the demo finishes in seconds; real runs want a
# larger population and many more generations.
code = cli.main(["optimize", "--config", str(cfg), "--out", str(workdir / "out")])
assert code == 0

archive = read_archive(workdir / "out" / "archive.json")
print("\narchive entries:", len(archive.entries))
print("metadata seed:", archive.metadata["seed"])

# Objectives are stored as a minimization triple:
# (-f_speed, -f_stability, f_load).  Flip the first two back for reading.
print("\n  f_speed  f_stability  f_load")
for e in sorted(archive.entries, key=lambda e: e.objectives[0]):
    s, st, ld = -e.objectives[0], -e.objectives[1], e.objectives[2]
    print("  %7.3f  %11.3f  %6.3f" % (s, st, ld))

# The fastest candidate's gait parameters.
best = min(archive.entries, key=lambda e: e.objectives[0])
g = best.genome
print("\nfastest candidate:")
print("  strides      ", np.round(g[0:4], 3))
print("  swing speeds ", np.round(g[4:8], 3))
print("  swing height %.3f  duty factor %.3f" % (g[8], g[9]))
