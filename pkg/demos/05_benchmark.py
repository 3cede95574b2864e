"""A small benchmark run with the seeded stand-in backend.

Writes trial directories, records.jsonl, results.csv and SVG bar charts
under ./demo_out. The stand-in succeeds on each step with probability
p_success, so the rates here say nothing about real LLMs; the point is the
pipeline.
"""

import sys

from femagents.config import ExperimentConfig
from femagents.harness import run_matrix

cfg = ExperimentConfig(
    combinations=["Eng+Exp1", "Eng+Exe", "Eng+Exe+Exp1", "Plan+Eng+Exe+Exp"],
    n_runs=10,
    seed=1,
    level="L2",
)
cfg.sandbox.interpreter_cmd = f"{sys.executable} -I"
cfg.oracle.n = 20

records = run_matrix(cfg, "demo_out")
print(open("demo_out/results.csv").read())
print("charts in demo_out/figures/")
