"""
Comparing learners on the shipped two-agent suite
=================================================

Runs DRL and Profit-Sharing on the ten shipped 6x6 two-agent mazes and prints
per-maze minimum joint steps over seeds next to the oracle optimum. A value
of 100 means no seed finished without a conflict.
"""

from dirl import ExperimentConfig, optimal_assignment, run_experiment
from dirl.suite import load_suite

SEEDS = range(5)  # ten in the acceptance test; five keeps this demo quick

print(f"{'maze':6s} {'optimal':>7s} {'drl':>5s} {'ps':>5s}")
for name, maze in load_suite(2):
    row = []
    for algo in ("drl", "ps"):
        runs = run_experiment(ExperimentConfig(algo, maze, name, iterations=10_000, seeds=tuple(SEEDS)))
        row.append(min(m.final_joint_steps for m in runs))
    print(f"{name:6s} {optimal_assignment(maze).makespan:7d} {row[0]:5d} {row[1]:5d}")
