"""
Two agents, one tempting goal
=============================

Both agents see G0 as their nearest goal. A is six cells nearer to G1 than
B is, so the best split sends A to G1 and B to G0. DRL agents learn the split from
nothing but their own rewards: whoever keeps losing G0 sees its bid for G0
decay and turns to G1.
"""

import numpy as np

from dirl import DirectionParams, LearningParams, new_brains, optimal_assignment, run_iteration
from dirl.learner import greedy_rollout
from dirl.render import render_ascii
from dirl.suite import conflict_maze

maze = conflict_maze()
best = optimal_assignment(maze)
print(f"optimal assignment {best.labels()} with makespan {best.makespan}")

params, direction = LearningParams(), DirectionParams()
rng = np.random.RandomState(0)
brains = new_brains(maze, rng)

# watch the bids settle while training runs
for k in range(10_000):
    run_iteration(brains, maze, params, direction, rng, k)
    if k + 1 in (100, 1_000, 10_000):
        bids = "  ".join(f"{'AB'[i]}: {np.round(b.stats.bid, 2)} -> G{b.g_sel}"
                         for i, b in enumerate(brains))
        print(f"after {k + 1:6d} episodes  {bids}")

tables = [b.qtable for b in brains]
final = greedy_rollout(tables, maze, params.max_step)
print(f"greedy goals {final.arrival_goal}, steps {final.arrival_step}")
print()
print(render_ascii(tables, maze))
