"""
One agent, one goal
===================

With a single agent there is nobody to race, so DRL reduces to Q-learning
with a fixed bonus. Both learners should find the BFS shortest path and
their Q-values on that path should match value iteration.
"""

from dirl import DirectionParams, LearningParams, bfs_shortest_paths, generate_maze, value_iteration
from dirl import fast
from dirl.learner import greedy_action, greedy_trajectory
from dirl.render import render_ascii

params, direction = LearningParams(), DirectionParams()
maze = generate_maze(seed=3, n_agents=1, width=8, height=8, wall_density=0.2)
shortest = bfs_shortest_paths(maze, maze.starts[0])[maze.goals[0]]
print(f"BFS shortest path: {shortest} steps")

# a lone DRL agent always wins, so its internal reward is r + delta
for algo, reward in (("plainq", params.external_reward),
                     ("drl", params.external_reward + direction.delta)):
    q = fast.train(maze, algo, params, direction, iterations=5_000, seed=0).qtables[0]
    path = greedy_trajectory(q, maze, maze.starts[0], params.max_step)
    q_star = value_iteration(maze, 0, params.gamma, reward)
    err = max(abs(q.get(c, greedy_action(q, c)) - q_star[(c, greedy_action(q, c))]) for c in path[:-1])
    print(f"{algo:7s} greedy path {len(path) - 1} steps, max |Q - Q*| on path {err:.2e}")

# arrows show the greedy action, '*' marks the greedy path
print()
print(render_ascii([q], maze))
