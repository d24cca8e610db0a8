"""Decentralized multi-agent Q-learning that steers agents to distinct goals without communication."""
from .drl import AgentBrain, DirectionParams, GoalStats, internal_reward, new_brains, run_iteration
from .experiment import ExperimentConfig, RunMetrics, run_experiment, run_seed, summarize
from .learner import LearningParams, QTable, greedy_rollout, q_update
from .maze import Action, Maze, generate_maze, load_maze, read_maze, step
from .oracle import bfs_shortest_paths, optimal_assignment, value_iteration
from .profit_sharing import PSAgent, run_iteration_ps

__all__ = [
    "Action", "AgentBrain", "DirectionParams", "ExperimentConfig", "GoalStats", "LearningParams",
    "Maze", "PSAgent", "QTable", "RunMetrics", "bfs_shortest_paths", "generate_maze",
    "greedy_rollout", "internal_reward", "load_maze", "new_brains", "optimal_assignment",
    "q_update", "read_maze", "run_experiment", "run_iteration", "run_iteration_ps", "run_seed",
    "step", "summarize", "value_iteration",
]
