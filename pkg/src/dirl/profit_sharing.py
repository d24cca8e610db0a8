"""Profit-Sharing baseline.

Agents act epsilon-greedily without learning during the episode.  At the end,
every agent receives the same reward ``r / N`` if all agents sit on distinct
goals (``N`` is the step at which the last one arrived), and zero otherwise.
That reward is credited backward along each agent's own trajectory with a
geometric ratio ``gamma``.  Note that the success flag and ``N`` are joint
outcomes: this baseline sees global information the DRL agents never do.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .learner import LearningParams, QTable, select_action
from .maze import Cell, Maze, initial_state, is_episode_done, step
from .records import EpisodeRecord


@dataclass
class EpisodeTrace:
    pairs: list[tuple[Cell, int]] = field(default_factory=list)

    @property
    def terminal_step(self) -> int:
        return len(self.pairs)

    def __len__(self):
        return len(self.pairs)


def ps_terminal_reward(r: float, n_steps: int, success: bool) -> float:
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    return r / n_steps if success else 0.0


def ps_credit_update(q: QTable, trace: EpisodeTrace, terminal_reward: float,
                     alpha: float, gamma: float) -> QTable:
    pairs = trace.pairs if isinstance(trace, EpisodeTrace) else list(trace)
    if not pairs:
        raise ValueError("empty trace")
    last = len(pairs) - 1
    for k in range(last, -1, -1):
        s, a = pairs[k]
        credit = terminal_reward * gamma ** float(last - k)
        q.set(s, a, (1.0 - alpha) * q.get(s, a) + alpha * credit)
    return q


def episode_success(arrival_goal: list) -> bool:
    """All agents arrived, each on its own goal."""
    return None not in arrival_goal and len(set(arrival_goal)) == len(arrival_goal)


@dataclass
class PSAgent:
    qtable: QTable
    trace: EpisodeTrace = field(default_factory=EpisodeTrace)

    @classmethod
    def new(cls, maze: Maze, initial_q: float = 0.0) -> "PSAgent":
        return cls(QTable.for_maze(maze, initial_q))


def run_iteration_ps(agents: list[PSAgent], maze: Maze, params: LearningParams,
                     rng: np.random.RandomState, iteration: int = 0) -> EpisodeRecord:
    if len(agents) != maze.n_agents:
        raise ValueError(f"{len(agents)} agents for a {maze.n_agents}-agent maze")
    state = initial_state(maze)
    for agent in agents:
        agent.trace = EpisodeTrace()
    trajectories = [[s] for s in maze.starts]
    external = [0.0] * maze.n_agents
    while not is_episode_done(state, params.max_step):
        joint = [None if pos.absorbed else select_action(agent.qtable, pos.cell, params, rng)
                 for agent, pos in zip(agents, state.positions)]
        nxt, rewards, _ = step(maze, state, joint, params.external_reward)
        for i, agent in enumerate(agents):
            if joint[i] is None:
                continue
            agent.trace.pairs.append((state.positions[i].cell, joint[i]))
            trajectories[i].append(nxt.positions[i].cell)
            external[i] += rewards[i]
        state = nxt

    arrival_goal = [p.arrived_goal for p in state.positions]
    arrival_step = [p.arrival_step for p in state.positions]
    success = episode_success(arrival_goal)
    n_steps = max(arrival_step) if success else state.step
    reward = ps_terminal_reward(params.external_reward, n_steps, success)
    for agent in agents:
        ps_credit_update(agent.qtable, agent.trace, reward, params.alpha, params.gamma)
    return EpisodeRecord(
        iteration=iteration,
        trajectories=trajectories,
        arrival_goal=arrival_goal,
        arrival_step=arrival_step,
        external_reward=external,
        internal_reward=[reward] * maze.n_agents,
        steps=state.step,
    )
