"""Goal-directed Q-learners that cooperate without communicating.

Each agent keeps, per goal, a goal value (``bid``) that averages the minimum
number of steps to that goal over the episodes in which the agent was judged
to be first there, and zero otherwise.  It targets the goal with the largest
bid, so it drifts toward the farthest goal it can still win.  Arriving first
at the targeted goal pays an internal reward sized to beat the discounted
reward of every other goal the agent has reached.

Firstness is never observed directly.  The only evidence an agent has is
whether its own arrival paid the external reward; in ``"drl"`` mode the bid
update additionally requires the running mean of external rewards collected
at the goal to exceed a threshold, while ``"pmrl"`` mode uses the single
arrival alone.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np

from .learner import LearningParams, QTable, argmax_random, pick_index, q_update, select_action
from .maze import Cell, Maze, initial_state, is_episode_done, step
from .records import EpisodeRecord

Mode = Literal["drl", "pmrl"]


@dataclass
class DirectionParams:
    delta: float = 10.0
    threshold: float = 5.0
    goal_random_prob: float = 0.1
    mode: Mode = "drl"
    require_arrival: bool = True

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not 0.0 <= self.goal_random_prob <= 1.0:
            raise ValueError(f"goal_random_prob must be in [0, 1], got {self.goal_random_prob}")
        if self.mode not in ("drl", "pmrl"):
            raise ValueError(f"mode must be 'drl' or 'pmrl', got {self.mode!r}")


@dataclass
class GoalStats:
    """Per-goal bookkeeping of one agent.

    ``t[g]`` is the fewest steps the agent has needed to reach ``g`` (``None``
    until it gets there), ``n[g]`` counts goal-value updates, ``r_sum[g]`` and
    ``c[g]`` accumulate the external reward and the number of arrivals.
    """
    bid: list[float]
    t: list[Optional[int]]
    n: list[int]
    r_sum: list[float]
    c: list[int]

    @classmethod
    def empty(cls, n_goals: int) -> "GoalStats":
        return cls([0.0] * n_goals, [None] * n_goals, [0] * n_goals,
                   [0.0] * n_goals, [0] * n_goals)

    @property
    def n_goals(self) -> int:
        return len(self.bid)

    def mean_reward(self, g: int) -> float:
        return self.r_sum[g] / self.c[g] if self.c[g] else 0.0


def internal_reward(stats: GoalStats, g: int, was_first: bool, r: float,
                    gamma: float, delta: float) -> float:
    if not was_first:
        return 0.0
    t_g = stats.t[g]
    if t_g is None:
        raise ValueError(f"no recorded step count for goal {g}")
    best = None
    for other, t_other in enumerate(stats.t):
        if other == g or t_other is None:
            continue
        # float exponent: may be negative when the other goal is closer
        value = r * gamma ** float(t_other - t_g)
        if best is None or value > best:
            best = value
    if best is None:
        return r + delta
    return best + delta


def update_goal_value(stats: GoalStats, g: int, condition_met: bool) -> GoalStats:
    n = stats.n[g]
    if n < 1:
        raise ValueError(f"update count for goal {g} must be incremented before the update")
    gain = stats.t[g] if condition_met else 0
    stats.bid[g] = (n - 1) / n * stats.bid[g] + gain / n
    return stats


def drl_condition(stats: GoalStats, g: int, threshold: float) -> bool:
    if stats.c[g] == 0:
        return False
    return stats.r_sum[g] / stats.c[g] > threshold


def select_goal(stats: GoalStats, goal_random_prob: float, rng: np.random.RandomState) -> int:
    if stats.n_goals < 1:
        raise ValueError("no goals to select from")
    if rng.random_sample() < goal_random_prob:
        return pick_index(rng, stats.n_goals)
    return argmax_random(stats.bid, rng)


@dataclass
class AgentBrain:
    """Everything one agent knows: its Q-table, goal statistics and target.

    The episode driver only ever hands a brain its own cell, its own action,
    its own next cell and its own external reward.
    """
    qtable: QTable
    stats: GoalStats
    g_sel: int
    received_reward_this_episode: float = 0.0
    arrival_goal: Optional[int] = field(default=None, repr=False)
    arrival_step: Optional[int] = field(default=None, repr=False)
    internal_paid: float = field(default=0.0, repr=False)
    last_condition: bool = field(default=False, repr=False)

    @classmethod
    def new(cls, maze: Maze, rng: np.random.RandomState, initial_q: float = 0.0) -> "AgentBrain":
        return cls(QTable.for_maze(maze, initial_q), GoalStats.empty(maze.n_goals),
                   pick_index(rng, maze.n_goals))

    def begin_episode(self) -> None:
        self.received_reward_this_episode = 0.0
        self.arrival_goal = None
        self.arrival_step = None
        self.internal_paid = 0.0

    def act(self, s: Cell, params: LearningParams, rng: np.random.RandomState) -> int:
        return select_action(self.qtable, s, params, rng)

    def learn(self, s: Cell, a: int, s_next: Cell, reward: float, goal: Optional[int],
              t: int, params: LearningParams, direction: DirectionParams) -> float:
        """Q-update for one transition; ``goal`` is set on the arriving step."""
        ir = 0.0
        if goal is not None:
            stats = self.stats
            # the arrival step counts toward the minimum before it is used below
            if stats.t[goal] is None or t < stats.t[goal]:
                stats.t[goal] = t
            stats.r_sum[goal] += reward
            stats.c[goal] += 1
            self.arrival_goal, self.arrival_step = goal, t
            self.received_reward_this_episode = reward
            if goal == self.g_sel:
                ir = internal_reward(stats, goal, reward > 0, params.external_reward,
                                     params.gamma, direction.delta)
            self.internal_paid = ir
        q_update(self.qtable, s, a, ir, s_next, params)
        return ir

    def end_episode(self, direction: DirectionParams, rng: np.random.RandomState) -> None:
        g = select_goal(self.stats, direction.goal_random_prob, rng)
        self.g_sel = g
        self.stats.n[g] += 1
        won = self.arrival_goal == g and self.received_reward_this_episode > 0
        if direction.mode == "drl":
            cond = (won or not direction.require_arrival) and \
                drl_condition(self.stats, g, direction.threshold)
        else:
            cond = won
        self.last_condition = cond
        update_goal_value(self.stats, g, cond)


def new_brains(maze: Maze, rng: np.random.RandomState, initial_q: float = 0.0) -> list[AgentBrain]:
    return [AgentBrain.new(maze, rng, initial_q) for _ in range(maze.n_agents)]


def run_iteration(brains: Sequence[AgentBrain], maze: Maze, params: LearningParams,
                  direction: DirectionParams, rng: np.random.RandomState,
                  iteration: int = 0) -> EpisodeRecord:
    """Play and learn from one episode for every brain."""
    if len(brains) != maze.n_agents:
        raise ValueError(f"{len(brains)} brains for a {maze.n_agents}-agent maze")
    state = initial_state(maze)
    for brain in brains:
        brain.begin_episode()
    trajectories = [[s] for s in maze.starts]
    while not is_episode_done(state, params.max_step):
        joint = [None if pos.absorbed else brain.act(pos.cell, params, rng)
                 for brain, pos in zip(brains, state.positions)]
        nxt, rewards, arrivals = step(maze, state, joint, params.external_reward)
        arrived = {i: g for i, g, _ in arrivals}
        for i, brain in enumerate(brains):
            if joint[i] is None:
                continue
            cell = nxt.positions[i].cell
            brain.learn(state.positions[i].cell, joint[i], cell, rewards[i],
                        arrived.get(i), nxt.step, params, direction)
            trajectories[i].append(cell)
        state = nxt
    for brain in brains:
        brain.end_episode(direction, rng)
    return EpisodeRecord(
        iteration=iteration,
        trajectories=trajectories,
        arrival_goal=[b.arrival_goal for b in brains],
        arrival_step=[b.arrival_step for b in brains],
        external_reward=[b.received_reward_this_episode for b in brains],
        internal_reward=[b.internal_paid for b in brains],
        steps=state.step,
        g_sel=[b.g_sel for b in brains],
        conditions=[b.last_condition for b in brains],
        bids=[list(b.stats.bid) for b in brains],
    )
