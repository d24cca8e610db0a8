"""Per-agent tabular Q-learning: table, update rule and epsilon-greedy policy."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .maze import ACTIONS, Action, Cell, Maze, initial_state, is_episode_done, step
from .records import EpisodeRecord


@dataclass
class LearningParams:
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon: float = 0.1
    max_step: int = 100
    external_reward: float = 10.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.max_step < 1:
            raise ValueError(f"max_step must be positive, got {self.max_step}")
        if self.external_reward <= 0:
            raise ValueError("external_reward must be positive")


class QTable:
    """State-action values for one agent, keyed by the agent's own cell.

    Backed by a ``(width * height, 4)`` float array; entries never written
    hold ``initial_q``.
    """

    def __init__(self, width: int, height: int, initial_q: float = 0.0,
                 values: np.ndarray | None = None):
        self.width = width
        self.height = height
        self.initial_q = float(initial_q)
        if values is None:
            values = np.full((width * height, len(ACTIONS)), self.initial_q)
        self.values = values

    @classmethod
    def for_maze(cls, maze: Maze, initial_q: float = 0.0) -> "QTable":
        return cls(maze.width, maze.height, initial_q)

    def _idx(self, s: Cell) -> int:
        return s[0] * self.width + s[1]

    def get(self, s: Cell, a: int) -> float:
        return float(self.values[self._idx(s), a])

    def set(self, s: Cell, a: int, value: float) -> None:
        self.values[self._idx(s), a] = value

    def row(self, s: Cell) -> np.ndarray:
        return self.values[self._idx(s)]

    def max_value(self, s: Cell) -> float:
        return float(self.values[self._idx(s)].max())

    def copy(self) -> "QTable":
        return QTable(self.width, self.height, self.initial_q, self.values.copy())

    def __eq__(self, other):
        if not isinstance(other, QTable):
            return NotImplemented
        return (self.width, self.height) == (other.width, other.height) and \
            np.array_equal(self.values, other.values)


def q_update(q: QTable, s: Cell, a: int, reward: float, s_next: Cell,
             params: LearningParams) -> QTable:
    """One-step Q-learning backup, in place; returns ``q``."""
    i = q._idx(s)
    target = reward + params.gamma * q.max_value(s_next)
    q.values[i, a] = (1.0 - params.alpha) * q.values[i, a] + params.alpha * target
    return q


def pick_index(rng: np.random.RandomState, k: int) -> int:
    """Uniform integer in ``[0, k)`` from a single uniform draw."""
    return min(int(rng.random_sample() * k), k - 1)


def argmax_random(values, rng: np.random.RandomState) -> int:
    best = max(values)
    ties = [i for i, v in enumerate(values) if v == best]
    if len(ties) == 1:
        return ties[0]
    return ties[pick_index(rng, len(ties))]


def select_action(q: QTable, s: Cell, params: LearningParams,
                  rng: np.random.RandomState) -> Action:
    if rng.random_sample() < params.epsilon:
        return ACTIONS[pick_index(rng, len(ACTIONS))]
    return ACTIONS[argmax_random(q.row(s).tolist(), rng)]


def greedy_action(q: QTable, s: Cell) -> Action:
    # np.argmax keeps the first maximizer: Up, Down, Left, Right.
    return ACTIONS[int(np.argmax(q.row(s)))]


def greedy_trajectory(q: QTable, maze: Maze, start: Cell, max_step: int) -> list[Cell]:
    path = [start]
    cell = start
    goals = set(maze.goals)
    for _ in range(max_step):
        if cell in goals:
            break
        cell = maze.move(cell, greedy_action(q, cell))
        path.append(cell)
    return path


# ---------------------------------------------------------------- CSV dump

ACTION_NAMES = {a: a.name.lower() for a in ACTIONS}
_ACTION_BY_NAME = {v: k for k, v in ACTION_NAMES.items()}
QTABLE_COLUMNS = ["agent", "row", "col", "action", "q"]


def dump_qtables(tables: list[QTable], maze: Maze) -> str:
    """CSV of every free non-goal cell and action, one block per agent."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(QTABLE_COLUMNS)
    goals = set(maze.goals)
    for agent, q in enumerate(tables):
        for cell in maze.free_cells():
            if cell in goals:
                continue
            for a in ACTIONS:
                writer.writerow([agent, cell[0], cell[1], ACTION_NAMES[a], f"{q.get(cell, a):.6f}"])
    return buf.getvalue()


def load_qtables(text: str, maze: Maze) -> list[QTable]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != QTABLE_COLUMNS:
        raise ValueError(f"expected columns {QTABLE_COLUMNS}, got {reader.fieldnames}")
    tables: dict[int, QTable] = {}
    for rec in reader:
        agent = int(rec["agent"])
        cell = (int(rec["row"]), int(rec["col"]))
        if not maze.in_bounds(cell):
            raise ValueError(f"cell {cell} outside the {maze.width}x{maze.height} maze")
        if cell in maze.walls:
            raise ValueError(f"Q entry for wall cell {cell}")
        q = tables.setdefault(agent, QTable.for_maze(maze))
        q.set(cell, _ACTION_BY_NAME[rec["action"]], float(rec["q"]))
    if sorted(tables) != list(range(len(tables))):
        raise ValueError("agent ids must run 0..n-1")
    return [tables[i] for i in range(len(tables))]


def run_iteration_plain(tables: list[QTable], maze: Maze, params: LearningParams,
                        rng: np.random.RandomState, iteration: int = 0) -> EpisodeRecord:
    """Independent Q-learners trained directly on the external reward."""
    state = initial_state(maze)
    trajectories = [[s] for s in maze.starts]
    external = [0.0] * maze.n_agents
    while not is_episode_done(state, params.max_step):
        joint = [None if pos.absorbed else select_action(q, pos.cell, params, rng)
                 for q, pos in zip(tables, state.positions)]
        nxt, rewards, _ = step(maze, state, joint, params.external_reward)
        for i, q in enumerate(tables):
            if joint[i] is None:
                continue
            cell = nxt.positions[i].cell
            q_update(q, state.positions[i].cell, joint[i], rewards[i], cell, params)
            trajectories[i].append(cell)
            external[i] += rewards[i]
        state = nxt
    return EpisodeRecord(
        iteration=iteration,
        trajectories=trajectories,
        arrival_goal=[p.arrived_goal for p in state.positions],
        arrival_step=[p.arrival_step for p in state.positions],
        external_reward=external,
        internal_reward=[0.0] * maze.n_agents,
        steps=state.step,
    )


def greedy_rollout(tables: list[QTable], maze: Maze, max_step: int) -> EpisodeRecord:
    """Joint episode with every agent acting greedily (fixed tie order), no learning."""
    state = initial_state(maze)
    trajectories = [[s] for s in maze.starts]
    external = [0.0] * maze.n_agents
    while not is_episode_done(state, max_step):
        joint = [None if pos.absorbed else greedy_action(q, pos.cell)
                 for q, pos in zip(tables, state.positions)]
        state, rewards, _ = step(maze, state, joint)
        for i in range(maze.n_agents):
            if joint[i] is not None:
                trajectories[i].append(state.positions[i].cell)
                external[i] += rewards[i]
    return EpisodeRecord(
        iteration=-1,
        trajectories=trajectories,
        arrival_goal=[p.arrived_goal for p in state.positions],
        arrival_step=[p.arrival_step for p in state.positions],
        external_reward=external,
        internal_reward=[0.0] * maze.n_agents,
        steps=state.step,
    )
