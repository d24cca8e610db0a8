"""Brute-force ground truth for tests and reports.

Nothing in here is imported by the learners.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import permutations
from typing import Optional

from .maze import ACTIONS, Cell, Maze, goal_label

UNREACHABLE = None


@dataclass(frozen=True)
class DistanceField:
    source: Cell
    dist: dict[Cell, int]

    def __getitem__(self, cell: Cell) -> Optional[int]:
        return self.dist.get(cell, UNREACHABLE)

    def reachable(self, cell: Cell) -> bool:
        return cell in self.dist


def bfs_shortest_paths(maze: Maze, source: Cell) -> DistanceField:
    """Unweighted shortest-path lengths from ``source``.

    Goal cells are absorbing, so a path may end on a goal but never pass
    through one.  Cells missing from the field are unreachable.
    """
    if not maze.is_free(source):
        raise ValueError(f"source {source} is not a free cell")
    goals = set(maze.goals)
    dist = {source: 0}
    queue = deque([source])
    while queue:
        cell = queue.popleft()
        if cell in goals and cell != source:
            continue
        for nxt in maze.neighbors(cell):
            if nxt not in dist:
                dist[nxt] = dist[cell] + 1
                queue.append(nxt)
    return DistanceField(source, dist)


def distance_matrix(maze: Maze) -> list[list[Optional[int]]]:
    """``d[i][g]``: shortest steps from agent ``i``'s start to goal ``g``."""
    out = []
    for start in maze.starts:
        field = bfs_shortest_paths(maze, start)
        out.append([field[g] for g in maze.goals])
    return out


@dataclass(frozen=True)
class Assignment:
    goals: tuple[int, ...]  # goals[i] is the goal of agent i
    makespan: int

    def labels(self) -> list[str]:
        return [goal_label(g) for g in self.goals]


class InfeasibleError(ValueError):
    pass


def makespan(dist: list[list[Optional[int]]], goals: tuple[int, ...]) -> Optional[int]:
    steps = [dist[i][g] for i, g in enumerate(goals)]
    if any(s is None for s in steps):
        return None
    return max(steps)


def optimal_assignment(maze: Maze) -> Assignment:
    """Injective agent-to-goal assignment with the smallest makespan.

    Exhaustive over all ``m! / (m - n)!`` assignments, visited in
    lexicographic order so the first optimum found wins ties.
    """
    dist = distance_matrix(maze)
    for i, row in enumerate(dist):
        if all(d is None for d in row):
            raise InfeasibleError(f"agent {i} cannot reach any goal")
    best = None
    for goals in permutations(range(maze.n_goals), maze.n_agents):
        span = makespan(dist, goals)
        if span is not None and (best is None or span < best.makespan):
            best = Assignment(goals, span)
    if best is None:
        raise InfeasibleError("no assignment reaches every agent's goal")
    return best


def value_iteration(maze: Maze, goal: int, gamma: float, reward: float,
                    tol: float = 1e-10) -> dict[tuple[Cell, int], float]:
    """Optimal Q for one agent alone in ``maze`` that is paid only at ``goal``.

    Every goal cell is terminal with value 0; entering ``goal`` pays
    ``reward``, entering any other goal pays nothing.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    goals = set(maze.goals)
    target = maze.goals[goal]
    states = [c for c in maze.free_cells() if c not in goals]
    value = {c: 0.0 for c in maze.free_cells()}
    q: dict[tuple[Cell, int], float] = {}
    while True:
        residual = 0.0
        new_value = dict(value)
        for s in states:
            best = None
            for a in ACTIONS:
                s2 = maze.move(s, a)
                r = reward if s2 == target else 0.0
                q_sa = r + gamma * (0.0 if s2 in goals else value[s2])
                q[(s, a)] = q_sa
                best = q_sa if best is None else max(best, q_sa)
            residual = max(residual, abs(best - value[s]))
            new_value[s] = best
        value = new_value
        if residual < tol:
            return q
