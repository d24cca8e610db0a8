"""Multi-agent grid maze: layout, text format, generator and joint transitions.

Cells are ``(row, col)`` tuples.  Goals are referred to by their integer index
``g`` (printed as ``G{g}``).  Every goal cell is absorbing: an agent that
enters one stays there for the rest of the episode.  Only the first agent to
enter a goal is paid the external reward; agents entering the same unclaimed
goal on the same step tie and nobody is paid.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Optional, Sequence

import numpy as np

Cell = tuple[int, int]

TIE = -1  # goal_claims marker for a simultaneous arrival
MAX_GOALS = 10


class Action(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3


ACTIONS: tuple[Action, ...] = tuple(Action)
MOVES: dict[int, Cell] = {
    Action.UP: (-1, 0),
    Action.DOWN: (1, 0),
    Action.LEFT: (0, -1),
    Action.RIGHT: (0, 1),
}


class MazeError(ValueError):
    pass


class MazeParseError(MazeError):
    pass


class MazeValidationError(MazeError):
    pass


class PlacementError(MazeError):
    pass


def goal_label(g: int) -> str:
    return f"G{g}"


@dataclass(frozen=True)
class Maze:
    width: int
    height: int
    walls: frozenset[Cell]
    starts: tuple[Cell, ...]
    goals: tuple[Cell, ...]

    def __post_init__(self):
        validate_maze(self)

    @property
    def n_agents(self) -> int:
        return len(self.starts)

    @property
    def n_goals(self) -> int:
        return len(self.goals)

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def index(self, cell: Cell) -> int:
        return cell[0] * self.width + cell[1]

    def cell(self, index: int) -> Cell:
        return divmod(index, self.width)

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and cell not in self.walls

    def goal_at(self, cell: Cell) -> Optional[int]:
        try:
            return self.goals.index(cell)
        except ValueError:
            return None

    def move(self, cell: Cell, action: int) -> Cell:
        """Deterministic single-agent move; walls and the border block."""
        dr, dc = MOVES[action]
        nxt = (cell[0] + dr, cell[1] + dc)
        return nxt if self.is_free(nxt) else cell

    def neighbors(self, cell: Cell) -> list[Cell]:
        out = []
        for a in ACTIONS:
            nxt = self.move(cell, a)
            if nxt != cell:
                out.append(nxt)
        return out

    def free_cells(self) -> list[Cell]:
        return [(r, c) for r in range(self.height) for c in range(self.width)
                if (r, c) not in self.walls]

    def grid_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Flat lookup tables for compiled kernels.

        Returns ``(next_cell, goal_of)``: ``next_cell[i, a]`` is the flat index
        reached from flat cell ``i`` with action ``a``; ``goal_of[i]`` is the
        goal index at flat cell ``i`` or -1.
        """
        nxt = np.empty((self.n_cells, 4), dtype=np.int64)
        for i in range(self.n_cells):
            cell = self.cell(i)
            for a in ACTIONS:
                nxt[i, a] = self.index(self.move(cell, a)) if self.is_free(cell) else i
        goal_of = np.full(self.n_cells, -1, dtype=np.int64)
        for g, cell in enumerate(self.goals):
            goal_of[self.index(cell)] = g
        return nxt, goal_of


def _reachable(maze: Maze, source: Cell) -> set[Cell]:
    # Goal cells absorb, so search never expands through a goal other than the source.
    seen = {source}
    queue = deque([source])
    goals = set(maze.goals)
    while queue:
        cell = queue.popleft()
        if cell in goals and cell != source:
            continue
        for nxt in maze.neighbors(cell):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def validate_maze(maze: Maze) -> None:
    if maze.width < 1 or maze.height < 1:
        raise MazeValidationError(f"grid must be at least 1x1, got {maze.width}x{maze.height}")
    if not maze.starts:
        raise MazeValidationError("maze has no agents")
    if len(maze.goals) > MAX_GOALS:
        raise MazeValidationError(f"at most {MAX_GOALS} goals supported")
    if len(maze.goals) < len(maze.starts):
        raise MazeValidationError(
            f"{len(maze.goals)} goals for {len(maze.starts)} agents; need goals >= agents")
    cells = list(maze.walls) + list(maze.starts) + list(maze.goals)
    for cell in cells:
        if not maze.in_bounds(cell):
            raise MazeValidationError(f"cell {cell} out of bounds")
    if len(set(cells)) != len(cells):
        raise MazeValidationError("walls, starts and goals must not overlap")
    for i, start in enumerate(maze.starts):
        seen = _reachable(maze, start)
        for g, goal in enumerate(maze.goals):
            if goal not in seen:
                raise MazeValidationError(
                    f"goal {goal_label(g)} at {goal} unreachable from start of agent {i}")


# ---------------------------------------------------------------- text format

def load_maze(text: str) -> Maze:
    lines = text.splitlines()
    if not lines:
        raise MazeParseError("empty maze file")
    try:
        width, height = (int(tok) for tok in lines[0].split())
    except ValueError:
        raise MazeParseError(f"bad header line {lines[0]!r}; expected 'W H'") from None
    rows = lines[1:1 + height]
    if len(rows) != height or any(line.strip() for line in lines[1 + height:]):
        raise MazeParseError(f"expected exactly {height} grid rows")
    walls, starts, goals = set(), {}, {}
    for r, row in enumerate(rows):
        if len(row) != width:
            raise MazeParseError(f"row {r} has {len(row)} characters, expected {width}")
        for c, ch in enumerate(row):
            if ch == "#":
                walls.add((r, c))
            elif ch == ".":
                continue
            elif "A" <= ch <= "Z":
                if ch in starts:
                    raise MazeParseError(f"duplicate start {ch!r}")
                starts[ch] = (r, c)
            elif ch.isdigit():
                if ch in goals:
                    raise MazeParseError(f"duplicate goal {ch!r}")
                goals[ch] = (r, c)
            else:
                raise MazeParseError(f"unexpected character {ch!r} at row {r}, col {c}")
    letters = sorted(starts)
    if letters != [chr(ord("A") + i) for i in range(len(letters))]:
        raise MazeParseError(f"start letters must run A.. without gaps, got {''.join(letters)}")
    digits = sorted(goals)
    if digits != [str(i) for i in range(len(digits))]:
        raise MazeParseError(f"goal digits must run 0.. without gaps, got {''.join(digits)}")
    return Maze(
        width=width,
        height=height,
        walls=frozenset(walls),
        starts=tuple(starts[k] for k in letters),
        goals=tuple(goals[k] for k in digits),
    )


def dump_maze(maze: Maze) -> str:
    grid = [["." for _ in range(maze.width)] for _ in range(maze.height)]
    for r, c in maze.walls:
        grid[r][c] = "#"
    for i, (r, c) in enumerate(maze.starts):
        grid[r][c] = chr(ord("A") + i)
    for g, (r, c) in enumerate(maze.goals):
        grid[r][c] = str(g)
    body = "\n".join("".join(row) for row in grid)
    return f"{maze.width} {maze.height}\n{body}\n"


def read_maze(path) -> Maze:
    with open(path, encoding="utf-8") as fh:
        return load_maze(fh.read())


def write_maze(maze: Maze, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_maze(maze))


def generate_maze(seed: int, n_agents: int, width: int, height: int,
                  wall_density: float, max_tries: int = 200) -> Maze:
    """Random maze with ``n_agents`` starts and as many goals.

    Deterministic in ``seed``.  Layouts with an unreachable start/goal pair are
    rejected and redrawn, up to ``max_tries`` times.
    """
    if n_agents < 1 or width < 1 or height < 1:
        raise PlacementError("n_agents, width and height must be positive")
    if not 0.0 <= wall_density < 1.0:
        raise PlacementError(f"wall_density must be in [0, 1), got {wall_density}")
    if n_agents > MAX_GOALS:
        raise PlacementError(f"at most {MAX_GOALS} agents (one goal each)")
    n_cells = width * height
    n_walls = int(round(wall_density * n_cells))
    if n_walls + 2 * n_agents > n_cells:
        raise PlacementError(
            f"cannot place {n_walls} walls, {n_agents} starts and {n_agents} goals "
            f"in a {width}x{height} grid (seed={seed})")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        order = rng.permutation(n_cells)
        cells = [divmod(int(i), width) for i in order]
        walls = frozenset(cells[:n_walls])
        starts = tuple(cells[n_walls:n_walls + n_agents])
        goals = tuple(cells[n_walls + n_agents:n_walls + 2 * n_agents])
        try:
            return Maze(width, height, walls, starts, goals)
        except MazeValidationError:
            continue
    raise PlacementError(
        f"no connected layout after {max_tries} tries (seed={seed}, n_agents={n_agents}, "
        f"size={width}x{height}, wall_density={wall_density})")


# ---------------------------------------------------------------- dynamics

@dataclass(frozen=True)
class AgentPosition:
    cell: Cell
    arrived_goal: Optional[int] = None
    arrival_step: Optional[int] = None

    @property
    def absorbed(self) -> bool:
        return self.arrived_goal is not None


@dataclass(frozen=True)
class WorldState:
    positions: tuple[AgentPosition, ...]
    step: int = 0
    goal_claims: dict[int, int] = field(default_factory=dict)

    @property
    def n_agents(self) -> int:
        return len(self.positions)


def initial_state(maze: Maze) -> WorldState:
    return WorldState(tuple(AgentPosition(s) for s in maze.starts), 0, {})


def step(maze: Maze, state: WorldState, joint: Sequence[Optional[int]],
         reward: float = 10.0) -> tuple[WorldState, list[float], list[tuple[int, int, int]]]:
    """Apply one joint action.

    ``joint[i]`` is ignored for absorbed agents (``None`` is fine there).
    Returns the next state, the external reward of every agent on this
    transition and the list of ``(agent, goal, step)`` arrivals.
    """
    if len(joint) != state.n_agents:
        raise ValueError(f"joint action has {len(joint)} entries for {state.n_agents} agents")
    t = state.step + 1
    cells = []
    entering: dict[int, list[int]] = {}
    for i, pos in enumerate(state.positions):
        if pos.absorbed:
            cells.append(pos.cell)
            continue
        nxt = maze.move(pos.cell, joint[i])
        cells.append(nxt)
        g = maze.goal_at(nxt)
        if g is not None:
            entering.setdefault(g, []).append(i)

    rewards = [0.0] * state.n_agents
    claims = dict(state.goal_claims)
    arrived: dict[int, int] = {}
    arrivals = []
    for g in sorted(entering):
        agents = entering[g]
        if g not in claims:
            if len(agents) == 1:
                claims[g] = agents[0]
                rewards[agents[0]] = reward
            else:
                claims[g] = TIE
        for i in agents:
            arrived[i] = g
            arrivals.append((i, g, t))
    arrivals.sort()

    positions = []
    for i, pos in enumerate(state.positions):
        if i in arrived:
            positions.append(AgentPosition(cells[i], arrived[i], t))
        elif pos.absorbed:
            positions.append(pos)
        else:
            positions.append(AgentPosition(cells[i]))
    return WorldState(tuple(positions), t, claims), rewards, arrivals


def is_episode_done(state: WorldState, max_step: int) -> bool:
    return state.step >= max_step or all(p.absorbed for p in state.positions)


def iter_cells(maze: Maze) -> Iterable[Cell]:
    for r in range(maze.height):
        for c in range(maze.width):
            yield (r, c)
