"""Maze suites shipped with the package.

Each suite is a generator recipe: consecutive generator seeds starting at
``first_seed``, keeping the first ``count`` mazes whose optimal makespan
(from the oracle, never from a learner) is at least ``min_makespan``.  The
resulting files live in ``dirl/mazes`` so runs do not depend on the
generator staying byte-stable; ``build_suite`` regenerates them for checks.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .maze import Maze, generate_maze, load_maze
from .oracle import optimal_assignment


@dataclass(frozen=True)
class SuiteRecipe:
    n_agents: int
    width: int
    height: int
    wall_density: float
    first_seed: int
    min_makespan: int
    count: int = 10

    @property
    def prefix(self) -> str:
        return f"{self.n_agents}a"


SUITES = {
    2: SuiteRecipe(n_agents=2, width=6, height=6, wall_density=0.2, first_seed=2000, min_makespan=3),
    5: SuiteRecipe(n_agents=5, width=12, height=12, wall_density=0.2, first_seed=1000,
                 min_makespan=10),
}
CONFLICT = "conflict"


def maze_name(recipe: SuiteRecipe, k: int) -> str:
    return f"{recipe.prefix}_{k + 1:02d}"


def suite_seeds(recipe: SuiteRecipe, max_tries: int = 10_000) -> list[int]:
    seeds = []
    seed = recipe.first_seed
    while len(seeds) < recipe.count:
        if seed - recipe.first_seed > max_tries:
            raise RuntimeError(f"only {len(seeds)} mazes pass the filter for {recipe}")
        maze = generate_maze(seed, recipe.n_agents, recipe.width, recipe.height, recipe.wall_density)
        if optimal_assignment(maze).makespan >= recipe.min_makespan:
            seeds.append(seed)
        seed += 1
    return seeds


def build_suite(recipe: SuiteRecipe) -> list[tuple[str, Maze]]:
    return [(maze_name(recipe, k),
             generate_maze(seed, recipe.n_agents, recipe.width, recipe.height, recipe.wall_density))
            for k, seed in enumerate(suite_seeds(recipe))]


def _maze_dir():
    return resources.files("dirl") / "mazes"


def read_packaged(name: str) -> Maze:
    return load_maze((_maze_dir() / f"{name}.maze").read_text())


def packaged_path(name: str):
    """Filesystem path of a shipped maze (usable as a CLI ``--maze`` argument)."""
    return _maze_dir() / f"{name}.maze"


def load_suite(n_agents: int) -> list[tuple[str, Maze]]:
    recipe = SUITES[n_agents]
    return [(maze_name(recipe, k), read_packaged(maze_name(recipe, k))) for k in range(recipe.count)]


def conflict_maze() -> Maze:
    """Two agents whose nearest goal is the same G0; G1 is strictly farther for both.

    ``A`` sits six cells nearer to G1 than ``B`` does, so the best joint plan
    sends ``A`` to G1 and ``B`` to G0.
    """
    return read_packaged(CONFLICT)
