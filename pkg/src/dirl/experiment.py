"""Seeded training runs, the joint-steps metric and comparison tables."""
from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import fast
from .drl import DirectionParams, new_brains, run_iteration
from .learner import LearningParams, QTable, greedy_rollout, run_iteration_plain
from .maze import Maze, goal_label
from .profit_sharing import PSAgent, run_iteration_ps
from .records import EpisodeRecord

ALGORITHMS = fast.ALGORITHMS
PRESETS = {
    "desk": {2: 10_000, 5: 100_000},
    "paper": {2: 50_000, 5: 500_000},
}
DEFAULT_SEEDS = 10


def preset_iterations(preset: str, n_agents: int) -> int:
    table = PRESETS[preset]
    if n_agents in table:
        return table[n_agents]
    # other agent counts: nearest published setting at or above
    bigger = [k for k in sorted(table) if k >= n_agents]
    return table[bigger[0] if bigger else max(table)]


@dataclass
class ExperimentConfig:
    algorithm: str
    maze: Maze
    maze_name: str = "maze"
    iterations: int = 10_000
    seeds: Sequence[int] = tuple(range(DEFAULT_SEEDS))
    params: LearningParams = field(default_factory=LearningParams)
    direction: DirectionParams = field(default_factory=DirectionParams)
    eval_window: int = 100
    backend: str = "fast"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if not list(self.seeds):
            raise ValueError("seeds must not be empty")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not 1 <= self.eval_window <= self.iterations:
            raise ValueError(f"eval_window must be in [1, iterations], got {self.eval_window}")
        if self.backend not in ("fast", "python"):
            raise ValueError(f"backend must be 'fast' or 'python', got {self.backend!r}")
        if self.algorithm in ("drl", "pmrl") and self.direction.mode != self.algorithm:
            self.direction = replace(self.direction, mode=self.algorithm)

    @property
    def n_agents(self) -> int:
        return self.maze.n_agents


@dataclass
class RunMetrics:
    maze: str
    algorithm: str
    seed: int
    joint_steps: np.ndarray  # per training iteration
    final_joint_steps: int
    window_min_steps: int
    conflict: bool
    goal_assignment: list[Optional[int]]
    duration_ms: int
    max_step: int = 100
    qtables: list[QTable] = field(default_factory=list, repr=False)
    records: list[EpisodeRecord] = field(default_factory=list, repr=False)

    @property
    def n_agents(self) -> int:
        return len(self.goal_assignment)

    @property
    def success(self) -> bool:
        return self.final_joint_steps < self.max_step


def is_conflict(arrival_goal: Sequence[Optional[int]]) -> bool:
    arrived = [g for g in arrival_goal if g is not None]
    return len(set(arrived)) < len(arrived)


def joint_steps(record: EpisodeRecord, max_step: int) -> int:
    """Step at which the last agent arrived; ``max_step`` on a conflict or timeout."""
    if None in record.arrival_goal or is_conflict(record.arrival_goal):
        return max_step
    return max(record.arrival_step)


def joint_steps_array(arrival_goal: np.ndarray, arrival_step: np.ndarray, max_step: int) -> np.ndarray:
    """Vectorised ``joint_steps`` over ``(iterations, agents)`` logs (-1 = no arrival)."""
    missing = (arrival_goal < 0).any(axis=1)
    srt = np.sort(arrival_goal, axis=1)
    dup = (srt[:, 1:] == srt[:, :-1]).any(axis=1) if srt.shape[1] > 1 else np.zeros(len(srt), bool)
    out = arrival_step.max(axis=1)
    out[missing | dup] = max_step
    return out


def _train_python(config: ExperimentConfig, seed: int, keep_records: bool = False):
    rng = np.random.RandomState(seed)
    maze, params = config.maze, config.params
    records = []
    if config.algorithm in ("drl", "pmrl"):
        brains = new_brains(maze, rng)
        for k in range(config.iterations):
            records.append(run_iteration(brains, maze, params, config.direction, rng, k))
        tables = [b.qtable for b in brains]
    elif config.algorithm == "ps":
        agents = [PSAgent.new(maze) for _ in range(maze.n_agents)]
        for k in range(config.iterations):
            records.append(run_iteration_ps(agents, maze, params, rng, k))
        tables = [a.qtable for a in agents]
    else:
        tables = [QTable.for_maze(maze) for _ in range(maze.n_agents)]
        for k in range(config.iterations):
            records.append(run_iteration_plain(tables, maze, params, rng, k))
    steps = np.array([joint_steps(r, params.max_step) for r in records], dtype=np.int64)
    return tables, steps, records


def _train_fast(config: ExperimentConfig, seed: int, keep_records: bool = False):
    res = fast.train(config.maze, config.algorithm, config.params, config.direction,
                     config.iterations, seed, keep_bids=keep_records)
    steps = joint_steps_array(res.arrival_goal, res.arrival_step, config.params.max_step)
    return res.qtables, steps, fast.to_records(res) if keep_records else []


def run_seed(config: ExperimentConfig, seed: int, keep_records: bool = False) -> RunMetrics:
    t0 = time.perf_counter()
    train = _train_python if config.backend == "python" else _train_fast
    tables, steps, records = train(config, seed, keep_records)
    final = greedy_rollout(tables, config.maze, config.params.max_step)
    duration = int(round((time.perf_counter() - t0) * 1000))
    metrics = RunMetrics(
        maze=config.maze_name,
        algorithm=config.algorithm,
        seed=seed,
        joint_steps=steps,
        final_joint_steps=joint_steps(final, config.params.max_step),
        window_min_steps=int(steps[-config.eval_window:].min()),
        conflict=is_conflict(final.arrival_goal),
        goal_assignment=list(final.arrival_goal),
        duration_ms=duration,
        max_step=config.params.max_step,
        qtables=tables,
        records=records if keep_records else [],
    )
    return metrics


def worker_count(n_jobs: int) -> int:
    env = os.environ.get("DIRL_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, n_jobs))


def _run_job(args):
    config, seed, keep_records = args
    return run_seed(config, seed, keep_records)


def run_many(jobs: Sequence[tuple[ExperimentConfig, int]],
             keep_records: bool = False) -> list[RunMetrics]:
    """Run (config, seed) jobs, in a process pool when more than one worker is allowed.

    Results come back sorted by (maze, algorithm, seed).
    """
    tasks = [(config, seed, keep_records) for config, seed in jobs]
    workers = worker_count(len(tasks))
    if workers == 1:
        out = [_run_job(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_run_job, tasks))
    return sorted(out, key=lambda m: (m.maze, m.algorithm, m.seed))


def run_experiment(config: ExperimentConfig, keep_records: bool = False) -> list[RunMetrics]:
    return run_many([(config, seed) for seed in config.seeds], keep_records)


# ---------------------------------------------------------------- CSV output

RESULT_COLUMNS = ["maze", "algorithm", "seed", "final_joint_steps", "window_min_steps",
                  "conflict", "goal_assignment", "duration_ms"]


def format_assignment(goals: Sequence[Optional[int]]) -> str:
    return ";".join("-" if g is None else goal_label(g) for g in goals)


def parse_assignment(text: str) -> list[Optional[int]]:
    return [None if tok == "-" else int(tok[1:]) for tok in text.split(";")]


def results_csv(metrics: Sequence[RunMetrics], timing: bool = True) -> str:
    """Results CSV; ``timing=False`` blanks ``duration_ms`` for byte-stable output."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for m in metrics:
        writer.writerow([m.maze, m.algorithm, m.seed, m.final_joint_steps, m.window_min_steps,
                         int(m.conflict), format_assignment(m.goal_assignment),
                         m.duration_ms if timing else ""])
    return buf.getvalue()


@dataclass
class ResultRow:
    maze: str
    algorithm: str
    seed: int
    final_joint_steps: int
    window_min_steps: int
    conflict: bool
    goal_assignment: list[Optional[int]]
    duration_ms: Optional[int]

    @property
    def n_agents(self) -> int:
        return len(self.goal_assignment)


def read_results_csv(text: str) -> list[ResultRow]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != RESULT_COLUMNS:
        raise ValueError(f"expected columns {RESULT_COLUMNS}, got {reader.fieldnames}")
    return [ResultRow(rec["maze"], rec["algorithm"], int(rec["seed"]),
                      int(rec["final_joint_steps"]), int(rec["window_min_steps"]),
                      rec["conflict"] == "1", parse_assignment(rec["goal_assignment"]),
                      int(rec["duration_ms"]) if rec["duration_ms"] else None)
            for rec in reader]


@dataclass
class SummaryCell:
    n_agents: int
    maze: str
    algorithm: str
    min_steps: int
    mean_steps: float
    success_rate: float
    window_min_steps: int
    n_runs: int


def summarize(rows: Sequence, max_step: int = 100) -> list[SummaryCell]:
    """Per (maze, algorithm): minimum final joint steps over seeds, plus mean and success rate.

    Accepts ``RunMetrics`` or ``ResultRow`` objects.
    """
    if not rows:
        raise ValueError("nothing to summarize")
    groups: dict[tuple[int, str, str], list] = {}
    for row in rows:
        groups.setdefault((row.n_agents, row.maze, row.algorithm), []).append(row)
    cells = []
    for (n, maze, algo), grp in sorted(groups.items()):
        finals = [r.final_joint_steps for r in grp]
        cells.append(SummaryCell(
            n_agents=n, maze=maze, algorithm=algo,
            min_steps=min(finals),
            mean_steps=float(np.mean(finals)),
            success_rate=sum(f < max_step for f in finals) / len(finals),
            window_min_steps=min(r.window_min_steps for r in grp),
            n_runs=len(grp),
        ))
    return cells


def summary_csv(cells: Sequence[SummaryCell]) -> str:
    """Long-form summary: one line per (maze, algorithm)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["agents", "maze", "algorithm", "min_steps", "mean_steps", "success_rate",
                     "window_min_steps", "runs"])
    for c in cells:
        writer.writerow([c.n_agents, c.maze, c.algorithm, c.min_steps, f"{c.mean_steps:.2f}",
                         f"{c.success_rate:.2f}", c.window_min_steps, c.n_runs])
    return buf.getvalue()


def table_csv(cells: Sequence[SummaryCell]) -> str:
    """Grid of minimum steps: one block per agent count, algorithms by mazes.

    Blocks are separated by a blank line and each starts with its own header.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    counts = sorted({c.n_agents for c in cells})
    for k, n in enumerate(counts):
        block = [c for c in cells if c.n_agents == n]
        mazes = sorted({c.maze for c in block})
        algos = [a for a in ALGORITHMS if any(c.algorithm == a for c in block)]
        algos += sorted({c.algorithm for c in block} - set(algos))
        lookup = {(c.maze, c.algorithm): c.min_steps for c in block}
        if k:
            buf.write("\n")
        writer.writerow(["agents", "algorithm"] + mazes)
        for algo in algos:
            writer.writerow([n, algo] + [lookup.get((m, algo), "") for m in mazes])
    return buf.getvalue()
