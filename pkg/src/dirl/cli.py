"""Command line entry point: ``dirl gen|run|render|table``.

``run`` reads an optional JSON config whose keys match the long flag names
(``goal_random_prob`` for ``--goal-random-prob``); flags given on the
command line override it, and anything left unset takes the published
defaults.  ``DIRL_THREADS`` caps the number of worker processes.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .drl import DirectionParams
from .experiment import (
    ALGORITHMS, DEFAULT_SEEDS, PRESETS, ExperimentConfig, preset_iterations, read_results_csv,
    results_csv, run_many, summarize, summary_csv, table_csv,
)
from .learner import LearningParams, dump_qtables, load_qtables
from .maze import MazeError, PlacementError, dump_maze, generate_maze, read_maze
from .oracle import optimal_assignment
from .records import write_episode_log
from .render import render_ascii, render_svg
from .suite import SUITES, load_suite, packaged_path

EXIT_ERROR = 1
EXIT_PLACEMENT = 3

RUN_DEFAULTS = {
    "algo": None,
    "maze": [],
    "suite": None,
    "preset": "desk",
    "seeds": DEFAULT_SEEDS,
    "iterations": None,
    "alpha": 0.1,
    "gamma": 0.9,
    "epsilon": 0.1,
    "delta": 10.0,
    "threshold": 5.0,
    "goal_random_prob": 0.1,
    "max_step": 100,
    "out": "results",
    "episode_log": False,
}


class CliError(Exception):
    pass


def _size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like 5x5, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random maze and print its optimal makespan")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--agents", type=int, default=2)
    gen.add_argument("--size", type=_size, default=(5, 5), help="WIDTHxHEIGHT")
    gen.add_argument("--density", type=float, default=0.2, help="wall density in [0, 1)")
    gen.add_argument("--out", help="maze file to write (default: print to stdout)")

    run = sub.add_parser("run", help="train over seeds and write a results CSV")
    run.add_argument("--config", help="JSON file with run settings")
    run.add_argument("--algo", choices=ALGORITHMS, default=None)
    run.add_argument("--maze", action="append", default=None,
                     help="maze file or shipped maze name; repeatable")
    run.add_argument("--suite", type=int, choices=sorted(SUITES), default=None,
                     help="run on the shipped suite for this agent count")
    run.add_argument("--preset", choices=sorted(PRESETS), default=None)
    run.add_argument("--seeds", type=int, default=None, help="number of seeds, 0..N-1")
    run.add_argument("--iterations", type=int, default=None, help="overrides the preset")
    for name in ("alpha", "gamma", "epsilon", "delta", "threshold"):
        run.add_argument(f"--{name}", type=float, default=None)
    run.add_argument("--goal-random-prob", dest="goal_random_prob", type=float, default=None)
    run.add_argument("--max-step", dest="max_step", type=int, default=None)
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument("--episode-log", dest="episode_log", action="store_true", default=None,
                     help="also write one episode log CSV per seed")

    render = sub.add_parser("render", help="draw a Q-table dump as ASCII or SVG")
    render.add_argument("--q", required=True, help="Q-table CSV written by run")
    render.add_argument("--maze", required=True)
    render.add_argument("--format", choices=("ascii", "svg"), default="ascii")
    render.add_argument("--max-step", dest="max_step", type=int, default=100)
    render.add_argument("--out", help="file to write (default: stdout)")

    table = sub.add_parser("table", help="summarize result CSVs into a minimum-steps grid")
    table.add_argument("results_dir")
    table.add_argument("--long", action="store_true", help="one line per maze and algorithm")
    table.add_argument("--max-step", dest="max_step", type=int, default=100)
    return parser


def _resolve_maze(ref: str):
    path = Path(ref)
    if path.exists():
        return path.stem, read_maze(path)
    name = path.stem if path.suffix == ".maze" else ref
    shipped = packaged_path(name)
    if shipped.is_file():
        return name, read_maze(shipped)
    raise CliError(f"no maze file {ref!r} and no shipped maze named {name!r}")


def merge_settings(args: argparse.Namespace) -> dict:
    settings = dict(RUN_DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}")
        unknown = set(loaded) - set(RUN_DEFAULTS)
        if unknown:
            raise CliError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if isinstance(loaded.get("maze"), str):
            loaded["maze"] = [loaded["maze"]]
        settings.update(loaded)
    for key in RUN_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if settings["algo"] not in ALGORITHMS:
        raise CliError(f"--algo is required, one of {', '.join(ALGORITHMS)}")
    if not settings["maze"] and settings["suite"] is None:
        raise CliError("give --maze or --suite")
    if settings["seeds"] < 1:
        raise CliError("--seeds must be at least 1")
    return settings


def cmd_gen(args) -> int:
    w, h = args.size
    maze = generate_maze(args.seed, args.agents, w, h, args.density)
    best = optimal_assignment(maze)
    text = dump_maze(maze)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"optimal makespan: {best.makespan} ({';'.join(best.labels())})")
    return 0


def cmd_run(args) -> int:
    s = merge_settings(args)
    mazes = [_resolve_maze(ref) for ref in s["maze"]]
    if s["suite"] is not None:
        mazes += load_suite(s["suite"])
    params = LearningParams(alpha=s["alpha"], gamma=s["gamma"], epsilon=s["epsilon"],
                            max_step=s["max_step"])
    direction = DirectionParams(delta=s["delta"], threshold=s["threshold"],
                                goal_random_prob=s["goal_random_prob"])
    jobs = []
    for name, maze in mazes:
        iterations = s["iterations"] or preset_iterations(s["preset"], maze.n_agents)
        config = ExperimentConfig(algorithm=s["algo"], maze=maze, maze_name=name,
                                  iterations=iterations, seeds=tuple(range(s["seeds"])),
                                  params=params, direction=direction,
                                  eval_window=min(100, iterations))
        jobs += [(config, seed) for seed in config.seeds]
    metrics = run_many(jobs, keep_records=bool(s["episode_log"]))

    out = Path(s["out"])
    out.mkdir(parents=True, exist_ok=True)
    by_maze = {name: maze for name, maze in mazes}
    stem = f"{'+'.join(by_maze)}_{s['algo']}" if len(by_maze) <= 3 else f"sweep_{s['algo']}"
    (out / f"{stem}.csv").write_text(results_csv(metrics))
    for m in metrics:
        maze = by_maze[m.maze]
        base = out / f"{m.maze}_{m.algorithm}_seed{m.seed}"
        Path(f"{base}_q.csv").write_text(dump_qtables(m.qtables, maze))
        if s["episode_log"]:
            Path(f"{base}_episodes.csv").write_text(write_episode_log(m.records, maze.n_goals))
    sys.stdout.write(table_csv(summarize(metrics, params.max_step)))
    print(f"wrote {out / (stem + '.csv')}", file=sys.stderr)
    return 0


def cmd_render(args) -> int:
    _, maze = _resolve_maze(args.maze)
    try:
        text = Path(args.q).read_text()
    except OSError as exc:
        raise CliError(str(exc))
    try:
        tables = load_qtables(text, maze)
    except ValueError as exc:
        raise CliError(f"Q-table dump does not match maze {args.maze}: {exc}")
    draw = render_svg if args.format == "svg" else render_ascii
    picture = draw(tables, maze, args.max_step)
    if args.out:
        Path(args.out).write_text(picture)
    else:
        sys.stdout.write(picture)
    return 0


def cmd_table(args) -> int:
    root = Path(args.results_dir)
    if not root.is_dir():
        raise CliError(f"{root} is not a directory")
    rows = []
    for path in sorted(root.glob("*.csv")):
        text = path.read_text()
        if text.startswith("maze,algorithm,seed,"):
            rows += read_results_csv(text)
    if not rows:
        raise CliError(f"no result CSVs in {root}")
    cells = summarize(rows, args.max_step)
    sys.stdout.write(summary_csv(cells) if args.long else table_csv(cells))
    return 0


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "render": cmd_render, "table": cmd_table}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except PlacementError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PLACEMENT
    except (CliError, MazeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
