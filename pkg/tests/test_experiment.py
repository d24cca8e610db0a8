import numpy as np
import pytest

from dirl.experiment import (
    ExperimentConfig, ResultRow, is_conflict, joint_steps, joint_steps_array, preset_iterations,
    read_results_csv, results_csv, run_experiment, run_seed, summarize, summary_csv, table_csv,
    worker_count,
)
from dirl.maze import generate_maze, load_maze
from dirl.records import EpisodeRecord


def _rec(goals, steps):
    return EpisodeRecord(0, [[] for _ in goals], goals, steps, [0.0] * len(goals),
                         [0.0] * len(goals), max(s or 0 for s in steps))


def test_joint_steps_last_arrival():
    assert joint_steps(_rec([0, 1], [7, 9]), 100) == 9


def test_joint_steps_conflict_is_capped():
    assert joint_steps(_rec([0, 0], [5, 6]), 100) == 100
    assert is_conflict([0, 0]) and not is_conflict([0, None])


def test_joint_steps_timeout_is_capped():
    assert joint_steps(_rec([0, None], [5, None]), 100) == 100


def test_joint_steps_array_matches_scalar():
    goals = np.array([[0, 1], [0, 0], [1, -1], [2, 0]])
    steps = np.array([[7, 9], [5, 6], [3, -1], [4, 4]])
    assert joint_steps_array(goals, steps, 100).tolist() == [9, 100, 100, 4]


def test_presets():
    assert preset_iterations("desk", 2) == 10_000
    assert preset_iterations("desk", 5) == 100_000
    assert preset_iterations("paper", 2) == 50_000
    assert preset_iterations("paper", 5) == 500_000


def test_config_validation():
    maze = load_maze("3 1\nA.0\n")
    with pytest.raises(ValueError):
        ExperimentConfig("sarsa", maze)
    with pytest.raises(ValueError):
        ExperimentConfig("drl", maze, seeds=[])
    with pytest.raises(ValueError):
        ExperimentConfig("drl", maze, iterations=10, eval_window=20)
    assert ExperimentConfig("pmrl", maze).direction.mode == "pmrl"


def test_worker_count_respects_env(monkeypatch):
    monkeypatch.setenv("DIRL_THREADS", "1")
    assert worker_count(10) == 1
    monkeypatch.setenv("DIRL_THREADS", "4")
    assert worker_count(2) == 2


MAZE = generate_maze(3, 2, 5, 5, 0.1)


@pytest.mark.parametrize("algo", ["drl", "pmrl", "ps", "plainq"])
def test_backends_agree(algo):
    cfg = ExperimentConfig(algo, MAZE, "m", iterations=200, seeds=(0,))
    fast = run_seed(cfg, 0)
    slow = run_seed(ExperimentConfig(algo, MAZE, "m", iterations=200, seeds=(0,), backend="python"), 0)
    assert fast.joint_steps.tolist() == slow.joint_steps.tolist()
    assert fast.final_joint_steps == slow.final_joint_steps
    assert fast.goal_assignment == slow.goal_assignment


def test_same_seed_gives_identical_csv(monkeypatch):
    monkeypatch.setenv("DIRL_THREADS", "1")
    cfg = ExperimentConfig("drl", MAZE, "m", iterations=500, seeds=(0, 1, 2))
    a = results_csv(run_experiment(cfg), timing=False)
    b = results_csv(run_experiment(cfg), timing=False)
    assert a == b
    assert a.splitlines()[0] == \
        "maze,algorithm,seed,final_joint_steps,window_min_steps,conflict,goal_assignment,duration_ms"
    assert len(a.splitlines()) == 4


def test_parallel_results_match_serial(monkeypatch):
    cfg = ExperimentConfig("ps", MAZE, "m", iterations=300, seeds=(2, 0, 1))
    monkeypatch.setenv("DIRL_THREADS", "1")
    serial = results_csv(run_experiment(cfg), timing=False)
    monkeypatch.setenv("DIRL_THREADS", "2")
    parallel = results_csv(run_experiment(cfg), timing=False)
    assert serial == parallel
    assert [r.seed for r in read_results_csv(serial)] == [0, 1, 2]


def test_results_csv_round_trip():
    cfg = ExperimentConfig("drl", MAZE, "m", iterations=100, seeds=(0,))
    metrics = [run_seed(cfg, 0)]
    rows = read_results_csv(results_csv(metrics))
    assert rows[0].final_joint_steps == metrics[0].final_joint_steps
    assert rows[0].goal_assignment == metrics[0].goal_assignment
    assert rows[0].duration_ms == metrics[0].duration_ms


def _row(maze, algo, seed, steps, n=2):
    goals = [0, 1, 2, 3, 4][:n] if steps < 100 else [0] * n
    return ResultRow(maze, algo, seed, steps, steps, steps == 100, goals, None)


def test_summarize_min_mean_success():
    rows = [_row("m1", "drl", s, v) for s, v in enumerate([7, 7, 8])]
    (cell,) = summarize(rows)
    assert cell.min_steps == 7
    assert cell.mean_steps == pytest.approx(22 / 3)
    assert cell.success_rate == 1.0


def test_summarize_all_conflicts_reports_cap():
    rows = [_row("m1", "ps", s, 100, n=5) for s in range(3)]
    (cell,) = summarize(rows)
    assert cell.min_steps == 100 and cell.success_rate == 0.0


def test_summarize_rejects_empty():
    with pytest.raises(ValueError):
        summarize([])


def test_table_shape_two_by_ten():
    rows = [_row(f"2a_{m:02d}", algo, 0, 5) for m in range(1, 11) for algo in ("drl", "ps")]
    lines = table_csv(summarize(rows)).splitlines()
    assert lines[0].split(",") == ["agents", "algorithm"] + [f"2a_{m:02d}" for m in range(1, 11)]
    assert [line.split(",")[1] for line in lines[1:]] == ["drl", "ps"]


def test_table_single_run():
    lines = table_csv(summarize([_row("only", "drl", 0, 6)])).splitlines()
    assert lines == ["agents,algorithm,only", "2,drl,6"]


def test_table_groups_agent_counts():
    rows = [_row("a", "drl", 0, 5), _row("b", "ps", 0, 100, n=5), _row("b", "drl", 0, 12, n=5)]
    text = table_csv(summarize(rows))
    blocks = text.split("\n\n")
    assert blocks[0].splitlines() == ["agents,algorithm,a", "2,drl,5"]
    assert blocks[1].splitlines() == ["agents,algorithm,b", "5,drl,12", "5,ps,100"]


def test_summary_csv_long_form():
    text = summary_csv(summarize([_row("m", "drl", 0, 7), _row("m", "drl", 1, 100)]))
    assert text.splitlines()[1] == "2,m,drl,7,53.50,0.50,7,2"
