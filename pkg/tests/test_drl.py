import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dirl.drl import (
    AgentBrain, DirectionParams, GoalStats, drl_condition, internal_reward, new_brains,
    run_iteration, select_goal, update_goal_value,
)
from dirl.learner import LearningParams
from dirl.maze import generate_maze, load_maze
from dirl.records import read_episode_log, write_episode_log

P = LearningParams()
D = DirectionParams()


def stats_with(t, n_goals=None):
    n_goals = n_goals or len(t)
    s = GoalStats.empty(n_goals)
    s.t = list(t)
    return s


# ---------------------------------------------------------------- internal reward

def test_internal_reward_other_goal_farther():
    # other goal recorded 1 step farther: 10 * 0.9 + 10
    s = stats_with([5, 6])
    assert internal_reward(s, 0, True, 10.0, 0.9, 10.0) == pytest.approx(19.0, abs=1e-12)


def test_internal_reward_other_goal_nearer():
    # other goal 2 steps nearer: 10 / 0.81 + 10
    s = stats_with([7, 5])
    expected = 10 / 0.81 + 10
    assert internal_reward(s, 0, True, 10.0, 0.9, 10.0) == pytest.approx(expected, abs=1e-12)
    assert round(expected, 6) == 22.345679


def test_internal_reward_takes_max_over_others():
    s = stats_with([4, 5, 3])
    # candidates 10*0.9 and 10/0.9
    assert internal_reward(s, 0, True, 10.0, 0.9, 10.0) == pytest.approx(10 / 0.9 + 10, abs=1e-12)


def test_internal_reward_three_goals_worked_example():
    s = stats_with([3, 5, 4])
    # goal 1: best of 10*0.9^-2 and 10*0.9^-1, plus delta 2
    assert internal_reward(s, 1, True, 10.0, 0.9, 2.0) == pytest.approx(10 / 0.81 + 2, abs=1e-12)


def test_internal_reward_no_other_goal_recorded():
    s = stats_with([4, None])
    assert internal_reward(s, 0, True, 10.0, 0.9, 10.0) == 20.0


def test_internal_reward_not_first_is_zero():
    assert internal_reward(stats_with([4, 2]), 0, False, 10.0, 0.9, 10.0) == 0.0


def test_internal_reward_needs_recorded_step():
    with pytest.raises(ValueError):
        internal_reward(stats_with([None, 2]), 0, True, 10.0, 0.9, 10.0)


@settings(max_examples=100, deadline=None)
@given(t=st.lists(st.integers(1, 60), min_size=2, max_size=6),
       g=st.integers(0, 5), delta=st.floats(0.01, 50))
def test_internal_reward_dominates_every_other_goal(t, g, delta):
    g = g % len(t)
    s = stats_with(t)
    ir = internal_reward(s, g, True, 10.0, 0.9, delta)
    for other, t_o in enumerate(t):
        if other != g:
            assert ir > 10.0 * 0.9 ** (t_o - t[g])


# ---------------------------------------------------------------- bids

def test_bid_first_update():
    s = stats_with([8, None])
    s.n[0] = 1
    update_goal_value(s, 0, True)
    assert s.bid[0] == 8.0


def test_bid_running_average():
    s = stats_with([8, None])
    s.bid[0] = 8.0
    s.n[0] = 2
    update_goal_value(s, 0, False)
    assert s.bid[0] == pytest.approx(4.0, abs=1e-12)
    s.n[0] = 3
    update_goal_value(s, 0, True)
    # (2/3) * 4 + 8/3
    assert s.bid[0] == pytest.approx(16 / 3, abs=1e-12)


def test_bid_update_requires_count():
    with pytest.raises(ValueError):
        update_goal_value(stats_with([3]), 0, True)


def test_bid_decays_toward_zero_when_always_lost():
    s = stats_with([6, 9])
    s.bid = [6.0, 0.0]
    s.n = [1, 0]
    for k in range(2, 500):
        s.n[0] = k
        update_goal_value(s, 0, False)
    # bid = 6 / k after k - 1 failed updates
    assert s.bid[0] == pytest.approx(6 / 499, abs=1e-12)


# ---------------------------------------------------------------- condition

def test_condition_mean_above_threshold():
    s = stats_with([1, 1])
    s.r_sum[0], s.c[0] = 60.0, 10
    assert drl_condition(s, 0, 5.0)


def test_condition_is_strict():
    s = stats_with([1, 1])
    s.r_sum[0], s.c[0] = 50.0, 10
    assert not drl_condition(s, 0, 5.0)


def test_condition_without_arrivals_is_false():
    assert not drl_condition(stats_with([None]), 0, 5.0)
    assert not drl_condition(stats_with([None]), 0, -1.0)


@settings(max_examples=100, deadline=None)
@given(wins=st.lists(st.booleans(), min_size=1, max_size=60), th=st.floats(10.0, 100.0))
def test_condition_never_holds_at_or_above_reward(wins, th):
    s = stats_with([1])
    for w in wins:
        s.r_sum[0] += 10.0 if w else 0.0
        s.c[0] += 1
    assert 0.0 <= s.mean_reward(0) <= 10.0
    assert not drl_condition(s, 0, th)


# ---------------------------------------------------------------- goal selection

def test_select_goal_argmax_without_randomness():
    s = stats_with([1, 1, 1])
    s.bid = [1.0, 7.0, 3.0]
    rng = np.random.RandomState(0)
    assert all(select_goal(s, 0.0, rng) == 1 for _ in range(50))


def test_select_goal_tie_frequencies():
    s = stats_with([1, 1, 1])
    rng = np.random.RandomState(21)
    counts = np.bincount([select_goal(s, 0.0, rng) for _ in range(10_000)], minlength=3)
    sigma = math.sqrt(10_000 * (1 / 3) * (2 / 3))
    assert all(abs(c - 10_000 / 3) < 3 * sigma for c in counts)


def test_select_goal_random_fraction():
    s = stats_with([1, 1])
    s.bid = [0.0, 5.0]
    rng = np.random.RandomState(22)
    picks = [select_goal(s, 0.1, rng) for _ in range(10_000)]
    # goal 0 only through the random branch: 0.1 * 1/2
    sigma = math.sqrt(10_000 * 0.05 * 0.95)
    assert abs(picks.count(0) - 500) < 3 * sigma


# ---------------------------------------------------------------- episodes

CHAIN = load_maze("4 1\nA..0\n")


def test_single_goal_learns_shortest_path():
    rng = np.random.RandomState(0)
    brains = new_brains(CHAIN, rng)
    for k in range(2000):
        rec = run_iteration(brains, CHAIN, P, D, rng, k)
    assert brains[0].stats.t == [3]
    assert rec.arrival_goal == [0]
    # only one goal: the internal reward falls back to r + delta
    assert brains[0].qtable.get((0, 2), 3) == pytest.approx(20.0, abs=1e-6)


def test_episode_is_bounded():
    maze = load_maze("6 3\nA.....\n.####1\n0....B\n")
    rng = np.random.RandomState(1)
    brains = new_brains(maze, rng)
    rec = run_iteration(brains, maze, P, D, rng)
    assert 1 <= rec.steps <= P.max_step
    assert all(len(tr) <= P.max_step + 1 for tr in rec.trajectories)


def test_brain_only_sees_its_own_arrivals():
    maze = generate_maze(3, 2, 5, 5, 0.1)
    rng = np.random.RandomState(4)
    brains = new_brains(maze, rng)
    for k in range(300):
        rec = run_iteration(brains, maze, P, D, rng, k)
        for i, b in enumerate(brains):
            assert b.arrival_goal == rec.arrival_goal[i]
    for b in brains:
        assert sum(b.stats.c) <= 300


def test_loser_bid_decays_and_switches():
    # B can never be first at G0: A is one step away
    maze = load_maze("5 2\nA0...\n.B..1\n")
    brain = AgentBrain.new(maze, np.random.RandomState(0))
    brain.g_sel = 0
    brain.stats.t = [2, 3]
    brain.stats.bid = [2.0, 1.0]
    brain.stats.n = [1, 1]
    brain.stats.r_sum = [0.0, 30.0]
    brain.stats.c = [3, 3]
    rng = np.random.RandomState(7)
    direction = DirectionParams(goal_random_prob=0.0)
    history = []
    for _ in range(10):
        # every episode ends with a late, unpaid arrival at G0
        brain.begin_episode()
        brain.arrival_goal, brain.received_reward_this_episode = 0, 0.0
        brain.stats.c[0] += 1
        brain.end_episode(direction, rng)
        history.append(brain.g_sel)
        assert not brain.last_condition
    assert history[0] == 0 and 1 in history
    assert brain.stats.bid[0] == pytest.approx(2.0 / brain.stats.n[0], abs=1e-12)


# ---------------------------------------------------------------- replay

def _replay(rows, n_agents, n_goals, threshold, mode):
    t = [[None] * n_goals for _ in range(n_agents)]
    n = [[0] * n_goals for _ in range(n_agents)]
    r_sum = [[0.0] * n_goals for _ in range(n_agents)]
    c = [[0] * n_goals for _ in range(n_agents)]
    bid = [[0.0] * n_goals for _ in range(n_agents)]
    for row in rows:
        i, goal = row["agent"], row["arrival_goal"]
        if goal is not None:
            step = row["arrival_step"]
            t[i][goal] = step if t[i][goal] is None else min(t[i][goal], step)
            r_sum[i][goal] += row["external_reward"]
            c[i][goal] += 1
        g = row["g_sel"]
        n[i][g] += 1
        won = goal == g and row["external_reward"] > 0
        cond = won and (mode == "pmrl" or r_sum[i][g] / c[i][g] > threshold)
        gain = t[i][g] if cond else 0
        bid[i][g] = (n[i][g] - 1) / n[i][g] * bid[i][g] + gain / n[i][g]
        np.testing.assert_allclose(row["bids"], bid[i], rtol=0, atol=1e-12)
    return bid


@pytest.mark.parametrize("mode", ["drl", "pmrl"])
def test_bid_replay_from_episode_log(mode):
    maze = generate_maze(11, 3, 6, 6, 0.15)
    direction = DirectionParams(mode=mode)
    rng = np.random.RandomState(9)
    brains = new_brains(maze, rng)
    records = [run_iteration(brains, maze, P, direction, rng, k) for k in range(400)]
    rows = read_episode_log(write_episode_log(records, maze.n_goals))
    assert len(rows) == 400 * 3
    bid = _replay(rows, 3, maze.n_goals, direction.threshold, mode)
    np.testing.assert_allclose(bid, [b.stats.bid for b in brains], rtol=0, atol=1e-12)
    assert any(any(r.conditions) for r in records)


def test_modes_agree_when_every_arrival_wins():
    # a lone agent is always first, so its mean reward is r > Th and the modes coincide
    maze = load_maze("5 3\nA...0\n.....\n1....\n")
    runs = {}
    for mode in ("drl", "pmrl"):
        rng = np.random.RandomState(5)
        brains = new_brains(maze, rng)
        direction = DirectionParams(mode=mode)
        runs[mode] = [run_iteration(brains, maze, P, direction, rng, k).bids for k in range(300)]
    assert runs["drl"] == runs["pmrl"]


def test_direction_params_validated():
    with pytest.raises(ValueError):
        DirectionParams(delta=0)
    with pytest.raises(ValueError):
        DirectionParams(goal_random_prob=1.5)
    with pytest.raises(ValueError):
        DirectionParams(mode="ps")
