"""Compiled training loop for long runs.

Mirrors ``drl.run_iteration``, ``profit_sharing.run_iteration_ps`` and
``learner.run_iteration_plain`` operation for operation, including the order
of random draws, so a run seeded here matches the Python reference bit for
bit (checked in the test suite).  Numba's ``np.random`` is the same MT19937
stream as ``np.random.RandomState``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .drl import DirectionParams, GoalStats
from .learner import LearningParams, QTable
from .maze import Maze
from .records import EpisodeRecord

ALGORITHMS = ("drl", "pmrl", "ps", "plainq")
DRL, PMRL, PS, PLAINQ = range(4)

UNCLAIMED = -2
TIED = -1


@numba.njit(cache=True)
def _pick(k):
    i = int(np.random.random() * k)
    return i if i < k else k - 1


@numba.njit(cache=True)
def _argmax_random(values):
    best = values[0]
    for v in values[1:]:
        if v > best:
            best = v
    count = 0
    for v in values:
        if v == best:
            count += 1
    if count == 1:
        k = 0
    else:
        k = _pick(count)
    for i in range(values.shape[0]):
        if values[i] == best:
            if k == 0:
                return i
            k -= 1
    return -1


@numba.njit(cache=True)
def _select_action(qrow, epsilon):
    if np.random.random() < epsilon:
        return _pick(4)
    return _argmax_random(qrow)


@numba.njit(cache=True)
def _row_max(qrow):
    best = qrow[0]
    for v in qrow[1:]:
        if v > best:
            best = v
    return best


@numba.njit(cache=True)
def _internal_reward(t, g, r, gamma, delta):
    found = False
    best = 0.0
    for other in range(t.shape[0]):
        if other == g or t[other] < 0:
            continue
        value = r * gamma ** float(t[other] - t[g])
        if not found or value > best:
            best = value
            found = True
    if not found:
        return r + delta
    return best + delta


@numba.njit(cache=True)
def _train(nxt, goal_of, starts, n_goals, algo, alpha, gamma, epsilon, max_step, r,
           delta, threshold, goal_random_prob, require_arrival, iterations, seed, initial_q,
           keep_bids):
    np.random.seed(seed)
    n_agents = starts.shape[0]
    n_cells = nxt.shape[0]
    q = np.full((n_agents, n_cells, 4), initial_q)
    bid = np.zeros((n_agents, n_goals))
    tmin = np.full((n_agents, n_goals), -1, dtype=np.int64)
    n_upd = np.zeros((n_agents, n_goals), dtype=np.int64)
    r_sum = np.zeros((n_agents, n_goals))
    c = np.zeros((n_agents, n_goals), dtype=np.int64)
    g_sel = np.full(n_agents, -1, dtype=np.int64)
    goal_directed = algo == DRL or algo == PMRL
    if goal_directed:
        for i in range(n_agents):
            g_sel[i] = _pick(n_goals)

    log_goal = np.full((iterations, n_agents), -1, dtype=np.int64)
    log_step = np.full((iterations, n_agents), -1, dtype=np.int64)
    log_ext = np.zeros((iterations, n_agents))
    log_int = np.zeros((iterations, n_agents))
    log_gsel = np.full((iterations, n_agents), -1, dtype=np.int64)
    log_cond = np.zeros((iterations, n_agents), dtype=np.bool_)
    log_bids = np.zeros((iterations if keep_bids else 0, n_agents, n_goals))
    log_steps = np.zeros(iterations, dtype=np.int64)

    pos = np.empty(n_agents, dtype=np.int64)
    new_pos = np.empty(n_agents, dtype=np.int64)
    act = np.empty(n_agents, dtype=np.int64)
    absorbed = np.zeros(n_agents, dtype=np.bool_)
    reward = np.zeros(n_agents)
    claims = np.empty(n_goals, dtype=np.int64)
    entering = np.zeros(n_goals, dtype=np.int64)
    trace_s = np.empty((n_agents, max_step), dtype=np.int64)
    trace_a = np.empty((n_agents, max_step), dtype=np.int64)
    trace_len = np.zeros(n_agents, dtype=np.int64)

    for it in range(iterations):
        pos[:] = starts
        absorbed[:] = False
        claims[:] = UNCLAIMED
        trace_len[:] = 0
        t = 0
        while t < max_step:
            done = True
            for i in range(n_agents):
                if not absorbed[i]:
                    done = False
            if done:
                break
            t += 1
            entering[:] = 0
            for i in range(n_agents):
                if absorbed[i]:
                    continue
                a = _select_action(q[i, pos[i]], epsilon)
                act[i] = a
                new_pos[i] = nxt[pos[i], a]
                g = goal_of[new_pos[i]]
                if g >= 0:
                    entering[g] += 1
            reward[:] = 0.0
            for g in range(n_goals):
                if entering[g] == 0 or claims[g] != UNCLAIMED:
                    continue
                if entering[g] == 1:
                    for i in range(n_agents):
                        if not absorbed[i] and goal_of[new_pos[i]] == g:
                            claims[g] = i
                            reward[i] = r
                else:
                    claims[g] = TIED
            for i in range(n_agents):
                if absorbed[i]:
                    continue
                s = pos[i]
                a = act[i]
                s2 = new_pos[i]
                g = goal_of[s2]
                learn_r = 0.0
                if algo == PLAINQ:
                    learn_r = reward[i]
                if g >= 0:
                    log_goal[it, i] = g
                    log_step[it, i] = t
                    log_ext[it, i] = reward[i]
                    if goal_directed:
                        if tmin[i, g] < 0 or t < tmin[i, g]:
                            tmin[i, g] = t
                        r_sum[i, g] += reward[i]
                        c[i, g] += 1
                        if g == g_sel[i] and reward[i] > 0:
                            learn_r = _internal_reward(tmin[i], g, r, gamma, delta)
                        log_int[it, i] = learn_r
                if algo == PS:
                    trace_s[i, trace_len[i]] = s
                    trace_a[i, trace_len[i]] = a
                    trace_len[i] += 1
                else:
                    target = learn_r + gamma * _row_max(q[i, s2])
                    q[i, s, a] = (1.0 - alpha) * q[i, s, a] + alpha * target
                pos[i] = s2
                if g >= 0:
                    absorbed[i] = True
        log_steps[it] = t

        if goal_directed:
            for i in range(n_agents):
                if np.random.random() < goal_random_prob:
                    g = _pick(n_goals)
                else:
                    g = _argmax_random(bid[i])
                g_sel[i] = g
                n_upd[i, g] += 1
                won = log_goal[it, i] == g and log_ext[it, i] > 0
                if algo == DRL:
                    cond = (won or not require_arrival) and c[i, g] > 0 \
                        and r_sum[i, g] / c[i, g] > threshold
                else:
                    cond = won
                n = n_upd[i, g]
                gain = tmin[i, g] if cond else 0
                bid[i, g] = (n - 1) / n * bid[i, g] + gain / n
                log_gsel[it, i] = g
                log_cond[it, i] = cond
                if keep_bids:
                    log_bids[it, i, :] = bid[i]
        elif algo == PS:
            success = True
            last = 0
            for i in range(n_agents):
                if log_goal[it, i] < 0:
                    success = False
                else:
                    last = max(last, log_step[it, i])
                    for j in range(i):
                        if log_goal[it, j] == log_goal[it, i]:
                            success = False
            n_steps = last if success else t
            ps_r = r / n_steps if success else 0.0
            for i in range(n_agents):
                log_int[it, i] = ps_r
                end = trace_len[i] - 1
                for k in range(end, -1, -1):
                    s = trace_s[i, k]
                    a = trace_a[i, k]
                    credit = ps_r * gamma ** float(end - k)
                    q[i, s, a] = (1.0 - alpha) * q[i, s, a] + alpha * credit

    return (q, bid, tmin, n_upd, r_sum, c, g_sel, log_goal, log_step, log_ext, log_int,
            log_gsel, log_cond, log_bids, log_steps)


@dataclass
class TrainResult:
    """Final tables and per-iteration logs of one compiled run."""
    qtables: list[QTable]
    stats: list[GoalStats] | None
    g_sel: list[int] | None
    arrival_goal: np.ndarray
    arrival_step: np.ndarray
    external_reward: np.ndarray
    internal_reward: np.ndarray
    log_g_sel: np.ndarray
    conditions: np.ndarray
    bids: np.ndarray
    steps: np.ndarray


def train(maze: Maze, algorithm: str, params: LearningParams, direction: DirectionParams,
          iterations: int, seed: int, initial_q: float = 0.0,
          keep_bids: bool = False) -> TrainResult:
    algo = ALGORITHMS.index(algorithm)
    nxt, goal_of = maze.grid_arrays()
    starts = np.array([maze.index(s) for s in maze.starts], dtype=np.int64)
    out = _train(nxt, goal_of, starts, maze.n_goals, algo, params.alpha, params.gamma,
                 params.epsilon, params.max_step, params.external_reward, direction.delta,
                 direction.threshold, direction.goal_random_prob,
                 direction.require_arrival, iterations, seed,
                 initial_q, keep_bids)
    (q, bid, tmin, n_upd, r_sum, c, g_sel, log_goal, log_step, log_ext, log_int,
     log_gsel, log_cond, log_bids, log_steps) = out
    tables = [QTable(maze.width, maze.height, initial_q, q[i].copy()) for i in range(maze.n_agents)]
    stats = sel = None
    if algo in (DRL, PMRL):
        stats = [GoalStats(bid[i].tolist(), [int(x) if x >= 0 else None for x in tmin[i]],
                           n_upd[i].tolist(), r_sum[i].tolist(), c[i].tolist())
                 for i in range(maze.n_agents)]
        sel = g_sel.tolist()
    return TrainResult(tables, stats, sel, log_goal, log_step, log_ext, log_int,
                       log_gsel, log_cond, log_bids, log_steps)


def to_records(res: TrainResult) -> list[EpisodeRecord]:
    """Episode records rebuilt from the compiled logs (trajectories are not kept)."""
    def opt(x):
        return None if x < 0 else int(x)

    goal_directed = res.stats is not None
    out = []
    for k in range(len(res.steps)):
        out.append(EpisodeRecord(
            iteration=k,
            trajectories=[],
            arrival_goal=[opt(g) for g in res.arrival_goal[k]],
            arrival_step=[opt(s) for s in res.arrival_step[k]],
            external_reward=res.external_reward[k].tolist(),
            internal_reward=res.internal_reward[k].tolist(),
            steps=int(res.steps[k]),
            g_sel=res.log_g_sel[k].tolist() if goal_directed else [],
            conditions=res.conditions[k].tolist() if goal_directed else [],
            bids=res.bids[k].tolist() if goal_directed and len(res.bids) else [],
        ))
    return out
