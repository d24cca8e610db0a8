"""Per-episode records and the episode log CSV shared by every learner."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

from .maze import Cell, goal_label


@dataclass
class EpisodeRecord:
    iteration: int
    trajectories: list[list[Cell]]
    arrival_goal: list[Optional[int]]
    arrival_step: list[Optional[int]]
    external_reward: list[float]
    # DRL/PMRL: internal reward paid at arrival; PS: credited terminal reward.
    internal_reward: list[float]
    steps: int
    # goal-directed learners only: goal selected after the episode, its bid
    # update condition, and every bid after the update
    g_sel: list[Optional[int]] = field(default_factory=list)
    conditions: list[bool] = field(default_factory=list)
    bids: list[list[float]] = field(default_factory=list)

    @property
    def n_agents(self) -> int:
        return len(self.arrival_goal)


def log_header(n_goals: int) -> list[str]:
    return ["iteration", "agent", "g_sel", "arrival_goal", "arrival_step",
            "external_reward", "internal_reward"] + [f"bid_g{g}" for g in range(n_goals)]


def _label(g: Optional[int]) -> str:
    return "" if g is None else goal_label(g)


def log_rows(record: EpisodeRecord, n_goals: int) -> list[list[str]]:
    rows = []
    for i in range(record.n_agents):
        g_sel = record.g_sel[i] if record.g_sel else None
        bids = [repr(b) for b in record.bids[i]] if record.bids else [""] * n_goals
        step = record.arrival_step[i]
        rows.append([
            str(record.iteration), str(i), _label(g_sel), _label(record.arrival_goal[i]),
            "" if step is None else str(step),
            repr(record.external_reward[i]), repr(record.internal_reward[i]),
        ] + bids)
    return rows


def write_episode_log(records: list[EpisodeRecord], n_goals: int) -> str:
    """Episode log CSV; floats use ``repr`` so they round-trip exactly."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(log_header(n_goals))
    for rec in records:
        writer.writerows(log_rows(rec, n_goals))
    return buf.getvalue()


def _parse_goal(text: str) -> Optional[int]:
    return int(text[1:]) if text else None


def read_episode_log(text: str) -> list[dict]:
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        bids = [float(v) for k, v in rec.items() if k.startswith("bid_g") and v != ""]
        out.append({
            "iteration": int(rec["iteration"]),
            "agent": int(rec["agent"]),
            "g_sel": _parse_goal(rec["g_sel"]),
            "arrival_goal": _parse_goal(rec["arrival_goal"]),
            "arrival_step": int(rec["arrival_step"]) if rec["arrival_step"] else None,
            "external_reward": float(rec["external_reward"]),
            "internal_reward": float(rec["internal_reward"]),
            "bids": bids,
        })
    return out
