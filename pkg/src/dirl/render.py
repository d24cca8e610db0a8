"""ASCII and SVG views of learned Q-tables.

Each agent gets its own grid: every free cell shows the largest Q-value and
an arrow for the greedy action, and the cells of the greedy trajectory from
the agent's start are marked.  Greedy ties follow the fixed action order
Up, Down, Left, Right, so an all-zero table points every arrow up.
"""
from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

from .learner import QTable, greedy_action, greedy_trajectory
from .maze import Action, Maze, goal_label

ASCII_ARROWS = {Action.UP: "^", Action.DOWN: "v", Action.LEFT: "<", Action.RIGHT: ">"}
CELL_WIDTH = 7
AGENT_NAMES = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def check_shape(tables: Sequence[QTable], maze: Maze) -> None:
    if len(tables) != maze.n_agents:
        raise ValueError(f"{len(tables)} Q-tables for a {maze.n_agents}-agent maze")
    for i, q in enumerate(tables):
        if (q.width, q.height) != (maze.width, maze.height):
            raise ValueError(f"Q-table {i} is {q.width}x{q.height}, "
                             f"maze is {maze.width}x{maze.height}")


def _ascii_cell(maze: Maze, q: QTable, cell, on_path: bool) -> str:
    if cell in maze.walls:
        return "#" * CELL_WIDTH
    g = maze.goal_at(cell)
    if g is not None:
        return f"[{goal_label(g)}]".center(CELL_WIDTH)
    mark = "*" if on_path else " "
    return f"{ASCII_ARROWS[greedy_action(q, cell)]}{mark}{q.max_value(cell):5.1f}"[:CELL_WIDTH].ljust(CELL_WIDTH)


def render_ascii(tables: Sequence[QTable], maze: Maze, max_step: int = 100) -> str:
    """One block per agent; ``*`` marks cells on the agent's greedy path."""
    check_shape(tables, maze)
    blocks = []
    for i, q in enumerate(tables):
        start = maze.starts[i]
        path = set(greedy_trajectory(q, maze, start, max_step))
        lines = [f"agent {AGENT_NAMES[i]} start {start}"]
        for r in range(maze.height):
            lines.append(" ".join(_ascii_cell(maze, q, (r, c), (r, c) in path)
                                  for c in range(maze.width)).rstrip())
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# ---------------------------------------------------------------- SVG

CELL_PX = 48
GAP_PX = 24
_ARROW_DELTA = {Action.UP: (0, -1), Action.DOWN: (0, 1), Action.LEFT: (-1, 0), Action.RIGHT: (1, 0)}


def _fmt(x: float) -> str:
    return f"{x:.1f}"


def render_svg(tables: Sequence[QTable], maze: Maze, max_step: int = 100) -> str:
    """Agents side by side; output depends only on the inputs, byte for byte."""
    check_shape(tables, maze)
    grid_w = maze.width * CELL_PX
    grid_h = maze.height * CELL_PX
    total_w = len(tables) * grid_w + (len(tables) - 1) * GAP_PX
    total_h = grid_h + 20
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" '
           f'viewBox="0 0 {total_w} {total_h}" font-family="monospace">']
    for i, q in enumerate(tables):
        ox = i * (grid_w + GAP_PX)
        out.append(f'<g id="agent-{AGENT_NAMES[i]}">')
        out.append(f'<text x="{ox}" y="14" font-size="12">{escape("agent " + AGENT_NAMES[i])}</text>')
        oy = 20
        for r in range(maze.height):
            for c in range(maze.width):
                cell = (r, c)
                x, y = ox + c * CELL_PX, oy + r * CELL_PX
                if cell in maze.walls:
                    fill = "#333333"
                elif cell in maze.goals:
                    fill = "#b58bd6"
                elif cell == maze.starts[i]:
                    fill = "#ffffff"
                else:
                    fill = "#eeeeee"
                out.append(f'<rect x="{x}" y="{y}" width="{CELL_PX}" height="{CELL_PX}" '
                           f'fill="{fill}" stroke="#999999"/>')
                if cell in maze.walls:
                    continue
                g = maze.goal_at(cell)
                cx, cy = x + CELL_PX / 2, y + CELL_PX / 2
                if g is not None:
                    out.append(f'<text x="{_fmt(cx)}" y="{_fmt(cy + 4)}" font-size="12" '
                               f'text-anchor="middle">{goal_label(g)}</text>')
                    continue
                out.append(f'<text x="{x + 3}" y="{y + 12}" font-size="10" fill="#cc0000">'
                           f'{q.max_value(cell):.2f}</text>')
                dx, dy = _ARROW_DELTA[greedy_action(q, cell)]
                x2, y2 = cx + dx * CELL_PX * 0.3, cy + 4 + dy * CELL_PX * 0.3
                out.append(f'<line x1="{_fmt(cx)}" y1="{_fmt(cy + 4)}" x2="{_fmt(x2)}" '
                           f'y2="{_fmt(y2)}" stroke="#000000" stroke-width="2"/>')
                out.append(f'<circle cx="{_fmt(x2)}" cy="{_fmt(y2)}" r="2.5" fill="#000000"/>')
        path = greedy_trajectory(q, maze, maze.starts[i], max_step)
        points = " ".join(f"{_fmt(ox + (c + 0.5) * CELL_PX)},{_fmt(oy + (r + 0.5) * CELL_PX)}"
                          for r, c in path)
        out.append(f'<polyline points="{points}" fill="none" stroke="#ff8800" '
                   f'stroke-width="3" stroke-opacity="0.8"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
