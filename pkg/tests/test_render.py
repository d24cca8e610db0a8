import re

import numpy as np
import pytest

from dirl.learner import QTable, greedy_action, greedy_trajectory
from dirl.maze import generate_maze, load_maze
from dirl.oracle import bfs_shortest_paths, value_iteration
from dirl.render import ASCII_ARROWS, render_ascii, render_svg

LINE = load_maze("3 1\nA.0\n")


def _line_table():
    q = QTable(3, 1)
    q.set((0, 0), 3, 9.0)
    q.set((0, 1), 3, 10.0)
    return q


def test_ascii_golden():
    expected = (
        "agent A start (0, 0)\n"
        ">*  9.0 >* 10.0   [G0]\n"
    )
    assert render_ascii([_line_table()], LINE) == expected


def test_ascii_all_zero_points_up():
    maze = load_maze("3 2\nA.0\n...\n")
    text = render_ascii([QTable.for_maze(maze)], maze)
    arrows = re.findall(r"([\^v<>])[* ] +0\.0", text)
    assert len(arrows) == 5 and set(arrows) == {"^"}


def test_ascii_walls_and_goals():
    maze = load_maze("4 2\nA#.0\n...1\n")
    text = render_ascii([QTable.for_maze(maze)], maze)
    assert "#######" in text and "[G0]" in text and "[G1]" in text


def _bfs_table(maze):
    q = value_iteration(maze, 0, 0.9, 10.0)
    table = QTable.for_maze(maze)
    for (s, a), v in q.items():
        table.set(s, a, v)
    return table


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_converged_arrows_follow_bfs(seed):
    maze = generate_maze(seed, 1, 6, 5, 0.2)
    table = _bfs_table(maze)
    to_goal = bfs_shortest_paths(maze, maze.goals[0])
    path = greedy_trajectory(table, maze, maze.starts[0], 100)
    for cell in path[:-1]:
        nxt = maze.move(cell, greedy_action(table, cell))
        assert to_goal[nxt] == to_goal[cell] - 1
    text = render_ascii([table], maze)
    starred = text.count("*")
    assert starred == len(path) - 1


def test_svg_is_deterministic_and_complete():
    maze = generate_maze(4, 2, 5, 4, 0.2)
    rng = np.random.RandomState(0)
    tables = []
    for _ in range(2):
        q = QTable.for_maze(maze)
        q.values[:] = rng.random_sample(q.values.shape)
        tables.append(q)
    a = render_svg(tables, maze)
    b = render_svg([t.copy() for t in tables], maze)
    assert a == b
    assert a.startswith("<svg") and a.rstrip().endswith("</svg>")
    assert a.count("<rect") == 2 * maze.width * maze.height
    assert a.count("<polyline") == 2
    free = len([c for c in maze.free_cells() if c not in maze.goals])
    assert a.count("<line") == 2 * free


def test_svg_arrow_direction():
    svg = render_svg([_line_table()], LINE)
    # cell (0, 0) centre is x=24; its arrow points right
    first = re.search(r'<line x1="([\d.]+)" y1="[\d.]+" x2="([\d.]+)"', svg)
    assert float(first.group(2)) > float(first.group(1))


def test_shape_mismatch():
    with pytest.raises(ValueError, match="maze is 3x1"):
        render_ascii([QTable(4, 1)], LINE)
    with pytest.raises(ValueError, match="Q-tables"):
        render_svg([QTable(3, 1), QTable(3, 1)], LINE)


def test_arrow_symbols_cover_actions():
    assert sorted(ASCII_ARROWS.values()) == sorted("^v<>")
