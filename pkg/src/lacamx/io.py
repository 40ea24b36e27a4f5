"""MAPF benchmark file formats: .map grids, .scen scenarios, solution files.

Map format: a four-line header (type/height/width/map) followed by the grid
body; '.' and 'G' are passable, '@', 'T', 'O' are blocked, anything else is
an error.  Scenario rows are whitespace-separated:
bucket map_name width height start_x start_y goal_x goal_y distance
with x as the column and y as the row.

Solution files carry one line per timestep, the agents' cells as "(x,y)"
joined by commas.
"""

from __future__ import annotations

import re

import numpy as np

from .graphs import Config, GridMap, Instance

PASSABLE_GLYPHS = frozenset(".G")
BLOCKED_GLYPHS = frozenset("@TO")


class MapFormatError(ValueError):
    pass


class ScenarioFormatError(ValueError):
    pass


def parse_map(text: str) -> GridMap:
    """Parse benchmark map text into a GridMap."""
    lines = text.splitlines()
    if len(lines) < 4:
        raise MapFormatError("truncated header: expected type/height/width/map")
    header: dict[str, str] = {}
    if not lines[0].startswith("type"):
        raise MapFormatError("line 1: expected 'type ...'")
    for lineno in (2, 3):
        parts = lines[lineno - 1].split()
        if len(parts) != 2 or parts[0] not in ("height", "width"):
            raise MapFormatError(f"line {lineno}: expected 'height N' or 'width N'")
        header[parts[0]] = parts[1]
    try:
        height, width = int(header["height"]), int(header["width"])
    except (KeyError, ValueError) as exc:
        raise MapFormatError(f"bad height/width header: {exc}") from exc
    if lines[3].strip() != "map":
        raise MapFormatError("line 4: expected 'map'")
    body = lines[4:]
    rows = [r for r in body if r != ""]
    if len(rows) != height:
        raise MapFormatError(
            f"line {len(lines)}: {len(rows)} grid rows, header declares {height}"
        )
    passable = np.zeros((height, width), dtype=bool)
    for y, row in enumerate(rows):
        lineno = 5 + y
        if len(row) != width:
            raise MapFormatError(
                f"line {lineno}: row has {len(row)} cells, header declares {width}"
            )
        for x, ch in enumerate(row):
            if ch in PASSABLE_GLYPHS:
                passable[y, x] = True
            elif ch in BLOCKED_GLYPHS:
                passable[y, x] = False
            else:
                raise MapFormatError(f"line {lineno}: unknown glyph {ch!r}")
    return GridMap(passable)


def parse_scen(text: str, gmap: GridMap, num_agents: int) -> Instance:
    """First num_agents scenario entries, in file order, as an Instance."""
    if num_agents < 1:
        raise ScenarioFormatError("num_agents must be >= 1")
    starts: list[int] = []
    goals: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("version"):
            continue
        parts = line.split()
        if len(parts) < 9:
            raise ScenarioFormatError(f"line {lineno}: expected 9 fields")
        try:
            sx, sy, gx, gy = (int(p) for p in parts[4:8])
        except ValueError as exc:
            raise ScenarioFormatError(f"line {lineno}: bad coordinates") from exc
        try:
            starts.append(gmap.vertex_at(sx, sy))
            goals.append(gmap.vertex_at(gx, gy))
        except ValueError as exc:
            raise ScenarioFormatError(f"line {lineno}: {exc}") from exc
        if len(starts) == num_agents:
            break
    if len(starts) < num_agents:
        raise ScenarioFormatError(
            f"scenario provides only {len(starts)} entries, {num_agents} requested"
        )
    if len(set(starts)) != len(starts):
        raise ScenarioFormatError("selected entries contain a duplicate start")
    if len(set(goals)) != len(goals):
        raise ScenarioFormatError("selected entries contain a duplicate goal")
    return Instance(gmap, tuple(starts), tuple(goals))


def format_solution(sol: list[Config], gmap: GridMap) -> str:
    """One line per timestep; each agent's cell as (x,y), comma-separated."""
    lines = []
    for conf in sol:
        lines.append(",".join("(%d,%d)" % gmap.coords(v) for v in conf))
    return "\n".join(lines) + "\n"


_CELL = re.compile(r"\((-?\d+),(-?\d+)\)")


def parse_solution(text: str, gmap: GridMap) -> list[Config]:
    sol: list[Config] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        cells = _CELL.findall(line)
        if not cells:
            raise ValueError(f"line {lineno}: no cells found")
        sol.append(tuple(gmap.vertex_at(int(x), int(y)) for x, y in cells))
    return sol
