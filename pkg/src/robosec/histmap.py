"""Historical records of stationary obstacles, learned from attack-free runs.

The map is an occupancy grid; a cell is occupied when genuine rays ended in
it and no ray ever passed through it. Cells that were hit at one time and
seen through at another (a door that opened, a pet that left) are kept as
``variable``. ``expected_distance`` ray-casts against the grid and is what
both the CRV check and mitigation navigation use in place of the sensor.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .world import SENSOR_MAX, Pose, Rect, clamp_range, unit

MAP_VERSION = 1
# ray endpoints are nudged past the surface so they land in the obstacle's cell
_EPS = 1e-6


class MapError(ValueError):
    pass


Cell = tuple[int, int]
# one learn pass: (sensor pose, genuine numeric reading) pairs
Trace = list[tuple[Pose, float]]


@dataclass(frozen=True)
class HistoricalMap:
    resolution: float
    bounds: Rect
    cells: frozenset
    variable: frozenset = frozenset()
    provenance: dict = field(default_factory=dict, compare=False)
    profile: dict = field(default_factory=dict, compare=False)

    def cell_of(self, x: float, y: float) -> Cell:
        return math.floor(x / self.resolution), math.floor(y / self.resolution)

    def contains(self, x: float, y: float) -> bool:
        x0, y0, x1, y1 = self.bounds
        return x0 <= x <= x1 and y0 <= y <= y1

    # -- persistence ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": MAP_VERSION,
            "resolution": self.resolution,
            "bounds": list(self.bounds),
            "cells": sorted([list(c) for c in self.cells]),
            "variable": sorted([list(c) for c in self.variable]),
            "provenance": self.provenance,
            "profile": self.profile,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HistoricalMap":
        allowed = {"version", "resolution", "bounds", "cells", "variable", "provenance", "profile"}
        extra = set(d) - allowed
        if extra:
            raise MapError(f"unknown map keys: {sorted(extra)}")
        if d.get("version") != MAP_VERSION:
            raise MapError(f"unsupported map version {d.get('version')!r}")
        return cls(
            resolution=float(d["resolution"]),
            bounds=tuple(float(v) for v in d["bounds"]),
            cells=frozenset((int(i), int(j)) for i, j in d["cells"]),
            variable=frozenset((int(i), int(j)) for i, j in d.get("variable", [])),
            provenance=dict(d.get("provenance", {})),
            profile=dict(d.get("profile", {})),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "HistoricalMap":
        return cls.from_dict(json.loads(Path(path).read_text()))


def learn(traces: Iterable[Trace], bounds: Rect, resolution: float = 10.0,
          min_passes: Optional[int] = None, provenance: Optional[dict] = None,
          profile: Optional[dict] = None) -> HistoricalMap:
    """Mark the cell at every genuine ray endpoint and carve the cells rays crossed.

    With two or more passes a cell must be hit in ``min_passes`` distinct
    passes (default 2), which drops obstacles that were only passing through.
    A hit cell that some ray also crossed is recorded as variable.
    """
    traces = [list(t) for t in traces]
    if not traces or not any(traces):
        raise MapError("cannot learn a map from an empty trace")
    if min_passes is None:
        min_passes = 2 if len(traces) >= 2 else 1
    seen: Counter = Counter()
    crossed: set = set()
    for trace in traces:
        cells = set()
        for pose, value in trace:
            if value is None:
                continue
            crossed.update(_cells_before(pose, value, resolution))
            if value >= SENSOR_MAX:
                continue
            dx, dy = unit(pose.heading)
            ex, ey = pose.x + (value + _EPS) * dx, pose.y + (value + _EPS) * dy
            cells.add((math.floor(ex / resolution), math.floor(ey / resolution)))
        seen.update(cells)
    x0, y0, x1, y1 = bounds
    pad = resolution
    return HistoricalMap(
        resolution=resolution,
        bounds=(x0 - pad, y0 - pad, x1 + pad, y1 + pad),
        cells=frozenset(c for c, n in seen.items() if n >= min_passes and c not in crossed),
        variable=frozenset(c for c in seen if c in crossed),
        provenance=provenance or {},
        profile=profile or {},
    )


def _traverse(x: float, y: float, heading: float, res: float, limit: float):
    """Yield (entry distance, cell) for each cell a ray enters, up to ``limit``."""
    dx, dy = unit(heading)
    i, j = math.floor(x / res), math.floor(y / res)
    step_i = 1 if dx > 0 else -1
    step_j = 1 if dy > 0 else -1
    if dx != 0:
        t_max_x = ((i + (1 if dx > 0 else 0)) * res - x) / dx
        t_dx = res / abs(dx)
    else:
        t_max_x, t_dx = math.inf, math.inf
    if dy != 0:
        t_max_y = ((j + (1 if dy > 0 else 0)) * res - y) / dy
        t_dy = res / abs(dy)
    else:
        t_max_y, t_dy = math.inf, math.inf
    while True:
        if t_max_x < t_max_y:
            t = t_max_x
            i += step_i
            t_max_x += t_dx
        else:
            t = t_max_y
            j += step_j
            t_max_y += t_dy
        if t > limit:
            return
        yield t, (i, j)


def _cells_before(pose: Pose, value: float, res: float) -> set:
    """Cells the ray fully crossed before its endpoint cell."""
    if value <= 0:
        return set()
    out = {(math.floor(pose.x / res), math.floor(pose.y / res))}
    dx, dy = unit(pose.heading)
    end = (math.floor((pose.x + (value + _EPS) * dx) / res), math.floor((pose.y + (value + _EPS) * dy) / res))
    for _, cell in _traverse(pose.x, pose.y, pose.heading, res, value):
        out.add(cell)
    out.discard(end)
    return out


def expected_distance(hmap: HistoricalMap, pose: Pose, variable_occupied: bool = True) -> float:
    """Grid ray-cast (cell traversal) to the first occupied cell, clamped to [2, 400].

    ``variable_occupied`` decides whether variable cells block the ray; the
    default is the conservative choice used for navigation.
    """
    if not hmap.contains(pose.x, pose.y):
        raise MapError(f"pose ({pose.x:.1f}, {pose.y:.1f}) is outside the map")
    blocking = hmap.cells | hmap.variable if variable_occupied and hmap.variable else hmap.cells
    if hmap.cell_of(pose.x, pose.y) in blocking:
        return clamp_range(0.0)
    for t, cell in _traverse(pose.x, pose.y, pose.heading, hmap.resolution, SENSOR_MAX):
        if cell in blocking:
            return clamp_range(t)
    return SENSOR_MAX


def expected_range(hmap: HistoricalMap, pose: Pose) -> tuple[float, float]:
    """(nearest, farthest) prediction over the open/closed states of variable cells."""
    near = expected_distance(hmap, pose, True)
    far = expected_distance(hmap, pose, False) if hmap.variable else near
    return near, far
