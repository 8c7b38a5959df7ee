"""
Planner: Shortest collision-free paths among axis-aligned trap rectangles.

Paths are found on a visibility graph whose nodes are the start, the goal
and the corners of every trap inflated slightly beyond the collision
margin. Edges are straight segments that stay out of every trap inflated by
the margin; the shortest path is taken with Dijkstra.
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple
import heapq
import logging
import math

from ..core.errors import PlanError

logger = logging.getLogger(__name__)

Point = Tuple[float, float]

# Graph corners sit this factor beyond the collision margin.
CORNER_FACTOR = 1.25
_EPS = 1e-9


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle [x0, x1] × [y0, y1]."""
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def center(self) -> Point:
        return (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def contains(self, point: Sequence[float]) -> bool:
        """Strict interior test."""
        x, y = point[0], point[1]
        return self.x0 < x < self.x1 and self.y0 < y < self.y1

    def distance(self, point: Sequence[float]) -> float:
        """Euclidean distance from a point to the rectangle; zero inside."""
        dx = max(self.x0 - point[0], 0.0, point[0] - self.x1)
        dy = max(self.y0 - point[1], 0.0, point[1] - self.y1)
        return math.hypot(dx, dy)

    def inflate(self, margin: float) -> "Rect":
        return Rect(self.x0 - margin, self.y0 - margin, self.x1 + margin, self.y1 + margin)

    def corners(self) -> List[Point]:
        return [(self.x0, self.y0), (self.x1, self.y0), (self.x1, self.y1), (self.x0, self.y1)]

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)


def segment_blocked(p: Point, q: Point, rect: Rect) -> bool:
    """True when segment p→q passes through the rectangle with positive length."""
    dx, dy = q[0] - p[0], q[1] - p[1]
    t0, t1 = 0.0, 1.0
    for pk, qk in ((-dx, p[0] - rect.x0), (dx, rect.x1 - p[0]), (-dy, p[1] - rect.y0), (dy, rect.y1 - p[1])):
        if pk == 0.0:
            if qk < 0.0:
                return False
            continue
        t = qk / pk
        if pk < 0.0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return False
    return (t1 - t0) * math.hypot(dx, dy) > _EPS


def _obstacles(start: Point, goal: Point, traps: Sequence[Rect], margin: float) -> List[Rect]:
    """
    Collision regions for one query.

    A trap whose margin band already holds an endpoint keeps half that
    endpoint's clearance; a trap containing an endpoint is dropped.
    """
    regions = []
    for trap in traps:
        clearance = min(trap.distance(start), trap.distance(goal))
        if clearance <= 0.0:
            continue
        regions.append(trap.inflate(min(margin, 0.5 * clearance)))
    return regions


def _in_arena(point: Point) -> bool:
    return 0.0 <= point[0] <= 1.0 and 0.0 <= point[1] <= 1.0


def plan_path(start: Sequence[float], goal: Sequence[float], traps: Sequence[Rect], margin: float) -> List[Point]:
    """
    Shortest path from start to goal keeping ``margin`` away from every trap.

    Returns:
        Waypoints from start to goal inclusive

    Raises:
        PlanError: goal unreachable inside the arena
    """
    s: Point = (float(start[0]), float(start[1]))
    g: Point = (float(goal[0]), float(goal[1]))
    regions = _obstacles(s, g, traps, margin)

    def clear(p: Point, q: Point) -> bool:
        return not any(segment_blocked(p, q, r) for r in regions)

    if clear(s, g):
        return [s, g]

    nodes: List[Point] = [s, g]
    for trap in traps:
        for corner in trap.inflate(CORNER_FACTOR * margin).corners():
            if _in_arena(corner) and not any(r.contains(corner) for r in regions):
                nodes.append(corner)

    dist: Dict[int, float] = {0: 0.0}
    prev: Dict[int, int] = {}
    heap: List[Tuple[float, int]] = [(0.0, 0)]
    done = set()
    while heap:
        d, i = heapq.heappop(heap)
        if i in done:
            continue
        done.add(i)
        if i == 1:
            break
        for j in range(len(nodes)):
            if j in done or not clear(nodes[i], nodes[j]):
                continue
            nd = d + math.dist(nodes[i], nodes[j])
            if nd < dist.get(j, math.inf):
                dist[j] = nd
                prev[j] = i
                heapq.heappush(heap, (nd, j))

    if 1 not in done:
        raise PlanError(f"no collision-free path from {s} to {g}")

    path = [g]
    i = 1
    while i != 0:
        i = prev[i]
        path.append(nodes[i])
    path.reverse()
    return path


def path_length(path: Sequence[Point]) -> float:
    return sum(math.dist(a, b) for a, b in zip(path, path[1:]))


def path_steps(path: Sequence[Point], max_step: float) -> int:
    """Steps needed to follow a path when every waypoint is hit exactly."""
    return sum(int(math.ceil(math.dist(a, b) / max_step - _EPS)) for a, b in zip(path, path[1:]))
