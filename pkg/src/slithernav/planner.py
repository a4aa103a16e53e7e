"""Global navigation layer: occupancy grid world, randomized perfect-maze
generation, A* shortest paths and waypoint extraction with bounded spacing.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np


class PlannerError(Exception):
    pass


class OccupiedEndpointError(PlannerError):
    """Start or goal cell is inside a wall."""


class SpacingInfeasibleError(PlannerError):
    """No waypoint subsampling satisfies the requested spacing range."""


@dataclass
class OccupancyGrid:
    """Boolean planar world map. cells[y, x] is True where occupied; world
    position of cell (cx, cy)'s center is origin + (cx + 0.5, cy + 0.5) * cell_size."""

    cells: np.ndarray
    cell_size: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=bool)
        if self.cells.ndim != 2:
            raise ValueError("cells must be 2-D")
        if self.cell_size <= 0.0:
            raise ValueError("cell_size must be > 0")

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    def in_bounds(self, cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def is_free(self, cell) -> bool:
        return self.in_bounds(cell) and not self.cells[cell[1], cell[0]]

    def cell_center(self, cell) -> np.ndarray:
        return np.array(
            [
                self.origin[0] + (cell[0] + 0.5) * self.cell_size,
                self.origin[1] + (cell[1] + 0.5) * self.cell_size,
            ]
        )

    def cell_of(self, point) -> tuple[int, int]:
        return (
            int(np.floor((point[0] - self.origin[0]) / self.cell_size)),
            int(np.floor((point[1] - self.origin[1]) / self.cell_size)),
        )

    def free_cells(self) -> list[tuple[int, int]]:
        ys, xs = np.nonzero(~self.cells)
        return [(int(x), int(y)) for x, y in zip(xs, ys)]

    def to_text(self) -> str:
        lines = [f"{self.width} {self.height} {self.cell_size:g}"]
        for y in range(self.height):
            lines.append("".join("#" if self.cells[y, x] else "." for x in range(self.width)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "OccupancyGrid":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        try:
            w_s, h_s, cs_s = lines[0].split()
            width, height, cell_size = int(w_s), int(h_s), float(cs_s)
        except (ValueError, IndexError) as exc:
            raise PlannerError(f"bad grid header: {lines[0]!r}") from exc
        rows = lines[1:]
        if len(rows) != height or any(len(r) != width for r in rows):
            raise PlannerError("grid body does not match header dimensions")
        cells = np.array([[c == "#" for c in row] for row in rows], dtype=bool)
        return cls(cells=cells, cell_size=cell_size)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "OccupancyGrid":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())


@dataclass
class WaypointPath:
    """Ordered world-frame waypoints with their spacing contract."""

    waypoints: np.ndarray  # (m, 2)
    spacing_min: float
    spacing_max: float

    def __len__(self) -> int:
        return len(self.waypoints)


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def kruskal_maze(cells_x: int, cells_y: int, seed: int, cell_size: float = 1.0) -> OccupancyGrid:
    """Perfect maze over a cells_x x cells_y room lattice.

    Walls between rooms are removed along a uniform-random spanning tree
    (Kruskal with shuffled edges); exactly cells_x*cells_y - 1 walls open.
    The occupancy raster is (2*cells_x + 1) x (2*cells_y + 1): rooms at odd
    indices, wall slots between them, closed border.
    """
    if cells_x < 2 or cells_y < 2:
        raise PlannerError("maze needs at least 2x2 cells")
    rng = np.random.default_rng(seed)
    edges = []
    for cy in range(cells_y):
        for cx in range(cells_x):
            if cx + 1 < cells_x:
                edges.append(((cx, cy), (cx + 1, cy)))
            if cy + 1 < cells_y:
                edges.append(((cx, cy), (cx, cy + 1)))
    order = rng.permutation(len(edges))
    ds = _DisjointSet(cells_x * cells_y)
    grid = np.ones((2 * cells_y + 1, 2 * cells_x + 1), dtype=bool)
    for cy in range(cells_y):
        for cx in range(cells_x):
            grid[2 * cy + 1, 2 * cx + 1] = False
    for idx in order:
        (ax, ay), (bx, by) = edges[idx]
        if ds.union(ay * cells_x + ax, by * cells_x + bx):
            grid[ay + by + 1, ax + bx + 1] = False  # open the shared wall slot
    return OccupancyGrid(cells=grid, cell_size=cell_size)


def a_star(grid: OccupancyGrid, start, goal) -> list[tuple[int, int]]:
    """Minimum-length 4-connected path from start to goal, inclusive.

    Returns [] iff the goal is unreachable. Raises OccupiedEndpointError if
    either endpoint is occupied (distinct from unreachable). Heuristic is
    Manhattan distance, admissible on a 4-connected unit grid.
    """
    start = (int(start[0]), int(start[1]))
    goal = (int(goal[0]), int(goal[1]))
    if not grid.is_free(start) or not grid.is_free(goal):
        raise OccupiedEndpointError(f"start {start} or goal {goal} not in free space")
    if start == goal:
        return [start]

    def heur(c):
        return abs(c[0] - goal[0]) + abs(c[1] - goal[1])

    open_heap = [(heur(start), 0, start)]
    g_score = {start: 0}
    came_from = {}
    tie = 0
    while open_heap:
        _, _, current = heapq.heappop(open_heap)
        if current == goal:
            path = [current]
            while path[-1] != start:
                path.append(came_from[path[-1]])
            path.reverse()
            return path
        cg = g_score[current]
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nb = (current[0] + dx, current[1] + dy)
            if not grid.is_free(nb):
                continue
            ng = cg + 1
            if nb not in g_score or ng < g_score[nb]:
                g_score[nb] = ng
                tie += 1
                heapq.heappush(open_heap, (ng + heur(nb), tie, nb))
                came_from[nb] = current
    return []


def supercover_cells(a, b):
    """Every integer cell a->b touches, including both cells at edge and
    corner crossings (conservative line-of-sight test)."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    cells = {(int(np.floor(ax)), int(np.floor(ay))), (int(np.floor(bx)), int(np.floor(by)))}
    dx, dy = bx - ax, by - ay
    n_samples = int(4 * max(abs(dx), abs(dy))) + 1
    eps = 1e-9
    for k in range(n_samples + 1):
        t = k / n_samples
        x = ax + t * dx
        y = ay + t * dy
        # when the sample sits on a lattice line, both neighbours are touched
        xs = {int(np.floor(x - eps)), int(np.floor(x + eps))} if abs(x - round(x)) < eps else {int(np.floor(x))}
        ys = {int(np.floor(y - eps)), int(np.floor(y + eps))} if abs(y - round(y)) < eps else {int(np.floor(y))}
        for cx in xs:
            for cy in ys:
                cells.add((cx, cy))
    # fill crossings missed by sampling: walk the exact crossing parameters
    ts = []
    if abs(dx) > eps:
        x0, x1 = sorted((ax, bx))
        for gx in range(int(np.ceil(x0 - eps)), int(np.floor(x1 + eps)) + 1):
            ts.append((gx - ax) / dx)
    if abs(dy) > eps:
        y0, y1 = sorted((ay, by))
        for gy in range(int(np.ceil(y0 - eps)), int(np.floor(y1 + eps)) + 1):
            ts.append((gy - ay) / dy)
    for t in ts:
        if t < -eps or t > 1 + eps:
            continue
        x = ax + t * dx
        y = ay + t * dy
        xs = {int(np.floor(x - eps)), int(np.floor(x + eps))} if abs(x - round(x)) < eps else {int(np.floor(x))}
        ys = {int(np.floor(y - eps)), int(np.floor(y + eps))} if abs(y - round(y)) < eps else {int(np.floor(y))}
        for cx in xs:
            for cy in ys:
                cells.add((cx, cy))
    return cells


def line_of_sight(grid: OccupancyGrid, p_world, q_world) -> bool:
    """True when the straight segment stays in free cells (supercover test)."""
    a = (
        (p_world[0] - grid.origin[0]) / grid.cell_size,
        (p_world[1] - grid.origin[1]) / grid.cell_size,
    )
    b = (
        (q_world[0] - grid.origin[0]) / grid.cell_size,
        (q_world[1] - grid.origin[1]) / grid.cell_size,
    )
    return all(grid.is_free(c) for c in supercover_cells(a, b))


def extract_waypoints(grid: OccupancyGrid, cell_path, spacing) -> WaypointPath:
    """Subsample the path's cell centers so consecutive waypoint distances lie
    in the spacing range (the final hop may be shorter), every segment being
    collision-free. Endpoints are always included."""
    lo, hi = float(spacing[0]), float(spacing[1])
    if not cell_path:
        raise PlannerError("empty path")
    if not (0.0 < lo <= hi):
        raise SpacingInfeasibleError(f"bad spacing range [{lo}, {hi}]")
    centers = [grid.cell_center(c) for c in cell_path]
    if len(centers) == 1:
        return WaypointPath(waypoints=np.array([centers[0]]), spacing_min=lo, spacing_max=hi)
    out = [centers[0]]
    i = 0
    last = len(centers) - 1
    while i < last:
        best = None
        meets_min = False
        for j in range(i + 1, last + 1):
            dist = float(np.linalg.norm(centers[j] - out[-1]))
            if dist > hi:
                break
            if not line_of_sight(grid, out[-1], centers[j]):
                continue
            if dist >= lo:
                best = j
                meets_min = True
            elif not meets_min:
                best = j  # fallback below spacing_min, only if nothing better
        if best is None:
            raise SpacingInfeasibleError(
                f"no reachable waypoint within {hi} m of {out[-1]} along the path"
            )
        if not meets_min and best != last:
            raise SpacingInfeasibleError(
                f"spacing range [{lo}, {hi}] infeasible at corner near {out[-1]}"
            )
        out.append(centers[best])
        i = best
    return WaypointPath(waypoints=np.array(out), spacing_min=lo, spacing_max=hi)


def corridor_graph(grid: OccupancyGrid):
    """(nodes, edges) of the free-cell adjacency graph (for maze audits)."""
    nodes = grid.free_cells()
    edges = []
    for (x, y) in nodes:
        for dx, dy in ((1, 0), (0, 1)):
            if grid.is_free((x + dx, y + dy)):
                edges.append(((x, y), (x + dx, y + dy)))
    return nodes, edges
