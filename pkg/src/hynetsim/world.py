"""World model: buildings, road graph, bounds.

A World is immutable after construction and is read concurrently by the
channel, mobility and prediction code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .geo import GeoPoint


def polygon_area(points: np.ndarray) -> float:
    """Signed shoelace area; positive for counterclockwise vertex order."""
    x = points[:, 0]
    y = points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_properly_intersect(p1, p2, p3, p4) -> bool:
    d1 = np.cross(p2 - p1, p3 - p1)
    d2 = np.cross(p2 - p1, p4 - p1)
    d3 = np.cross(p4 - p3, p1 - p3)
    d4 = np.cross(p4 - p3, p2 - p3)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def polygon_is_simple(points: np.ndarray) -> bool:
    """True if no two non-adjacent edges cross (brute force; footprints are small)."""
    n = len(points)
    edges = [(points[i], points[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue  # adjacent edges share a vertex
            if _segments_properly_intersect(*edges[i], *edges[j]):
                return False
    return True


def point_in_polygon(x: float, y: float, points: np.ndarray) -> bool:
    """Ray-casting point-in-polygon test (boundary points count as inside)."""
    n = len(points)
    inside = False
    x1, y1 = points[-1]
    for i in range(n):
        x2, y2 = points[i]
        if (y1 > y) != (y2 > y):
            t = (y - y1) / (y2 - y1)
            if x < x1 + t * (x2 - x1):
                inside = not inside
        x1, y1 = x2, y2
    return inside


class Building:
    """A building footprint (simple 2D polygon, meters) with a roof height."""

    __slots__ = ("footprint", "height", "bbox")

    def __init__(self, footprint, height: float) -> None:
        pts = np.asarray(footprint, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
            raise ValueError("footprint must be an (N, 2) array with N >= 3")
        # accept logically closed input (first vertex repeated at the end)
        if np.array_equal(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(pts) < 3:
            raise ValueError("degenerate footprint")
        if height <= 0:
            raise ValueError(f"building height must be positive, got {height}")
        if not polygon_is_simple(pts):
            raise ValueError("footprint polygon is self-intersecting")
        if polygon_area(pts) < 0:
            pts = pts[::-1].copy()  # normalize to counterclockwise
        self.footprint = pts
        self.height = float(height)
        self.bbox = (float(pts[:, 0].min()), float(pts[:, 1].min()),
                     float(pts[:, 0].max()), float(pts[:, 1].max()))

    @property
    def area(self) -> float:
        return polygon_area(self.footprint)

    def contains(self, x: float, y: float) -> bool:
        xmin, ymin, xmax, ymax = self.bbox
        if x < xmin or x > xmax or y < ymin or y > ymax:
            return False
        return point_in_polygon(x, y, self.footprint)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Building)
                and self.height == other.height
                and np.array_equal(self.footprint, other.footprint))

    def __repr__(self) -> str:
        return f"Building(vertices={len(self.footprint)}, height={self.height})"


@dataclass
class RoadEdge:
    """One directed lane-carrying segment between two road nodes."""

    id: int
    node_from: int
    node_to: int
    lanes: int = 1
    speed_limit: float = 13.9  # m/s (50 km/h)
    # endpoint coordinates, filled in by RoadGraph.add_edge
    p_from: np.ndarray = field(default=None, repr=False)
    p_to: np.ndarray = field(default=None, repr=False)

    LANE_WIDTH = 3.5  # m, parallel offsets of the centerline

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.p_to - self.p_from))

    @property
    def direction(self) -> np.ndarray:
        d = self.p_to - self.p_from
        n = np.linalg.norm(d)
        return d / n if n > 0 else d

    def point_at(self, offset: float, lane: int = 0) -> np.ndarray:
        """2D point at longitudinal ``offset`` on ``lane`` (offset to the right)."""
        d = self.direction
        base = self.p_from + d * offset
        shift = ((lane + 0.5) - self.lanes / 2.0) * self.LANE_WIDTH
        normal = np.array([d[1], -d[0]])
        return base + normal * shift


class RoadGraph:
    """Directed road network with shortest-path support (networkx inside)."""

    def __init__(self) -> None:
        self.nodes: dict[int, np.ndarray] = {}
        self.edges: dict[int, RoadEdge] = {}
        self._graph = nx.DiGraph()
        self._next_edge_id = 0

    def add_node(self, node_id: int, x: float, y: float) -> None:
        p = np.array([x, y], dtype=float)
        self.nodes[node_id] = p
        self._graph.add_node(node_id)

    def add_edge(self, node_from: int, node_to: int, lanes: int = 1,
                 speed_limit: float = 13.9) -> RoadEdge:
        if node_from not in self.nodes or node_to not in self.nodes:
            raise KeyError("edge endpoints must be existing nodes")
        edge = RoadEdge(self._next_edge_id, node_from, node_to, lanes, speed_limit,
                        p_from=self.nodes[node_from], p_to=self.nodes[node_to])
        self._next_edge_id += 1
        self.edges[edge.id] = edge
        self._graph.add_edge(node_from, node_to, edge=edge, length=edge.length)
        return edge

    def edge_between(self, node_from: int, node_to: int) -> RoadEdge | None:
        data = self._graph.get_edge_data(node_from, node_to)
        return data["edge"] if data else None

    def successors(self, edge: RoadEdge) -> list[RoadEdge]:
        """Outgoing edges at the edge's end node, excluding the direct U-turn."""
        out = []
        for _, nxt, data in self._graph.out_edges(edge.node_to, data=True):
            if nxt == edge.node_from:
                continue
            out.append(data["edge"])
        return out

    def reverse_of(self, edge: RoadEdge) -> RoadEdge | None:
        return self.edge_between(edge.node_to, edge.node_from)

    def shortest_path_nodes(self, node_from: int, node_to: int) -> list[int]:
        return nx.shortest_path(self._graph, node_from, node_to, weight="length")

    def next_edge_towards(self, edge: RoadEdge, destination: int) -> RoadEdge | None:
        """First edge of the shortest path from the edge's end to ``destination``."""
        if edge.node_to == destination:
            return None
        try:
            path = self.shortest_path_nodes(edge.node_to, destination)
        except nx.NetworkXNoPath:
            return None
        return self.edge_between(path[0], path[1])

    def __len__(self) -> int:
        return len(self.edges)


class World:
    """Spatial ground truth: buildings, roads and the simulation bounds."""

    def __init__(self, buildings: list[Building], roads: RoadGraph,
                 bounds_min, bounds_max, origin: GeoPoint | None = None) -> None:
        self.buildings = list(buildings)
        self.roads = roads
        self.bounds_min = np.asarray(bounds_min, dtype=float)
        self.bounds_max = np.asarray(bounds_max, dtype=float)
        if self.bounds_min.shape != (3,) or self.bounds_max.shape != (3,):
            raise ValueError("bounds must be 3D")
        if np.any(self.bounds_max <= self.bounds_min):
            raise ValueError("empty world bounds")
        self.origin = origin
        # per-building bbox array used as a cheap prefilter by the channel
        if self.buildings:
            self.building_bboxes = np.array([b.bbox for b in self.buildings])
            self.max_building_height = max(b.height for b in self.buildings)
        else:
            self.building_bboxes = np.zeros((0, 4))
            self.max_building_height = 0.0

    @property
    def size(self) -> np.ndarray:
        return self.bounds_max - self.bounds_min

    def clamp(self, position: np.ndarray) -> np.ndarray:
        return np.clip(position, self.bounds_min, self.bounds_max)

    def contains(self, position: np.ndarray) -> bool:
        return bool(np.all(position >= self.bounds_min)
                    and np.all(position <= self.bounds_max))

    def equals(self, other: "World") -> bool:
        """Field-by-field equality (used by the cache round-trip contract)."""
        if len(self.buildings) != len(other.buildings):
            return False
        if any(a != b for a, b in zip(self.buildings, other.buildings)):
            return False
        if not (np.array_equal(self.bounds_min, other.bounds_min)
                and np.array_equal(self.bounds_max, other.bounds_max)):
            return False
        if (self.origin is None) != (other.origin is None):
            return False
        if self.origin is not None and self.origin != other.origin:
            return False
        if set(self.roads.nodes) != set(other.roads.nodes):
            return False
        for nid, p in self.roads.nodes.items():
            if not np.array_equal(p, other.roads.nodes[nid]):
                return False
        mine = {(e.node_from, e.node_to): (e.lanes, e.speed_limit)
                for e in self.roads.edges.values()}
        theirs = {(e.node_from, e.node_to): (e.lanes, e.speed_limit)
                  for e in other.roads.edges.values()}
        return mine == theirs
