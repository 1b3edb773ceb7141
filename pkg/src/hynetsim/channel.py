"""Deterministic obstacle-shadowing radio channel.

The link analysis runs in two stages. First the 2D projection of the link is
intersected with every building footprint, producing ordered crossing
candidates. Then the candidates are re-evaluated against the link's elevation
profile; crossings whose local link height reaches the roof are discarded.
The result is a :class:`LinkProfile` with the retained wall-crossing count N
and the in-building distance d_obs, which feed the path-loss model

    L = L0 + 10 n log10(d / d0) + N * beta + d_obs * gamma

with a log-distance baseline and the two obstacle attenuation factors
``beta`` (dB per wall) and ``gamma`` (dB per meter inside buildings).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .world import World, point_in_polygon

SPEED_OF_LIGHT = 299_792_458.0

# crossings closer than this along the link (as a parameter in [0, 1]) are
# treated as one wall hit (shared vertices of adjacent footprint edges)
_T_MERGE_EPS = 1e-9


@dataclass
class PathLossParams:
    """Obstacle-shadowing path-loss parameters.

    The baseline is a log-distance model: ``reference_loss_db`` at
    ``reference_distance_m`` with exponent ``exponent``. Use :meth:`friis`
    to anchor the reference loss to free space at the carrier frequency.
    """

    wall_loss_db: float = 9.2            # per crossed wall
    interior_loss_db_per_m: float = 0.32  # per meter inside buildings
    reference_loss_db: float = 38.9
    reference_distance_m: float = 1.0
    exponent: float = 2.0
    frequency_hz: float = 2.1e9
    count_buildings: bool = False  # N counts obstructing buildings, not walls

    def __post_init__(self) -> None:
        if self.wall_loss_db < 0 or self.interior_loss_db_per_m < 0:
            raise ValueError("obstacle attenuation factors must be >= 0")
        if self.exponent <= 0:
            raise ValueError("path loss exponent must be positive")

    @classmethod
    def friis(cls, frequency_hz: float, exponent: float = 2.0,
              reference_distance_m: float = 1.0, **kwargs) -> "PathLossParams":
        """Anchor the reference loss to free space at ``reference_distance_m``."""
        l0 = 20.0 * math.log10(4.0 * math.pi * reference_distance_m
                               * frequency_hz / SPEED_OF_LIGHT)
        return cls(reference_loss_db=l0, reference_distance_m=reference_distance_m,
                   exponent=exponent, frequency_hz=frequency_hz, **kwargs)


@dataclass
class LinkProfile:
    """Obstacle analysis of one TX->RX link."""

    n_intersections: int
    obstructed_distance: float
    total_distance: float

    @property
    def obstructed(self) -> bool:
        return self.n_intersections > 0


@dataclass
class Crossing:
    """One candidate wall crossing from the 2D stage."""

    t: float                     # parameter along tx->rx in [0, 1]
    point: np.ndarray            # 2D crossing point
    building_index: int


def intersect_2d(tx, rx, world: World) -> list[Crossing]:
    """All crossings of the 2D segment tx->rx with building footprint edges.

    Sorted by distance from tx. A crossing exactly at a polygon vertex is
    counted once (adjacent edges would otherwise both report it).
    """
    a = np.asarray(tx, dtype=float)[:2]
    b = np.asarray(rx, dtype=float)[:2]
    if np.array_equal(a, b):
        raise ValueError("tx and rx coincide in 2D")
    crossings: list[Crossing] = []
    for idx in _candidate_buildings(a, b, world):
        ts = _footprint_crossings(a, b, world.buildings[idx].footprint)
        for t in ts:
            crossings.append(Crossing(t, a + t * (b - a), idx))
    crossings.sort(key=lambda c: (c.t, c.building_index))
    return crossings


def _candidate_buildings(a: np.ndarray, b: np.ndarray, world: World) -> np.ndarray:
    """Indices of buildings whose bbox overlaps the segment bbox."""
    if len(world.buildings) == 0:
        return np.zeros(0, dtype=int)
    boxes = world.building_bboxes
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    mask = ((boxes[:, 0] <= hi[0]) & (boxes[:, 2] >= lo[0])
            & (boxes[:, 1] <= hi[1]) & (boxes[:, 3] >= lo[1]))
    return np.nonzero(mask)[0]


def _footprint_crossings(a: np.ndarray, b: np.ndarray,
                         footprint: np.ndarray) -> list[float]:
    """Sorted, vertex-deduplicated crossing parameters with one footprint."""
    p = footprint
    q = np.roll(p, -1, axis=0)
    r = b - a
    edge = q - p
    denom = r[0] * edge[:, 1] - r[1] * edge[:, 0]
    ap = p - a
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (ap[:, 0] * edge[:, 1] - ap[:, 1] * edge[:, 0]) / denom
        u = (ap[:, 0] * r[1] - ap[:, 1] * r[0]) / denom
    hit = (np.abs(denom) > 0) & (t >= 0.0) & (t <= 1.0) & (u >= 0.0) & (u <= 1.0)
    ts = np.sort(t[hit])
    merged: list[float] = []
    for value in ts:
        if not merged or value - merged[-1] > _T_MERGE_EPS:
            merged.append(float(value))
    return merged


def refine_3d(crossings: list[Crossing], tx, rx, world: World,
              count_buildings: bool = False) -> LinkProfile:
    """Re-evaluate 2D crossing candidates against the link elevation profile.

    The link elevation is interpolated at each crossing; crossings at or
    above the roof are dropped (a link grazing the roof edge is treated as
    unobstructed). d_obs is the 3D length of the union of link sub-segments
    that lie inside some footprint below its roof — segments fully contained
    in a building (no 2D crossing at all) are included.
    """
    a = np.asarray(tx, dtype=float)
    b = np.asarray(rx, dtype=float)
    total = float(np.linalg.norm(b - a))
    if total == 0.0:
        raise ValueError("tx and rx coincide")
    za, zb = a[2], b[2]

    per_building: dict[int, list[float]] = {}
    for c in crossings:
        per_building.setdefault(c.building_index, []).append(c.t)
    # buildings that contain an endpoint contribute even without crossings
    for idx in _candidate_buildings(a[:2], b[:2], world):
        if int(idx) in per_building:
            continue
        bld = world.buildings[int(idx)]
        if bld.contains(a[0], a[1]) or bld.contains(b[0], b[1]):
            per_building[int(idx)] = []

    n_walls = 0
    n_buildings = 0
    intervals: list[tuple[float, float]] = []
    for idx, ts in per_building.items():
        building = world.buildings[idx]
        height = building.height
        retained = sum(1 for t in ts if za + t * (zb - za) < height)
        n_walls += retained
        if retained:
            n_buildings += 1
        boundaries = [0.0] + sorted(ts) + [1.0]
        for lo, hi in zip(boundaries, boundaries[1:]):
            if hi - lo <= _T_MERGE_EPS:
                continue
            mid = 0.5 * (lo + hi)
            point = a[:2] + mid * (b[:2] - a[:2])
            if not building.contains(point[0], point[1]):
                continue
            sub = _clip_below(lo, hi, za, zb, height)
            if sub is not None:
                intervals.append(sub)

    d_obs = total * _union_length(intervals)
    n = n_buildings if count_buildings else n_walls
    return LinkProfile(n, d_obs, total)


def _clip_below(lo: float, hi: float, za: float, zb: float,
                height: float) -> tuple[float, float] | None:
    """Sub-interval of [lo, hi] where the link elevation is below ``height``."""
    z_lo = za + lo * (zb - za)
    z_hi = za + hi * (zb - za)
    if z_lo < height and z_hi < height:
        return (lo, hi)
    if z_lo >= height and z_hi >= height:
        return None
    t_cross = lo + (height - z_lo) / (z_hi - z_lo) * (hi - lo)
    return (lo, t_cross) if z_lo < height else (t_cross, hi)


def _union_length(intervals: list[tuple[float, float]]) -> float:
    if not intervals:
        return 0.0
    intervals.sort()
    length = 0.0
    cur_lo, cur_hi = intervals[0]
    for lo, hi in intervals[1:]:
        if lo > cur_hi:
            length += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    length += cur_hi - cur_lo
    return length


def link_profile(tx, rx, world: World, count_buildings: bool = False) -> LinkProfile:
    """Full two-stage analysis for one 3D link."""
    a = np.asarray(tx, dtype=float)
    b = np.asarray(rx, dtype=float)
    if np.array_equal(a[:2], b[:2]):
        # vertical link: no wall crossings, only endpoint containment matters
        total = float(np.linalg.norm(b - a))
        if total == 0.0:
            raise ValueError("tx and rx coincide")
        intervals = []
        for idx in _candidate_buildings(a[:2], a[:2] + 1e-9, world):
            bld = world.buildings[int(idx)]
            if bld.contains(a[0], a[1]):
                sub = _clip_below(0.0, 1.0, a[2], b[2], bld.height)
                if sub is not None:
                    intervals.append(sub)
        return LinkProfile(0, total * _union_length(intervals), total)
    return refine_3d(intersect_2d(a, b, world), a, b, world,
                     count_buildings=count_buildings)


def path_loss(tx, rx, params: PathLossParams, world: World) -> float:
    """Eq.-style total loss in dB: log-distance baseline plus obstacle term.

    Distances below the reference distance clamp to the reference distance.
    """
    profile = link_profile(tx, rx, world, count_buildings=params.count_buildings)
    d = max(profile.total_distance, params.reference_distance_m)
    baseline = (params.reference_loss_db
                + 10.0 * params.exponent * math.log10(d / params.reference_distance_m))
    return (baseline + profile.n_intersections * params.wall_loss_db
            + profile.obstructed_distance * params.interior_loss_db_per_m)


def rsrp(tx_power_dbm: float, loss_db: float) -> float:
    """Received power proxy in dBm (wideband, no per-resource normalization)."""
    return tx_power_dbm - loss_db


@dataclass
class ConnectivityMap:
    """Regular 2D grid of RSRP values at a fixed altitude.

    ``grid[iy, ix]`` is the RSRP at the center of the cell whose lower-left
    corner is ``origin + (ix, iy) * cell_size``.
    """

    origin: np.ndarray
    cell_size: float
    altitude: float
    grid: np.ndarray
    tx_position: np.ndarray = field(default=None)
    tx_power_dbm: float = 43.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape

    def cell_index(self, x: float, y: float) -> tuple[int, int, bool]:
        """(iy, ix, clamped) for the cell containing (x, y)."""
        ix = int((x - self.origin[0]) // self.cell_size)
        iy = int((y - self.origin[1]) // self.cell_size)
        ny, nx = self.grid.shape
        clamped = not (0 <= ix < nx and 0 <= iy < ny)
        return min(max(iy, 0), ny - 1), min(max(ix, 0), nx - 1), clamped

    def lookup(self, x: float, y: float) -> tuple[float, bool]:
        """RSRP of the cell containing (x, y); out-of-bounds clamps (flagged)."""
        iy, ix, clamped = self.cell_index(x, y)
        return float(self.grid[iy, ix]), clamped

    def save_csv(self, path) -> None:
        """Row-major CSV with a metadata header line (see README)."""
        with open(path, "w") as fh:
            fh.write("# origin_x=%r origin_y=%r cell_size=%r altitude=%r "
                     "nx=%d ny=%d tx_power_dbm=%r\n"
                     % (self.origin[0], self.origin[1], self.cell_size,
                        self.altitude, self.grid.shape[1], self.grid.shape[0],
                        self.tx_power_dbm))
            for row in self.grid:
                fh.write(",".join(repr(v) for v in row.tolist()) + "\n")

    @classmethod
    def load_csv(cls, path) -> "ConnectivityMap":
        with open(path) as fh:
            header = fh.readline()
            if not header.startswith("#"):
                raise ValueError("missing connectivity map header")
            meta = dict(item.split("=") for item in header[1:].split())
            rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
        grid = np.array(rows)
        expected = (int(meta["ny"]), int(meta["nx"]))
        if grid.shape != expected:
            raise ValueError(f"grid shape {grid.shape} != header {expected}")
        return cls(np.array([float(meta["origin_x"]), float(meta["origin_y"])]),
                   float(meta["cell_size"]), float(meta["altitude"]), grid,
                   tx_power_dbm=float(meta["tx_power_dbm"]))


def build_connectivity_map(world: World, tx, params: PathLossParams,
                           cell_size: float, altitude: float,
                           tx_power_dbm: float = 43.0) -> ConnectivityMap:
    """Evaluate RSRP at every cell center of a grid covering the world bounds."""
    if cell_size <= 0:
        raise ValueError("cell_size must be positive")
    if not (world.bounds_min[2] <= altitude <= world.bounds_max[2]):
        raise ValueError(f"altitude {altitude} outside world bounds")
    tx = np.asarray(tx, dtype=float)
    origin = world.bounds_min[:2].copy()
    extent = world.bounds_max[:2] - origin
    nx = int(math.ceil(extent[0] / cell_size))
    ny = int(math.ceil(extent[1] / cell_size))
    grid = np.empty((ny, nx))
    for iy in range(ny):
        cy = origin[1] + (iy + 0.5) * cell_size
        for ix in range(nx):
            cx = origin[0] + (ix + 0.5) * cell_size
            rx_point = np.array([cx, cy, altitude])
            if np.array_equal(rx_point, tx):
                loss = params.reference_loss_db
            else:
                loss = path_loss(tx, rx_point, params, world)
            grid[iy, ix] = rsrp(tx_power_dbm, loss)
    return ConnectivityMap(origin, float(cell_size), float(altitude), grid,
                           tx_position=tx, tx_power_dbm=tx_power_dbm)
