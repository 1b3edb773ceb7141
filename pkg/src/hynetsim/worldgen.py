"""Synthetic world generator: box buildings on a Manhattan road grid.

Lets every scenario run without external map files. Deterministic for a
given seed.
"""

from __future__ import annotations

import numpy as np

from .world import Building, RoadGraph, World


def synthetic_world(size=(1500.0, 750.0, 250.0), block_size: float = 250.0,
                    building_margin: float = 40.0, height_range=(10.0, 30.0),
                    lanes: int = 1, speed_limit: float = 13.9,
                    buildings_per_block: int = 1, seed: int = 12345) -> World:
    """Generate a rectangular Manhattan-style world.

    Roads run along the grid lines spaced ``block_size`` apart (both
    directions of travel). Each interior block receives
    ``buildings_per_block`` axis-aligned box buildings with seeded random
    heights drawn uniformly from ``height_range``.
    """
    width, depth, ceiling = float(size[0]), float(size[1]), float(size[2])
    rng = np.random.default_rng(seed)

    nx_lines = int(round(width / block_size)) + 1
    ny_lines = int(round(depth / block_size)) + 1
    if nx_lines < 2 or ny_lines < 2:
        raise ValueError("world too small for the requested block size")

    roads = RoadGraph()
    node_id = 0
    grid_ids = {}
    for ix in range(nx_lines):
        for iy in range(ny_lines):
            x = min(ix * block_size, width)
            y = min(iy * block_size, depth)
            roads.add_node(node_id, x, y)
            grid_ids[(ix, iy)] = node_id
            node_id += 1
    for ix in range(nx_lines):
        for iy in range(ny_lines):
            a = grid_ids[(ix, iy)]
            if ix + 1 < nx_lines:
                b = grid_ids[(ix + 1, iy)]
                roads.add_edge(a, b, lanes, speed_limit)
                roads.add_edge(b, a, lanes, speed_limit)
            if iy + 1 < ny_lines:
                b = grid_ids[(ix, iy + 1)]
                roads.add_edge(a, b, lanes, speed_limit)
                roads.add_edge(b, a, lanes, speed_limit)

    buildings = []
    lo, hi = height_range
    for ix in range(nx_lines - 1):
        for iy in range(ny_lines - 1):
            bx0 = ix * block_size + building_margin
            by0 = iy * block_size + building_margin
            bx1 = min((ix + 1) * block_size, width) - building_margin
            by1 = min((iy + 1) * block_size, depth) - building_margin
            if bx1 - bx0 < 10 or by1 - by0 < 10:
                continue
            for _ in range(buildings_per_block):
                # sub-box with jittered extent inside the block interior
                w = rng.uniform(0.5, 1.0) * (bx1 - bx0)
                d = rng.uniform(0.5, 1.0) * (by1 - by0)
                cx = rng.uniform(bx0 + w / 2, bx1 - w / 2)
                cy = rng.uniform(by0 + d / 2, by1 - d / 2)
                height = rng.uniform(lo, hi)
                footprint = [(cx - w / 2, cy - d / 2), (cx + w / 2, cy - d / 2),
                             (cx + w / 2, cy + d / 2), (cx - w / 2, cy + d / 2)]
                buildings.append(Building(footprint, height))

    return World(buildings, roads, (0.0, 0.0, 0.0), (width, depth, ceiling))


def straight_road_world(length: float = 30_000.0, lanes: int = 1,
                        speed_limit: float = 13.9) -> World:
    """A single long straight road, no buildings (car platoon studies)."""
    roads = RoadGraph()
    roads.add_node(0, 0.0, 0.0)
    roads.add_node(1, length, 0.0)
    roads.add_edge(0, 1, lanes, speed_limit)
    roads.add_edge(1, 0, lanes, speed_limit)
    return World([], roads, (0.0, -50.0, 0.0), (length, 50.0, 250.0))
