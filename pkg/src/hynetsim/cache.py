"""Versioned binary cache for parsed worlds.

Parsing OSM XML dominates scenario start-up, so a parsed World can be frozen
to a compact binary file and reloaded bit-identically. Byte layout (all
little-endian, see README for the same table):

    magic       8s   b"HYNWRLD1"
    version     u16  currently 1
    has_origin  u8   1 if a WGS84 origin follows
    origin      2*f64  (lat, lon) when has_origin
    bounds      6*f64  (min x,y,z, max x,y,z)
    n_buildings u32
      per building: n_vertices u32, vertices n*2*f64, height f64
    n_nodes     u32
      per node: id i64, x f64, y f64
    n_edges     u32
      per edge: from i64, to i64, lanes u32, speed_limit f64
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .geo import GeoPoint
from .world import Building, RoadGraph, World

MAGIC = b"HYNWRLD1"
VERSION = 1


class CacheError(IOError):
    """Unreadable, truncated or version-incompatible cache file."""


def save_cache(world: World, path) -> None:
    """Write ``world`` to ``path`` in the binary format above."""
    out = bytearray()
    out += MAGIC
    out += struct.pack("<H", VERSION)
    if world.origin is not None:
        out += struct.pack("<B2d", 1, world.origin.latitude, world.origin.longitude)
    else:
        out += struct.pack("<B", 0)
    out += struct.pack("<6d", *world.bounds_min, *world.bounds_max)
    out += struct.pack("<I", len(world.buildings))
    for b in world.buildings:
        out += struct.pack("<I", len(b.footprint))
        out += b.footprint.astype("<f8").tobytes()
        out += struct.pack("<d", b.height)
    nodes = world.roads.nodes
    out += struct.pack("<I", len(nodes))
    for nid, p in nodes.items():
        out += struct.pack("<q2d", nid, p[0], p[1])
    edges = list(world.roads.edges.values())
    out += struct.pack("<I", len(edges))
    for e in edges:
        out += struct.pack("<qqId", e.node_from, e.node_to, e.lanes, e.speed_limit)
    Path(path).write_bytes(bytes(out))


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise CacheError("truncated cache file")
        values = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return values

    def take_array(self, count: int, width: int) -> np.ndarray:
        size = count * width * 8
        if self.pos + size > len(self.data):
            raise CacheError("truncated cache file")
        arr = np.frombuffer(self.data, dtype="<f8", count=count * width,
                            offset=self.pos).reshape(count, width).copy()
        self.pos += size
        return arr


def load_cache(path) -> World:
    """Load a World previously written by :func:`save_cache`.

    Raises :class:`CacheError` on bad magic, unknown version or truncation so
    callers can fall back to re-parsing the source map.
    """
    data = Path(path).read_bytes()
    r = _Reader(data)
    (magic,) = r.take("<8s")
    if magic != MAGIC:
        raise CacheError(f"not a world cache (magic {magic!r})")
    (version,) = r.take("<H")
    if version != VERSION:
        raise CacheError(f"unsupported cache version {version} (expected {VERSION})")
    (has_origin,) = r.take("<B")
    origin = None
    if has_origin:
        lat, lon = r.take("<2d")
        origin = GeoPoint(lat, lon)
    bounds = r.take("<6d")
    (n_buildings,) = r.take("<I")
    buildings = []
    for _ in range(n_buildings):
        (n_vertices,) = r.take("<I")
        pts = r.take_array(n_vertices, 2)
        (height,) = r.take("<d")
        buildings.append(Building(pts, height))
    roads = RoadGraph()
    (n_nodes,) = r.take("<I")
    for _ in range(n_nodes):
        nid, x, y = r.take("<q2d")
        roads.add_node(nid, x, y)
    (n_edges,) = r.take("<I")
    for _ in range(n_edges):
        a, b, lanes, speed = r.take("<qqId")
        roads.add_edge(a, b, lanes, speed)
    return World(buildings, roads, bounds[:3], bounds[3:], origin=origin)


def load_world(osm_path, cache_path=None, config=None) -> World:
    """Load a world from OSM XML, going through the cache when possible.

    If ``cache_path`` exists and is readable it wins; otherwise the XML is
    parsed and the cache (re)written. A stale or corrupt cache never fails
    the load, it just falls back to parsing.
    """
    from .osm import parse_osm  # local import: keep cache importable standalone

    cache_path = Path(cache_path) if cache_path else Path(osm_path).with_suffix(".world")
    if cache_path.exists():
        try:
            return load_cache(cache_path)
        except CacheError:
            pass
    world = parse_osm(str(osm_path), config)
    save_cache(world, cache_path)
    return world
