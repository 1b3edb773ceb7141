"""OpenStreetMap XML ingestion into a cartesian :class:`~hynetsim.world.World`.

No preprocessing with external tools: nodes and ways are read straight from
the XML. Ways tagged ``building`` become footprints (heights from tags where
present, otherwise seeded-random within a configured range); ways tagged
``highway`` become directed road edges.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

from .geo import GeoPoint, to_cartesian
from .world import Building, RoadGraph, World


class OsmError(ValueError):
    """Malformed or unusable OSM input."""


@dataclass
class OsmConfig:
    """Knobs for map ingestion."""

    default_height_range: tuple[float, float] = (10.0, 30.0)
    seed: int = 12345
    ceiling: float = 250.0          # world z extent
    default_lanes: int = 1
    default_speed_limit: float = 13.9  # m/s

    def __post_init__(self) -> None:
        lo, hi = self.default_height_range
        if lo <= 0 or hi < lo:
            raise ValueError(f"bad height range {self.default_height_range}")


def _parse_height(tags: dict[str, str]) -> float | None:
    if "height" in tags:
        try:
            return float(tags["height"].replace(" m", "").replace("m", ""))
        except ValueError:
            return None
    if "building:levels" in tags:
        try:
            return float(tags["building:levels"]) * 3.0
        except ValueError:
            return None
    return None


def _parse_speed(tags: dict[str, str], default: float) -> float:
    raw = tags.get("maxspeed")
    if raw is None:
        return default
    try:
        kmh = float(raw.split()[0])
    except ValueError:
        return default
    return kmh / 3.6


def parse_osm(source, config: OsmConfig | None = None) -> World:
    """Parse OSM XML (path, file object or bytes) into a World.

    Raises :class:`OsmError` with line context on malformed XML and on maps
    that contain no usable geometry.
    """
    config = config or OsmConfig()
    try:
        if isinstance(source, bytes):
            root = (ET.fromstring(source) if source.lstrip().startswith(b"<")
                    else ET.parse(source.decode()).getroot())
        elif isinstance(source, str):
            root = (ET.fromstring(source) if source.lstrip().startswith("<")
                    else ET.parse(source).getroot())
        else:  # path-like or open file
            root = ET.parse(source).getroot()
    except ET.ParseError as exc:
        line, col = exc.position
        raise OsmError(f"malformed OSM XML at line {line}, column {col}: {exc}") from exc

    geo_nodes: dict[int, GeoPoint] = {}
    for node in root.iter("node"):
        try:
            geo_nodes[int(node.attrib["id"])] = GeoPoint(
                float(node.attrib["lat"]), float(node.attrib["lon"]))
        except (KeyError, ValueError) as exc:
            raise OsmError(f"node missing id/lat/lon: {node.attrib}") from exc
    if not geo_nodes:
        raise OsmError("empty map: no nodes found")

    # Origin at the south-west corner so cartesian coordinates are >= 0.
    bounds_el = root.find("bounds")
    if bounds_el is not None:
        origin = GeoPoint(float(bounds_el.attrib["minlat"]),
                          float(bounds_el.attrib["minlon"]))
    else:
        origin = GeoPoint(min(g.latitude for g in geo_nodes.values()),
                          min(g.longitude for g in geo_nodes.values()))

    xy = {nid: to_cartesian(g, origin) for nid, g in geo_nodes.items()}

    rng = np.random.default_rng(config.seed)
    buildings: list[Building] = []
    roads = RoadGraph()
    road_nodes_added: set[int] = set()

    for way in root.iter("way"):
        refs = [int(nd.attrib["ref"]) for nd in way.findall("nd")]
        tags = {t.attrib["k"]: t.attrib["v"] for t in way.findall("tag")}
        if "building" in tags:
            pts = [xy[r] for r in refs if r in xy]
            if len(pts) < 3 or (len(pts) == 3 and refs[0] == refs[-1]):
                continue
            height = _parse_height(tags)
            if height is None:
                lo, hi = config.default_height_range
                height = float(rng.uniform(lo, hi))
            try:
                buildings.append(Building(pts, height))
            except ValueError:
                continue  # skip degenerate footprints rather than failing the map
        elif "highway" in tags:
            lanes = int(tags.get("lanes", config.default_lanes))
            speed = _parse_speed(tags, config.default_speed_limit)
            oneway = tags.get("oneway", "no") in ("yes", "true", "1")
            for a, b in zip(refs, refs[1:]):
                if a not in xy or b not in xy:
                    continue
                for nid in (a, b):
                    if nid not in road_nodes_added:
                        roads.add_node(nid, *xy[nid])
                        road_nodes_added.add(nid)
                roads.add_edge(a, b, lanes, speed)
                if not oneway:
                    roads.add_edge(b, a, lanes, speed)

    if not buildings and len(roads) == 0:
        raise OsmError("empty map: no building or highway ways found")

    xs = [p[0] for p in xy.values()]
    ys = [p[1] for p in xy.values()]
    bounds_min = (min(min(xs), 0.0), min(min(ys), 0.0), 0.0)
    bounds_max = (max(xs), max(ys), config.ceiling)
    return World(buildings, roads, bounds_min, bounds_max, origin=origin)
