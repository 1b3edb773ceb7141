"""WGS84 <-> local cartesian conversion (equirectangular tangent plane)."""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 coordinate in degrees."""

    latitude: float
    longitude: float

    def __post_init__(self) -> None:
        if not abs(self.latitude) <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude}")
        if not abs(self.longitude) <= 180.0:
            raise ValueError(f"longitude out of range: {self.longitude}")


def to_cartesian(point: GeoPoint, origin: GeoPoint) -> tuple[float, float]:
    """Project ``point`` onto the local tangent plane anchored at ``origin``.

    Equirectangular projection: x = R * dlon * cos(lat0), y = R * dlat, with
    angles in radians and R the mean earth radius. Sub-meter accuracy at
    campus scale (a few km), which is all the simulator needs.
    """
    lat0 = math.radians(origin.latitude)
    dlat = math.radians(point.latitude - origin.latitude)
    dlon = math.radians(point.longitude - origin.longitude)
    return EARTH_RADIUS_M * dlon * math.cos(lat0), EARTH_RADIUS_M * dlat


def to_geo(x: float, y: float, origin: GeoPoint) -> GeoPoint:
    """Inverse of :func:`to_cartesian` (exact near the origin)."""
    lat0 = math.radians(origin.latitude)
    lat = origin.latitude + math.degrees(y / EARTH_RADIUS_M)
    lon = origin.longitude + math.degrees(x / (EARTH_RADIUS_M * math.cos(lat0)))
    return GeoPoint(lat, lon)
