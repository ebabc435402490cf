"""County boundary geometry: GeoJSON loading and point-in-polygon lookup.

Containment uses even-odd ray casting over every ring, so holes and
multi-part counties need no special casing. Crossing tests use a half-open
convention (a ray through a vertex counts the edge whose second endpoint is
strictly above), which keeps boundary points deterministic: a point exactly
on a shared edge resolves to exactly one side.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence


class GeometryError(ValueError):
    pass


class RingNotClosed(GeometryError):
    pass


class UnknownGeometryType(GeometryError):
    pass


Ring = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class CountyShape:
    """All rings (outer and holes, all parts) for one county."""

    fips: str
    name: str
    state: str
    rings: tuple[Ring, ...]


def _validate_ring(raw: Sequence[Sequence[float]], fips: str) -> Ring:
    if len(raw) < 4:
        raise GeometryError(f"county {fips}: ring needs at least 4 positions, got {len(raw)}")
    points = tuple((float(p[0]), float(p[1])) for p in raw)
    if points[0] != points[-1]:
        raise RingNotClosed(f"county {fips}: ring start {points[0]} != end {points[-1]}")
    return points


def _rings_of(geometry: dict, fips: str) -> tuple[Ring, ...]:
    gtype = geometry.get("type")
    coords = geometry.get("coordinates")
    if gtype == "Polygon":
        return tuple(_validate_ring(ring, fips) for ring in coords)
    if gtype == "MultiPolygon":
        return tuple(
            _validate_ring(ring, fips) for polygon in coords for ring in polygon
        )
    raise UnknownGeometryType(f"county {fips}: unsupported geometry type {gtype!r}")


def load_county_shapes(path) -> dict[str, CountyShape]:
    """Load a GeoJSON FeatureCollection of counties keyed by 5-digit FIPS.

    Each feature needs properties fips, name, and state; geometries must be
    Polygon or MultiPolygon with closed rings.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("type") != "FeatureCollection":
        raise GeometryError(f"expected FeatureCollection, got {doc.get('type')!r}")
    shapes: dict[str, CountyShape] = {}
    for feature in doc.get("features", []):
        props = feature.get("properties") or {}
        fips = props.get("fips")
        if not fips or len(fips) != 5 or not fips.isdigit():
            raise GeometryError(f"feature missing valid 5-digit fips: {fips!r}")
        if fips in shapes:
            raise GeometryError(f"duplicate county fips {fips} in boundary file")
        shapes[fips] = CountyShape(
            fips=fips,
            name=props.get("name", ""),
            state=props.get("state", ""),
            rings=_rings_of(feature.get("geometry") or {}, fips),
        )
    return shapes


def _ray_crossings(lon: float, lat: float, ring: Ring) -> int:
    """Count crossings of the eastward ray from (lon, lat) with ring edges.

    Half-open rule: an edge counts when exactly one endpoint is strictly
    above the ray, and the intersection lies strictly east of the point.
    """
    crossings = 0
    for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
        if (y1 > lat) == (y2 > lat):
            continue
        # Edge straddles the ray; find intersection longitude.
        t = (lat - y1) / (y2 - y1)
        x_cross = x1 + t * (x2 - x1)
        if x_cross > lon:
            crossings += 1
    return crossings


def point_in_rings(lon: float, lat: float, rings: Iterable[Ring]) -> bool:
    """Even-odd containment: inside when total crossings over all rings is odd."""
    total = sum(_ray_crossings(lon, lat, ring) for ring in rings)
    return total % 2 == 1


class CountyIndex:
    """Point-to-county lookup over a loaded boundary set."""

    def __init__(self, shapes: dict[str, CountyShape]):
        self._shapes = dict(shapes)

    def __contains__(self, fips: str) -> bool:
        return fips in self._shapes

    def get(self, fips: str) -> CountyShape | None:
        return self._shapes.get(fips)

    def counties_in_state(self, ss: str) -> list[CountyShape]:
        return [s for f, s in sorted(self._shapes.items()) if f.startswith(ss)]

    def locate(self, lon: float, lat: float) -> str | None:
        """FIPS of the county containing the point, or None.

        Counties tile the plane without overlap in real data; with the
        half-open rule a boundary point matches exactly one county. Ties
        from malformed data resolve to the lowest FIPS for determinism.
        """
        for fips in sorted(self._shapes):
            if point_in_rings(lon, lat, self._shapes[fips].rings):
                return fips
        return None

    def scope_geometry(self, fips_or_state: str) -> dict | None:
        """GeoJSON geometry for a county, or for a state scope (SS000) the
        MultiPolygon union of member county rings."""
        if fips_or_state.endswith("000") and len(fips_or_state) == 5:
            members = self.counties_in_state(fips_or_state[:2])
            if not members:
                return None
            polygons = [
                [list(list(pt) for pt in ring) for ring in shape.rings]
                for shape in members
            ]
            return {"type": "MultiPolygon", "coordinates": polygons}
        shape = self._shapes.get(fips_or_state)
        if shape is None:
            return None
        return {
            "type": "MultiPolygon",
            "coordinates": [[list(list(pt) for pt in ring) for ring in shape.rings]],
        }
