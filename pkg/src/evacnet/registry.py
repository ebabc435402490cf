"""County source registry: FIPS -> official information channels.

The registry is a header-bearing CSV (the "location spreadsheet"): one row
per county with its government website, emergency-management website, and
social handles. State-level issuers use the reserved key `SS000` (2-digit
state FIPS + "000") so statewide notices share the county key space.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Mapping

from .alerts import TargetSet


class ChannelKind(str, Enum):
    GOV_SITE = "GovSite"
    EM_SITE = "EmSite"
    MICROBLOG = "Microblog"
    SOCIAL_PAGE = "SocialPage"


REQUIRED_COLUMNS = (
    "fips",
    "county_name",
    "state",
    "gov_website",
    "em_website",
    "microblog_handle",
    "social_page",
)

# Column -> channel kind, in emission order.
CHANNEL_FIELDS = (
    ("gov_website", ChannelKind.GOV_SITE),
    ("em_website", ChannelKind.EM_SITE),
    ("microblog_handle", ChannelKind.MICROBLOG),
    ("social_page", ChannelKind.SOCIAL_PAGE),
)


class RegistryError(ValueError):
    pass


class DuplicateFips(RegistryError):
    pass


class MissingRequiredColumn(RegistryError):
    pass


class EmptyRegistry(RegistryError):
    pass


class AtLeastOneChannel(RegistryError):
    """A registry row must expose at least one channel."""


@dataclass(frozen=True)
class CountySource:
    fips: str
    county_name: str
    state: str
    gov_website: str | None = None
    em_website: str | None = None
    microblog_handle: str | None = None
    social_page: str | None = None
    # Unknown spreadsheet columns, preserved opaquely.
    extra: Mapping[str, str] = field(default_factory=dict)

    def channels(self) -> list[tuple[ChannelKind, str]]:
        out = []
        for column, kind in CHANNEL_FIELDS:
            locator = getattr(self, column)
            if locator:
                out.append((kind, locator))
        return out


@dataclass(frozen=True)
class FetchTarget:
    fips: str
    channel_kind: ChannelKind
    locator: str


class Registry:
    """Immutable FIPS-keyed view of the location spreadsheet."""

    def __init__(self, rows: Iterator[CountySource] | list[CountySource]):
        self._by_fips: dict[str, CountySource] = {}
        for row in rows:
            if row.fips in self._by_fips:
                raise DuplicateFips(f"duplicate registry row for fips {row.fips}")
            self._by_fips[row.fips] = row
        if not self._by_fips:
            raise EmptyRegistry("registry has no rows")

    def get(self, fips: str) -> CountySource | None:
        return self._by_fips.get(fips)

    def __contains__(self, fips: str) -> bool:
        return fips in self._by_fips

    def __len__(self) -> int:
        return len(self._by_fips)

    def rows(self) -> list[CountySource]:
        return list(self._by_fips.values())


def state_key(state_fips: str) -> str:
    """Registry key for a state-level issuer, e.g. '12' -> '12000'."""
    return f"{state_fips}000"


def _parse_row(raw: Mapping[str, str], line_no: int) -> CountySource:
    fips = (raw.get("fips") or "").strip()
    if not (len(fips) == 5 and fips.isdigit()):
        raise RegistryError(f"line {line_no}: fips must be 5 decimal digits, got {fips!r}")
    channels = {col: (raw.get(col) or "").strip() or None for col, _ in CHANNEL_FIELDS}
    if not any(channels.values()):
        raise AtLeastOneChannel(f"line {line_no}: row {fips} has no channels")
    extra = {
        k: v for k, v in raw.items() if k not in REQUIRED_COLUMNS and k is not None and v
    }
    return CountySource(
        fips=fips,
        county_name=(raw.get("county_name") or "").strip(),
        state=(raw.get("state") or "").strip().upper(),
        extra=extra,
        **channels,
    )


def load_registry(path: str | Path) -> Registry:
    """Load the registry CSV, validating columns and row invariants."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise MissingRequiredColumn(f"registry missing columns: {', '.join(missing)}")
        rows = [_parse_row(raw, i) for i, raw in enumerate(reader, start=2)]
    return Registry(rows)


def fetch_targets(registry: Registry, targets: TargetSet) -> tuple[list[FetchTarget], list[str]]:
    """Expand a TargetSet into per-channel fetch targets.

    Returns (targets, missing) where `missing` lists targeted counties with
    no registry row; they are reported rather than silently dropped.
    """
    out: list[FetchTarget] = []
    missing: list[str] = []
    for fips in sorted(targets.counties):
        source = registry.get(fips)
        if source is None:
            missing.append(fips)
            continue
        for kind, locator in source.channels():
            out.append(FetchTarget(fips=fips, channel_kind=kind, locator=locator))
    return out, missing
