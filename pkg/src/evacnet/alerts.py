"""Weather-alert ingestion and county targeting.

Alert documents arrive either from a live polling endpoint or from
newline-delimited fixture files; both use the same minimal document shape
(`id`, `event`, `sent`, `effective`, `expires`, `geocode.SAME`). Only
tropical-cyclone events drive targeting; everything else is kept as `Other`
so unexpected event names never halt the pipeline.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Iterable, Mapping

from .timeutil import parse_rfc3339


class EventType(str, Enum):
    HURRICANE_WARNING = "HurricaneWarning"
    HURRICANE_WATCH = "HurricaneWatch"
    TROPICAL_STORM_WARNING = "TropicalStormWarning"
    TROPICAL_STORM_WATCH = "TropicalStormWatch"
    TROPICAL_CYCLONE_STATEMENT = "TropicalCycloneStatement"
    OTHER = "Other"


# Exact (case-insensitive) event names that make an alert relevant for
# targeting. Unknown names map to OTHER instead of erroring.
EVENT_NAME_MAP = {
    "hurricane warning": EventType.HURRICANE_WARNING,
    "hurricane watch": EventType.HURRICANE_WATCH,
    "tropical storm warning": EventType.TROPICAL_STORM_WARNING,
    "tropical storm watch": EventType.TROPICAL_STORM_WATCH,
    "tropical cyclone statement": EventType.TROPICAL_CYCLONE_STATEMENT,
}

RELEVANT_EVENT_TYPES = frozenset(EVENT_NAME_MAP.values())


class AlertError(ValueError):
    """Base class for alert-document problems."""


class MalformedDocument(AlertError):
    pass


class MissingGeocode(AlertError):
    pass


class SameCodeError(AlertError):
    """Base class for SAME-code conversion failures."""


class BadLength(SameCodeError):
    pass


class NonDigit(SameCodeError):
    pass


class BadPrefix(SameCodeError):
    pass


def same_to_fips(same: str) -> str:
    """Convert a 6-digit SAME geocode to its 5-digit county FIPS code.

    SAME codes are county FIPS codes prefixed with '0'; the conversion
    strips the leading zero.
    """
    if len(same) != 6:
        raise BadLength(f"SAME code must be 6 digits, got {same!r}")
    if not same.isdigit():
        raise NonDigit(f"SAME code must be decimal digits, got {same!r}")
    if same[0] != "0":
        raise BadPrefix(f"SAME code must start with '0', got {same!r}")
    return same[1:]


@dataclass(frozen=True)
class HazardAlert:
    alert_id: str
    event_type: EventType
    same_codes: tuple[str, ...]
    sent_at: datetime
    effective_at: datetime
    expires_at: datetime
    sender: str = ""


@dataclass(frozen=True)
class TargetSet:
    """Counties currently targeted for harvesting.

    `statement_only` flags counties whose only contributors are
    TropicalCycloneStatement alerts, so their influence can be audited
    separately from watch/warning-driven targeting.
    """

    counties: frozenset[str]
    computed_at: datetime
    contributing_alert_ids: frozenset[str]
    statement_only: frozenset[str] = frozenset()


_REQUIRED_DOC_FIELDS = ("id", "event", "sent", "effective", "expires")


def ingest_alert_document(doc: Mapping) -> HazardAlert:
    """Parse one alert document into a HazardAlert.

    Raises MissingGeocode when the geocode block is absent and
    MalformedDocument when other required fields are missing or invalid.
    """
    if not isinstance(doc, Mapping):
        raise MalformedDocument("alert document must be a JSON object")

    missing = [k for k in _REQUIRED_DOC_FIELDS if not doc.get(k)]
    if missing:
        raise MalformedDocument(f"missing required fields: {', '.join(missing)}")

    geocode = doc.get("geocode")
    if not isinstance(geocode, Mapping):
        raise MissingGeocode(f"alert {doc['id']!r} has no geocode block")

    raw_codes = geocode.get("SAME") or []
    if not isinstance(raw_codes, (list, tuple)):
        raise MalformedDocument("geocode.SAME must be an array of strings")
    same_codes = []
    for code in raw_codes:
        if not isinstance(code, str):
            raise MalformedDocument(f"geocode.SAME entry {code!r} is not a string")
        same_to_fips(code)  # validates format
        same_codes.append(code)

    try:
        sent_at = parse_rfc3339(str(doc["sent"]))
        effective_at = parse_rfc3339(str(doc["effective"]))
        expires_at = parse_rfc3339(str(doc["expires"]))
    except ValueError as exc:
        raise MalformedDocument(f"bad timestamp: {exc}") from exc
    if expires_at < effective_at:
        raise MalformedDocument(
            f"alert {doc['id']!r} expires ({expires_at}) before effective ({effective_at})"
        )

    event_type = EVENT_NAME_MAP.get(str(doc["event"]).strip().lower(), EventType.OTHER)
    return HazardAlert(
        alert_id=str(doc["id"]),
        event_type=event_type,
        same_codes=tuple(same_codes),
        sent_at=sent_at,
        effective_at=effective_at,
        expires_at=expires_at,
        sender=str(doc.get("sender", "")),
    )


def compute_targets(alerts: Iterable[HazardAlert], now: datetime) -> TargetSet:
    """Union the counties of relevant, unexpired alerts.

    Expired alerts are pruned here rather than at ingest so replays under a
    simulated clock behave identically to live runs.
    """
    counties: set[str] = set()
    contributing: set[str] = set()
    watch_warning_counties: set[str] = set()
    statement_counties: set[str] = set()

    for alert in alerts:
        if alert.event_type not in RELEVANT_EVENT_TYPES:
            continue
        if alert.expires_at <= now:
            continue
        fips = {same_to_fips(code) for code in alert.same_codes}
        if not fips:
            continue
        counties |= fips
        contributing.add(alert.alert_id)
        if alert.event_type is EventType.TROPICAL_CYCLONE_STATEMENT:
            statement_counties |= fips
        else:
            watch_warning_counties |= fips

    return TargetSet(
        counties=frozenset(counties),
        computed_at=now,
        contributing_alert_ids=frozenset(contributing),
        statement_only=frozenset(statement_counties - watch_warning_counties),
    )


def zone_only_alerts(alerts: Iterable[HazardAlert], now: datetime) -> list[str]:
    """Ids of relevant, unexpired alerts carrying no SAME codes.

    These are typically zone-coded (UGC-only) alerts; they cannot target a
    county and are surfaced as a diagnostic instead of silently vanishing.
    """
    return [
        a.alert_id
        for a in alerts
        if a.event_type in RELEVANT_EVENT_TYPES
        and a.expires_at > now
        and not a.same_codes
    ]


class AlertGateway:
    """Append-only alert buffer; last write per alert_id wins.

    Safe for concurrent ingest from multiple pollers; `targets()` computes
    from a consistent snapshot.
    """

    def __init__(self) -> None:
        self._alerts: dict[str, HazardAlert] = {}
        self._lock = threading.Lock()

    def ingest(self, doc: Mapping) -> HazardAlert:
        alert = ingest_alert_document(doc)
        self.add(alert)
        return alert

    def add(self, alert: HazardAlert) -> None:
        with self._lock:
            self._alerts[alert.alert_id] = alert

    def snapshot(self) -> list[HazardAlert]:
        with self._lock:
            return list(self._alerts.values())

    def targets(self, now: datetime) -> TargetSet:
        return compute_targets(self.snapshot(), now)

    def zone_only(self, now: datetime) -> list[str]:
        return zone_only_alerts(self.snapshot(), now)
