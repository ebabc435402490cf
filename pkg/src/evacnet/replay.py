"""Scenario replay: drive the real pipeline from a scripted timeline.

A scenario is newline-delimited JSON, one event per line, sorted by `at`:

    {"at": "...", "kind": "alert", "document": {...}}
    {"at": "...", "kind": "post", "fips": "12086", "channel_kind": "GovSite",
     "text": "...", "url": "https://..."}
    {"at": "...", "kind": "close_all"}

Posts flow through the same harvest_cycle as live operation (scripted
fetcher, parallelism 1), so replays exercise the production code paths and
are byte-reproducible with the lexical backend.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime

from .alerts import AlertError, AlertGateway
from .classify import LabelDistribution, LexicalClassifier
from .geometry import CountyIndex, load_county_shapes
from .harvest import PrefilterMode, ScriptedFetcher, harvest_cycle
from .notices import NoticeService, NoticeStatus, NoticeStore
from .registry import ChannelKind, Registry, fetch_targets, load_registry
from .timeutil import format_rfc3339, parse_rfc3339


class ScenarioError(ValueError):
    pass


class UnreadableStore(RuntimeError):
    pass


@dataclass(frozen=True)
class ScenarioEvent:
    at: datetime
    kind: str
    document: dict | None = None
    fips: str | None = None
    channel_kind: ChannelKind | None = None
    text: str | None = None
    url: str | None = None


_KINDS = ("alert", "post", "close_all")


def load_scenario(path) -> list[ScenarioEvent]:
    """Parse and validate a scenario file; events must be sorted by at."""
    events: list[ScenarioEvent] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ScenarioError(f"{path}:{line_no}: not JSON: {exc}") from exc
            try:
                at = parse_rfc3339(doc["at"])
                kind = doc["kind"]
                if kind not in _KINDS:
                    raise ScenarioError(
                        f"{path}:{line_no}: unknown kind {kind!r}, expected one of {_KINDS}"
                    )
                if kind == "alert":
                    event = ScenarioEvent(at=at, kind=kind, document=dict(doc["document"]))
                elif kind == "post":
                    event = ScenarioEvent(
                        at=at,
                        kind=kind,
                        fips=doc["fips"],
                        channel_kind=ChannelKind(doc["channel_kind"]),
                        text=doc["text"],
                        url=doc["url"],
                    )
                else:
                    event = ScenarioEvent(at=at, kind=kind)
            except ScenarioError:
                raise
            except (KeyError, TypeError, ValueError) as exc:
                raise ScenarioError(f"{path}:{line_no}: bad event: {exc}") from exc
            if events and event.at < events[-1].at:
                raise ScenarioError(
                    f"{path}:{line_no}: events out of order "
                    f"({format_rfc3339(event.at)} after {format_rfc3339(events[-1].at)})"
                )
            events.append(event)
    return events


@dataclass
class ReplayResult:
    log_lines: list[str] = field(default_factory=list)
    snapshot: dict = field(default_factory=dict)
    store: NoticeStore = field(default_factory=NoticeStore)

    def log_text(self) -> str:
        return "".join(line + "\n" for line in self.log_lines)


def _log(result: ReplayResult, at: datetime, event: str, **fields) -> None:
    entry = {"at": format_rfc3339(at), "event": event, **fields}
    result.log_lines.append(json.dumps(entry, sort_keys=True))


def run_replay(
    scenario_path,
    registry: Registry,
    index: CountyIndex,
    classifier=None,
    mode: PrefilterMode = PrefilterMode.ANY,
) -> ReplayResult:
    """Apply scenario events in order; returns the log, feed snapshot, and store."""
    events = load_scenario(scenario_path)
    classifier = classifier or LexicalClassifier()
    gateway = AlertGateway()
    store = NoticeStore()
    fetcher = ScriptedFetcher()
    seen: set[str] = set()
    result = ReplayResult(store=store)

    for event in events:
        now = event.at
        if event.kind == "alert":
            try:
                alert = gateway.ingest(event.document)
            except AlertError as exc:
                raise ScenarioError(f"alert at {format_rfc3339(now)}: {exc}") from exc
            targets = gateway.targets(now)
            _log(
                result,
                now,
                "alert_ingested",
                alert_id=alert.alert_id,
                event_type=alert.event_type.value,
                targeted_counties=sorted(targets.counties),
            )
            continue

        if event.kind == "close_all":
            closed = store.close_all(now)
            _log(result, now, "close_all", closed=closed)
            continue

        # Post: deliver only if its county is currently targeted and the
        # registry knows the channel; otherwise log why it was skipped.
        targets = gateway.targets(now)
        if event.fips not in targets.counties:
            _log(result, now, "untargeted_county", fips=event.fips)
            continue
        row = registry.get(event.fips)
        if row is None:
            _log(result, now, "county_not_in_registry", fips=event.fips)
            continue
        if all(kind is not event.channel_kind for kind, _ in row.channels()):
            _log(
                result,
                now,
                "channel_missing",
                fips=event.fips,
                channel_kind=event.channel_kind.value,
            )
            continue

        fetcher.add_post(
            event.fips, event.channel_kind, event.text, event.url, published_at=now
        )
        cycle_targets, missing = fetch_targets(registry, targets)
        for fips in missing:
            _log(result, now, "county_not_in_registry", fips=fips)
        report = harvest_cycle(
            cycle_targets, fetcher, seen, mode=mode, now=now, parallelism=1
        )
        for failure in report.failures:
            _log(
                result,
                now,
                "fetch_failed",
                fips=failure.target.fips,
                channel_kind=failure.target.channel_kind.value,
                error=failure.error,
            )
        if not report.candidates:
            continue
        distributions = classifier.classify([c.normalized_text for c in report.candidates])
        for candidate, dist in zip(report.candidates, distributions):
            record = store.upsert(candidate, dist)
            if record.status is NoticeStatus.REJECTED:
                _log(result, now, "notice_rejected", id=record.id, fips=record.scope_key)
            else:
                _log(
                    result,
                    now,
                    "notice_upserted",
                    id=record.id,
                    fips=record.scope_key,
                    label=record.label.value,
                    status=record.status.value,
                    supersedes=record.supersedes,
                )

    service = NoticeService(store, index)
    result.snapshot = service.geojson_feed()
    return result


def snapshot_bytes(snapshot: dict) -> bytes:
    """Canonical serialization used for golden comparison."""
    return (json.dumps(snapshot, sort_keys=True, indent=2) + "\n").encode("utf-8")


def run_replay_files(
    scenario_path,
    registry_path,
    geometry_path,
    classifier=None,
    mode: PrefilterMode = PrefilterMode.ANY,
) -> ReplayResult:
    registry = load_registry(registry_path)
    index = CountyIndex(load_county_shapes(geometry_path))
    return run_replay(scenario_path, registry, index, classifier=classifier, mode=mode)


def render_report(store: NoticeStore, by: str) -> tuple[str, list[tuple[str, str, int]]]:
    """Archive stats as an aligned text table plus (key, series, count) triples.

    Year grouping also emits per-label series for the by-year chart shape.
    """
    counts = store.archive_stats(by)
    header_key = by.capitalize()
    width = max([len(header_key)] + [len(str(k)) for k in counts]) + 2
    lines = [f"{header_key:<{width}}Count"]
    for key, count in counts.items():
        lines.append(f"{str(key):<{width}}{count}")
    table = "\n".join(lines)

    triples: list[tuple[str, str, int]] = []
    if by == "year":
        for year, row in store.year_label_crosstab().items():
            for label, count in row.items():
                triples.append((str(year), label, count))
    else:
        for key, count in counts.items():
            triples.append((str(key), "All", count))
    return table, triples


def load_store(path) -> NoticeStore:
    try:
        return NoticeStore.load(path)
    except (OSError, ValueError) as exc:
        raise UnreadableStore(f"cannot read store {path}: {exc}") from exc


def write_plot_data(path, triples: list[tuple[str, str, int]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("key,series,count\n")
        for key, series, count in triples:
            fh.write(f"{key},{series},{count}\n")
