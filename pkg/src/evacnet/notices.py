"""Event-sourced notice archive with lifecycle semantics.

Every write appends an event (upsert, feedback, close_all); state is
rebuilt by replaying events ordered by (at, seq). That makes `active(at)`
time travel trivial and guarantees ingest order cannot matter: a late
arriving older notice lands in its chronological slot on the next rebuild.

Precedence within one scope key: Mandatory supersedes Voluntary, a newer
record supersedes an older one of the same label, and a Voluntary arriving
while a Mandatory holds is closed on arrival. NotNotice decisions are kept
as Rejected records (a reviewable archive, never the feed).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from typing import Iterable, Sequence

from .classify import LabelDistribution, NoticeLabel, decide
from .evaluate import LabeledExample, Origin
from .harvest import CandidateText
from .registry import ChannelKind
from .timeutil import format_rfc3339, parse_rfc3339


class NoticeStatus(str, Enum):
    ACTIVE = "Active"
    SUPERSEDED = "Superseded"
    CLOSED = "Closed"
    REJECTED = "Rejected"


class FeedbackAction(str, Enum):
    CONFIRM = "Confirm"
    CORRECT = "Correct"
    REJECT = "Reject"


class UnknownNotice(KeyError):
    pass


class FeedbackBeforeNotice(ValueError):
    pass


@dataclass(frozen=True)
class FeedbackEntry:
    notice_id: str
    action: FeedbackAction
    reviewer_id: str
    at: datetime
    corrected_label: NoticeLabel | None = None

    def __post_init__(self) -> None:
        if self.action is FeedbackAction.CORRECT and self.corrected_label is None:
            raise ValueError("Correct requires a corrected_label")
        if self.action is not FeedbackAction.CORRECT and self.corrected_label is not None:
            raise ValueError(f"{self.action.value} must not carry a corrected_label")


@dataclass(frozen=True)
class NoticeRecord:
    id: str
    scope_key: str
    label: NoticeLabel
    distribution: LabelDistribution
    text: str
    source_url: str
    channel_kind: ChannelKind
    observed_at: datetime
    status: NoticeStatus
    supersedes: str | None
    reviewed: bool


def record_to_json(record: NoticeRecord) -> dict:
    return {
        "id": record.id,
        "scope_key": record.scope_key,
        "label": record.label.value,
        "distribution": record.distribution.as_list(),
        "text": record.text,
        "source_url": record.source_url,
        "channel_kind": record.channel_kind.value,
        "observed_at": format_rfc3339(record.observed_at),
        "status": record.status.value,
        "supersedes": record.supersedes,
        "reviewed": record.reviewed,
    }


# Internal event types. `at` is the effective time used for replay order;
# `seq` breaks ties and names the created record (n-{seq:06d}).


@dataclass(frozen=True)
class _UpsertEvent:
    seq: int
    at: datetime
    candidate: CandidateText
    distribution: LabelDistribution


@dataclass(frozen=True)
class _FeedbackEvent:
    seq: int
    at: datetime
    entry: FeedbackEntry


@dataclass(frozen=True)
class _CloseAllEvent:
    seq: int
    at: datetime


_Event = _UpsertEvent | _FeedbackEvent | _CloseAllEvent


class _RecState:
    """Mutable record state during a replay pass."""

    __slots__ = (
        "id", "scope_key", "label", "distribution", "text", "source_url",
        "channel_kind", "observed_at", "status", "supersedes", "reviewed",
        "seq", "operator_closed",
    )

    def __init__(self, event: _UpsertEvent, label: NoticeLabel, status: NoticeStatus):
        cand = event.candidate
        self.id = f"n-{event.seq:06d}"
        self.scope_key = cand.fips
        self.label = label
        self.distribution = event.distribution
        self.text = cand.normalized_text
        self.source_url = cand.source_url
        self.channel_kind = cand.channel_kind
        self.observed_at = event.at
        self.status = status
        self.supersedes: str | None = None
        self.reviewed = False
        self.seq = event.seq
        self.operator_closed = False

    def freeze(self) -> NoticeRecord:
        return NoticeRecord(
            id=self.id,
            scope_key=self.scope_key,
            label=self.label,
            distribution=self.distribution,
            text=self.text,
            source_url=self.source_url,
            channel_kind=self.channel_kind,
            observed_at=self.observed_at,
            status=self.status,
            supersedes=self.supersedes,
            reviewed=self.reviewed,
        )


class _State:
    def __init__(self) -> None:
        self.records: dict[str, _RecState] = {}
        self.audit: list[FeedbackEntry] = []

    def active_for(self, scope_key: str) -> _RecState | None:
        for rec in self.records.values():
            if rec.scope_key == scope_key and rec.status is NoticeStatus.ACTIVE:
                return rec
        return None


def _rerun_precedence(state: _State, scope_key: str) -> None:
    """Recompute statuses for one scope after a review changed the field.

    Winner is the latest-observed Mandatory, else the latest-observed
    Voluntary, among records that are neither Rejected nor operator-closed.
    Non-winners older than the winner read as Superseded, newer as Closed,
    matching what sequential ingestion would have produced.
    """
    eligible = [
        r
        for r in state.records.values()
        if r.scope_key == scope_key
        and r.status is not NoticeStatus.REJECTED
        and not r.operator_closed
        and r.label in (NoticeLabel.MANDATORY, NoticeLabel.VOLUNTARY)
    ]
    if not eligible:
        return
    mandatory = [r for r in eligible if r.label is NoticeLabel.MANDATORY]
    pool = mandatory or eligible
    winner = max(pool, key=lambda r: (r.observed_at, r.seq))
    for rec in eligible:
        if rec is winner:
            rec.status = NoticeStatus.ACTIVE
        elif (rec.observed_at, rec.seq) < (winner.observed_at, winner.seq):
            rec.status = NoticeStatus.SUPERSEDED
        else:
            rec.status = NoticeStatus.CLOSED


def _apply_upsert(state: _State, event: _UpsertEvent) -> None:
    decision = decide(event.distribution)
    if decision is NoticeLabel.NOT_NOTICE:
        rec = _RecState(event, NoticeLabel.NOT_NOTICE, NoticeStatus.REJECTED)
        state.records[rec.id] = rec
        return
    rec = _RecState(event, decision, NoticeStatus.ACTIVE)
    current = state.active_for(rec.scope_key)
    if current is not None:
        if (
            rec.label is NoticeLabel.VOLUNTARY
            and current.label is NoticeLabel.MANDATORY
        ):
            # Voluntary never displaces a standing Mandatory.
            rec.status = NoticeStatus.CLOSED
        else:
            current.status = NoticeStatus.SUPERSEDED
            rec.supersedes = current.id
    state.records[rec.id] = rec


def _apply_feedback(state: _State, event: _FeedbackEvent) -> None:
    entry = event.entry
    rec = state.records.get(entry.notice_id)
    if rec is None:
        # Write-time validation makes this unreachable in a full replay.
        raise UnknownNotice(entry.notice_id)
    state.audit.append(entry)
    rec.reviewed = True
    if entry.action is FeedbackAction.CONFIRM:
        return
    if entry.action is FeedbackAction.REJECT or (
        entry.action is FeedbackAction.CORRECT
        and entry.corrected_label is NoticeLabel.NOT_NOTICE
    ):
        was_active = rec.status is NoticeStatus.ACTIVE
        rec.status = NoticeStatus.REJECTED
        if entry.action is FeedbackAction.CORRECT:
            rec.label = NoticeLabel.NOT_NOTICE
        if was_active:
            _rerun_precedence(state, rec.scope_key)
        return
    # Correct to Mandatory or Voluntary: override the label and let scope
    # precedence settle who is active. Operator-closed records keep their
    # closure; a corrected Rejected record becomes eligible again.
    rec.label = entry.corrected_label
    if rec.status is NoticeStatus.REJECTED:
        rec.status = NoticeStatus.CLOSED
    if not rec.operator_closed:
        _rerun_precedence(state, rec.scope_key)


def _apply_close_all(state: _State, event: _CloseAllEvent) -> None:
    for rec in state.records.values():
        if rec.status is NoticeStatus.ACTIVE:
            rec.status = NoticeStatus.CLOSED
            rec.operator_closed = True


def _replay(events: Iterable[_Event]) -> _State:
    state = _State()
    for event in sorted(events, key=lambda e: (e.at, e.seq)):
        if isinstance(event, _UpsertEvent):
            _apply_upsert(state, event)
        elif isinstance(event, _FeedbackEvent):
            _apply_feedback(state, event)
        else:
            _apply_close_all(state, event)
    return state


_ORIGIN_BY_CHANNEL = {
    ChannelKind.GOV_SITE: Origin.WEBSITE,
    ChannelKind.EM_SITE: Origin.WEBSITE,
    ChannelKind.MICROBLOG: Origin.SOCIAL_MEDIA,
    ChannelKind.SOCIAL_PAGE: Origin.SOCIAL_MEDIA,
}


class NoticeStore:
    """Append-only event log plus a cached latest-state replay.

    Writes are serialized by a lock and trigger a full rebuild; reads at a
    historical timestamp replay the event prefix. O(n^2) over the archive
    lifetime, which is fine at county-notice scale.
    """

    def __init__(self) -> None:
        self._events: list[_Event] = []
        self._lock = threading.Lock()
        self._state = _State()

    # -- writes ----------------------------------------------------------

    def upsert(self, candidate: CandidateText, dist: LabelDistribution) -> NoticeRecord:
        """Classify-and-store one candidate; returns the created record.

        A NotNotice decision returns a Rejected record (dropped from the
        feed but kept for review). Effective time is the candidate's
        published_at when known, else fetched_at.
        """
        dist = dist.validate()
        at = candidate.published_at or candidate.fetched_at
        with self._lock:
            event = _UpsertEvent(
                seq=len(self._events) + 1,
                at=at,
                candidate=candidate,
                distribution=dist,
            )
            self._events.append(event)
            self._state = _replay(self._events)
            return self._state.records[f"n-{event.seq:06d}"].freeze()

    def record_feedback(self, entry: FeedbackEntry) -> NoticeRecord:
        with self._lock:
            rec = self._state.records.get(entry.notice_id)
            if rec is None:
                raise UnknownNotice(entry.notice_id)
            if entry.at < rec.observed_at:
                raise FeedbackBeforeNotice(
                    f"feedback at {format_rfc3339(entry.at)} predates notice "
                    f"{entry.notice_id} observed {format_rfc3339(rec.observed_at)}"
                )
            event = _FeedbackEvent(seq=len(self._events) + 1, at=entry.at, entry=entry)
            self._events.append(event)
            self._state = _replay(self._events)
            return self._state.records[entry.notice_id].freeze()

    def close_all(self, at: datetime) -> int:
        """Operator bulk-close of everything active at `at`; returns count."""
        with self._lock:
            before = sum(
                1
                for r in _replay(e for e in self._events if e.at <= at).records.values()
                if r.status is NoticeStatus.ACTIVE
            )
            self._events.append(_CloseAllEvent(seq=len(self._events) + 1, at=at))
            self._state = _replay(self._events)
            return before

    # -- reads -----------------------------------------------------------

    def _state_at(self, at: datetime | None) -> _State:
        with self._lock:
            if at is None:
                return self._state
            events = [e for e in self._events if e.at <= at]
        return _replay(events)

    def record(self, notice_id: str, at: datetime | None = None) -> NoticeRecord:
        rec = self._state_at(at).records.get(notice_id)
        if rec is None:
            raise UnknownNotice(notice_id)
        return rec.freeze()

    def records(self, at: datetime | None = None) -> list[NoticeRecord]:
        state = self._state_at(at)
        return [state.records[i].freeze() for i in sorted(state.records)]

    def active(self, at: datetime | None = None) -> list[NoticeRecord]:
        state = self._state_at(at)
        out = [r.freeze() for r in state.records.values() if r.status is NoticeStatus.ACTIVE]
        return sorted(out, key=lambda r: r.scope_key)

    def review_queue(self, limit: int | None = None) -> list[NoticeRecord]:
        """Unreviewed records, least confident first (ascending max component)."""
        state = self._state_at(None)
        pending = [r.freeze() for r in state.records.values() if not r.reviewed]
        pending.sort(key=lambda r: (r.distribution.max_component(), r.id))
        return pending[:limit] if limit is not None else pending

    def audit_log(self) -> tuple[FeedbackEntry, ...]:
        with self._lock:
            return tuple(self._state.audit)

    def dedup_keys(self) -> frozenset[str]:
        """Keys already archived; seeds the harvester after a restart."""
        with self._lock:
            return frozenset(
                e.candidate.dedup_key for e in self._events if isinstance(e, _UpsertEvent)
            )

    def export_labeled(self) -> list[LabeledExample]:
        """Reviewed records as training examples; Rejected exports NotNotice."""
        out = []
        for rec in self.records():
            if not rec.reviewed:
                continue
            gold = (
                NoticeLabel.NOT_NOTICE
                if rec.status is NoticeStatus.REJECTED
                else rec.label
            )
            out.append(
                LabeledExample(
                    text=rec.text,
                    gold=gold,
                    origin=_ORIGIN_BY_CHANNEL[rec.channel_kind],
                    year=rec.observed_at.year,
                    fips=rec.scope_key,
                )
            )
        return out

    def archive_stats(self, by: str) -> dict:
        """Counts of non-Rejected records keyed by year, state prefix, or label."""
        if by not in ("year", "state", "label"):
            raise ValueError(f"unsupported grouping {by!r}")
        counts: dict = {}
        for rec in self.records():
            if rec.status is NoticeStatus.REJECTED:
                continue
            if by == "year":
                key = rec.observed_at.year
            elif by == "state":
                key = rec.scope_key[:2]
            else:
                key = rec.label.value
            counts[key] = counts.get(key, 0) + 1
        return dict(sorted(counts.items(), key=lambda kv: str(kv[0])))

    def year_label_crosstab(self) -> dict[int, dict[str, int]]:
        """Per-year Mandatory/Voluntary counts (the by-year chart shape)."""
        table: dict[int, dict[str, int]] = {}
        for rec in self.records():
            if rec.status is NoticeStatus.REJECTED:
                continue
            row = table.setdefault(
                rec.observed_at.year,
                {NoticeLabel.MANDATORY.value: 0, NoticeLabel.VOLUNTARY.value: 0},
            )
            if rec.label.value in row:
                row[rec.label.value] += 1
        return dict(sorted(table.items()))

    # -- persistence -----------------------------------------------------

    def save(self, path) -> None:
        """Write the event log as one canonical JSON object per line."""
        with self._lock:
            events = list(self._events)
        with open(path, "w", encoding="utf-8") as fh:
            for event in events:
                fh.write(json.dumps(_event_to_json(event), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "NoticeStore":
        store = cls()
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    store._events.append(_event_from_json(json.loads(line)))
                except (KeyError, ValueError) as exc:
                    raise ValueError(f"{path}:{line_no}: bad event record: {exc}") from exc
        store._state = _replay(store._events)
        return store


class NoticeService:
    """Feed and lookup views over a store plus county geometry."""

    def __init__(self, store: NoticeStore, index) -> None:
        self.store = store
        self.index = index

    def geojson_feed(self, at: datetime | None = None) -> dict:
        """FeatureCollection of active records; one feature per record.

        Records whose scope has no geometry still ship, with null geometry,
        so the feed count always equals the active count.
        """
        import logging

        features = []
        for rec in self.store.active(at):
            geometry = self.index.scope_geometry(rec.scope_key)
            if geometry is None:
                logging.getLogger(__name__).warning(
                    "no geometry for scope %s (notice %s)", rec.scope_key, rec.id
                )
            features.append(
                {
                    "type": "Feature",
                    "geometry": geometry,
                    "properties": {
                        "id": rec.id,
                        "fips": rec.scope_key,
                        "label": rec.label.value,
                        "text": rec.text,
                        "source_url": rec.source_url,
                        "observed_at": format_rfc3339(rec.observed_at),
                        "reviewed": rec.reviewed,
                    },
                }
            )
        return {"type": "FeatureCollection", "features": features}

    def lookup_point(self, lon: float, lat: float, at: datetime | None = None) -> list[NoticeRecord]:
        """Active records whose scope contains the point (even-odd rule).

        State scopes (SS000) match when any member county in the boundary
        file contains the point.
        """
        from .geometry import point_in_rings

        hits = []
        for rec in self.store.active(at):
            scope = rec.scope_key
            if scope.endswith("000"):
                members = self.index.counties_in_state(scope[:2])
                if any(point_in_rings(lon, lat, s.rings) for s in members):
                    hits.append(rec)
            else:
                shape = self.index.get(scope)
                if shape is not None and point_in_rings(lon, lat, shape.rings):
                    hits.append(rec)
        return hits


def _event_to_json(event: _Event) -> dict:
    if isinstance(event, _UpsertEvent):
        c = event.candidate
        return {
            "seq": event.seq,
            "at": format_rfc3339(event.at),
            "type": "upsert",
            "candidate": {
                "fips": c.fips,
                "channel_kind": c.channel_kind.value,
                "fetched_at": format_rfc3339(c.fetched_at),
                "text": c.text,
                "source_url": c.source_url,
                "normalized_text": c.normalized_text,
                "dedup_key": c.dedup_key,
                "published_at": format_rfc3339(c.published_at) if c.published_at else None,
            },
            "distribution": event.distribution.as_list(),
        }
    if isinstance(event, _FeedbackEvent):
        e = event.entry
        return {
            "seq": event.seq,
            "at": format_rfc3339(event.at),
            "type": "feedback",
            "entry": {
                "notice_id": e.notice_id,
                "action": e.action.value,
                "corrected_label": e.corrected_label.value if e.corrected_label else None,
                "reviewer_id": e.reviewer_id,
            },
        }
    return {"seq": event.seq, "at": format_rfc3339(event.at), "type": "close_all"}


def _event_from_json(doc: dict) -> _Event:
    seq = int(doc["seq"])
    at = parse_rfc3339(doc["at"])
    kind = doc["type"]
    if kind == "upsert":
        c = doc["candidate"]
        candidate = CandidateText(
            fips=c["fips"],
            channel_kind=ChannelKind(c["channel_kind"]),
            fetched_at=parse_rfc3339(c["fetched_at"]),
            text=c["text"],
            source_url=c["source_url"],
            normalized_text=c["normalized_text"],
            dedup_key=c["dedup_key"],
            published_at=parse_rfc3339(c["published_at"]) if c.get("published_at") else None,
        )
        d = doc["distribution"]
        dist = LabelDistribution(d[0], d[1], d[2]).validate()
        return _UpsertEvent(seq=seq, at=at, candidate=candidate, distribution=dist)
    if kind == "feedback":
        e = doc["entry"]
        entry = FeedbackEntry(
            notice_id=e["notice_id"],
            action=FeedbackAction(e["action"]),
            reviewer_id=e["reviewer_id"],
            at=at,
            corrected_label=NoticeLabel(e["corrected_label"]) if e.get("corrected_label") else None,
        )
        return _FeedbackEvent(seq=seq, at=at, entry=entry)
    if kind == "close_all":
        return _CloseAllEvent(seq=seq, at=at)
    raise ValueError(f"unknown event type {kind!r}")
