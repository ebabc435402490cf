"""Live operation: poll an alert source and harvest targeted channels on a
timer, feeding classified candidates into the notice store.

Alert sources are either an HTTP endpoint returning JSON (an array of alert
documents, or an object with an "alerts" array) or a newline-delimited
document file for fixture runs.
"""

from __future__ import annotations

import json
import logging
import threading
from datetime import datetime

from .alerts import AlertError, AlertGateway
from .harvest import Fetcher, HarvestReport, PrefilterMode, harvest_cycle
from .notices import NoticeStore
from .registry import Registry, fetch_targets
from .timeutil import utcnow

log = logging.getLogger(__name__)


def read_alert_documents_file(path) -> list[dict]:
    """Fixture mode: one JSON alert document per line."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                docs.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: not JSON: {exc}") from exc
    return docs


def fetch_alert_documents(url: str, timeout: float = 30.0) -> list[dict]:
    import requests

    resp = requests.get(url, timeout=timeout)
    resp.raise_for_status()
    body = resp.json()
    if isinstance(body, dict):
        body = body.get("alerts", [])
    if not isinstance(body, list):
        raise ValueError(f"alert endpoint returned {type(body).__name__}, expected array")
    return body


class LivePipeline:
    """Wires gateway, registry, harvester, classifier, and store together.

    `tick` methods are synchronous and reusable from tests; `start` runs
    them on daemon timers until `stop`.
    """

    def __init__(
        self,
        gateway: AlertGateway,
        registry: Registry,
        store: NoticeStore,
        classifier,
        fetcher: Fetcher,
        mode: PrefilterMode = PrefilterMode.ANY,
        alert_endpoint: str | None = None,
        alert_file: str | None = None,
        parallelism: int = 8,
    ) -> None:
        self.gateway = gateway
        self.registry = registry
        self.store = store
        self.classifier = classifier
        self.fetcher = fetcher
        self.mode = mode
        self.alert_endpoint = alert_endpoint
        self.alert_file = alert_file
        self.parallelism = parallelism
        # Re-seeding from the store keeps restarts from re-emitting posts.
        self.seen: set[str] = set(store.dedup_keys())
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    def poll_alerts_once(self) -> int:
        """Ingest every document from the configured source; returns count."""
        if self.alert_endpoint:
            docs = fetch_alert_documents(self.alert_endpoint)
        elif self.alert_file:
            docs = read_alert_documents_file(self.alert_file)
        else:
            return 0
        ingested = 0
        for doc in docs:
            try:
                self.gateway.ingest(doc)
                ingested += 1
            except AlertError as exc:
                log.warning("skipping alert document: %s", exc)
        return ingested

    def harvest_once(self, now: datetime | None = None) -> HarvestReport:
        """One harvest cycle over currently targeted counties, classified
        and stored."""
        now = now or utcnow()
        targets = self.gateway.targets(now)
        zone_only = self.gateway.zone_only(now)
        if zone_only:
            log.info("%d relevant alerts carry no SAME codes (zone-only)", len(zone_only))
        statement_only = sorted(targets.statement_only)
        if statement_only:
            log.info("statement-only targeted counties: %s", ", ".join(statement_only))
        cycle_targets, missing = fetch_targets(self.registry, targets)
        for fips in missing:
            log.warning("targeted county %s not in registry", fips)
        report = harvest_cycle(
            cycle_targets,
            self.fetcher,
            self.seen,
            mode=self.mode,
            now=now,
            parallelism=self.parallelism,
        )
        for failure in report.failures:
            log.warning(
                "fetch failed for %s/%s: %s",
                failure.target.fips,
                failure.target.channel_kind.value,
                failure.error,
            )
        if report.candidates:
            distributions = self.classifier.classify(
                [c.normalized_text for c in report.candidates]
            )
            for candidate, dist in zip(report.candidates, distributions):
                record = self.store.upsert(candidate, dist)
                log.info(
                    "stored %s (%s, %s) from %s",
                    record.id,
                    record.label.value,
                    record.status.value,
                    candidate.source_url,
                )
        return report

    def _loop(self, interval_secs: float, tick) -> None:
        while not self._stop.wait(interval_secs):
            try:
                tick()
            except Exception:
                log.exception("pipeline tick failed; continuing")

    def start(self, alert_poll_secs: float = 60.0, harvest_interval_secs: float = 120.0) -> None:
        self._stop.clear()
        self._threads = [
            threading.Thread(
                target=self._loop, args=(alert_poll_secs, self.poll_alerts_once), daemon=True
            ),
            threading.Thread(
                target=self._loop, args=(harvest_interval_secs, self.harvest_once), daemon=True
            ),
        ]
        for thread in self._threads:
            thread.start()

    def stop(self) -> None:
        self._stop.set()
        for thread in self._threads:
            thread.join(timeout=5)
        self._threads = []
