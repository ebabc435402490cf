"""Harvesting: fetch posts from county channels, prefilter, normalize, dedup.

The fetcher is injected so tests and replays can feed scripted posts through
the exact pipeline used in live runs. Only exact post-normalization
duplicates collapse; reworded variants of one notice are intentionally kept
as distinct candidates.
"""

from __future__ import annotations

import hashlib
import re
import threading
import time
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from html.parser import HTMLParser
from typing import Callable, Iterable, MutableSet, Protocol
from urllib.parse import urlsplit

from .registry import ChannelKind, FetchTarget
from .timeutil import utcnow


class PrefilterMode(str, Enum):
    ANY = "any"
    ALL = "all"


_TOKEN_RE = re.compile(r"[a-z]+")
_EVACUEE_TERMS = frozenset({"evacuee", "evacuees"})


def keyword_prefilter(text: str, mode: PrefilterMode = PrefilterMode.ANY) -> bool:
    """Keep texts mentioning the hurricane/evacuation term families.

    ANY passes when either family matches; ALL requires "hurricane" plus an
    evacuat*/evacuee term. ANY is the default: genuine notices often omit
    the word "hurricane" entirely.
    """
    tokens = _TOKEN_RE.findall(text.lower())
    hurricane_hit = "hurricane" in tokens
    evac_hit = any(t.startswith("evacuat") or t in _EVACUEE_TERMS for t in tokens)
    if mode is PrefilterMode.ALL:
        return hurricane_hit and evac_hit
    return hurricane_hit or evac_hit


_WS_RUN_RE = re.compile(r"\s+")


def normalize(text: str) -> str:
    """Canonical-compose, collapse whitespace runs, trim ends.

    No other characters are altered; platform artifacts such as truncation
    markers stay verbatim so downstream dedup sees what was actually posted.
    """
    composed = unicodedata.normalize("NFC", text)
    return _WS_RUN_RE.sub(" ", composed).strip()


def dedup_key(normalized_text: str, fips: str) -> str:
    """Stable duplicate key over (normalized text, county)."""
    digest = hashlib.sha256()
    digest.update(fips.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(normalized_text.encode("utf-8"))
    return digest.hexdigest()[:32]


@dataclass(frozen=True)
class FetchedPost:
    text: str
    source_url: str
    published_at: datetime | None = None


@dataclass(frozen=True)
class RawPost:
    fips: str
    channel_kind: ChannelKind
    fetched_at: datetime
    text: str
    source_url: str
    published_at: datetime | None = None


@dataclass(frozen=True)
class CandidateText:
    fips: str
    channel_kind: ChannelKind
    fetched_at: datetime
    text: str
    source_url: str
    normalized_text: str
    dedup_key: str
    published_at: datetime | None = None


class Fetcher(Protocol):
    def fetch(self, target: FetchTarget) -> list[FetchedPost]: ...


@dataclass(frozen=True)
class FetchFailure:
    target: FetchTarget
    error: str


@dataclass
class HarvestReport:
    candidates: list[CandidateText] = field(default_factory=list)
    failures: list[FetchFailure] = field(default_factory=list)


_CHANNEL_ORDER = {kind: i for i, kind in enumerate(ChannelKind)}

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def _post_sort_key(post: FetchedPost) -> tuple:
    return (post.published_at or _EPOCH, post.text, post.source_url)


def harvest_cycle(
    targets: Iterable[FetchTarget],
    fetcher: Fetcher,
    seen: MutableSet[str],
    mode: PrefilterMode = PrefilterMode.ANY,
    now: datetime | None = None,
    parallelism: int = 8,
) -> HarvestReport:
    """Fetch all targets, returning new evacuation-relevant candidates.

    Per-target fetch failures are isolated into the report and never abort
    the cycle. Output order is deterministic: sorted by target, then
    published_at. `seen` is updated under a lock and never re-emits a key.
    """
    now = now or utcnow()
    ordered = sorted(
        targets, key=lambda t: (t.fips, _CHANNEL_ORDER[t.channel_kind], t.locator)
    )
    report = HarvestReport()
    fetched: dict[int, list[FetchedPost]] = {}

    def run_one(index: int, target: FetchTarget) -> None:
        try:
            fetched[index] = list(fetcher.fetch(target))
        except Exception as exc:  # fetchers may fail arbitrarily
            report.failures.append(FetchFailure(target=target, error=str(exc)))

    if parallelism > 1 and len(ordered) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(run_one, i, t) for i, t in enumerate(ordered)]
            for future in futures:
                future.result()
    else:
        for i, t in enumerate(ordered):
            run_one(i, t)

    lock = threading.Lock()
    for i, target in enumerate(ordered):
        for post in sorted(fetched.get(i, []), key=_post_sort_key):
            if not post.text:
                continue
            norm = normalize(post.text)
            if not norm or not keyword_prefilter(norm, mode):
                continue
            key = dedup_key(norm, target.fips)
            with lock:
                if key in seen:
                    continue
                seen.add(key)
            report.candidates.append(
                CandidateText(
                    fips=target.fips,
                    channel_kind=target.channel_kind,
                    fetched_at=now,
                    published_at=post.published_at,
                    text=post.text,
                    source_url=post.source_url,
                    normalized_text=norm,
                    dedup_key=key,
                )
            )
    return report


class ScriptedFetcher:
    """Fixture fetcher: serves queued posts per (fips, channel) and can be
    scripted to fail for specific targets."""

    def __init__(self) -> None:
        self._posts: dict[tuple[str, ChannelKind], list[FetchedPost]] = {}
        self._failures: dict[tuple[str, ChannelKind], str] = {}

    def add_post(
        self,
        fips: str,
        channel_kind: ChannelKind,
        text: str,
        source_url: str,
        published_at: datetime | None = None,
    ) -> None:
        key = (fips, channel_kind)
        self._posts.setdefault(key, []).append(
            FetchedPost(text=text, source_url=source_url, published_at=published_at)
        )

    def fail_target(self, fips: str, channel_kind: ChannelKind, error: str) -> None:
        self._failures[(fips, channel_kind)] = error

    def fetch(self, target: FetchTarget) -> list[FetchedPost]:
        key = (target.fips, target.channel_kind)
        if key in self._failures:
            raise RuntimeError(self._failures[key])
        return list(self._posts.get(key, []))


class _TextBlockParser(HTMLParser):
    """Collects visible text blocks, splitting on block-level elements."""

    _BLOCK_TAGS = {
        "p", "div", "li", "br", "tr", "td", "section", "article",
        "h1", "h2", "h3", "h4", "h5", "h6", "blockquote",
    }
    _SKIP_TAGS = {"script", "style", "noscript", "head"}

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.blocks: list[str] = []
        self._current: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP_TAGS:
            self._skip_depth += 1
        elif tag in self._BLOCK_TAGS:
            self._flush()

    def handle_endtag(self, tag):
        if tag in self._SKIP_TAGS and self._skip_depth:
            self._skip_depth -= 1
        elif tag in self._BLOCK_TAGS:
            self._flush()

    def handle_data(self, data):
        if not self._skip_depth and data.strip():
            self._current.append(data)

    def _flush(self) -> None:
        if self._current:
            block = " ".join(self._current).strip()
            if block:
                self.blocks.append(block)
            self._current = []

    def close(self):
        super().close()
        self._flush()


def extract_text_blocks(html: str) -> list[str]:
    parser = _TextBlockParser()
    parser.feed(html)
    parser.close()
    return parser.blocks


class HttpFetcher:
    """Generic page fetcher: GETs a URL and extracts visible text blocks.

    Handles website channels only; handle-style locators (microblogs, social
    pages) need platform APIs and are left to scripted or user-supplied
    fetchers. Applies a per-host politeness delay.
    """

    def __init__(
        self,
        timeout: float = 10.0,
        politeness_delay: float = 1.0,
        get: Callable[[str, float], str] | None = None,
    ) -> None:
        self._timeout = timeout
        self._delay = politeness_delay
        self._last_hit: dict[str, float] = {}
        self._lock = threading.Lock()
        self._get = get or self._default_get

    @staticmethod
    def _default_get(url: str, timeout: float) -> str:
        import requests

        resp = requests.get(url, timeout=timeout)
        resp.raise_for_status()
        return resp.text

    def _be_polite(self, host: str) -> None:
        while True:
            with self._lock:
                last = self._last_hit.get(host, 0.0)
                wait = self._delay - (time.monotonic() - last)
                if wait <= 0:
                    self._last_hit[host] = time.monotonic()
                    return
            time.sleep(wait)

    def fetch(self, target: FetchTarget) -> list[FetchedPost]:
        url = target.locator
        parts = urlsplit(url)
        if parts.scheme not in ("http", "https"):
            raise RuntimeError(f"unsupported locator {url!r}: not a fetchable URL")
        self._be_polite(parts.netloc)
        body = self._get(url, self._timeout)
        return [FetchedPost(text=block, source_url=url) for block in extract_text_blocks(body)]
