from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import pytest

from evacnet.classify import LabelDistribution
from evacnet.geometry import CountyIndex, load_county_shapes
from evacnet.harvest import CandidateText, dedup_key, normalize
from evacnet.registry import ChannelKind, Registry, load_registry

DATA_DIR = Path(__file__).parent / "data"

# Release-gate reporting: tests marked @pytest.mark.acceptance("label") get
# one PASS/FAIL line each in the terminal summary.
_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker:
        _ACCEPTANCE_RESULTS.append((marker.args[0], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in _ACCEPTANCE_RESULTS:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {label}")


def utc(year, month, day, hour=0, minute=0, second=0):
    return datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc)


@pytest.fixture(scope="session")
def samples() -> list[dict]:
    with open(DATA_DIR / "notice_samples.json", encoding="utf-8") as fh:
        return json.load(fh)["samples"]


@pytest.fixture(scope="session")
def registry() -> Registry:
    return load_registry(DATA_DIR / "registry_fixture.csv")


@pytest.fixture(scope="session")
def county_index() -> CountyIndex:
    return CountyIndex(load_county_shapes(DATA_DIR / "counties_fixture.geojson"))


def alert_doc(
    doc_id="A1",
    event="Hurricane Warning",
    same=("012086",),
    sent="2019-08-29T11:55:00Z",
    effective="2019-08-29T12:00:00Z",
    expires="2019-09-05T00:00:00Z",
    sender="NWS",
):
    return {
        "id": doc_id,
        "event": event,
        "sent": sent,
        "effective": effective,
        "expires": expires,
        "sender": sender,
        "geocode": {"SAME": list(same)},
    }


def make_candidate(
    text: str,
    fips: str = "12086",
    channel: ChannelKind = ChannelKind.GOV_SITE,
    fetched_at: datetime | None = None,
    published_at: datetime | None = None,
    source_url: str = "https://example.gov/post",
) -> CandidateText:
    fetched_at = fetched_at or utc(2019, 8, 30, 9)
    norm = normalize(text)
    return CandidateText(
        fips=fips,
        channel_kind=channel,
        fetched_at=fetched_at,
        text=text,
        source_url=source_url,
        normalized_text=norm,
        dedup_key=dedup_key(norm, fips),
        published_at=published_at,
    )


def dist(p_m: float, p_v: float, p_n: float) -> LabelDistribution:
    return LabelDistribution(p_m, p_v, p_n).validate()
