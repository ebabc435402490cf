from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import alert_doc, utc
from evacnet.alerts import (
    AlertGateway,
    BadLength,
    BadPrefix,
    EventType,
    MalformedDocument,
    MissingGeocode,
    NonDigit,
    compute_targets,
    ingest_alert_document,
    same_to_fips,
    zone_only_alerts,
)


def test_same_to_fips_strips_leading_zero():
    assert same_to_fips("012086") == "12086"


def test_same_to_fips_bad_length():
    with pytest.raises(BadLength):
        same_to_fips("12086")


def test_same_to_fips_non_digit():
    with pytest.raises(NonDigit):
        same_to_fips("0A2086")


def test_same_to_fips_bad_prefix():
    with pytest.raises(BadPrefix):
        same_to_fips("112086")


@given(st.from_regex(r"[0-9]{2}[0-9]{3}", fullmatch=True))
def test_same_to_fips_inverts_zero_prepend(fips):
    assert same_to_fips("0" + fips) == fips


def test_ingest_maps_relevant_event():
    alert = ingest_alert_document(alert_doc(event="Hurricane Warning"))
    assert alert.event_type is EventType.HURRICANE_WARNING
    assert alert.same_codes == ("012086",)


def test_ingest_event_name_case_insensitive():
    alert = ingest_alert_document(alert_doc(event="hurricane warning"))
    assert alert.event_type is EventType.HURRICANE_WARNING


def test_ingest_unknown_event_maps_to_other():
    alert = ingest_alert_document(alert_doc(event="Flood Warning"))
    assert alert.event_type is EventType.OTHER


def test_ingest_missing_geocode():
    doc = alert_doc()
    del doc["geocode"]
    with pytest.raises(MissingGeocode):
        ingest_alert_document(doc)


def test_ingest_missing_required_field():
    doc = alert_doc()
    del doc["expires"]
    with pytest.raises(MalformedDocument):
        ingest_alert_document(doc)


def test_ingest_rejects_expiry_before_effective():
    doc = alert_doc(effective="2019-09-05T00:00:00Z", expires="2019-08-29T12:00:00Z")
    with pytest.raises(MalformedDocument):
        ingest_alert_document(doc)


def test_compute_targets_only_relevant_events():
    relevant = ingest_alert_document(alert_doc(doc_id="a", event="Hurricane Warning"))
    other = ingest_alert_document(
        alert_doc(doc_id="b", event="Flood Warning", same=("012011",))
    )
    targets = compute_targets([relevant, other], now=utc(2019, 8, 30))
    assert targets.counties == frozenset({"12086"})
    assert targets.contributing_alert_ids == frozenset({"a"})


def test_compute_targets_prunes_expired():
    alert = ingest_alert_document(alert_doc(expires="2019-09-05T00:00:00Z"))
    live = compute_targets([alert], now=utc(2019, 9, 4))
    gone = compute_targets([alert], now=utc(2019, 9, 5))
    assert live.counties == frozenset({"12086"})
    assert gone.counties == frozenset()


def test_compute_targets_empty_input():
    targets = compute_targets([], now=utc(2019, 8, 30))
    assert targets.counties == frozenset()
    assert targets.contributing_alert_ids == frozenset()


def test_compute_targets_merges_contributors():
    a = ingest_alert_document(alert_doc(doc_id="a"))
    b = ingest_alert_document(alert_doc(doc_id="b", event="Hurricane Watch"))
    targets = compute_targets([a, b], now=utc(2019, 8, 30))
    assert targets.counties == frozenset({"12086"})
    assert targets.contributing_alert_ids == frozenset({"a", "b"})


def test_compute_targets_order_independent():
    docs = [
        alert_doc(doc_id="a", same=("012086", "012011")),
        alert_doc(doc_id="b", event="Tropical Storm Watch", same=("022057",)),
        alert_doc(doc_id="c", event="Flood Warning", same=("048167",)),
    ]
    alerts = [ingest_alert_document(d) for d in docs]
    now = utc(2019, 8, 30)
    forward = compute_targets(alerts, now)
    backward = compute_targets(list(reversed(alerts)), now)
    assert forward.counties == backward.counties == frozenset({"12086", "12011", "22057"})


def test_statement_only_counties_flagged():
    statement = ingest_alert_document(
        alert_doc(doc_id="s", event="Tropical Cyclone Statement", same=("012011",))
    )
    warning = ingest_alert_document(alert_doc(doc_id="w", same=("012086",)))
    targets = compute_targets([statement, warning], now=utc(2019, 8, 30))
    assert targets.counties == frozenset({"12086", "12011"})
    assert targets.statement_only == frozenset({"12011"})


def test_zone_only_alerts_reported():
    doc = alert_doc(doc_id="z")
    doc["geocode"] = {"SAME": [], "UGC": ["FLZ074"]}
    alert = ingest_alert_document(doc)
    assert zone_only_alerts([alert], now=utc(2019, 8, 30)) == ["z"]
    assert compute_targets([alert], now=utc(2019, 8, 30)).counties == frozenset()


def test_gateway_last_write_wins_per_alert_id():
    gateway = AlertGateway()
    gateway.ingest(alert_doc(doc_id="a", same=("012086",)))
    gateway.ingest(alert_doc(doc_id="a", same=("012011",)))
    targets = gateway.targets(utc(2019, 8, 30))
    assert targets.counties == frozenset({"12011"})


def test_gateway_snapshot_is_stable_copy():
    gateway = AlertGateway()
    gateway.ingest(alert_doc(doc_id="a"))
    snap = gateway.snapshot()
    gateway.ingest(alert_doc(doc_id="b"))
    assert len(snap) == 1
