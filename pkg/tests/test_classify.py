from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from evacnet.classify import (
    BinaryLabel,
    CueConfig,
    InvalidDistribution,
    LabelDistribution,
    LexicalClassifier,
    NoticeLabel,
    ProtocolError,
    RemoteClassifier,
    RemoteRef,
    RetryableTransport,
    collapse_label,
    decide,
    decide_binary,
    lexical_classify,
    remote_classify,
    split_sentences,
    to_binary,
)
from evacnet.harvest import normalize
from stubserver import StubModelServer

# -- distributions and decisions -------------------------------------------


def test_distribution_accepts_normalized():
    LabelDistribution(0.7, 0.2, 0.1).validate()


def test_distribution_rejects_negative():
    with pytest.raises(InvalidDistribution):
        LabelDistribution(-0.1, 0.6, 0.5).validate()


def test_distribution_rejects_bad_sum():
    with pytest.raises(InvalidDistribution):
        LabelDistribution(0.5, 0.4, 0.2).validate()


def test_distribution_sum_tolerance():
    LabelDistribution(0.5, 0.3, 0.2 + 5e-7).validate()


def test_decide_argmax():
    assert decide(LabelDistribution(0.1, 0.2, 0.7)) is NoticeLabel.NOT_NOTICE


def test_decide_tie_prefers_mandatory():
    assert decide(LabelDistribution(0.4, 0.4, 0.2)) is NoticeLabel.MANDATORY
    assert decide(LabelDistribution(0.5, 0.5, 0.0)) is NoticeLabel.MANDATORY


def test_decide_tie_prefers_voluntary_over_not():
    assert decide(LabelDistribution(0.0, 0.5, 0.5)) is NoticeLabel.VOLUNTARY


def test_to_binary_adds_notice_mass():
    binary = to_binary(LabelDistribution(0.3, 0.3, 0.4))
    assert binary.p_notice == pytest.approx(0.6)
    assert binary.p_not == pytest.approx(0.4)


def test_decide_binary_tie_prefers_notice():
    dist = to_binary(LabelDistribution(0.3, 0.2, 0.5))
    assert decide_binary(dist) is BinaryLabel.NOTICE


def test_collapse_label():
    assert collapse_label(NoticeLabel.MANDATORY) is BinaryLabel.NOTICE
    assert collapse_label(NoticeLabel.VOLUNTARY) is BinaryLabel.NOTICE
    assert collapse_label(NoticeLabel.NOT_NOTICE) is BinaryLabel.NOT_NOTICE


@given(
    st.tuples(
        st.floats(0, 1, allow_nan=False),
        st.floats(0, 1, allow_nan=False),
        st.floats(0, 1, allow_nan=False),
    ).filter(lambda t: sum(t) > 0)
)
def test_binary_collapse_agrees_when_notice_dominates(raw):
    total = sum(raw)
    dist = LabelDistribution(raw[0] / total, raw[1] / total, raw[2] / total)
    three_way = decide(dist)
    binary = decide_binary(to_binary(dist))
    if max(dist.p_mandatory, dist.p_voluntary) >= dist.p_not:
        assert collapse_label(three_way) is binary


# -- lexical baseline -------------------------------------------------------


def test_sentence_split():
    assert split_sentences("Go now. Stay safe! Why?\nDone") == [
        "Go now",
        " Stay safe",
        " Why",
        "Done",
    ]


def test_lexical_no_cues_is_not_notice():
    dist = lexical_classify("sandbags available at public works")
    assert dist.as_list() == [0.0, 0.0, 1.0]


def test_lexical_damper_zeroes_sentence():
    dist = lexical_classify("a mandatory evacuation order will be issued tomorrow")
    assert dist.as_list() == [0.0, 0.0, 1.0]


def test_lexical_damper_scoped_to_sentence():
    text = "the watch was lifted. a mandatory evacuation is in effect"
    dist = lexical_classify(text)
    assert decide(dist) is NoticeLabel.MANDATORY


def test_lexical_mixed_cues_resolve_mandatory():
    dist = lexical_classify("the voluntary evacuation is now a mandatory evacuation")
    assert decide(dist) is NoticeLabel.MANDATORY
    assert dist.p_mandatory == pytest.approx(2 / 3)


def test_lexical_counts_repeated_cues():
    dist = lexical_classify("mandatory evacuation for zone a. mandatory evacuation for zone b")
    assert dist.as_list() == [1.0, 0.0, 0.0]


def test_lexical_custom_cues():
    cues = CueConfig(mandatory_cues=("leave immediately",), voluntary_cues=(), dampers=())
    dist = lexical_classify("please leave immediately", cues)
    assert dist.as_list() == [1.0, 0.0, 0.0]


def test_lexical_pure_function(samples):
    text = normalize(samples[0]["text"])
    first = lexical_classify(text)
    second = lexical_classify(text)
    assert first.as_list() == second.as_list()


def test_golden_six_case_suite(samples):
    """The fixed six-sample corpus: 4 detected, the 2 known hard cases missed."""
    decisions = {}
    for sample in samples:
        dist = lexical_classify(normalize(sample["text"]))
        decisions[sample["id"]] = decide(dist).value
    assert decisions == {
        75: "Mandatory",
        528: "Mandatory",
        175: "Mandatory",
        1214: "Mandatory",
        725: "NotNotice",
        1283: "Voluntary",
    }


def test_golden_case_75_exact_distribution(samples):
    case_75 = next(s for s in samples if s["id"] == 75)
    dist = lexical_classify(normalize(case_75["text"]))
    assert dist.as_list() == [1.0, 0.0, 0.0]


def test_golden_case_1283_voluntary_distribution(samples):
    # Both mandatory cues sit in a "will be issued" sentence; only the
    # voluntary cue survives.
    case = next(s for s in samples if s["id"] == 1283)
    dist = lexical_classify(normalize(case["text"]))
    assert dist.as_list() == [0.0, 1.0, 0.0]


def test_lexical_classifier_batches(samples):
    texts = [normalize(s["text"]) for s in samples]
    out = LexicalClassifier().classify(texts)
    assert len(out) == len(texts)
    assert out[0].as_list() == lexical_classify(texts[0]).as_list()


# -- remote protocol --------------------------------------------------------


def ref(server: StubModelServer) -> RemoteRef:
    return RemoteRef(endpoint=server.base_url, model_id="m1")


def test_remote_classify_happy_path():
    with StubModelServer() as server:
        server.script(
            "/classify", (200, {"model_id": "m1", "distributions": [[0.9, 0.05, 0.05]]})
        )
        out = remote_classify(["text"], ref(server))
        assert len(out) == 1
        assert out[0].p_mandatory == pytest.approx(0.9)
        assert server.requests[0][1] == {"model_id": "m1", "texts": ["text"]}


def test_remote_classify_order_preserved():
    rows = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    with StubModelServer() as server:
        server.script("/classify", (200, {"model_id": "m1", "distributions": rows}))
        out = remote_classify(["a", "b", "c"], ref(server))
        assert [d.as_list() for d in out] == rows


def test_remote_wrong_arity_is_protocol_error():
    with StubModelServer() as server:
        server.script("/classify", (200, {"model_id": "m1", "distributions": [[0.5, 0.5]]}))
        with pytest.raises(ProtocolError):
            remote_classify(["text"], ref(server))


def test_remote_wrong_count_is_protocol_error():
    with StubModelServer() as server:
        server.script(
            "/classify",
            (200, {"model_id": "m1", "distributions": [[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]}),
        )
        with pytest.raises(ProtocolError):
            remote_classify(["text"], ref(server))


def test_remote_non_normalized_is_protocol_error():
    with StubModelServer() as server:
        server.script("/classify", (200, {"model_id": "m1", "distributions": [[0.5, 0.4, 0.2]]}))
        with pytest.raises(ProtocolError):
            remote_classify(["text"], ref(server))


def test_remote_negative_component_is_protocol_error():
    with StubModelServer() as server:
        server.script("/classify", (200, {"model_id": "m1", "distributions": [[1.2, -0.1, -0.1]]}))
        with pytest.raises(ProtocolError):
            remote_classify(["text"], ref(server))


def test_remote_5xx_retries_then_raises():
    with StubModelServer() as server:
        server.script("/classify", (500, {"error": "boom"}))
        with pytest.raises(RetryableTransport):
            remote_classify(["text"], ref(server), attempts=2, backoff=0.01)
        assert len(server.requests) == 2


def test_remote_retry_then_success():
    with StubModelServer() as server:
        server.script(
            "/classify",
            (503, {"error": "warming up"}),
            (200, {"model_id": "m1", "distributions": [[0.0, 0.0, 1.0]]}),
        )
        out = remote_classify(["text"], ref(server), attempts=3, backoff=0.01)
        assert out[0].p_not == 1.0
        assert len(server.requests) == 2


def test_remote_timeout_is_retryable():
    with StubModelServer() as server:
        server.script("/classify", (200, {"model_id": "m1", "distributions": [[1.0, 0.0, 0.0]]}))
        server.delay = 0.5
        with pytest.raises(RetryableTransport):
            remote_classify(["text"], ref(server), timeout=0.05, attempts=2, backoff=0.01)


def test_remote_truncates_overlong_text():
    with StubModelServer() as server:
        server.script("/classify", (200, {"model_id": "m1", "distributions": [[0.0, 0.0, 1.0]]}))
        remote_classify(["x" * 25_000], ref(server))
        sent = server.requests[0][1]["texts"][0]
        assert len(sent) == 20_000


def test_remote_binary_arity():
    with StubModelServer() as server:
        server.script("/classify", (200, {"model_id": "m1", "distributions": [[0.8, 0.2]]}))
        out = remote_classify(["text"], ref(server), arity=2)
        assert out[0].p_notice == pytest.approx(0.8)


def test_remote_binary_wrong_arity_rejected():
    with StubModelServer() as server:
        server.script("/classify", (200, {"model_id": "m1", "distributions": [[0.8, 0.1, 0.1]]}))
        with pytest.raises(ProtocolError):
            remote_classify(["text"], ref(server), arity=2)


def test_remote_classifier_wrapper():
    with StubModelServer() as server:
        server.script("/classify", (200, {"model_id": "m1", "distributions": [[0.0, 1.0, 0.0]]}))
        clf = RemoteClassifier(server.base_url, "m1")
        out = clf.classify(["text"])
        assert decide(out[0]) is NoticeLabel.VOLUNTARY
