"""Label taxonomy, lexical baseline classifier, and remote backend client.

Three classes: Mandatory, Voluntary, NotNotice. The lexical baseline is a
deterministic cue counter standing in for a trained encoder; remote backends
speak a small JSON-over-HTTP protocol and are validated strictly, never
trusted.
"""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

log = logging.getLogger(__name__)


class NoticeLabel(str, Enum):
    MANDATORY = "Mandatory"
    VOLUNTARY = "Voluntary"
    NOT_NOTICE = "NotNotice"


class BinaryLabel(str, Enum):
    NOTICE = "Notice"
    NOT_NOTICE = "NotNotice"


class InvalidDistribution(ValueError):
    pass


DISTRIBUTION_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class LabelDistribution:
    p_mandatory: float
    p_voluntary: float
    p_not: float

    def validate(self) -> "LabelDistribution":
        values = (self.p_mandatory, self.p_voluntary, self.p_not)
        if any(v < 0 for v in values):
            raise InvalidDistribution(f"negative probability in {values}")
        total = sum(values)
        if abs(total - 1.0) > DISTRIBUTION_SUM_TOLERANCE:
            raise InvalidDistribution(f"probabilities sum to {total}, not 1")
        return self

    def as_list(self) -> list[float]:
        return [self.p_mandatory, self.p_voluntary, self.p_not]

    def max_component(self) -> float:
        return max(self.p_mandatory, self.p_voluntary, self.p_not)


@dataclass(frozen=True)
class BinaryDistribution:
    p_notice: float
    p_not: float

    def as_list(self) -> list[float]:
        return [self.p_notice, self.p_not]


def decide(dist: LabelDistribution) -> NoticeLabel:
    """Argmax with recall-favoring tie-break: Mandatory > Voluntary > NotNotice."""
    best = max(dist.p_mandatory, dist.p_voluntary, dist.p_not)
    if dist.p_mandatory == best:
        return NoticeLabel.MANDATORY
    if dist.p_voluntary == best:
        return NoticeLabel.VOLUNTARY
    return NoticeLabel.NOT_NOTICE


def to_binary(dist: LabelDistribution) -> BinaryDistribution:
    """Collapse to notice-vs-not: p_notice = p_mandatory + p_voluntary."""
    return BinaryDistribution(p_notice=dist.p_mandatory + dist.p_voluntary, p_not=dist.p_not)


def decide_binary(dist: BinaryDistribution) -> BinaryLabel:
    """Argmax; ties prefer Notice."""
    return BinaryLabel.NOTICE if dist.p_notice >= dist.p_not else BinaryLabel.NOT_NOTICE


def collapse_label(label: NoticeLabel) -> BinaryLabel:
    return BinaryLabel.NOT_NOTICE if label is NoticeLabel.NOT_NOTICE else BinaryLabel.NOTICE


# Cue phrases for the lexical baseline. Configuration-overridable, but these
# exact lists keep the golden corpus stable.
MANDATORY_CUES = (
    "mandatory evacuation",
    "evacuation order",
    "ordered to evacuate",
    "must evacuate",
)
VOLUNTARY_CUES = (
    "voluntary evacuation",
    "voluntarily evacuate",
    "encouraged to evacuate",
    "advised to evacuate",
    "evacuation recommended",
)
# A cue sentence containing any of these contributes nothing: the notice is
# future ("will be issued") or withdrawn ("lifted", "rescinded").
DAMPER_PHRASES = (
    "will be issued",
    "may be issued",
    "lifted",
    "rescinded",
)


@dataclass(frozen=True)
class CueConfig:
    mandatory_cues: tuple[str, ...] = MANDATORY_CUES
    voluntary_cues: tuple[str, ...] = VOLUNTARY_CUES
    dampers: tuple[str, ...] = DAMPER_PHRASES


DEFAULT_CUES = CueConfig()

_SENTENCE_SPLIT_RE = re.compile(r"[.!?\n]")


def split_sentences(text: str) -> list[str]:
    """Maximal substrings between '.', '!', '?', and newline."""
    return [part for part in _SENTENCE_SPLIT_RE.split(text) if part]


def lexical_classify(normalized_text: str, cues: CueConfig = DEFAULT_CUES) -> LabelDistribution:
    """Deterministic cue-count distribution over the three classes.

    Counts mandatory/voluntary cue occurrences per sentence, discounting any
    sentence that also carries a damper phrase. Scores (2m, v, [no cues])
    are normalized into a pseudo-probability vector; the doubled mandatory
    weight makes mixed upgrade announcements resolve to Mandatory.
    """
    m_count = 0
    v_count = 0
    for sentence in split_sentences(normalized_text.lower()):
        if any(d in sentence for d in cues.dampers):
            continue
        m_count += sum(sentence.count(cue) for cue in cues.mandatory_cues)
        v_count += sum(sentence.count(cue) for cue in cues.voluntary_cues)

    scores = (2.0 * m_count, float(v_count), 1.0 if m_count + v_count == 0 else 0.0)
    total = sum(scores)
    return LabelDistribution(
        p_mandatory=scores[0] / total,
        p_voluntary=scores[1] / total,
        p_not=scores[2] / total,
    )


class LexicalClassifier:
    """Batch wrapper around lexical_classify."""

    def __init__(self, cues: CueConfig = DEFAULT_CUES) -> None:
        self._cues = cues

    def classify(self, texts: Sequence[str]) -> list[LabelDistribution]:
        return [lexical_classify(t, self._cues) for t in texts]


class RetryableTransport(RuntimeError):
    """Timeout / 5xx / connection failure: retried with backoff, then raised."""


class ProtocolError(RuntimeError):
    """The remote answered, but with something we must not accept."""


# Texts longer than this are truncated client-side before dispatch; token
# truncation proper is the server's duty.
MAX_REMOTE_CHARS = 20_000


@dataclass(frozen=True)
class RemoteRef:
    endpoint: str
    model_id: str


def _validate_rows(rows, count: int, arity: int) -> list[list[float]]:
    if not isinstance(rows, list) or len(rows) != count:
        raise ProtocolError(
            f"expected {count} distributions, got "
            f"{len(rows) if isinstance(rows, list) else type(rows).__name__}"
        )
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != arity:
            raise ProtocolError(f"distribution {i} has wrong arity: {row!r}")
        try:
            values = [float(v) for v in row]
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"distribution {i} is not numeric: {row!r}") from exc
        out.append(values)
    return out


def remote_classify(
    texts: Sequence[str],
    ref: RemoteRef,
    arity: int = 3,
    timeout: float = 30.0,
    attempts: int = 3,
    backoff: float = 0.5,
    session=None,
) -> list[LabelDistribution] | list[BinaryDistribution]:
    """POST texts to a remote classifier and validate its distributions.

    Transport-level failures (timeouts, 5xx, non-200) are retried
    `attempts` times with exponential backoff before RetryableTransport is
    raised; malformed responses raise ProtocolError immediately and are
    never silently accepted.
    """
    import requests

    if session is None:
        session = requests

    payload_texts = []
    for t in texts:
        if len(t) > MAX_REMOTE_CHARS:
            log.warning("truncating %d-char text before remote dispatch", len(t))
            t = t[:MAX_REMOTE_CHARS]
        payload_texts.append(t)

    url = ref.endpoint.rstrip("/") + "/classify"
    body = {"model_id": ref.model_id, "texts": payload_texts}

    last_error: Exception | None = None
    for attempt in range(attempts):
        try:
            resp = session.post(url, json=body, timeout=timeout)
        except requests.RequestException as exc:
            last_error = exc
        else:
            if resp.status_code == 200:
                try:
                    data = resp.json()
                except ValueError as exc:
                    raise ProtocolError(f"non-JSON response: {exc}") from exc
                rows = _validate_rows(data.get("distributions"), len(payload_texts), arity)
                if arity == 3:
                    out3 = []
                    for r in rows:
                        try:
                            out3.append(LabelDistribution(r[0], r[1], r[2]).validate())
                        except InvalidDistribution as exc:
                            raise ProtocolError(str(exc)) from exc
                    return out3
                dists = []
                for r in rows:
                    if any(v < 0 for v in r) or abs(sum(r) - 1.0) > DISTRIBUTION_SUM_TOLERANCE:
                        raise ProtocolError(f"invalid binary distribution {r!r}")
                    dists.append(BinaryDistribution(r[0], r[1]))
                return dists
            last_error = RetryableTransport(f"HTTP {resp.status_code} from {url}")
        if attempt + 1 < attempts:
            time.sleep(backoff * (2**attempt))
    raise RetryableTransport(f"classify failed after {attempts} attempts: {last_error}")


class RemoteClassifier:
    """Batch classifier bound to one remote endpoint + model id."""

    def __init__(
        self,
        endpoint: str,
        model_id: str,
        timeout: float = 30.0,
        attempts: int = 3,
        backoff: float = 0.5,
    ) -> None:
        self.ref = RemoteRef(endpoint=endpoint, model_id=model_id)
        self._timeout = timeout
        self._attempts = attempts
        self._backoff = backoff

    def classify(self, texts: Sequence[str]) -> list[LabelDistribution]:
        return remote_classify(
            texts,
            self.ref,
            arity=3,
            timeout=self._timeout,
            attempts=self._attempts,
            backoff=self._backoff,
        )
