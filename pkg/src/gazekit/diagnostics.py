"""Behavioral diagnostics over raw model outputs: output-diversity collapse,
caption-card usage, keyword families, a metadata-conditioned verdict gate,
and error-bucket reports.

Card matching is substring containment of the normalized pool sentence in the
normalized output, so verbatim template reuse is detected regardless of
casing or whitespace.
"""
from __future__ import annotations

import json
import re
import statistics
from collections import Counter
from dataclasses import dataclass, replace
from importlib import resources
from typing import Mapping, Optional, Sequence

from .metrics import ConfusionMatrix, balanced_accuracy
from .pool import (
    DECISION_FAKE,
    DECISION_REAL,
    MacroPool,
    TemplateId,
    canonical_template_of,
    normalize_text,
)
from .records import PredictionRecord
from .verdict import Verdict

FragmentCards = Mapping[str, Sequence[str]]


class EmptyList(ValueError):
    pass


class NoMatchedOutputs(ValueError):
    pass


class MissingGenLen(ValueError):
    pass


class MissingPersonCount(ValueError):
    pass


def unique_output_ratio(outputs: Sequence[str]) -> float:
    """Distinct normalized outputs over total; 1/n means total collapse to a
    single string, 1.0 means no verbatim repeats."""
    if not outputs:
        raise EmptyList("no outputs")
    return len({normalize_text(o) for o in outputs}) / len(outputs)


@dataclass(frozen=True)
class TemplateConcentration:
    ratio: float
    modal_template: TemplateId
    n_matched: int
    n_excluded: int


def top1_template_ratio(outputs: Sequence[str], pool: MacroPool) -> TemplateConcentration:
    """Share of the modal template among outputs that match a template
    verbatim; non-matching outputs are excluded and counted separately."""
    if not outputs:
        raise EmptyList("no outputs")
    matched: Counter[TemplateId] = Counter()
    excluded = 0
    for o in outputs:
        t = canonical_template_of(o, pool)
        if t is None:
            excluded += 1
        else:
            matched[t] += 1
    if not matched:
        raise NoMatchedOutputs(f"none of {len(outputs)} outputs matches a template")
    modal, count = matched.most_common(1)[0]
    return TemplateConcentration(
        ratio=count / sum(matched.values()),
        modal_template=modal,
        n_matched=sum(matched.values()),
        n_excluded=excluded,
    )


@dataclass(frozen=True)
class WordStats:
    mean_words: float
    median_words: float
    bare_decision_rate: float
    truncation_rate: Optional[float] = None


def output_word_stats(
    records: Sequence[PredictionRecord], cap: Optional[int] = None
) -> WordStats:
    """Whitespace word counts, share of outputs that are exactly a decision
    sentence, and (when a generation cap is given) the share that hit it."""
    if not records:
        raise EmptyList("no records")
    counts = [len(r.output.split()) for r in records]
    bare = sum(1 for r in records if r.output.strip() in (DECISION_REAL, DECISION_FAKE))
    truncation = None
    if cap is not None:
        missing = [r.id for r in records if r.gen_len is None]
        if missing:
            raise MissingGenLen(
                f"{len(missing)} records lack gen_len (e.g. {missing[0]})"
            )
        truncation = sum(1 for r in records if r.gen_len >= cap) / len(records)
    return WordStats(
        mean_words=statistics.fmean(counts),
        median_words=statistics.median(counts),
        bare_decision_rate=bare / len(records),
        truncation_rate=truncation,
    )


def card_invocations(
    output: str, pool: MacroPool, extra_cards: Optional[FragmentCards] = None
) -> frozenset[str]:
    """Cards whose pool sentence occurs in the output; fragment cards require
    every fragment to occur."""
    hay = normalize_text(output)
    hit = {
        card
        for sentence, card in pool.cards.items()
        if normalize_text(sentence) in hay
    }
    for card, fragments in (extra_cards or {}).items():
        if fragments and all(normalize_text(f) in hay for f in fragments):
            hit.add(card)
    return frozenset(hit)


@dataclass(frozen=True)
class CardStats:
    card: str
    invocations: int
    rate: float
    accuracy: float


def card_accuracy(
    records: Sequence[PredictionRecord],
    pool: MacroPool,
    extra_cards: Optional[FragmentCards] = None,
) -> list[CardStats]:
    """Per invoked card: how often it appears and how accurate the verdict is
    when it does (unparseable verdicts count as wrong)."""
    if not records:
        raise EmptyList("no records")
    invoked: dict[str, int] = Counter()
    correct: dict[str, int] = Counter()
    for r in records:
        for card in card_invocations(r.output, pool, extra_cards):
            invoked[card] += 1
            if r.verdict is not None and r.verdict.parseable and r.verdict.value == r.label:
                correct[card] += 1
    return [
        CardStats(
            card=card,
            invocations=invoked[card],
            rate=invoked[card] / len(records),
            accuracy=correct[card] / invoked[card],
        )
        for card in sorted(invoked)
    ]


@dataclass(frozen=True)
class CardRotation:
    card: str
    rate_a: float
    rate_b: float

    @property
    def delta(self) -> float:
        return self.rate_b - self.rate_a


def card_rotation(
    records_a: Sequence[PredictionRecord],
    records_b: Sequence[PredictionRecord],
    pool: MacroPool,
    extra_cards: Optional[FragmentCards] = None,
) -> list[CardRotation]:
    """Invocation-rate shift between two record sets (b minus a), largest
    absolute movement first."""
    if not records_a or not records_b:
        raise EmptyList("both record sets must be non-empty")

    def rates(records: Sequence[PredictionRecord]) -> dict[str, float]:
        hits: Counter[str] = Counter()
        for r in records:
            hits.update(card_invocations(r.output, pool, extra_cards))
        return {card: n / len(records) for card, n in hits.items()}

    ra, rb = rates(records_a), rates(records_b)
    rotations = [
        CardRotation(card=card, rate_a=ra.get(card, 0.0), rate_b=rb.get(card, 0.0))
        for card in sorted(set(ra) | set(rb))
    ]
    return sorted(rotations, key=lambda r: (-abs(r.delta), r.card))


@dataclass(frozen=True)
class FamilyStats:
    frequencies: dict[str, float]
    co_occurrence: dict[tuple[str, str], float]


def _family_pattern(members: Sequence[str]) -> Optional[re.Pattern]:
    if not members:
        return None
    alts = "|".join(re.escape(m) for m in sorted(members, key=len, reverse=True))
    return re.compile(r"\b(?:" + alts + r")\b", re.IGNORECASE)


def keyword_family_stats(
    records: Sequence[PredictionRecord], families: Mapping[str, Sequence[str]]
) -> FamilyStats:
    """Per family, the share of outputs mentioning any member (whole-word,
    case-insensitive); plus pairwise joint shares."""
    if not records:
        raise EmptyList("no records")
    patterns = {name: _family_pattern(members) for name, members in families.items()}
    hits = {
        name: [bool(p.search(r.output)) if p else False for r in records]
        for name, p in patterns.items()
    }
    n = len(records)
    freqs = {name: sum(h) / n for name, h in hits.items()}
    names = sorted(families)
    co = {
        (a, b): sum(1 for x, y in zip(hits[a], hits[b]) if x and y) / n
        for i, a in enumerate(names)
        for b in names[i + 1 :]
    }
    return FamilyStats(frequencies=freqs, co_occurrence=co)


@dataclass(frozen=True)
class CardGate:
    """Declarative post-hoc rule: when `card` is invoked, the (optional)
    person-count condition holds, and the verdict is real, flip it to fake."""

    card: str
    require_person_count: Optional[int] = None
    action: str = "flip_real_to_fake"

    def validate(self) -> "CardGate":
        if self.action != "flip_real_to_fake":
            raise ValueError(f"unknown gate action {self.action!r}")
        return self


@dataclass(frozen=True)
class GateReport:
    gate: CardGate
    flipped: int
    ba_before: float
    ba_after: float
    confusion_before: ConfusionMatrix
    confusion_after: ConfusionMatrix
    records: tuple[PredictionRecord, ...]

    @property
    def delta_ba(self) -> float:
        return self.ba_after - self.ba_before


def apply_card_gate(
    records: Sequence[PredictionRecord],
    gate: CardGate,
    pool: MacroPool,
    extra_cards: Optional[FragmentCards] = None,
) -> GateReport:
    """Flip real verdicts to fake where the gate matches. Only real verdicts
    are touched, so recall on the fake class can never drop."""
    gate.validate()
    if not records:
        raise EmptyList("no records")
    parseable = [r for r in records if r.verdict is not None and r.verdict.parseable]
    before = ConfusionMatrix.from_records(parseable)
    gated: list[PredictionRecord] = []
    flipped = 0
    for r in records:
        flips = (
            r.verdict is not None
            and r.verdict.value == "real"
            and gate.card in card_invocations(r.output, pool, extra_cards)
        )
        if flips and gate.require_person_count is not None:
            if r.person_count is None:
                raise MissingPersonCount(f"record {r.id} lacks person_count")
            flips = r.person_count == gate.require_person_count
        if flips:
            gated.append(replace(r, verdict=Verdict("fake", r.verdict.mode)))
            flipped += 1
        else:
            gated.append(r)
    after = ConfusionMatrix.from_records(
        [r for r in gated if r.verdict is not None and r.verdict.parseable]
    )
    return GateReport(
        gate=gate,
        flipped=flipped,
        ba_before=balanced_accuracy(before),
        ba_after=balanced_accuracy(after),
        confusion_before=before,
        confusion_after=after,
        records=tuple(gated),
    )


@dataclass(frozen=True)
class ErrorBucket:
    name: str
    count: int
    share: float


@dataclass(frozen=True)
class WrongPoolReport:
    wrong_real: tuple[ErrorBucket, ...]
    wrong_fake: tuple[ErrorBucket, ...]
    n_wrong_real: int
    n_wrong_fake: int


def _first_card(
    output: str, pool: MacroPool, extra_cards: Optional[FragmentCards]
) -> Optional[str]:
    hay = normalize_text(output)
    best: Optional[tuple[int, str]] = None
    for sentence, card in pool.cards.items():
        pos = hay.find(normalize_text(sentence))
        if pos >= 0 and (best is None or (pos, card) < best):
            best = (pos, card)
    for card, fragments in (extra_cards or {}).items():
        if fragments:
            positions = [hay.find(normalize_text(f)) for f in fragments]
            if all(p >= 0 for p in positions):
                pos = min(positions)
                if best is None or (pos, card) < best:
                    best = (pos, card)
    return best[1] if best else None


def _bucketize(
    pool_records: list[PredictionRecord],
    pool: MacroPool,
    extra_cards: Optional[FragmentCards],
) -> tuple[ErrorBucket, ...]:
    counts: Counter[str] = Counter()
    for r in pool_records:
        counts[_first_card(r.output, pool, extra_cards) or "other"] += 1
    n = len(pool_records)
    buckets = [
        ErrorBucket(name=name, count=c, share=c / n)
        for name, c in counts.items()
    ]
    return tuple(sorted(buckets, key=lambda b: (-b.count, b.name)))


def wrong_pool_report(
    records: Sequence[PredictionRecord],
    pool: MacroPool,
    extra_cards: Optional[FragmentCards] = None,
) -> WrongPoolReport:
    """Bucket the two error pools (missed edits, false alarms) by the first
    card surfacing in each wrong output; cardless outputs land in 'other'."""
    wrong_real = [
        r
        for r in records
        if r.label == "fake" and r.verdict is not None and r.verdict.value == "real"
    ]
    wrong_fake = [
        r
        for r in records
        if r.label == "real" and r.verdict is not None and r.verdict.value == "fake"
    ]
    return WrongPoolReport(
        wrong_real=_bucketize(wrong_real, pool, extra_cards),
        wrong_fake=_bucketize(wrong_fake, pool, extra_cards),
        n_wrong_real=len(wrong_real),
        n_wrong_fake=len(wrong_fake),
    )


def load_keyword_families() -> dict[str, list[str]]:
    raw = resources.files("gazekit.data").joinpath("keyword_families.json").read_text("utf-8")
    return {k: v for k, v in json.loads(raw).items() if not k.startswith("_")}


def load_fragment_cards() -> dict[str, list[str]]:
    raw = resources.files("gazekit.data").joinpath("fragment_cards.json").read_text("utf-8")
    return {k: v for k, v in json.loads(raw).items() if not k.startswith("_")}
