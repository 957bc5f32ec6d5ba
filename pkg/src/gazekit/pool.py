"""Five-block caption templates: decision, scene, method, evidence, conclusion.

Block 1 is fixed per label and doubles as the machine-parseable verdict. Blocks
2-3 are shared across labels; blocks 4-5 branch on the label. A pool with k
variants per position therefore spans 2*k^4 distinct captions.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from random import Random
from typing import Iterator, Literal, Optional

Label = Literal["real", "fake"]

LABELS: tuple[Label, Label] = ("real", "fake")

DECISION_REAL = "This is a real image."
DECISION_FAKE = "This is a fake image."


class PoolError(ValueError):
    pass


class WrongCardinality(PoolError):
    pass


class DuplicateVariant(PoolError):
    pass


class MissingDecisionSentence(PoolError):
    pass


def normalize_text(text: str) -> str:
    """Lowercase and collapse whitespace runs; shared by matching and dedup."""
    return " ".join(text.split()).lower()


@dataclass(frozen=True)
class TemplateId:
    """Index of one caption template: a label plus one variant per open block."""

    label: Label
    scene: int
    method: int
    evidence: int
    conclusion: int


@dataclass(frozen=True)
class Caption:
    template: TemplateId
    text: str


@dataclass(frozen=True)
class MacroPool:
    decision_real: str
    decision_fake: str
    scene: tuple[str, ...]
    method: tuple[str, ...]
    evidence_real: tuple[str, ...]
    evidence_fake: tuple[str, ...]
    conclusion_real: tuple[str, ...]
    conclusion_fake: tuple[str, ...]
    # sentence -> short card id; the two label surfaces of an evidence or
    # conclusion entry share a card, so a k-variant pool carries 4k cards.
    cards: dict[str, str] = field(compare=False)

    @classmethod
    def build(
        cls,
        scene: list[str],
        method: list[str],
        evidence_real: list[str],
        evidence_fake: list[str],
        conclusion_real: list[str],
        conclusion_fake: list[str],
        cards: Optional[dict[str, str]] = None,
    ) -> "MacroPool":
        """Assemble a pool; synthesizes positional card ids when none given."""
        if cards is None:
            cards = {}
            for pos, variants in (("P2", scene), ("P3", method)):
                for i, s in enumerate(variants):
                    cards[s] = f"{pos}_{i}"
            for pos, real_side, fake_side in (
                ("P4", evidence_real, evidence_fake),
                ("P5", conclusion_real, conclusion_fake),
            ):
                for i, s in enumerate(real_side):
                    cards[s] = f"{pos}_{i}"
                for i, s in enumerate(fake_side):
                    cards[s] = f"{pos}_{i}"
        return cls(
            decision_real=DECISION_REAL,
            decision_fake=DECISION_FAKE,
            scene=tuple(scene),
            method=tuple(method),
            evidence_real=tuple(evidence_real),
            evidence_fake=tuple(evidence_fake),
            conclusion_real=tuple(conclusion_real),
            conclusion_fake=tuple(conclusion_fake),
            cards=cards,
        )

    def decision(self, label: Label) -> str:
        return self.decision_real if label == "real" else self.decision_fake

    def evidence(self, label: Label) -> tuple[str, ...]:
        return self.evidence_real if label == "real" else self.evidence_fake

    def conclusion(self, label: Label) -> tuple[str, ...]:
        return self.conclusion_real if label == "real" else self.conclusion_fake

    def sentences(self) -> Iterator[str]:
        """All open-block sentences (decisions excluded: they carry no card)."""
        yield from self.scene
        yield from self.method
        yield from self.evidence_real
        yield from self.evidence_fake
        yield from self.conclusion_real
        yield from self.conclusion_fake

    def card_set(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.cards.values())))

    @property
    def variants_per_position(self) -> int:
        return len(self.scene)

    def validate(self, expected_variants: Optional[int] = None) -> "MacroPool":
        k = expected_variants if expected_variants is not None else len(self.scene)
        if k < 1:
            raise WrongCardinality("pool needs at least one variant per position")
        sized = {
            "scene": self.scene,
            "method": self.method,
            "evidence[real]": self.evidence_real,
            "evidence[fake]": self.evidence_fake,
            "conclusion[real]": self.conclusion_real,
            "conclusion[fake]": self.conclusion_fake,
        }
        for name, variants in sized.items():
            if len(variants) != k:
                raise WrongCardinality(f"{name} has {len(variants)} variants, expected {k}")
        if self.decision_real != DECISION_REAL or self.decision_fake != DECISION_FAKE:
            raise MissingDecisionSentence(
                "decision sentences must match the verdict parser contract exactly"
            )
        seen: dict[str, str] = {}
        for s in self.sentences():
            if not s.strip():
                raise DuplicateVariant("empty variant sentence")
            key = normalize_text(s)
            if key in seen:
                raise DuplicateVariant(f"duplicate variant after normalization: {s!r}")
            seen[key] = s
        missing = [s for s in self.sentences() if s not in self.cards]
        if missing:
            raise PoolError(f"{len(missing)} pool sentences lack a card id")
        if len(self.card_set()) != 4 * k:
            raise WrongCardinality(
                f"expected {4 * k} distinct card ids, found {len(self.card_set())}"
            )
        return self


def caption_space_size(pool: MacroPool) -> int:
    """Count of distinct composable captions (2*k^4 for a uniform pool)."""
    total = 0
    for label in LABELS:
        total += (
            len(pool.scene)
            * len(pool.method)
            * len(pool.evidence(label))
            * len(pool.conclusion(label))
        )
    return total


def iter_templates(pool: MacroPool, label: Optional[Label] = None) -> Iterator[TemplateId]:
    labels = LABELS if label is None else (label,)
    for lab in labels:
        for i2 in range(len(pool.scene)):
            for i3 in range(len(pool.method)):
                for i4 in range(len(pool.evidence(lab))):
                    for i5 in range(len(pool.conclusion(lab))):
                        yield TemplateId(lab, i2, i3, i4, i5)


def compose(pool: MacroPool, template: TemplateId) -> Caption:
    """Render a template to its caption text, blocks joined by single spaces."""
    parts = (
        pool.decision(template.label),
        pool.scene[template.scene],
        pool.method[template.method],
        pool.evidence(template.label)[template.evidence],
        pool.conclusion(template.label)[template.conclusion],
    )
    return Caption(template=template, text=" ".join(parts))


def assign_captions(pool: MacroPool, n_per_label: int, seed: int) -> list[TemplateId]:
    """Balanced assignment: per label, round-robin over a seed-shuffled template
    order, so usage counts differ by at most one (floor/ceil of n/k^4)."""
    if n_per_label < 0:
        raise ValueError("n_per_label must be non-negative")
    rng = Random(seed)
    out: list[TemplateId] = []
    for label in LABELS:
        templates = list(iter_templates(pool, label))
        rng.shuffle(templates)
        out.extend(templates[i % len(templates)] for i in range(n_per_label))
    return out


@lru_cache(maxsize=8)
def _template_index(pool: MacroPool) -> dict[str, TemplateId]:
    return {
        normalize_text(compose(pool, t).text): t for t in iter_templates(pool)
    }


def canonical_template_of(text: str, pool: MacroPool) -> Optional[TemplateId]:
    """Exact template whose composed caption matches after normalization."""
    return _template_index(pool).get(normalize_text(text))


def parse_pool(raw: dict) -> MacroPool:
    """Build a pool from the JSON schema {decision, p2, p3, p4, p5, cards}."""
    try:
        decision = raw["decision"]
        pool = MacroPool(
            decision_real=decision["real"],
            decision_fake=decision["fake"],
            scene=tuple(raw["p2"]),
            method=tuple(raw["p3"]),
            evidence_real=tuple(raw["p4"]["real"]),
            evidence_fake=tuple(raw["p4"]["fake"]),
            conclusion_real=tuple(raw["p5"]["real"]),
            conclusion_fake=tuple(raw["p5"]["fake"]),
            cards=dict(raw["cards"]),
        )
    except (KeyError, TypeError) as exc:
        raise PoolError(f"malformed pool file: {exc}") from exc
    return pool.validate(expected_variants=5)


def load_pool(path: str) -> MacroPool:
    with open(path, encoding="utf-8") as fh:
        return parse_pool(json.load(fh))


def default_pool() -> MacroPool:
    raw = resources.files("gazekit.data").joinpath("default_pool.json").read_text("utf-8")
    return parse_pool(json.loads(raw))
