"""Corpus construction: mutual-gaze filtering, pair unpacking, grouped
splitting, leakage auditing, and partition balancing.

A pair (one pristine photo plus its eye-edited twin) is the atomic unit; its
base_id must never straddle splits, otherwise near-duplicates leak across the
train/eval boundary.
"""
from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, replace
from fractions import Fraction
from random import Random
from typing import Callable, Iterable, Optional

from .geometry import FaceBBox
from .pool import Label, normalize_text

SPLITS = ("train", "val", "test")

# Whole-word vocabulary for keeping only captions that mention people.
_PERSON_WORDS = ("man", "men", "woman", "women", "people", "person", "boy", "girl")
_PERSON_RE = re.compile(r"\b(?:" + "|".join(_PERSON_WORDS) + r")\b", re.IGNORECASE)


class EmptyPartition(ValueError):
    pass


@dataclass(frozen=True)
class GazeAnnotation:
    image_id: str
    annotation_flag: int
    bbox_pairs: tuple[tuple[FaceBBox, FaceBBox], ...] = ()


@dataclass(frozen=True)
class PairRecord:
    base_id: str
    image_id: str
    bbox_a: FaceBBox
    bbox_b: FaceBBox
    perturbed_participant: str = "A"
    split: str = "unassigned"


@dataclass(frozen=True)
class SplitSample:
    sample_id: str
    base_id: str
    label: Label
    split: str


@dataclass(frozen=True)
class BenchmarkSample:
    id: str
    benchmark: str
    label: Label
    generator: Optional[str] = None
    caption_text: Optional[str] = None
    person_count: Optional[int] = None


def filter_mutual_gaze(annotations: Iterable[GazeAnnotation]) -> list[GazeAnnotation]:
    """Keep only annotation_flag == 1 (mutual eye contact)."""
    return [a for a in annotations if a.annotation_flag == 1]


def unpack_pairs(retained: Iterable[GazeAnnotation]) -> list[PairRecord]:
    """One PairRecord per bbox pair; base_id = image_id plus pair index, so an
    image with several annotated pairs yields several atomic units."""
    out: list[PairRecord] = []
    for ann in retained:
        for idx, (bbox_a, bbox_b) in enumerate(ann.bbox_pairs):
            bbox_a.validate()
            bbox_b.validate()
            out.append(
                PairRecord(
                    base_id=f"{ann.image_id}#p{idx}",
                    image_id=ann.image_id,
                    bbox_a=bbox_a,
                    bbox_b=bbox_b,
                )
            )
    return out


def grouped_stratified_split(
    pairs: list[PairRecord],
    ratios: tuple[int, int, int] = (8, 1, 1),
    seed: int = 42,
) -> list[PairRecord]:
    """Assign splits with train = floor(N*a/denom), val = floor(N*b/denom),
    test = remainder, shuffling base_id groups with the given seed. Exact
    integer arithmetic; independent of input ordering."""
    if any(r < 0 for r in ratios) or sum(ratios) <= 0:
        raise ValueError(f"bad ratios {ratios}")
    groups: dict[str, list[int]] = defaultdict(list)
    for i, p in enumerate(pairs):
        groups[p.base_id].append(i)
    keys = sorted(groups)
    Random(seed).shuffle(keys)
    n = len(pairs)
    denom = sum(ratios)
    n_train = int(Fraction(n * ratios[0], denom))
    n_val = int(Fraction(n * ratios[1], denom))
    assigned: dict[str, str] = {}
    placed = 0
    for key in keys:
        if placed < n_train:
            split = "train"
        elif placed < n_train + n_val:
            split = "val"
        else:
            split = "test"
        assigned[key] = split
        placed += len(groups[key])
    return [replace(p, split=assigned[p.base_id]) for p in pairs]


def expand_to_samples(pairs: Iterable[PairRecord]) -> list[SplitSample]:
    """Two samples per pair: the pristine photo (real) and its edit (fake)."""
    out: list[SplitSample] = []
    for p in pairs:
        out.append(SplitSample(f"{p.base_id}/real", p.base_id, "real", p.split))
        out.append(SplitSample(f"{p.base_id}/fake", p.base_id, "fake", p.split))
    return out


def leakage_check(items: Iterable) -> list[str]:
    """Base ids whose members span more than one split (empty list = clean)."""
    seen: dict[str, set[str]] = defaultdict(set)
    for item in items:
        seen[item.base_id].add(item.split)
    return sorted(b for b, splits in seen.items() if len(splits) > 1)


def person_caption_filter(caption: str) -> bool:
    """Whole-word match against the eight human nouns; substrings like
    'mankind' do not count."""
    return _PERSON_RE.search(caption) is not None


def _default_partition_key(sample: BenchmarkSample) -> str:
    return sample.generator or "real"


def balance_partitions(
    samples: list[BenchmarkSample],
    key: Optional[Callable[[BenchmarkSample], str]] = None,
    seed: int = 0,
) -> list[BenchmarkSample]:
    """Downsample every partition to the smallest partition's size. Selection
    is reproducible: ids sorted, then a per-partition seeded shuffle picks the
    prefix. Output ordered by id."""
    if not samples:
        raise EmptyPartition("no samples to balance")
    key = key or _default_partition_key
    parts: dict[str, list[BenchmarkSample]] = defaultdict(list)
    for s in samples:
        parts[key(s)].append(s)
    floor = min(len(v) for v in parts.values())
    kept: list[BenchmarkSample] = []
    for name in sorted(parts):
        members = sorted(parts[name], key=lambda s: s.id)
        Random(f"{seed}:{name}").shuffle(members)
        kept.extend(members[:floor])
    return sorted(kept, key=lambda s: s.id)


def dedupe_by_caption(
    samples: list[BenchmarkSample], normalized: bool = True
) -> list[BenchmarkSample]:
    """Drop repeat captions, keeping first occurrence. Exact or
    whitespace/case-normalized comparison."""
    seen: set[str] = set()
    out: list[BenchmarkSample] = []
    for s in samples:
        text = s.caption_text or ""
        key = normalize_text(text) if normalized else text
        if key in seen:
            continue
        seen.add(key)
        out.append(s)
    return out


@dataclass(frozen=True)
class Datasheet:
    rows: dict[str, dict[str, int]]
    image_license: str = "unspecified"
    pool_license: str = "unspecified"
    sources: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "rows": self.rows,
            "image_license": self.image_license,
            "pool_license": self.pool_license,
            "sources": list(self.sources),
        }

    def as_text(self) -> str:
        lines = [f"{'split':<8}{'pairs':>8}{'real':>8}{'fake':>8}{'total':>8}"]
        for name in (*SPLITS, "total"):
            r = self.rows[name]
            lines.append(
                f"{name:<8}{r['pairs']:>8}{r['real']:>8}{r['fake']:>8}{r['total']:>8}"
            )
        lines.append(f"image license: {self.image_license}")
        lines.append(f"caption pool license: {self.pool_license}")
        for src in self.sources:
            lines.append(f"source: {src}")
        return "\n".join(lines)


def emit_datasheet(
    pairs: Iterable[PairRecord],
    image_license: str = "unspecified",
    pool_license: str = "unspecified",
    sources: tuple[str, ...] = (),
) -> Datasheet:
    """Per-split pair/sample counts; real:fake is 1:1 by construction, so the
    sample total is twice the pair count."""
    per_split = {name: 0 for name in SPLITS}
    for p in pairs:
        if p.split not in per_split:
            raise ValueError(f"unassigned or unknown split on {p.base_id}: {p.split}")
        per_split[p.split] += 1
    rows = {
        name: {"pairs": c, "real": c, "fake": c, "total": 2 * c}
        for name, c in per_split.items()
    }
    total = sum(per_split.values())
    rows["total"] = {"pairs": total, "real": total, "fake": total, "total": 2 * total}
    return Datasheet(
        rows=rows,
        image_license=image_license,
        pool_license=pool_license,
        sources=tuple(sources),
    )
