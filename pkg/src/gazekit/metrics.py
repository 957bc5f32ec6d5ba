"""Class-prevalence-robust scoring over prediction records.

The edited class ('fake') is the positive class everywhere. All scores are
percentages at full float precision; table rendering quantizes elsewhere.
Records must already carry verdicts; unparseable ones are excluded by the
scoring entry points and surface only through effective counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .records import PredictionRecord
from .verdict import effective_counts


class MissingClass(ValueError):
    pass


class MixedBenchmarks(ValueError):
    pass


class RealSamplePresent(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @classmethod
    def from_records(cls, records: Iterable[PredictionRecord]) -> "ConfusionMatrix":
        tp = fp = tn = fn = 0
        benchmarks = set()
        for r in records:
            if r.verdict is None or not r.verdict.parseable:
                raise ValueError(f"unparseable record reached scoring: {r.id}")
            benchmarks.add(r.benchmark)
            predicted_fake = r.verdict.value == "fake"
            if r.label == "fake":
                tp += predicted_fake
                fn += not predicted_fake
            else:
                fp += predicted_fake
                tn += not predicted_fake
        if len(benchmarks) > 1:
            raise MixedBenchmarks(f"records span benchmarks {sorted(benchmarks)}")
        return cls(tp=tp, fp=fp, tn=tn, fn=fn)

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def balanced_accuracy(cm: ConfusionMatrix) -> float:
    if cm.tp + cm.fn == 0 or cm.tn + cm.fp == 0:
        raise MissingClass("balanced accuracy needs both classes in the ground truth")
    tpr = cm.tp / (cm.tp + cm.fn)
    tnr = cm.tn / (cm.tn + cm.fp)
    return 100.0 * (tpr + tnr) / 2.0


def macro_f1(cm: ConfusionMatrix) -> float:
    """Unweighted mean of the per-class F1 scores; a class with an all-zero
    denominator contributes 0."""
    if cm.tp + cm.fn == 0 or cm.tn + cm.fp == 0:
        raise MissingClass("macro-F1 needs both classes in the ground truth")
    denom_fake = 2 * cm.tp + cm.fp + cm.fn
    denom_real = 2 * cm.tn + cm.fn + cm.fp
    f1_fake = 2 * cm.tp / denom_fake if denom_fake else 0.0
    f1_real = 2 * cm.tn / denom_real if denom_real else 0.0
    return 100.0 * (f1_fake + f1_real) / 2.0


def mcc(cm: ConfusionMatrix) -> float:
    """Matthews correlation as a percentage; 0 when any marginal is empty."""
    factors = (
        cm.tp + cm.fp,
        cm.tp + cm.fn,
        cm.tn + cm.fp,
        cm.tn + cm.fn,
    )
    if any(f == 0 for f in factors):
        return 0.0
    num = cm.tp * cm.tn - cm.fp * cm.fn
    return 100.0 * num / math.sqrt(math.prod(factors))


def dissect(cm: ConfusionMatrix) -> dict[str, int]:
    """Error-anatomy view: missed edits, caught edits, kept photos, false
    alarms."""
    return {
        "wrong_real": cm.fn,
        "right_fake": cm.tp,
        "right_real": cm.tn,
        "wrong_fake": cm.fp,
    }


def dissect_delta(before: ConfusionMatrix, after: ConfusionMatrix) -> dict[str, int]:
    b, a = dissect(before), dissect(after)
    return {k: a[k] - b[k] for k in b}


def fake_only_accuracy(records: Sequence[PredictionRecord]) -> float:
    """Share of edited samples caught, on an all-fake record set. Refuses
    mixed sets: this number is not comparable to balanced accuracy."""
    reals = [r.id for r in records if r.label == "real"]
    if reals:
        raise RealSamplePresent(
            f"{len(reals)} real samples present (e.g. {reals[0]}); "
            "use the paired view instead"
        )
    if not records:
        raise MissingClass("no records")
    correct = sum(
        1
        for r in records
        if r.verdict is not None and r.verdict.parseable and r.verdict.value == "fake"
    )
    parseable = [r for r in records if r.verdict is not None and r.verdict.parseable]
    if not parseable:
        raise MissingClass("no parseable records")
    return 100.0 * correct / len(parseable)


@dataclass(frozen=True)
class BenchmarkScore:
    benchmark: str
    view: str  # "paired" | "fake_only"
    n_initial: int
    n_eff: int
    ba: Optional[float] = None
    macro_f1: Optional[float] = None
    mcc: Optional[float] = None
    fake_acc: Optional[float] = None
    confusion: Optional[ConfusionMatrix] = None


def score_records(records: Sequence[PredictionRecord], view: str = "auto") -> BenchmarkScore:
    """Score one benchmark's records. View 'auto' picks paired when both
    classes are present and fake-only otherwise; forcing 'paired' on a
    single-class set fails loudly."""
    if view not in ("auto", "paired", "fake_only"):
        raise ValueError(f"unknown view {view!r}")
    if not records:
        raise MissingClass("no records")
    counts = effective_counts(records)
    kept = [r for r in records if r.verdict is not None and r.verdict.parseable]
    if not kept:
        raise MissingClass("all records unparseable")
    benchmarks = {r.benchmark for r in records}
    if len(benchmarks) > 1:
        raise MixedBenchmarks(f"records span benchmarks {sorted(benchmarks)}")
    benchmark = benchmarks.pop()
    labels = {r.label for r in kept}
    if view == "auto":
        view = "paired" if labels == {"real", "fake"} else "fake_only"
    if view == "paired":
        cm = ConfusionMatrix.from_records(kept)
        return BenchmarkScore(
            benchmark=benchmark,
            view="paired",
            n_initial=counts.n_initial,
            n_eff=counts.n_effective,
            ba=balanced_accuracy(cm),
            macro_f1=macro_f1(cm),
            mcc=mcc(cm),
            confusion=cm,
        )
    return BenchmarkScore(
        benchmark=benchmark,
        view="fake_only",
        n_initial=counts.n_initial,
        n_eff=counts.n_effective,
        fake_acc=fake_only_accuracy(kept),
    )


def per_generator_scores(
    records: Sequence[PredictionRecord],
) -> dict[str, BenchmarkScore]:
    """Per-generator paired slices: the shared real samples plus one
    generator's fakes each."""
    reals = [r for r in records if r.label == "real"]
    fakes = [r for r in records if r.label == "fake"]
    for r in reals:
        if r.generator is not None:
            raise ValueError(f"real sample {r.id} carries generator {r.generator!r}")
    for r in fakes:
        if r.generator is None:
            raise ValueError(f"fake sample {r.id} lacks a generator tag")
    generators = sorted({r.generator for r in fakes})
    return {
        g: score_records(reals + [r for r in fakes if r.generator == g], view="paired")
        for g in generators
    }


def mean_across_benchmarks(scores: Sequence[BenchmarkScore]) -> BenchmarkScore:
    """Unweighted elementwise mean of per-benchmark scores (paired view)."""
    if not scores:
        raise MissingClass("no scores to aggregate")
    if any(s.view != "paired" for s in scores):
        raise ValueError("mean aggregation is defined over paired-view scores only")
    return BenchmarkScore(
        benchmark="mean",
        view="paired",
        n_initial=sum(s.n_initial for s in scores),
        n_eff=sum(s.n_eff for s in scores),
        ba=sum(s.ba for s in scores) / len(scores),
        macro_f1=sum(s.macro_f1 for s in scores) / len(scores),
        mcc=sum(s.mcc for s in scores) / len(scores),
    )
