"""Score-report assembly and text rendering.

Table cells quantize percentages by truncation at one decimal (65.38 -> 65.3);
the JSON side keeps full precision so the two renderings always agree on what
they quantize from.
"""
from __future__ import annotations

import math
from typing import Optional, Sequence

from .metrics import BenchmarkScore, dissect, mean_across_benchmarks

# Guard against float dust just under a representable tenth (e.g. 79.0999...96).
_EPS = 1e-9


def trunc1(value: float) -> float:
    """Quantize toward zero at one decimal."""
    return math.trunc((value + math.copysign(_EPS, value)) * 10) / 10


def fmt_pct(value: Optional[float]) -> str:
    if value is None:
        return "-"
    return f"{trunc1(value):.1f}"


def score_to_dict(score: BenchmarkScore) -> dict:
    out = {
        "benchmark": score.benchmark,
        "view": score.view,
        "n_initial": score.n_initial,
        "n_eff": score.n_eff,
        "failure_rate": (
            (score.n_initial - score.n_eff) / score.n_initial if score.n_initial else 0.0
        ),
        "ba": score.ba,
        "macro_f1": score.macro_f1,
        "mcc": score.mcc,
        "fake_acc": score.fake_acc,
    }
    if score.confusion is not None:
        cm = score.confusion
        out["confusion"] = {"tp": cm.tp, "fp": cm.fp, "tn": cm.tn, "fn": cm.fn}
        out["dissection"] = dissect(cm)
    return out


def score_cells(score: BenchmarkScore) -> dict[str, str]:
    """The quantized table cells for one score row."""
    return {
        "ba": fmt_pct(score.ba),
        "macro_f1": fmt_pct(score.macro_f1),
        "mcc": fmt_pct(score.mcc),
        "fake_acc": fmt_pct(score.fake_acc),
    }


def render_score_table(rows: Sequence[tuple[str, BenchmarkScore]]) -> str:
    """Rows of (model, score), one line per benchmark, plus a mean line per
    model when it has several paired benchmarks."""
    lines = [
        f"{'model':<20}{'benchmark':<16}{'view':<10}{'n_eff':>7}"
        f"{'BA':>8}{'mF1':>8}{'MCC':>8}{'fakeAcc':>9}"
    ]
    by_model: dict[str, list[BenchmarkScore]] = {}
    for model, score in rows:
        by_model.setdefault(model, []).append(score)
    for model in sorted(by_model):
        paired = [s for s in by_model[model] if s.view == "paired"]
        for score in by_model[model]:
            c = score_cells(score)
            lines.append(
                f"{model:<20}{score.benchmark:<16}{score.view:<10}{score.n_eff:>7}"
                f"{c['ba']:>8}{c['macro_f1']:>8}{c['mcc']:>8}{c['fake_acc']:>9}"
            )
        if len(paired) > 1:
            mean = mean_across_benchmarks(paired)
            c = score_cells(mean)
            lines.append(
                f"{model:<20}{'mean':<16}{'paired':<10}{mean.n_eff:>7}"
                f"{c['ba']:>8}{c['macro_f1']:>8}{c['mcc']:>8}{'-':>9}"
            )
    return "\n".join(lines)
