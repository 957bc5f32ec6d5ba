#!/usr/bin/env python3
"""Rebuild the interaction-benchmark reference table from raw confusion
counts and print it, both at full precision and as rendered cells.

Writes a prediction log per model under --out-dir, then scores the logs
through the same path the CLI uses, so the printed table doubles as an
end-to-end smoke test of log IO, verdict parsing, and rendering.
"""
from __future__ import annotations

import argparse
import os

from gazekit.metrics import dissect_delta, score_records
from gazekit.records import (
    PredictionRecord,
    attach_verdicts,
    load_prediction_log,
    prediction_to_obj,
    write_jsonl,
    write_replay_manifest,
)
from gazekit.report import render_score_table

# (tp, fn, tn, fp) with the edited class positive, interaction benchmark
REFERENCE_COUNTS = {
    "origin": (134, 31, 18, 15),
    "tuned": (151, 14, 17, 16),
}


def build_log(model: str, tp: int, fn: int, tn: int, fp: int) -> list[PredictionRecord]:
    records = []

    def add(label: str, predicted: str, count: int):
        for _ in range(count):
            records.append(
                PredictionRecord(
                    id=f"{model}-{len(records):05d}",
                    benchmark="interaction",
                    label=label,
                    output=f"This is a {predicted} image.",
                    model=model,
                )
            )

    add("fake", "fake", tp)
    add("fake", "real", fn)
    add("real", "real", tn)
    add("real", "fake", fp)
    return records


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="reference_report")
    args = parser.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    rows = []
    confusions = {}
    for model, counts in REFERENCE_COUNTS.items():
        path = os.path.join(args.out_dir, f"{model}.jsonl")
        write_jsonl(path, (prediction_to_obj(r) for r in build_log(model, *counts)))
        write_replay_manifest(path, "make_reference_report", {"model": model})
        records = attach_verdicts(load_prediction_log(path), mode="strict")
        score = score_records(records, view="paired")
        rows.append((model, score))
        confusions[model] = score.confusion
        print(f"{model}: BA={score.ba:.4f}  macroF1={score.macro_f1:.4f}  MCC={score.mcc:.4f}")

    print()
    print(render_score_table(rows))
    print()
    delta = dissect_delta(confusions["origin"], confusions["tuned"])
    print("error anatomy, tuned minus origin:")
    for name, value in delta.items():
        print(f"  {name:>11}: {value:+d}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
