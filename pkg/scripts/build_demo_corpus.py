#!/usr/bin/env python3
"""Synthesize a demo corpus end to end: annotations -> pair manifest ->
grouped split -> datasheet -> balanced caption assignments.

The bbox geometry is fixed and fictional; the point is to exercise the
pipeline at a controllable scale and leave inspectable artifacts behind.
"""
from __future__ import annotations

import argparse
import os
from random import Random

from gazekit.corpus import (
    GazeAnnotation,
    emit_datasheet,
    expand_to_samples,
    filter_mutual_gaze,
    grouped_stratified_split,
    leakage_check,
    unpack_pairs,
)
from gazekit.geometry import FaceBBox
from gazekit.pool import assign_captions, compose, default_pool
from gazekit.records import write_jsonl, write_replay_manifest


def synthesize_annotations(n_images: int, seed: int) -> list[GazeAnnotation]:
    rng = Random(seed)
    annotations = []
    for i in range(n_images):
        n_pairs = rng.choice((1, 1, 2, 3))
        pairs = []
        for _ in range(n_pairs):
            x0, y0 = rng.randrange(0, 400), rng.randrange(0, 300)
            a = FaceBBox(x0, y0, x0 + rng.randrange(60, 160), y0 + rng.randrange(60, 160))
            x1 = x0 + rng.randrange(180, 320)
            b = FaceBBox(x1, y0, x1 + rng.randrange(60, 160), y0 + rng.randrange(60, 160))
            pairs.append((a, b))
        flag = 1 if rng.random() < 0.27 else 0  # most annotated pairs lack eye contact
        annotations.append(
            GazeAnnotation(image_id=f"demo{i:06d}", annotation_flag=flag,
                           bbox_pairs=tuple(pairs))
        )
    return annotations


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--images", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--captions-per-label", type=int, default=None,
                        help="default: one per train-split sample")
    parser.add_argument("--out-dir", default="demo_corpus")
    args = parser.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    annotations = synthesize_annotations(args.images, args.seed)
    retained = filter_mutual_gaze(annotations)
    pairs = unpack_pairs(retained)
    print(f"{len(annotations)} images -> {len(retained)} with mutual gaze "
          f"-> {len(pairs)} pairs")

    assigned = grouped_stratified_split(pairs, ratios=(8, 1, 1), seed=args.seed)
    leaks = leakage_check(expand_to_samples(assigned))
    assert not leaks, leaks
    pairs_path = os.path.join(args.out_dir, "pairs.jsonl")
    write_jsonl(
        pairs_path,
        (
            {
                "base_id": p.base_id,
                "image_id": p.image_id,
                "bbox_a": [p.bbox_a.x_min, p.bbox_a.y_min, p.bbox_a.x_max, p.bbox_a.y_max],
                "bbox_b": [p.bbox_b.x_min, p.bbox_b.y_min, p.bbox_b.x_max, p.bbox_b.y_max],
                "perturbed_participant": p.perturbed_participant,
                "split": p.split,
            }
            for p in assigned
        ),
    )
    write_replay_manifest(pairs_path, "build_demo_corpus", vars(args), seed=args.seed)

    sheet = emit_datasheet(assigned, image_license="synthetic-demo",
                           pool_license="packaged", sources=("synthesized in-process",))
    print(sheet.as_text())

    n_train = sum(1 for p in assigned if p.split == "train")
    n_captions = args.captions_per_label or n_train
    pool = default_pool()
    assignments = assign_captions(pool, n_per_label=n_captions, seed=args.seed)
    captions_path = os.path.join(args.out_dir, "captions.jsonl")
    write_jsonl(
        captions_path,
        (
            {"label": t.label, "scene": t.scene, "method": t.method,
             "evidence": t.evidence, "conclusion": t.conclusion,
             "text": compose(pool, t).text}
            for t in assignments
        ),
    )
    write_replay_manifest(captions_path, "build_demo_corpus.captions", vars(args),
                          seed=args.seed)
    usage: dict = {}
    for t in assignments:
        usage[t] = usage.get(t, 0) + 1
    print(f"assigned {2 * n_captions} captions over {len(usage)} templates; "
          f"usage counts {sorted(set(usage.values()))}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
