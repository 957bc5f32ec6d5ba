"""Command-line frontend.

Subcommands cover the pipeline end to end: caption assignment (compose),
corpus splitting (split), eye-band mask emission (mask), edit-locality checks
(verify-pairs), prediction-log scoring and diagnostics (eval), checkpoint
choice (select), and the post-hoc verdict gate (gate). Every artifact write
drops a replay manifest next to it; data files stay timestamp-free.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from typing import Optional

from . import __version__
from .corpus import PairRecord, emit_datasheet, leakage_check
from .diagnostics import (
    CardGate,
    apply_card_gate,
    card_accuracy,
    keyword_family_stats,
    load_fragment_cards,
    load_keyword_families,
    output_word_stats,
    top1_template_ratio,
    unique_output_ratio,
    wrong_pool_report,
)
from .geometry import (
    INPAINT_PROMPT,
    FaceBBox,
    MaskRect,
    eye_region_band,
    flux_resize_dims,
    load_raster,
    pair_integrity,
    rasterize_soft_mask,
    save_mask_png,
)
from .metrics import per_generator_scores, score_records
from .pool import MacroPool, assign_captions, compose, default_pool, load_pool
from .records import (
    PredictionRecord,
    SchemaViolation,
    attach_verdicts,
    load_prediction_log,
    load_snapshots,
    read_jsonl,
    write_jsonl,
    write_replay_manifest,
)
from .report import render_score_table, score_to_dict
from .selection import decoupling_report
from .verdict import effective_counts


def _pool_from(path: Optional[str]) -> MacroPool:
    return load_pool(path) if path else default_pool()


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_compose(args: argparse.Namespace) -> int:
    pool = _pool_from(args.pool)
    assignments = assign_captions(pool, args.n_per_label, args.seed)
    rows: list[dict] = [
        {
            "kind": "header",
            "seed": args.seed,
            "n_per_label": args.n_per_label,
            "cards": len(pool.card_set()),
        }
    ]
    per_label_index: dict[str, int] = {}
    for t in assignments:
        i = per_label_index.get(t.label, 0)
        per_label_index[t.label] = i + 1
        rows.append(
            {
                "sample_id": f"{t.label}-{i:06d}",
                "label": t.label,
                "template": asdict(t),
                "text": compose(pool, t).text,
            }
        )
    write_jsonl(args.out, rows)
    write_replay_manifest(
        args.out, "compose", _arg_dict(args), inputs=[p for p in [args.pool] if p],
        seed=args.seed,
    )
    print(f"wrote {len(assignments)} caption assignments to {args.out}")
    return 0


def _parse_pair_obj(obj: dict, lineno: int) -> PairRecord:
    def bbox(key: str) -> FaceBBox:
        raw = obj.get(key)
        if not isinstance(raw, list) or len(raw) != 4:
            raise SchemaViolation(f"field {key!r} must be a 4-int list", lineno)
        return FaceBBox(*[int(v) for v in raw])

    for key in ("base_id", "image_id"):
        if not isinstance(obj.get(key), str):
            raise SchemaViolation(f"missing or non-string field {key!r}", lineno)
    return PairRecord(
        base_id=obj["base_id"],
        image_id=obj["image_id"],
        bbox_a=bbox("bbox_a"),
        bbox_b=bbox("bbox_b"),
        perturbed_participant=obj.get("perturbed_participant", "A"),
    )


def cmd_split(args: argparse.Namespace) -> int:
    from .corpus import grouped_stratified_split

    pairs = [_parse_pair_obj(obj, lineno) for lineno, obj in read_jsonl(args.pairs)]
    if not pairs:
        raise SchemaViolation(f"no pair records in {args.pairs}")
    ratios = tuple(int(r) for r in args.ratios.split(":"))
    if len(ratios) != 3:
        raise ValueError(f"ratios must look like 8:1:1, got {args.ratios!r}")
    assigned = grouped_stratified_split(pairs, ratios=ratios, seed=args.seed)
    leaks = leakage_check(assigned)
    if leaks:  # unreachable by construction; kept as a hard audit
        raise AssertionError(f"leaking base_ids: {leaks[:5]}")
    write_jsonl(
        args.out,
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
    write_replay_manifest(
        args.out, "split", _arg_dict(args), inputs=[args.pairs], seed=args.seed
    )
    sheet = emit_datasheet(
        assigned,
        image_license=args.image_license,
        pool_license=args.pool_license,
        sources=tuple(args.source or ()),
    )
    if args.datasheet:
        _write_json(args.datasheet, sheet.as_dict())
    print(sheet.as_text())
    return 0


def cmd_mask(args: argparse.Namespace) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    sidecars = []
    n = 0
    for lineno, obj in read_jsonl(args.faces):
        for key in ("image_id", "width", "height", "bbox"):
            if key not in obj:
                raise SchemaViolation(f"missing field {key!r}", lineno)
        bbox = FaceBBox(*[int(v) for v in obj["bbox"]])
        width, height = int(obj["width"]), int(obj["height"])
        rect = eye_region_band(bbox, image_w=width, image_h=height)
        mask = rasterize_soft_mask(rect, image_w=width, image_h=height,
                                   blur_radius=args.blur_radius)
        png_path = os.path.join(args.out_dir, f"{obj['image_id']}.png")
        save_mask_png(mask, png_path)
        new_w, new_h = flux_resize_dims(width, height)
        sidecars.append(
            {
                "image_id": obj["image_id"],
                "bbox": [bbox.x_min, bbox.y_min, bbox.x_max, bbox.y_max],
                "rect": [rect.row_lo, rect.row_hi, rect.col_lo, rect.col_hi],
                "blur_radius": args.blur_radius,
                "prompt_text": INPAINT_PROMPT,
                "new_w": new_w,
                "new_h": new_h,
            }
        )
        n += 1
    sidecar_path = os.path.join(args.out_dir, "masks.jsonl")
    write_jsonl(sidecar_path, sidecars)
    write_replay_manifest(sidecar_path, "mask", _arg_dict(args), inputs=[args.faces])
    print(f"wrote {n} masks to {args.out_dir}")
    return 0


def cmd_verify_pairs(args: argparse.Namespace) -> int:
    real = load_raster(args.real)
    fake = load_raster(args.fake)
    if args.rect:
        rect = MaskRect(*args.rect)
    else:
        h, w = real.shape[:2]
        rect = eye_region_band(FaceBBox(*args.bbox), image_w=w, image_h=h)
    report = pair_integrity(real, fake, rect,
                            dilation=args.dilation, tolerance=args.tolerance)
    print(json.dumps(asdict(report), sort_keys=True))
    return 0 if report.passed else 1


def _load_logs(paths: list[str], parse_mode: str) -> list[PredictionRecord]:
    records: list[PredictionRecord] = []
    for path in paths:
        loaded = load_prediction_log(path)
        if not loaded:
            raise SchemaViolation(f"empty prediction log: {path}")
        records.extend(loaded)
    return attach_verdicts(records, mode=parse_mode)


def _diagnostics_section(records: list[PredictionRecord], pool: MacroPool,
                         gen_cap: int) -> dict:
    outputs = [r.output for r in records]
    section: dict = {"unique_output_ratio": unique_output_ratio(outputs)}
    try:
        conc = top1_template_ratio(outputs, pool)
        section["top1_template_ratio"] = conc.ratio
        section["template_matches"] = conc.n_matched
        section["template_excluded"] = conc.n_excluded
    except Exception:
        section["top1_template_ratio"] = None
    cap = gen_cap if all(r.gen_len is not None for r in records) else None
    stats = output_word_stats(records, cap=cap)
    section["word_stats"] = asdict(stats)
    extra = load_fragment_cards()
    section["cards"] = [asdict(c) for c in card_accuracy(records, pool, extra)]
    fam = keyword_family_stats(records, load_keyword_families())
    section["keyword_families"] = {
        "frequencies": fam.frequencies,
        "co_occurrence": {f"{a}&{b}": v for (a, b), v in fam.co_occurrence.items()},
    }
    wrongs = wrong_pool_report(records, pool, extra)
    section["error_buckets"] = {
        "wrong_real": [asdict(b) for b in wrongs.wrong_real],
        "wrong_fake": [asdict(b) for b in wrongs.wrong_fake],
        "n_wrong_real": wrongs.n_wrong_real,
        "n_wrong_fake": wrongs.n_wrong_fake,
    }
    return section


def cmd_eval(args: argparse.Namespace) -> int:
    records = _load_logs(args.log, args.parse_mode)
    groups: dict[tuple[str, str], list[PredictionRecord]] = {}
    for r in records:
        groups.setdefault((r.model or "model", r.benchmark), []).append(r)
    report: dict = {"parse_mode": args.parse_mode, "models": {}}
    table_rows = []
    for (model, benchmark) in sorted(groups):
        batch = groups[(model, benchmark)]
        counts = effective_counts(batch)
        score = score_records(batch, view=args.view)
        entry = score_to_dict(score)
        entry["n_initial"] = counts.n_initial
        entry["failure_rate"] = counts.failure_rate
        fakes = [r for r in batch if r.label == "fake"]
        if score.view == "paired" and fakes and all(r.generator for r in fakes):
            entry["per_generator"] = {
                g: score_to_dict(s) for g, s in per_generator_scores(batch).items()
            }
        report["models"].setdefault(model, {})[benchmark] = entry
        table_rows.append((model, score))
    if args.pool_diagnostics:
        pool = _pool_from(args.pool)
        report["diagnostics"] = _diagnostics_section(records, pool, args.gen_cap)
    os.makedirs(args.out_dir, exist_ok=True)
    json_path = os.path.join(args.out_dir, "scores.json")
    _write_json(json_path, report)
    table = render_score_table(table_rows)
    with open(os.path.join(args.out_dir, "scores.txt"), "w", encoding="utf-8") as fh:
        fh.write(table + "\n")
    write_replay_manifest(json_path, "eval", _arg_dict(args), inputs=args.log)
    print(table)
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    snapshots = load_snapshots(args.snapshots)
    rep = decoupling_report(snapshots)
    out = {
        "selected_step": rep.ba_best_step,
        "eval_ba": rep.ba_best,
        "decoupling": {
            "ba_best_step": rep.ba_best_step,
            "ba_best": rep.ba_best,
            "loss_min_step": rep.loss_min_step,
            "loss_min": rep.loss_min,
            "step_gap": rep.step_gap,
        },
    }
    if args.out:
        _write_json(args.out, out)
        write_replay_manifest(args.out, "select", _arg_dict(args), inputs=[args.snapshots])
    print(json.dumps(out, sort_keys=True))
    return 0


def cmd_gate(args: argparse.Namespace) -> int:
    records = _load_logs(args.log, args.parse_mode)
    pool = _pool_from(args.pool)
    gate = CardGate(card=args.card, require_person_count=args.person_count)
    rep = apply_card_gate(records, gate, pool, load_fragment_cards())
    out = {
        "card": gate.card,
        "require_person_count": gate.require_person_count,
        "flipped": rep.flipped,
        "ba_before": rep.ba_before,
        "ba_after": rep.ba_after,
        "delta_ba": rep.delta_ba,
        "confusion_before": asdict(rep.confusion_before),
        "confusion_after": asdict(rep.confusion_after),
    }
    if args.out:
        _write_json(args.out, out)
        write_replay_manifest(args.out, "gate", _arg_dict(args), inputs=args.log)
    print(json.dumps(out, sort_keys=True))
    return 0


def _arg_dict(args: argparse.Namespace) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func" and not callable(v)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gazekit")
    parser.add_argument("--version", action="version", version=f"gazekit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compose", help="assign balanced captions to a labeled corpus")
    p.add_argument("--pool", default=None, help="pool JSON (default: packaged pool)")
    p.add_argument("--n-per-label", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("split", help="grouped train/val/test assignment over pairs")
    p.add_argument("--pairs", required=True, help="pair manifest JSONL")
    p.add_argument("--ratios", default="8:1:1")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--datasheet", default=None, help="also write a datasheet JSON")
    p.add_argument("--image-license", default="unspecified")
    p.add_argument("--pool-license", default="unspecified")
    p.add_argument("--source", action="append", default=None)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("mask", help="emit eye-band PNG masks plus sidecar records")
    p.add_argument("--faces", required=True, help="JSONL of {image_id,width,height,bbox}")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--blur-radius", type=int, default=3)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("verify-pairs", help="check an edit stayed inside its band")
    p.add_argument("--real", required=True)
    p.add_argument("--fake", required=True)
    p.add_argument("--bbox", type=int, nargs=4, metavar=("X0", "Y0", "X1", "Y1"))
    p.add_argument("--rect", type=int, nargs=4, metavar=("R0", "R1", "C0", "C1"))
    p.add_argument("--dilation", type=int, default=9)
    p.add_argument("--tolerance", type=int, default=2)
    p.set_defaults(func=cmd_verify_pairs)

    p = sub.add_parser("eval", help="score prediction logs and emit reports")
    p.add_argument("--log", action="append", required=True, help="prediction JSONL (repeatable)")
    p.add_argument("--parse-mode", choices=("strict", "first_keyword", "three_class"),
                   default="strict")
    p.add_argument("--view", choices=("auto", "paired", "fake_only"), default="auto")
    p.add_argument("--pool", default=None)
    p.add_argument("--pool-diagnostics", action="store_true",
                   help="add output-collapse and card diagnostics to the report")
    p.add_argument("--gen-cap", type=int, default=64)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("select", help="pick the checkpoint with peak eval BA")
    p.add_argument("--snapshots", required=True,
                   help="snapshot JSONL or trainer-state JSON export")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("gate", help="flip real verdicts where a card gate matches")
    p.add_argument("--log", action="append", required=True)
    p.add_argument("--card", required=True)
    p.add_argument("--person-count", type=int, default=None)
    p.add_argument("--parse-mode", choices=("strict", "first_keyword", "three_class"),
                   default="strict")
    p.add_argument("--pool", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
