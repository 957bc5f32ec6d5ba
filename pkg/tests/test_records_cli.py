from __future__ import annotations

import hashlib
import json
from dataclasses import replace

import numpy as np
import pytest
from PIL import Image

from conftest import ORIGIN_COUNTS, OURS_COUNTS, records_from_counts, reference_trace
from gazekit.cli import main
from gazekit.diagnostics import CardGate, apply_card_gate, load_fragment_cards
from gazekit.geometry import INPAINT_PROMPT, FaceBBox, eye_region_band, rasterize_soft_mask
from gazekit.pool import TemplateId, compose
from gazekit.records import (
    EvalSnapshot,
    SchemaViolation,
    attach_verdicts,
    load_prediction_log,
    load_snapshots,
    parse_prediction_obj,
    prediction_to_obj,
    snapshot_to_obj,
    write_jsonl,
    write_replay_manifest,
)


# ------------------------------------------------------------------ records


def test_read_jsonl_reports_line_numbers(tmp_path):
    path = tmp_path / "log.jsonl"
    path.write_text(
        '{"id":"a","benchmark":"b","label":"real","output":"x"}\n'
        "\n"
        "{broken\n"
    )
    with pytest.raises(SchemaViolation) as err:
        load_prediction_log(str(path))
    assert err.value.line == 3
    assert str(err.value).startswith("line 3:")


def test_read_jsonl_rejects_non_objects(tmp_path):
    path = tmp_path / "log.jsonl"
    path.write_text('{"id":"a","benchmark":"b","label":"real","output":"x"}\n[1,2]\n')
    with pytest.raises(SchemaViolation) as err:
        load_prediction_log(str(path))
    assert err.value.line == 2


@pytest.mark.parametrize(
    "obj,fragment",
    [
        ({"benchmark": "b", "label": "real", "output": "x"}, "id"),
        ({"id": "a", "benchmark": "b", "label": "weird", "output": "x"}, "label"),
        ({"id": "a", "benchmark": "b", "label": "real", "output": 3}, "output"),
        ({"id": "a", "benchmark": "b", "label": "real", "output": "x", "gen_len": True}, "gen_len"),
        ({"id": "a", "benchmark": "b", "label": "real", "output": "x", "gen_len": "9"}, "gen_len"),
    ],
)
def test_prediction_schema_violations(obj, fragment):
    with pytest.raises(SchemaViolation) as err:
        parse_prediction_obj(obj, 7)
    assert err.value.line == 7
    assert fragment in str(err.value)


def test_prediction_round_trip(tmp_path):
    records = records_from_counts(3, 1, 2, 1)
    records[0] = replace(records[0], gen_len=12, generator="genA", person_count=2)
    path = tmp_path / "log.jsonl"
    write_jsonl(str(path), (prediction_to_obj(r) for r in records))
    loaded = load_prediction_log(str(path))
    assert [replace(r, verdict=None) for r in records] == loaded
    # optional absent fields come back as None, never as empty strings
    assert loaded[1].generator is None and loaded[1].gen_len is None


def test_attach_verdicts_modes():
    records = [replace(r, verdict=None) for r in records_from_counts(1, 1, 1, 0)]
    strict = attach_verdicts(records, mode="strict")
    assert [r.verdict.value for r in strict] == ["fake", "real", "real"]
    keyword = attach_verdicts(
        [replace(records[0], output="clearly FAKE imagery")], mode="first_keyword"
    )
    assert keyword[0].verdict.value == "fake"
    three = attach_verdicts(
        [
            replace(records[0], output="tampered"),
            replace(records[0], output="real"),
            replace(records[0], output="no such class"),
        ],
        mode="three_class",
    )
    assert [r.verdict.value for r in three] == ["fake", "real", "unparseable"]
    with pytest.raises(ValueError):
        attach_verdicts(records, mode="lenient")


def test_snapshot_round_trip_and_ordering(tmp_path):
    trace = reference_trace()
    path = tmp_path / "snaps.jsonl"
    write_jsonl(str(path), (snapshot_to_obj(s) for s in trace))
    assert load_snapshots(str(path)) == trace

    bad = tmp_path / "bad.jsonl"
    write_jsonl(str(bad), [snapshot_to_obj(trace[1]), snapshot_to_obj(trace[0])])
    with pytest.raises(SchemaViolation):
        load_snapshots(str(bad))


def test_snapshot_optional_diagnostics(tmp_path):
    snap = EvalSnapshot(step=50, eval_loss=1.0, eval_ba=0.5,
                        unique_output_ratio=0.25, avg_gen_len=40.0)
    path = tmp_path / "snaps.jsonl"
    write_jsonl(str(path), [snapshot_to_obj(snap)])
    (loaded,) = load_snapshots(str(path))
    assert loaded == snap
    obj = snapshot_to_obj(snap)
    assert "top1_template_ratio" not in obj  # unset extras stay absent


def test_trainer_state_export(tmp_path):
    history = []
    for snap in reference_trace():
        history.append({"step": snap.step - 1, "loss": 0.5, "learning_rate": 1e-4})
        history.append(snapshot_to_obj(snap))
    path = tmp_path / "trainer_state.json"
    path.write_text(json.dumps({"global_step": 7550, "log_history": history}))
    snaps = load_snapshots(str(path))
    assert snaps == reference_trace()

    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({"global_step": 0}))
    with pytest.raises(SchemaViolation):
        load_snapshots(str(empty))


def test_replay_manifest(tmp_path):
    artifact = tmp_path / "out.jsonl"
    artifact.write_text('{"a":1}\n')
    inp = tmp_path / "in.jsonl"
    inp.write_text("payload\n")
    manifest_path = write_replay_manifest(
        str(artifact), "compose", {"seed": 5}, inputs=[str(inp)], seed=5
    )
    assert manifest_path == str(artifact) + ".manifest.json"
    manifest = json.loads(open(manifest_path).read())
    expected = hashlib.sha256(b"payload\n").hexdigest()
    assert manifest["inputs"][str(inp)] == expected
    assert manifest["command"] == "compose"
    assert manifest["seed"] == 5
    assert "created_utc" in manifest and "version" in manifest
    # the artifact itself stays timestamp-free
    assert "created" not in artifact.read_text()


def test_schema_violation_without_line():
    err = SchemaViolation("empty log")
    assert err.line is None
    assert str(err) == "empty log"


# ---------------------------------------------------------------------- CLI


def run_cli(*argv) -> int:
    return main(list(argv))


def test_cli_compose_deterministic(tmp_path, capsys):
    out_a, out_b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run_cli("compose", "--n-per-label", "700", "--seed", "11", "--out", str(out_a)) == 0
    assert run_cli("compose", "--n-per-label", "700", "--seed", "11", "--out", str(out_b)) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    lines = out_a.read_text().splitlines()
    header = json.loads(lines[0])
    assert header == {"kind": "header", "seed": 11, "n_per_label": 700, "cards": 20}
    assert len(lines) == 1 + 1400
    row = json.loads(lines[1])
    assert set(row) == {"sample_id", "label", "template", "text"}
    assert row["text"].startswith("This is a ")
    assert (tmp_path / "a.jsonl.manifest.json").exists()

    out_c = tmp_path / "c.jsonl"
    assert run_cli("compose", "--n-per-label", "700", "--seed", "12", "--out", str(out_c)) == 0
    assert out_a.read_bytes() != out_c.read_bytes()
    capsys.readouterr()


def make_pairs_file(path, n=20):
    rows = []
    for i in range(n):
        rows.append(
            {
                "base_id": f"img{i:04d}#p0",
                "image_id": f"img{i:04d}",
                "bbox_a": [10, 10, 110, 120],
                "bbox_b": [200, 10, 300, 120],
            }
        )
    write_jsonl(str(path), rows)


def test_cli_split(tmp_path, capsys):
    pairs_path = tmp_path / "pairs.jsonl"
    make_pairs_file(pairs_path, n=20)
    out = tmp_path / "assigned.jsonl"
    sheet_path = tmp_path / "datasheet.json"
    code = run_cli(
        "split", "--pairs", str(pairs_path), "--out", str(out),
        "--datasheet", str(sheet_path), "--seed", "42",
        "--image-license", "research-only", "--source", "corpus-v1",
    )
    assert code == 0
    rows = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(rows) == 20
    counts = {name: sum(1 for r in rows if r["split"] == name)
              for name in ("train", "val", "test")}
    assert counts == {"train": 16, "val": 2, "test": 2}
    sheet = json.loads(sheet_path.read_text())
    assert sheet["rows"]["total"] == {"pairs": 20, "real": 20, "fake": 20, "total": 40}
    assert sheet["image_license"] == "research-only"
    assert sheet["sources"] == ["corpus-v1"]
    text = capsys.readouterr().out
    assert "train" in text and "16" in text

    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"base_id":"x#p0","image_id":"x","bbox_a":[1,2,3],"bbox_b":[0,0,5,5]}\n')
    assert run_cli("split", "--pairs", str(bad), "--out", str(out)) == 2
    assert "line 1" in capsys.readouterr().err


def test_cli_mask(tmp_path, capsys):
    faces = tmp_path / "faces.jsonl"
    write_jsonl(
        str(faces),
        [
            {"image_id": "face_a", "width": 640, "height": 480, "bbox": [100, 100, 300, 300]},
            {"image_id": "face_b", "width": 1920, "height": 1080, "bbox": [500, 200, 900, 700]},
        ],
    )
    out_dir = tmp_path / "masks"
    assert run_cli("mask", "--faces", str(faces), "--out-dir", str(out_dir)) == 0
    png = np.asarray(Image.open(out_dir / "face_a.png"))
    rect = eye_region_band(FaceBBox(100, 100, 300, 300), image_w=640, image_h=480)
    expected = rasterize_soft_mask(rect, image_w=640, image_h=480, blur_radius=3)
    assert png.shape == (480, 640)
    assert np.array_equal(png, expected)
    sidecars = [json.loads(l) for l in (out_dir / "masks.jsonl").read_text().splitlines()]
    assert [s["image_id"] for s in sidecars] == ["face_a", "face_b"]
    assert sidecars[0]["prompt_text"] == INPAINT_PROMPT
    assert sidecars[0]["rect"] == [rect.row_lo, rect.row_hi, rect.col_lo, rect.col_hi]
    assert (sidecars[1]["new_w"], sidecars[1]["new_h"]) == (1024, 576)
    assert (out_dir / "masks.jsonl.manifest.json").exists()
    capsys.readouterr()


def write_png(path, arr):
    Image.fromarray(arr.astype(np.uint8), mode="RGB").save(path, format="PNG")


def test_cli_verify_pairs(tmp_path, capsys):
    rng = np.random.default_rng(4)
    real = rng.integers(0, 256, size=(60, 80, 3), dtype=np.uint8)
    inside = real.copy()
    inside[25:30, 20:40] = 0  # inside the declared rect
    outside = real.copy()
    outside[2, 2, 0] = np.uint8((int(real[2, 2, 0]) + 120) % 256)
    real_path, inside_path, outside_path = (
        tmp_path / "real.png", tmp_path / "inside.png", tmp_path / "outside.png",
    )
    write_png(real_path, real)
    write_png(inside_path, inside)
    write_png(outside_path, outside)

    code = run_cli(
        "verify-pairs", "--real", str(real_path), "--fake", str(inside_path),
        "--rect", "20", "35", "15", "45",
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True and report["violating_pixel_count"] == 0

    code = run_cli(
        "verify-pairs", "--real", str(real_path), "--fake", str(outside_path),
        "--rect", "20", "35", "15", "45",
    )
    assert code == 1
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is False
    assert report["violating_pixel_count"] == 1


def eval_log_records():
    records = records_from_counts(*OURS_COUNTS, benchmark="interaction")
    records += [
        replace(r, generator=("genX" if i % 2 else "genY") if r.label == "fake" else None)
        for i, r in enumerate(records_from_counts(*ORIGIN_COUNTS, benchmark="person"))
    ]
    records += [
        replace(records_from_counts(0, 1, 0, 0)[0], id="junk-1", output="no verdict"),
        replace(records_from_counts(0, 0, 0, 1)[0], id="junk-2", output="hmm"),
    ]
    return records


def test_cli_eval(tmp_path, capsys):
    log = tmp_path / "preds.jsonl"
    write_jsonl(str(log), (prediction_to_obj(r) for r in eval_log_records()))
    out_dir = tmp_path / "report"
    assert run_cli("eval", "--log", str(log), "--out-dir", str(out_dir)) == 0
    scores = json.loads((out_dir / "scores.json").read_text())
    interaction = scores["models"]["model"]["interaction"]
    assert interaction["ba"] == pytest.approx(100 * (151 / 165 + 17 / 33) / 2)
    assert interaction["n_eff"] == 198
    assert interaction["n_initial"] == 200
    assert interaction["failure_rate"] == pytest.approx(2 / 200)
    person = scores["models"]["model"]["person"]
    assert set(person["per_generator"]) == {"genX", "genY"}
    table = (out_dir / "scores.txt").read_text()
    assert "71.5" in table and "72.0" in table and "44.1" in table
    assert "mean" in table  # two paired benchmarks for one model
    assert (out_dir / "scores.json.manifest.json").exists()
    capsys.readouterr()

    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert run_cli("eval", "--log", str(empty), "--out-dir", str(out_dir)) == 2
    assert "empty prediction log" in capsys.readouterr().err


def test_cli_eval_merges_logs_and_diagnostics(tmp_path, capsys):
    records = eval_log_records()
    log_a, log_b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_jsonl(str(log_a), (prediction_to_obj(r) for r in records[:100]))
    write_jsonl(str(log_b), (prediction_to_obj(r) for r in records[100:]))
    out_dir = tmp_path / "report"
    code = run_cli(
        "eval", "--log", str(log_a), "--log", str(log_b),
        "--out-dir", str(out_dir), "--pool-diagnostics",
    )
    assert code == 0
    scores = json.loads((out_dir / "scores.json").read_text())
    assert scores["models"]["model"]["interaction"]["n_initial"] == 200
    diag = scores["diagnostics"]
    assert 0 < diag["unique_output_ratio"] <= 1
    assert "word_stats" in diag and "error_buckets" in diag
    capsys.readouterr()


def test_cli_select(tmp_path, capsys):
    snaps = tmp_path / "snaps.jsonl"
    write_jsonl(str(snaps), (snapshot_to_obj(s) for s in reference_trace()))
    out = tmp_path / "choice.json"
    assert run_cli("select", "--snapshots", str(snaps), "--out", str(out)) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["selected_step"] == 1650
    assert printed["decoupling"]["loss_min_step"] == 2850
    assert printed["decoupling"]["step_gap"] == 1200
    assert json.loads(out.read_text()) == printed
    assert (tmp_path / "choice.json.manifest.json").exists()


def test_cli_gate(tmp_path, capsys, pool):
    card = pool.cards[pool.scene[0]]
    records = []
    for i in range(6):  # fakes called real, carded: gate should flip these
        records.append(
            replace(
                records_from_counts(0, 1, 0, 0)[0],
                id=f"g{i}", output=compose(pool, TemplateId("real", 0, 0, 0, 0)).text,
            )
        )
    records += records_from_counts(10, 0, 8, 1, benchmark="interaction")
    log = tmp_path / "preds.jsonl"
    write_jsonl(str(log), (prediction_to_obj(r) for r in records))
    out = tmp_path / "gate.json"
    code = run_cli("gate", "--log", str(log), "--card", card, "--out", str(out))
    assert code == 0
    printed = json.loads(capsys.readouterr().out)
    expected = apply_card_gate(
        attach_verdicts(load_prediction_log(str(log))),
        CardGate(card=card),
        pool,
        load_fragment_cards(),
    )
    assert printed["flipped"] == expected.flipped == 6
    assert printed["ba_after"] == pytest.approx(expected.ba_after)
    assert printed["confusion_after"]["tp"] == expected.confusion_after.tp
    assert json.loads(out.read_text())["delta_ba"] == pytest.approx(expected.delta_ba)


def test_cli_error_exit_codes(tmp_path, capsys):
    assert run_cli("eval", "--log", str(tmp_path / "missing.jsonl"),
                   "--out-dir", str(tmp_path)) == 2
    assert "error:" in capsys.readouterr().err
    snaps = tmp_path / "snaps.jsonl"
    snaps.write_text('{"step": 1, "eval_loss": "oops", "eval_balanced_accuracy": 0.5}\n')
    assert run_cli("select", "--snapshots", str(snaps)) == 2
    assert "line 1" in capsys.readouterr().err
