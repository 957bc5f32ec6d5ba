"""Line-delimited JSON record schemas: prediction logs, eval snapshots, pair
manifests. Schema problems surface as SchemaViolation with the 1-based line
number; data files never carry timestamps (those live in replay manifests).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from typing import Iterable, Iterator, Optional

from .pool import Label
from .verdict import UnknownClass, Verdict, parse_first_keyword, parse_strict, sida_binarize

PARSE_MODES = ("strict", "first_keyword", "three_class")


class SchemaViolation(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    benchmark: str
    label: Label
    output: str
    gen_len: Optional[int] = None
    generator: Optional[str] = None
    person_count: Optional[int] = None
    model: Optional[str] = None
    verdict: Optional[Verdict] = None


@dataclass(frozen=True)
class EvalSnapshot:
    step: int
    eval_loss: float
    eval_ba: float
    unique_output_ratio: Optional[float] = None
    top1_template_ratio: Optional[float] = None
    avg_gen_len: Optional[float] = None


def read_jsonl(path: str) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"invalid JSON ({exc.msg})", lineno) from exc
            if not isinstance(obj, dict):
                raise SchemaViolation("record is not an object", lineno)
            yield lineno, obj


def write_jsonl(path: str, objs: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def _require(obj: dict, key: str, types, lineno: int):
    if key not in obj:
        raise SchemaViolation(f"missing field {key!r}", lineno)
    value = obj[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise SchemaViolation(f"field {key!r} has wrong type {type(value).__name__}", lineno)
    return value


def _optional(obj: dict, key: str, types, lineno: int):
    if obj.get(key) is None:
        return None
    return _require(obj, key, types, lineno)


def parse_prediction_obj(obj: dict, lineno: int) -> PredictionRecord:
    label = _require(obj, "label", str, lineno)
    if label not in ("real", "fake"):
        raise SchemaViolation(f"label must be 'real' or 'fake', got {label!r}", lineno)
    return PredictionRecord(
        id=_require(obj, "id", str, lineno),
        benchmark=_require(obj, "benchmark", str, lineno),
        label=label,
        output=_require(obj, "output", str, lineno),
        gen_len=_optional(obj, "gen_len", int, lineno),
        generator=_optional(obj, "generator", str, lineno),
        person_count=_optional(obj, "person_count", int, lineno),
        model=_optional(obj, "model", str, lineno),
    )


def load_prediction_log(path: str) -> list[PredictionRecord]:
    return [parse_prediction_obj(obj, lineno) for lineno, obj in read_jsonl(path)]


def attach_verdicts(
    records: Iterable[PredictionRecord], mode: str = "strict"
) -> list[PredictionRecord]:
    """Parse each record's output under the given mode. Unknown three-class
    strings become unparseable rather than aborting the run."""
    if mode not in PARSE_MODES:
        raise ValueError(f"parse mode must be one of {PARSE_MODES}, got {mode!r}")
    out = []
    for r in records:
        if mode == "strict":
            v = parse_strict(r.output)
        elif mode == "first_keyword":
            v = parse_first_keyword(r.output)
        else:
            try:
                v = sida_binarize(r.output)
            except UnknownClass:
                v = Verdict(value="unparseable", mode="three_class")
        out.append(replace(r, verdict=v))
    return out


def prediction_to_obj(record: PredictionRecord) -> dict:
    obj = asdict(record)
    obj.pop("verdict")
    return {k: v for k, v in obj.items() if v is not None}


def parse_snapshot_obj(obj: dict, lineno: int) -> EvalSnapshot:
    return EvalSnapshot(
        step=_require(obj, "step", int, lineno),
        eval_loss=float(_require(obj, "eval_loss", (int, float), lineno)),
        eval_ba=float(_require(obj, "eval_balanced_accuracy", (int, float), lineno)),
        unique_output_ratio=_optional(obj, "unique_output_ratio", (int, float), lineno),
        top1_template_ratio=_optional(obj, "top1_template_ratio", (int, float), lineno),
        avg_gen_len=_optional(obj, "avg_gen_len", (int, float), lineno),
    )


def load_snapshots(path: str) -> list[EvalSnapshot]:
    """Read snapshots from JSONL, or from a trainer-state JSON export whose
    log_history mixes train and eval entries (eval ones carry the BA key)."""
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            state = json.load(fh)
        history = state.get("log_history")
        if not isinstance(history, list):
            raise SchemaViolation("trainer-state export lacks a log_history list")
        snaps = [
            parse_snapshot_obj(entry, i)
            for i, entry in enumerate(history, start=1)
            if isinstance(entry, dict) and "eval_balanced_accuracy" in entry
        ]
    else:
        snaps = [parse_snapshot_obj(obj, lineno) for lineno, obj in read_jsonl(path)]
    for prev, cur in zip(snaps, snaps[1:]):
        if cur.step <= prev.step:
            raise SchemaViolation(f"steps not strictly increasing at step {cur.step}")
    return snaps


def snapshot_to_obj(snap: EvalSnapshot) -> dict:
    obj = {
        "step": snap.step,
        "eval_loss": snap.eval_loss,
        "eval_balanced_accuracy": snap.eval_ba,
    }
    for key in ("unique_output_ratio", "top1_template_ratio", "avg_gen_len"):
        value = getattr(snap, key)
        if value is not None:
            obj[key] = value
    return obj


def sha256_of(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_replay_manifest(
    out_path: str,
    command: str,
    args: dict,
    inputs: Iterable[str] = (),
    seed: Optional[int] = None,
) -> str:
    """Sidecar recording how an artifact was produced. The only place a
    timestamp is allowed, keeping the artifacts themselves byte-stable."""
    from . import __version__

    manifest = {
        "command": command,
        "args": args,
        "seed": seed,
        "inputs": {p: sha256_of(p) for p in inputs},
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    path = f"{out_path}.manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
