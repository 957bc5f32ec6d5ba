#!/usr/bin/env python3
"""Emit the 151-snapshot reference eval trace and run checkpoint selection
over it: BA peaks at step 1650 (0.9990) while loss bottoms at 2850 (0.2252),
so the two selection rules disagree by 1200 steps.
"""
from __future__ import annotations

import argparse
import json

from gazekit.records import EvalSnapshot, snapshot_to_obj, write_jsonl, write_replay_manifest
from gazekit.selection import decoupling_report, select_checkpoint


def reference_trace() -> list[EvalSnapshot]:
    snaps = []
    for step in range(50, 7551, 50):
        ba = 0.9990 - abs(step - 1650) * 1e-5
        loss = 0.2252 + abs(step - 2850) * 1e-5
        snaps.append(EvalSnapshot(step=step, eval_loss=round(loss, 6),
                                  eval_ba=round(ba, 6)))
    return snaps


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="reference_trace.jsonl")
    args = parser.parse_args()

    trace = reference_trace()
    write_jsonl(args.out, (snapshot_to_obj(s) for s in trace))
    write_replay_manifest(args.out, "gen_reference_trace", vars(args))

    best = select_checkpoint(trace)
    rep = decoupling_report(trace)
    print(json.dumps(
        {
            "snapshots": len(trace),
            "selected_step": best.step,
            "eval_ba": best.eval_ba,
            "loss_min_step": rep.loss_min_step,
            "loss_min": rep.loss_min,
            "step_gap": rep.step_gap,
        },
        indent=2,
    ))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
