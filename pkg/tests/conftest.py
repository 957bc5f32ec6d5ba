from __future__ import annotations

import re

import pytest

from gazekit.pool import default_pool
from gazekit.records import EvalSnapshot, PredictionRecord
from gazekit.verdict import Verdict

# Reference confusion counts used across metric tests: (tp, fn, tn, fp) with
# the edited class positive.
ORIGIN_COUNTS = (134, 31, 18, 15)
OURS_COUNTS = (151, 14, 17, 16)


@pytest.fixture(scope="session")
def pool():
    return default_pool()


def pytest_runtest_logreport(report):
    """One PASS/FAIL line per acceptance criterion in the run output."""
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    m = re.search(r"::test_c(\d+)_(\w+)", report.nodeid)
    if m is None:
        return
    status = "PASS" if report.passed else "FAIL"
    print(f"\nACCEPTANCE {int(m.group(1)):02d} {status} {m.group(2)}")


def make_record(
    label: str,
    predicted: str,
    idx: int = 0,
    benchmark: str = "interaction",
    generator=None,
    person_count=None,
    model=None,
    gen_len=None,
) -> PredictionRecord:
    """A record whose output strict-parses to `predicted` ('none' stays
    unparseable)."""
    if predicted == "none":
        output = "no verdict here"
    else:
        output = f"This is a {predicted} image."
    return PredictionRecord(
        id=f"{benchmark}-{label}-{idx:05d}",
        benchmark=benchmark,
        label=label,
        output=output,
        gen_len=gen_len,
        generator=generator,
        person_count=person_count,
        model=model,
        verdict=None if predicted == "none" else Verdict(predicted, "strict"),
    )


def records_from_counts(
    tp: int, fn: int, tn: int, fp: int, benchmark: str = "interaction", **kw
) -> list[PredictionRecord]:
    records = []
    for i in range(tp):
        records.append(make_record("fake", "fake", i, benchmark, **kw))
    for i in range(fn):
        records.append(make_record("fake", "real", tp + i, benchmark, **kw))
    for i in range(tn):
        records.append(make_record("real", "real", i, benchmark, **kw))
    for i in range(fp):
        records.append(make_record("real", "fake", tn + i, benchmark, **kw))
    return records


def reference_trace() -> list[EvalSnapshot]:
    """151 snapshots every 50 steps: BA peaks at step 1650 (0.9990), loss
    bottoms out at step 2850 (0.2252), both unique."""
    snaps = []
    for step in range(50, 7551, 50):
        ba = 0.9990 - abs(step - 1650) * 1e-5
        loss = 0.2252 + abs(step - 2850) * 1e-5
        snaps.append(EvalSnapshot(step=step, eval_loss=round(loss, 6), eval_ba=round(ba, 6)))
    return snaps
