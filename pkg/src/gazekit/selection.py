"""Checkpoint choice from eval snapshots: pick peak balanced accuracy, and
report how far it sits from the loss minimum (the two routinely decouple, so
loss-based selection discards usable checkpoints)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .records import EvalSnapshot


class EmptyRun(ValueError):
    pass


def select_checkpoint(snapshots: Sequence[EvalSnapshot]) -> EvalSnapshot:
    """Snapshot with maximal eval_ba; ties go to the earliest step."""
    if not snapshots:
        raise EmptyRun("no snapshots")
    best = snapshots[0]
    for snap in snapshots[1:]:
        if snap.eval_ba > best.eval_ba:
            best = snap
    return best


@dataclass(frozen=True)
class DecouplingReport:
    ba_best_step: int
    ba_best: float
    loss_min_step: int
    loss_min: float

    @property
    def step_gap(self) -> int:
        return abs(self.loss_min_step - self.ba_best_step)


def decoupling_report(snapshots: Sequence[EvalSnapshot]) -> DecouplingReport:
    """Locate the BA peak and the loss minimum (earliest step on ties each)."""
    if not snapshots:
        raise EmptyRun("no snapshots")
    best = select_checkpoint(snapshots)
    loss_min = snapshots[0]
    for snap in snapshots[1:]:
        if snap.eval_loss < loss_min.eval_loss:
            loss_min = snap
    return DecouplingReport(
        ba_best_step=best.step,
        ba_best=best.eval_ba,
        loss_min_step=loss_min.step,
        loss_min=loss_min.eval_loss,
    )
