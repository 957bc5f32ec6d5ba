"""Verdict extraction from raw model outputs.

Three parsers: a strict anchored prefix match on the fixed decision sentence,
a lenient earliest-whole-word fallback for free-form baselines, and a
three-class-to-binary adapter. Unparseable outputs are flagged and excluded
downstream, never coerced to a class.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Literal, Union

VerdictValue = Literal["real", "fake", "unparseable"]

_STRICT_RE = re.compile(r"This is a (real|fake) image\.")
_STRICT_WS_RE = re.compile(r"\s*This is a (real|fake) image\.")
_KEYWORD_RE = re.compile(r"\b(real|fake)\b", re.IGNORECASE)

# Three-class vocabulary of the compared detector, folded to binary: only the
# pristine class counts as real.
_THREE_CLASS = {
    "real": "real",
    "full_synthetic": "fake",
    "fullsynthetic": "fake",
    "full synthetic": "fake",
    "tampered": "fake",
}


class UnknownClass(ValueError):
    pass


@dataclass(frozen=True)
class Verdict:
    value: VerdictValue
    mode: str

    @property
    def parseable(self) -> bool:
        return self.value != "unparseable"


def parse_strict(raw: str, allow_leading_ws: bool = False) -> Verdict:
    """Case-sensitive anchored match of the decision sentence at the start of
    the output. The lenient toggle tolerates leading whitespace only."""
    pattern = _STRICT_WS_RE if allow_leading_ws else _STRICT_RE
    m = pattern.match(raw)
    value: VerdictValue = m.group(1) if m else "unparseable"  # type: ignore[assignment]
    return Verdict(value=value, mode="strict")


def parse_first_keyword(raw: str) -> Verdict:
    """Earliest whole-word 'real' or 'fake', case-insensitive."""
    m = _KEYWORD_RE.search(raw)
    value: VerdictValue = m.group(1).lower() if m else "unparseable"  # type: ignore[assignment]
    return Verdict(value=value, mode="first_keyword")


def sida_binarize(class3: str) -> Verdict:
    """Fold a real/full-synthetic/tampered prediction to real/fake."""
    key = class3.strip().lower()
    if key not in _THREE_CLASS:
        raise UnknownClass(f"unknown three-class label: {class3!r}")
    return Verdict(value=_THREE_CLASS[key], mode="three_class")


@dataclass(frozen=True)
class EffectiveCount:
    n_initial: int
    n_effective: int

    @property
    def failure_rate(self) -> float:
        if self.n_initial == 0:
            return 0.0
        return (self.n_initial - self.n_effective) / self.n_initial


def effective_counts(records: Iterable[Union[Verdict, object]]) -> EffectiveCount:
    """Initial vs parseable record counts. Accepts Verdicts or records
    carrying a .verdict attribute."""
    n0 = 0
    n_eff = 0
    for r in records:
        v = r if isinstance(r, Verdict) else getattr(r, "verdict")
        n0 += 1
        if v is not None and v.parseable:
            n_eff += 1
    return EffectiveCount(n_initial=n0, n_effective=n_eff)
