"""Structured operator-intent grammar and the Intent model.

Grammar (deterministic, case-insensitive):

    <verb> <kpi> [by <delta>[%|<unit>]] [in slice <name>]
    <verb> slice <name> by <count> rbg[s]

The second form is the slice-boost intent carrying (target class, extra
RBGs). Unknown tokens are rejected with the character position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class IntentParseError(ValueError):
    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at position {position})")
        self.position = position


INTENT_TYPES = ("energy", "throughput", "delay", "reliability", "slice-boost")

# KPI direction: +1 maximize, -1 minimize.
KPI_DIRECTION = {"throughput": +1, "delay": -1, "reliability": -1, "energy": +1}

# Metric name used in goal tokens / KPI snapshots per intent type.
INTENT_METRIC = {
    "throughput": "throughput",
    "delay": "latency",
    "reliability": "loss",
    "energy": "energy_efficiency",
}

POSITIVE_VERBS = ("increase", "boost", "improve", "raise", "maximize")
NEGATIVE_VERBS = ("reduce", "decrease", "lower", "minimize")

# Alias -> candidate intent types; multi-candidate aliases are ambiguous.
KPI_ALIASES: dict[str, tuple[str, ...]] = {
    "throughput": ("throughput",),
    "tput": ("throughput",),
    "delay": ("delay",),
    "latency": ("delay",),
    "reliability": ("reliability",),
    "loss": ("reliability",),
    "packet-loss": ("reliability",),
    "drops": ("reliability",),
    "energy": ("energy",),
    "energy-efficiency": ("energy",),
    "ee": ("energy",),
    "power": ("energy",),
    "efficiency": ("energy",),
    "quality": ("delay", "reliability"),
    "performance": ("throughput", "delay"),
}

SLICE_NAMES = {"embb": "eMBB", "urllc": "URLLC", "be": "BE"}


@dataclass(frozen=True)
class Intent:
    """Operator objective in KPI form or slice-boost form."""

    intent_type: str
    raw_text: str
    origin: str = "human"
    metric: str | None = None        # KPI form
    delta: float | None = None       # signed, percent when is_percent
    is_percent: bool = True
    slice_name: str | None = None
    target_class: str | None = None  # slice-boost form
    delta_rbgs: int | None = None

    def __post_init__(self) -> None:
        if self.intent_type not in INTENT_TYPES:
            raise IntentParseError(f"unknown intent type {self.intent_type!r}")
        kpi_form = self.metric is not None and self.delta is not None
        boost_form = self.target_class is not None and self.delta_rbgs is not None
        if kpi_form == boost_form:
            raise IntentParseError("exactly one of KPI form or slice-boost form must be set")

    @property
    def is_slice_boost(self) -> bool:
        return self.intent_type == "slice-boost"

    @property
    def direction(self) -> int:
        if self.is_slice_boost:
            return +1
        intent_for_metric = {v: k for k, v in INTENT_METRIC.items()}[self.metric]
        return KPI_DIRECTION[intent_for_metric]


_TOKEN_RE = re.compile(r"\S+")


def parse_intent(text: str, origin: str = "human") -> Intent:
    """Parse one grammar string into an Intent."""
    if not text or not text.strip():
        raise IntentParseError("empty intent", 0)
    tokens = [(m.group(0).lower(), m.start()) for m in _TOKEN_RE.finditer(text)]
    idx = 0

    def peek() -> tuple[str, int]:
        return tokens[idx] if idx < len(tokens) else ("", len(text))

    def take() -> tuple[str, int]:
        nonlocal idx
        tok = peek()
        idx += 1
        return tok

    verb, pos = take()
    if verb in POSITIVE_VERBS:
        sign = +1
    elif verb in NEGATIVE_VERBS:
        sign = -1
    else:
        raise IntentParseError(f"unknown verb {verb!r}", pos)

    head, pos = take()
    if head == "slice":
        return _parse_slice_boost(text, tokens, idx - 1, take, peek, origin)
    if head not in KPI_ALIASES:
        raise IntentParseError(f"unknown KPI {head!r}", pos)
    candidates = KPI_ALIASES[head]
    if len(candidates) > 1:
        raise IntentParseError(
            f"ambiguous KPI alias {head!r}: could be {', '.join(sorted(candidates))}", pos
        )
    intent_type = candidates[0]

    delta = 10.0
    is_percent = True
    slice_name = None
    while idx < len(tokens):
        word, pos = take()
        if word == "by":
            value_tok, vpos = take()
            m = re.fullmatch(r"(\d+(?:\.\d+)?)(%|ms|mbps|bits)?", value_tok)
            if not m:
                raise IntentParseError(f"bad delta {value_tok!r}", vpos)
            delta = float(m.group(1))
            is_percent = m.group(2) in ("%", None)
        elif word == "in":
            kw, kpos = take()
            if kw != "slice":
                raise IntentParseError(f"expected 'slice', got {kw!r}", kpos)
            name_tok, npos = take()
            if name_tok not in SLICE_NAMES:
                raise IntentParseError(f"unknown slice {name_tok!r}", npos)
            slice_name = SLICE_NAMES[name_tok]
        else:
            raise IntentParseError(f"unexpected token {word!r}", pos)

    return Intent(
        intent_type=intent_type,
        raw_text=text,
        origin=origin,
        metric=INTENT_METRIC[intent_type],
        delta=sign * delta,
        is_percent=is_percent,
        slice_name=slice_name,
    )


def _parse_slice_boost(text, tokens, slice_idx, take, peek, origin) -> Intent:
    name_tok, npos = take()
    if name_tok not in SLICE_NAMES:
        raise IntentParseError(f"unknown slice {name_tok!r}", npos)
    by, bpos = take()
    if by != "by":
        raise IntentParseError(f"expected 'by', got {by!r}", bpos)
    count_tok, cpos = take()
    m = re.fullmatch(r"(\d+)(rbgs?)?", count_tok)
    if not m:
        raise IntentParseError(f"bad RBG count {count_tok!r}", cpos)
    unit, upos = peek()
    if unit in ("rbg", "rbgs"):
        take()
    elif unit:
        raise IntentParseError(f"unexpected token {unit!r}", upos)
    return Intent(
        intent_type="slice-boost",
        raw_text=text,
        origin=origin,
        target_class=SLICE_NAMES[name_tok],
        delta_rbgs=int(m.group(1)),
    )
