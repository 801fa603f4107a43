"""Keep only the log lines worth paying tokens for.

gNB output is filtered by terminal color (green, yellow and red survive);
every other pod is filtered by its level tag (``[info]`` and ``[warn]``
survive).
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Iterable, Sequence, Union

from .model import ExperimentSnapshot, LogLine, Pod, render_log, sgr_color, strip_sgr

KEPT_COLORS = frozenset({"green", "yellow", "red"})
KEPT_LEVELS = frozenset({"info", "warn"})
CHARS_PER_TOKEN = 4


def filter_gnb(lines: Union[Sequence[LogLine], str]) -> list[LogLine]:
    """Colored gNB lines only. Raw text is split into lines and colors are read from ANSI SGR codes."""
    if isinstance(lines, str):
        raw = lines.split("\n")
        if raw and raw[-1] == "":
            raw.pop()
        lines = [_raw_gnb_line(text, i) for i, text in enumerate(raw)]
    return [ln for ln in lines if ln.color in KEPT_COLORS]


def _raw_gnb_line(raw: str, seq: int) -> LogLine:
    # stray ESC bytes from malformed sequences are dropped, leaving the line uncolored
    text = strip_sgr(raw).replace("\x1b", "").replace("\r", "")
    return LogLine(Pod.GNB, "unleveled", text, seq, sgr_color(raw))


def filter_tagged(lines: Iterable[LogLine]) -> list[LogLine]:
    return [ln for ln in lines if ln.level in KEPT_LEVELS]


def estimate_tokens(text: str, chars_per_token: int = CHARS_PER_TOKEN) -> int:
    if chars_per_token <= 0:
        raise ValueError("chars_per_token must be positive")
    return math.ceil(len(text) / chars_per_token)


def filter_logs(pod: Pod, lines: Sequence[LogLine]) -> tuple[LogLine, ...]:
    return tuple(filter_gnb(lines) if pod is Pod.GNB else filter_tagged(lines))


def filter_snapshot(s: ExperimentSnapshot) -> ExperimentSnapshot:
    return replace(s, logs={pod: filter_logs(pod, lines) for pod, lines in s.logs.items()})


def log_tokens(s: ExperimentSnapshot, pod: Pod, chars_per_token: int = CHARS_PER_TOKEN) -> int:
    return estimate_tokens(render_log(s.logs[pod]), chars_per_token)
