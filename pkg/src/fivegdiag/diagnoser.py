"""Rule-based fault diagnosis and parsing of free-text verdicts."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional

from .model import (FAULT_PHRASES, FAULTS, UES, Diagnosis, ExperimentSnapshot, FaultDiagError,
                    FaultType, Pod, UnknownLabel, format_duration, parse_fault_label,
                    render_answer)

DEFAULT_PRECEDENCE = (
    FaultType.POD_FAILURE,
    FaultType.POD_KILL,
    FaultType.IO_INJECTION,
    FaultType.NETWORK_LOSS,
    FaultType.NETWORK_DELAY,
)

# statuses of a pod that is being replaced after a kill
REPLACING = frozenset({"ContainerCreating", "Terminating"})


class UnparseableAnswer(FaultDiagError, ValueError):
    def __init__(self, text: str):
        super().__init__(f"cannot interpret answer: {text!r}")
        self.text = text


@dataclass(frozen=True)
class RuleConfig:
    delay_ratio_threshold: float = 3.0
    delay_abs_threshold_ms: float = 100.0
    pod_age_threshold_s: int = 120
    rule_precedence: tuple[FaultType, ...] = DEFAULT_PRECEDENCE

    def __post_init__(self):
        prec = tuple(f if isinstance(f, FaultType) else parse_fault_label(f)
                     for f in self.rule_precedence)
        object.__setattr__(self, "rule_precedence", prec)
        if sorted(prec) != sorted(FAULTS):
            raise ValueError("rule_precedence must list each of the five faults exactly once")
        if self.delay_ratio_threshold <= 1:
            raise ValueError("delay_ratio_threshold must exceed 1")
        if self.delay_abs_threshold_ms < 0 or self.pod_age_threshold_s < 0:
            raise ValueError("thresholds must be non-negative")


Match = Optional[tuple[Pod, str]]


def _pod_failure(s: ExperimentSnapshot, cfg: RuleConfig) -> Match:
    for row in s.pod_table:
        if row.status == "RunContainerError" or (row.ready < row.total and row.status not in REPLACING):
            return row.name, f"{row.name.value} status {row.status}, READY {row.ready_text}"
    return None


def _pod_kill(s: ExperimentSnapshot, cfg: RuleConfig) -> Match:
    # the oldest pod's age stands in for cluster uptime; young pods right
    # after deployment are not evidence of a kill
    uptime = max((r.age for r in s.pod_table), default=0)
    for row in s.pod_table:
        young = uptime >= cfg.pod_age_threshold_s and row.age < cfg.pod_age_threshold_s
        if row.status in REPLACING or young:
            return row.name, (f"{row.name.value} was replaced, status {row.status}, "
                              f"AGE {format_duration(row.age)}")
    return None


def _io_injection(s: ExperimentSnapshot, cfg: RuleConfig) -> Match:
    if any("unknown database" in ln.text.lower() for ln in s.logs.get(Pod.DB, ())):
        return Pod.DB, f"{Pod.DB.value} logs report Unknown database, storage I/O failing"
    return None


def _network_loss(s: ExperimentSnapshot, cfg: RuleConfig) -> Match:
    if any("unknown rnti" in ln.text.lower() for ln in s.logs.get(Pod.GNB, ())):
        return Pod.GNB, f"{Pod.GNB.value} logs show unknown RNTI, UE radio context lost"
    for ue in UES:
        rep = s.rtt_after.get(ue)
        if rep is not None and not rep.present:
            return ue, f"{ue.value} RTT data missing after fault"
    return None


def _network_delay(s: ExperimentSnapshot, cfg: RuleConfig) -> Match:
    for ue in UES:
        before, after = s.rtt_before.get(ue), s.rtt_after.get(ue)
        if not (before and after and before.present and after.present):
            continue
        if (after.avg >= cfg.delay_ratio_threshold * before.avg
                or after.avg - before.avg >= cfg.delay_abs_threshold_ms):
            return ue, f"{ue.value} RTT avg rose from {before.avg:.3f} ms to {after.avg:.3f} ms"
    return None


RULES: dict[FaultType, Callable[[ExperimentSnapshot, RuleConfig], Match]] = {
    FaultType.POD_FAILURE: _pod_failure,
    FaultType.POD_KILL: _pod_kill,
    FaultType.IO_INJECTION: _io_injection,
    FaultType.NETWORK_LOSS: _network_loss,
    FaultType.NETWORK_DELAY: _network_delay,
}


def matching_rules(s: ExperimentSnapshot, cfg: Optional[RuleConfig] = None) -> list[FaultType]:
    cfg = cfg or RuleConfig()
    return [f for f in cfg.rule_precedence if RULES[f](s, cfg) is not None]


def diagnose_rule_based(s: ExperimentSnapshot, cfg: Optional[RuleConfig] = None) -> Diagnosis:
    cfg = cfg or RuleConfig()
    for fault in cfg.rule_precedence:
        hit = RULES[fault](s, cfg)
        if hit is not None:
            pod, detail = hit
            return Diagnosis(True, fault, pod, detail, render_answer(fault, detail))
    return Diagnosis(False, raw_text=render_answer(FaultType.HEALTHY))


# -- parsing free text -------------------------------------------------------

_VERDICT_RE = re.compile(r"^\s*(yes|no)\b[\s,.:;!-]*(.*)$", re.I | re.S)
_NEGATIVE_TAIL_RE = re.compile(r"^(?:fault|faults|failure|issue|problem)s?\s+(?:detected|found)\b[\s,.:;!-]*",
                               re.I)
_POD_RE = re.compile(r"\b(oai-(?:amf|smf|upf|db|gnb|ue1|ue3))\b")


def _phrase_pattern(phrase: str) -> str:
    words = re.findall(r"[a-z0-9]+", phrase.lower().replace("i/o", "io"))
    parts = []
    for w in words:
        parts.append(r"i\s*/?\s*o" if w == "io" else re.escape(w))
    return r"[\s_-]*".join(parts)


_PHRASE_RE = re.compile(
    r"\b(" + "|".join(f"(?P<{f.name}>{_phrase_pattern(p)})" for f, p in FAULT_PHRASES.items()) + r")\b",
    re.I)


def _find_phrase(text: str) -> Optional[tuple[FaultType, re.Match]]:
    m = _PHRASE_RE.search(text)
    if not m:
        return None
    for f in FAULTS:
        if m.group(f.name):
            return f, m
    return None  # pragma: no cover


def _clause_fault(clause: str) -> Optional[FaultType]:
    try:
        f = parse_fault_label(clause)
    except UnknownLabel:
        return None
    return f if f.is_fault else None


def _component(detail: str) -> Optional[Pod]:
    m = _POD_RE.search(detail)
    return Pod(m.group(1)) if m else None


def parse_diagnosis(text: str) -> Diagnosis:
    m = _VERDICT_RE.match(text)
    if m and m.group(1).lower() == "no":
        detail = _NEGATIVE_TAIL_RE.sub("", m.group(2).strip(), count=1).strip()
        return Diagnosis(False, None, _component(detail), detail, text)
    if m:
        rest = m.group(2).strip()
        clause, _, tail = rest.partition(",")
        fault = _clause_fault(clause)
        if fault is not None:
            detail = tail.strip()
        else:
            found = _find_phrase(rest)
            fault = found[0] if found else None
            detail = rest
        return Diagnosis(True, fault, _component(detail), detail, text)
    found = _find_phrase(text)
    if found is None:
        raise UnparseableAnswer(text)
    detail = text.strip()
    return Diagnosis(True, found[0], _component(detail), detail, text)


def parse_or_unparsed(text: str) -> Diagnosis:
    """Like :func:`parse_diagnosis`, but garbage becomes a Diagnosis flagged ``parsed=False``."""
    try:
        return parse_diagnosis(text)
    except UnparseableAnswer:
        return Diagnosis(False, raw_text=text, parsed=False)
