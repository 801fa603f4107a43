"""Chat-format fine-tuning data built from experiment snapshots."""

from __future__ import annotations

import json
import os
import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .diagnoser import parse_diagnosis
from .model import (FAULTS, INVENTORY, ExperimentSnapshot, FaultDiagError,
                    FaultType, Pod, render_answer, render_events, render_log_line,
                    render_pod_table)


class EmptyDataset(FaultDiagError, ValueError):
    pass


@dataclass(frozen=True)
class ChatExample:
    system: str
    user: str
    assistant: str
    label: FaultType
    snapshot_id: str

    def messages(self) -> list[dict]:
        return [
            {"role": "system", "content": self.system},
            {"role": "user", "content": self.user},
            {"role": "assistant", "content": self.assistant},
        ]


_FAULT_LIST = ", ".join(f.value for f in FAULTS)

SYSTEM_PROMPT = f"""\
You are an expert 5G network fault analyzer for OpenAirInterface (OAI) core deployments running on Kubernetes.
Your job is to name the single failure type present in the telemetry below. The possible types are: {_FAULT_LIST}.

The input contains:
- Pod status: output of `kubectl get pods` with the columns NAME, READY, STATUS, RESTARTS and AGE.
- Pod logs: filtered logs of amf, smf, upf, db (database), gnb and the UEs (ue1, ue3).
- Kubernetes events for the namespace.
- RTT statistics for every UE, measured before and after the fault was injected.

Detection logic:
- IOInjection: the DB logs contain "Unknown database 'oai_5g'".
- NetworkDelay: RTT after the fault is much larger (>>) than RTT before the fault.
- NetworkLoss: the gNB logs contain "unknown RNTI", or RTT data is missing.
- PodFailure: a pod has status RunContainerError and its READY count decreased.
- PodKill: a pod has status ContainerCreating, or its AGE is < 2 min.

Exactly one fault type occurs per analysis. If none of the rules apply, answer "No fault detected".
Answer with one concise diagnostic sentence only, for example:
"Yes, network loss, 60% packets from RAN to AMF lost"
Do not speculate and do not add explanations.
"""


def build_system_prompt() -> str:
    return SYSTEM_PROMPT


SECTION_HEADERS = (
    "## Pod status (kubectl get pods)",
    "## Pod logs",
    "## Kubernetes events",
    "## RTT before fault injection",
    "## RTT after fault injection",
)
DESCRIBE_HEADER = "## Pod descriptions (kubectl describe pod)"


def _rtt_block(reports) -> str:
    return "\n".join(reports[ue].render() for ue in INVENTORY if ue in reports)


def assemble_user_message(s: ExperimentSnapshot, include_descriptions: bool = False) -> str:
    """Concatenate a (filtered) snapshot into the user turn, sections in a fixed order."""
    status, logs, events, before, after = SECTION_HEADERS
    parts = [status, render_pod_table(s.pod_table).rstrip("\n"), "", logs]
    for pod in INVENTORY:
        parts.append(f"### {pod.value}_filtered.txt")
        parts.extend(render_log_line(ln, seq=False, ansi=False) for ln in s.logs[pod])
    parts += ["", events, render_events(s.events).rstrip("\n")]
    if include_descriptions:
        parts += ["", DESCRIBE_HEADER]
        for pod in INVENTORY:
            parts += [f"### {pod.value}", s.descriptions[pod].rstrip("\n")]
    parts += ["", before, _rtt_block(s.rtt_before), "", after, _rtt_block(s.rtt_after)]
    return "\n".join(parts) + "\n"


_LINK_NAMES = {
    Pod.GNB: "RAN to AMF",
    Pod.AMF: "AMF to RAN",
    Pod.UPF: "UPF to RAN",
    Pod.UE1: "UE1 to RAN",
    Pod.UE3: "UE3 to RAN",
}


def fault_detail(label: FaultType, target: Optional[Pod], magnitude: Optional[float]) -> str:
    """Ground-truth detail clause for a fault, as specific as the injected spec allows."""
    if not label.is_fault or target is None:
        return ""
    m = f"{magnitude:g}" if magnitude is not None else "?"
    link = _LINK_NAMES.get(target, target.value)
    if label is FaultType.NETWORK_LOSS:
        return f"{m}% packets from {link} lost"
    if label is FaultType.NETWORK_DELAY:
        return f"{m} ms delay added on {target.value} ({link} link)"
    if label is FaultType.POD_KILL:
        return f"{target.value} killed and restarted"
    if label is FaultType.POD_FAILURE:
        return f"{target.value} in RunContainerError"
    return f"{target.value} disk I/O failing, database unavailable"


def make_assistant_answer(label: FaultType, target: Optional[Pod] = None, detail: str = "") -> str:
    if label.is_fault and not detail and target is not None:
        detail = target.value
    return render_answer(label, detail)


def example_from_snapshot(s: ExperimentSnapshot, include_descriptions: bool = False) -> ChatExample:
    return ChatExample(
        system=build_system_prompt(),
        user=assemble_user_message(s, include_descriptions),
        assistant=make_assistant_answer(s.label, s.target, fault_detail(s.label, s.target, s.magnitude)),
        label=s.label,
        snapshot_id=s.id,
    )


def split_dataset(examples: Sequence[ChatExample], seed: int = 0):
    """Stratified 50/25/25 split: per label, floor(n/2) train, ceil(n/4) val, the rest test."""
    if not examples:
        raise EmptyDataset("cannot split an empty dataset")
    strata: dict[FaultType, list[ChatExample]] = defaultdict(list)
    for ex in examples:
        strata[ex.label].append(ex)
    train, val, test = [], [], []
    for label in sorted(strata, key=list(FaultType).index):
        group = sorted(strata[label], key=lambda e: e.snapshot_id)
        random.Random(f"{seed}:split:{label.value}").shuffle(group)
        n = len(group)
        n_train, n_val = n // 2, -(-n // 4)
        train += group[:n_train]
        val += group[n_train:n_train + n_val]
        test += group[n_train + n_val:]
    return train, val, test


def export_finetune_file(examples: Iterable[ChatExample], path: os.PathLike | str) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ex in examples:
            fh.write(json.dumps({"messages": ex.messages()}, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_finetune_file(path: os.PathLike | str) -> list[list[dict]]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line)["messages"] for line in fh if line.strip()]


def label_of_answer(text: str) -> FaultType:
    d = parse_diagnosis(text)
    return d.fault if d.detected else FaultType.HEALTHY

