"""Four-stage experiment workflow: reset, status capture, telemetry and RTT, events.

The collector talks to a cluster only through the functions in :mod:`sim`, so
the same workflow could be pointed at a live backend exposing the same reads.
"""

from __future__ import annotations

import logging
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .model import (INVENTORY, UES, ExperimentSnapshot, FaultDiagError, FaultType,
                    parse_fault_label, parse_pod, save_snapshot)
from .sim import (VALID_TARGETS, ClusterState, FaultSpec, InvalidTarget, SimConfig, advance,
                  all_ready, describe_pod, get_events, get_logs, get_pods, inject_fault,
                  measure_rtt, new_cluster)

log = logging.getLogger(__name__)

DEFAULT_WARMUP_S = 60
DEFAULT_OBSERVE_S = 120


class ReadinessTimeout(FaultDiagError):
    pass


class CampaignError(FaultDiagError):
    def __init__(self, failures: dict[str, Exception], manifests: list):
        names = ", ".join(sorted(failures))
        super().__init__(f"{len(failures)} experiment(s) failed: {names}")
        self.failures = failures
        self.manifests = manifests


@dataclass(frozen=True)
class ExperimentPlan:
    id: str
    fault: Optional[FaultSpec] = None
    warmup: int = DEFAULT_WARMUP_S
    observe: int = DEFAULT_OBSERVE_S
    seed: int = 0

    def __post_init__(self):
        if self.warmup <= 0 or self.observe <= 0:
            raise ValueError("warmup and observe must be positive")
        if self.fault is not None and self.fault.target not in VALID_TARGETS[self.fault.fault]:
            raise InvalidTarget(f"{self.fault.fault.value} cannot target {self.fault.target.value}")

    @property
    def label(self) -> FaultType:
        return self.fault.fault if self.fault else FaultType.HEALTHY


def reset_and_init(seed: int, config: Optional[SimConfig] = None) -> ClusterState:
    """Fresh deployment, polled until every pod reports Running and ready."""
    cfg = config or SimConfig()
    state = new_cluster(seed, cfg)
    waited = 0
    while True:
        state = advance(state, cfg.readiness_poll_s)
        waited += cfg.readiness_poll_s
        if all_ready(state) and waited >= cfg.settle_s:
            return state
        if waited >= cfg.readiness_timeout_s:
            stuck = [p.value for p, r in state.pods.items() if r.status != "Running"]
            raise ReadinessTimeout(f"pods not ready after {waited}s: {', '.join(stuck)}")


def run_experiment(plan: ExperimentPlan, config: Optional[SimConfig] = None) -> ExperimentSnapshot:
    state = reset_and_init(plan.seed, config)
    state = advance(state, plan.warmup)
    rtt_before = {ue: measure_rtt(state, ue) for ue in UES}
    if plan.fault is not None:
        state = inject_fault(state, plan.fault)
    state = advance(state, plan.observe)
    pod_table = get_pods(state)
    logs = {p: get_logs(state, p) for p in INVENTORY}
    descriptions = {p: describe_pod(state, p) for p in INVENTORY}
    events = get_events(state)
    rtt_after = {ue: measure_rtt(state, ue) for ue in UES}
    return ExperimentSnapshot(
        id=plan.id, label=plan.label, pod_table=pod_table, logs=logs, descriptions=descriptions,
        events=events, rtt_before=rtt_before, rtt_after=rtt_after,
        target=plan.fault.target if plan.fault else None,
        magnitude=plan.fault.magnitude if plan.fault else None)


def _run_and_save(plan: ExperimentPlan, out_dir: str, config: Optional[SimConfig]) -> list[str]:
    snap = run_experiment(plan, config)
    return save_snapshot(snap, Path(out_dir) / plan.id)


def run_campaign(plans: Sequence[ExperimentPlan], out_dir: os.PathLike | str, parallelism: int = 1,
                 config: Optional[SimConfig] = None) -> list[list[str]]:
    """Run and persist every plan; returns manifests in plan order.

    Failed plans do not stop the others; once all have run a
    :class:`CampaignError` lists the failures (their manifests are empty).
    """
    if parallelism < 1:
        raise ValueError("parallelism must be positive")
    ids = [p.id for p in plans]
    if len(set(ids)) != len(ids):
        raise ValueError("plan ids must be distinct")
    out = str(out_dir)
    Path(out).mkdir(parents=True, exist_ok=True)
    manifests: list[list[str]] = [[] for _ in plans]
    failures: dict[str, Exception] = {}
    if parallelism == 1 or len(plans) <= 1:
        for i, plan in enumerate(plans):
            try:
                manifests[i] = _run_and_save(plan, out, config)
            except Exception as exc:  # aggregated below
                log.error("experiment %s failed: %s", plan.id, exc)
                failures[plan.id] = exc
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(_run_and_save, plan, out, config) for plan in plans]
            for i, fut in enumerate(futures):
                try:
                    manifests[i] = fut.result()
                except Exception as exc:
                    log.error("experiment %s failed: %s", plans[i].id, exc)
                    failures[plans[i].id] = exc
    if failures:
        raise CampaignError(failures, manifests)
    return manifests


# -- plan generation and plan files ------------------------------------------

CAMPAIGN_CYCLE = (
    FaultType.IO_INJECTION,
    FaultType.NETWORK_DELAY,
    FaultType.NETWORK_LOSS,
    FaultType.POD_FAILURE,
    FaultType.POD_KILL,
    FaultType.HEALTHY,
)
DELAY_RANGE_MS = (150, 400)
LOSS_CHOICES = (20, 30, 40, 60, 80, 100)


def make_campaign_plans(n: int, seed: int = 0, warmup: int = DEFAULT_WARMUP_S,
                        observe: int = DEFAULT_OBSERVE_S) -> list[ExperimentPlan]:
    """``n`` plans cycling through the five faults and one healthy run, targets drawn per plan."""
    plans = []
    for i in range(n):
        label = CAMPAIGN_CYCLE[i % len(CAMPAIGN_CYCLE)]
        rng = random.Random(f"{seed}:plan:{i}")
        spec = None
        if label.is_fault:
            target = rng.choice(VALID_TARGETS[label])
            magnitude = None
            if label is FaultType.NETWORK_DELAY:
                magnitude = float(rng.randint(*DELAY_RANGE_MS))
            elif label is FaultType.NETWORK_LOSS:
                magnitude = float(rng.choice(LOSS_CHOICES))
            spec = FaultSpec(label, target, magnitude)
        plans.append(ExperimentPlan(f"exp-{i:03d}", spec, warmup, observe, rng.getrandbits(32)))
    return plans


def format_plan(plan: ExperimentPlan) -> str:
    parts = [f"id={plan.id}", f"fault={plan.label.value}"]
    if plan.fault is not None:
        parts.append(f"target={plan.fault.target.value}")
        if plan.fault.magnitude is not None:
            parts.append(f"magnitude={plan.fault.magnitude:g}")
        if plan.fault.duration is not None:
            parts.append(f"duration={plan.fault.duration}")
    parts += [f"warmup={plan.warmup}", f"observe={plan.observe}", f"seed={plan.seed}"]
    return " ".join(parts)


def parse_plan(line: str) -> ExperimentPlan:
    fields = {}
    for tok in line.split():
        key, sep, value = tok.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {tok!r}")
        fields[key] = value
    unknown = set(fields) - {"id", "fault", "target", "magnitude", "duration", "warmup",
                             "observe", "seed"}
    if unknown:
        raise ValueError(f"unknown plan fields: {', '.join(sorted(unknown))}")
    if "id" not in fields:
        raise ValueError("plan record needs an id")
    label = parse_fault_label(fields.get("fault", "Healthy"))
    spec = None
    if label.is_fault:
        if "target" not in fields:
            raise ValueError(f"{label.value} plan needs a target")
        spec = FaultSpec(label, parse_pod(fields["target"]),
                         float(fields["magnitude"]) if "magnitude" in fields else None,
                         int(fields["duration"]) if "duration" in fields else None)
    return ExperimentPlan(fields["id"], spec, int(fields.get("warmup", DEFAULT_WARMUP_S)),
                          int(fields.get("observe", DEFAULT_OBSERVE_S)), int(fields.get("seed", 0)))


def read_plans(path: os.PathLike | str) -> list[ExperimentPlan]:
    plans = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                plans.append(parse_plan(line))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return plans


def write_plans(plans: Sequence[ExperimentPlan], path: os.PathLike | str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# one experiment per line: key=value fields\n")
        for plan in plans:
            fh.write(format_plan(plan) + "\n")
