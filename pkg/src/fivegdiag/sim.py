"""Seeded, pure-functional simulator of an OAI 5G core running on Kubernetes.

Time is virtual and counted in whole seconds. Every transition takes a state
and returns a new one, and all randomness is derived from ``(seed, clock,
purpose)`` so a read such as :func:`measure_rtt` is repeatable and the same
operation sequence always yields the same telemetry.
"""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .model import (CORE_PODS, INVENTORY, UES, ClusterEvent, FaultDiagError, FaultType,
                    LogLine, Pod, PodStatusRow, RttReport, format_duration, parse_pod,
                    render_event)

NAMESPACE = "oai"


class SimError(FaultDiagError):
    pass


class FaultAlreadyActive(SimError):
    pass


class InvalidTarget(SimError, ValueError):
    pass


class NotAUe(SimError, ValueError):
    pass


class UnknownPod(SimError, ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    # per-UE baseline RTT is drawn once per cluster from this window
    rtt_base_min_ms: float = 25.0
    rtt_base_max_ms: float = 55.0
    # a probe's average lands in [base, base + jitter]
    rtt_jitter_ms: float = 5.0
    rtt_spread_ms: float = 8.0
    ping_count: int = 10
    baseline_loss_pct: float = 0.0
    total_loss_threshold_pct: float = 50.0
    gnb_lines_per_s: float = 11.0
    core_lines_per_s: float = 1.5
    db_lines_per_s: float = 0.5
    ue_lines_per_s: float = 1.0
    gnb_color_fraction: float = 0.12
    signature_period_s: int = 10
    # noise knobs, all zero by default
    signature_dropout: float = 0.0
    spurious_warn_prob: float = 0.0
    restart_delay_s: int = 5
    container_creating_s: int = 10
    backoff_period_s: int = 10
    fault_duration_s: int = 600
    readiness_timeout_s: int = 300
    readiness_poll_s: int = 5
    settle_s: int = 10
    # testing hook: pods that never leave ContainerCreating
    stuck_pods: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0 <= self.rtt_base_min_ms <= self.rtt_base_max_ms:
            raise ValueError("bad baseline RTT window")
        for name in ("signature_dropout", "spurious_warn_prob", "gnb_color_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability")
        if self.signature_period_s <= 0 or self.backoff_period_s <= 0 or self.ping_count <= 0:
            raise ValueError("periods and ping count must be positive")
        object.__setattr__(self, "stuck_pods", tuple(parse_pod(p).value for p in self.stuck_pods))


VALID_TARGETS: Mapping[FaultType, tuple[Pod, ...]] = {
    FaultType.IO_INJECTION: (Pod.DB,),
    FaultType.POD_FAILURE: CORE_PODS,
    FaultType.POD_KILL: CORE_PODS,
    FaultType.NETWORK_DELAY: (Pod.GNB, Pod.UPF, Pod.UE1, Pod.UE3),
    FaultType.NETWORK_LOSS: (Pod.GNB, Pod.AMF, Pod.UPF, Pod.UE1, Pod.UE3),
}


@dataclass(frozen=True)
class FaultSpec:
    fault: FaultType
    target: Pod
    magnitude: Optional[float] = None  # delay ms or loss percent
    duration: Optional[int] = None  # seconds; None means the config default

    def __post_init__(self):
        if not isinstance(self.target, Pod):
            object.__setattr__(self, "target", parse_pod(self.target))
        if self.fault is FaultType.HEALTHY:
            raise ValueError("Healthy is not an injectable fault")
        if self.fault is FaultType.NETWORK_DELAY:
            if self.magnitude is None or self.magnitude <= 0:
                raise ValueError("NetworkDelay needs a positive delay in ms")
        elif self.fault is FaultType.NETWORK_LOSS:
            if self.magnitude is None or not 0 < self.magnitude <= 100:
                raise ValueError("NetworkLoss needs a loss percentage in (0, 100]")
        elif self.magnitude is not None:
            raise ValueError(f"{self.fault} takes no magnitude")
        if self.duration is not None and self.duration <= 0:
            raise ValueError("duration must be positive")


@dataclass(frozen=True)
class ActiveFault:
    spec: FaultSpec
    started_at: int
    duration: int
    prior_row: PodStatusRow


@dataclass(frozen=True)
class ClusterState:
    config: SimConfig
    seed: int
    clock: int
    pods: Mapping[Pod, PodStatusRow]
    logs: Mapping[Pod, tuple[LogLine, ...]]
    events: tuple[ClusterEvent, ...]
    base_delay_ms: Mapping[Pod, float]
    rnti: Mapping[Pod, int]
    active_fault: Optional[ActiveFault] = None
    # (due_time, pod, action) transitions still to happen
    pending: tuple[tuple[int, Pod, str], ...] = field(default=())

    @property
    def loss_pct(self) -> float:
        return self.config.baseline_loss_pct


# -- log text ----------------------------------------------------------------

def _imsi(rng: random.Random) -> str:
    return f"imsi-2089900007{rng.randrange(100000):05d}"


def _gnb_plain(rng, rnti):
    f, s = rng.randrange(1024), rng.randrange(20)
    k = rng.randrange(4)
    if k == 0:
        return (f"[NR_MAC]   Frame.Slot {f}.{s}  UE RNTI {rnti:04x} (1) PH {rng.randrange(20, 60)} dB "
                f"PCMAX {rng.randrange(18, 24)} dBm, average RSRP -{rng.randrange(40, 90)} "
                f"({rng.randrange(8, 32)} meas)")
    if k == 1:
        return (f"[NR_MAC]   UE {rnti:04x}: dlsch_rounds {rng.randrange(9999)}/{rng.randrange(99)}"
                f"/{rng.randrange(9)}/0, dlsch_errors 0, pucch0_DTX {rng.randrange(40)}, "
                f"BLER {rng.random() * 0.1:.5f} MCS {rng.randrange(28)}")
    if k == 2:
        return (f"[NR_MAC]   UE {rnti:04x}: ulsch_rounds {rng.randrange(9999)}/{rng.randrange(99)}"
                f"/0/0, ulsch_DTX {rng.randrange(20)}, ulsch_errors 0, BLER {rng.random() * 0.1:.5f} "
                f"MCS {rng.randrange(28)} NPRB {rng.randrange(5, 106)}")
    return (f"[NR_MAC]   UE {rnti:04x}: MAC:    TX {rng.randrange(10**6, 10**8)} RX "
            f"{rng.randrange(10**5, 10**7)} bytes, LCID 4: TX {rng.randrange(10**5, 10**7)} RX "
            f"{rng.randrange(10**4, 10**6)} bytes")


def _gnb_colored(rng, rnti):
    k = rng.randrange(4)
    if k == 0:
        return "green", (f"[NR_RRC]   [gNB 0] Received RRCReconfigurationComplete from UE {rnti:04x}, "
                         f"DRB {rng.randrange(1, 3)} for PDU session {rng.randrange(1, 5)} active")
    if k == 1:
        return "green", (f"[NGAP]   gNB 0: PDU session resource setup response sent for RAN UE NGAP "
                         f"ID {rng.randrange(1, 64)}, AMF UE NGAP ID {rng.randrange(1, 64)}")
    if k == 2:
        return "yellow", (f"[NR_MAC]   UE {rnti:04x}: consecutive ulsch DTX {rng.randrange(1, 6)} in "
                          f"frame {rng.randrange(1024)}, scheduling HARQ retransmission round 1")
    return "red", (f"[NR_PHY]   PUSCH decoding failed for harq_pid {rng.randrange(16)} in frame "
                   f"{rng.randrange(1024)} slot {rng.randrange(20)}, CRC error, retransmission requested")


_TAGGED = {
    Pod.AMF: [
        ("info", lambda r: f"[amf_n2] Received NGAP UplinkNASTransport from gNB 0x0e00, RAN UE NGAP ID {r.randrange(64)}"),
        ("info", lambda r: f"[amf_app] UE {_imsi(r)} 5GMM state REGISTERED, CM state CONNECTED"),
        ("debug", lambda r: f"[amf_n1] Decoded NAS message, security header type {r.randrange(5)}, size {r.randrange(20, 200)}"),
        ("debug", lambda r: f"[amf_sbi] HTTP/2 stream {r.randrange(1, 999)} closed with status 200"),
        ("trace", lambda r: f"[itti] Sending message N2_N1_MSG_RESP to task TASK_AMF_N2 (id {r.randrange(9999)})"),
        ("unleveled", lambda r: f"NGAP association 0x{r.randrange(1 << 16):04x} keepalive ok"),
    ],
    Pod.SMF: [
        ("info", lambda r: f"[smf_app] PDU session {r.randrange(1, 5)} active for {_imsi(r)}, UE IP 12.1.1.{r.randrange(2, 250)}"),
        ("info", lambda r: f"[smf_n4] Received N4 heartbeat response from UPF 10.244.0.{r.randrange(2, 250)}"),
        ("debug", lambda r: f"[smf_n4] PFCP sequence number {r.randrange(99999)} acknowledged"),
        ("trace", lambda r: f"[itti] TASK_SMF_APP queue depth {r.randrange(4)}"),
    ],
    Pod.UPF: [
        ("info", lambda r: f"[upf_app] GTP-U TEID 0x{r.randrange(1 << 32):08x} forwarded {r.randrange(10, 5000)} packets"),
        ("debug", lambda r: f"[upf_n3] Uplink packet from gNB 10.244.0.{r.randrange(2, 250)} matched PDR {r.randrange(1, 9)}"),
        ("trace", lambda r: f"[upf_n6] Egress queue occupancy {r.randrange(100)}%"),
        ("unleveled", lambda r: f"pfcp: session table size {r.randrange(1, 9)}"),
    ],
    Pod.DB: [
        ("info", lambda r: f"[Server] Connection {r.randrange(10, 999)} accepted from 10.244.0.{r.randrange(2, 250)}"),
        ("debug", lambda r: f"[InnoDB] Buffer pool flush completed, {r.randrange(1, 200)} pages written"),
        ("trace", lambda r: f"[Server] Query: SELECT * FROM AuthenticationSubscription WHERE ueid={r.randrange(10**5)}"),
    ],
    Pod.UE1: [
        ("info", lambda r: f"[NR_RRC] RRC_CONNECTED, serving cell RSRP -{r.randrange(40, 90)} dBm"),
        ("debug", lambda r: f"[PDCP] DRB 1 TX count {r.randrange(10**6)}"),
        ("trace", lambda r: f"[PHY] slot {r.randrange(20)} PDSCH decoded, TBS {r.randrange(100, 9000)}"),
    ],
}
_TAGGED[Pod.UE3] = _TAGGED[Pod.UE1]

_SPURIOUS = {
    Pod.AMF: "[amf_app] NRF heartbeat response slow ({ms} ms), continuing",
    Pod.SMF: "[smf_sbi] AMF notification retried once after {ms} ms",
    Pod.UPF: "[upf_app] Buffered {ms} packets while waiting for session update",
    Pod.DB: "[Server] Slow query logged: {ms} ms",
    Pod.UE1: "[NR_MAC] Scheduling request sent, grant received after {ms} ms",
    Pod.UE3: "[NR_MAC] Scheduling request sent, grant received after {ms} ms",
}

IO_SIGNATURE = "[Server] ERROR 1049 (42000): Unknown database 'oai_5g'"
IO_DEPENDENT = {
    Pod.AMF: "[amf_sbi] Authentication subscription lookup failed, subscriber data unavailable",
    Pod.SMF: "[smf_app] Session management subscription data unavailable, rejecting request",
}


def _rate_for(cfg: SimConfig, pod: Pod) -> float:
    if pod is Pod.GNB:
        return cfg.gnb_lines_per_s
    if pod is Pod.DB:
        return cfg.db_lines_per_s
    if pod.is_ue:
        return cfg.ue_lines_per_s
    return cfg.core_lines_per_s


def _lines_in_tick(rate: float, t: int) -> int:
    # deterministic count so totals over a window are exact
    return int(rate * (t + 1)) - int(rate * t)


# -- construction ------------------------------------------------------------

def new_cluster(seed: int, config: Optional[SimConfig] = None) -> ClusterState:
    cfg = config or SimConfig()
    rng = random.Random(f"{seed}:init")
    base = {ue: rng.uniform(cfg.rtt_base_min_ms, cfg.rtt_base_max_ms) for ue in UES}
    rnti = {ue: rng.randrange(0x1000, 0xffff) for ue in UES}
    pods, events = {}, []
    for pod in INVENTORY:
        if pod.value in cfg.stuck_pods:
            pods[pod] = PodStatusRow(pod, 0, 1, "ContainerCreating")
        else:
            pods[pod] = PodStatusRow(pod, 1, 1, "Running")
        events.append(ClusterEvent(0, "Scheduled",
                                   pod, f"Successfully assigned {NAMESPACE}/{pod.value} to node-1"))
    for pod in INVENTORY:
        if pod.value not in cfg.stuck_pods:
            events.append(ClusterEvent(0, "Started", pod, f"Started container {_container(pod)}"))
    return ClusterState(config=cfg, seed=seed, clock=0, pods=pods,
                        logs={p: () for p in INVENTORY}, events=tuple(events),
                        base_delay_ms=base, rnti=rnti)


def _container(pod: Pod) -> str:
    return pod.value.removeprefix("oai-")


# -- evolution ---------------------------------------------------------------

class _Work:
    """Mutable scratch copy used inside one advance() call."""

    def __init__(self, s: ClusterState):
        self.pods = dict(s.pods)
        self.logs = {p: list(v) for p, v in s.logs.items()}
        self.events = list(s.events)
        self.pending = list(s.pending)
        self.active = s.active_fault

    def emit(self, pod: Pod, level: str, text: str, color: Optional[str] = None):
        buf = self.logs[pod]
        seq = buf[-1].seq + 1 if buf else 0
        buf.append(LogLine(pod, level, text, seq, color))

    def event(self, t: int, kind: str, pod: Pod, message: str):
        self.events.append(ClusterEvent(t, kind, pod, message))


def _emit_baseline(w: _Work, s: ClusterState, rng: random.Random, t: int):
    cfg = s.config
    for pod in INVENTORY:
        if w.pods[pod].status != "Running":
            continue
        for _ in range(_lines_in_tick(_rate_for(cfg, pod), t)):
            if pod is Pod.GNB:
                rnti = s.rnti[UES[rng.randrange(len(UES))]]
                if rng.random() < cfg.gnb_color_fraction:
                    color, text = _gnb_colored(rng, rnti)
                else:
                    color, text = "none", _gnb_plain(rng, rnti)
                w.emit(pod, "unleveled", text, color)
            else:
                level, make = _TAGGED[pod][rng.randrange(len(_TAGGED[pod]))]
                w.emit(pod, level, make(rng))
        if cfg.spurious_warn_prob and rng.random() < cfg.spurious_warn_prob:
            ms = rng.randrange(200, 3000)
            if pod is Pod.GNB:
                w.emit(pod, "unleveled",
                       f"[NR_MAC]   CQI report missing for {rng.randrange(1, 4)} slots, reusing last value ({ms} us)",
                       "yellow")
            else:
                w.emit(pod, "warn", _SPURIOUS[pod].format(ms=ms))


def _emit_signatures(w: _Work, s: ClusterState, rng: random.Random, t: int):
    af = w.active
    if af is None:
        return
    elapsed = t - af.started_at
    if elapsed < 0 or elapsed % s.config.signature_period_s:
        return
    dropout = s.config.signature_dropout
    fault = af.spec.fault
    if fault is FaultType.IO_INJECTION:
        if w.pods[Pod.DB].status == "Running" and not (dropout and rng.random() < dropout):
            w.emit(Pod.DB, "warn", IO_SIGNATURE)
        for pod, text in IO_DEPENDENT.items():
            if w.pods[pod].status == "Running":
                w.emit(pod, "warn", text)
    elif fault is FaultType.NETWORK_LOSS:
        if w.pods[Pod.GNB].status == "Running" and not (dropout and rng.random() < dropout):
            rnti = s.rnti[UES[rng.randrange(len(UES))]]
            w.emit(Pod.GNB, "unleveled",
                   f"[NR_MAC]   ul_ind: unknown RNTI {rnti:04x} in frame {rng.randrange(1024)} slot "
                   f"{rng.randrange(20)}, UE context lost, dropping indication", "red")


def _fault_tick(w: _Work, s: ClusterState, now: int):
    af = w.active
    if af is None:
        return
    spec = af.spec
    elapsed = now - af.started_at
    if spec.fault is FaultType.POD_FAILURE and elapsed > 0 and elapsed % s.config.backoff_period_s == 0:
        row = w.pods[spec.target]
        w.pods[spec.target] = replace(row, restarts=row.restarts + 1)
        w.event(now, "BackOff", spec.target,
                f"Back-off restarting failed container {_container(spec.target)} in pod {spec.target.value}")
    if elapsed >= af.duration:
        pod = spec.target
        if spec.fault is FaultType.POD_FAILURE:
            row = w.pods[pod]
            w.pods[pod] = replace(row, ready=row.total, status="Running")
            w.event(now, "Started", pod, f"Started container {_container(pod)}")
        w.event(now, "FaultRecovered", pod,
                f"{spec.fault.value} on {pod.value} ended after {format_duration(af.duration)}")
        w.active = None


def _run_pending(w: _Work, now: int):
    due = [p for p in w.pending if p[0] == now]
    if not due:
        return
    w.pending = [p for p in w.pending if p[0] != now]
    for _, pod, action in due:
        if action == "schedule":
            w.pods[pod] = PodStatusRow(pod, 0, 1, "ContainerCreating", 0, 0)
            w.logs[pod] = []  # fresh container, fresh log
            w.event(now, "Scheduled", pod, f"Successfully assigned {NAMESPACE}/{pod.value} to node-1")
        elif action == "start":
            w.pods[pod] = replace(w.pods[pod], ready=1, status="Running")
            w.event(now, "Pulled", pod, "Container image already present on machine")
            w.event(now, "Created", pod, f"Created container {_container(pod)}")
            w.event(now, "Started", pod, f"Started container {_container(pod)}")


def advance(state: ClusterState, dt: int) -> ClusterState:
    """Run ``dt`` one-second ticks and return the resulting state."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return state
    w = _Work(state)
    for t in range(state.clock, state.clock + dt):
        rng = random.Random(f"{state.seed}:tick:{t}")
        _emit_baseline(w, state, rng, t)
        _emit_signatures(w, state, rng, t)
        now = t + 1
        for pod, row in w.pods.items():
            w.pods[pod] = replace(row, age=row.age + 1)
        _fault_tick(w, state, now)
        _run_pending(w, now)
    return replace(state, clock=state.clock + dt, pods=w.pods,
                   logs={p: tuple(v) for p, v in w.logs.items()}, events=tuple(w.events),
                   active_fault=w.active, pending=tuple(w.pending))


def inject_fault(state: ClusterState, spec: FaultSpec) -> ClusterState:
    if state.active_fault is not None:
        raise FaultAlreadyActive(
            f"{state.active_fault.spec.fault.value} already active on {state.active_fault.spec.target.value}")
    if spec.target not in VALID_TARGETS[spec.fault]:
        allowed = ", ".join(p.value for p in VALID_TARGETS[spec.fault])
        raise InvalidTarget(f"{spec.fault.value} cannot target {spec.target.value} (allowed: {allowed})")
    cfg = state.config
    now = state.clock
    pods = dict(state.pods)
    events = list(state.events)
    pending = list(state.pending)
    pod = spec.target
    prior = pods[pod]
    if spec.fault is FaultType.POD_KILL:
        pods[pod] = replace(prior, ready=0, status="Terminating")
        events.append(ClusterEvent(now, "Killing", pod, f"Stopping container {_container(pod)}"))
        t_sched = now + cfg.restart_delay_s
        pending += [(t_sched, pod, "schedule"), (t_sched + cfg.container_creating_s, pod, "start")]
    elif spec.fault is FaultType.POD_FAILURE:
        pods[pod] = replace(prior, ready=0, status="RunContainerError")
        events.append(ClusterEvent(
            now, "Failed", pod,
            f'Error: failed to start container "{_container(pod)}": exec: '
            f'"/opt/{pod.value}/bin/{_container(pod)}": stat: no such file or directory'))
    af = ActiveFault(spec, now, spec.duration or cfg.fault_duration_s, prior)
    return replace(state, pods=pods, events=tuple(events), pending=tuple(pending), active_fault=af)


# -- observation -------------------------------------------------------------

def _check_pod(pod) -> Pod:
    try:
        return parse_pod(pod.value if isinstance(pod, Pod) else pod)
    except ValueError:
        raise UnknownPod(f"not an inventory pod: {pod!r}") from None


def _link_effect(state: ClusterState, ue: Pod) -> tuple[float, float]:
    """(added delay ms, loss percent) seen on ``ue``'s user-plane path."""
    delay, loss = 0.0, state.config.baseline_loss_pct
    af = state.active_fault
    if af is not None and (af.spec.target in (Pod.GNB, Pod.UPF) or af.spec.target is ue):
        if af.spec.fault is FaultType.NETWORK_DELAY:
            delay = af.spec.magnitude
        elif af.spec.fault is FaultType.NETWORK_LOSS:
            loss = max(loss, af.spec.magnitude)
    return delay, loss


def measure_rtt(state: ClusterState, ue) -> RttReport:
    ue = _check_pod(ue)
    if not ue.is_ue:
        raise NotAUe(f"{ue.value} is not a UE")
    cfg = state.config
    rng = random.Random(f"{state.seed}:rtt:{ue.value}:{state.clock}")
    delay, loss = _link_effect(state, ue)
    if loss >= cfg.total_loss_threshold_pct:
        return RttReport.missing(ue)
    received = sum(rng.random() >= loss / 100 for _ in range(cfg.ping_count))
    if received == 0:
        return RttReport.missing(ue)
    target = state.base_delay_ms[ue] + delay + rng.uniform(0.0, cfg.rtt_jitter_ms)
    raw = [rng.expovariate(1.0) for _ in range(received)]
    mean_raw = statistics.fmean(raw)
    spread = cfg.rtt_spread_ms
    if mean_raw * spread >= target:
        spread = 0.5 * target / mean_raw
    samples = [target + spread * (g - mean_raw) for g in raw]
    avg = statistics.fmean(samples)
    return RttReport(ue, min(samples), avg, max(samples), statistics.pstdev(samples))


def _stale_row(state: ClusterState) -> Optional[PodStatusRow]:
    af = state.active_fault
    if af is None or af.spec.fault not in (FaultType.POD_KILL, FaultType.POD_FAILURE):
        return None
    p = af.prior_row
    return replace(p, ready=p.total, status="Running", age=p.age + state.clock - af.started_at)


def get_pods(state: ClusterState) -> list[PodStatusRow]:
    rows = [state.pods[p] for p in INVENTORY]
    dropout = state.config.signature_dropout
    stale = _stale_row(state)
    if stale is not None and dropout:
        # noise: the faulty pod's row comes back from a stale cache
        if random.Random(f"{state.seed}:pods:{state.clock}").random() < dropout:
            rows = [stale if r.name is stale.name else r for r in rows]
    return rows


def get_logs(state: ClusterState, pod) -> tuple[LogLine, ...]:
    return state.logs[_check_pod(pod)]


def get_events(state: ClusterState) -> tuple[ClusterEvent, ...]:
    return state.events


_IMAGES = {
    Pod.AMF: "oaisoftwarealliance/oai-amf:v2.0.0",
    Pod.SMF: "oaisoftwarealliance/oai-smf:v2.0.0",
    Pod.UPF: "oaisoftwarealliance/oai-upf:v2.0.0",
    Pod.DB: "mysql:8.0",
    Pod.GNB: "oaisoftwarealliance/oai-gnb:2024.w10",
    Pod.UE1: "oaisoftwarealliance/oai-nr-ue:2024.w10",
    Pod.UE3: "oaisoftwarealliance/oai-nr-ue:2024.w10",
}


def describe_pod(state: ClusterState, pod, recent: int = 10) -> str:
    pod = _check_pod(pod)
    row = state.pods[pod]
    running = row.status == "Running"
    if running:
        cstate = "Running"
    elif row.status == "Terminating":
        cstate = "Terminated\n      Reason:       Killed"
    else:
        cstate = f"Waiting\n      Reason:       {row.status}"
    ready = "True" if row.ready == row.total else "False"
    lines = [
        f"Name:             {pod.value}",
        f"Namespace:        {NAMESPACE}",
        "Node:             node-1",
        f"Status:           {'Running' if running else 'Pending'}",
        f"Ready:            {row.ready_text}",
        f"Restart Count:    {row.restarts}",
        f"Age:              {format_duration(row.age)}",
        "Containers:",
        f"  {_container(pod)}:",
        f"    Image:        {_IMAGES[pod]}",
        f"    State:        {cstate}",
        "Conditions:",
        "  Type              Status",
        f"  Ready             {ready}",
        f"  ContainersReady   {ready}",
    ]
    mine = [e for e in state.events if e.involved is pod][-recent:]
    if mine:
        lines.append("Events:")
        lines += ["  " + render_event(e) for e in mine]
    else:
        lines.append("Events:           <none>")
    return "\n".join(lines) + "\n"


def all_ready(state: ClusterState) -> bool:
    return all(r.status == "Running" and r.ready == r.total for r in state.pods.values())
