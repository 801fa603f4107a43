"""Domain types shared across the pipeline, plus snapshot persistence.

Every type here is an immutable value object. Snapshots are stored as plain
text that mirrors what an operator would see from kubectl and ping.
"""

from __future__ import annotations

import enum
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence


class FaultDiagError(Exception):
    """Base class for every error raised by this package."""


class UnknownLabel(FaultDiagError, ValueError):
    def __init__(self, text: str):
        super().__init__(f"unknown fault label: {text!r}")
        self.text = text


class MissingArtifact(FaultDiagError):
    def __init__(self, name: str):
        super().__init__(f"snapshot artifact missing: {name}")
        self.name = name


class ParseError(FaultDiagError):
    def __init__(self, file: str, line: int, reason: str = ""):
        msg = f"{file}:{line}: cannot parse"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)
        self.file = file
        self.line = line


class FaultType(str, enum.Enum):
    IO_INJECTION = "IOInjection"
    NETWORK_DELAY = "NetworkDelay"
    NETWORK_LOSS = "NetworkLoss"
    POD_FAILURE = "PodFailure"
    POD_KILL = "PodKill"
    HEALTHY = "Healthy"

    def __str__(self) -> str:
        return self.value

    @property
    def is_fault(self) -> bool:
        return self is not FaultType.HEALTHY


FAULTS = tuple(f for f in FaultType if f.is_fault)

_LABEL_KEYS = {re.sub(r"[^a-z0-9]", "", f.value.lower()): f for f in FaultType}


def parse_fault_label(text: str) -> FaultType:
    """Case- and separator-insensitive lookup: ``"network loss"`` -> NetworkLoss."""
    key = re.sub(r"[^a-z0-9]", "", text.lower())
    try:
        return _LABEL_KEYS[key]
    except KeyError:
        raise UnknownLabel(text) from None


def render_fault_label(fault: FaultType) -> str:
    return fault.value


# how each fault is named inside a diagnostic sentence
FAULT_PHRASES = {
    FaultType.IO_INJECTION: "I/O injection",
    FaultType.NETWORK_DELAY: "network delay",
    FaultType.NETWORK_LOSS: "network loss",
    FaultType.POD_FAILURE: "pod failure",
    FaultType.POD_KILL: "pod kill",
}
NEGATIVE_ANSWER = "No fault detected"


def render_answer(fault: FaultType, detail: str = "") -> str:
    """One-sentence verdict: ``Yes, <fault phrase>, <detail>`` or the negative sentence."""
    if not fault.is_fault:
        return NEGATIVE_ANSWER
    head = f"Yes, {FAULT_PHRASES[fault]}"
    return f"{head}, {detail}" if detail else head


class Pod(str, enum.Enum):
    AMF = "oai-amf"
    SMF = "oai-smf"
    UPF = "oai-upf"
    DB = "oai-db"
    GNB = "oai-gnb"
    UE1 = "oai-ue1"
    UE3 = "oai-ue3"

    def __str__(self) -> str:
        return self.value

    @property
    def is_ue(self) -> bool:
        return self in UES


INVENTORY = tuple(Pod)
UES = (Pod.UE1, Pod.UE3)
CORE_PODS = (Pod.AMF, Pod.SMF, Pod.UPF, Pod.DB)


def parse_pod(name: str) -> Pod:
    try:
        return Pod(name)
    except ValueError:
        raise ValueError(f"not an inventory pod: {name!r}") from None


# -- durations ---------------------------------------------------------------

_DURATION_RE = re.compile(r"^(?:(\d+)d)?(?:(\d+)h)?(?:(\d+)m)?(?:(\d+)s)?$")


def format_duration(seconds: int) -> str:
    """kubectl-style age string. Lossless: zero components are omitted, never rounded."""
    if seconds < 0:
        raise ValueError("negative duration")
    if seconds == 0:
        return "0s"
    days, rem = divmod(seconds, 86400)
    hours, rem = divmod(rem, 3600)
    minutes, secs = divmod(rem, 60)
    parts = [(days, "d"), (hours, "h"), (minutes, "m"), (secs, "s")]
    return "".join(f"{v}{u}" for v, u in parts if v)


def parse_duration(text: str) -> int:
    m = _DURATION_RE.match(text.strip())
    if not m or not any(m.groups()):
        raise ValueError(f"bad duration: {text!r}")
    d, h, mi, s = (int(g) if g else 0 for g in m.groups())
    return ((d * 24 + h) * 60 + mi) * 60 + s


# -- pod status --------------------------------------------------------------


@dataclass(frozen=True)
class PodStatusRow:
    name: Pod
    ready: int
    total: int
    status: str
    restarts: int = 0
    age: int = 0  # seconds

    def __post_init__(self):
        if not isinstance(self.name, Pod):
            object.__setattr__(self, "name", parse_pod(self.name))
        if not 0 <= self.ready <= self.total:
            raise ValueError(f"bad READY {self.ready}/{self.total}")
        if self.restarts < 0 or self.age < 0:
            raise ValueError("restarts and age must be non-negative")
        if not self.status or re.search(r"\s", self.status):
            raise ValueError(f"status must be one non-empty token: {self.status!r}")

    @property
    def ready_text(self) -> str:
        return f"{self.ready}/{self.total}"

    def columns(self) -> tuple[str, str, str, str, str]:
        return (self.name.value, self.ready_text, self.status, str(self.restarts),
                format_duration(self.age))


POD_TABLE_HEADER = ("NAME", "READY", "STATUS", "RESTARTS", "AGE")


def _align(rows: Sequence[Sequence[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    out = []
    for r in rows:
        cells = [c.ljust(w) for c, w in zip(r[:-1], widths)] + [r[-1]]
        out.append("   ".join(cells))
    return out


def render_pod_table(rows: Sequence[PodStatusRow]) -> str:
    return "\n".join(_align([POD_TABLE_HEADER] + [r.columns() for r in rows])) + "\n"


def parse_pod_row(line: str, file: str = "<pods>", lineno: int = 0) -> PodStatusRow:
    cols = line.split()
    if len(cols) != 5:
        raise ParseError(file, lineno, f"expected 5 columns, got {len(cols)}")
    name, ready, status, restarts, age = cols
    try:
        k, n = (int(x) for x in ready.split("/"))
        return PodStatusRow(parse_pod(name), k, n, status, int(restarts), parse_duration(age))
    except ValueError as exc:
        raise ParseError(file, lineno, str(exc)) from None


def parse_pod_table(text: str, file: str = "<pods>") -> tuple[PodStatusRow, ...]:
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines or lines[0].split() != list(POD_TABLE_HEADER):
        raise ParseError(file, 1, "missing NAME READY STATUS RESTARTS AGE header")
    return tuple(parse_pod_row(ln, file, i) for i, ln in enumerate(lines[1:], start=2))


# -- logs --------------------------------------------------------------------

LEVELS = ("info", "warn", "debug", "trace", "unleveled")
COLORS = ("green", "yellow", "red", "none")
ANSI_CODES = {"red": 31, "green": 32, "yellow": 33}

_TAG_RE = re.compile(r"^\[(info|warn|debug|trace)\] (.*)$", re.S)
_SGR_RE = re.compile(r"\x1b\[([0-9;]*)m")
_BRIGHT = {91: "red", 92: "green", 93: "yellow", 31: "red", 32: "green", 33: "yellow"}


def sgr_color(text: str) -> str:
    """Color named by the first green/yellow/red SGR foreground code in ``text``.

    Anything that is not a well-formed ``ESC[...m`` sequence is ignored, so
    malformed escapes leave the line uncolored.
    """
    for m in _SGR_RE.finditer(text):
        params = [p for p in m.group(1).split(";")]
        i = 0
        while i < len(params):
            p = params[i]
            if not p.isdigit():
                i += 1
                continue
            code = int(p)
            if code in (38, 48):
                # extended color: 38;5;n or 38;2;r;g;b
                if i + 1 < len(params) and params[i + 1] == "5":
                    i += 3
                elif i + 1 < len(params) and params[i + 1] == "2":
                    i += 5
                else:
                    i += 1
                continue
            if code in _BRIGHT:
                return _BRIGHT[code]
            i += 1
    return "none"


def strip_sgr(text: str) -> str:
    return _SGR_RE.sub("", text)


@dataclass(frozen=True, slots=True)
class LogLine:
    source: Pod
    level: str
    text: str
    seq: int
    color: Optional[str] = None

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"bad level {self.level!r}")
        if self.seq < 0:
            raise ValueError("seq must be non-negative")
        if any(ch in self.text for ch in "\n\r\x1b"):
            raise ValueError("log text must be a single line without escapes")
        if self.source is Pod.GNB:
            if self.color not in COLORS:
                raise ValueError("gNB lines need a color (green/yellow/red/none)")
            if self.level != "unleveled":
                raise ValueError("gNB lines are colored, not leveled")
        else:
            if self.color is not None:
                raise ValueError("only gNB lines carry a color")
            if self.level == "unleveled" and _TAG_RE.match(self.text):
                raise ValueError("text starting with a level tag is a leveled line")


def render_log_line(line: LogLine, seq: bool = True, ansi: bool = True) -> str:
    if line.source is Pod.GNB:
        body = line.text
        if ansi and line.color in ANSI_CODES:
            body = f"\x1b[{ANSI_CODES[line.color]}m{body}\x1b[0m"
    elif line.level == "unleveled":
        body = line.text
    else:
        body = f"[{line.level}] {line.text}"
    return f"{line.seq} {body}" if seq else body


def parse_log_line(raw: str, source: Pod, seq: Optional[int] = None) -> LogLine:
    """Inverse of :func:`render_log_line`. When ``seq`` is given the raw line has no prefix."""
    if seq is None:
        head, sep, body = raw.partition(" ")
        if not sep or not head.isdigit():
            raise ValueError(f"missing sequence prefix: {raw!r}")
        seq = int(head)
    else:
        body = raw
    if source is Pod.GNB:
        return LogLine(source, "unleveled", strip_sgr(body), seq, sgr_color(body))
    m = _TAG_RE.match(body)
    if m:
        return LogLine(source, m.group(1), m.group(2), seq)
    return LogLine(source, "unleveled", body, seq)


def render_log(lines: Sequence[LogLine]) -> str:
    return "".join(render_log_line(ln) + "\n" for ln in lines)


def parse_log(text: str, source: Pod, file: str = "<log>") -> tuple[LogLine, ...]:
    if not text:
        return ()
    if not text.endswith("\n"):
        raise ParseError(file, text.count("\n") + 1, "truncated final line")
    out = []
    for i, raw in enumerate(text[:-1].split("\n"), start=1):
        try:
            out.append(parse_log_line(raw, source))
        except ValueError as exc:
            raise ParseError(file, i, str(exc)) from None
    return tuple(out)


# -- events ------------------------------------------------------------------

WARNING_KINDS = frozenset({"BackOff", "Failed", "Killing", "Unhealthy"})
EVENT_HEADER = ("TIME", "TYPE", "REASON", "OBJECT", "MESSAGE")


@dataclass(frozen=True)
class ClusterEvent:
    timestamp: int
    kind: str
    involved: Pod
    message: str

    def __post_init__(self):
        if self.timestamp < 0:
            raise ValueError("negative timestamp")
        if not self.kind or re.search(r"\s", self.kind):
            raise ValueError(f"event kind must be one token: {self.kind!r}")
        if not self.message or self.message != self.message.strip() or "\n" in self.message:
            raise ValueError("event message must be a trimmed single line")

    @property
    def type(self) -> str:
        return "Warning" if self.kind in WARNING_KINDS else "Normal"

    def columns(self) -> tuple[str, ...]:
        return (format_duration(self.timestamp), self.type, self.kind,
                f"pod/{self.involved.value}", self.message)


def render_event(e: ClusterEvent) -> str:
    return "   ".join(e.columns())


def render_events(events: Sequence[ClusterEvent]) -> str:
    return "\n".join(_align([EVENT_HEADER] + [e.columns() for e in events])) + "\n"


def parse_events(text: str, file: str = "<events>") -> tuple[ClusterEvent, ...]:
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines or lines[0].split() != list(EVENT_HEADER):
        raise ParseError(file, 1, "missing events header")
    out = []
    for i, ln in enumerate(lines[1:], start=2):
        cols = ln.split(None, 4)
        if len(cols) != 5 or not cols[3].startswith("pod/"):
            raise ParseError(file, i, "expected TIME TYPE REASON pod/NAME MESSAGE")
        try:
            out.append(ClusterEvent(parse_duration(cols[0]), cols[2], parse_pod(cols[3][4:]),
                                    cols[4].strip()))
        except ValueError as exc:
            raise ParseError(file, i, str(exc)) from None
    return tuple(out)


# -- rtt ---------------------------------------------------------------------

_RTT_RE = re.compile(
    r"^(\S+): rtt min/avg/max/mdev = ([0-9.]+)/([0-9.]+)/([0-9.]+)/([0-9.]+) ms$")
_RTT_MISSING_RE = re.compile(r"^(\S+): no rtt statistics \(100% packet loss\)$")


@dataclass(frozen=True)
class RttReport:
    ue: Pod
    min: float = 0.0
    avg: float = 0.0
    max: float = 0.0
    mdev: float = 0.0
    present: bool = True

    def __post_init__(self):
        if not isinstance(self.ue, Pod):
            object.__setattr__(self, "ue", parse_pod(self.ue))
        for name in ("min", "avg", "max", "mdev"):
            # ping prints three decimals; store exactly what would be printed
            value = round(float(getattr(self, name)), 3) if self.present else 0.0
            object.__setattr__(self, name, value)
        if self.present and not (0 <= self.min <= self.avg <= self.max and self.mdev >= 0):
            raise ValueError(f"inconsistent rtt stats for {self.ue}")

    @classmethod
    def missing(cls, ue: Pod) -> "RttReport":
        return cls(ue, present=False)

    def render(self) -> str:
        if not self.present:
            return f"{self.ue.value}: no rtt statistics (100% packet loss)"
        return (f"{self.ue.value}: rtt min/avg/max/mdev = "
                f"{self.min:.3f}/{self.avg:.3f}/{self.max:.3f}/{self.mdev:.3f} ms")


def parse_rtt_line(line: str) -> RttReport:
    m = _RTT_RE.match(line)
    if m:
        return RttReport(parse_pod(m.group(1)), *(float(g) for g in m.groups()[1:]))
    m = _RTT_MISSING_RE.match(line)
    if m:
        return RttReport.missing(parse_pod(m.group(1)))
    raise ValueError(f"not an rtt line: {line!r}")


def render_rtt(reports: Mapping[Pod, RttReport]) -> str:
    return "".join(reports[ue].render() + "\n" for ue in sorted(reports, key=INVENTORY.index))


def parse_rtt(text: str, file: str = "<rtt>") -> dict[Pod, RttReport]:
    out = {}
    for i, ln in enumerate(text.split("\n"), start=1):
        if not ln.strip():
            continue
        try:
            r = parse_rtt_line(ln)
        except ValueError as exc:
            raise ParseError(file, i, str(exc)) from None
        out[r.ue] = r
    return out


# -- diagnosis ---------------------------------------------------------------


@dataclass(frozen=True)
class Diagnosis:
    detected: bool
    fault: Optional[FaultType] = None
    component: Optional[Pod] = None
    detail: str = ""
    raw_text: str = ""
    # False for model answers that matched no part of the answer grammar
    parsed: bool = True

    def __post_init__(self):
        if not self.detected and self.fault is not None:
            raise ValueError("a negative diagnosis carries no fault")
        if self.fault is FaultType.HEALTHY:
            raise ValueError("use detected=False for a healthy verdict")

    @property
    def predicted_label(self) -> Optional[FaultType]:
        """Healthy for negatives, the fault for positives, None when unknown or unparseable."""
        if not self.parsed:
            return None
        return self.fault if self.detected else FaultType.HEALTHY


# -- snapshot ----------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSnapshot:
    id: str
    label: FaultType
    pod_table: tuple[PodStatusRow, ...]
    logs: Mapping[Pod, tuple[LogLine, ...]]
    descriptions: Mapping[Pod, str]
    events: tuple[ClusterEvent, ...]
    rtt_before: Mapping[Pod, RttReport]
    rtt_after: Mapping[Pod, RttReport]
    target: Optional[Pod] = None
    magnitude: Optional[float] = None

    def __post_init__(self):
        if not self.id or re.search(r"[\s/=]", self.id):
            raise ValueError(f"snapshot id must be a plain token: {self.id!r}")
        if set(self.rtt_before) != set(self.rtt_after):
            raise ValueError("rtt_before and rtt_after must cover the same UEs")
        # every inventory pod gets a (possibly empty) log and description
        logs = {p: tuple(self.logs.get(p, ())) for p in INVENTORY}
        for pod, lines in logs.items():
            if any(ln.source is not pod for ln in lines):
                raise ValueError(f"log for {pod} holds lines from another pod")
            if any(a.seq >= b.seq for a, b in zip(lines, lines[1:])):
                raise ValueError(f"log seq not strictly increasing for {pod}")
        object.__setattr__(self, "logs", logs)
        object.__setattr__(self, "descriptions",
                           {p: self.descriptions.get(p, "") for p in INVENTORY})
        object.__setattr__(self, "pod_table", tuple(self.pod_table))
        object.__setattr__(self, "events", tuple(self.events))
        if self.magnitude is not None:
            object.__setattr__(self, "magnitude", float(self.magnitude))

    def row(self, pod: Pod) -> Optional[PodStatusRow]:
        for r in self.pod_table:
            if r.name is pod:
                return r
        return None


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _read(path: Path, name: str) -> str:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except FileNotFoundError:
        raise MissingArtifact(name) from None


def render_label(s: ExperimentSnapshot) -> str:
    parts = [s.label.value, f"id={s.id}"]
    if s.target is not None:
        parts.append(f"target={s.target.value}")
    if s.magnitude is not None:
        parts.append(f"magnitude={s.magnitude!r}")
    return " ".join(parts) + "\n"


def parse_label(text: str, file: str = "label.txt") -> dict:
    tokens = text.split()
    if not tokens:
        raise ParseError(file, 1, "empty label")
    out: dict = {"target": None, "magnitude": None}
    try:
        out["label"] = parse_fault_label(tokens[0])
        for tok in tokens[1:]:
            key, sep, value = tok.partition("=")
            if not sep or key not in ("id", "target", "magnitude"):
                raise ValueError(f"unexpected token {tok!r}")
            out[key] = {"id": str, "target": parse_pod, "magnitude": float}[key](value)
    except (ValueError, UnknownLabel) as exc:
        raise ParseError(file, 1, str(exc)) from None
    if "id" not in out:
        raise ParseError(file, 1, "missing id")
    return out


def read_label(directory: os.PathLike | str) -> dict:
    return parse_label(_read(Path(directory) / "label.txt", "label"))


def save_snapshot(s: ExperimentSnapshot, directory: os.PathLike | str,
                  log_suffix: str = "") -> list[str]:
    """Write ``s`` under ``directory`` and return the relative paths written.

    ``log_suffix="_filtered"`` names the log files ``<pod>_filtered.txt``.
    """
    root = Path(directory)
    (root / "logs").mkdir(parents=True, exist_ok=True)
    (root / "describe").mkdir(exist_ok=True)
    for stale in (root / "logs").glob("*.txt"):
        stale.unlink()
    files: dict[str, str] = {"pods.txt": render_pod_table(s.pod_table)}
    for pod in INVENTORY:
        files[f"logs/{pod.value}{log_suffix}.txt"] = render_log(s.logs[pod])
    for pod in INVENTORY:
        files[f"describe/{pod.value}.txt"] = s.descriptions[pod]
    files["events.txt"] = render_events(s.events)
    files["rtt_before.txt"] = render_rtt(s.rtt_before)
    files["rtt_after.txt"] = render_rtt(s.rtt_after)
    files["label.txt"] = render_label(s)
    for rel, text in files.items():
        _write(root / rel, text)
    return list(files)


def load_snapshot(directory: os.PathLike | str) -> ExperimentSnapshot:
    root = Path(directory)
    meta = parse_label(_read(root / "label.txt", "label"))
    pods = parse_pod_table(_read(root / "pods.txt", "pods"), "pods.txt")
    logs = {}
    for pod in INVENTORY:
        path = root / "logs" / f"{pod.value}.txt"
        if not path.exists():
            path = root / "logs" / f"{pod.value}_filtered.txt"
        rel = f"logs/{path.name}"
        logs[pod] = parse_log(_read(path, f"logs/{pod.value}"), pod, rel)
    descriptions = {pod: _read(root / "describe" / f"{pod.value}.txt", f"describe/{pod.value}")
                    for pod in INVENTORY}
    events = parse_events(_read(root / "events.txt", "events"), "events.txt")
    before = parse_rtt(_read(root / "rtt_before.txt", "rtt_before"), "rtt_before.txt")
    after = parse_rtt(_read(root / "rtt_after.txt", "rtt_after"), "rtt_after.txt")
    try:
        return ExperimentSnapshot(
            id=meta["id"], label=meta["label"], pod_table=pods, logs=logs,
            descriptions=descriptions, events=events, rtt_before=before, rtt_after=after,
            target=meta["target"], magnitude=meta["magnitude"])
    except ValueError as exc:
        raise ParseError(str(root), 0, str(exc)) from None


def is_snapshot_dir(directory: os.PathLike | str) -> bool:
    return (Path(directory) / "label.txt").is_file()


def iter_snapshot_dirs(root: os.PathLike | str) -> list[Path]:
    """Snapshot directories directly under ``root`` (or ``root`` itself), sorted by name."""
    root = Path(root)
    if is_snapshot_dir(root):
        return [root]
    return sorted(p for p in root.iterdir() if p.is_dir() and is_snapshot_dir(p))
