import hypothesis.strategies as st
import pytest

from fivegdiag.collector import make_campaign_plans, run_experiment
from fivegdiag.model import (INVENTORY, LEVELS, UES, ClusterEvent, ExperimentSnapshot, FaultType,
                             LogLine, Pod, PodStatusRow, RttReport)

# acceptance lines collected by test_acceptance.py and printed at the end of the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


_chars = st.characters(blacklist_categories=("Cs",), blacklist_characters="\n\r\x1b")
line_text = st.text(_chars, max_size=40)
token = st.from_regex(r"[A-Za-z][A-Za-z0-9]{0,15}", fullmatch=True)
pods = st.sampled_from(INVENTORY)
ms = st.floats(0, 5000, allow_nan=False)


@st.composite
def log_lines(draw, pod, max_size=12):
    n = draw(st.integers(0, max_size))
    seqs = sorted(draw(st.sets(st.integers(0, 10_000), min_size=n, max_size=n)))
    out = []
    for seq in seqs:
        text = draw(line_text)
        if pod is Pod.GNB:
            out.append(LogLine(pod, "unleveled", text, seq, draw(st.sampled_from(["green", "yellow", "red", "none"]))))
        else:
            level = draw(st.sampled_from(LEVELS))
            if level == "unleveled" and text.startswith(("[info] ", "[warn] ", "[debug] ", "[trace] ")):
                text = "x" + text
            out.append(LogLine(pod, level, text, seq))
    return tuple(out)


@st.composite
def rtt_reports(draw, ue):
    if not draw(st.booleans()):
        return RttReport.missing(ue)
    lo, mid, hi = sorted(draw(st.lists(ms, min_size=3, max_size=3)))
    return RttReport(ue, lo, mid, hi, draw(ms))


@st.composite
def pod_rows(draw, pod):
    total = draw(st.integers(1, 3))
    return PodStatusRow(pod, draw(st.integers(0, total)), total, draw(token),
                        draw(st.integers(0, 500)), draw(st.integers(0, 10 ** 6)))


@st.composite
def events(draw):
    msg = draw(st.text(_chars, min_size=1, max_size=40).map(str.strip).filter(bool))
    return ClusterEvent(draw(st.integers(0, 10 ** 5)), draw(token), draw(pods), msg)


@st.composite
def snapshots(draw):
    label = draw(st.sampled_from(list(FaultType)))
    target = draw(st.none() | pods)
    return ExperimentSnapshot(
        id=draw(st.from_regex(r"[a-z0-9][a-z0-9_-]{0,11}", fullmatch=True)),
        label=label,
        pod_table=tuple(draw(pod_rows(p)) for p in INVENTORY if draw(st.booleans()) or p is Pod.AMF),
        logs={p: draw(log_lines(p)) for p in INVENTORY},
        descriptions={p: draw(st.text(st.characters(blacklist_categories=("Cs",)), max_size=60))
                      for p in INVENTORY},
        events=tuple(sorted(draw(st.lists(events(), max_size=6)), key=lambda e: e.timestamp)),
        rtt_before={ue: draw(rtt_reports(ue)) for ue in UES},
        rtt_after={ue: draw(rtt_reports(ue)) for ue in UES},
        target=target,
        magnitude=draw(st.none() | st.floats(0, 1000, allow_nan=False)),
    )


@pytest.fixture(scope="session")
def small_campaign():
    """Two noiseless snapshots per class."""
    return [run_experiment(p) for p in make_campaign_plans(12, seed=5)]
