import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fivegdiag.diagnoser import matching_rules
from fivegdiag.logfilter import estimate_tokens
from fivegdiag.model import (CORE_PODS, INVENTORY, UES, ExperimentSnapshot, FaultType, Pod,
                             render_event, render_log)
from fivegdiag.sim import (IO_SIGNATURE, VALID_TARGETS, FaultAlreadyActive, FaultSpec,
                           InvalidTarget, NotAUe, SimConfig, UnknownPod, advance, all_ready,
                           describe_pod, get_events, get_logs, get_pods, inject_fault,
                           measure_rtt, new_cluster)


def _running(seed=0, config=None, t=60):
    return advance(new_cluster(seed, config), t)


def test_new_cluster_is_ready():
    s = new_cluster(1)
    assert s.clock == 0 and all_ready(s)
    assert [r.name for r in get_pods(s)] == list(INVENTORY)
    assert all(r.age == 0 and r.restarts == 0 for r in get_pods(s))


def test_advance_zero_is_identity():
    s = _running()
    assert advance(s, 0) is s


def test_advance_negative():
    with pytest.raises(ValueError):
        advance(new_cluster(0), -1)


def test_advance_is_deterministic_and_composable():
    a = advance(new_cluster(3), 90)
    b = advance(advance(new_cluster(3), 40), 50)
    assert a == b
    assert a != advance(new_cluster(4), 90)


def test_ages_and_clock():
    s = _running(t=75)
    assert s.clock == 75
    assert all(r.age == 75 for r in get_pods(s))


def test_healthy_four_minutes_is_large():
    s = _running(t=240)
    gnb = get_logs(s, Pod.GNB)
    assert len(gnb) > 2500
    assert estimate_tokens(render_log(gnb)) > 60000
    assert not any("unknown RNTI" in ln.text for ln in gnb)


def test_log_seq_strictly_increasing():
    s = _running(t=120)
    for pod in INVENTORY:
        seqs = [ln.seq for ln in get_logs(s, pod)]
        assert seqs == sorted(set(seqs))


def test_io_signature():
    s = inject_fault(_running(), FaultSpec(FaultType.IO_INJECTION, Pod.DB))
    s = advance(s, 30)
    assert any(IO_SIGNATURE in ln.text for ln in get_logs(s, Pod.DB))
    assert "Unknown database 'oai_5g'" in IO_SIGNATURE


def test_loss_signature():
    s = inject_fault(_running(), FaultSpec(FaultType.NETWORK_LOSS, Pod.GNB, 60))
    s = advance(s, 30)
    red = [ln for ln in get_logs(s, Pod.GNB) if ln.color == "red" and "unknown RNTI" in ln.text]
    assert red


def test_pod_failure_row_and_backoff():
    s = inject_fault(_running(), FaultSpec(FaultType.POD_FAILURE, Pod.AMF))
    row = {r.name: r for r in get_pods(s)}[Pod.AMF]
    assert row.status == "RunContainerError" and row.ready == 0
    s = advance(s, 35)
    row = {r.name: r for r in get_pods(s)}[Pod.AMF]
    assert row.restarts == 3
    assert sum(e.kind == "BackOff" for e in get_events(s)) == 3


def test_pod_kill_lifecycle():
    cfg = SimConfig()
    s = inject_fault(_running(t=200), FaultSpec(FaultType.POD_KILL, Pod.SMF))
    assert {r.name: r for r in get_pods(s)}[Pod.SMF].status == "Terminating"
    s = advance(s, cfg.restart_delay_s)
    row = {r.name: r for r in get_pods(s)}[Pod.SMF]
    assert row.status == "ContainerCreating" and row.age == 0
    assert get_logs(s, Pod.SMF) == ()
    s = advance(s, cfg.container_creating_s)
    row = {r.name: r for r in get_pods(s)}[Pod.SMF]
    assert row.status == "Running" and row.age == cfg.container_creating_s
    kinds = [e.kind for e in get_events(s) if e.involved is Pod.SMF]
    assert kinds[-5:] == ["Killing", "Scheduled", "Pulled", "Created", "Started"]


def test_describe_shows_kill_event():
    s = advance(inject_fault(_running(), FaultSpec(FaultType.POD_KILL, Pod.UPF)), 2)
    text = describe_pod(s, Pod.UPF)
    killing = next(e for e in get_events(s) if e.kind == "Killing")
    assert render_event(killing) in text
    assert text.startswith("Name:             oai-upf\n")


def test_fault_expiry():
    s = inject_fault(_running(), FaultSpec(FaultType.POD_FAILURE, Pod.DB, duration=20))
    s = advance(s, 21)
    assert s.active_fault is None
    assert all_ready(s)
    assert get_events(s)[-1].kind == "FaultRecovered"


def test_second_fault_rejected():
    s = inject_fault(_running(), FaultSpec(FaultType.IO_INJECTION, Pod.DB))
    with pytest.raises(FaultAlreadyActive):
        inject_fault(s, FaultSpec(FaultType.POD_KILL, Pod.AMF))


@pytest.mark.parametrize("fault,target", [
    (FaultType.IO_INJECTION, Pod.AMF),
    (FaultType.POD_KILL, Pod.GNB),
    (FaultType.NETWORK_DELAY, Pod.DB),
])
def test_invalid_target(fault, target):
    mag = 100.0 if fault is FaultType.NETWORK_DELAY else None
    with pytest.raises(InvalidTarget):
        inject_fault(_running(), FaultSpec(fault, target, mag))


@pytest.mark.parametrize("kwargs", [
    dict(fault=FaultType.NETWORK_DELAY, target=Pod.GNB),
    dict(fault=FaultType.NETWORK_LOSS, target=Pod.GNB, magnitude=120),
    dict(fault=FaultType.POD_KILL, target=Pod.AMF, magnitude=3),
    dict(fault=FaultType.HEALTHY, target=Pod.AMF),
    dict(fault=FaultType.POD_KILL, target="oai-nope"),
])
def test_fault_spec_validation(kwargs):
    with pytest.raises(ValueError):
        FaultSpec(**kwargs)


def test_observation_errors():
    s = _running()
    with pytest.raises(NotAUe):
        measure_rtt(s, Pod.AMF)
    with pytest.raises(UnknownPod):
        get_logs(s, "oai-nrf")
    with pytest.raises(UnknownPod):
        describe_pod(s, "nope")


def test_rtt_baseline_window():
    cfg = SimConfig()
    for seed in range(20):
        s = _running(seed)
        for ue in UES:
            r = measure_rtt(s, ue)
            assert r.present
            assert cfg.rtt_base_min_ms <= r.avg <= cfg.rtt_base_max_ms + cfg.rtt_jitter_ms
            assert r.min <= r.avg <= r.max and r.min > 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 16), st.integers(150, 400), st.sampled_from(VALID_TARGETS[FaultType.NETWORK_DELAY]))
def test_delay_raises_rtt(seed, delay, target):
    cfg = SimConfig()
    s = _running(seed, t=20)
    before = {ue: measure_rtt(s, ue) for ue in UES}
    s = advance(inject_fault(s, FaultSpec(FaultType.NETWORK_DELAY, target, delay)), 30)
    affected = UES if target in (Pod.GNB, Pod.UPF) else (target,)
    for ue in UES:
        diff = measure_rtt(s, ue).avg - before[ue].avg
        if ue in affected:
            assert delay - cfg.rtt_jitter_ms <= diff <= delay + cfg.rtt_jitter_ms
        else:
            assert abs(diff) <= cfg.rtt_jitter_ms


def test_total_loss_hides_rtt():
    s = advance(inject_fault(_running(), FaultSpec(FaultType.NETWORK_LOSS, Pod.UPF, 100)), 10)
    assert all(not measure_rtt(s, ue).present for ue in UES)


def test_partial_loss_keeps_rtt():
    s = advance(inject_fault(_running(), FaultSpec(FaultType.NETWORK_LOSS, Pod.UE1, 20)), 10)
    assert measure_rtt(s, Pod.UE1).present and measure_rtt(s, Pod.UE3).present


def test_stuck_pod_never_ready():
    s = advance(new_cluster(0, SimConfig(stuck_pods=("oai-db",))), 100)
    assert not all_ready(s)
    assert {r.name: r for r in get_pods(s)}[Pod.DB].status == "ContainerCreating"


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(signature_dropout=1.5)
    with pytest.raises(ValueError):
        SimConfig(rtt_base_min_ms=60, rtt_base_max_ms=50)
    with pytest.raises(ValueError):
        SimConfig(stuck_pods=("oai-foo",))


_faults = st.sampled_from(list(FaultType)).flatmap(
    lambda f: st.just(None) if f is FaultType.HEALTHY else st.builds(
        FaultSpec, st.just(f), st.sampled_from(VALID_TARGETS[f]),
        st.just(None) if f not in (FaultType.NETWORK_DELAY, FaultType.NETWORK_LOSS) else (
            st.floats(150, 400) if f is FaultType.NETWORK_DELAY else st.sampled_from([20.0, 40.0, 60.0, 100.0]))))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 20), _faults)
def test_noiseless_signatures_are_sound(seed, spec):
    """Without noise exactly the injected fault's rule fires (none for a healthy run)."""
    s = _running(seed, t=60)
    before = {ue: measure_rtt(s, ue) for ue in UES}
    if spec is not None:
        s = inject_fault(s, spec)
    s = advance(s, 120)
    snap = ExperimentSnapshot(
        "x", spec.fault if spec else FaultType.HEALTHY, tuple(get_pods(s)),
        {p: get_logs(s, p) for p in INVENTORY}, {}, get_events(s), before,
        {ue: measure_rtt(s, ue) for ue in UES})
    assert matching_rules(snap) == ([spec.fault] if spec else [])


def test_core_pods_cover_kill_targets():
    assert set(VALID_TARGETS[FaultType.POD_KILL]) == set(CORE_PODS)
