import json
import subprocess
import sys

import pytest

from fivegdiag.cli import main
from fivegdiag.collector import make_campaign_plans, run_campaign, write_plans
from fivegdiag.config import load_config
from fivegdiag.model import iter_snapshot_dirs, load_snapshot


@pytest.fixture(scope="module")
def collected(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    run_campaign(make_campaign_plans(12, seed=2), root / "raw")
    return root


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "campaign" in capsys.readouterr().out


def test_unknown_subcommand():
    assert main(["frobnicate"]) == 2
    assert main([]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fivegdiag", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "diagnose" in res.stdout


def test_simulate(capsys):
    assert main(["simulate", "--seconds", "90", "--fault", "PodFailure", "--target", "oai-smf",
                 "--inject-at", "30"]) == 0
    out = capsys.readouterr().out
    assert "RunContainerError" in out and "rtt before:" in out


def test_simulate_bad_target(capsys):
    assert main(["simulate", "--fault", "PodKill", "--target", "oai-gnb"]) == 1
    assert "error" in capsys.readouterr().err


def test_collect_with_plan_file(tmp_path, capsys):
    plans = tmp_path / "plans.txt"
    write_plans(make_campaign_plans(3, seed=1), plans)
    assert main(["collect", "--plans", str(plans), "--out", str(tmp_path / "out")]) == 0
    assert len(iter_snapshot_dirs(tmp_path / "out")) == 3


def test_collect_generated(tmp_path):
    assert main(["--seed", "4", "collect", "--experiments", "2", "--out", str(tmp_path / "o"),
                 "--write-plans", str(tmp_path / "p.txt")]) == 0
    assert (tmp_path / "p.txt").read_text().count("id=") == 2


def test_pipeline(collected, tmp_path, capsys):
    filt = tmp_path / "filtered"
    assert main(["filter", "--in", str(collected / "raw"), "--out", str(filt)]) == 0
    first = iter_snapshot_dirs(filt)[0]
    assert (first / "logs" / "oai-gnb_filtered.txt").exists()

    data = tmp_path / "data" / "dataset.jsonl"
    assert main(["assemble", "--snapshots", str(filt), "--out", str(data), "--split-seed", "3"]) == 0
    sizes = {n: len((data.parent / f"{n}.jsonl").read_text().splitlines()) for n in ("train", "val", "test")}
    assert sum(sizes.values()) == 12 and sizes["train"] == 6

    preds = tmp_path / "preds.jsonl"
    assert main(["diagnose", "--snapshot", str(filt), "--out", str(preds)]) == 0
    rows = [json.loads(ln) for ln in preds.read_text().splitlines()]
    assert len(rows) == 12 and set(rows[0]) == {"snapshot_id", "text"}

    capsys.readouterr()
    assert main(["evaluate", "--predictions", str(preds), "--labels", str(filt)]) == 0
    out = capsys.readouterr().out
    assert "mode: exact" in out
    assert out.splitlines()[3].split() == ["accuracy", "1.0000"]

    report = tmp_path / "r.csv"
    assert main(["evaluate", "--predictions", str(preds), "--labels", str(filt), "--mode", "binary",
                 "--format", "csv", "--out", str(report)]) == 0
    assert "precision,1.000000" in report.read_text()

    assert main(["export", "--snapshots", str(filt), "--out", str(tmp_path / "ft.jsonl")]) == 0
    assert len((tmp_path / "ft.jsonl").read_text().splitlines()) == 12


def test_diagnose_single_snapshot(collected, capsys):
    d = iter_snapshot_dirs(collected / "raw")[0]
    assert main(["diagnose", "--snapshot", str(d)]) == 0
    assert capsys.readouterr().out.startswith("Yes, I/O injection, oai-db")


def test_diagnose_empty_directory(tmp_path, capsys):
    assert main(["diagnose", "--snapshot", str(tmp_path)]) == 1


def test_evaluate_unknown_snapshot(collected, tmp_path):
    preds = tmp_path / "p.jsonl"
    preds.write_text(json.dumps({"snapshot_id": "nope", "text": "No fault detected"}) + "\n")
    assert main(["evaluate", "--predictions", str(preds), "--labels", str(collected / "raw")]) == 1


def test_campaign(tmp_path, capsys):
    assert main(["campaign", "--experiments", "12", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "mode: binary" in out and "mode: exact" in out
    for name in ("plans.txt", "predictions.jsonl", "report.txt", "dataset/dataset.jsonl"):
        assert (tmp_path / name).exists()
    assert load_snapshot(tmp_path / "snapshots" / "exp-000").id == "exp-000"


def test_campaign_test_split_csv(capsys):
    assert main(["campaign", "--experiments", "24", "--eval-on", "test", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.count("metric,value") == 2 and "n,6" in out
    # two runs per class leave nothing for the test split
    assert main(["campaign", "--experiments", "12", "--eval-on", "test"]) == 1
    assert "test split is empty" in capsys.readouterr().err


def test_config_file(tmp_path, capsys):
    ini = tmp_path / "c.ini"
    ini.write_text("[sim]\nseed = 9\nsignature_dropout = 0.25\nstuck_pods = oai-db, oai-amf\n"
                   "[rules]\nrule_precedence = PodKill, PodFailure, IOInjection, NetworkLoss, NetworkDelay\n"
                   "[endpoint]\nmax_attempts = 5\n[dataset]\ninclude_descriptions = yes\n")
    cfg = load_config(ini)
    assert cfg.sim.seed == 9 and cfg.sim.signature_dropout == 0.25
    assert cfg.sim.stuck_pods == ("oai-db", "oai-amf")
    assert cfg.rules.rule_precedence[0].value == "PodKill"
    assert cfg.endpoint.max_attempts == 5 and cfg.dataset.include_descriptions is True


@pytest.mark.parametrize("text", ["[sim]\nwarp = 1\n", "[telemetry]\nx = 1\n", "[sim]\nseed = many\n"])
def test_bad_config(tmp_path, text, capsys):
    ini = tmp_path / "bad.ini"
    ini.write_text(text)
    with pytest.raises(ValueError):
        load_config(ini)
    assert main(["--config", str(ini), "simulate", "--seconds", "1"]) == 1


def test_config_seed_used(tmp_path, capsys):
    ini = tmp_path / "c.ini"
    ini.write_text("[sim]\nseed = 5\n")
    main(["--config", str(ini), "simulate", "--seconds", "30"])
    a = capsys.readouterr().out
    main(["--seed", "5", "simulate", "--seconds", "30"])
    assert capsys.readouterr().out == a
