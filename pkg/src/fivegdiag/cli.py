"""``fivegdiag`` command line: the whole pipeline as subcommands."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

from .collector import (ExperimentPlan, make_campaign_plans, read_plans, run_campaign,
                        write_plans)
from .config import AppConfig, load_config
from .dataset import (assemble_user_message, example_from_snapshot, export_finetune_file,
                      split_dataset)
from .diagnoser import diagnose_rule_based, parse_or_unparsed
from .evaluation import evaluate_binary, evaluate_exact, render_report
from .logfilter import estimate_tokens, filter_snapshot
from .model import (INVENTORY, UES, FaultDiagError, iter_snapshot_dirs, load_snapshot,
                    parse_fault_label, parse_pod, read_label, render_events, render_log,
                    render_pod_table, save_snapshot)
from .remote import RemoteDiagnoser, build_request
from .sim import (FaultSpec, advance, get_events, get_logs, get_pods, inject_fault,
                  measure_rtt, new_cluster)

log = logging.getLogger("fivegdiag")


def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=default, help="INI configuration file")
    p.add_argument("--seed", type=int, default=default, help="override the configured seed")
    p.add_argument("-v", "--verbose", action="store_true",
                   default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fivegdiag", description="Simulated 5G core fault injection, dataset building and diagnosis.")
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def cmd(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, description=help)
        _add_common(p, suppress=True)
        return p

    p = cmd("simulate", "run one simulated cluster and print its telemetry")
    p.add_argument("--seconds", type=int, default=240, help="virtual seconds to run")
    p.add_argument("--fault", help="fault class to inject")
    p.add_argument("--target", help="pod to inject into")
    p.add_argument("--magnitude", type=float, help="delay in ms or loss in percent")
    p.add_argument("--duration", type=int, help="fault duration in seconds")
    p.add_argument("--inject-at", type=int, default=60, help="virtual second of injection")
    p.add_argument("--show-logs", metavar="POD", help="also print this pod's raw log")

    p = cmd("collect", "run experiments and store one snapshot directory each")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--plans", help="plan file, one key=value record per line")
    src.add_argument("--experiments", type=int, help="generate this many uniform plans")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--parallelism", type=int)
    p.add_argument("--write-plans", help="save the generated plans to this file")

    p = cmd("filter", "filter snapshot logs (gNB by color, others by level)")
    p.add_argument("--in", dest="src", required=True, help="snapshot directory or a directory of them")
    p.add_argument("--out", required=True)

    p = cmd("assemble", "build the chat dataset and its train/val/test split")
    p.add_argument("--snapshots", required=True)
    p.add_argument("--out", required=True, help="full dataset file; splits are written next to it")
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--include-descriptions", action="store_true")

    p = cmd("diagnose", "diagnose snapshots with the rule engine or a remote model")
    p.add_argument("--snapshot", required=True, help="snapshot directory or a directory of them")
    p.add_argument("--backend", choices=("rules", "remote"), default="rules")
    p.add_argument("--out", help="write predictions as JSON lines")

    p = cmd("evaluate", "score predictions against snapshot labels")
    p.add_argument("--predictions", required=True)
    p.add_argument("--labels", required=True, help="directory of snapshot directories")
    p.add_argument("--mode", choices=("binary", "exact"), default="exact")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--macro-f1", action="store_true")
    p.add_argument("--out")

    p = cmd("export", "write every snapshot as one fine-tuning record")
    p.add_argument("--snapshots", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--include-descriptions", action="store_true")

    p = cmd("campaign", "collect, filter, assemble, diagnose and evaluate in one run")
    p.add_argument("--experiments", type=int, default=118)
    p.add_argument("--backend", choices=("rules", "remote"), default="rules")
    p.add_argument("--out", help="working directory (default: a temporary one)")
    p.add_argument("--parallelism", type=int)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--noise", type=float, help="signature dropout probability")
    p.add_argument("--eval-on", choices=("all", "test"), default="all")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    return parser


# -- helpers -----------------------------------------------------------------

def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _load_all(root) -> list:
    dirs = iter_snapshot_dirs(root)
    if not dirs:
        raise FaultDiagError(f"no snapshot directories under {root}")
    return [load_snapshot(d) for d in dirs]


def _diagnoser(cfg: AppConfig, backend: str):
    if backend == "rules":
        return lambda s: diagnose_rule_based(s, cfg.rules), None
    remote = RemoteDiagnoser(cfg.endpoint)
    return (lambda s: parse_or_unparsed(remote.complete(build_request(s, cfg.endpoint)))), remote


def _write_predictions(rows: list[tuple[str, str]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sid, text in rows:
            fh.write(json.dumps({"snapshot_id": sid, "text": text}, ensure_ascii=False) + "\n")


def _read_predictions(path) -> list[tuple[str, str]]:
    with open(path, encoding="utf-8") as fh:
        return [(r["snapshot_id"], r["text"]) for r in map(json.loads, fh) if r]


def _score(pairs, mode: str, macro_f1: bool = False):
    return evaluate_binary(pairs) if mode == "binary" else evaluate_exact(pairs, macro_f1)


# -- subcommands -------------------------------------------------------------

def cmd_simulate(args, cfg: AppConfig, seed: int) -> int:
    state = new_cluster(seed, cfg.sim)
    if args.fault:
        if not args.target:
            raise FaultDiagError("--fault needs --target")
        spec = FaultSpec(parse_fault_label(args.fault), parse_pod(args.target), args.magnitude,
                         args.duration)
        at = min(args.inject_at, args.seconds)
        state = advance(state, at)
        before = {ue: measure_rtt(state, ue) for ue in UES}
        state = inject_fault(state, spec)
        state = advance(state, args.seconds - at)
    else:
        state = advance(state, args.seconds)
        before = None
    out = [f"clock: {state.clock}s", "", render_pod_table(get_pods(state)), render_events(get_events(state))]
    if before:
        out += ["rtt before:"] + [before[ue].render() for ue in UES]
    out += ["rtt now:"] + [measure_rtt(state, ue).render() for ue in UES] + ["", "log volume:"]
    for pod in INVENTORY:
        text = render_log(get_logs(state, pod))
        out.append(f"  {pod.value:<8} {len(get_logs(state, pod)):>6} lines "
                   f"{estimate_tokens(text, cfg.dataset.chars_per_token):>8} tokens")
    sys.stdout.write("\n".join(out) + "\n")
    if args.show_logs:
        sys.stdout.write(render_log(get_logs(state, parse_pod(args.show_logs))))
    return 0


def _plans_from_args(args, cfg: AppConfig, seed: int) -> list[ExperimentPlan]:
    if args.plans:
        return read_plans(args.plans)
    return make_campaign_plans(args.experiments, seed, cfg.collector.warmup_s, cfg.collector.observe_s)


def cmd_collect(args, cfg: AppConfig, seed: int) -> int:
    plans = _plans_from_args(args, cfg, seed)
    if args.write_plans:
        write_plans(plans, args.write_plans)
    manifests = run_campaign(plans, args.out, args.parallelism or cfg.collector.parallelism, cfg.sim)
    print(f"collected {len(manifests)} snapshots into {args.out}")
    return 0


def _filter_dirs(src, dst) -> list[Path]:
    src, dst = Path(src), Path(dst)
    dirs = iter_snapshot_dirs(src)
    if not dirs:
        raise FaultDiagError(f"no snapshot directories under {src}")
    single = dirs == [src]
    written = []
    for d in dirs:
        target = dst if single else dst / d.name
        save_snapshot(filter_snapshot(load_snapshot(d)), target, log_suffix="_filtered")
        written.append(target)
    return written


def cmd_filter(args, cfg: AppConfig, seed: int) -> int:
    written = _filter_dirs(args.src, args.out)
    print(f"filtered {len(written)} snapshot(s) into {args.out}")
    return 0


def _assemble(root, out, split_seed: int, cfg: AppConfig, include_descriptions: bool) -> dict:
    snaps = _load_all(root)
    cpt = cfg.dataset.chars_per_token
    raw_tokens = sum(estimate_tokens(assemble_user_message(s), cpt) for s in snaps)
    filtered = [filter_snapshot(s) for s in snaps]
    examples = [example_from_snapshot(s, include_descriptions) for s in filtered]
    kept_tokens = sum(estimate_tokens(ex.user, cpt) for ex in examples)
    log.info("user messages: %d tokens unfiltered, %d tokens filtered", raw_tokens, kept_tokens)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    export_finetune_file(examples, out)
    train, val, test = split_dataset(examples, split_seed)
    for name, part in (("train", train), ("val", val), ("test", test)):
        export_finetune_file(part, out.parent / f"{name}.jsonl")
    return {"examples": examples, "train": train, "val": val, "test": test,
            "raw_tokens": raw_tokens, "filtered_tokens": kept_tokens}


def cmd_assemble(args, cfg: AppConfig, seed: int) -> int:
    res = _assemble(args.snapshots, args.out, args.split_seed, cfg,
                    args.include_descriptions or cfg.dataset.include_descriptions)
    print(f"{len(res['examples'])} examples: train {len(res['train'])}, val {len(res['val'])}, "
          f"test {len(res['test'])}; {res['filtered_tokens']} tokens after filtering "
          f"(unfiltered {res['raw_tokens']})")
    return 0


def cmd_diagnose(args, cfg: AppConfig, seed: int) -> int:
    root = Path(args.snapshot)
    snaps = _load_all(root)
    diagnose, closer = _diagnoser(cfg, args.backend)
    try:
        rows = [(s.id, diagnose(s).raw_text) for s in snaps]
    finally:
        if closer:
            closer.close()
    if args.out:
        _write_predictions(rows, args.out)
    if len(snaps) == 1 and iter_snapshot_dirs(root) == [root]:
        print(rows[0][1])
    else:
        for sid, text in rows:
            print(f"{sid}\t{text}")
    return 0


def cmd_evaluate(args, cfg: AppConfig, seed: int) -> int:
    labels = {d.name: read_label(d) for d in iter_snapshot_dirs(args.labels)}
    by_id = {meta["id"]: meta["label"] for meta in labels.values()}
    pairs = []
    for sid, text in _read_predictions(args.predictions):
        if sid not in by_id:
            raise FaultDiagError(f"prediction for unknown snapshot {sid!r}")
        pairs.append((parse_or_unparsed(text), by_id[sid]))
    _emit(render_report(_score(pairs, args.mode, args.macro_f1), args.format), args.out)
    return 0


def cmd_export(args, cfg: AppConfig, seed: int) -> int:
    examples = [example_from_snapshot(filter_snapshot(s),
                                      args.include_descriptions or cfg.dataset.include_descriptions)
                for s in _load_all(args.snapshots)]
    n = export_finetune_file(examples, args.out)
    print(f"exported {n} records to {args.out}")
    return 0


def cmd_campaign(args, cfg: AppConfig, seed: int) -> int:
    if args.noise is not None:
        cfg = dataclasses.replace(cfg, sim=dataclasses.replace(cfg.sim, signature_dropout=args.noise))
    tmp = None
    if args.out:
        work = Path(args.out)
    else:
        tmp = tempfile.TemporaryDirectory(prefix="fivegdiag-")
        work = Path(tmp.name)
    try:
        plans = make_campaign_plans(args.experiments, seed, cfg.collector.warmup_s,
                                    cfg.collector.observe_s)
        work.mkdir(parents=True, exist_ok=True)
        write_plans(plans, work / "plans.txt")
        run_campaign(plans, work / "snapshots", args.parallelism or cfg.collector.parallelism, cfg.sim)
        _filter_dirs(work / "snapshots", work / "filtered")
        res = _assemble(work / "filtered", work / "dataset" / "dataset.jsonl", args.split_seed, cfg,
                        cfg.dataset.include_descriptions)
        snaps = {s.id: s for s in _load_all(work / "filtered")}
        ids = sorted(snaps) if args.eval_on == "all" else [ex.snapshot_id for ex in res["test"]]
        if not ids:
            raise FaultDiagError("the test split is empty; run more experiments")
        diagnose, closer = _diagnoser(cfg, args.backend)
        try:
            rows = [(sid, diagnose(snaps[sid]).raw_text) for sid in ids]
        finally:
            if closer:
                closer.close()
        _write_predictions(rows, work / "predictions.jsonl")
        pairs = [(parse_or_unparsed(text), snaps[sid].label) for sid, text in rows]
        report = (render_report(evaluate_binary(pairs), args.format) + "\n"
                  + render_report(evaluate_exact(pairs), args.format))
        (work / "report.txt").write_text(report, encoding="utf-8")
        log.info("campaign artifacts in %s", work)
        sys.stdout.write(report)
    finally:
        if tmp is not None:
            tmp.cleanup()
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "collect": cmd_collect,
    "filter": cmd_filter,
    "assemble": cmd_assemble,
    "diagnose": cmd_diagnose,
    "evaluate": cmd_evaluate,
    "export": cmd_export,
    "campaign": cmd_campaign,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg.sim.seed
        return COMMANDS[args.command](args, cfg, seed)
    except (FaultDiagError, ValueError, OSError) as exc:
        print(f"fivegdiag {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
