"""Rule-backend exact accuracy as signature dropout grows.

    python3 scripts/noise_sweep.py --experiments 118 --seeds 3
"""

import argparse
import statistics

from fivegdiag.collector import make_campaign_plans, run_experiment
from fivegdiag.diagnoser import diagnose_rule_based
from fivegdiag.evaluation import evaluate_exact
from fivegdiag.logfilter import filter_snapshot
from fivegdiag.model import FAULTS
from fivegdiag.sim import SimConfig


def accuracy(n: int, seed: int, dropout: float):
    cfg = SimConfig(signature_dropout=dropout)
    pairs = []
    for plan in make_campaign_plans(n, seed=seed):
        snap = run_experiment(plan, cfg)
        pairs.append((diagnose_rule_based(filter_snapshot(snap)), snap.label))
    return evaluate_exact(pairs)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--experiments", type=int, default=118)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--levels", type=float, nargs="+", default=[0.0, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0])
    args = ap.parse_args()
    print("dropout  accuracy  " + "  ".join(f"{f.value:>12}" for f in FAULTS))
    for p in args.levels:
        reports = [accuracy(args.experiments, s, p) for s in range(args.seeds)]
        acc = statistics.fmean(r.accuracy for r in reports)
        per = [statistics.fmean(r.per_fault_accuracy[f] for r in reports) for f in FAULTS]
        print(f"{p:7.2f}  {acc:8.3f}  " + "  ".join(f"{v:12.3f}" for v in per))


if __name__ == "__main__":
    main()
