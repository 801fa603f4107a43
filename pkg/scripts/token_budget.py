"""Raw vs filtered log volume per pod for a healthy run.

    python3 scripts/token_budget.py --seconds 240
"""

import argparse

from fivegdiag.logfilter import estimate_tokens, filter_logs
from fivegdiag.model import INVENTORY, render_log
from fivegdiag.sim import SimConfig, advance, get_logs, new_cluster


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seconds", type=int, default=240)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--gnb-rate", type=float, default=SimConfig.gnb_lines_per_s)
    args = ap.parse_args()
    state = advance(new_cluster(args.seed, SimConfig(gnb_lines_per_s=args.gnb_rate)), args.seconds)
    total_raw = total_kept = 0
    print(f"{'pod':<8} {'lines':>7} {'tokens':>8} {'kept':>7} {'tokens':>8} {'ratio':>7}")
    for pod in INVENTORY:
        raw = get_logs(state, pod)
        kept = filter_logs(pod, raw)
        t_raw, t_kept = estimate_tokens(render_log(raw)), estimate_tokens(render_log(kept))
        total_raw += t_raw
        total_kept += t_kept
        ratio = t_kept / t_raw if t_raw else 0.0
        print(f"{pod.value:<8} {len(raw):>7} {t_raw:>8} {len(kept):>7} {t_kept:>8} {ratio:>7.1%}")
    print(f"{'total':<8} {'':>7} {total_raw:>8} {'':>7} {total_kept:>8} {total_kept / total_raw:>7.1%}")


if __name__ == "__main__":
    main()
