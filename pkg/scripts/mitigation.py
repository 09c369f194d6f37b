"""Cleaned distance and running time: clean runs vs mitigated runs under each attack."""
import argparse

from robosec.cli import MODE_FOR_ATTACK
from robosec.harness import CampaignSpec, emit_report, run_campaign
from robosec.trial import ATTACKS


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    reports = {"clean": run_campaign(CampaignSpec("cabinet_room", trials=args.trials), args.workers)}
    for model in ATTACKS:
        spec = CampaignSpec("cabinet_room", attack=model, detector="shade", mitigation=True,
                            mode=MODE_FOR_ATTACK[model], trials=args.trials)
        reports[model] = run_campaign(spec, args.workers)
    base = reports["clean"].aggregates
    for label, rep in reports.items():
        a = rep.aggregates
        loss = 100 * (1 - a["mean_cleaned"] / base["mean_cleaned"])
        print(f"{label:12s} cleaned {a['mean_cleaned']:7.1f} cm ({loss:4.1f}% loss)  "
              f"time {a['mean_running_time']:6.1f} s  crashes {a['crashes']}")
    emit_report(reports, args.out, table="mitigate")


if __name__ == "__main__":
    main()
