"""Fuzzer comparison for both fuzzing targets plus the detection matrix."""
import argparse

from robosec.cli import MODE_FOR_ATTACK
from robosec.harness import CampaignSpec, emit_report, run_campaign
from robosec.shade import METHODS
from robosec.trial import ATTACKS


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fuzz-trials", type=int, default=30)
    ap.add_argument("--detect-trials", type=int, default=10)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    for target in ("CrashRobot", "ReduceEfficacy"):
        reports = {}
        for fz in ("volatile", "random", "robofuzz"):
            reports[fz] = run_campaign(CampaignSpec("door_rooms", fuzzer=fz, target=target,
                                                    trials=args.fuzz_trials), args.workers)
            a = reports[fz].aggregates
            print(f"{target:15s} {fz:9s} {a['successes']:>3}/{a['trials']}")
        emit_report(reports, args.out, table=f"fuzz_{target}")

    reports = {}
    for model in ATTACKS:
        for det in METHODS:
            spec = CampaignSpec("cabinet_room", attack=model, detector=det, mode=MODE_FOR_ATTACK[model],
                                trials=args.detect_trials)
            rep = reports[f"{det}/{model}"] = run_campaign(spec, args.workers)
            a = rep.aggregates
            rt = "-" if a["mean_reaction_time"] is None else f"{a['mean_reaction_time']:.2f}s"
            print(f"{det:15s} {model:12s} {a['detections']:>3}/{a['trials']}  {rt}")
    emit_report(reports, args.out, table="detect")


if __name__ == "__main__":
    main()
