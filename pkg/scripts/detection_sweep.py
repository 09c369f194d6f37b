"""Mean composite-detector reaction time against attack-start distance."""
import argparse
import json
from pathlib import Path

from robosec.cli import MODE_FOR_ATTACK, SWEEP_DISTANCES
from robosec.harness import CampaignSpec, detection_sweep
from robosec.trial import ATTACKS


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--distances", type=float, nargs="+", default=SWEEP_DISTANCES)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/sweep.json")
    args = ap.parse_args()

    curves = {}
    for model in ATTACKS:
        spec = CampaignSpec("cabinet_room", attack=model, detector="shade",
                            mode=MODE_FOR_ATTACK[model], trials=args.trials)
        curves[model] = detection_sweep(spec, args.distances, args.workers)
        for d, rt in curves[model]:
            print(f"{model:12s} {d:>6.0f} cm  {'-' if rt is None else f'{rt:.2f} s'}")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(curves, indent=1))


if __name__ == "__main__":
    main()
