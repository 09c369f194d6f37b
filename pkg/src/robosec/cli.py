"""Command line entry point: learn, fuzz, detect, mitigate, replay."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .harness import CampaignSpec, detection_sweep, emit_report, learn_map, run_campaign
from .histmap import MapError
from .scenario import ConfigError, resolve
from .shade import METHODS
from .trial import ATTACKS, FUZZERS

SWEEP_DISTANCES = [25, 40, 55, 70, 85, 100, 115, 130]
# suspension is only observable through CRV when alerts are expected, so it runs in proactive mode
MODE_FOR_ATTACK = {"suspension": "proactive", "fabrication": "passive"}


def _common(p: argparse.ArgumentParser, scenario: str, trials: int) -> None:
    p.add_argument("--scenario", default=scenario, help="built-in name or path to a scenario JSON")
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    p.add_argument("--format", choices=["json", "csv", "both"], default="both")
    p.add_argument("--map", dest="map_path", default=None, help="historical map JSON (learned if absent)")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robosec", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("learn", help="learn a historical map from clean runs")
    p.add_argument("--scenario", default="cabinet_room")
    p.add_argument("--passes", type=int, default=2)
    p.add_argument("--seed", type=int, default=1000)
    p.add_argument("--out", default="map.json")

    p = sub.add_parser("fuzz", help="fuzzer comparison campaigns")
    _common(p, "door_rooms", 30)
    p.add_argument("--fuzzer", nargs="+", choices=[f for f in FUZZERS if f != "constant"],
                   default=["volatile", "random", "robofuzz"])
    p.add_argument("--target", choices=["CrashRobot", "ReduceEfficacy"], default="CrashRobot")
    p.add_argument("--record-series", action="store_true", help="keep distance-vs-time series")

    p = sub.add_parser("detect", help="detection matrix and distance sweep")
    _common(p, "cabinet_room", 10)
    p.add_argument("--attack", nargs="+", choices=ATTACKS, default=list(ATTACKS))
    p.add_argument("--detectors", nargs="+", choices=METHODS, default=list(METHODS))
    p.add_argument("--sweep", action="store_true", help="also run the attack-distance sweep")

    p = sub.add_parser("mitigate", help="clean vs mitigated runs under each attack")
    _common(p, "cabinet_room", 10)
    p.add_argument("--attack", nargs="+", choices=ATTACKS, default=list(ATTACKS))
    p.add_argument("--detectors", choices=METHODS, default="shade")
    p.add_argument("--mitigation", choices=["on", "off"], default="on")

    p = sub.add_parser("replay", help="re-run one seed and dump its trace")
    p.add_argument("--scenario", default="door_rooms")
    p.add_argument("--fuzzer", choices=FUZZERS, default=None)
    p.add_argument("--target", choices=["CrashRobot", "ReduceEfficacy"], default="CrashRobot")
    p.add_argument("--attack", choices=ATTACKS, default=None)
    p.add_argument("--detectors", choices=METHODS, default=None)
    p.add_argument("--mitigation", choices=["on", "off"], default="off")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--map", dest="map_path", default=None)
    p.add_argument("--out", default="-")
    return ap


def _print_agg(label: str, rep) -> None:
    if not rep.valid:
        print(f"{label:28s} invalid: {rep.error}", file=sys.stderr)
        return
    a = rep.aggregates
    rt = a.get("mean_reaction_time")
    print(f"{label:28s} successes {a['successes']:>3}/{a['trials']:<3} ({a['success_rate']:.1f}%)"
          f"  detections {a['detections']:>3}  reaction {'-' if rt is None else f'{rt:.1f}s'}"
          f"  cleaned {a['mean_cleaned']:.1f}cm  time {a['mean_running_time']:.1f}s")


def cmd_learn(args) -> int:
    hmap = learn_map(resolve(args.scenario), args.passes, args.seed)
    hmap.save(args.out)
    print(f"wrote {args.out}: {len(hmap.cells)} occupied cells")
    return 0


def cmd_fuzz(args) -> int:
    reports = {}
    for fz in args.fuzzer:
        spec = CampaignSpec(args.scenario, fuzzer=fz, target=args.target, trials=args.trials,
                            seed=args.seed, record_trace=args.record_series)
        reports[fz] = run_campaign(spec, args.workers)
        _print_agg(fz, reports[fz])
    emit_report(reports, args.out, args.format, table=f"fuzz_{args.target}")
    return 0 if all(r.valid for r in reports.values()) else 2


def cmd_detect(args) -> int:
    reports = {}
    for model in args.attack:
        for det in args.detectors:
            spec = CampaignSpec(args.scenario, attack=model, detector=det, mode=MODE_FOR_ATTACK[model],
                                trials=args.trials, seed=args.seed, map_path=args.map_path)
            reports[f"{det}/{model}"] = rep = run_campaign(spec, args.workers)
            _print_agg(f"{det}/{model}", rep)
    emit_report(reports, args.out, args.format, table="detect")
    if args.sweep:
        out = {}
        for model in args.attack:
            spec = CampaignSpec(args.scenario, attack=model, detector="shade", mode=MODE_FOR_ATTACK[model],
                                trials=args.trials, seed=args.seed, map_path=args.map_path)
            out[model] = detection_sweep(spec, SWEEP_DISTANCES, args.workers)
            for d, rt in out[model]:
                print(f"sweep {model:12s} {d:>5.0f} cm  {'-' if rt is None else f'{rt:.1f}s'}")
        Path(args.out, "sweep.json").write_text(json.dumps(out, indent=1))
    return 0 if all(r.valid for r in reports.values()) else 2


def cmd_mitigate(args) -> int:
    on = args.mitigation == "on"
    reports = {"clean": run_campaign(CampaignSpec(args.scenario, trials=args.trials, seed=args.seed))}
    _print_agg("clean", reports["clean"])
    for model in args.attack:
        spec = CampaignSpec(args.scenario, attack=model, detector=args.detectors, mitigation=on,
                            mode=MODE_FOR_ATTACK[model], trials=args.trials, seed=args.seed,
                            map_path=args.map_path)
        reports[model] = run_campaign(spec, args.workers)
        _print_agg(model, reports[model])
    emit_report(reports, args.out, args.format, table="mitigate")
    return 0 if all(r.valid for r in reports.values()) else 2


def cmd_replay(args) -> int:
    from .harness import _trial_config
    from .trial import run_trial
    spec = CampaignSpec(args.scenario, fuzzer=args.fuzzer, target=args.target, attack=args.attack,
                        detector=args.detectors, mitigation=args.mitigation == "on",
                        mode=MODE_FOR_ATTACK.get(args.attack) if args.attack else None,
                        trials=1, seed=args.seed, map_path=args.map_path, record_trace=True)
    scenario = resolve(args.scenario)
    rec = run_trial(scenario, args.seed, _trial_config(spec, scenario))
    body = json.dumps({"record": rec.summary(), "trace": rec.trace}, indent=1)
    if args.out == "-":
        print(body)
    else:
        Path(args.out).write_text(body)
        print(f"wrote {args.out} (digest {rec.digest[:12]})")
    return 0


COMMANDS = {"learn": cmd_learn, "fuzz": cmd_fuzz, "detect": cmd_detect,
            "mitigate": cmd_mitigate, "replay": cmd_replay}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        resolve(args.scenario)  # fail fast on a bad scenario name or file
        return COMMANDS[args.cmd](args)
    except (ConfigError, MapError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
