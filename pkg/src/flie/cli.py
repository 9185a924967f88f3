"""Command-line entry point.

    flie run --scenario FILE --seed N --out DIR [--max-steps N] [--export-cloud] [--noise-sigma S]
    flie batch --scenarios DIR --out DIR [--parallel K]

Exit status is 0 when every mission ends in DONE by exhaustion, 2 when a
step budget ran out and 1 on any error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .errors import FlieError
from .mission import Termination, run_mission
from .metrics import MetricsReport, build_report, export
from .world import load_scenario

log = logging.getLogger("flie")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BUDGET = 2


def run_one(
    scenario_path,
    out_dir,
    seed: int | None = None,
    max_steps: int | None = None,
    export_cloud: bool = True,
    noise_sigma: float | None = None,
) -> MetricsReport:
    scene = load_scenario(scenario_path)
    if seed is not None:
        scene = replace(scene, seed=int(seed)).with_landmarks()
    if noise_sigma is not None:
        scene = replace(scene, sensor=replace(scene.sensor, noise_sigma=float(noise_sigma)))
    state, mlog = run_mission(scene, max_steps=max_steps)
    report = build_report(scene, mlog, state.termination.value, state.num_view_poses)
    export(mlog, report, out_dir, include_cloud=export_cloud)
    return report


def _exit_code(report: MetricsReport) -> int:
    return EXIT_BUDGET if report.termination == Termination.STEP_BUDGET_EXCEEDED.value else EXIT_OK


def _batch_job(args) -> tuple[str, int, str]:
    path, out = args
    try:
        report = run_one(path, out)
    except (FlieError, OSError) as exc:
        return str(path), EXIT_ERROR, str(exc)
    return str(path), _exit_code(report), report.termination


def cmd_run(ns) -> int:
    report = run_one(
        ns.scenario,
        ns.out,
        seed=ns.seed,
        max_steps=ns.max_steps,
        export_cloud=ns.export_cloud,
        noise_sigma=ns.noise_sigma,
    )
    print(f"termination: {report.termination}")
    print(f"coverage_fraction: {report.coverage_fraction:.4f}")
    print(f"inspected_volume: {report.inspected_volume:.4f}")
    print(f"mean_distance_error: {report.mean_distance_error:.4f}")
    return _exit_code(report)


def cmd_batch(ns) -> int:
    paths = sorted(Path(ns.scenarios).glob("*.yaml")) + sorted(Path(ns.scenarios).glob("*.yml"))
    if not paths:
        log.error("no scenario files in %s", ns.scenarios)
        return EXIT_ERROR
    jobs = [(p, Path(ns.out) / p.stem) for p in paths]
    if ns.parallel > 1:
        with ProcessPoolExecutor(max_workers=ns.parallel) as pool:
            results = list(pool.map(_batch_job, jobs))
    else:
        results = [_batch_job(j) for j in jobs]
    for path, code, msg in results:
        print(f"{path}: {msg}")
    codes = {code for _, code, _ in results}
    if EXIT_ERROR in codes:
        return EXIT_ERROR
    return max(codes)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flie", description="Inspect-and-explore mission simulator.")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--scenario", required=True, help="scenario YAML file")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--max-steps", type=int, default=None)
    run.add_argument("--export-cloud", action="store_true", help="also write cloud.ply")
    run.add_argument("--noise-sigma", type=float, default=None, help="range noise std-dev in metres")
    run.set_defaults(func=cmd_run)

    batch = sub.add_parser("batch", help="run every scenario in a directory")
    batch.add_argument("--scenarios", required=True, help="directory of scenario YAML files")
    batch.add_argument("--out", required=True, help="output root; one sub-directory per scenario")
    batch.add_argument("--parallel", type=int, default=1, help="worker processes")
    batch.set_defaults(func=cmd_batch)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    ns = build_parser().parse_args(argv)
    if getattr(ns, "seed", None) is not None and ns.seed < 0:
        log.error("seed must be unsigned")
        return EXIT_ERROR
    try:
        return ns.func(ns)
    except (FlieError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
