"""Shared driver for the sweep scripts."""
from __future__ import annotations

import argparse
import time
from dataclasses import replace
from pathlib import Path

from thermobj.experiments import ExperimentConfig, emit_csv, emit_svg_lineplot, run_experiment

HERE = Path(__file__).resolve().parent


def run(default_config: str, describe) -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(HERE / "configs" / default_config))
    parser.add_argument("--out", default="results")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--trials", type=int, help="override the trial count")
    args = parser.parse_args()

    cfg = ExperimentConfig.from_file(args.config)
    if args.trials:
        cfg = replace(cfg, trials=args.trials)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    table = run_experiment(cfg, workers=args.workers)
    elapsed = time.perf_counter() - start
    emit_csv(table, out / f"{cfg.kind}.csv")
    emit_svg_lineplot(table, out / f"{cfg.kind}.svg")
    (out / f"{cfg.kind}.config.txt").write_text(cfg.to_text())
    describe(table)
    print(f"{cfg.trials} trials per point in {elapsed:.2f}s; wrote {out}/{cfg.kind}.csv and .svg")
