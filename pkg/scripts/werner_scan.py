"""Scan the Werner family and print the reconstructed PT spectrum and verdict.

    python scripts/werner_scan.py --step 0.02
    python scripts/werner_scan.py --shots 100000 --seed 1
"""

import argparse
import csv
import sys
from dataclasses import dataclass

import numpy as np

from peres_circuits import Exact, Shots, measure_pt_moments, reconstruct, werner_state


@dataclass
class ScanConfig:
    start: float = 0.0
    stop: float = 1.0
    step: float = 0.01
    shots: int | None = None
    seed: int = 0


def scan(cfg: ScanConfig):
    grid = np.round(np.arange(cfg.start, cfg.stop + cfg.step / 2, cfg.step), 10)
    for i, p in enumerate(grid):
        mode = Exact() if cfg.shots is None else Shots(cfg.shots, cfg.seed + i)
        report = reconstruct(measure_pt_moments(werner_state(float(p)), mode), seed=cfg.seed + i)
        yield float(p), report


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--start", type=float, default=0.0)
    ap.add_argument("--stop", type=float, default=1.0)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--shots", type=int)
    ap.add_argument("--seed", type=int, default=0)
    cfg = ScanConfig(**vars(ap.parse_args(argv)))

    out = csv.writer(sys.stdout)
    out.writerow(["p", "min_eigenvalue", "exact_min", "threshold", "verdict"])
    for p, report in scan(cfg):
        exact_min = (1 - 3 * p) / 4
        out.writerow([f"{p:.4f}", f"{report.min_eigenvalue:.6f}", f"{exact_min:.6f}",
                      f"{report.threshold:.2e}", report.verdict.value])


if __name__ == "__main__":
    main()
