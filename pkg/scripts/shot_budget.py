"""Empirical error of the smallest PT eigenvalue versus the shot budget.

Compares the observed spread over seeds with the shot planner's prediction.

    python scripts/shot_budget.py --trials 20
"""

import argparse
from dataclasses import dataclass

import numpy as np

from peres_circuits import Shots, measure_pt_moments, reconstruct, shot_planner, werner_state
from peres_circuits.errors import ReconstructionError


@dataclass
class BudgetConfig:
    p: float = 0.5
    budgets: tuple[int, ...] = (10_000, 100_000, 1_000_000)
    trials: int = 20


def run(cfg: BudgetConfig):
    rho = werner_state(cfg.p)
    exact = (1 - 3 * cfg.p) / 4
    for shots in cfg.budgets:
        errors, failed = [], 0
        for seed in range(cfg.trials):
            try:
                report = reconstruct(measure_pt_moments(rho, Shots(shots, seed)), seed=seed)
            except ReconstructionError:
                failed += 1
                continue
            errors.append(report.min_eigenvalue - exact)
        rms = float(np.sqrt(np.mean(np.square(errors)))) if errors else float("nan")
        yield shots, rms, failed


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--budgets", type=lambda s: tuple(int(x) for x in s.split(",")),
                    default=(10_000, 100_000, 1_000_000))
    ap.add_argument("--trials", type=int, default=20)
    cfg = BudgetConfig(**vars(ap.parse_args(argv)))

    print(f"{'shots':>10} {'rms error':>12} {'planner says':>14} {'failed':>7}")
    for shots, rms, failed in run(cfg):
        # invert the planner: the budget that would be asked for at this error
        planned = shot_planner(rms, (2, 2)) if np.isfinite(rms) and rms > 0 else 0
        print(f"{shots:>10} {rms:>12.2e} {planned:>14} {failed:>7}")


if __name__ == "__main__":
    main()
