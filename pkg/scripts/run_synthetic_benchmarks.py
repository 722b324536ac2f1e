"""Desk-scale clustering benchmarks on synthetic data.

Runs the two stock instances (well separated blobs, two moons) and prints
accuracy for the discriminatively weighted pipeline next to the uniform
spectral baseline.  Moons are tuned per seed over the default lambda grid.
"""

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from cdsk.data_io import make_blobs, make_two_moons
from cdsk.driver import CdskConfig, run_baseline_spectral, run_cdsk, tune_lambda


def bench_blobs(args):
    data = make_blobs(args.blob_size // 2, [[0.0, 0.0], [10.0, 10.0]], 0.5, seed=0)
    t0 = time.time()
    res = run_cdsk(data, CdskConfig(c=2, seed=0))
    print(
        f"blobs      n={data.n:4d}  ac={res.metrics['accuracy']:.3f}  "
        f"nmi={res.metrics['nmi']:.3f}  lambda={res.lambda_used}  "
        f"{time.time() - t0:5.1f}s"
    )


def bench_moons(args):
    tuned = []
    base = []
    for seed in range(args.seeds):
        data = make_two_moons(args.moon_size, args.noise, seed=seed)
        t0 = time.time()
        b = run_baseline_spectral(data, 2, seed=seed, bandwidth=args.bandwidth)
        cfg = CdskConfig(c=2, bandwidth=args.bandwidth, seed=seed)
        lam, _ = tune_lambda(data, cfg)
        res = run_cdsk(data, replace(cfg, lam=lam))
        tuned.append(res.metrics["accuracy"])
        base.append(b.metrics["accuracy"])
        print(
            f"moons s={seed:2d}  lambda={lam:.2f}  ac={tuned[-1]:.3f}  "
            f"baseline={base[-1]:.3f}  {time.time() - t0:5.1f}s"
        )
    print(
        f"moons mean over {args.seeds} seeds: "
        f"ac={np.mean(tuned):.3f} +- {np.std(tuned):.3f}  "
        f"baseline={np.mean(base):.3f} +- {np.std(base):.3f}"
    )


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--noise", type=float, default=0.05)
    ap.add_argument("--bandwidth", type=float, default=0.1, help="moons kernel width")
    ap.add_argument("--moon-size", type=int, default=400)
    ap.add_argument("--blob-size", type=int, default=200)
    ap.add_argument("--skip-moons", action="store_true")
    args = ap.parse_args(argv)
    bench_blobs(args)
    if not args.skip_moons:
        bench_moons(args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
