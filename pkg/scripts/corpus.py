"""Flow the random corpus to extinction and emit gnuplot data.

Writes, under --out:
  seed<k>.dat   t, A, aff_iso, santalo, ellipticity, entropy, harnack_min
  limits.dat    boundary of each normalized, SL(2)-framed final body (one gnuplot index per seed)
and prints one summary line per seed.

    python scripts/corpus.py --seeds 1 2 3 --out out/corpus
"""

import argparse
import time
from pathlib import Path

from affineflow import diagnostics as D
from affineflow.body import apply_linear_map, make_random_body
from affineflow.flow import StepController, center_at_limit, normalized_view, run
from affineflow.io import write_columns


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(1, 11)))
    ap.add_argument("--out", type=Path, default=Path("out/corpus"))
    ap.add_argument("--record-every", type=int, default=10)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    ctrl = StepController()

    limits = []
    print(f"{'seed':>4} {'steps':>7} {'T_est':>10} {'aff_iso':>10} {'santalo':>10} {'MA resid':>10} {'secs':>6}")
    for seed in args.seeds:
        t0 = time.perf_counter()
        body = center_at_limit(make_random_body(seed), ctrl)
        traj, final = run(body, ctrl, record_every=args.record_every)
        rows = [(r.t, r.A, r.aff_iso, r.santalo, 1 - r.aff_iso, r.entropy, r.harnack_min) for r in traj]
        write_columns(args.out / f"seed{seed}.dat",
                      ["t", "A", "aff_iso", "santalo", "ellipticity", "entropy", "harnack_min"], [rows])
        nb = normalized_view(final.body)
        framed = apply_linear_map(nb, D.sl2_frame(nb).phi)
        limits.append([tuple(p) for p in framed.boundary()])
        last = traj[-1]
        print(f"{seed:>4} {final.steps:>7} {final.t_extinct:>10.6f} {last.aff_iso:>10.7f} {last.santalo:>10.7f} "
              f"{D.monge_ampere_residual(framed):>10.2e} {time.perf_counter() - t0:>6.1f}")
    write_columns(args.out / "limits.dat", ["x", "y"], limits)


if __name__ == "__main__":
    main()
