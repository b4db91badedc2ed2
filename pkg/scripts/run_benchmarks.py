"""Cross-formulation comparison on the slip and stick benchmarks.

    python3 scripts/run_benchmarks.py [--n 32] [--csv out.csv]
"""

import argparse
import time

from tresca.assembly import ProblemSpec, build_system
from tresca.benchmarks import SLIP, STICK
from tresca.equivalence import compare_formulations, infsup_estimate
from tresca.mesh import generate_unit_square
from tresca.output import table_csv, write_text
from tresca.verify import friction_kkt

COLUMNS = ["benchmark", "n", "u_discrepancy", "multiplier_discrepancy", "kernel_polar", "gap",
           "pdas_iter", "uzawa_iter", "stick", "slip+", "slip-", "alpha_h", "seconds"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=[8, 16, 32])
    ap.add_argument("--csv")
    args = ap.parse_args()

    rows = []
    for name, params in (("slip", SLIP), ("stick", STICK)):
        for n in args.n:
            spec = ProblemSpec(**params)
            m = generate_unit_square(n)
            sys = build_system(m, spec)
            t0 = time.perf_counter()
            rep = compare_formulations(m, spec, sys=sys)
            dt = time.perf_counter() - t0
            kkt = friction_kkt(sys.trace(rep.pdas.u), rep.pdas.lam, spec.g)
            rows.append(dict(
                benchmark=name, n=n,
                u_discrepancy=rep.u_discrepancy_energy,
                multiplier_discrepancy=rep.multiplier_discrepancy,
                kernel_polar=rep.kernel_polar_violation,
                gap=rep.complementarity_gap,
                pdas_iter=rep.pdas.iterations, uzawa_iter=rep.uzawa.iterations,
                alpha_h=infsup_estimate(sys) if n <= 32 else None,
                seconds=dt, **kkt.counts,
            ))
            r = rows[-1]
            print(f"{name:5s} n={n:3d}  du={r['u_discrepancy']:.2e}  dlam={r['multiplier_discrepancy']:.2e}  "
                  f"kernel={r['kernel_polar']:.2e}  gap={r['gap']:.2e}  {kkt.counts}  "
                  f"{'pass' if rep.passed else 'FAIL'}  {dt:.2f}s")
    if args.csv:
        write_text(args.csv, table_csv(rows, COLUMNS))


if __name__ == "__main__":
    main()
