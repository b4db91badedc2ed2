"""Observed convergence rates for the closed-form benchmarks and the frictionless case.

    python3 scripts/convergence_study.py [--levels 5]
"""

import argparse

from tresca.cli import convergence_study
from tresca.config import parse_config

CASES = {
    "slip": "mode = converge\nn = 8\ng = 0.5\nf0 = 2\n",
    "stick": "mode = converge\nn = 8\ng = 1\nf0 = 1\n",
    "frictionless": "mode = converge\nn = 4\ng = 0\nf0 = 1 + sin(3*x)*y\nf2 = x\nconverge.reference = finest\n",
}


def fmt(v, spec):
    return "-" if v is None else format(v, spec)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()
    for name, text in CASES.items():
        rows = convergence_study(parse_config(text), args.levels)
        print(f"\n{name}")
        print(f"{'n':>5} {'h':>9} {'L2 error':>11} {'rate':>6} {'energy':>11} {'rate':>6} {'lambda':>10}")
        for r in rows:
            print(f"{r['n']:>5} {r['h']:9.4f} {r['l2_error']:11.3e} {fmt(r.get('l2_rate'), '6.3f'):>6} "
                  f"{r['energy_error']:11.3e} {fmt(r.get('energy_rate'), '6.3f'):>6} "
                  f"{fmt(r.get('lambda_error'), '10.2e'):>10}")


if __name__ == "__main__":
    main()
