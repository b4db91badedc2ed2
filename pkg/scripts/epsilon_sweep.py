"""Distance of the smoothed solutions from the active-set solution as eps shrinks."""

import argparse

import numpy as np

from tresca.assembly import ProblemSpec, build_system
from tresca.benchmarks import SLIP, STICK
from tresca.mesh import generate_unit_square
from tresca.mixed_solver import solve_pdas
from tresca.vi_solver import solve_vi_regularized


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=32)
    args = ap.parse_args()
    for name, params in (("slip", SLIP), ("stick", STICK)):
        spec = ProblemSpec(**params)
        sys = build_system(generate_unit_square(args.n), spec)
        ref = solve_pdas(sys, spec).u
        print(f"\n{name}: eps, |u_eps - u|_A, ratio to sqrt(eps)")
        u = None
        for k in range(1, 10):
            eps = 10.0**-k
            u = solve_vi_regularized(sys, spec, eps, u0=u).u
            err = sys.energy_norm(u - ref)
            print(f"  {eps:7.0e}  {err:.3e}  {err / np.sqrt(eps):.3e}")


if __name__ == "__main__":
    main()
