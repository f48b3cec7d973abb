"""Optimal number of tests from the error budget, checked by integer scan."""
import argparse

import numpy as np

from zenoguard.analytics import accumulated_error, error_budget


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--gammas", default="1e-6,1e-5,1e-4,1e-3")
    args = ap.parse_args()

    print(f"{'gamma':>10} {'n_opt':>10} {'best_int':>9} {'scan':>6} {'p_tot_min':>12} {'ok':>5}")
    for gamma in (float(g) for g in args.gammas.split(",")):
        b = error_budget(args.delta, gamma, 1)
        ns = np.arange(1, int(10 * b.n_opt) + 2)
        scan = int(ns[np.argmin(accumulated_error(args.delta, gamma, ns))])
        print(f"{gamma:>10.3g} {b.n_opt:>10.3f} {b.n_opt_integer:>9d} {scan:>6d} "
              f"{b.p_tot_min:>12.4e} {str(b.working_condition_ok):>5}")


if __name__ == "__main__":
    main()
