"""Fidelity loss versus number of codespace tests, with and without test noise.

Prints a table of (N, 1 - F, total out-probability) and the fitted log-log
slope for each gamma. Output is plot-ready CSV on stdout.
"""
import argparse
import math
import sys

from zenoguard.analytics import delta_discrete
from zenoguard.noise import DissipationSpec, DriveSpec, SpectralDensity, discretize_bath
from zenoguard.zeno import ProtocolSetup, ZenoConfig, zeno_scaling_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta", type=float, default=0.05, help="target discrete error coefficient")
    ap.add_argument("--omega-max", type=float, default=2.0)
    ap.add_argument("--gammas", default="0,1e-4")
    ap.add_argument("--ns", default="4,6,8,11,16,23,32,45,64,90,128")
    args = ap.parse_args()

    # one independent register per qubit: delta = 2 g0^2 omega_max T0^2
    g0 = math.sqrt(args.delta / (2 * args.omega_max))
    spec = DissipationSpec((1, 0, 0), spectral=SpectralDensity.flat(g0, args.omega_max))
    bath = discretize_bath(spec, 1, 2)
    initial = (2**-0.5, 2**-0.5)
    d = delta_discrete(bath, spec, *initial, 1.0)
    ns = [int(n) for n in args.ns.split(",")]

    print("gamma,n_tests,one_minus_fidelity,total_out_prob")
    for gamma in (float(g) for g in args.gammas.split(",")):
        setup = ProtocolSetup(spec, bath, DriveSpec.matched(1.0), initial, ZenoConfig(1.0, ns[0], gamma))
        res = zeno_scaling_experiment(setup, ns)
        for n, err, out in res.rows:
            print(f"{gamma:.12g},{n},{err:.12g},{out:.12g}")
        note = f"slope {res.slope:.4f}" if res.slope is not None else res.flag
        if gamma > 0:
            note += f", minimum at N = {res.argmin_n}, sqrt(delta/gamma) = {math.sqrt(d / gamma):.2f}"
        print(f"# gamma={gamma:g}: {note}", file=sys.stderr)


if __name__ == "__main__":
    main()
