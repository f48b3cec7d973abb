"""Balanced-weight code size and efficiency for 2L qubits.

The last three columns give the physical qubits needed to hold L logical
qubits: the closed-form estimate, the smallest even count, and the
real-valued inversion.
"""
from zenoguard.analytics import qubit_overhead
from zenoguard.circuits import codespace, efficiency


def main():
    print(f"{'L':>3} {'2L':>3} {'dim':>6} {'eta_exact':>10} {'eta_asym':>10} {'n_abstract':>11} {'n_even':>7} {'n_cont':>8}")
    for two_l in range(2, 13, 2):
        L = two_l // 2
        exact, asym = efficiency(L)
        ov = qubit_overhead(L)
        print(f"{L:>3} {two_l:>3} {codespace(two_l).dimension:>6} {exact:>10.5f} {asym:>10.5f} "
              f"{ov.abstract_formula:>11.3f} {ov.inverted_eq12:>7d} {ov.inverted_continuous:>8.3f}")


if __name__ == "__main__":
    main()
