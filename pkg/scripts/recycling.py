"""One battery driving many gates.

Runs the alternating G, G^dag experiment for m = 1..M and compares the cumulative
deviation with 4 m sqrt(eps); then checks that two decompositions of the same
unitary end at the same fidelity, and prints the energy budget comparison.
"""

import argparse

from ergon.bounds import budget_comparison
from ergon.circuits import CircuitSpec, GateOp, alternating_experiment, simulate_circuit
from ergon.dilation import induced_channel, sine_dilation
from ergon.fidelity import worst_case_fidelity
from ergon.gates import named_gate
from ergon.spectra import make_uniform_system


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--gate", default="X")
    p.add_argument("--R", type=int, default=64)
    p.add_argument("--M", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    G = named_gate(args.gate)
    dil, beta = sine_dilation(G, make_uniform_system(1), args.R)
    eps = worst_case_fidelity(induced_channel(dil, beta), G, seed=args.seed).epsilon
    print(f"single-gate eps at R={args.R}: {eps:.4e}")
    for m in range(1, args.M + 1):
        rep = alternating_experiment(G, m, args.R, seed=args.seed, epsilon=eps)
        print(f"m={m}: cumulative {rep.cumulative[-1]:.5f}  bound {rep.bound:.5f}")

    H, S, CZ, CNOT = (named_gate(n) for n in ("H", "S", "CZ", "CNOT"))
    short = CircuitSpec(2, (GateOp(H, (0,)), GateOp(CNOT, (0, 1))))
    long = CircuitSpec(2, (GateOp(S, (0,)), GateOp(S.conj().T, (0,)), GateOp(H, (0,)),
                           GateOp(H, (1,)), GateOp(CZ, (0, 1)), GateOp(H, (1,))))
    f2, f6 = simulate_circuit(short, 200).fidelity, simulate_circuit(long, 200).fidelity
    print(f"Bell state, 2 gates: {f2:.12f}; 6 gates: {f6:.12f}")

    b = budget_comparison(100, 2, 0.01)
    print(f"N=100 gates, n=2, delta=0.01: separate batteries >= {b['multi_lower']:.1f}, shared <= {b['single_upper']:.2f}")


if __name__ == "__main__":
    main()
