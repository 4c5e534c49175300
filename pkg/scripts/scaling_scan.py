"""Worst-case infidelity against battery energy for X and H.

Prints the log-log slope, the ratio of mean energy to the lower bound (which
tends to 4 pi for X), and writes the scan rows as CSV.
"""

import argparse
import math

import numpy as np

from ergon.cli import ScanConfig, run_scan, scan_csv
from ergon.gates import named_gate


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--R", default="50,100,200,400,800")
    p.add_argument("--out", default="scaling_scan.csv")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    Rs = [int(r) for r in args.R.split(",")]
    cfg = ScanConfig([(g, named_gate(g)) for g in ("X", "H")], Rs, seed=args.seed)
    rows = run_scan(cfg)
    with open(args.out, "w") as fh:
        fh.write(scan_csv(rows))
    for gate in ("X", "H"):
        sel = [r for r in rows if r["gate"] == gate]
        e = np.array([r["mean_energy"] for r in sel])
        eps = np.array([r["epsilon"] for r in sel])
        slope = np.polyfit(np.log(e), np.log(eps), 1)[0]
        print(f"{gate}: slope {slope:.4f}")
        for r in sel:
            print(f"  R={r['R']:4d}  eps={r['epsilon']:.4e}  analytic={r['analytic_epsilon']:.4e}  ratio={r['ratio']:.4f}")
    print(f"4 pi = {4 * math.pi:.4f}; rows written to {args.out}")


if __name__ == "__main__":
    main()
