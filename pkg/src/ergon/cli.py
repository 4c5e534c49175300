"""Command-line front end: ``ergon simulate | scan | circuit | bounds | verify``.

Exit codes: 0 success, 1 some scan rows failed, 2 invalid input, 3 solver did not
converge (the report is still written and flagged).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import report
from .bounds import bound_report, capacity_lower_bound, energy_lower_bound
from .circuits import CircuitSpec, alternating_experiment, classical_run, simulate_circuit
from .dilation import induced_channel, sine_dilation
from .fidelity import analytic_infidelity, worst_case_fidelity
from .gates import load_gate_file, named_gate
from .invariants import invariant_checks
from .spectra import system_for_dim

EXIT_OK, EXIT_PARTIAL, EXIT_INVALID, EXIT_NONCONVERGED = 0, 1, 2, 3

SCAN_HEADER = ("gate", "R", "mean_energy", "f_wc", "epsilon", "analytic_epsilon", "lower_bound_mean_energy", "ratio")


class InputError(ValueError):
    """Bad command-line input or malformed file; maps to exit code 2."""


@dataclass
class ScanConfig:
    gates: list[tuple[str, np.ndarray]]
    R_values: list[int]
    epsilons: list[float] = field(default_factory=list)
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"

    def __post_init__(self):
        if not self.gates:
            raise InputError("no gate given")
        if not self.R_values:
            raise InputError("empty R grid")
        if any(R < 3 for R in self.R_values):
            raise InputError("every R must be >= 3")


def parse_R_list(text: str) -> list[int]:
    """``"200"``, ``"50,100,200"`` or an inclusive range ``"50:800:50"``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step <= 0:
                raise InputError("range step must be positive")
            return list(range(start, stop + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise InputError(f"bad R specification {text!r}") from exc


def parse_float_list(text: str) -> list[float]:
    try:
        vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise InputError(f"bad number list {text!r}") from exc
    if not vals:
        raise InputError("empty epsilon list")
    return vals


def resolve_gates(args) -> list[tuple[str, np.ndarray]]:
    out = []
    try:
        if args.gate_file:
            out.append((Path(args.gate_file).stem, load_gate_file(args.gate_file)))
        if args.gate:
            out.extend((name, named_gate(name)) for name in args.gate.split(","))
    except (OSError, KeyError, TypeError, json.JSONDecodeError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    if not out:
        raise InputError("give --gate or --gate-file")
    return out


def write_text(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def measure_point(name: str, G: np.ndarray, R: int, seed: int) -> dict:
    """One scan row: solver infidelity at R next to the analytic value and the lower bound."""
    system = system_for_dim(G.shape[0])
    dil, beta = sine_dilation(G, system, R)
    res = worst_case_fidelity(induced_channel(dil, beta), G, seed=seed)
    mean = R * system.norm / 2
    lower = energy_lower_bound(G, system, res.epsilon) if res.epsilon > 0 else math.inf
    return {
        "gate": name,
        "R": R,
        "mean_energy": mean,
        "f_wc": res.f_wc,
        "epsilon": res.epsilon,
        "analytic_epsilon": analytic_infidelity(G, system, mean),
        "lower_bound_mean_energy": lower,
        "ratio": mean / lower if lower > 0 else math.inf,
        "converged": res.converged,
    }


def n_threads() -> int:
    raw = os.environ.get("ERGON_THREADS", "")
    try:
        n = int(raw) if raw else (os.cpu_count() or 1)
    except ValueError:
        raise InputError(f"ERGON_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def run_scan(cfg: ScanConfig) -> list[dict]:
    grid = [(name, G, R) for name, G in cfg.gates for R in cfg.R_values]

    def task(point):
        name, G, R = point
        try:
            return measure_point(name, G, R, cfg.seed)
        except Exception as exc:  # reported per row
            return {"gate": name, "R": R, "error": f"{type(exc).__name__}: {exc}"}

    with ThreadPoolExecutor(max_workers=min(n_threads(), len(grid))) as pool:
        return list(pool.map(task, grid))  # map keeps grid order


def scan_csv(rows: list[dict]) -> str:
    with_error = any("error" in r for r in rows)
    header = list(SCAN_HEADER) + (["error"] if with_error else [])
    lines = [",".join(header)]
    for r in rows:
        cells = [report.csv_cell(r[k]) if k in r else "" for k in SCAN_HEADER]
        if with_error:
            cells.append(r.get("error", "").replace(",", ";"))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    gates = resolve_gates(args)
    if len(gates) != 1:
        raise InputError("simulate takes a single gate")
    name, G = gates[0]
    Rs = parse_R_list(args.R)
    if len(Rs) != 1 or Rs[0] < 3:
        raise InputError("simulate needs one R >= 3")
    R = Rs[0]
    system = system_for_dim(G.shape[0])
    dil, beta = sine_dilation(G, system, R)
    res = worst_case_fidelity(induced_channel(dil, beta), G, seed=args.seed)
    doc = {
        "gate": name,
        "R": R,
        "system": system.to_json(),
        "mean_energy": beta.mean_energy,
        "analytic_epsilon": analytic_infidelity(G, system, beta.mean_energy),
        "fidelity": res.to_json(),
        "bounds": bound_report(G, system, res.epsilon, name).to_json(),
        "flagged": not res.converged,
    }
    write_text(report.dumps(doc), args.out)
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_scan(args) -> int:
    R_text = args.scan or args.R
    if not R_text:
        raise InputError("scan needs --scan start:stop:step or --R list")
    cfg = ScanConfig(resolve_gates(args), parse_R_list(R_text), seed=args.seed, out=args.out, fmt=args.format)
    rows = run_scan(cfg)
    if cfg.fmt == "json":
        write_text(report.dumps(rows), cfg.out)
    else:
        write_text(scan_csv(rows), cfg.out)
    if any("error" in r for r in rows):
        return EXIT_PARTIAL
    if not all(r["converged"] for r in rows):
        return EXIT_NONCONVERGED
    return EXIT_OK


def outcome_table(probs_by_input: dict[int, np.ndarray], n: int) -> str:
    lines = ["x -> y: probability"]
    for x, probs in probs_by_input.items():
        for y, p in enumerate(probs):
            if p > 1e-15:
                lines.append(f"{x:0{n}b} -> {y:0{n}b}: {p:.6f}")
    return "\n".join(lines) + "\n"


def cmd_circuit(args) -> int:
    Rs = parse_R_list(args.R)
    if len(Rs) != 1 or Rs[0] < 3:
        raise InputError("circuit needs one R >= 3")
    R = Rs[0]
    if args.mode == "alternating":
        (name, G), *rest = resolve_gates(args)
        if rest:
            raise InputError("alternating mode takes a single gate")
        rep = alternating_experiment(G, args.m, R, seed=args.seed)
        doc = rep.to_json()
        doc["gate"] = name
        write_text(report.dumps(doc), args.out)
        return EXIT_OK
    if not args.input:
        raise InputError("circuit needs --input FILE")
    try:
        circ = CircuitSpec.load(args.input)
    except (OSError, KeyError, TypeError, json.JSONDecodeError, ValueError) as exc:
        raise InputError(f"malformed circuit file: {exc}") from exc
    if args.mode == "classical":
        xs = range(2**circ.n) if args.x is None else [args.x]
        probs = {x: classical_run(circ, x, R) for x in xs}
        M = circ.unitary()
        doc = {
            "label": circ.label,
            "mode": "classical",
            "R": R,
            "outcomes": {format(x, f"0{circ.n}b"): p.tolist() for x, p in probs.items()},
            "max_error": max(float(np.max(np.abs(p - np.abs(M[:, x]) ** 2))) for x, p in probs.items()),
        }
        sys.stderr.write(outcome_table(probs, circ.n))
        write_text(report.dumps(doc), args.out)
        return EXIT_OK
    rep = simulate_circuit(circ, R)
    write_text(report.dumps(rep.to_json()), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    gates = resolve_gates(args)
    eps = parse_float_list(args.epsilon or "1e-4")
    if any(not 0 < e <= 1 for e in eps):
        raise InputError("epsilon values must lie in (0, 1]")
    out = []
    for name, G in gates:
        system = system_for_dim(G.shape[0])
        for e in eps:
            doc = bound_report(G, system, e, name).to_json()
            doc["universal_capacity_lower"] = capacity_lower_bound(system, e)
            out.append(doc)
    write_text(report.dumps(out), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = invariant_checks(seed=args.seed)
    doc = [{"check": c.name, "value": c.value, "tol": c.tol, "ok": c.ok} for c in checks]
    write_text(report.dumps(doc), args.out)
    for c in checks:
        sys.stderr.write(f"{'PASS' if c.ok else 'FAIL'} {c.name}: {c.value:.3e} (tol {c.tol:g})\n")
    return EXIT_OK if all(c.ok for c in checks) else EXIT_PARTIAL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ergon", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--gate", help="built-in gate name(s), comma separated (X, H, CNOT, QFT3, ...)")
        sp.add_argument("--gate-file", help="JSON gate file {dim, matrix}")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("simulate", help="worst-case fidelity and bounds for one gate at one R")
    common(sp)
    sp.add_argument("--R", default="200")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("scan", help="fidelity over an R grid, one CSV row per point")
    common(sp)
    sp.add_argument("--R", help="comma-separated R values")
    sp.add_argument("--scan", help="inclusive range start:stop:step")
    sp.set_defaults(func=cmd_scan, format="csv")

    sp = sub.add_parser("circuit", help="run a circuit file or the alternating experiment")
    common(sp)
    sp.add_argument("--input", help="circuit JSON file")
    sp.add_argument("--R", default="200")
    sp.add_argument("--mode", choices=("quantum", "classical", "alternating"), default="quantum")
    sp.add_argument("--m", type=int, default=1, help="alternating rounds (2m gates)")
    sp.add_argument("--x", type=int, help="classical input index (default: all)")
    sp.set_defaults(func=cmd_circuit)

    sp = sub.add_parser("bounds", help="lower and achievable energies at given epsilons")
    common(sp)
    sp.add_argument("--epsilon", help="comma-separated epsilon values (default 1e-4)")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("verify", help="run the structural invariant checks")
    common(sp)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
