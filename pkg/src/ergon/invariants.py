"""Structural checks on the dilation, shared by the test suite and ``ergon verify``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import CircuitSpec, GateOp, classical_run
from .dilation import build_dilation, composition_check, induced_channel
from .fidelity import coefficient_table
from .gates import haar_unitary, unitarity_error
from .spectra import EnergyObservable, sine_battery, system_for_dim


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float

    @property
    def ok(self) -> bool:
        return bool(self.value <= self.tol)


def block_unitarity(dil) -> float:
    return max(unitarity_error(B) for B in dil.blocks.values())


def commutator_norm(dil) -> float:
    """Max entry of ``[U_G, H_S (x) 1 + 1 (x) H_B]`` on the dense joint unitary."""
    U = dil.to_dense()
    h = EnergyObservable.joint(dil.system.observable(), EnergyObservable(np.arange(dil.capacity + 1), "battery"))
    Ht = h.diagonal.astype(float)
    return float(np.max(np.abs(U * Ht[None, :] - Ht[:, None] * U)))


def invariant_checks(pairs: int = 50, dims=(2, 4), R: int = 5, seed: int = 0) -> list[Check]:
    """Worst value of each invariant over ``pairs`` Haar-random gate pairs per dimension."""
    rng = np.random.default_rng(seed)
    worst = {"block_unitarity": 0.0, "commutation": 0.0, "completeness": 0.0, "composition": 0.0}
    for d in dims:
        system = system_for_dim(d)
        beta = sine_battery(system, R)
        for _ in range(pairs):
            G1, G2 = haar_unitary(d, rng), haar_unitary(d, rng)
            dil = build_dilation(G1, system, beta)
            worst["block_unitarity"] = max(worst["block_unitarity"], block_unitarity(dil))
            worst["commutation"] = max(worst["commutation"], commutator_norm(dil))
            ch = induced_channel(dil, beta)
            worst["completeness"] = max(worst["completeness"], ch.completeness_error())
            worst["composition"] = max(worst["composition"], composition_check(G1, G2, system, beta))
    tols = {"block_unitarity": 1e-12, "commutation": 1e-12, "completeness": 1e-12, "composition": 1e-10}
    checks = [Check(k, v, tols[k]) for k, v in worst.items()]

    system = system_for_dim(2)
    c0 = coefficient_table(system, sine_battery(system, 10)).values[0, 0, 0, 0]
    checks.append(Check("c_0000", abs(c0 - 1.0), 1e-12))

    circ = CircuitSpec(3, tuple(GateOp(haar_unitary(2, rng), (q,), "U") for q in range(3))
                       + (GateOp(haar_unitary(4, rng), (0, 2), "U2"),))
    M = circ.unitary()
    err = 0.0
    for Rc in (3, 10):
        for x in range(8):
            err = max(err, float(np.max(np.abs(classical_run(circ, x, Rc) - np.abs(M[:, x]) ** 2))))
    checks.append(Check("classical_exactness", err, 1e-12))
    return checks
