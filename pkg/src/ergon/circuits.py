"""Circuits on unit-gap qubit registers powered by one shared battery.

The joint state is kept as a tensor of shape ``(2,) * n + (n_b,)``; qubit 0 is the
most significant bit of a register index. A gate on k qubits only ever touches the
``2^k`` local levels and the battery, one local energy sector at a time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dilation import apply_local_dilation, induced_channel, build_dilation
from .fidelity import worst_case_fidelity
from .gates import check_unitary, gate_from_json, load_gate_file, named_gate
from .spectra import make_uniform_system, sine_battery, system_for_dim

MAX_JOINT_DIM = 2**24


@dataclass(frozen=True)
class GateOp:
    matrix: np.ndarray = field(repr=False)
    targets: tuple[int, ...]
    name: str = ""


@dataclass(frozen=True)
class CircuitSpec:
    n: int
    gates: tuple[GateOp, ...]
    label: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a circuit needs at least one qubit")
        for op in self.gates:
            t = op.targets
            if len(set(t)) != len(t):
                raise ValueError(f"gate {op.name!r} has repeated targets {t}")
            if any(not 0 <= q < self.n for q in t):
                raise ValueError(f"gate {op.name!r} targets {t} outside 0..{self.n - 1}")
            check_unitary(op.matrix)
            if op.matrix.shape[0] != 2 ** len(t):
                raise ValueError(f"gate {op.name!r} does not act on {len(t)} qubits")

    @classmethod
    def from_json(cls, data: dict, base_dir=".") -> CircuitSpec:
        n = int(data["qubits"])
        ops = []
        for g in data.get("gates", []):
            targets = tuple(int(q) for q in g["targets"])
            if "name" in g and "matrix" not in g and "matrix_file" not in g:
                M, name = named_gate(g["name"]), g["name"]
            elif "matrix_file" in g:
                M, name = load_gate_file(Path(base_dir) / g["matrix_file"]), g.get("name", g["matrix_file"])
            elif "matrix" in g:
                M = gate_from_json({"dim": 2 ** len(targets), "matrix": g["matrix"]})
                name = g.get("name", "matrix")
            else:
                raise ValueError(f"gate entry needs 'name', 'matrix' or 'matrix_file': {g}")
            ops.append(GateOp(M, targets, name))
        return cls(n, tuple(ops), data.get("label", ""))

    @classmethod
    def load(cls, path) -> CircuitSpec:
        path = Path(path)
        return cls.from_json(json.loads(path.read_text()), path.parent)

    def unitary(self) -> np.ndarray:
        """Dense ``G_N ... G_1`` on the register."""
        dim = 2**self.n
        cols = np.eye(dim, dtype=complex).reshape((2,) * self.n + (dim,))
        for op in self.gates:
            cols = _apply_register_gate(cols, op.matrix, op.targets)
        return cols.reshape(dim, dim)


def _apply_register_gate(psi: np.ndarray, G: np.ndarray, targets) -> np.ndarray:
    """Plain (non energy-preserving) gate on the leading qubit axes of ``psi``."""
    k = len(targets)
    moved = np.moveaxis(psi, targets, range(k))
    shape = moved.shape
    out = (G @ moved.reshape(2**k, -1)).reshape(shape)
    return np.moveaxis(out, range(k), targets)


def _weights(k: int) -> np.ndarray:
    return np.array([bin(x).count("1") for x in range(2**k)])


def apply_gate_with_battery(psi: np.ndarray, G: np.ndarray, targets, capacity: int) -> np.ndarray:
    """Energy-preserving k-local gate; active on local energies ``k .. capacity``."""
    k = len(targets)
    moved = np.moveaxis(psi, targets, range(k))
    shape = moved.shape
    flat = moved.reshape((2**k, -1, shape[-1]))
    out = apply_local_dilation(flat, G, _weights(k), capacity, e_lo=k)
    return np.moveaxis(out.reshape(shape), range(k), targets)


def _register_energies(n: int) -> np.ndarray:
    return _weights(n)


def _energy_split(psi: np.ndarray, n: int) -> tuple[float, float]:
    probs = np.abs(psi.reshape(2**n, -1)) ** 2
    reg = float(np.dot(probs.sum(axis=1), _register_energies(n)))
    bat = float(np.dot(probs.sum(axis=0), np.arange(probs.shape[1])))
    return reg, bat


@dataclass
class RunReport:
    label: str
    R: int
    fidelity: float
    energy_trace: list[dict]
    final_register: np.ndarray | None = field(default=None, repr=False)
    deviations: list[float] = field(default_factory=list)
    cumulative: list[float] = field(default_factory=list)
    bound: float | None = None
    single_gate_epsilon: float | None = None
    within_bound: bool | None = None
    mode: str = "quantum"

    def to_json(self) -> dict:
        out = {
            "label": self.label,
            "mode": self.mode,
            "R": self.R,
            "fidelity": self.fidelity,
            "energy_trace": self.energy_trace,
        }
        if self.mode == "alternating":
            out.update(
                deviations=self.deviations,
                cumulative=self.cumulative,
                bound=self.bound,
                single_gate_epsilon=self.single_gate_epsilon,
                within_bound=self.within_bound,
            )
        return out


def simulate_circuit(c: CircuitSpec, R: int, input_state=None) -> RunReport:
    """Run every gate against one sine battery sized for the whole register."""
    n = c.n
    system = make_uniform_system(n)
    beta = sine_battery(system, R)
    cap = beta.capacity
    if input_state is None:
        input_state = np.zeros(2**n, dtype=complex)
        input_state[0] = 1
    v = np.asarray(input_state, dtype=complex).ravel()
    if v.shape != (2**n,):
        raise ValueError(f"input state must have length {2**n}")
    v = v / np.linalg.norm(v)

    joint = np.outer(v, beta.amplitudes)
    total = _register_energies(n)[:, None] + np.arange(cap + 1)[None, :]
    support = np.abs(joint) > 0
    if np.any(support & ((total < n) | (total > cap))):
        raise ValueError("joint input leaves the valid total-energy window")

    psi = joint.reshape((2,) * n + (cap + 1,))
    trace = []
    reg, bat = _energy_split(psi, n)
    trace.append({"step": 0, "register": reg, "battery": bat, "total": reg + bat})
    for i, op in enumerate(c.gates, 1):
        psi = apply_gate_with_battery(psi, op.matrix, op.targets, cap)
        reg, bat = _energy_split(psi, n)
        trace.append({"step": i, "register": reg, "battery": bat, "total": reg + bat})

    flat = psi.reshape(2**n, cap + 1)
    rho = flat @ flat.conj().T
    ideal = c.unitary() @ v
    fid = float(np.real(ideal.conj() @ rho @ ideal))
    return RunReport(c.label, R, fid, trace, rho)


def classical_run(c: CircuitSpec, x: int, R: int, total_energy: int | None = None) -> np.ndarray:
    """Outcome distribution for basis input ``x`` with the battery in one definite level.

    The battery starts in level ``E - E_x`` for a total energy E in ``n .. R n``
    (default ``n``), which makes every gate act exactly.
    """
    n = c.n
    if R < 3:
        raise ValueError("R must be >= 3")
    cap = R * n
    E = n if total_energy is None else int(total_energy)
    if not n <= E <= cap:
        raise ValueError(f"total energy {E} outside {n}..{cap}")
    if not 0 <= x < 2**n:
        raise ValueError("input index out of range")
    b0 = E - bin(x).count("1")
    joint = np.zeros((2**n, cap + 1), dtype=complex)
    joint[x, b0] = 1
    psi = joint.reshape((2,) * n + (cap + 1,))
    for op in c.gates:
        psi = apply_gate_with_battery(psi, op.matrix, op.targets, cap)
    return np.sum(np.abs(psi.reshape(2**n, cap + 1)) ** 2, axis=1)


def _trace_norm(M: np.ndarray) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh((M + M.conj().T) / 2))))


def random_product_inputs(dim: int, count: int, seed: int = 0) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        out.append(v / np.linalg.norm(v))
    return out


def alternating_experiment(G, m: int, R: int, inputs=None, *, seed: int = 0, epsilon: float | None = None) -> RunReport:
    """Apply U_G, U_G^dag, U_G, ... to 2m fresh copies with one battery.

    ``deviations[j]`` is the trace norm between copy j's output and its ideal image;
    ``cumulative[r]`` is the trace norm between the joint output of the first
    ``2(r+1)`` copies and the ideal product. The final entry is compared with
    ``4 m sqrt(eps)`` where eps is the single-gate worst-case infidelity at this R
    (computed unless given).
    """
    G = check_unitary(G)
    if m < 1:
        raise ValueError("m must be >= 1")
    system = system_for_dim(G.shape[0])
    d, s = system.dim, system.norm
    beta = sine_battery(system, R)
    cap = beta.capacity
    copies = 2 * m
    if d**copies * (cap + 1) > MAX_JOINT_DIM:
        raise ValueError(f"joint dimension {d**copies * (cap + 1)} exceeds {MAX_JOINT_DIM}")
    if inputs is None:
        inputs = random_product_inputs(d, copies, seed)
    if len(inputs) != copies:
        raise ValueError(f"need {copies} inputs, got {len(inputs)}")
    inputs = [np.asarray(v, dtype=complex) / np.linalg.norm(v) for v in inputs]

    psi = np.asarray(beta.amplitudes, dtype=complex)
    for v in reversed(inputs):
        psi = np.multiply.outer(v, psi)
    en = np.asarray(system.energies)
    Gd = G.conj().T

    def energies(state):
        probs = np.abs(state) ** 2
        bat = float(np.dot(probs.reshape(-1, cap + 1).sum(axis=0), np.arange(cap + 1)))
        reg = 0.0
        for j in range(copies):
            marg = np.moveaxis(probs, j, 0).reshape(d, -1).sum(axis=1)
            reg += float(np.dot(marg, en))
        return {"register": reg, "battery": bat, "total": reg + bat}

    trace = [{"step": 0, **energies(psi)}]
    for j in range(copies):
        gate = G if j % 2 == 0 else Gd
        moved = np.moveaxis(psi, j, 0)
        shape = moved.shape
        out = apply_local_dilation(moved.reshape(d, -1, cap + 1), gate, en, cap, e_lo=s)
        psi = np.moveaxis(out.reshape(shape), 0, j)
        trace.append({"step": j + 1, **energies(psi)})

    ideals = [(G if j % 2 == 0 else Gd) @ v for j, v in enumerate(inputs)]
    flat = psi.reshape(d**copies, cap + 1)
    deviations = []
    for j in range(copies):
        a = np.moveaxis(psi, j, 0).reshape(d, -1)
        rho_j = a @ a.conj().T
        deviations.append(_trace_norm(rho_j - np.outer(ideals[j], ideals[j].conj())))
    cumulative = []
    for r in range(1, m + 1):
        k = 2 * r
        a = flat.reshape(d**k, -1)
        rho = a @ a.conj().T
        phi = np.array([1.0 + 0j])
        for v in ideals[:k]:
            phi = np.kron(phi, v)
        cumulative.append(_trace_norm(rho - np.outer(phi, phi.conj())))
    final_fid = float(np.real(phi.conj() @ rho @ phi))

    if epsilon is None:
        dil = build_dilation(G, system, beta)
        epsilon = worst_case_fidelity(induced_channel(dil, beta), G, seed=seed).epsilon
    bound = 4 * m * math.sqrt(max(epsilon, 0.0))
    return RunReport(
        label="alternating",
        R=R,
        fidelity=final_fid,
        energy_trace=trace,
        deviations=deviations,
        cumulative=cumulative,
        bound=bound,
        single_gate_epsilon=epsilon,
        within_bound=cumulative[-1] <= bound,
        mode="alternating",
    )
