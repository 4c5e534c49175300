"""Energy ladders for the target register and the battery, and the sine battery state.

Energies are integers in units of the level spacing (hbar * omega = 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SystemSpec:
    """Diagonal Hamiltonian of the target system in its energy eigenbasis.

    ``energies[x]`` is the energy of basis state ``|x>``. For an n-qubit register
    built from unit-gap qubits this is the Hamming weight of ``x`` (qubit 0 is the
    most significant bit), so the list is not sorted beyond one qubit.
    """

    energies: tuple[int, ...]

    def __post_init__(self):
        energies = tuple(int(e) for e in self.energies)
        if not energies:
            raise ValueError("a system needs at least one level")
        if any(e != f for e, f in zip(energies, self.energies)):
            raise ValueError("energies must be integers")
        if min(energies) != 0:
            raise ValueError("ground energy must be 0")
        object.__setattr__(self, "energies", energies)

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def norm(self) -> int:
        """Operator norm of H_S, i.e. the largest energy."""
        return max(self.energies)

    @property
    def uniform(self) -> bool:
        """True when the distinct levels are exactly 0, 1, ..., norm (unit spacing)."""
        return self.norm >= 1 and set(self.energies) == set(range(self.norm + 1))

    @property
    def hamiltonian(self) -> np.ndarray:
        return np.diag(np.asarray(self.energies, dtype=float))

    def observable(self) -> EnergyObservable:
        return EnergyObservable(np.asarray(self.energies), "system")

    def to_json(self) -> dict:
        return {"energies": list(self.energies)}

    @classmethod
    def from_json(cls, data: dict) -> SystemSpec:
        if "n_qubits" in data:
            return make_uniform_system(int(data["n_qubits"]))
        if "energies" in data:
            return cls(tuple(data["energies"]))
        raise ValueError("system JSON needs 'n_qubits' or 'energies'")


def make_uniform_system(n_qubits: int) -> SystemSpec:
    """Register of ``n_qubits`` unit-gap qubits."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    return SystemSpec(tuple(bin(x).count("1") for x in range(2**n_qubits)))


def make_ladder_system(dim: int) -> SystemSpec:
    """Single qudit with equally spaced, non-degenerate levels 0..dim-1."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    return SystemSpec(tuple(range(dim)))


def system_for_dim(dim: int) -> SystemSpec:
    """Qubit register when ``dim`` is a power of two, otherwise a qudit ladder."""
    n = dim.bit_length() - 1
    if dim >= 2 and 2**n == dim:
        return make_uniform_system(n)
    return make_ladder_system(dim)


@dataclass(frozen=True)
class EnergyObservable:
    """Diagonal energy operator over a named space (system, battery or joint)."""

    diagonal: np.ndarray
    space: str = "system"

    def __post_init__(self):
        diag = np.asarray(self.diagonal)
        if diag.ndim != 1:
            raise ValueError("diagonal must be one-dimensional")
        if np.any(diag < 0):
            raise ValueError("energies must be non-negative")
        diag = diag.copy()
        diag.flags.writeable = False
        object.__setattr__(self, "diagonal", diag)

    def __len__(self):
        return len(self.diagonal)

    @staticmethod
    def joint(system: EnergyObservable, battery: EnergyObservable) -> EnergyObservable:
        """H_S (x) 1 + 1 (x) H_B, indexed row-major as (x, b)."""
        total = np.add.outer(system.diagonal, battery.diagonal).ravel()
        return EnergyObservable(total, "joint")


@dataclass(frozen=True)
class BatterySim:
    """Equally spaced battery with levels 0..capacity prepared in the sine state."""

    R: int
    system_norm: int
    amplitudes: np.ndarray = field(repr=False)

    @property
    def capacity(self) -> int:
        return self.R * self.system_norm

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.capacity + 1)

    @property
    def L(self) -> int:
        return (self.R - 2) * self.system_norm + 2

    @property
    def mean_energy(self) -> float:
        return float(np.dot(self.levels, self.amplitudes**2))

    def observable(self) -> EnergyObservable:
        return EnergyObservable(self.levels, "battery")

    def to_json(self) -> dict:
        return {
            "R": self.R,
            "capacity": self.capacity,
            "L": self.L,
            "amplitudes": [float(a) for a in self.amplitudes],
        }


def sine_battery(system: SystemSpec, R: int) -> BatterySim:
    """Battery of capacity ``R * |H_S|`` in the sine-shaped superposition.

    Levels ``s..(R-1)s`` (``s = |H_S|``) carry amplitude
    ``sqrt(2/L) sin((E - s + 1) pi / L)`` with ``L = (R-2) s + 2``; the remaining
    levels, including both ends of the ladder, are empty.
    """
    if int(R) != R or R < 3:
        raise ValueError(f"R must be an integer >= 3, got {R}")
    if not system.uniform:
        raise ValueError("the sine battery is only defined for equally spaced system spectra")
    R = int(R)
    s = system.norm
    L = (R - 2) * s + 2
    amps = np.zeros(R * s + 1)
    levels = np.arange(s, (R - 1) * s + 1)
    amps[levels] = np.sqrt(2.0 / L) * np.sin((levels - s + 1) * np.pi / L)
    amps.flags.writeable = False
    return BatterySim(R, s, amps)


def mean_energy(state, obs: EnergyObservable) -> float:
    """Expected energy ``sum_k |psi_k|^2 E_k`` of a normalized state vector."""
    psi = np.asarray(state).ravel()
    if psi.shape[0] != len(obs):
        raise ValueError(f"state has dimension {psi.shape[0]}, observable {len(obs)}")
    probs = np.abs(psi) ** 2
    if abs(probs.sum() - 1.0) > 1e-10:
        raise ValueError("state is not normalized")
    return float(np.dot(probs, obs.diagonal))


def energy_change(G, system: SystemSpec) -> np.ndarray:
    """Hermitian operator ``G^dag H_S G - H_S``."""
    G = np.asarray(G, dtype=complex)
    H = system.hamiltonian
    delta = G.conj().T @ H @ G - H
    return (delta + delta.conj().T) / 2
