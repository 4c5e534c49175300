"""Energy-preserving dilation U_G of a gate G on system (x) battery.

The joint space splits into sectors of fixed total energy E. On every sector with
``|H_S| <= E <= |H_B|`` each system level x pairs with battery level ``E - E_x`` and
the block there is the matrix of G itself; every other sector is left untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gates import check_unitary
from .spectra import BatterySim, EnergyObservable, SystemSpec, sine_battery

DENSE_LIMIT = 4096


def _capacity(battery) -> int:
    return battery.capacity if isinstance(battery, BatterySim) else int(battery)


def sector_basis(system: SystemSpec, battery, E: int) -> list[tuple[int, int]]:
    """Joint basis states ``(x, b)`` of total energy ``E``, ordered by x."""
    cap = _capacity(battery)
    return [(x, E - ex) for x, ex in enumerate(system.energies) if 0 <= E - ex <= cap]


def e_ok(system: SystemSpec, battery) -> range:
    """Total energies on which every system level fits: ``|H_S| .. |H_B|``."""
    return range(system.norm, _capacity(battery) + 1)


@dataclass(frozen=True)
class JointState:
    """Amplitudes over (system level x, battery level b), stored as a (d_S, n_b) array."""

    amplitudes: np.ndarray

    @property
    def dims(self) -> tuple[int, int]:
        return self.amplitudes.shape

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def vector(self) -> np.ndarray:
        return self.amplitudes.ravel()

    @classmethod
    def product(cls, system_state, battery_state) -> JointState:
        return cls(np.outer(np.asarray(system_state, dtype=complex), np.asarray(battery_state)))

    def system_marginal(self) -> np.ndarray:
        a = self.amplitudes
        return a @ a.conj().T

    def battery_marginal(self) -> np.ndarray:
        a = self.amplitudes
        return a.T @ a.conj()

    def mean_energy(self, system: SystemSpec) -> float:
        obs = EnergyObservable.joint(
            system.observable(), EnergyObservable(np.arange(self.dims[1]), "battery")
        )
        probs = np.abs(self.vector()) ** 2
        return float(np.dot(probs, obs.diagonal) / probs.sum())


@dataclass(frozen=True)
class SectorDilation:
    system: SystemSpec
    capacity: int
    gate: np.ndarray = field(repr=False)
    blocks: dict[int, np.ndarray] = field(repr=False)
    bases: dict[int, list[tuple[int, int]]] = field(repr=False)

    @property
    def e_ok(self) -> range:
        return e_ok(self.system, self.capacity)

    @property
    def joint_dim(self) -> int:
        return self.system.dim * (self.capacity + 1)

    def to_dense(self) -> np.ndarray:
        """Full joint unitary; debug path, refused above ``DENSE_LIMIT``."""
        n = self.joint_dim
        if n > DENSE_LIMIT:
            raise ValueError(f"joint dimension {n} exceeds the dense limit {DENSE_LIMIT}")
        nb = self.capacity + 1
        U = np.zeros((n, n), dtype=complex)
        for E, basis in self.bases.items():
            idx = np.array([x * nb + b for x, b in basis])
            U[np.ix_(idx, idx)] = self.blocks[E]
        return U

    def dagger(self) -> SectorDilation:
        return SectorDilation(
            self.system,
            self.capacity,
            self.gate.conj().T,
            {E: B.conj().T for E, B in self.blocks.items()},
            self.bases,
        )


def build_dilation(G, system: SystemSpec, battery) -> SectorDilation:
    """Assemble the sector blocks of U_G; raises for non-unitary G or uneven spectra."""
    G = check_unitary(G)
    if G.shape[0] != system.dim:
        raise ValueError(f"gate dimension {G.shape[0]} != system dimension {system.dim}")
    if not system.uniform:
        raise ValueError("dilation is only defined for equally spaced system spectra")
    cap = _capacity(battery)
    ok = e_ok(system, cap)
    blocks, bases = {}, {}
    for E in range(system.norm + cap + 1):
        basis = sector_basis(system, cap, E)
        if E in ok:
            xs = [x for x, _ in basis]
            block = G[np.ix_(xs, xs)]
        else:
            block = np.eye(len(basis), dtype=complex)
        blocks[E] = block
        bases[E] = basis
    return SectorDilation(system, cap, G, blocks, bases)


def apply_dilation(d: SectorDilation, state: JointState) -> JointState:
    """Apply U_G one energy sector at a time; sectors share no amplitudes."""
    a = np.asarray(state.amplitudes)
    if a.shape != (d.system.dim, d.capacity + 1):
        raise ValueError(f"state dims {a.shape} != {(d.system.dim, d.capacity + 1)}")
    out = np.array(a, dtype=complex)
    for E, basis in d.bases.items():
        xs, bs = zip(*basis)
        out[xs, bs] = d.blocks[E] @ a[xs, bs]
    return JointState(out)


@dataclass(frozen=True)
class KrausChannel:
    """System channel ``rho -> sum_b K_b rho K_b^dag`` induced by the dilation."""

    kraus: np.ndarray = field(repr=False)
    levels: tuple[int, ...] = ()
    label: str = ""
    R: int | None = None
    dropped_mass: float = 0.0

    @property
    def dim(self) -> int:
        return self.kraus.shape[1]

    def completeness_error(self) -> float:
        S = np.einsum("bji,bjk->ik", self.kraus.conj(), self.kraus)
        return float(np.max(np.abs(S - np.eye(self.dim))))

    def __call__(self, rho) -> np.ndarray:
        K = self.kraus
        return np.einsum("bij,jk,blk->il", K, np.asarray(rho), K.conj())


def kraus_from_amplitudes(d: SectorDilation, battery_state) -> KrausChannel:
    """Kraus family ``K_b = (1 (x) <b|) U_G (1 (x) |beta>)`` for any battery vector."""
    beta = np.asarray(battery_state)
    nb = d.capacity + 1
    if beta.shape != (nb,):
        raise ValueError(f"battery vector has shape {beta.shape}, expected {(nb,)}")
    dim = d.system.dim
    K = np.zeros((nb, dim, dim), dtype=complex)
    for E, basis in d.bases.items():
        xs = np.array([x for x, _ in basis])
        bs = np.array([b for _, b in basis])
        # <x, b_i| U |y, b_j> beta_{b_j} lands in K_{b_i}[x_i, y_j]
        contrib = d.blocks[E] * beta[bs][None, :]
        np.add.at(K, (bs[:, None], xs[:, None], xs[None, :]), contrib)
    weight = np.max(np.abs(K), axis=(1, 2))
    keep = weight > 1e-14
    dropped = float(np.sum(np.abs(K[~keep]) ** 2))
    if dropped > 1e-12:
        raise RuntimeError(f"dropped Kraus mass {dropped:.3g} exceeds 1e-12")
    return KrausChannel(K[keep], tuple(int(b) for b in np.flatnonzero(keep)), dropped_mass=dropped)


def induced_channel(d: SectorDilation, beta: BatterySim, label: str = "") -> KrausChannel:
    amps = np.asarray(beta.amplitudes)
    if abs(np.dot(amps, amps) - 1) > 1e-10:
        raise ValueError("battery state is not normalized")
    ch = kraus_from_amplitudes(d, amps)
    return KrausChannel(ch.kraus, ch.levels, label, beta.R, ch.dropped_mass)


def residual_battery(d: SectorDilation, beta, probe=None) -> np.ndarray:
    """Battery state ``Tr_S[U_G (rho (x) beta) U_G^dag]``; ``rho`` defaults to 1/d_S."""
    amps = np.asarray(beta.amplitudes if isinstance(beta, BatterySim) else beta)
    dim = d.system.dim
    rho = np.eye(dim) / dim if probe is None else np.asarray(probe)
    w, V = np.linalg.eigh(rho)
    out = np.zeros((len(amps), len(amps)), dtype=complex)
    for p, v in zip(w, V.T):
        if p <= 1e-15:
            continue
        psi = apply_dilation(d, JointState.product(v, amps))
        out += p * psi.battery_marginal()
    return out


def composition_check(G1, G2, system: SystemSpec, battery) -> float:
    """Max deviation of ``U_G1 U_G2`` from ``U_{G1 G2}`` on every joint basis state in E_ok."""
    d1 = build_dilation(G1, system, battery)
    d2 = build_dilation(G2, system, battery)
    d12 = build_dilation(np.asarray(G1) @ np.asarray(G2), system, battery)
    worst = 0.0
    for E in d12.e_ok:
        for x, b in d12.bases[E]:
            a = np.zeros((system.dim, d12.capacity + 1), dtype=complex)
            a[x, b] = 1
            s = JointState(a)
            lhs = apply_dilation(d1, apply_dilation(d2, s)).amplitudes
            rhs = apply_dilation(d12, s).amplitudes
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def apply_local_dilation(psi: np.ndarray, G: np.ndarray, weights, capacity: int, e_lo: int) -> np.ndarray:
    """Vectorized energy-preserving gate on an array shaped ``(d, ..., n_b)``.

    Axis 0 indexes the local system level (energy ``weights[x]``), the last axis the
    battery level; the middle axes are spectators. A local total energy
    ``E = weights[x] + b`` in ``[e_lo, capacity]`` is rotated by G, anything else is
    left as is. ``e_lo`` must be at least ``max(weights)``.
    """
    w = np.asarray(weights)
    nb = capacity + 1
    if psi.shape[-1] != nb:
        raise ValueError("battery axis does not match capacity")
    if e_lo < w.max():
        raise ValueError("e_lo below the local system norm")
    b = np.arange(nb)
    out = np.empty_like(psi, dtype=complex)
    for xp in range(len(w)):
        energy = w[xp] + b
        ok = (energy >= e_lo) & (energy <= capacity)
        acc = np.zeros(psi.shape[1:], dtype=complex)
        for x in range(len(w)):
            g = G[xp, x]
            if g == 0:
                continue
            shift = w[xp] - w[x]
            lo, hi = max(0, -shift), min(nb, nb - shift)
            acc[..., lo:hi] += g * psi[x, ..., lo + shift : hi + shift]
        out[xp] = np.where(ok, acc, psi[xp])
    return out


def sine_dilation(G, system: SystemSpec, R: int) -> tuple[SectorDilation, BatterySim]:
    beta = sine_battery(system, R)
    return build_dilation(G, system, beta), beta
