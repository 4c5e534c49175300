"""Resource measures and the lower/upper bounds on what a battery must hold.

Entropies are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .gates import check_unitary
from .spectra import SystemSpec, energy_change

MEASURE_KINDS = ("energy", "capacityComplement", "relEntropyCoherence")


def von_neumann_entropy(rho) -> float:
    w = np.linalg.eigvalsh(np.asarray(rho))
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 1e-15]
    return float(-np.sum(p * np.log2(p)))


def coherence_of_state(rho) -> float:
    """Relative entropy of coherence ``S(rho_diag) - S(rho)`` in the energy eigenbasis."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    value = shannon_entropy(np.diag(rho).real) - von_neumann_entropy(rho)
    return max(value, 0.0)


@dataclass(frozen=True)
class ResourceMeasure:
    """A monotone with its Lipschitz constant K and regularity offset c."""

    kind: str
    K: float
    c: float
    hamiltonian: np.ndarray | None = field(default=None, repr=False)
    additive: bool = True

    def __post_init__(self):
        if self.kind not in MEASURE_KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}")

    def __call__(self, rho) -> float:
        rho = np.asarray(rho, dtype=complex)
        if rho.ndim == 1:
            rho = np.outer(rho, rho.conj())
        if self.kind == "relEntropyCoherence":
            return coherence_of_state(rho)
        H = self.hamiltonian
        if self.kind == "energy":
            return float(np.trace(H @ rho).real)
        norm = np.linalg.eigvalsh(H).max()
        return float(np.trace((norm * np.eye(len(H)) - H) @ rho).real)


def energy_measure(system: SystemSpec) -> ResourceMeasure:
    return ResourceMeasure("energy", float(system.norm), 0.0, system.hamiltonian)


def capacity_complement_measure(system: SystemSpec) -> ResourceMeasure:
    return ResourceMeasure("capacityComplement", float(system.norm), 0.0, system.hamiltonian)


def coherence_measure(dim: int) -> ResourceMeasure:
    return ResourceMeasure("relEntropyCoherence", math.log2(dim), 2.0)


@dataclass(frozen=True)
class GateResourceProfile:
    delta: np.ndarray = field(repr=False)
    lambda_max: float = 0.0
    lambda_min: float = 0.0

    @property
    def m_of_G(self) -> float:
        return self.lambda_max

    @property
    def m_of_Gdag(self) -> float:
        return -self.lambda_min

    @property
    def spread(self) -> float:
        return self.lambda_max - self.lambda_min


def gate_profile(G, system: SystemSpec) -> GateResourceProfile:
    """Extreme eigenvalues of ``G^dag H_S G - H_S``: energy generated by G and by G^dag."""
    G = check_unitary(G)
    delta = energy_change(G, system)
    lam = np.linalg.eigvalsh(delta)
    return GateResourceProfile(delta, float(lam[-1]), float(lam[0]))


@dataclass(frozen=True)
class CorollaryBound:
    bound: float
    m_star: int
    integer_max: float


def corollary_bound(Mg: float, Mgdag: float, K: float, c: float, epsilon: float) -> CorollaryBound:
    """Battery resource needed for additive measures.

    ``bound = (Mg + Mgdag)^2 / (32 K sqrt(eps)) - c - 2 K sqrt(eps)``; ``integer_max``
    is the exact maximum of ``m (Mg + Mgdag) - 8 sqrt(eps) K m^2 - c`` over
    integers ``m >= 0`` and ``m_star`` its (smallest) maximizer.
    """
    if K <= 0:
        raise ValueError("K must be positive")
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    total = Mg + Mgdag
    if epsilon == 0:
        return CorollaryBound(math.inf, 0, math.inf)
    root = math.sqrt(epsilon)
    closed = total**2 / (32 * K * root) - c - 2 * K * root
    centre = total / (16 * root * K)
    candidates = {max(0, math.floor(centre)), max(0, math.ceil(centre))}

    def objective(m: int) -> float:
        return m * total - 8 * root * K * m * m - c

    m_star = min(candidates, key=lambda m: (-objective(m), m))
    return CorollaryBound(closed, m_star, objective(m_star))


def energy_lower_bound(G, system: SystemSpec, epsilon: float) -> float:
    """Mean battery energy needed for worst-case infidelity ``epsilon``, clamped at 0."""
    if system.norm == 0:
        return 0.0
    prof = gate_profile(G, system)
    b = corollary_bound(prof.m_of_G, prof.m_of_Gdag, system.norm, 0.0, epsilon)
    return max(b.bound, 0.0)


def capacity_lower_bound(system: SystemSpec, epsilon: float) -> float:
    """Capacity needed by a universal processor: ``|H_S| / (4 sqrt(eps)) - 4 |H_S| sqrt(eps)``."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    s = system.norm
    if s == 0:
        return 0.0
    root = math.sqrt(epsilon)
    return max(s / (4 * root) - 4 * s * root, 0.0)


@dataclass(frozen=True)
class AchievableEnergy:
    mean: float
    capacity: float
    R: int


def achievable_energy(G, system: SystemSpec, epsilon: float) -> AchievableEnergy:
    """Mean energy and capacity at which the sine construction reaches ``epsilon``.

    Uses the leading-order infidelity, so ``mean = pi * spread / (4 sqrt(eps))``,
    ``capacity = 2 * mean`` and ``R = ceil(pi * spread / (2 sqrt(eps) |H_S|))``
    (never below 3).
    """
    if not system.uniform:
        raise ValueError("the construction needs an equally spaced spectrum")
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    spread = gate_profile(G, system).spread
    root = math.sqrt(epsilon)
    if spread <= 1e-12:
        return AchievableEnergy(1.5 * system.norm, 3.0 * system.norm, 3)
    mean = math.pi * spread / (4 * root)
    R = max(3, math.ceil(math.pi * spread / (2 * root * system.norm)))
    return AchievableEnergy(mean, 2 * mean, R)


def coherence_bound(CG: float, CGdag: float, dim: int, epsilon: float) -> float:
    """Coherence (bits) the battery must hold: ``(CG + CGdag)^2 / (32 sqrt(eps) log d) - 2``."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    return (CG + CGdag) ** 2 / (32 * math.sqrt(epsilon) * math.log2(dim)) - 2


def universal_coherence_bound(dim: int, epsilon: float) -> float:
    """``log d / (8 sqrt(eps)) - 2``, the worst case over gates."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    return math.log2(dim) / (8 * math.sqrt(epsilon)) - 2


def _coherence_gain(G, psi) -> float:
    out = G @ psi
    return shannon_entropy(np.abs(out) ** 2) - shannon_entropy(np.abs(psi) ** 2)


def coherence_generation_estimate(G, trials: int = 32, seed: int = 0) -> float:
    """Sampled lower estimate of the coherence a gate can generate from a pure input.

    Starts from every basis state and ``trials`` random pure states, then climbs
    locally with L-BFGS. Not a certified value.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    G = check_unitary(G)
    d = G.shape[0]
    rng = np.random.default_rng(seed)
    starts = list(np.eye(d, dtype=complex))
    for _ in range(trials):
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        starts.append(v / np.linalg.norm(v))

    def neg_gain(z):
        v = z[:d] + 1j * z[d:]
        n = np.linalg.norm(v)
        if n < 1e-12:
            return 0.0
        return -_coherence_gain(G, v / n)

    best = 0.0
    for v in starts:
        best = max(best, _coherence_gain(G, v))
        z0 = np.concatenate([v.real, v.imag])
        res = minimize(neg_gain, z0, method="L-BFGS-B", options={"maxiter": 200})
        best = max(best, -float(res.fun))
    return best


BUDGET_ASSUMPTIONS = (
    "each gate powered by its own battery of mean energy <H_B>",
    "per-gate infidelity at least (|H_gate| / (8 <H_B>))^2, from the single-gate bound",
    "errors add linearly over N gates to the total delta",
    "single shared battery needs pi n / (2 sqrt(delta)) independent of N",
)


def budget_comparison(N: int, n: int, delta: float, h_gate: float = 1.0) -> dict:
    """Total energy of N separately powered gates versus one recycled battery (units hbar omega)."""
    if N < 1 or n < 1:
        raise ValueError("N and n must be >= 1")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    per_gate_eps = delta / N
    per_gate = h_gate / (8 * math.sqrt(per_gate_eps))
    return {
        "N": N,
        "n": n,
        "delta": delta,
        "multi_lower": N * per_gate,
        "single_upper": math.pi * n / (2 * math.sqrt(delta)),
        "assumptions": list(BUDGET_ASSUMPTIONS),
    }


@dataclass
class BoundReport:
    gate: str
    measure: str
    epsilon: float
    lower_mean: float
    lower_capacity: float
    achievable_mean: float
    achievable_capacity: float
    m_star: int
    vacuous: bool

    def to_json(self) -> dict:
        return {
            "gate": self.gate,
            "measure": self.measure,
            "epsilon": self.epsilon,
            "lower_mean": self.lower_mean,
            "lower_capacity": self.lower_capacity,
            "achievable_mean": self.achievable_mean,
            "achievable_capacity": self.achievable_capacity,
            "m_star": self.m_star,
            "vacuous": self.vacuous,
        }


def bound_report(G, system: SystemSpec, epsilon: float, gate: str = "G") -> BoundReport:
    """Energy bounds for one gate at one error level.

    The capacity lower bound adds the capacity-complement bound to the mean-energy
    bound, both at this gate's profile. Negative (vacuous) bounds are clamped to 0.
    """
    prof = gate_profile(G, system)
    s = float(system.norm)
    if s == 0:
        raw_mean, m_star = 0.0, 0
    else:
        cb = corollary_bound(prof.m_of_G, prof.m_of_Gdag, s, 0.0, epsilon)
        raw_mean, m_star = cb.bound, cb.m_star
    raw_capacity = 2 * raw_mean
    if system.uniform and epsilon > 0:
        ach = achievable_energy(G, system, epsilon)
        ach_mean, ach_cap = ach.mean, ach.capacity
    else:
        ach_mean = ach_cap = math.nan
    return BoundReport(
        gate=gate,
        measure="energy",
        epsilon=epsilon,
        lower_mean=max(raw_mean, 0.0),
        lower_capacity=max(raw_capacity, 0.0),
        achievable_mean=ach_mean,
        achievable_capacity=ach_cap,
        m_star=m_star,
        vacuous=raw_mean <= 0,
    )
