"""Energy-preserving gate implementations powered by a sine-state battery."""

from .bounds import achievable_energy, corollary_bound, energy_lower_bound
from .circuits import CircuitSpec, alternating_experiment, classical_run, simulate_circuit
from .dilation import build_dilation, induced_channel, sine_dilation
from .fidelity import worst_case_fidelity
from .spectra import SystemSpec, make_uniform_system, sine_battery

__all__ = [
    "CircuitSpec",
    "SystemSpec",
    "achievable_energy",
    "alternating_experiment",
    "build_dilation",
    "classical_run",
    "corollary_bound",
    "energy_lower_bound",
    "induced_channel",
    "make_uniform_system",
    "simulate_circuit",
    "sine_battery",
    "sine_dilation",
    "worst_case_fidelity",
]
