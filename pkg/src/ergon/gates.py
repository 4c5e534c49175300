"""Built-in gate library and JSON gate files."""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

_S2 = 1 / np.sqrt(2)

_FIXED = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
    "H": np.array([[_S2, _S2], [_S2, -_S2]]),
    "S": np.diag([1, 1j]),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    "CNOT": np.eye(4)[[0, 1, 3, 2]],
    "CZ": np.diag([1, 1, 1, -1]),
    "SWAP": np.eye(4)[[0, 2, 1, 3]],
}


def qft(n_qubits: int) -> np.ndarray:
    dim = 2**n_qubits
    j, k = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    return np.exp(2j * np.pi * j * k / dim) / np.sqrt(dim)


def gate_names() -> list[str]:
    return [*_FIXED, "QFTn"]


def named_gate(name: str) -> np.ndarray:
    """Matrix of a built-in gate. Multi-qubit gates use qubit 0 as the most significant bit."""
    if name in _FIXED:
        return np.asarray(_FIXED[name], dtype=complex)
    m = re.fullmatch(r"QFT(\d+)", name)
    if m and int(m.group(1)) >= 1:
        return qft(int(m.group(1)))
    raise ValueError(f"unknown gate {name!r}; known: {', '.join(gate_names())}")


def unitarity_error(G: np.ndarray) -> float:
    G = np.asarray(G)
    return float(np.max(np.abs(G.conj().T @ G - np.eye(G.shape[0]))))


def check_unitary(G, tol: float = 1e-10) -> np.ndarray:
    G = np.asarray(G, dtype=complex)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"gate must be a square matrix, got shape {G.shape}")
    err = unitarity_error(G)
    if err > tol:
        raise ValueError(f"gate is not unitary (max |G^dag G - I| = {err:.3g})")
    return G


def gate_from_json(data: dict) -> np.ndarray:
    """Parse ``{"dim": d, "matrix": [[[re, im], ...], ...]}`` and validate unitarity."""
    dim = int(data["dim"])
    rows = data["matrix"]
    G = np.array([[complex(re, im) for re, im in row] for row in rows])
    if G.shape != (dim, dim):
        raise ValueError(f"matrix shape {G.shape} does not match dim {dim}")
    return check_unitary(G)


def gate_to_json(G: np.ndarray) -> dict:
    G = np.asarray(G, dtype=complex)
    return {
        "dim": G.shape[0],
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in G],
    }


def load_gate_file(path) -> np.ndarray:
    return gate_from_json(json.loads(Path(path).read_text()))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix with phase fix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
