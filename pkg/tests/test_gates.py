import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergon.gates import check_unitary, gate_from_json, gate_names, gate_to_json, haar_unitary, named_gate, qft


@pytest.mark.parametrize("name", [n for n in gate_names() if n != "QFTn"] + ["QFT3"])
def test_builtin_gates_unitary(name):
    check_unitary(named_gate(name))


def test_unknown_gate():
    with pytest.raises(ValueError, match="unknown gate"):
        named_gate("QFT0")


def test_qft_first_row():
    np.testing.assert_allclose(qft(2)[0], np.full(4, 0.5))


def test_json_roundtrip_and_validation():
    G = named_gate("H")
    np.testing.assert_allclose(gate_from_json(gate_to_json(G)), G)
    with pytest.raises(ValueError, match="not unitary"):
        gate_from_json({"dim": 2, "matrix": [[[1, 0], [1, 0]], [[0, 0], [1, 0]]]})
    with pytest.raises(ValueError, match="shape"):
        gate_from_json({"dim": 3, "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]})


@settings(max_examples=20, deadline=None)
@given(d=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_haar_unitary(d, seed):
    check_unitary(haar_unitary(d, np.random.default_rng(seed)), tol=1e-12)
