import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergon.dilation import KrausChannel, induced_channel, sine_dilation
from ergon.fidelity import (
    analytic_infidelity,
    channel_via_coefficients,
    check_density_matrix,
    coefficient_table,
    cxyzt_closed,
    cxyzt_leading,
    cxyzt_oracle,
    diamond_energy_lower,
    diamond_energy_upper,
    diamond_sandwich,
    entanglement_fidelity,
    fidelity_via_coefficients,
    partial_isometry,
    random_density_matrices,
    variance_infidelity,
    worst_case_fidelity,
)
from ergon.gates import haar_unitary, named_gate
from ergon.spectra import make_ladder_system, make_uniform_system, sine_battery, system_for_dim

QUBIT = make_uniform_system(1)
X, H, I2 = named_gate("X"), named_gate("H"), named_gate("I")
PLUS = np.full((2, 2), 0.5)


def channel(G, R, system=QUBIT):
    dil, beta = sine_dilation(G, system, R)
    return induced_channel(dil, beta)


def test_ideal_channel_fidelity_one():
    ideal = KrausChannel(H[None], (0,))
    rho = random_density_matrices(2, 1, np.random.default_rng(0))[0]
    assert entanglement_fidelity(ideal, H, rho) == pytest.approx(1.0, abs=1e-14)
    assert worst_case_fidelity(ideal, H, n_probes=100).f_wc == pytest.approx(1.0, abs=1e-12)


def test_x_r4_examples():
    ch = channel(X, 4)
    assert entanglement_fidelity(ch, X, np.diag([1.0, 0.0])) == pytest.approx(1.0, abs=1e-14)
    assert entanglement_fidelity(ch, X, PLUS) == pytest.approx(0.625, abs=1e-14)
    res = worst_case_fidelity(ch, X)
    assert res.f_wc <= 0.625 + 1e-12
    assert res.converged


def test_x_r200_close_to_analytic():
    res = worst_case_fidelity(channel(X, 200), X)
    assert abs(res.epsilon / (math.pi / 200) ** 2 - 1) <= 0.10


def test_solver_never_worse_than_probes():
    rng = np.random.default_rng(5)
    for d, R in ((2, 7), (3, 6), (4, 5)):
        G = haar_unitary(d, rng)
        res = worst_case_fidelity(channel(G, R, system_for_dim(d)), G, n_probes=2000, seed=d)
        assert res.f_wc <= res.probe_min + 1e-7
        assert res.gap <= 1e-9


def test_check_density_matrix():
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([1.0, 1.0]))
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([1.5, -0.5]))


def test_random_density_matrices_valid():
    rhos = random_density_matrices(3, 50, np.random.default_rng(0))
    for r in rhos:
        check_density_matrix(r)


def test_coefficient_examples():
    b = sine_battery(QUBIT, 4)
    for x in range(2):
        assert cxyzt_oracle(QUBIT, b, x, x, x, x) == pytest.approx(1.0, abs=1e-12)
    assert cxyzt_oracle(QUBIT, b, 0, 1, 1, 0) == pytest.approx(0.25, abs=1e-14)


def test_coefficient_matches_partial_isometries():
    system = make_uniform_system(2)
    b = sine_battery(system, 5)
    beta = b.amplitudes
    for idx in [(0, 1, 2, 3), (3, 3, 0, 1), (1, 2, 2, 1)]:
        x, y, z, t = idx
        dense = beta @ partial_isometry(system, b, z, t).T @ partial_isometry(system, b, x, y) @ beta
        assert cxyzt_oracle(system, b, *idx) == pytest.approx(dense, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(d=st.integers(2, 4), R=st.integers(3, 12))
def test_coefficients_bounded(d, R):
    system = system_for_dim(d)
    C = coefficient_table(system, sine_battery(system, R)).values
    assert np.all(np.abs(C) <= 1 + 1e-12)


def test_closed_form_discrepancy_characterized():
    # the reference closed form is off at small R and only approaches the direct sum slowly
    worst = {}
    for R in (4, 10, 50):
        b = sine_battery(QUBIT, R)
        worst[R] = max(
            abs(cxyzt_closed(QUBIT, b, *idx) - cxyzt_oracle(QUBIT, b, *idx)) for idx in np.ndindex(2, 2, 2, 2)
        )
    assert cxyzt_closed(QUBIT, sine_battery(QUBIT, 4), 0, 0, 0, 0) == pytest.approx(0.75, abs=1e-12)
    assert worst[4] > worst[10] > worst[50] > 1e-4


@pytest.mark.parametrize("idx, k", [((1, 0, 0, 0), 1), ((0, 1, 1, 0), 2)])
def test_leading_order_deficit(idx, k):
    for R in (50, 100, 200):
        b = sine_battery(QUBIT, R)
        deficit = (1 - cxyzt_oracle(QUBIT, b, *idx)) * b.mean_energy**2
        assert deficit == pytest.approx(k**2 * math.pi**2 / 8, rel=0.05)
        assert cxyzt_oracle(QUBIT, b, *idx) == pytest.approx(cxyzt_leading(QUBIT, b, *idx), abs=2e-4)


def test_coefficient_path_x_plus():
    table = coefficient_table(QUBIT, sine_battery(QUBIT, 4))
    assert fidelity_via_coefficients(PLUS, X, table) == pytest.approx(0.625, abs=1e-14)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 4), R=st.integers(3, 20))
def test_coefficient_path_matches_kraus(seed, d, R):
    rng = np.random.default_rng(seed)
    system = system_for_dim(d)
    G = haar_unitary(d, rng)
    rho = random_density_matrices(d, 1, rng)[0]
    table = coefficient_table(system, sine_battery(system, R))
    ch = channel(G, R, system)
    assert fidelity_via_coefficients(rho, G, table) == pytest.approx(entanglement_fidelity(ch, G, rho), abs=1e-10)
    np.testing.assert_allclose(channel_via_coefficients(rho, G, table), ch(rho), atol=1e-12)


def test_analytic_infidelity_examples():
    assert analytic_infidelity(I2, QUBIT, 100) == 0
    assert analytic_infidelity(X, QUBIT, 100) == pytest.approx((math.pi / 200) ** 2, rel=1e-12)
    assert analytic_infidelity(H, QUBIT, 100) == pytest.approx((math.pi * math.sqrt(2) / 400) ** 2, rel=1e-12)


def test_variance_infidelity_is_below_worst_case():
    rho = random_density_matrices(2, 1, np.random.default_rng(2))[0]
    assert 0 <= variance_infidelity(X, QUBIT, 100, rho) <= analytic_infidelity(X, QUBIT, 100) + 1e-15


def test_diamond_sandwich_examples():
    assert diamond_sandwich(1.0) == (0.0, 0.0)
    lo, hi = diamond_sandwich(0.99)
    assert lo == pytest.approx(0.010025, abs=1e-5) and hi == pytest.approx(0.2, abs=1e-12)
    lo, hi = diamond_sandwich(0.625)
    assert lo == pytest.approx(0.4189, abs=1e-4) and hi == pytest.approx(1.2247, abs=1e-4)


def test_diamond_energy_bounds_ordered():
    for eps in (1e-2, 1e-4):
        assert diamond_energy_lower(1, eps) < diamond_energy_upper(2, eps)


def test_ladder_system_solver():
    system = make_ladder_system(3)
    G = haar_unitary(3, np.random.default_rng(8))
    res = worst_case_fidelity(channel(G, 40, system), G, n_probes=500)
    assert res.converged and 0 < res.epsilon < 0.05
