import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from waveguide_arrays import (
    ArrayConfig,
    DisorderSpec,
    HamiltonianMatrix,
    InputSpec,
    PTBrokenError,
    Realization,
    SeedPolicy,
    build_hamiltonian,
    clean_spectrum,
    intensity,
    make_input,
    oracle_expm_taylor,
    propagate_hermitian,
    propagate_pt,
    sample_realization,
    spectrum,
)
from waveguide_arrays.evolve import propagate_pt_grid


def random_state(N, rng):
    v = rng.normal(size=N) + 1j * rng.normal(size=N)
    return v / np.linalg.norm(v)


def dimer(gamma, C=1.0):
    return build_hamiltonian(ArrayConfig(2, 0, C), Realization(np.zeros(0), np.zeros(0), np.array([gamma])))


def eig(config, realization=None):
    info = spectrum(build_hamiltonian(config, realization), vectors=True)
    return info.eigenvalues.real, info.eigenvectors


# --- inputs ---------------------------------------------------------------

def test_single_input():
    assert np.array_equal(make_input(InputSpec.single(1), 3), [1, 0, 0])


def test_pair_input():
    np.testing.assert_allclose(make_input(InputSpec.pair(1, 2, 0.0), 2), [1 / math.sqrt(2)] * 2, rtol=1e-15)


def test_pair_input_phase_pi():
    psi = make_input(InputSpec.pair(20, 40, math.pi), 60)
    assert psi[39] == pytest.approx(-1 / math.sqrt(2), abs=1e-15)
    assert np.linalg.norm(psi) == pytest.approx(1.0)


def test_input_validation():
    with pytest.raises(ValueError, match="out of range"):
        make_input(InputSpec.single(4), 3)
    with pytest.raises(ValueError, match="p != q"):
        InputSpec.pair(2, 2)
    with pytest.raises(ValueError, match="explicit theta"):
        make_input(InputSpec.pair(1, 2), 3)


# --- Hermitian propagation ------------------------------------------------

def test_rabi_dimer():
    E, V = eig(ArrayConfig(2, 0, 1))
    psi0 = np.array([1, 0], complex)
    for t in np.linspace(0, 5, 11):
        I = intensity(propagate_hermitian(E, V, psi0, t))
        np.testing.assert_allclose(I, [math.cos(t) ** 2, math.sin(t) ** 2], atol=1e-14)
    np.testing.assert_allclose(intensity(propagate_hermitian(E, V, psi0, math.pi / 4)), [0.5, 0.5], atol=1e-15)


def test_zero_time_is_identity():
    rng = np.random.default_rng(0)
    E, V = eig(ArrayConfig(9, 1.3, 1))
    psi0 = random_state(9, rng)
    np.testing.assert_allclose(propagate_hermitian(E, V, psi0, 0.0), psi0, atol=1e-14)


@pytest.mark.parametrize("k", [1, 2, 5, 10])
def test_alpha_one_revival(k):
    rng = np.random.default_rng(k)
    E, V = eig(ArrayConfig(30, 1, 1))
    psi0 = random_state(30, rng)
    psi = propagate_hermitian(E, V, psi0, k * math.pi)
    assert abs(np.vdot(psi0, psi)) == pytest.approx(1.0, abs=1e-8)


def test_time_grid_matches_scalar_calls():
    E, V = eig(ArrayConfig(6, 0.5, 1))
    psi0 = make_input(InputSpec.single(2), 6)
    times = np.array([0.0, 0.3, 1.7])
    grid = propagate_hermitian(E, V, psi0, times)
    for i, t in enumerate(times):
        np.testing.assert_allclose(grid[:, i], propagate_hermitian(E, V, psi0, t), atol=1e-14)


def test_unitarity_long_times():
    cfg = ArrayConfig(25, 0.7, 1)
    real = sample_realization(DisorderSpec("onsite_gaussian", 0.3), cfg, 0.3 * clean_spectrum(cfg).bandwidth, SeedPolicy(1).stream(0))
    info = spectrum(build_hamiltonian(cfg, real), vectors=True)
    times = np.linspace(0, 1e3 * info.tau, 257)
    I = intensity(propagate_hermitian(info.eigenvalues.real, info.eigenvectors, make_input(InputSpec.single(3), 25), times))
    assert np.max(np.abs(I.sum(axis=0) - 1)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 40), st.floats(-2, 2), st.data())
def test_clean_mirror_symmetry(N, alpha, data):
    m0 = data.draw(st.integers(1, N))
    t = data.draw(st.floats(0, 20))
    E, V = eig(ArrayConfig(N, alpha, 1))
    t = t / max(np.ptp(E), 1e-12)
    I = intensity(propagate_hermitian(E, V, make_input(InputSpec.single(m0), N), t))
    Im = intensity(propagate_hermitian(E, V, make_input(InputSpec.single(N + 1 - m0), N), t))
    np.testing.assert_allclose(Im, I[::-1], atol=1e-10)


def test_hermitian_composition():
    rng = np.random.default_rng(3)
    cfg = ArrayConfig(12, 1, 1)
    E, V = eig(cfg, Realization(rng.normal(size=12), np.zeros(0), np.zeros(0)))
    psi0 = random_state(12, rng)
    a = propagate_hermitian(E, V, psi0, 1.3 + 0.4)
    b = propagate_hermitian(E, V, propagate_hermitian(E, V, psi0, 1.3), 0.4)
    np.testing.assert_allclose(a, b, atol=1e-10)


# --- PT propagation -------------------------------------------------------

def test_pt_reduces_to_hermitian():
    rng = np.random.default_rng(4)
    cfg = ArrayConfig(10, 0.5, 1)
    Hh = build_hamiltonian(cfg, Realization(rng.normal(size=10), np.zeros(0), np.zeros(0)))
    Hpt = HamiltonianMatrix(Hh.diag, Hh.offdiag, hermitian=False)
    E, V = eig(cfg, Realization(Hh.diag.real, np.zeros(0), np.zeros(0)))
    psi0 = random_state(10, rng)
    for t in (0.1, 2.0, 7.5):
        np.testing.assert_allclose(propagate_pt(Hpt, psi0, t), propagate_hermitian(E, V, psi0, t), atol=1e-10)


def test_unbroken_dimer_matches_closed_form():
    gamma, C = 0.6, 1.0
    H = dimer(gamma, C)
    info = spectrum(H)
    w = math.sqrt(C * C - gamma * gamma)
    np.testing.assert_allclose(info.eigenvalues.real, [-w, w], atol=1e-14)
    assert info.max_imag < 1e-14
    # H^2 = w^2 1  =>  exp(-iHt) = cos(wt) 1 - i sin(wt)/w H
    psi0 = np.array([1, 0], complex)
    norms = []
    for t in np.linspace(0, 30, 61):
        exact = (math.cos(w * t) * np.eye(2) - 1j * math.sin(w * t) / w * H.dense()) @ psi0
        psi = propagate_pt(H, psi0, t)
        np.testing.assert_allclose(psi, exact, atol=1e-12)
        norms.append(np.linalg.norm(psi) ** 2)
    # |psi|^2 = cos^2 + (gamma/w) sin(2wt) + (C^2 + gamma^2)/w^2 sin^2
    assert max(norms) <= 1 + gamma / w + (C * C + gamma * gamma) / w**2
    assert np.ptp(norms) > 0.1  # not conserved


def test_broken_dimer_runaway():
    H = dimer(2.0, 1.0)
    with pytest.raises(PTBrokenError, match="PT-broken runaway") as exc:
        propagate_pt(H, np.array([1, 0], complex), 40.0)
    assert exc.value.max_imag == pytest.approx(math.sqrt(3.0), rel=1e-12)


def test_pt_grid_detects_runaway():
    with pytest.raises(PTBrokenError):
        propagate_pt_grid(dimer(2.0), np.array([1, 0], complex), np.linspace(0, 40, 401))


def test_pt_composition_and_grid():
    rng = np.random.default_rng(5)
    cfg = ArrayConfig(8, 1, 1)
    H = build_hamiltonian(cfg, Realization(np.zeros(0), np.zeros(0), rng.uniform(-0.2, 0.2, 4)))
    psi0 = random_state(8, rng)
    np.testing.assert_allclose(
        propagate_pt(H, psi0, 2.1), propagate_pt(H, propagate_pt(H, psi0, 1.5), 0.6), atol=1e-10
    )
    times = np.linspace(0, 6, 31)
    grid = propagate_pt_grid(H, psi0, times)
    for i in (0, 7, 30):
        np.testing.assert_allclose(grid[:, i], propagate_pt(H, psi0, times[i]), atol=1e-10)
    # non-uniform grid takes the per-step path
    uneven = np.array([0.5, 0.7, 2.0, 2.05])
    grid = propagate_pt_grid(H, psi0, uneven)
    np.testing.assert_allclose(grid[:, -1], propagate_pt(H, psi0, 2.05), atol=1e-10)


# --- intensity and oracle ---------------------------------------------------

def test_intensity_examples():
    assert np.array_equal(intensity(np.array([1, 0, 0], complex)), [1, 0, 0])
    np.testing.assert_allclose(intensity(np.array([1, 1j]) / math.sqrt(2)), [0.5, 0.5], rtol=1e-15)


def test_oracle_identity_at_zero():
    assert np.array_equal(oracle_expm_taylor(build_hamiltonian(ArrayConfig(4)), 0.0), np.eye(4))


def test_oracle_vs_spectral_hermitian():
    cfg = ArrayConfig(6, 0.5, 1)
    real = sample_realization(DisorderSpec("onsite_gaussian", 0.5), cfg, 0.5 * clean_spectrum(cfg).bandwidth, SeedPolicy(7).stream(0))
    H = build_hamiltonian(cfg, real)
    info = spectrum(H, vectors=True)
    U = oracle_expm_taylor(H, 0.1)
    V = info.eigenvectors
    spectral = V @ np.diag(np.exp(-0.1j * info.eigenvalues.real)) @ V.T
    assert np.max(np.abs(U - spectral)) < 1e-9
    for j in range(6):
        col = propagate_hermitian(info.eigenvalues.real, V, np.eye(6)[j], 0.1)
        assert np.max(np.abs(U[:, j] - col)) < 1e-9


def test_oracle_vs_expm_pt():
    cfg = ArrayConfig(6, 0, 1)
    real = sample_realization(DisorderSpec("pt_onsite", 0.05), cfg, 0.05 * clean_spectrum(cfg).bandwidth, SeedPolicy(8).stream(0))
    H = build_hamiltonian(cfg, real)
    U = oracle_expm_taylor(H, 0.1)
    for j in range(6):
        assert np.max(np.abs(U[:, j] - propagate_pt(H, np.eye(6)[j], 0.1))) < 1e-9


def test_oracle_non_convergence():
    with pytest.raises(RuntimeError, match="not converged"):
        oracle_expm_taylor(build_hamiltonian(ArrayConfig(10, 2, 1)), 10.0, terms=20)
