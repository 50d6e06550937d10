import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from waveguide_arrays import (
    ArrayConfig,
    Realization,
    SpectrumError,
    build_hamiltonian,
    build_tunneling,
    clean_bandwidth_scaling_check,
    clean_spectrum,
    spectrum,
)


def real(beta=(), delta=(), gamma=()):
    return Realization(np.asarray(beta, float), np.asarray(delta, float), np.asarray(gamma, float))


# --- tunneling profile ---------------------------------------------------

def test_uniform_profile():
    assert np.array_equal(build_tunneling(ArrayConfig(5, 0, 1)).rates, [1, 1, 1, 1])


def test_alpha_one_profile():
    np.testing.assert_allclose(build_tunneling(ArrayConfig(4, 1, 1)).rates, [np.sqrt(3), 2, np.sqrt(3)], rtol=1e-15)


def test_alpha_two_center_rate():
    rates = build_tunneling(ArrayConfig(100, 2, 1)).rates
    assert rates[49] == 2500.0  # bond j=50


def test_single_waveguide_has_no_couplings():
    with pytest.raises(ValueError, match="no couplings"):
        build_tunneling(ArrayConfig(1, 0, 1))


@given(st.integers(2, 300), st.floats(-3, 3), st.floats(0.1, 10))
def test_profile_parity_is_bitwise(N, alpha, C0):
    rates = build_tunneling(ArrayConfig(N, alpha, C0)).rates
    assert np.array_equal(rates, rates[::-1])
    assert np.all(rates > 0)


@pytest.mark.parametrize("kw", [dict(N=0), dict(N=3, C0=0.0), dict(N=3, alpha=np.inf), dict(N=2.5)])
def test_invalid_array_config(kw):
    with pytest.raises(ValueError):
        ArrayConfig(**kw)


# --- Hamiltonian ----------------------------------------------------------

def test_clean_hamiltonian():
    H = build_hamiltonian(ArrayConfig(3, 0, 1))
    assert np.array_equal(H.diag, [0, 0, 0])
    assert np.array_equal(H.offdiag, [1, 1])
    assert H.hermitian


def test_pt_diagonal_is_mirrored():
    g1, g2 = 0.3, -0.1
    H = build_hamiltonian(ArrayConfig(4, 0, 1), real(gamma=[g1, g2]))
    np.testing.assert_array_equal(H.diag, [1j * g1, 1j * g2, -1j * g2, -1j * g1])
    assert not H.hermitian


def test_pt_odd_size_leaves_center_lossless():
    H = build_hamiltonian(ArrayConfig(5, 0, 1), real(gamma=[0.2, 0.1]))
    np.testing.assert_array_equal(H.diag.imag, [0.2, 0.1, 0.0, -0.1, -0.2])


def test_tunneling_disorder_scales_bonds():
    H = build_hamiltonian(ArrayConfig(3, 0, 1), real(delta=[0.1, -0.1]))
    np.testing.assert_allclose(H.offdiag, [1.1, 0.9], rtol=1e-15)


def test_tunneling_sign_flip_rejected():
    with pytest.raises(ValueError, match="sign flip"):
        build_hamiltonian(ArrayConfig(3, 0, 1), real(delta=[0.1, -1.0]))


def test_realization_shape_mismatch():
    with pytest.raises(ValueError, match="beta"):
        build_hamiltonian(ArrayConfig(4, 0, 1), real(beta=[0.1, 0.2]))


def test_dense_matches_tridiagonal():
    H = build_hamiltonian(ArrayConfig(5, 1, 1), real(beta=[0.1, -0.2, 0.3, 0.0, 0.5]))
    D = H.dense()
    assert np.array_equal(np.diag(D), H.diag)
    assert np.array_equal(np.diag(D, 1), H.offdiag)
    assert np.array_equal(D, D.T)


# --- spectra --------------------------------------------------------------

def test_three_site_spectrum():
    info = clean_spectrum(ArrayConfig(3, 0, 1))
    # oracle: dense diagonalization
    np.testing.assert_allclose(info.eigenvalues, np.linalg.eigvalsh(build_hamiltonian(ArrayConfig(3)).dense()), atol=1e-14)
    np.testing.assert_allclose(info.eigenvalues, [-np.sqrt(2), 0, np.sqrt(2)], atol=1e-14)
    assert info.bandwidth == pytest.approx(2 * np.sqrt(2), abs=1e-14)
    assert info.tau * info.bandwidth == 1.0


def test_alpha_one_four_sites():
    info = clean_spectrum(ArrayConfig(4, 1, 1))
    np.testing.assert_allclose(info.eigenvalues, [-3, -1, 1, 3], atol=1e-13)


def test_single_site_is_degenerate():
    info = clean_spectrum(ArrayConfig(1, 0, 1))
    assert np.array_equal(info.eigenvalues, [0.0])
    assert info.bandwidth == 0.0
    assert info.degenerate and info.tau is None


@pytest.mark.parametrize("N", [2, 7, 50, 123, 200])
def test_uniform_spectrum_is_cosine_band(N):
    n = np.arange(1, N + 1)
    exact = np.sort(2 * np.cos(n * np.pi / (N + 1)))
    np.testing.assert_allclose(clean_spectrum(ArrayConfig(N, 0, 1)).eigenvalues, exact, rtol=0, atol=1e-10)


@pytest.mark.parametrize("N", [5, 30, 101])
def test_alpha_one_spectrum_is_equidistant(N):
    C0 = 0.7
    ev = clean_spectrum(ArrayConfig(N, 1, C0)).eigenvalues.real
    np.testing.assert_allclose(np.diff(ev), 2 * C0, rtol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 120), st.floats(-2.5, 2.5))
def test_clean_spectrum_is_particle_hole_symmetric(N, alpha):
    ev = clean_spectrum(ArrayConfig(N, alpha, 1)).eigenvalues.real
    np.testing.assert_allclose(ev, -ev[::-1], atol=1e-10 * max(1.0, np.abs(ev).max()))


def test_small_pt_gain_keeps_spectrum_real():
    rng = np.random.default_rng(5)
    g = rng.uniform(-0.01, 0.01, 5)
    info = spectrum(build_hamiltonian(ArrayConfig(10, 1, 1), real(gamma=g)))
    assert info.max_imag < 1e-10
    assert not info.pt_broken


def test_broken_dimer_is_flagged():
    info = spectrum(build_hamiltonian(ArrayConfig(2, 0, 1), real(gamma=[1.5])))
    np.testing.assert_allclose(np.sort(info.eigenvalues.imag), [-np.sqrt(1.25), np.sqrt(1.25)], atol=1e-12)
    assert info.pt_broken


def test_pt_eigenvalues_sorted_by_real_then_imag():
    info = spectrum(build_hamiltonian(ArrayConfig(2, 0, 1), real(gamma=[1.5])))
    # both eigenvalues have zero real part; ties broken by imaginary part
    assert info.eigenvalues[0].imag < info.eigenvalues[1].imag


def test_hermitian_eigenvectors_diagonalize():
    H = build_hamiltonian(ArrayConfig(8, 0.5, 1), real(beta=np.linspace(-1, 1, 8)))
    info = spectrum(H, vectors=True)
    V = info.eigenvectors
    np.testing.assert_allclose(H.dense() @ V, V * info.eigenvalues, atol=1e-12)


def test_eigensolver_failure_is_wrapped():
    H = build_hamiltonian(ArrayConfig(3, 0, 1), real(beta=[np.nan, 0, 0]))
    with pytest.raises(SpectrumError, match="N=3"):
        spectrum(H)


@pytest.mark.parametrize("alpha, expected, tol", [(0, 0.0, 0.05), (1, 1.0, 0.05), (-1, -0.5, 0.05)])
def test_bandwidth_scaling(alpha, expected, tol):
    assert clean_bandwidth_scaling_check(ArrayConfig(16, alpha, 1)) == pytest.approx(expected, abs=tol)
