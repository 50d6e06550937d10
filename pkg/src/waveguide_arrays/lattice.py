"""Clean tunneling profiles, tight-binding Hamiltonians and their spectra.

Units: hbar = 1, energies in units of ``C0`` and times in units of ``1/C0``.
A Hamiltonian is stored in tridiagonal form: a complex diagonal (on-site
potentials plus PT gain/loss) and a real symmetric off-diagonal (tunneling).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

__all__ = [
    "ArrayConfig",
    "TunnelingProfile",
    "HamiltonianMatrix",
    "SpectrumInfo",
    "SpectrumError",
    "build_tunneling",
    "build_hamiltonian",
    "spectrum",
    "clean_spectrum",
    "clean_bandwidth_scaling_check",
]


class SpectrumError(RuntimeError):
    """Eigensolver failure, or a spectral quantity that is undefined."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ArrayConfig:
    """Static description of a waveguide array.

    Attributes
    ----------
    N : int
        Number of waveguides.
    alpha : float
        Tunneling exponent; the rate between ``j`` and ``j+1`` is
        ``C0 * (j*(N-j))**(alpha/2)``.
    C0 : float
        Base tunneling rate.
    """

    N: int
    alpha: float = 0.0
    C0: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if not np.isfinite(self.alpha):
            raise ValueError(f"alpha must be finite, got {self.alpha!r}")
        if not (self.C0 > 0 and np.isfinite(self.C0)):
            raise ValueError(f"C0 must be positive, got {self.C0!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "C0", float(self.C0))


@dataclass(frozen=True, eq=False)
class TunnelingProfile:
    """Clean tunneling rates; ``rates[j-1]`` couples waveguides ``j`` and ``j+1``."""

    rates: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rates", _frozen(np.asarray(self.rates, dtype=float).copy()))

    def __len__(self):
        return len(self.rates)


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Tridiagonal Hamiltonian of one realization.

    ``diag`` holds ``beta_j + i*gain_j`` and ``offdiag`` the (symmetric,
    real) tunneling rates. ``hermitian`` is False iff any diagonal entry has
    a nonzero imaginary part.
    """

    diag: np.ndarray
    offdiag: np.ndarray
    hermitian: bool

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=complex).copy()
        o = np.asarray(self.offdiag, dtype=float).copy()
        if o.shape != (max(len(d) - 1, 0),):
            raise ValueError(f"offdiag must have length {len(d) - 1}, got {o.shape}")
        object.__setattr__(self, "diag", _frozen(d))
        object.__setattr__(self, "offdiag", _frozen(o))

    @property
    def dim(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        """Full ``N x N`` complex matrix."""
        H = np.diag(self.diag)
        if self.dim > 1:
            H += np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return H


@dataclass(frozen=True, eq=False)
class SpectrumInfo:
    """Eigenvalues of a Hamiltonian together with bandwidth and time scale.

    For a single waveguide the bandwidth is zero; ``tau`` is then ``None`` and
    ``degenerate`` is set. For PT spectra ``bandwidth`` uses real parts and
    ``pt_broken`` flags a complex spectrum (the bandwidth is then only
    indicative).
    """

    eigenvalues: np.ndarray
    bandwidth: float
    tau: Optional[float]
    degenerate: bool = False
    pt_broken: bool = False
    eigenvectors: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def max_imag(self) -> float:
        return float(np.max(np.abs(np.imag(self.eigenvalues))))


def build_tunneling(config: ArrayConfig) -> TunnelingProfile:
    """Parity-symmetric clean tunneling rates ``C0 * (j(N-j))**(alpha/2)``.

    Only the first half is evaluated; the second half is its mirror image so
    that ``rates[j] == rates[N-j]`` holds bitwise.
    """
    N = config.N
    if N < 2:
        raise ValueError("no couplings in single-waveguide array")
    j = np.arange(1, N // 2 + 1, dtype=float)
    half = config.C0 * (j * (N - j)) ** (config.alpha / 2.0)
    rates = np.empty(N - 1)
    rates[: len(half)] = half
    rates[N - 1 - len(half):] = half[::-1]
    return TunnelingProfile(rates)


def build_hamiltonian(config: ArrayConfig, realization=None) -> HamiltonianMatrix:
    """Assemble the Hamiltonian of one disorder realization.

    Parameters
    ----------
    config : ArrayConfig
    realization : Realization, optional
        Sampled disorder. ``None`` (or all lists empty) gives the clean array.

    Raises
    ------
    ValueError
        If list lengths do not match ``N`` or a tunneling scale factor
        ``1 + delta_j`` is not positive.
    """
    N = config.N
    rates = build_tunneling(config).rates if N > 1 else np.zeros(0)
    diag = np.zeros(N, dtype=complex)
    offdiag = np.array(rates, dtype=float)
    if realization is None:
        return HamiltonianMatrix(diag, offdiag, True)

    beta = np.asarray(realization.beta, dtype=float)
    delta = np.asarray(realization.delta, dtype=float)
    gamma = np.asarray(realization.gamma, dtype=float)
    for name, arr, n in (("beta", beta, N), ("delta", delta, N - 1), ("gamma", gamma, N // 2)):
        if len(arr) not in (0, n):
            raise ValueError(f"{name} has length {len(arr)}, expected 0 or {n}")

    if len(beta):
        diag.real = beta
    if len(delta):
        scale = 1.0 + delta
        if np.any(scale <= 0):
            j = int(np.argmax(scale <= 0)) + 1
            raise ValueError(f"tunneling sign flip: 1 + delta <= 0 at bond {j}")
        offdiag = offdiag * scale
    if len(gamma):
        m = len(gamma)
        diag.imag[:m] = gamma
        diag.imag[N - m:] = -gamma[::-1]
    hermitian = not np.any(diag.imag != 0)
    return HamiltonianMatrix(diag, offdiag, hermitian)


def _sort_key(ev: np.ndarray) -> np.ndarray:
    return np.lexsort((np.imag(ev), np.real(ev)))


def spectrum(H: HamiltonianMatrix, vectors: bool = False, pt_tol: float = 1e-8) -> SpectrumInfo:
    """Eigenvalues (optionally eigenvectors), bandwidth and ``tau = 1/bandwidth``.

    Hermitian matrices go through the LAPACK symmetric tridiagonal solver;
    PT matrices through a general complex eigensolver. Eigenvalues are
    sorted by real part, ties broken by imaginary part.
    ``pt_tol`` is the threshold on ``max|Im E| / max(1, max|E|)`` above which
    a PT spectrum is flagged as broken.
    """
    N = H.dim
    vecs = None
    try:
        if H.hermitian:
            d = H.diag.real
            if N == 1:
                ev = d.copy()
                vecs = np.ones((1, 1))
            elif vectors:
                ev, vecs = linalg.eigh_tridiagonal(d, H.offdiag)
            else:
                ev = linalg.eigh_tridiagonal(d, H.offdiag, eigvals_only=True)
        else:
            if vectors:
                ev, vecs = linalg.eig(H.dense())
            else:
                ev = linalg.eigvals(H.dense())
    except (linalg.LinAlgError, ValueError) as exc:
        raise SpectrumError(
            f"eigensolver failed for N={N} (hermitian={H.hermitian}, "
            f"max|diag|={np.max(np.abs(H.diag)):.3g}, "
            f"offdiag range=[{np.min(H.offdiag, initial=0):.3g}, {np.max(H.offdiag, initial=0):.3g}]): {exc}"
        ) from exc

    order = _sort_key(ev)
    ev = ev[order]
    if vecs is not None:
        vecs = vecs[:, order]

    re = np.real(ev)
    bandwidth = float(re[-1] - re[0])
    degenerate = bandwidth <= 0
    tau = None if degenerate else 1.0 / bandwidth
    pt_broken = False
    if not H.hermitian:
        scale = max(1.0, float(np.max(np.abs(ev))))
        pt_broken = bool(np.max(np.abs(np.imag(ev))) > pt_tol * scale)
    return SpectrumInfo(
        eigenvalues=_frozen(ev), bandwidth=bandwidth, tau=tau, degenerate=degenerate,
        pt_broken=pt_broken, eigenvectors=vecs,
    )


def clean_spectrum(config: ArrayConfig, vectors: bool = False) -> SpectrumInfo:
    return spectrum(build_hamiltonian(config), vectors=vectors)


def clean_bandwidth_scaling_check(
    config: ArrayConfig, sizes: Sequence[int] = (16, 32, 64, 128, 256)
) -> float:
    """Fitted exponent of the clean bandwidth against ``N`` (log-log slope).

    ``config.N`` is ignored apart from validation; ``alpha`` and ``C0`` are
    taken from it and the bandwidth is evaluated for every size in ``sizes``.
    """
    sizes = [int(n) for n in sizes]
    if min(sizes) < 4:
        raise ValueError("bandwidth scaling needs N >= 4")
    widths = [
        clean_spectrum(ArrayConfig(n, config.alpha, config.C0)).bandwidth for n in sizes
    ]
    slope, _ = np.polyfit(np.log(sizes), np.log(widths), 1)
    return float(slope)
