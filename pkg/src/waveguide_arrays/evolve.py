"""Time evolution of input states under a single Hamiltonian realization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from .lattice import HamiltonianMatrix

__all__ = [
    "InputSpec",
    "PTBrokenError",
    "DEFAULT_NORM_CAP",
    "make_input",
    "propagate_hermitian",
    "propagate_pt",
    "propagate_pt_grid",
    "intensity",
    "oracle_expm_taylor",
]

DEFAULT_NORM_CAP = 1e12


class PTBrokenError(RuntimeError):
    """Norm growth beyond the cap; the PT-symmetric phase is broken."""

    def __init__(self, message: str, max_imag: float):
        super().__init__(f"{message} (max |Im E| = {max_imag:.6g})")
        self.max_imag = max_imag


@dataclass(frozen=True)
class InputSpec:
    """Initial state: ``|m0>`` or ``(|p> + exp(i theta)|q>)/sqrt(2)``.

    Indices are 1-based. For a pair, ``theta=None`` means the phase is
    averaged over by the ensemble driver.
    """

    kind: str
    m0: Optional[int] = None
    p: Optional[int] = None
    q: Optional[int] = None
    theta: Optional[float] = None

    @classmethod
    def single(cls, m0: int) -> "InputSpec":
        return cls("single", m0=int(m0))

    @classmethod
    def pair(cls, p: int, q: int, theta: Optional[float] = None) -> "InputSpec":
        return cls("pair", p=int(p), q=int(q), theta=None if theta is None else float(theta))

    def __post_init__(self):
        if self.kind == "single":
            if self.m0 is None:
                raise ValueError("single input needs m0")
        elif self.kind == "pair":
            if self.p is None or self.q is None:
                raise ValueError("pair input needs p and q")
            if self.p == self.q:
                raise ValueError(f"pair input needs p != q, got p = q = {self.p}")
        else:
            raise ValueError(f"unknown input kind {self.kind!r}")

    @property
    def phase_averaged(self) -> bool:
        return self.kind == "pair" and self.theta is None

    def validate(self, N: int) -> None:
        idx = [self.m0] if self.kind == "single" else [self.p, self.q]
        for i in idx:
            if not 1 <= i <= N:
                raise ValueError(f"waveguide index {i} out of range 1..{N}")


def make_input(spec: InputSpec, N: int, theta: Optional[float] = None) -> np.ndarray:
    """Amplitude vector of the input state.

    ``theta`` overrides ``spec.theta`` and is required for a phase-averaged pair.
    """
    spec.validate(N)
    psi = np.zeros(N, dtype=complex)
    if spec.kind == "single":
        psi[spec.m0 - 1] = 1.0
        return psi
    phase = spec.theta if theta is None else theta
    if phase is None:
        raise ValueError("phase-averaged pair input needs an explicit theta")
    psi[spec.p - 1] = 1.0 / math.sqrt(2.0)
    psi[spec.q - 1] = np.exp(1j * phase) / math.sqrt(2.0)
    return psi


def propagate_hermitian(E, V, psi0, t):
    """``V exp(-i E t) V^T psi0`` for a real symmetric Hamiltonian.

    ``t`` may be a scalar (returns a state with the shape of ``psi0``) or a
    1-d array of times (a trailing time axis is appended).
    """
    E = np.asarray(E, dtype=float)
    V = np.asarray(V)
    coeffs = V.conj().T @ np.asarray(psi0, dtype=complex)
    t_arr = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(E, t_arr))
    if t_arr.ndim == 0:
        if coeffs.ndim == 1:
            return V @ (phases * coeffs)
        return V @ (phases[:, None] * coeffs)
    if coeffs.ndim == 1:
        return V @ (coeffs[:, None] * phases)
    # (N, P) inputs: result (N, P, T)
    return np.einsum("jn,np,nt->jpt", V, coeffs, phases, optimize=True)


def _check_norm(psi, H: HamiltonianMatrix, norm_cap: float) -> None:
    norm = float(np.max(np.linalg.norm(psi, axis=0)))
    if not np.isfinite(norm) or norm > norm_cap:
        max_imag = float(np.max(np.abs(np.imag(linalg.eigvals(H.dense())))))
        raise PTBrokenError(f"PT-broken runaway: |psi| = {norm:.3g} exceeds cap {norm_cap:.3g}", max_imag)


def propagate_pt(H: HamiltonianMatrix, psi0, t: float, norm_cap: float = DEFAULT_NORM_CAP):
    """``expm(-i H t) psi0`` for a (generally non-Hermitian) Hamiltonian.

    The total intensity is not conserved. Raises ``PTBrokenError`` when the
    evolved norm exceeds ``norm_cap``.
    """
    if t < 0:
        raise ValueError("propagate_pt needs t >= 0")
    U = linalg.expm(-1j * t * H.dense())
    psi = U @ np.asarray(psi0, dtype=complex)
    _check_norm(psi, H, norm_cap)
    return psi


def propagate_pt_grid(H: HamiltonianMatrix, psi0, times, norm_cap: float = DEFAULT_NORM_CAP):
    """States at every time of an increasing grid, shape ``psi0.shape + (T,)``.

    On a uniform grid a single step propagator ``expm(-i H dt)`` is computed
    and applied repeatedly; otherwise one propagator per distinct step.
    """
    times = np.asarray(times, dtype=float)
    psi = np.asarray(psi0, dtype=complex)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1-d array")
    steps = np.diff(times)
    if np.any(steps < 0) or times[0] < 0:
        raise ValueError("times must be nonnegative and increasing")
    Hd = H.dense()
    out = np.empty(psi.shape + (len(times),), dtype=complex)
    cur = psi if times[0] == 0 else linalg.expm(-1j * times[0] * Hd) @ psi
    out[..., 0] = cur
    if len(steps) == 0:
        _check_norm(cur, H, norm_cap)
        return out
    uniform = np.allclose(steps, steps[0], rtol=1e-9, atol=0)
    cache = {}
    if uniform:
        dt = (times[-1] - times[0]) / len(steps)
        cache[None] = linalg.expm(-1j * dt * Hd)
    for k, dt in enumerate(steps, start=1):
        key = None if uniform else float(dt)
        U = cache.get(key)
        if U is None:
            U = cache[key] = linalg.expm(-1j * dt * Hd)
        cur = U @ cur
        out[..., k] = cur
        if k % 16 == 0 or k == len(steps):
            _check_norm(cur, H, norm_cap)
    return out


def intensity(psi) -> np.ndarray:
    """``|psi_j|**2``, elementwise."""
    psi = np.asarray(psi)
    return psi.real**2 + psi.imag**2


def oracle_expm_taylor(H, t: float, terms: int = 60, tol: float = 1e-14) -> np.ndarray:
    """Truncated Taylor series of ``exp(-i H t)``; a test oracle, not a solver.

    Raises ``RuntimeError`` if the last retained term is not below ``tol``
    (in max norm); scale ``t`` down in that case.
    """
    A = -1j * t * (H.dense() if isinstance(H, HamiltonianMatrix) else np.asarray(H, dtype=complex))
    n = A.shape[0]
    total = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, terms + 1):
        term = term @ A / k
        total = total + term
    last = float(np.max(np.abs(term)))
    if last > tol:
        raise RuntimeError(
            f"Taylor oracle not converged: |term_{terms}| = {last:.3g} > {tol:.1g} "
            f"(|A|_1 = {np.linalg.norm(A, 1):.3g}); reduce t or add terms"
        )
    return total
