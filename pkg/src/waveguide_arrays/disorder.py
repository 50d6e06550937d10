"""Disorder models and reproducible per-realization random streams.

Stream derivation
-----------------
Every realization ``r`` of a run with master seed ``S`` owns four independent
sub-streams (``beta``, ``delta``, ``gamma``, ``phase``), numbered 0..3. The
generator for sub-stream ``k`` is a counter-based Philox generator keyed by::

    key = numpy.random.SeedSequence(S, spawn_key=(r, k)).generate_state(2, numpy.uint64)
    rng = numpy.random.Generator(numpy.random.Philox(key=key))

so a realization depends only on ``(S, r, k)`` and never on the order in
which realizations are executed or on how many workers run them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .lattice import ArrayConfig, SpectrumInfo

__all__ = [
    "DisorderModel",
    "DisorderSpec",
    "Realization",
    "SeedPolicy",
    "RealizationStream",
    "box_muller",
    "resolve_sigma",
    "sample_realization",
]

SQRT3 = np.sqrt(3.0)


class DisorderModel(str, enum.Enum):
    NONE = "none"
    ONSITE_GAUSSIAN = "onsite_gaussian"
    TUNNELING_UNIFORM = "tunneling_uniform"
    PT_ONSITE = "pt_onsite"


@dataclass(frozen=True)
class DisorderSpec:
    """Disorder model and dimensionless strength.

    ``strength`` is ``sigma / Delta0`` with ``Delta0`` the clean bandwidth for
    the on-site and PT models. For tunneling disorder it is the standard
    deviation of the scale factor ``delta`` itself.
    """

    model: DisorderModel = DisorderModel.NONE
    strength: float = 0.0

    def __post_init__(self):
        model = DisorderModel(self.model)
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "strength", float(self.strength))
        if not (self.strength >= 0 and np.isfinite(self.strength)):
            raise ValueError(f"strength must be a nonnegative number, got {self.strength!r}")
        if model is DisorderModel.NONE and self.strength != 0:
            raise ValueError("model 'none' requires strength 0")


@dataclass(frozen=True, eq=False)
class Realization:
    """One disorder draw. Lists not used by the active model are empty."""

    beta: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray

    @classmethod
    def clean(cls) -> "Realization":
        e = np.zeros(0)
        return cls(e, e, e)


class RealizationStream:
    """Factory for the independent sub-streams of one realization."""

    SUBSTREAMS = {"beta": 0, "delta": 1, "gamma": 2, "phase": 3}

    def __init__(self, master_seed: int, index: int):
        self.master_seed = int(master_seed)
        self.index = int(index)

    def rng(self, name: str) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.index, self.SUBSTREAMS[name]))
        key = seq.generate_state(2, np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SeedPolicy:
    master_seed: int = 0

    def __post_init__(self):
        seed = int(self.master_seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"master_seed must fit in an unsigned 64-bit integer, got {seed}")
        object.__setattr__(self, "master_seed", seed)

    def stream(self, index: int) -> RealizationStream:
        return RealizationStream(self.master_seed, index)


def box_muller(u1, u2):
    """Map uniforms ``u1`` in (0, 1] and ``u2`` in [0, 1) to two standard normals.

    Works elementwise on arrays; scalars in give floats out.
    """
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if np.any(u1 <= 0) or np.any(u1 > 1):
        raise ValueError("box_muller: u1 must lie in (0, 1]; log(u1) is singular at 0")
    if np.any(u2 < 0) or np.any(u2 >= 1):
        raise ValueError("box_muller: u2 must lie in [0, 1)")
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z1, z2 = radius * np.cos(angle), radius * np.sin(angle)
    if z1.ndim == 0:
        return float(z1), float(z2)
    return z1, z2


def gaussian_draws(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` standard normals from ``rng`` via Box-Muller pairs."""
    pairs = (n + 1) // 2
    u1 = 1.0 - rng.random(pairs)
    u2 = rng.random(pairs)
    z1, z2 = box_muller(u1, u2)
    out = np.empty(2 * pairs)
    out[0::2] = z1
    out[1::2] = z2
    return out[:n]


def resolve_sigma(spec: DisorderSpec, clean: SpectrumInfo) -> float:
    """Absolute disorder energy ``strength * Delta0`` (hbar = 1)."""
    if spec.strength == 0:
        return 0.0
    if clean.degenerate or clean.bandwidth <= 0:
        raise ValueError("cannot anchor disorder strength: clean bandwidth is zero (N=1)")
    return spec.strength * clean.bandwidth


def sample_realization(
    spec: DisorderSpec, config: ArrayConfig, sigma_abs: float, stream: RealizationStream
) -> Realization:
    """Draw one realization of the disorder described by ``spec``.

    - on-site Gaussian: ``beta_j ~ N(0, sigma_abs**2)`` through Box-Muller;
    - tunneling: ``delta_j ~ U[-sqrt(3) s, sqrt(3) s]`` with ``s = spec.strength``;
    - PT: ``gamma_m ~ U[-sqrt(3) sigma_abs, sqrt(3) sigma_abs]``, ``m = 1..N//2``.
    """
    if sigma_abs < 0:
        raise ValueError(f"sigma_abs must be >= 0, got {sigma_abs}")
    N = config.N
    empty = np.zeros(0)
    model = spec.model
    if model is DisorderModel.NONE:
        return Realization(empty, empty, empty)
    if model is DisorderModel.ONSITE_GAUSSIAN:
        beta = sigma_abs * gaussian_draws(stream.rng("beta"), N)
        return Realization(beta, empty, empty)
    if model is DisorderModel.TUNNELING_UNIFORM:
        half = SQRT3 * spec.strength
        if half >= 1:
            raise ValueError(
                f"sign flip possible: tunneling disorder half-width {half:.4g} >= 1"
            )
        delta = stream.rng("delta").uniform(-half, half, N - 1)
        return Realization(empty, delta, empty)
    if model is DisorderModel.PT_ONSITE:
        half = SQRT3 * sigma_abs
        gamma = stream.rng("gamma").uniform(-half, half, N // 2)
        return Realization(empty, empty, gamma)
    raise ValueError(f"unknown disorder model {model!r}")
