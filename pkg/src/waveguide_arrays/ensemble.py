"""Disorder-ensemble Monte Carlo driver and correlation observables.

Realizations are split into 16 contiguous batches (fewer if ``Nr < 16``);
each batch is cut into fixed-size chunks that are the unit of parallel work.
Chunk partial sums are merged with Neumaier-compensated summation in chunk
order, so the result does not depend on the number of workers. Standard
errors are batch-means estimates over the batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from threadpoolctl import threadpool_limits

from .disorder import DisorderModel, DisorderSpec, SeedPolicy, resolve_sigma, sample_realization
from .evolve import (
    DEFAULT_NORM_CAP,
    InputSpec,
    PTBrokenError,
    intensity,
    make_input,
    propagate_hermitian,
    propagate_pt_grid,
)
from .lattice import ArrayConfig, build_hamiltonian, clean_spectrum, spectrum

__all__ = [
    "EnsembleConfig",
    "EnsembleResult",
    "EnsembleError",
    "SteadyStateReport",
    "run_ensemble",
    "localized_fraction",
    "correlation_matrix",
    "correlation_function",
    "detect_steady_state",
    "default_time_grid",
]

MAX_REJECTED_FRACTION = 0.01


class EnsembleError(RuntimeError):
    pass


def default_time_grid() -> np.ndarray:
    return np.linspace(0.0, 600.0, 601)


@dataclass(frozen=True, eq=False)
class EnsembleConfig:
    """Monte Carlo settings.

    Attributes
    ----------
    Nr : int
        Number of disorder realizations.
    time_grid : array
        Sample times in units of the clean ``tau`` (or of each realization's
        own ``tau`` when ``time_mode == "realization"``).
    steady_window : (float, float)
        Closed interval of ``time_grid`` over which steady-state observables
        are time-averaged.
    phase_samples : int
        Stratified phase samples per realization for phase-averaged pair inputs.
    seed_policy : SeedPolicy
    time_mode : {"clean", "realization"}
    norm_cap : float
        Norm beyond which a PT trajectory counts as a broken-phase runaway.
    n_batches : int
        Batches for batch-means standard errors.
    chunk_size : int
        Realizations per work item.
    """

    Nr: int = 1000
    time_grid: np.ndarray = field(default_factory=default_time_grid)
    steady_window: Tuple[float, float] = (500.0, 600.0)
    phase_samples: int = 8
    seed_policy: SeedPolicy = field(default_factory=SeedPolicy)
    time_mode: str = "clean"
    norm_cap: float = DEFAULT_NORM_CAP
    n_batches: int = 16
    chunk_size: int = 32

    def __post_init__(self):
        grid = np.asarray(self.time_grid, dtype=float).copy()
        grid.setflags(write=False)
        object.__setattr__(self, "time_grid", grid)
        object.__setattr__(self, "steady_window", tuple(float(x) for x in self.steady_window))
        if int(self.Nr) != self.Nr or self.Nr < 1:
            raise ValueError(f"Nr must be a positive integer, got {self.Nr!r}")
        if grid.ndim != 1 or len(grid) == 0:
            raise ValueError("time_grid must be a non-empty 1-d sequence")
        if np.any(np.diff(grid) <= 0) or grid[0] < 0:
            raise ValueError("time_grid must be nonnegative and strictly increasing")
        t1, t2 = self.steady_window
        if not t1 <= t2 or t2 > grid[-1]:
            raise ValueError(
                f"steady_window {self.steady_window} must satisfy T1 <= T2 <= max(time_grid) = {grid[-1]}"
            )
        if not np.any(self.window_mask):
            raise ValueError(f"steady_window {self.steady_window} contains no grid point")
        if self.phase_samples < 1:
            raise ValueError("phase_samples must be >= 1")
        if self.time_mode not in ("clean", "realization"):
            raise ValueError(f"time_mode must be 'clean' or 'realization', got {self.time_mode!r}")
        if self.n_batches < 1 or self.chunk_size < 1:
            raise ValueError("n_batches and chunk_size must be >= 1")

    @property
    def window_mask(self) -> np.ndarray:
        t1, t2 = self.steady_window
        return (self.time_grid >= t1) & (self.time_grid <= t2)


@dataclass(frozen=True)
class SteadyStateReport:
    saturated: bool
    time: Optional[float]
    relative_std: float


@dataclass(eq=False)
class EnsembleResult:
    """Disorder-averaged observables of one run.

    ``gamma_matrix`` and ``g_function`` are ``None`` when some waveguide has
    vanishing mean steady intensity; the reason is in ``metadata``.
    ``batch_steady_profiles`` (batches x N) lets callers form batch-means
    errors for derived quantities such as regional averages.
    """

    times: np.ndarray
    mean_intensity: np.ndarray
    mean_intensity_stderr: np.ndarray
    steady_profile: np.ndarray
    steady_profile_stderr: np.ndarray
    localized_fraction: Optional[float]
    localized_fraction_stderr: Optional[float]
    gamma_matrix: Optional[np.ndarray]
    g_function: Optional[np.ndarray]
    g_function_stderr: Optional[np.ndarray]
    input: InputSpec
    metadata: dict
    batch_steady_profiles: Optional[np.ndarray] = None


class _Neumaier:
    """Elementwise compensated running sum."""

    def __init__(self, shape):
        self.s = np.zeros(shape)
        self.c = np.zeros(shape)

    def add(self, x):
        t = self.s + x
        big = np.abs(self.s) >= np.abs(x)
        self.c += np.where(big, (self.s - t) + x, (x - t) + self.s)
        self.s = t

    @property
    def value(self):
        return self.s + self.c


@dataclass
class _Chunk:
    batch: int
    start: int
    stop: int


@dataclass
class _ChunkSums:
    batch: int
    samples: int
    rejected: int
    max_imag: float
    sum_I: np.ndarray
    sum_II: np.ndarray
    sum_Iw: np.ndarray


def _phases(cfg: EnsembleConfig, stream) -> np.ndarray:
    P = cfg.phase_samples
    u = stream.rng("phase").random(P)
    return 2.0 * np.pi * (np.arange(P) + u) / P


class _Runner:
    def __init__(self, array, disorder, inp, cfg):
        self.array = array
        self.disorder = disorder
        self.input = inp
        self.cfg = cfg
        N = array.N
        if N < 2:
            raise ValueError("ensemble runs need N >= 2 (no time scale for a single waveguide)")
        inp.validate(N)
        self.clean = clean_spectrum(array)
        self.sigma = resolve_sigma(disorder, self.clean)
        self.tau0 = self.clean.tau
        self.mask = cfg.window_mask
        self.pt = disorder.model is DisorderModel.PT_ONSITE and disorder.strength > 0
        if not inp.phase_averaged:
            self.fixed_inputs = make_input(inp, N)[:, None]

    def inputs(self, stream) -> np.ndarray:
        if not self.input.phase_averaged:
            return self.fixed_inputs
        thetas = _phases(self.cfg, stream)
        return np.stack([make_input(self.input, self.array.N, th) for th in thetas], axis=1)

    def trajectory(self, r: int) -> np.ndarray:
        """Intensities of realization ``r``, shape (P, N, T)."""
        stream = self.cfg.seed_policy.stream(r)
        real = sample_realization(self.disorder, self.array, self.sigma, stream)
        H = build_hamiltonian(self.array, real)
        psi0 = self.inputs(stream)
        grid = self.cfg.time_grid
        if H.hermitian:
            spec = spectrum(H, vectors=True)
            scale = self.tau0 if self.cfg.time_mode == "clean" else spec.tau
            times = grid * scale
            E, V = spec.eigenvalues.real, spec.eigenvectors
            coeffs = V.T @ psi0
            ph = np.exp(-1j * np.outer(E, times))
            amps = np.stack([V @ (coeffs[:, p, None] * ph) for p in range(psi0.shape[1])])
            return intensity(amps)
        if self.cfg.time_mode == "clean":
            scale = self.tau0
        else:
            scale = spectrum(H).tau
        amps = propagate_pt_grid(H, psi0, grid * scale, norm_cap=self.cfg.norm_cap)
        return intensity(np.moveaxis(amps, 1, 0))

    def run_chunk(self, chunk: _Chunk) -> _ChunkSums:
        N, T = self.array.N, len(self.cfg.time_grid)
        Tw = int(self.mask.sum())
        sum_I = np.zeros((N, T))
        sum_II = np.zeros((N, N))
        sum_Iw = np.zeros((N, Tw))
        samples = rejected = 0
        max_imag = 0.0
        for r in range(chunk.start, chunk.stop):
            try:
                I = self.trajectory(r)
            except PTBrokenError as exc:
                rejected += 1
                max_imag = max(max_imag, exc.max_imag)
                continue
            Iw = I[:, :, self.mask]
            if self.pt:
                Iw = Iw / Iw.sum(axis=1, keepdims=True)
            for p in range(I.shape[0]):
                sum_I += I[p]
                sum_Iw += Iw[p]
                sum_II += Iw[p] @ Iw[p].T / Tw
                samples += 1
        return _ChunkSums(chunk.batch, samples, rejected, max_imag, sum_I, sum_II, sum_Iw)


def _chunks(Nr: int, n_batches: int, chunk_size: int):
    B = min(n_batches, Nr)
    bounds = [b * Nr // B for b in range(B + 1)]
    out = []
    for b in range(B):
        for s in range(bounds[b], bounds[b + 1], chunk_size):
            out.append(_Chunk(b, s, min(s + chunk_size, bounds[b + 1])))
    return B, out


def _batch_stderr(values: np.ndarray) -> np.ndarray:
    B = values.shape[0]
    if B < 2:
        return np.full(values.shape[1:], np.nan)
    return values.std(axis=0, ddof=1) / math.sqrt(B)


def run_ensemble(
    array: ArrayConfig,
    disorder: DisorderSpec,
    input: InputSpec,
    cfg: EnsembleConfig,
    workers: int = 1,
) -> EnsembleResult:
    """Average intensities and correlations over ``cfg.Nr`` disorder realizations.

    PT realizations whose norm runs away are excluded and counted; the run
    fails if more than 1% of the realizations are excluded.
    """
    runner = _Runner(array, disorder, input, cfg)
    N, T = array.N, len(cfg.time_grid)
    Tw = int(runner.mask.sum())
    B, chunks = _chunks(cfg.Nr, cfg.n_batches, cfg.chunk_size)

    acc_I = [_Neumaier((N, T)) for _ in range(B)]
    acc_II = [_Neumaier((N, N)) for _ in range(B)]
    acc_Iw = [_Neumaier((N, Tw)) for _ in range(B)]
    counts = np.zeros(B, dtype=np.int64)
    rejected = 0
    max_imag = 0.0

    with threadpool_limits(limits=1):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(runner.run_chunk, chunks))
        else:
            parts = [runner.run_chunk(c) for c in chunks]

    for part in parts:
        b = part.batch
        acc_I[b].add(part.sum_I)
        acc_II[b].add(part.sum_II)
        acc_Iw[b].add(part.sum_Iw)
        counts[b] += part.samples
        rejected += part.rejected
        max_imag = max(max_imag, part.max_imag)

    if rejected > MAX_REJECTED_FRACTION * cfg.Nr:
        raise EnsembleError(
            f"{rejected} of {cfg.Nr} realizations rejected as PT-broken runaways "
            f"(limit {MAX_REJECTED_FRACTION:.0%}); largest |Im E| seen = {max_imag:.4g}"
        )
    if np.any(counts == 0):
        raise EnsembleError("a batch has no accepted realizations")

    bI = np.stack([a.value for a in acc_I])
    bII = np.stack([a.value for a in acc_II])
    bIw = np.stack([a.value for a in acc_Iw])
    total = counts.sum()
    mean_I = _Neumaier((N, T))
    mean_II = _Neumaier((N, N))
    mean_Iw = _Neumaier((N, Tw))
    for b in range(B):
        mean_I.add(bI[b])
        mean_II.add(bII[b])
        mean_Iw.add(bIw[b])
    mean_I = mean_I.value / total
    mean_II = mean_II.value / total
    mean_Iw = mean_Iw.value / total
    batch_I = bI / counts[:, None, None]

    steady = mean_I[:, runner.mask].mean(axis=1)
    batch_steady = batch_I[:, :, runner.mask].mean(axis=2)

    frac = frac_se = None
    if input.kind == "single":
        m = input.m0 - 1
        frac = float(steady[m] / steady.sum())
        frac_se = float(_batch_stderr((batch_steady[:, m] / batch_steady.sum(axis=1))[:, None])[0])

    metadata = {
        "N": N,
        "alpha": array.alpha,
        "C0": array.C0,
        "disorder_model": disorder.model.value,
        "strength": disorder.strength,
        "sigma_abs": runner.sigma,
        "clean_bandwidth": runner.clean.bandwidth,
        "clean_tau": runner.tau0,
        "Nr": cfg.Nr,
        "samples": int(total),
        "rejected_realizations": int(rejected),
        "n_batches": B,
        "phase_samples": cfg.phase_samples if input.phase_averaged else 1,
        "time_mode": cfg.time_mode,
        "steady_window": list(cfg.steady_window),
        "steady_points": Tw,
        "master_seed": cfg.seed_policy.master_seed,
        "pt_intensity_renormalized": runner.pt,
    }

    gamma = g = g_se = None
    try:
        gamma = correlation_matrix(mean_II, mean_Iw)
        g = correlation_function(gamma)
    except ValueError as exc:
        metadata["correlation_error"] = str(exc)
    if gamma is not None:
        g_b = []
        for b in range(B):
            try:
                g_b.append(correlation_function(correlation_matrix(bII[b] / counts[b], bIw[b] / counts[b])))
            except ValueError:
                g_b = None
                break
        g_se = _batch_stderr(np.array(g_b)) if g_b else np.full(N, np.nan)

    if input.kind == "single":
        report = detect_steady_state(mean_I, input.m0, times=cfg.time_grid)
        metadata["steady_state"] = {
            "saturated": report.saturated,
            "time": report.time,
            "relative_std": report.relative_std,
        }

    return EnsembleResult(
        times=cfg.time_grid,
        mean_intensity=mean_I,
        mean_intensity_stderr=_batch_stderr(batch_I),
        steady_profile=steady,
        steady_profile_stderr=_batch_stderr(batch_steady),
        localized_fraction=frac,
        localized_fraction_stderr=frac_se,
        gamma_matrix=gamma,
        g_function=g,
        g_function_stderr=g_se,
        input=input,
        metadata=metadata,
        batch_steady_profiles=batch_steady,
    )


def localized_fraction(result: EnsembleResult, m0: Optional[int] = None) -> float:
    """Share of the steady intensity sitting in the input waveguide.

    Normalized by the total steady intensity, which only matters for PT runs.
    """
    if result.input.kind != "single":
        raise ValueError("localized fraction is only defined for a single-waveguide input")
    m0 = result.input.m0 if m0 is None else m0
    prof = result.steady_profile
    return float(prof[m0 - 1] / prof.sum())


def correlation_matrix(second_moment, mean_intensity, eps: float = 0.0) -> np.ndarray:
    """Normalized intensity correlations ``<I_j I_k> / (<I_j><I_k>)``.

    Parameters
    ----------
    second_moment : (N, N) array
        Averaged ``<I_j I_k>`` (already time-averaged over the steady window).
    mean_intensity : (N,) or (N, Tw) array
        Averaged ``<I_j>``; with a time axis the denominator is the time
        average of ``<I_j(t)><I_k(t)>`` over the same window.

    Only the upper triangle is evaluated; the lower one is its mirror image.
    """
    M = np.asarray(second_moment, dtype=float)
    mean = np.asarray(mean_intensity, dtype=float)
    if mean.ndim == 1:
        mean = mean[:, None]
    avg = mean.mean(axis=1)
    bad = np.flatnonzero(avg <= eps)
    if len(bad):
        raise ValueError(f"vanishing mean intensity at waveguide {int(bad[0]) + 1}")
    denom = mean @ mean.T / mean.shape[1]
    iu = np.triu_indices(len(avg))
    gamma = np.zeros_like(M)
    gamma[iu] = M[iu] / denom[iu]
    return np.triu(gamma) + np.triu(gamma, 1).T


def correlation_function(gamma) -> np.ndarray:
    """``g(dr)`` for ``dr = 0..N-1``: mean of ``Gamma[j, j+dr]`` over the ``N-dr`` valid pairs."""
    gamma = np.asarray(gamma, dtype=float)
    N = gamma.shape[0]
    return np.array([np.diagonal(gamma, dr).mean() for dr in range(N)])


def detect_steady_state(
    mean_intensity,
    m0: int,
    tol: float = 0.05,
    times: Optional[Sequence[float]] = None,
    width: float = 50.0,
) -> SteadyStateReport:
    """Earliest grid time after which ``<I(m0, t)>`` stays flat.

    A window ``[T, T + width]`` is flat when the standard deviation of the
    intensity inside it is below ``tol`` times its mean. The returned time is
    the earliest ``T`` from which every later full window is flat.
    """
    series = np.asarray(mean_intensity, dtype=float)[m0 - 1]
    times = np.arange(len(series), dtype=float) if times is None else np.asarray(times, dtype=float)
    starts = np.flatnonzero(times + width <= times[-1] + 1e-12)
    if len(starts) == 0:
        seg = series
        rel = float(seg.std() / seg.mean()) if seg.mean() > 0 else math.inf
        return SteadyStateReport(False, None, rel)
    rel = np.empty(len(starts))
    for n, i in enumerate(starts):
        seg = series[(times >= times[i]) & (times <= times[i] + width + 1e-12)]
        mu = seg.mean()
        rel[n] = seg.std() / mu if mu > 0 else math.inf
    flat = rel < tol
    # earliest start from which all later windows are flat
    tail = np.logical_and.accumulate(flat[::-1])[::-1]
    if not tail[-1]:
        return SteadyStateReport(False, None, float(rel[-1]))
    first = int(np.argmax(tail))
    return SteadyStateReport(True, float(times[starts[first]]), float(rel[first]))
