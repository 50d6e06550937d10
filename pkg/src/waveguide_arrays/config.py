"""Run descriptions: parsing, validation and figure presets.

A run document is a JSON object. The nested form is canonical::

    {
      "array": {"N": 20, "alpha": 0.0, "C0": 1.0},
      "disorder": {"model": "pt_onsite", "strength": 0.02},
      "input": {"kind": "pair", "p": 9, "q": 10, "theta": null},
      "ensemble": {"Nr": 1000, "t_max": 600.0, "n_times": 601,
                   "steady_window": [500.0, 600.0], "phase_samples": 8,
                   "time_mode": "clean", "norm_cap": 1e12, "seed": 0},
      "outputs": ["gamma_matrix", "g_function"],
      "alphas": null,
      "out_dir": null
    }

Shorthands: ``N``/``alpha``/``C0`` at top level instead of ``array``;
``"disorder": "none"``; ``"input": "single(10)"`` or ``"pair(9,10)"`` or
``"pair(13,28,3.14159)"``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .disorder import DisorderModel, DisorderSpec, SeedPolicy
from .ensemble import EnsembleConfig
from .evolve import DEFAULT_NORM_CAP, InputSpec
from .lattice import ArrayConfig

__all__ = [
    "ConfigError",
    "RunConfig",
    "OUTPUTS",
    "PRESETS",
    "parse_config",
    "preset_runs",
    "alpha_grid",
]

OUTPUTS = ("intensity_map", "steady_profile", "localized_fraction_sweep", "gamma_matrix", "g_function")
PRESETS = ("fig1_left", "fig1_right", "fig2", "fig3", "fig4")

_TOP_KEYS = {"array", "N", "alpha", "C0", "disorder", "input", "ensemble", "outputs", "alphas", "out_dir", "preset"}
_ARRAY_KEYS = {"N", "alpha", "C0"}
_DISORDER_KEYS = {"model", "strength"}
_INPUT_KEYS = {"kind", "m0", "p", "q", "theta"}
_ENSEMBLE_KEYS = {
    "Nr", "t_max", "n_times", "time_grid", "steady_window", "phase_samples",
    "time_mode", "norm_cap", "seed", "n_batches", "chunk_size",
}


class ConfigError(ValueError):
    """Invalid run document; the message starts with the offending key path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True, eq=False)
class RunConfig:
    array: ArrayConfig
    disorder: DisorderSpec
    input: InputSpec
    ensemble: EnsembleConfig
    outputs: Tuple[str, ...]
    alphas: Optional[Tuple[float, ...]] = None
    out_dir: Optional[str] = None
    preset: Optional[str] = None

    def to_doc(self) -> Dict[str, Any]:
        """Canonical, fully resolved document; ``parse_config`` inverts it."""
        e = self.ensemble
        grid = e.time_grid
        uniform = len(grid) > 1 and grid[0] == 0 and np.array_equal(grid, np.linspace(0, grid[-1], len(grid)))
        ens = {
            "Nr": e.Nr,
            "steady_window": list(e.steady_window),
            "phase_samples": e.phase_samples,
            "time_mode": e.time_mode,
            "norm_cap": e.norm_cap,
            "seed": e.seed_policy.master_seed,
            "n_batches": e.n_batches,
            "chunk_size": e.chunk_size,
        }
        if uniform:
            ens["t_max"] = float(grid[-1])
            ens["n_times"] = len(grid)
        else:
            ens["time_grid"] = [float(t) for t in grid]
        inp = {"kind": self.input.kind}
        if self.input.kind == "single":
            inp["m0"] = self.input.m0
        else:
            inp.update(p=self.input.p, q=self.input.q, theta=self.input.theta)
        return {
            "array": {"N": self.array.N, "alpha": self.array.alpha, "C0": self.array.C0},
            "disorder": {"model": self.disorder.model.value, "strength": self.disorder.strength},
            "input": inp,
            "ensemble": ens,
            "outputs": list(self.outputs),
            "alphas": None if self.alphas is None else list(self.alphas),
            "out_dir": self.out_dir,
            "preset": self.preset,
        }


def _unknown(section: Dict[str, Any], allowed, path: str) -> None:
    extra = sorted(set(section) - set(allowed))
    if extra:
        prefix = f"{path}." if path else ""
        raise ConfigError(f"{prefix}{extra[0]}", "unknown key")


def _require_mapping(obj, path: str) -> Dict[str, Any]:
    if not isinstance(obj, dict):
        raise ConfigError(path, f"expected an object, got {type(obj).__name__}")
    return obj


def _number(obj, path: str, integer: bool = False):
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ConfigError(path, f"expected a number, got {obj!r}")
    if integer:
        if int(obj) != obj:
            raise ConfigError(path, f"expected an integer, got {obj!r}")
        return int(obj)
    return float(obj)


_INPUT_RE = re.compile(r"^\s*(single|pair)\s*\(([^)]*)\)\s*$")


def _parse_input(obj, path: str) -> InputSpec:
    if isinstance(obj, str):
        m = _INPUT_RE.match(obj)
        if not m:
            raise ConfigError(path, f"cannot parse input {obj!r}; use single(m0) or pair(p, q[, theta])")
        args = [a.strip() for a in m.group(2).split(",") if a.strip()]
        try:
            if m.group(1) == "single":
                if len(args) != 1:
                    raise ValueError("single() takes one index")
                return InputSpec.single(int(args[0]))
            if len(args) not in (2, 3):
                raise ValueError("pair() takes two indices and an optional phase")
            theta = float(args[2]) if len(args) == 3 else None
            return InputSpec.pair(int(args[0]), int(args[1]), theta)
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None
    sec = _require_mapping(obj, path)
    _unknown(sec, _INPUT_KEYS, path)
    kind = sec.get("kind")
    try:
        if kind == "single":
            return InputSpec.single(_number(sec.get("m0"), f"{path}.m0", integer=True))
        if kind == "pair":
            theta = sec.get("theta")
            theta = None if theta is None else _number(theta, f"{path}.theta")
            return InputSpec.pair(
                _number(sec.get("p"), f"{path}.p", integer=True),
                _number(sec.get("q"), f"{path}.q", integer=True),
                theta,
            )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.kind", f"expected 'single' or 'pair', got {kind!r}")


def _parse_disorder(obj, path: str) -> DisorderSpec:
    if isinstance(obj, str):
        obj = {"model": obj, "strength": 0.0}
    sec = _require_mapping(obj, path)
    _unknown(sec, _DISORDER_KEYS, path)
    model = sec.get("model", "none")
    try:
        model = DisorderModel(model)
    except ValueError:
        choices = ", ".join(m.value for m in DisorderModel)
        raise ConfigError(f"{path}.model", f"unknown model {model!r} (choose from {choices})") from None
    strength = _number(sec.get("strength", 0.0), f"{path}.strength")
    try:
        return DisorderSpec(model, strength)
    except ValueError as exc:
        raise ConfigError(f"{path}.strength", str(exc)) from None


def _parse_ensemble(obj, path: str, seed_override: Optional[int]) -> EnsembleConfig:
    sec = _require_mapping(obj if obj is not None else {}, path)
    _unknown(sec, _ENSEMBLE_KEYS, path)
    Nr = _number(sec.get("Nr", 1000), f"{path}.Nr", integer=True)
    if "time_grid" in sec:
        if "t_max" in sec or "n_times" in sec:
            raise ConfigError(f"{path}.time_grid", "give either time_grid or t_max/n_times, not both")
        grid = np.array([_number(t, f"{path}.time_grid[{i}]") for i, t in enumerate(sec["time_grid"])])
    else:
        t_max = _number(sec.get("t_max", 600.0), f"{path}.t_max")
        n_times = _number(sec.get("n_times", 601), f"{path}.n_times", integer=True)
        if n_times < 1:
            raise ConfigError(f"{path}.n_times", "must be >= 1")
        grid = np.linspace(0.0, t_max, n_times)
    window = sec.get("steady_window", [500.0, 600.0])
    if not isinstance(window, (list, tuple)) or len(window) != 2:
        raise ConfigError(f"{path}.steady_window", "expected [T1, T2]")
    window = tuple(_number(w, f"{path}.steady_window[{i}]") for i, w in enumerate(window))
    seed = sec.get("seed", 0) if seed_override is None else seed_override
    seed = _number(seed, f"{path}.seed", integer=True)
    try:
        seed_policy = SeedPolicy(seed)
    except ValueError as exc:
        raise ConfigError(f"{path}.seed", str(exc)) from None
    try:
        return EnsembleConfig(
            Nr=Nr,
            time_grid=grid,
            steady_window=window,
            phase_samples=_number(sec.get("phase_samples", 8), f"{path}.phase_samples", integer=True),
            seed_policy=seed_policy,
            time_mode=sec.get("time_mode", "clean"),
            norm_cap=_number(sec.get("norm_cap", DEFAULT_NORM_CAP), f"{path}.norm_cap"),
            n_batches=_number(sec.get("n_batches", 16), f"{path}.n_batches", integer=True),
            chunk_size=_number(sec.get("chunk_size", 32), f"{path}.chunk_size", integer=True),
        )
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_config(doc, seed: Optional[int] = None) -> RunConfig:
    """Validate a run document (a dict, or JSON text) into a ``RunConfig``.

    ``seed`` overrides ``ensemble.seed``. Every error is a ``ConfigError``
    whose message is prefixed by the path of the offending key.
    """
    if isinstance(doc, str):
        import json

        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigError("<document>", f"invalid JSON: {exc}") from None
    doc = _require_mapping(doc, "<document>")
    _unknown(doc, _TOP_KEYS, "")

    if "array" in doc:
        flat = sorted(_ARRAY_KEYS & set(doc))
        if flat:
            raise ConfigError(flat[0], "give array parameters either at top level or under 'array', not both")
        arr = _require_mapping(doc["array"], "array")
        _unknown(arr, _ARRAY_KEYS, "array")
        prefix = "array."
    else:
        arr = {k: doc[k] for k in _ARRAY_KEYS & set(doc)}
        prefix = ""
    if "N" not in arr:
        raise ConfigError(f"{prefix}N", "missing required field")
    try:
        array = ArrayConfig(
            _number(arr["N"], f"{prefix}N", integer=True),
            _number(arr.get("alpha", 0.0), f"{prefix}alpha"),
            _number(arr.get("C0", 1.0), f"{prefix}C0"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(prefix.rstrip(".") or "<array>", str(exc)) from None

    if "input" not in doc:
        raise ConfigError("input", "missing required field")
    inp = _parse_input(doc["input"], "input")
    try:
        inp.validate(array.N)
    except ValueError as exc:
        raise ConfigError("input", str(exc)) from None
    disorder = _parse_disorder(doc.get("disorder", "none"), "disorder")
    ensemble = _parse_ensemble(doc.get("ensemble"), "ensemble", seed)

    outputs = doc.get("outputs")
    if outputs is None:
        outputs = ["intensity_map", "steady_profile"]
    if not isinstance(outputs, list) or not outputs:
        raise ConfigError("outputs", "select at least one observable")
    for i, o in enumerate(outputs):
        if o not in OUTPUTS:
            raise ConfigError(f"outputs[{i}]", f"unknown observable {o!r} (choose from {', '.join(OUTPUTS)})")
    if len(set(outputs)) != len(outputs):
        raise ConfigError("outputs", "duplicate observable")

    alphas = doc.get("alphas")
    if "localized_fraction_sweep" in outputs:
        if inp.kind != "single":
            raise ConfigError("outputs", "localized_fraction_sweep (alpha sweep) requires a single-waveguide input")
        if alphas is None:
            alphas = alpha_grid()
        if not isinstance(alphas, (list, tuple)) or not alphas:
            raise ConfigError("alphas", "expected a non-empty list of exponents")
        alphas = tuple(_number(a, f"alphas[{i}]") for i, a in enumerate(alphas))
    elif alphas is not None:
        raise ConfigError("alphas", "only valid together with the localized_fraction_sweep output")

    out_dir = doc.get("out_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("out_dir", "expected a path string")
    preset = doc.get("preset")
    if preset is not None and preset not in PRESETS:
        raise ConfigError("preset", f"unknown preset {preset!r}")
    return RunConfig(array, disorder, inp, ensemble, tuple(outputs), alphas, out_dir, preset)


def alpha_grid() -> List[float]:
    """17 exponents evenly spaced on [-2, 2]."""
    return [float(a) for a in np.linspace(-2.0, 2.0, 17)]


_FULL_SCALE = {
    "fig1_left": dict(N=100, alpha=0.0, disorder=("onsite_gaussian", 3.0), input="single(50)", Nr=10**6,
                      outputs=["localized_fraction_sweep"]),
    "fig1_right": dict(N=37, alpha=0.0, disorder=("onsite_gaussian", 1.0), input="single(5)", Nr=10**5,
                       outputs=["localized_fraction_sweep"]),
    "fig2": dict(N=100, alpha=0.0, disorder=("onsite_gaussian", 0.05), input="single(15)", Nr=10**6,
                 outputs=["intensity_map", "steady_profile"]),
    "fig3": dict(N=60, alpha=1.0, disorder=("onsite_gaussian", 0.05), input=(20, 40), Nr=10**5,
                 outputs=["intensity_map", "steady_profile"]),
    "fig4": dict(N=20, alpha=0.0, disorder=("pt_onsite", 0.02), input="pair(9,10)", Nr=10**4,
                 outputs=["gamma_matrix", "g_function", "steady_profile"]),
}

_DESK = {
    "fig1_left": dict(N=50, input="single(25)", Nr=10**3),
    "fig1_right": dict(N=37, input="single(5)", Nr=10**3),
    "fig2": dict(Nr=10**4),
    "fig3": dict(N=40, input=(13, 28), Nr=5 * 10**3),
    "fig4": dict(Nr=10**3),
}

_FIG3_THETAS = (("theta_0", 0.0), ("theta_pi2", math.pi / 2), ("theta_pi", math.pi))
_FIG4_MODELS = (("pt_onsite", "pt_onsite"), ("tunneling_uniform", "tunneling_uniform"))


def preset_runs(name: str, scale: str = "desk", seed: Optional[int] = None) -> List[Tuple[str, RunConfig]]:
    """Expand a figure preset into ``(subdirectory, RunConfig)`` pairs.

    Single-run presets use the subdirectory ``""``. ``fig3`` runs one
    ensemble per phase (0, pi/2, pi); ``fig4`` one per disorder model.
    """
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r} (choose from {', '.join(PRESETS)})")
    if scale not in ("paper", "desk"):
        raise ConfigError("scale", f"expected 'paper' or 'desk', got {scale!r}")
    p = dict(_FULL_SCALE[name])
    if scale == "desk":
        p.update(_DESK[name])
    model, strength = p["disorder"]

    def doc(input_, model_=model):
        d = {
            "array": {"N": p["N"], "alpha": p["alpha"], "C0": 1.0},
            "disorder": {"model": model_, "strength": strength},
            "input": input_,
            "ensemble": {"Nr": p["Nr"]},
            "outputs": list(p["outputs"]),
            "preset": name,
        }
        if "localized_fraction_sweep" in p["outputs"]:
            d["alphas"] = alpha_grid()
        return d

    if name == "fig3":
        pq = p["input"]
        return [
            (label, parse_config(doc({"kind": "pair", "p": pq[0], "q": pq[1], "theta": th}), seed))
            for label, th in _FIG3_THETAS
        ]
    if name == "fig4":
        return [(label, parse_config(doc(p["input"], m), seed)) for label, m in _FIG4_MODELS]
    return [("", parse_config(doc(p["input"]), seed))]


def with_overrides(cfg: RunConfig, out_dir: Optional[str] = None) -> RunConfig:
    return cfg if out_dir is None else replace(cfg, out_dir=out_dir)
