"""Command-line experiment runner.

Usage::

    waveguide-arrays --config run.json --out results/ [--seed S] [--threads N]
    waveguide-arrays --preset fig4 --scale desk --out results/fig4

Each run writes one CSV per selected observable plus ``meta.json``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .config import PRESETS, ConfigError, RunConfig, parse_config, preset_runs
from .ensemble import EnsembleResult, run_ensemble
from .lattice import ArrayConfig, clean_spectrum

__all__ = ["run", "sweep_alpha", "main", "read_csv"]

log = logging.getLogger("waveguide_arrays")

FMT = ".17g"


def _fmt(x) -> str:
    return format(float(x), FMT)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(r if isinstance(r, str) else _fmt(r) for r in row) + "\n")


def read_csv(path) -> tuple:
    """Header list and float array of a CSV written by this module."""
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split(",")
        data = [[float(v) for v in line.rstrip("\n").split(",")] for line in fh if line.strip()]
    return header, np.array(data)


def sweep_alpha(config: RunConfig, alphas: Sequence[float], workers: int = 1) -> List[dict]:
    """Localized fraction for each exponent, strength re-anchored to each clean bandwidth."""
    if config.input.kind != "single":
        raise ValueError("alpha sweep requires a single-waveguide input")
    rows = []
    total_rejected = 0
    for a in alphas:
        array = ArrayConfig(config.array.N, a, config.array.C0)
        res = run_ensemble(array, config.disorder, config.input, config.ensemble, workers=workers)
        total_rejected += res.metadata["rejected_realizations"]
        rows.append({
            "alpha": float(a),
            "bandwidth": clean_spectrum(array).bandwidth,
            "fraction": res.localized_fraction,
            "stderr": res.localized_fraction_stderr,
            "rejected": res.metadata["rejected_realizations"],
        })
    return rows


def _write_result(out: Path, result: EnsembleResult, outputs, written: List[Path]) -> Dict[str, object]:
    N = result.mean_intensity.shape[0]
    summary = {}
    if "intensity_map" in outputs:
        path = out / "intensity_map.csv"
        header = ["t_over_tau"] + [f"I_{j}" for j in range(1, N + 1)]
        rows = ([t] + list(col) for t, col in zip(result.times, result.mean_intensity.T))
        _write_csv(path, header, rows)
        written.append(path)
        summary["intensity_map_max_stderr"] = float(np.nanmax(result.mean_intensity_stderr))
    if "steady_profile" in outputs:
        path = out / "steady_profile.csv"
        rows = zip(range(1, N + 1), result.steady_profile, result.steady_profile_stderr)
        _write_csv(path, ["j", "I", "stderr"], rows)
        written.append(path)
        summary["steady_profile_max_stderr"] = float(np.nanmax(result.steady_profile_stderr))
        if result.localized_fraction is not None:
            summary["localized_fraction"] = result.localized_fraction
            summary["localized_fraction_stderr"] = result.localized_fraction_stderr
    if "gamma_matrix" in outputs or "g_function" in outputs:
        if result.gamma_matrix is None:
            raise RuntimeError(f"correlation observables unavailable: {result.metadata['correlation_error']}")
    if "gamma_matrix" in outputs:
        path = out / "gamma_matrix.csv"
        header = ["j"] + [str(k) for k in range(1, N + 1)]
        rows = ([j] + list(row) for j, row in zip(range(1, N + 1), result.gamma_matrix))
        _write_csv(path, header, rows)
        written.append(path)
    if "g_function" in outputs:
        path = out / "g_function.csv"
        _write_csv(path, ["dr", "g", "stderr"], zip(range(N), result.g_function, result.g_function_stderr))
        written.append(path)
        summary["g_function_max_stderr"] = float(np.nanmax(result.g_function_stderr))
    return summary


def run(config: RunConfig, out_dir=None, workers: int = 1) -> List[Path]:
    """Execute one run and write its CSVs and ``meta.json`` into ``out_dir``.

    On failure every file written by this call is removed and the exception
    propagates.
    """
    out = Path(out_dir if out_dir is not None else (config.out_dir or "."))
    created = not out.exists()
    out.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    start = time.perf_counter()
    try:
        meta: Dict[str, object] = {
            "code_version": __version__,
            "config": config.to_doc(),
            "master_seed": config.ensemble.seed_policy.master_seed,
        }
        if config.preset is not None and config.alphas is not None:
            meta["alpha_grid_note"] = "preset alpha grid (17 points on [-2, 2]) is an implementation choice"
        rejected = 0
        other = [o for o in config.outputs if o != "localized_fraction_sweep"]
        if other:
            result = run_ensemble(config.array, config.disorder, config.input, config.ensemble, workers=workers)
            meta["standard_errors"] = _write_result(out, result, other, written)
            meta["ensemble"] = result.metadata
            rejected += result.metadata["rejected_realizations"]
        if "localized_fraction_sweep" in config.outputs:
            rows = sweep_alpha(config, config.alphas, workers=workers)
            path = out / "localized_fraction.csv"
            _write_csv(
                path,
                ["alpha", "bandwidth", "fraction", "stderr"],
                ([r["alpha"], r["bandwidth"], r["fraction"], r["stderr"]] for r in rows),
            )
            written.append(path)
            rejected += sum(r["rejected"] for r in rows)
            meta["sweep_max_stderr"] = float(np.nanmax([r["stderr"] for r in rows]))
        meta["rejected_realizations"] = rejected
        meta["wall_time_s"] = time.perf_counter() - start
        meta["files"] = sorted(p.name for p in written)
        path = out / "meta.json"
        with open(path, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        if created and not any(out.iterdir()):
            out.rmdir()
        raise
    return written


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="waveguide-arrays",
        description="Disorder-averaged intensity dynamics and correlations in waveguide arrays.",
    )
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON run document")
    src.add_argument("--preset", choices=PRESETS, help="figure preset")
    ap.add_argument("--scale", choices=("paper", "desk"), default="desk", help="preset scale (default: desk)")
    ap.add_argument("--seed", type=int, default=None, help="master seed (unsigned 64-bit)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        if args.config:
            with open(args.config) as fh:
                text = fh.read()
            doc = json.loads(text)
            # a meta.json sidecar carries the run document under "config"
            if isinstance(doc, dict) and "config" in doc and "code_version" in doc:
                doc = doc["config"]
            runs = [("", parse_config(doc, seed=args.seed))]
        else:
            runs = preset_runs(args.preset, args.scale, seed=args.seed)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    base = Path(args.out) if args.out else None
    for label, cfg in runs:
        root = base if base is not None else Path(cfg.out_dir or ".")
        target = root / label if label else root
        log.info("running %s -> %s", label or "run", target)
        try:
            run(cfg, target, workers=args.threads)
        except Exception as exc:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
