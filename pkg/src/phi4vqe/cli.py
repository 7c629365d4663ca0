"""Config-driven command line front end.

Four subcommands regenerate the study's data sets from JSON configs:
``spectrum`` (gap and eigenvalue grids over the coupling), ``counterterm``
(first-order curves, exact roots, gap-vs-shift sweeps), ``critical``
(critical curves and power-law fits), and ``vqe`` (sector benchmarks on the
exact, sampled, or noisy backends). Outputs are CSV curves plus one JSON
record per run; every float is serialized via repr so reruns with the same
config and seed are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .circuit_sim import NoiseModel
from .fock_space import (
    build_H,
    critical_curve,
    critical_exponent_fit,
    exact_spectrum,
    mass_gap,
    solve_counterterm,
)
from .lattice_model import (
    ModelParams,
    counterterm_continuum,
    counterterm_first_order,
)
from .qubit_encoding import parity_blocks, sector_by_parity
from .vqe import BackendSpec, mass_gap_vqe, mitigation_comparison, sector_minima

SCHEMA = "phi4vqe/1"
ENERGY_UNIT = "lattice units"

__all__ = ["main", "entry"]


# ---------------------------------------------------------------- plumbing

def _cell(value):
    """CSV cell: floats via repr for lossless round trips, None as empty."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return None if math.isnan(v) else v
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_json_safe(v) for v in value.tolist()]
    return value


def _write_record(path: Path, record: dict) -> None:
    with open(path, "w") as handle:
        json.dump(_json_safe(record), handle, sort_keys=True, indent=2)
        handle.write("\n")


def _map_indexed(fn, items, threads: int) -> list:
    """Apply fn(index, item) over items, optionally on a worker pool.

    Results keep item order, and every worker derives randomness only from
    its index, so the thread count never changes the output.
    """
    if threads <= 1:
        return [fn(i, item) for i, item in enumerate(items)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(len(items)), items))


# ---------------------------------------------------------------- validation

def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _check_lambda_grid(grid, path: str, errors: list[str]) -> None:
    if not isinstance(grid, list) or not grid:
        errors.append(f"{path}: must be a nonempty list")
        return
    for i, lam in enumerate(grid):
        if not _is_num(lam) or lam < 0:
            errors.append(f"{path}[{i}]: coupling must be a number >= 0")


def _check_model(model, path: str, errors: list[str], require_n_max: bool = False) -> None:
    if not isinstance(model, dict):
        errors.append(f"{path}: must be an object")
        return
    L = model.get("L")
    if not isinstance(L, int) or isinstance(L, bool) or L < 1:
        errors.append(f"{path}.L: must be an integer >= 1")
    m_sq = model.get("m_sq")
    if not _is_num(m_sq) or m_sq <= 0:
        errors.append(f"{path}.m_sq: must be a number > 0")
    has_bare = "m0_sq" in model
    has_delta = "delta_m" in model
    if has_bare == has_delta:
        errors.append(f"{path}: provide exactly one of m0_sq, delta_m")
    if has_bare and not _is_num(model["m0_sq"]):
        errors.append(f"{path}.m0_sq: must be a number")
    if has_delta and not _is_num(model["delta_m"]):
        errors.append(f"{path}.delta_m: must be a number")
    n_max = model.get("n_max")
    if require_n_max and n_max is None:
        errors.append(f"{path}.n_max: required")
    if n_max is not None and (not isinstance(n_max, int) or isinstance(n_max, bool) or n_max < 2):
        errors.append(f"{path}.n_max: must be an integer >= 2")


def _model_params(model: dict, lam: float, n_max: int) -> ModelParams:
    if "m0_sq" in model:
        return ModelParams.from_bare(L=model["L"], m_sq=model["m_sq"],
                                     m0_sq=model["m0_sq"], lam=lam, n_max=n_max)
    return ModelParams.from_counterterm(L=model["L"], m_sq=model["m_sq"],
                                        delta_m=model["delta_m"], lam=lam, n_max=n_max)


def _validate_spectrum(cfg: dict) -> list[str]:
    errors: list[str] = []
    _check_model(cfg.get("model"), "model", errors)
    _check_lambda_grid(cfg.get("lambda_grid"), "lambda_grid", errors)
    values = cfg.get("n_max_values")
    if not isinstance(values, list) or not values:
        errors.append("n_max_values: must be a nonempty list")
    else:
        for i, n in enumerate(values):
            if not isinstance(n, int) or isinstance(n, bool) or n < 2:
                errors.append(f"n_max_values[{i}]: must be an integer >= 2")
    count = cfg.get("eigenvalue_count", 8)
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        errors.append("eigenvalue_count: must be an integer >= 1")
    return errors


def _validate_counterterm(cfg: dict) -> list[str]:
    errors: list[str] = []
    first = cfg.get("firstorder")
    roots = cfg.get("roots")
    if first is None and roots is None:
        errors.append("config: needs at least one of firstorder, roots")
    if first is not None:
        if not isinstance(first, dict):
            errors.append("firstorder: must be an object")
        else:
            msqs = first.get("m_sq_values")
            if not isinstance(msqs, list) or not msqs:
                errors.append("firstorder.m_sq_values: must be a nonempty list")
            else:
                for i, m in enumerate(msqs):
                    if not _is_num(m) or m <= 0:
                        errors.append(f"firstorder.m_sq_values[{i}]: must be a number > 0")
            Ls = first.get("L_values")
            if not isinstance(Ls, list) or not Ls:
                errors.append("firstorder.L_values: must be a nonempty list")
            else:
                for i, L in enumerate(Ls):
                    if L == "inf":
                        if isinstance(msqs, list) and any(_is_num(m) and m > 64 for m in msqs):
                            errors.append(f"firstorder.L_values[{i}]: continuum formula needs m_sq <= 64")
                    elif not isinstance(L, int) or isinstance(L, bool) or L < 1:
                        errors.append(f"firstorder.L_values[{i}]: must be an integer >= 1 or \"inf\"")
            _check_lambda_grid(first.get("lambda_grid"), "firstorder.lambda_grid", errors)
    if roots is not None:
        if not isinstance(roots, dict):
            errors.append("roots: must be an object")
        else:
            L = roots.get("L")
            if not isinstance(L, int) or isinstance(L, bool) or L < 1:
                errors.append("roots.L: must be an integer >= 1")
            if not _is_num(roots.get("m_sq")) or roots.get("m_sq", 0) <= 0:
                errors.append("roots.m_sq: must be a number > 0")
            n_max = roots.get("n_max")
            if not isinstance(n_max, int) or isinstance(n_max, bool) or n_max < 2:
                errors.append("roots.n_max: must be an integer >= 2")
            if not _is_num(roots.get("target_m_sq")) or roots.get("target_m_sq", 0) <= 0:
                errors.append("roots.target_m_sq: must be a number > 0")
            _check_lambda_grid(roots.get("lambda_values"), "roots.lambda_values", errors)
            pts = roots.get("sweep_points", 21)
            if not isinstance(pts, int) or isinstance(pts, bool) or pts < 2:
                errors.append("roots.sweep_points: must be an integer >= 2")
            hw = roots.get("sweep_halfwidth", 2.5)
            if not _is_num(hw) or hw <= 0:
                errors.append("roots.sweep_halfwidth: must be a number > 0")
    return errors


def _validate_critical(cfg: dict) -> list[str]:
    errors: list[str] = []
    model = cfg.get("model")
    if not isinstance(model, dict):
        errors.append("model: must be an object")
    else:
        L = model.get("L")
        if not isinstance(L, int) or isinstance(L, bool) or L < 1:
            errors.append("model.L: must be an integer >= 1")
        if not _is_num(model.get("m_sq")) or model.get("m_sq", 0) <= 0:
            errors.append("model.m_sq: must be a number > 0")
        n_max = model.get("n_max")
        if not isinstance(n_max, int) or isinstance(n_max, bool) or n_max < 2:
            errors.append("model.n_max: must be an integer >= 2")
    curves = cfg.get("curves")
    fits = cfg.get("fits")
    if curves is None and fits is None:
        errors.append("config: needs at least one of curves, fits")
    if curves is not None:
        if not isinstance(curves, dict):
            errors.append("curves: must be an object")
        else:
            targets = curves.get("target_gap_sq_values")
            if not isinstance(targets, list) or not targets:
                errors.append("curves.target_gap_sq_values: must be a nonempty list")
            else:
                for i, t in enumerate(targets):
                    if not _is_num(t) or t <= 0:
                        errors.append(f"curves.target_gap_sq_values[{i}]: must be a number > 0")
            _check_lambda_grid(curves.get("lambda_grid"), "curves.lambda_grid", errors)
    if fits is not None:
        if not isinstance(fits, list) or not fits:
            errors.append("fits: must be a nonempty list")
        else:
            for i, fit in enumerate(fits):
                if not isinstance(fit, dict):
                    errors.append(f"fits[{i}]: must be an object")
                    continue
                if not _is_num(fit.get("m0_sq")):
                    errors.append(f"fits[{i}].m0_sq: must be a number")
                grid = fit.get("lambda_grid")
                _check_lambda_grid(grid, f"fits[{i}].lambda_grid", errors)
                if isinstance(grid, list) and len(grid) < 4:
                    errors.append(f"fits[{i}].lambda_grid: needs at least 4 points to fit")
    window = cfg.get("fit_window", 6)
    if not isinstance(window, int) or isinstance(window, bool) or window < 4:
        errors.append("fit_window: must be an integer >= 4")
    return errors


def _validate_vqe(cfg: dict) -> list[str]:
    errors: list[str] = []
    model = cfg.get("model")
    _check_model(model, "model", errors, require_n_max=True)
    if isinstance(model, dict):
        n_max = model.get("n_max")
        L = model.get("L")
        if isinstance(n_max, int) and not isinstance(n_max, bool) and n_max >= 2:
            if n_max % 2 != 0:
                errors.append("model.n_max: parity blocking needs an even value")
            else:
                half = n_max // 2
                if half & (half - 1) != 0:
                    errors.append("model.n_max: qubit encoding needs n_max/2 to be a power of two")
                elif isinstance(L, int) and not isinstance(L, bool) and L >= 1 and half**L != 4:
                    errors.append("model: each parity sector must span exactly 4 states "
                                  f"(got {half}^{L} = {half**L}); use L=2, n_max=4")
    _check_lambda_grid(cfg.get("lambda_grid"), "lambda_grid", errors)
    ansatz = cfg.get("ansatz", "entangled")
    names = ansatz if isinstance(ansatz, list) else [ansatz]
    if not names:
        errors.append("ansatz: must name at least one ansatz")
    for i, name in enumerate(names):
        if name not in ("product", "entangled"):
            errors.append(f"ansatz[{i}]: must be 'product' or 'entangled'")
    backend = cfg.get("backend", {"kind": "exact"})
    if not isinstance(backend, dict):
        errors.append("backend: must be an object")
        return errors
    kind = backend.get("kind")
    if kind not in ("exact", "sampled", "noisy_mitigated"):
        errors.append("backend.kind: must be one of exact, sampled, noisy_mitigated")
        return errors
    shots = backend.get("shots", 8192)
    if not isinstance(shots, int) or isinstance(shots, bool) or shots < 1:
        errors.append("backend.shots: must be an integer >= 1")
    cal_shots = backend.get("calibration_shots", 100_000)
    if not isinstance(cal_shots, int) or isinstance(cal_shots, bool) or cal_shots < 1:
        errors.append("backend.calibration_shots: must be an integer >= 1")
    if kind == "exact":
        for key in ("p_dep", "readout", "readout_p10", "readout_p01"):
            if key in backend:
                errors.append(f"backend.{key}: not allowed for the exact backend")
    if kind == "noisy_mitigated":
        p_dep = backend.get("p_dep", 0.02)
        if not _is_num(p_dep) or not 0 <= p_dep < 1:
            errors.append("backend.p_dep: must be a number in [0, 1)")
        if "readout" in backend and ("readout_p10" in backend or "readout_p01" in backend):
            errors.append("backend: provide either readout or readout_p10/readout_p01, not both")
        readout = backend.get("readout", 0.03)
        if not _is_num(readout) or not 0 <= readout < 0.5:
            errors.append("backend.readout: must be a number in [0, 0.5)")
        for key in ("readout_p10", "readout_p01"):
            rates = backend.get(key)
            if rates is None:
                continue
            if not isinstance(rates, list) or len(rates) != 2:
                errors.append(f"backend.{key}: must list one rate per qubit (2 entries)")
            elif not all(_is_num(r) and 0 <= r < 1 for r in rates):
                errors.append(f"backend.{key}[*]: rates must lie in [0, 1)")
        if ("readout_p10" in backend) != ("readout_p01" in backend):
            errors.append("backend: readout_p10 and readout_p01 must be given together")
    return errors


def _backend_from_config(backend_cfg: dict) -> BackendSpec:
    kind = backend_cfg.get("kind", "exact")
    if kind == "exact":
        return BackendSpec.exact()
    shots = backend_cfg.get("shots", 8192)
    cal_shots = backend_cfg.get("calibration_shots", 100_000)
    if kind == "sampled":
        return BackendSpec.sampled(shots=shots)
    if "readout_p10" in backend_cfg:
        noise = NoiseModel(p10=tuple(backend_cfg["readout_p10"]),
                           p01=tuple(backend_cfg["readout_p01"]),
                           p_dep=backend_cfg.get("p_dep", 0.02))
    else:
        noise = NoiseModel.uniform(2, readout=backend_cfg.get("readout", 0.03),
                                   p_dep=backend_cfg.get("p_dep", 0.02))
    return BackendSpec.noisy(noise, shots=shots,
                             readout_correction=backend_cfg.get("readout_correction", True),
                             purification=backend_cfg.get("purification", True),
                             calibration_shots=cal_shots)


# ---------------------------------------------------------------- spectrum

def cmd_spectrum(cfg: dict, out_dir: Path, seed: int, threads: int) -> None:
    model = cfg["model"]
    lambda_grid = [float(v) for v in cfg["lambda_grid"]]
    n_max_values = list(cfg["n_max_values"])
    count = cfg.get("eigenvalue_count", 8)

    points = [(n_max, lam) for n_max in n_max_values for lam in lambda_grid]

    def work(_index: int, point):
        n_max, lam = point
        spectrum = exact_spectrum(build_H(_model_params(model, lam, n_max)))
        levels = [float(e) for e in spectrum.eigenvalues[:count]]
        return float(spectrum.gap), spectrum.degenerate, levels

    results = _map_indexed(work, points, threads)
    by_point = dict(zip(points, results))

    gap_header = ["lambda"] + [f"gap_nmax{n} ({ENERGY_UNIT})" for n in n_max_values]
    gap_rows = [[lam] + [by_point[(n, lam)][0] for n in n_max_values] for lam in lambda_grid]
    _write_csv(out_dir / "gaps.csv", gap_header, gap_rows)

    eig_rows = []
    for n_max in n_max_values:
        for lam in lambda_grid:
            for level, energy in enumerate(by_point[(n_max, lam)][2]):
                eig_rows.append([lam, n_max, level, energy])
    _write_csv(out_dir / "eigenvalues.csv",
               ["lambda", "n_max", "level", f"energy ({ENERGY_UNIT})"], eig_rows)

    record = {
        "schema": SCHEMA,
        "command": "spectrum",
        "config": cfg,
        "seed": seed,
        "outputs": ["gaps.csv", "eigenvalues.csv"],
        "gaps": {str(n): [[lam, by_point[(n, lam)][0]] for lam in lambda_grid]
                 for n in n_max_values},
        "degenerate_points": [[n, lam] for (n, lam) in points if by_point[(n, lam)][1]],
    }
    _write_record(out_dir / "record.json", record)


# ---------------------------------------------------------------- counterterm

def cmd_counterterm(cfg: dict, out_dir: Path, seed: int, threads: int) -> None:
    outputs = []
    record: dict = {"schema": SCHEMA, "command": "counterterm", "config": cfg, "seed": seed}

    first = cfg.get("firstorder")
    if first is not None:
        lambda_grid = [float(v) for v in first["lambda_grid"]]
        columns = [(m_sq, L) for m_sq in first["m_sq_values"] for L in first["L_values"]]

        def delta_curve(m_sq: float, L, lam: float) -> float:
            if L == "inf":
                return counterterm_continuum(m_sq, lam)
            params = ModelParams.from_counterterm(L=L, m_sq=m_sq, delta_m=0.0,
                                                  lam=lam, n_max=2)
            return counterterm_first_order(params)

        header = ["lambda"] + [
            f"delta_m[m_sq={m_sq},L={L}] ({ENERGY_UNIT})" for m_sq, L in columns
        ]
        rows = [[lam] + [delta_curve(m_sq, L, lam) for m_sq, L in columns]
                for lam in lambda_grid]
        _write_csv(out_dir / "firstorder.csv", header, rows)
        outputs.append("firstorder.csv")

    roots_cfg = cfg.get("roots")
    if roots_cfg is not None:
        lambda_values = [float(v) for v in roots_cfg["lambda_values"]]
        target = float(roots_cfg["target_m_sq"])
        sweep_points = roots_cfg.get("sweep_points", 21)
        halfwidth = float(roots_cfg.get("sweep_halfwidth", 2.5))
        base = ModelParams.from_counterterm(L=roots_cfg["L"], m_sq=roots_cfg["m_sq"],
                                            delta_m=0.0, lam=0.0,
                                            n_max=roots_cfg["n_max"])

        def solve_point(_index: int, lam: float):
            params = base.with_lam(lam)
            try:
                root = solve_counterterm(params, target)
            except ValueError as exc:
                return math.nan, math.nan, [], str(exc)
            gap_at_root = mass_gap(params.with_delta(root))
            sweep = []
            for delta in np.linspace(root - halfwidth, root + halfwidth, sweep_points):
                sweep.append((float(delta), mass_gap(params.with_delta(float(delta)))))
            return root, gap_at_root, sweep, None

        solved = _map_indexed(solve_point, lambda_values, threads)

        root_rows = [[lam, root, gap] for lam, (root, gap, _, _) in zip(lambda_values, solved)]
        _write_csv(out_dir / "roots.csv",
                   ["lambda", f"delta_m_root ({ENERGY_UNIT})", f"gap_at_root ({ENERGY_UNIT})"],
                   root_rows)
        outputs.append("roots.csv")

        sweep_rows = []
        for lam, (_, _, sweep, _) in zip(lambda_values, solved):
            for delta, gap in sweep:
                sweep_rows.append([lam, delta, gap])
        _write_csv(out_dir / "sweep.csv",
                   ["lambda", f"delta_m ({ENERGY_UNIT})", f"gap ({ENERGY_UNIT})"],
                   sweep_rows)
        outputs.append("sweep.csv")

        record["roots"] = [
            {"lambda": lam, "delta_m_root": root, "gap_at_root": gap, "failure": failure}
            for lam, (root, gap, _, failure) in zip(lambda_values, solved)
        ]

    record["outputs"] = outputs
    _write_record(out_dir / "record.json", record)


# ---------------------------------------------------------------- critical

def cmd_critical(cfg: dict, out_dir: Path, seed: int, threads: int) -> None:
    model = cfg["model"]
    base = ModelParams.from_counterterm(L=model["L"], m_sq=model["m_sq"], delta_m=0.0,
                                        lam=0.0, n_max=model["n_max"])
    outputs = []
    record: dict = {"schema": SCHEMA, "command": "critical", "config": cfg, "seed": seed}

    curves_cfg = cfg.get("curves")
    if curves_cfg is not None:
        lambda_grid = [float(v) for v in curves_cfg["lambda_grid"]]
        targets = [float(t) for t in curves_cfg["target_gap_sq_values"]]

        def curve(_index: int, target: float):
            return critical_curve(lambda_grid, target, base)

        curve_results = _map_indexed(curve, targets, threads)
        header = ["lambda"] + [f"m0_sq[target_gap_sq={t}] ({ENERGY_UNIT})" for t in targets]
        rows = []
        for i, lam in enumerate(lambda_grid):
            rows.append([lam] + [points[i][1] for points in curve_results])
        _write_csv(out_dir / "curve.csv", header, rows)
        outputs.append("curve.csv")
        record["curves"] = {
            repr(float(t)): [[lam, m0] for lam, m0 in points]
            for t, points in zip(targets, curve_results)
        }

    fits_cfg = cfg.get("fits")
    if fits_cfg is not None:
        window = cfg.get("fit_window", 6)

        def run_fit(_index: int, entry: dict):
            grid = [float(v) for v in entry["lambda_grid"]]
            gaps = []
            for lam in grid:
                params = ModelParams.from_bare(L=model["L"], m_sq=model["m_sq"],
                                               m0_sq=entry["m0_sq"], lam=lam,
                                               n_max=model["n_max"])
                gaps.append(mass_gap(params))
            fit = critical_exponent_fit(list(zip(grid, gaps)), window=window)
            return grid, gaps, fit

        fit_results = _map_indexed(run_fit, fits_cfg, threads)
        fits_payload = []
        for entry, (grid, gaps, fit) in zip(fits_cfg, fit_results):
            fits_payload.append({
                "m0_sq": entry["m0_sq"],
                "lambda_grid": grid,
                "gaps": gaps,
                "lambda_c": fit.lambda_c,
                "nu": fit.nu,
                "amplitude": fit.amplitude,
                "residual": fit.residual,
                "window": list(fit.window),
                "slopes": list(fit.slopes),
            })
        with open(out_dir / "fits.json", "w") as handle:
            json.dump(_json_safe(fits_payload), handle, sort_keys=True, indent=2)
            handle.write("\n")
        outputs.append("fits.json")
        record["fits"] = fits_payload

    record["outputs"] = outputs
    _write_record(out_dir / "record.json", record)


# ---------------------------------------------------------------- vqe

def cmd_vqe(cfg: dict, out_dir: Path, seed: int, threads: int) -> None:
    model = cfg["model"]
    lambda_grid = [float(v) for v in cfg["lambda_grid"]]
    ansatz = cfg.get("ansatz", "entangled")
    ansatz_names = ansatz if isinstance(ansatz, list) else [ansatz]
    backend_cfg = cfg.get("backend", {"kind": "exact"})
    backend = _backend_from_config(backend_cfg)
    noisy = backend.kind == "noisy_mitigated"
    stochastic = backend.kind != "exact"

    points = [(lam, name) for lam in lambda_grid for name in ansatz_names]

    def run_point(index: int, point):
        lam, name = point
        params = _model_params(model, lam, model["n_max"])
        point_seed = [seed, index]
        estimate = mass_gap_vqe(params, backend, ansatz=name, seed=point_seed)
        e0_exact, e1_exact, gap_exact = sector_minima(params)
        entry = {
            "lambda": lam,
            "ansatz": name,
            "seed": point_seed,
            "shots": backend.shots if stochastic else None,
            "e0": estimate.ground.energy,
            "e0_err": estimate.ground.uncertainty,
            "e1": estimate.excited.energy,
            "e1_err": estimate.excited.uncertainty,
            "gap": estimate.gap,
            "gap_err": estimate.gap_err,
            "e0_exact": e0_exact,
            "e1_exact": e1_exact,
            "gap_exact": gap_exact,
            "parameters": {
                "ground": list(estimate.ground.parameters),
                "excited": list(estimate.excited.parameters),
            },
            "evaluations": {
                "ground": len(estimate.ground.history),
                "excited": len(estimate.excited.history),
            },
        }
        if stochastic:
            entry["within_one_sigma"] = bool(abs(estimate.gap - gap_exact) <= estimate.gap_err)
        else:
            entry["within_tolerance"] = bool(abs(estimate.gap - gap_exact) <= 1e-6)
        if noisy:
            entry["calibration"] = {
                "ground": estimate.ground.calibration,
                "excited": estimate.excited.calibration,
            }
            entry["purification_iterations"] = {
                "ground": [r.iterations for r in estimate.ground.purification_reports],
                "excited": [r.iterations for r in estimate.excited.purification_reports],
            }
            comparison = {}
            for tag, result, child in (("ground", estimate.ground, 2),
                                       ("excited", estimate.excited, 3)):
                comp = mitigation_comparison(
                    _sector_for(params, tag), result.parameters, backend,
                    seed=[seed, index, child])
                comparison[tag] = {
                    "e_exact_at_optimum": comp.e_exact,
                    "e_mitigated": comp.e_mitigated,
                    "e_raw": comp.e_raw,
                    "error_mitigated": abs(comp.e_mitigated - comp.e_exact),
                    "error_raw": abs(comp.e_raw - comp.e_exact),
                }
            entry["mitigation"] = comparison
            entry["gap_raw"] = (comparison["excited"]["e_raw"]
                                - comparison["ground"]["e_raw"])
        return entry

    entries = _map_indexed(run_point, points, threads)

    header = [
        "lambda", "ansatz",
        f"e0 ({ENERGY_UNIT})", "e0_err", f"e1 ({ENERGY_UNIT})", "e1_err",
        f"gap ({ENERGY_UNIT})", "gap_err",
        f"e0_exact ({ENERGY_UNIT})", f"e1_exact ({ENERGY_UNIT})",
        f"gap_exact ({ENERGY_UNIT})", "verdict",
        f"gap_raw ({ENERGY_UNIT})",
    ]
    rows = []
    for entry in entries:
        verdict = entry.get("within_one_sigma", entry.get("within_tolerance"))
        rows.append([
            entry["lambda"], entry["ansatz"],
            entry["e0"], entry["e0_err"], entry["e1"], entry["e1_err"],
            entry["gap"], entry["gap_err"],
            entry["e0_exact"], entry["e1_exact"], entry["gap_exact"],
            "pass" if verdict else "fail",
            entry.get("gap_raw"),
        ])
    _write_csv(out_dir / "benchmark.csv", header, rows)

    verdict_key = "within_one_sigma" if stochastic else "within_tolerance"
    record = {
        "schema": SCHEMA,
        "command": "vqe",
        "config": cfg,
        "seed": seed,
        "outputs": ["benchmark.csv"],
        "points": entries,
        "verdict": {
            "criterion": verdict_key,
            "points_passing": sum(1 for e in entries if e[verdict_key]),
            "points_total": len(entries),
        },
    }
    _write_record(out_dir / "record.json", record)


def _sector_for(params: ModelParams, tag: str):
    blocks = parity_blocks(build_H(params), params)
    if tag == "ground":
        return sector_by_parity(blocks, ("+",) * params.L)
    return sector_by_parity(blocks, ("-",) + ("+",) * (params.L - 1))


# ---------------------------------------------------------------- entry point

COMMANDS = {
    "spectrum": (cmd_spectrum, _validate_spectrum),
    "counterterm": (cmd_counterterm, _validate_counterterm),
    "critical": (cmd_critical, _validate_critical),
    "vqe": (cmd_vqe, _validate_vqe),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="phi4vqe",
        description="Lattice scalar-field spectra, counterterms, critical fits, "
                    "and variational benchmarks from JSON configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=None, help="output directory (default: config out_dir or ./out)")
        p.add_argument("--seed", type=int, default=None, help="master seed (default: config seed or 0)")
        p.add_argument("--threads", type=int, default=None, help="worker pool size (default: 1)")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as handle:
            cfg = json.load(handle)
    except OSError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"config: invalid JSON: {exc}", file=sys.stderr)
        return 1
    if not isinstance(cfg, dict):
        print("config: top level must be a JSON object", file=sys.stderr)
        return 1

    run, validate = COMMANDS[args.command]
    errors = validate(cfg)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        errors.append("seed: must be an integer >= 0")
    threads = args.threads if args.threads is not None else cfg.get("threads", 1)
    if not isinstance(threads, int) or isinstance(threads, bool) or threads < 1:
        errors.append("threads: must be an integer >= 1")
    if errors:
        for message in errors:
            print(message, file=sys.stderr)
        return 1

    out_dir = Path(args.out if args.out is not None else cfg.get("out_dir", "out"))
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        run(cfg, out_dir, seed, threads)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


def entry() -> None:
    raise SystemExit(main())
