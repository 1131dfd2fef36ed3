"""End-to-end scenario runners.

Each ``run_*`` function takes a validated :class:`ScenarioConfig`, writes its
CSV files plus ``manifest.json`` into ``config.out`` and returns the
manifest as a dict. CSV floats use 17 significant digits so that reruns can
be compared byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
import time
from pathlib import Path

import numpy as np
from scipy.signal import find_peaks as signal_find_peaks
from scipy.signal import peak_widths

from . import __version__
from ._parallel import parallel_map
from .config import ScenarioConfig
from .exceptions import ConfigError
from .evolution import (
    SpectralPropagator,
    dressed_kerr_coefficient,
    evolve_effective,
    evolve_exact,
    mode_a_linear_frequency,
)
from .fock import choose_cutoffs, coherent_amplitudes, embed_product_state, sector_basis
from .hamiltonian import EffectiveForm, build_sector_block, second_order_pt_diagonal, small_rotation_transform
from .linalg import dense_eigen, tridiag_eigen
from .observables import (
    VarianceParams,
    best_cat_fidelity,
    find_peaks,
    mean_photons,
    min_quadrature_variance,
    purity,
    q_function,
    quadrature_variance,
    reduce_mode_a,
    rotate_density,
    squeezing_death_threshold,
    variance_formula,
)

__all__ = [
    "run_resonant_snapshots",
    "run_detuning_sweep",
    "run_dispersive_cat",
    "run_fidelity_scan",
    "run_variance_scan",
    "run_spectrum_check",
    "run_scenario",
]


def fmt(x) -> str:
    return format(float(x), ".17g")


def _label(x: float) -> str:
    return format(float(x), "g")


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def write_q_csv(path: Path, grid) -> None:
    write_csv(path, ("re_alpha", "im_alpha", "q"), grid.rows())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _workers(cfg: ScenarioConfig):
    return 1 if cfg.serial else 0


def _chunks(items, n):
    items = list(items)
    size = max(1, math.ceil(len(items) / max(1, n)))
    return [items[i : i + size] for i in range(0, len(items), size)]


def _initial_state(cfg: ScenarioConfig, scale: int | None = None):
    scale = cfg.cutoff_scale if scale is None else scale
    n_a, n_b, _ = choose_cutoffs(cfg.nbar_value, abs(cfg.beta) ** 2, cfg.epsilon, cfg.order)
    n_a, n_b = n_a * scale, n_b * scale
    a = coherent_amplitudes(cfg.alpha_value, n_a)
    b = coherent_amplitudes(cfg.beta, n_b)
    state = embed_product_state(a, b, cfg.order)
    cutoffs = {"n_max_a": n_a, "n_max_b": n_b, "N_max": state.N_max}
    return state, cutoffs


def _peaks_json(peaks):
    return [{"re": p.re, "im": p.im, "height": p.height} for p in peaks]


def _snapshot(job):
    rho = reduce_mode_a(evolve_exact(job["state"], job["prop"], job["gt"]))
    match = best_cat_fidelity(rho, job["alpha"], conventions=job["conventions"])
    frame = rotate_density(rho, match.rotation) if job["align"] else rho
    grid = q_function(frame, job["grid"])
    min_var, min_theta = min_quadrature_variance(rho)
    return {
        "grid": grid,
        "peaks": find_peaks(grid),
        "min_variance": min_var,
        "min_variance_theta": min_theta,
        "variance_x": quadrature_variance(rho, 0.0),
        "mean_photons_a": mean_photons(rho),
        "purity_a": purity(rho),
        "trace_a": float(np.real(np.trace(rho.matrix))),
        "cat": match,
    }


def _snapshot_summary(gt, snap):
    m = snap["cat"]
    return {
        "gt": gt,
        "peaks": _peaks_json(snap["peaks"]),
        "n_peaks": len(snap["peaks"]),
        "min_variance": snap["min_variance"],
        "min_variance_theta": snap["min_variance_theta"],
        "variance_x": snap["variance_x"],
        "mean_photons_a": snap["mean_photons_a"],
        "purity_a": snap["purity_a"],
        "trace_a": snap["trace_a"],
        "cat_fidelity": min(1.0, max(0.0, m.fidelity)),
        "cat_convention": m.convention,
        "cat_rotation": m.rotation,
    }


def _finish(cfg: ScenarioConfig, out: Path, started: float, cutoffs, norm_deficit, results) -> dict:
    manifest = {
        "scenario": cfg.scenario,
        "config": cfg.to_json(),
        "library_version": __version__,
        "wall_time_s": time.perf_counter() - started,
        "cutoffs": cutoffs,
        "norm_deficit": norm_deficit,
        "results": results,
    }
    manifest = _jsonable(manifest)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _outdir(cfg: ScenarioConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_resonant_snapshots(cfg: ScenarioConfig) -> dict:
    """Q-function snapshots of the fundamental mode at several times."""
    started = time.perf_counter()
    cfg.validate()
    out = _outdir(cfg)
    state, cutoffs = _initial_state(cfg)
    prop = SpectralPropagator.for_state(state, cfg.detuning_over_g, _workers(cfg))
    times = list(cfg.times.values)
    gts = cfg.gt_values()
    jobs = [
        dict(state=state, prop=prop, gt=gt, alpha=cfg.alpha_value, conventions=cfg.conventions(),
             grid=cfg.grid, align=cfg.detuning_over_g != 0)
        for gt in gts
    ]
    snaps = parallel_map(_snapshot, jobs, _workers(cfg))
    results = []
    for t, gt, snap in zip(times, gts, snaps):
        write_q_csv(out / f"q_{cfg.times.kind}_{_label(t)}.csv", snap["grid"])
        entry = _snapshot_summary(gt, snap)
        entry[cfg.times.kind] = t
        results.append(entry)
    return _finish(cfg, out, started, cutoffs, state.norm_deficit, {"snapshots": results})


def _sweep_one(job):
    prop = SpectralPropagator.for_state(job["state"], job["detuning"])
    return _snapshot(dict(job, prop=prop, align=job["detuning"] != 0))


def run_detuning_sweep(cfg: ScenarioConfig) -> dict:
    """Snapshots at one time for a list of detunings."""
    started = time.perf_counter()
    cfg.validate()
    out = _outdir(cfg)
    state, cutoffs = _initial_state(cfg)
    gts = cfg.gt_values()
    if len(gts) != 1:
        raise ConfigError("detuning-sweep takes exactly one time")
    gt = gts[0]
    jobs = [
        dict(state=state, detuning=d, gt=gt, alpha=cfg.alpha_value, conventions=cfg.conventions(), grid=cfg.grid)
        for d in cfg.detunings
    ]
    snaps = parallel_map(_sweep_one, jobs, _workers(cfg))
    rows, results = [], []
    for d, snap in zip(cfg.detunings, snaps):
        write_q_csv(out / f"q_detuning_{_label(d)}.csv", snap["grid"])
        entry = _snapshot_summary(gt, snap)
        entry["detuning_over_g"] = d
        results.append(entry)
        rows.append((d, entry["cat_fidelity"], len(snap["peaks"])))
    write_csv(out / "summary.csv", ("detuning", "fidelity", "n_peaks"), rows)
    return _finish(cfg, out, started, cutoffs, state.norm_deficit, {"gt": gt, "sweep": results})


def _dispersive_branch(state, cfg, gt, prop=None):
    if prop is not None:
        rho = reduce_mode_a(evolve_exact(state, prop, gt))
    else:
        rho = reduce_mode_a(evolve_effective(state, cfg.form, cfg.detuning_over_g, gt))
        # co-rotating frame of the fundamental mode
        w = mode_a_linear_frequency(cfg.form, cfg.detuning_over_g, cfg.order)
        rho = rotate_density(rho, -w * gt)
    return rho


def run_dispersive_cat(cfg: ScenarioConfig) -> dict:
    """Exact and effective evolution side by side at the predicted cat time."""
    started = time.perf_counter()
    cfg.validate()
    out = _outdir(cfg)
    state, cutoffs = _initial_state(cfg)
    prop = SpectralPropagator.for_state(state, cfg.detuning_over_g, _workers(cfg))
    big_state, big_cutoffs = _initial_state(cfg, scale=2 * cfg.cutoff_scale)
    big_prop = SpectralPropagator.for_state(big_state, cfg.detuning_over_g, _workers(cfg))
    alpha = cfg.alpha_value
    rows, results = [], []
    for t, gt in zip(cfg.times.values, cfg.gt_values()):
        entry = {cfg.times.kind: t, "gt": gt}
        for branch in ("exact", "effective"):
            rho = _dispersive_branch(state, cfg, gt, prop if branch == "exact" else None)
            aligned = best_cat_fidelity(rho, alpha, conventions=cfg.conventions())
            fixed = best_cat_fidelity(rho, alpha, conventions=cfg.conventions(), optimize_rotation=False)
            frame = rotate_density(rho, aligned.rotation)
            grid = q_function(frame, cfg.grid)
            write_q_csv(out / f"q_{branch}_gt_{_label(gt)}.csv", grid)
            peaks = find_peaks(grid)
            p = purity(rho)
            for conv in cfg.conventions():
                f_al, rot = aligned.by_convention[conv]
                f_fx, _ = fixed.by_convention[conv]
                rows.append((branch, gt, str(conv), f_al, rot, f_fx, p, len(peaks)))
            entry[branch] = {
                "fidelity_aligned": aligned.fidelity,
                "fidelity_aligned_by_convention": {str(c): v[0] for c, v in aligned.by_convention.items()},
                "rotation": aligned.rotation,
                "convention": aligned.convention,
                "fidelity_fixed_frame_by_convention": {str(c): v[0] for c, v in fixed.by_convention.items()},
                "purity_a": p,
                "mean_photons_a": mean_photons(rho),
                "peaks": _peaks_json(peaks),
            }
        big_rho = reduce_mode_a(evolve_exact(big_state, big_prop, gt))
        big = best_cat_fidelity(big_rho, alpha, conventions=cfg.conventions())
        entry["exact"]["fidelity_doubled_cutoff"] = big.fidelity
        entry["exact"]["cutoff_doubling_change"] = abs(big.fidelity - entry["exact"]["fidelity_aligned"])
        results.append(entry)
    write_csv(
        out / "cat_summary.csv",
        ("branch", "gt", "convention", "fidelity", "rotation", "fidelity_fixed_frame", "purity", "n_peaks"),
        rows,
    )
    baseline = best_cat_fidelity(reduce_mode_a(state), alpha, conventions=cfg.conventions()).fidelity
    return _finish(
        cfg, out, started, {"base": cutoffs, "doubled": big_cutoffs}, state.norm_deficit,
        {"baseline_fidelity": baseline, "times": results},
    )


def _fidelity_chunk(job):
    out = []
    for gt in job["gts"]:
        rho = reduce_mode_a(evolve_exact(job["state"], job["prop"], gt))
        out.append(best_cat_fidelity(rho, job["alpha"], conventions=job["conventions"]).fidelity)
    return out


def fidelity_peak_stats(gts, values, lower_gt: float = 5.0, prominence: float = 0.02) -> dict:
    """Location, height and width of the global maximum of a sampled curve."""
    gts = np.asarray(gts, dtype=float)
    values = np.asarray(values, dtype=float)
    i = int(np.argmax(values))
    step = float(gts[1] - gts[0]) if len(gts) > 1 else 0.0
    width = float("nan")
    if 0 < i < len(values) - 1:
        width = float(peak_widths(values, [i], rel_height=0.5)[0][0]) * step
    interior = [
        j for j in range(1, len(values) - 1)
        if values[j] > values[j - 1] and values[j] > values[j + 1] and lower_gt < gts[j] < gts[i]
    ]
    prominent, _ = signal_find_peaks(values, prominence=prominence)
    prominent = [int(j) for j in prominent if lower_gt < gts[j] < gts[i]]
    return {
        "argmax_gt": float(gts[i]),
        "peak_height": float(values[i]),
        "width_half_prominence": width,
        "n_secondary_maxima": len(interior),
        "prominent_secondary_maxima": [
            {"gt": float(gts[j]), "fidelity": float(values[j])} for j in prominent
        ],
    }


def run_fidelity_scan(cfg: ScenarioConfig) -> dict:
    """Best cat fidelity of the exact state along a time grid."""
    started = time.perf_counter()
    cfg.validate()
    out = _outdir(cfg)
    state, cutoffs = _initial_state(cfg)
    prop = SpectralPropagator.for_state(state, cfg.detuning_over_g, _workers(cfg))
    D = abs(cfg.detuning_over_g)
    predicted = 0.5 * math.pi * D
    if cfg.times is None:
        gts = list(np.linspace(0.0, 1.2 * predicted, cfg.samples))
    else:
        gts = cfg.gt_values()
    n_chunks = 1 if cfg.serial else 8
    jobs = [
        dict(state=state, prop=prop, gts=chunk, alpha=cfg.alpha_value, conventions=cfg.conventions())
        for chunk in _chunks(gts, n_chunks)
    ]
    values = [v for part in parallel_map(_fidelity_chunk, jobs, _workers(cfg)) for v in part]
    values = [min(1.0, max(0.0, v)) for v in values]
    write_csv(out / "fidelity_scan.csv", ("gt", "fidelity"), zip(gts, values))
    stats = fidelity_peak_stats(gts, values)
    stats["predicted_gt"] = predicted
    stats["fidelity_at_zero"] = values[0]
    n_ref = max(1, min(int(round(cfg.nbar_value)), prop.N_max - 1))
    if cfg.order == 2 and prop.N_max >= 2:
        lam = dressed_kerr_coefficient(prop, n_ref)
        stats["dressed_kerr_coefficient"] = lam
        stats["dressed_kerr_ratio"] = lam * cfg.detuning_over_g
        stats["dressed_cat_gt"] = 0.5 * math.pi / abs(lam)
    return _finish(cfg, out, started, cutoffs, state.norm_deficit, stats)


def run_variance_scan(cfg: ScenarioConfig) -> dict:
    """Closed-form quadrature variance against effective and exact evolution."""
    started = time.perf_counter()
    cfg.validate()
    out = _outdir(cfg)
    state, cutoffs = _initial_state(cfg)
    prop = SpectralPropagator.for_state(state, cfg.detuning_over_g, _workers(cfg))
    alpha = cfg.alpha_value.real
    beta = cfg.beta.real
    w_exact = mode_a_linear_frequency(EffectiveForm.PERTURBATIVE, cfg.detuning_over_g, cfg.order)
    rows = []
    worst = 0.0
    first_over = None
    for T, gt in zip(cfg.times.values, cfg.gt_values()):
        formula = variance_formula(VarianceParams.from_amplitudes(alpha, beta, T), alpha)
        eff = quadrature_variance(_dispersive_branch(state, cfg, gt), 0.0)
        exact_rho = rotate_density(reduce_mode_a(evolve_exact(state, prop, gt)), -w_exact * gt)
        exact = quadrature_variance(exact_rho, 0.0)
        rows.append((T, formula, eff, exact))
        rel = abs(formula - eff) / abs(eff)
        worst = max(worst, rel)
        if first_over is None and rel > 0.01:
            first_over = T
    write_csv(out / "variance_scan.csv", ("T", "formula", "effective", "exact"), rows)
    t_max = max(cfg.times.values)
    results = {
        "max_relative_deviation_formula_vs_effective": worst,
        "first_T_over_1_percent": first_over,
        "squeezing_death_beta2": squeezing_death_threshold(alpha, t_max) if t_max > 0 else None,
    }
    return _finish(cfg, out, started, cutoffs, state.norm_deficit, results)


def spectrum_errors(detuning_over_g: float, N_max: int, k: int = 2) -> list:
    """Per-sector eigenvalue errors of the second-order diagonal and the small rotation."""
    rows = []
    for N in range(N_max + 1):
        block = build_sector_block(sector_basis(N, k), detuning_over_g)
        exact = tridiag_eigen(block).eigenvalues
        pt = np.sort(second_order_pt_diagonal(block, gap_ratio=0.0))
        rotated = small_rotation_transform(block, 1.0 / detuning_over_g)
        off = rotated - np.diag(np.diag(rotated))
        rot_eigs = dense_eigen(rotated).eigenvalues
        rows.append({
            "N": N,
            "max_error": float(np.max(np.abs(exact - pt))),
            "rotated_offdiag_max": float(np.max(np.abs(off))) if len(block) > 1 else 0.0,
            "rotated_spectrum_error": float(np.max(np.abs(rot_eigs - exact))),
        })
    return rows


def run_spectrum_check(cfg: ScenarioConfig) -> dict:
    """Exact sector spectra against the second-order effective diagonal over a detuning ladder."""
    import warnings

    started = time.perf_counter()
    cfg.validate()
    out = _outdir(cfg)
    rows, per_detuning = [], {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for d in cfg.detuning_ladder:
            errs = spectrum_errors(d, cfg.spectrum_N_max, cfg.order)
            for e in errs:
                rows.append((d, e["N"], e["max_error"], e["rotated_offdiag_max"], e["rotated_spectrum_error"]))
            per_detuning[_label(d)] = {
                "max_error": max(e["max_error"] for e in errs),
                "max_error_N_le_12": max(e["max_error"] for e in errs if e["N"] <= 12),
                "max_rotated_spectrum_error": max(e["rotated_spectrum_error"] for e in errs),
            }
    write_csv(
        out / "spectrum_check.csv",
        ("detuning", "N", "max_error", "rotated_offdiag_max", "rotated_spectrum_error"),
        rows,
    )
    ladder = list(cfg.detuning_ladder)
    ratios = [
        per_detuning[_label(a)]["max_error"] / per_detuning[_label(b)]["max_error"]
        for a, b in zip(ladder, ladder[1:])
    ]
    return _finish(
        cfg, out, started, {"N_max": cfg.spectrum_N_max}, 0.0,
        {"per_detuning": per_detuning, "error_ratios": ratios},
    )


RUNNERS = {
    "resonant": run_resonant_snapshots,
    "detuning-sweep": run_detuning_sweep,
    "dispersive-cat": run_dispersive_cat,
    "fidelity-scan": run_fidelity_scan,
    "variance-scan": run_variance_scan,
    "spectrum-check": run_spectrum_check,
}


def run_scenario(cfg: ScenarioConfig) -> dict:
    return RUNNERS[cfg.scenario](cfg)
