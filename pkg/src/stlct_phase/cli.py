"""Command line interface.

Subcommands:

* ``simulate``    — build (or load) a signal, sample the magnitude lattice,
  optionally add noise, and write the dataset + signal files.
* ``reconstruct`` — load a dataset, run the anchor/stitching pipeline, and
  write reconstruction/anchor/detector CSVs plus a run report.
* ``bounds``      — emit every analytic constant and sampling condition as a
  JSON report (planning from a tolerance, or margin checks for a lattice).
* ``verify``      — run the property suites (oracle equivalence, duality,
  exact inequalities, equivariances, stability domination), exit 0 iff all
  selected suites pass.
* ``experiment``  — simulate + reconstruct + bounds in one run.

Exit codes: 0 success, 2 validation/config/data errors, 3 anchor-selection
failures, 4 infeasible tolerance, 5 property failures.

Configuration is a single JSON document (see README).  The output directory
comes from ``--out``, else the ``STLCT_PHASE_OUT`` environment variable,
else the current directory.  All numeric outputs are deterministic given
the config and seeds; the wall-clock timings inside reports are the only
non-deterministic fields.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from .bounds import (
    d_constants,
    inflated_frame_sum,
    leading_frequency_columns,
    leading_time_rows,
    local_error_bound,
    mixed_norm_discrepancy,
    plan_parameters,
    stability_constants,
    suggested_row_range,
)
from .errors import (
    AnchorError,
    DataFormatError,
    FittingError,
    InfeasibleToleranceError,
    LatticeConsistencyError,
    ParameterError,
    PropertyFailure,
    QuadratureConfigError,
    StlctPhaseError,
    ZeroBasePointError,
)
from .measurement import (
    LatticeSpec,
    add_noise,
    load_measurements,
    sample_exact,
    save_measurements,
)
from .reconstruction import (
    AnchorDetector,
    phase_aligned_error,
    reconstruct,
    save_anchors_csv,
    save_reconstruction_csv,
)
from .signal_model import (
    GaussianSisSignal,
    load_signal,
    random_signal,
    save_signal,
    sup_norm_upper_bound,
)
from .special_functions import (
    DualGeneratorSpec,
    biorthogonality_defect,
    build_table,
    estimate_decay_constants,
    theta3,
)
from .stlct import (
    LctParams,
    magnitude_closed_form,
    stlct_closed_form,
    stlct_quadrature_oracle,
)

_DEFAULT_FILES = {
    "signal": "signal.json",
    "dataset": "measurements.txt",
    "anchors": "anchors.csv",
    "reconstruction": "reconstruction.csv",
    "detector": "detector.csv",
    "simulate_report": "simulate_report.json",
    "run_report": "run_report.json",
    "bound_report": "bound_report.json",
    "verify_report": "verify_report.json",
}

# lattices at or above this sample count need the explicit --full flag
_FULL_SCALE_CELLS = 700_000

_TOP_KEYS = {
    "signal",
    "signal_file",
    "lct",
    "lattice",
    "epsilon",
    "noise",
    "algorithm",
    "output",
    "evaluation",
}


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ParameterError("config must be a JSON object")
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    if "signal" in cfg and "signal_file" in cfg:
        raise ParameterError("config must not contain both 'signal' and 'signal_file'")
    if "lattice" in cfg and "epsilon" in cfg:
        raise ParameterError("config must contain at most one of 'lattice' and 'epsilon'")
    cfg["_dir"] = str(Path(path).resolve().parent)
    return cfg


def _require(cfg: dict, key: str, context: str) -> dict:
    if key not in cfg:
        raise ParameterError(f"config is missing the '{key}' section required by {context}")
    return cfg[key]


def _get_lct(cfg: dict) -> LctParams:
    sec = _require(cfg, "lct", "this command")
    try:
        return LctParams(float(sec["a"]), float(sec["b"]), float(sec["c"]), float(sec["d"]))
    except KeyError as exc:
        raise ParameterError(f"lct section is missing entry {exc}") from exc


def _build_signal(cfg: dict, seed_override: int | None) -> GaussianSisSignal:
    if "signal_file" in cfg:
        p = Path(cfg["signal_file"])
        if not p.is_absolute():
            p = Path(cfg["_dir"]) / p
        return load_signal(p)
    sec = _require(cfg, "signal", "this command")
    try:
        seed = int(sec["seed"]) if seed_override is None else int(seed_override)
        return random_signal(
            n0=int(sec["n0"]),
            amplitude=float(sec["amplitude"]),
            seed=seed,
            beta=float(sec["beta"]),
            sigma=float(sec["sigma"]),
        )
    except KeyError as exc:
        raise ParameterError(f"signal section is missing entry {exc}") from exc


def _get_algorithm(cfg: dict) -> dict:
    sec = _require(cfg, "algorithm", "this command")
    if "s" not in sec or "r" not in sec:
        raise ParameterError("algorithm section needs 's' and 'r'")
    out = {
        "s": float(sec["s"]),
        "r": float(sec["r"]),
        "scan_step": float(sec["scan_step"]) if "scan_step" in sec else None,
    }
    if "gamma" in sec:
        gamma = float(sec["gamma"])
        if gamma <= 0:
            raise ParameterError("gamma must be positive")
        out["gamma"] = gamma
        out["threshold"] = float(sec.get("gamma_tilde", 1.5 * gamma**2))
    elif "gamma_tilde" in sec:
        thr = float(sec["gamma_tilde"])
        if thr <= 0:
            raise ParameterError("gamma_tilde must be positive")
        out["gamma"] = math.sqrt(thr / 1.5)
        out["threshold"] = thr
    else:
        raise ParameterError("algorithm section needs 'gamma' or 'gamma_tilde'")
    return out


def _get_noise(cfg: dict, seed_override: int | None) -> tuple[float, int | None]:
    sec = cfg.get("noise", {})
    delta = float(sec.get("delta", 0.0))
    if delta < 0:
        raise ParameterError("noise delta must be non-negative")
    seed = sec.get("seed")
    if seed_override is not None:
        seed = seed_override
    if delta > 0 and seed is None:
        raise ParameterError("noise with delta > 0 needs a 'seed'")
    return delta, (int(seed) if seed is not None else None)


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("STLCT_PHASE_OUT") or "."
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _file(cfg: dict, out: Path, key: str) -> Path:
    name = cfg.get("output", {}).get(key, _DEFAULT_FILES[key])
    return out / name


def _grid_density(cfg: dict) -> int:
    dens = int(cfg.get("evaluation", {}).get("grid_density", 32))
    if dens <= 0:
        raise ParameterError("evaluation grid_density must be positive")
    return dens


def _eval_grid(s: float, density: int) -> np.ndarray:
    n = int(math.ceil(2.0 * s * density)) + 1
    return np.linspace(-s, s, n)


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _resolve_lattice(cfg: dict, f: GaussianSisSignal, A: LctParams, alg: dict):
    """Lattice from the config, or planned from a tolerance.  Returns
    ``(lattice, plan_or_None)``."""
    if ("lattice" in cfg) == ("epsilon" in cfg):
        raise ParameterError("config must contain exactly one of 'lattice' and 'epsilon'")
    if "lattice" in cfg:
        sec = cfg["lattice"]
        try:
            return LatticeSpec(N=int(sec["N"]), H=int(sec["H"]), h=float(sec["h"])), None
        except KeyError as exc:
            raise ParameterError(f"lattice section is missing entry {exc}") from exc
    dc = estimate_decay_constants(DualGeneratorSpec(f.sigma, f.beta))
    plan = plan_parameters(
        f,
        alg["gamma"],
        alg["s"],
        alg["r"],
        float(cfg["epsilon"]),
        f.sigma,
        f.beta,
        A,
        dc,
    )
    return LatticeSpec(N=plan.N, H=plan.H, h=plan.h), plan


def cmd_simulate(cfg: dict, out: Path, seed: int | None, threads: int) -> int:
    t0 = time.perf_counter()
    f = _build_signal(cfg, seed)
    A = _get_lct(cfg)
    alg = _get_algorithm(cfg)
    lattice, plan = _resolve_lattice(cfg, f, A, alg)
    signal_path = _file(cfg, out, "signal")
    save_signal(f, signal_path)

    t1 = time.perf_counter()
    meas = sample_exact(f, A, lattice, threads=threads)
    delta, noise_seed = _get_noise(cfg, seed)
    if delta > 0:
        meas = add_noise(meas, delta, noise_seed)
    meas = dataclasses.replace(meas, signal_ref=signal_path.name)
    t2 = time.perf_counter()
    dataset_path = _file(cfg, out, "dataset")
    save_measurements(meas, dataset_path)
    t3 = time.perf_counter()

    report = {
        "lattice": {"N": lattice.N, "H": lattice.H, "h": lattice.h},
        "samples": int(meas.values.size),
        "delta": delta,
        "noise_seed": noise_seed,
        "eta_inf": meas.noise_inf,
        "plan": plan.report_dict() if plan is not None else None,
        "files": {"signal": signal_path.name, "dataset": dataset_path.name},
        "timings_sec": {
            "setup": t1 - t0,
            "sampling": t2 - t1,
            "write": t3 - t2,
        },
    }
    _write_json(_file(cfg, out, "simulate_report"), report)
    print(
        f"simulate: wrote {meas.values.shape[0]}x{meas.values.shape[1]} samples "
        f"to {dataset_path} (delta={delta})"
    )
    return 0


# ---------------------------------------------------------------------------
# reconstruct
# ---------------------------------------------------------------------------


def _load_truth(cfg: dict, out: Path, signal_ref: str | None) -> GaussianSisSignal | None:
    if "signal" in cfg or "signal_file" in cfg:
        return _build_signal(cfg, None)
    if signal_ref:
        p = out / signal_ref
        if p.exists():
            return load_signal(p)
    return None


def _write_detector_csv(
    path: Path,
    t: np.ndarray,
    detector_vals: np.ndarray,
    truth_sq: np.ndarray | None,
    anchor_positions: np.ndarray,
) -> None:
    """Figure data: detector curve vs (optional) true squared modulus, with
    anchor markers on the nearest grid points."""
    marks = np.zeros(t.size, dtype=int)
    for p in anchor_positions:
        marks[int(np.argmin(np.abs(t - p)))] = 1
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if truth_sq is None:
            writer.writerow(["t", "detector", "anchor"])
            for i in range(t.size):
                writer.writerow([repr(float(t[i])), repr(float(detector_vals[i])), marks[i]])
        else:
            writer.writerow(["t", "signal_sq", "detector", "anchor"])
            for i in range(t.size):
                writer.writerow(
                    [
                        repr(float(t[i])),
                        repr(float(truth_sq[i])),
                        repr(float(detector_vals[i])),
                        marks[i],
                    ]
                )


def cmd_reconstruct(cfg: dict, out: Path, full: bool) -> int:
    t0 = time.perf_counter()
    dataset_path = _file(cfg, out, "dataset")
    meas = load_measurements(dataset_path)
    cells = meas.values.size
    if cells >= _FULL_SCALE_CELLS and not full:
        raise ParameterError(
            f"dataset has {cells} samples (>= {_FULL_SCALE_CELLS}); "
            "pass --full to run at this scale"
        )
    alg = _get_algorithm(cfg)
    s, r = alg["s"], alg["r"]

    table = build_table(DualGeneratorSpec(meas.sigma, meas.beta))
    rec = reconstruct(meas, s, r, alg["threshold"], alg["scan_step"], table)
    t1 = time.perf_counter()

    grid = _eval_grid(s, _grid_density(cfg))
    values = rec(grid)
    t2 = time.perf_counter()

    anchors_path = _file(cfg, out, "anchors")
    save_anchors_csv(anchors_path, rec.anchors)
    detector = AnchorDetector(meas, table)
    det_vals = detector(grid)

    truth = _load_truth(cfg, out, meas.signal_ref)
    recon_path = _file(cfg, out, "reconstruction")
    report_err = None
    tau = None
    if truth is not None:
        F = truth.eval(grid)
        pa = phase_aligned_error(F, values)
        tau = pa.tau_opt if pa.sup_err_opt <= pa.sup_err_ls else pa.tau_ls
        save_reconstruction_csv(recon_path, grid, values, F, tau)
        _write_detector_csv(
            _file(cfg, out, "detector"), grid, det_vals, np.abs(F) ** 2, rec.anchors.positions
        )
        report_err = {
            "sup_err_ls": pa.sup_err_ls,
            "sup_err_opt": pa.sup_err_opt,
            "tau_re": float(np.real(tau)),
            "tau_im": float(np.imag(tau)),
        }
    else:
        with open(recon_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "recon_re", "recon_im"])
            for i in range(grid.size):
                writer.writerow(
                    [
                        repr(float(grid[i])),
                        repr(float(values[i].real)),
                        repr(float(values[i].imag)),
                    ]
                )
        _write_detector_csv(
            _file(cfg, out, "detector"), grid, det_vals, None, rec.anchors.positions
        )

    bounds_section = None
    if truth is not None:
        try:
            dc = estimate_decay_constants(DualGeneratorSpec(meas.sigma, meas.beta))
            m = meas.lattice.N - leading_time_rows(s, r, meas.beta)
            q = meas.lattice.H - leading_frequency_columns(
                meas.lct.a, meas.beta, meas.lattice.N, meas.lattice.h
            )
            bound = local_error_bound(
                truth,
                meas.lct,
                meas.lattice,
                s,
                r,
                m,
                q,
                r,
                meas.noise_inf if meas.noise_inf is not None else 0.0,
                dc,
            )
            bounds_section = bound.report_dict()
        except (LatticeConsistencyError, ParameterError):
            bounds_section = None
    t3 = time.perf_counter()

    report = {
        "anchors_found": rec.anchors.count,
        "anchor_positions": [float(p) for p in rec.anchors.positions],
        "eta_inf": meas.noise_inf,
        "noise_delta": meas.noise_level,
        "error": report_err,
        "local_bound_at_reach": bounds_section,
        "files": {
            "reconstruction": recon_path.name,
            "anchors": anchors_path.name,
            "detector": _file(cfg, out, "detector").name,
        },
        "timings_sec": {
            "pipeline": t1 - t0,
            "evaluation": t2 - t1,
            "export": t3 - t2,
        },
    }
    _write_json(_file(cfg, out, "run_report"), report)
    msg = f"reconstruct: {rec.anchors.count} anchors"
    if report_err is not None:
        msg += f", phase-aligned sup error {report_err['sup_err_opt']:.3e}"
    print(msg)
    return 0


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def cmd_bounds(cfg: dict, out: Path) -> int:
    f = _build_signal(cfg, None)
    A = _get_lct(cfg)
    alg = _get_algorithm(cfg)
    s, r, gamma = alg["s"], alg["r"], alg["gamma"]
    sigma, beta = f.sigma, f.beta

    dc = estimate_decay_constants(DualGeneratorSpec(sigma, beta))
    D1, D2, D3, D4 = d_constants(sigma, beta, r, dc)
    C = inflated_frame_sum(sigma, beta)
    f_sup = sup_norm_upper_bound(f, s)
    j_cap = int(math.floor(4.0 * s / r)) + 2

    report: dict = {
        "decay": {"K": dc.K, "nu": dc.nu, "certified": dc.certified},
        "d_constants": {"D1": D1, "D2": D2, "D3": D3, "D4": D4},
        "frame_sum_inflated": C,
        "coeff_inf_norm": f.coeff_inf_norm,
        "signal_sup_bound": f_sup,
        "gamma": gamma,
        "gamma_tilde": 1.5 * gamma**2,
        "kappa": max(1.0, f_sup) / min(gamma, gamma**2),
        "stability": stability_constants(
            f_sup, f_sup, gamma, j_cap, r, sigma, beta, C
        ).report_dict(),
        "notes": [],
    }
    if A.a == 0.0:
        report["notes"].append(
            "a = 0: the row-coupling leading term of the column condition vanishes"
        )

    if ("lattice" in cfg) == ("epsilon" in cfg):
        raise ParameterError("config must contain exactly one of 'lattice' and 'epsilon'")
    if "epsilon" in cfg:
        plan = plan_parameters(f, gamma, s, r, float(cfg["epsilon"]), sigma, beta, A, dc)
        report["plan"] = plan.report_dict()
        report["leading_rows"] = plan.conditions["leading_rows"]
        report["leading_columns"] = plan.conditions["leading_columns"]
        report["conditions_pass"] = all(
            v["ok"] for v in plan.conditions.values() if isinstance(v, dict)
        )
    else:
        sec = cfg["lattice"]
        lattice = LatticeSpec(N=int(sec["N"]), H=int(sec["H"]), h=float(sec["h"]))
        lead_n = leading_time_rows(s, r, beta)
        lead_h = leading_frequency_columns(A.a, beta, lattice.N, lattice.h)
        m, q = lattice.N - lead_n, lattice.H - lead_h
        if m < 0 or q < 0:
            raise LatticeConsistencyError(
                f"lattice N={lattice.N}, H={lattice.H} falls below the leading "
                f"terms {lead_n}, {lead_h}"
            )
        eta_inf = float(cfg.get("noise", {}).get("eta_inf", 0.0))
        bound = local_error_bound(f, A, lattice, s, r, m, q, r, eta_inf, dc)
        report["leading_rows"] = lead_n
        report["leading_columns"] = lead_h
        report["local_bound_at_reach"] = bound.report_dict()
        report["eta_inf"] = eta_inf

    _write_json(_file(cfg, out, "bound_report"), report)
    print(f"bounds: report written to {_file(cfg, out, 'bound_report')}")
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _check(name: str, passed: bool, detail: str) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def _suite_oracle() -> list[dict]:
    sigma, beta = 1.0 / math.sqrt(2.0 * math.pi), 1.0
    matrices = [
        LctParams(2.0, 3.0, 1.0, 2.0),
        LctParams.gabor(),
        LctParams(1.0, 2.0, 0.0, 1.0),
    ]
    rng = np.random.default_rng(1105)
    checks = []
    for ai, A in enumerate(matrices):
        f = random_signal(n0=3, amplitude=1.0, seed=20 + ai, beta=beta, sigma=sigma)
        scale = sigma * math.sqrt(math.pi) * f.coeff_abs_sum
        worst = 0.0
        found = 0
        while found < 8:
            x = float(rng.uniform(-2.0, 2.0))
            t = float(A.a * x + rng.uniform(-A.b / (math.pi * sigma), A.b / (math.pi * sigma)))
            ref = stlct_quadrature_oracle(f, A, x, t)
            if abs(ref) < 1e-4 * scale:
                continue
            found += 1
            val = stlct_closed_form(f, A, x, t)
            worst = max(worst, abs(abs(val) ** 2 - abs(ref) ** 2) / abs(ref) ** 2)
        checks.append(
            _check(
                f"closed_form_vs_quadrature_matrix{ai}",
                worst <= 1e-8,
                f"max relative magnitude error {worst:.3e} (tol 1e-8)",
            )
        )
        xs = rng.uniform(-2, 2, size=50)
        ts = A.a * xs + rng.uniform(-2, 2, size=50)
        mag = magnitude_closed_form(f, A, xs, ts)
        direct = np.abs(stlct_closed_form(f, A, xs, ts)) ** 2
        gap = float(np.max(np.abs(mag - direct) / np.maximum(direct, 1e-300)))
        checks.append(
            _check(
                f"magnitude_identity_matrix{ai}",
                gap <= 1e-10,
                f"max relative gap |S|^2 vs magnitude {gap:.3e} (tol 1e-10)",
            )
        )
    return checks


def _suite_biorthogonality() -> list[dict]:
    checks = []
    for xi in (0.0, 0.7):
        spec = DualGeneratorSpec(1.0 / math.sqrt(2.0 * math.pi), 1.0, xi=xi)
        worst = max(biorthogonality_defect(spec, n) for n in range(-2, 3))
        checks.append(
            _check(
                f"biorthogonality_xi_{xi}",
                worst <= 1e-6,
                f"max defect {worst:.3e} over |n|<=2 (tol 1e-6)",
            )
        )
    return checks


def _suite_theta() -> list[dict]:
    rng = np.random.default_rng(7)
    zs = rng.uniform(-10, 10, size=20)
    worst = 0.0
    for z in zs:
        v1, v2 = theta3(z, 0.5), theta3(z + math.pi, 0.5)
        worst = max(worst, abs(v1 - v2) / abs(v1))
    checks = [
        _check("theta_pi_periodicity", worst <= 1e-12, f"max relative gap {worst:.3e}"),
    ]
    ref0, ref_half = 2.1289368272118736, 0.1211242080025805
    g0 = abs(theta3(0.0, 0.5) - ref0) / ref0
    g1 = abs(theta3(math.pi / 2.0, 0.5) - ref_half) / ref_half
    checks.append(
        _check(
            "theta_reference_values",
            max(g0, g1) <= 1e-13,
            f"relative gaps {g0:.3e}, {g1:.3e} vs series oracle",
        )
    )
    sym = max(abs(theta3(z, 0.3) - theta3(-z, 0.3)) for z in zs)
    checks.append(_check("theta_even_symmetry", sym == 0.0, f"max |even gap| {sym:.3e}"))
    return checks


def _suite_phase() -> list[dict]:
    rng = np.random.default_rng(42)
    n = 100_000
    z1 = rng.normal(size=n) + 1j * rng.normal(size=n)
    z2 = rng.normal(size=n) + 1j * rng.normal(size=n)
    lhs = np.abs(z1 / np.abs(z1) - z2 / np.abs(z2))
    rhs = 2.0 * np.abs(z1 - z2) / np.abs(z1)
    violations = int(np.sum(lhs > rhs))
    return [
        _check(
            "unimodular_difference_inequality",
            violations == 0,
            f"{violations} violations in {n} random pairs (exact comparison)",
        )
    ]


def _suite_equivariance() -> list[dict]:
    sigma, beta = 1.0 / math.sqrt(2.0 * math.pi), 1.0
    A = LctParams(2.0, 3.0, 1.0, 2.0)
    f = random_signal(n0=5, amplitude=1.0, seed=2, beta=beta, sigma=sigma)
    g = dataclasses.replace(
        f, coeffs={n: v * np.exp(0.9j) for n, v in f.coeffs.items()}
    )
    lattice = LatticeSpec(N=12, H=220, h=1.0 / 8.0)
    mf = sample_exact(f, A, lattice)
    mg = sample_exact(g, A, lattice)
    scale = float(np.max(np.abs(mf.values)))
    gap_data = float(np.max(np.abs(mf.values - mg.values))) / scale
    checks = [
        _check(
            "phase_invariance_of_measurements",
            gap_data <= 1e-12,
            f"relative data gap {gap_data:.3e} (tol 1e-12)",
        )
    ]
    s, r = 2.0, 1.0
    det = AnchorDetector(mf)
    grid = np.linspace(-s, s, 129)
    thr = 0.8 * float(np.min(det(grid)))
    if thr <= 0:
        checks.append(_check("pipeline_equivariance", False, "detector floor nonpositive"))
        return checks
    rf = reconstruct(mf, s, r, thr)
    rg = reconstruct(mg, s, r, thr)
    vals_f, vals_g = rf(grid), rg(grid)
    gap = float(np.max(np.abs(vals_f - vals_g))) / max(1.0, float(np.max(np.abs(vals_f))))
    checks.append(
        _check(
            "pipeline_equivariance",
            gap <= 1e-10,
            f"relative reconstruction gap {gap:.3e} (tol 1e-10)",
        )
    )
    return checks


def _suite_d_independence() -> list[dict]:
    sigma, beta = 1.0 / math.sqrt(2.0 * math.pi), 1.0
    f = random_signal(n0=4, amplitude=1.0, seed=5, beta=beta, sigma=sigma)
    pairs = [
        (LctParams(2.0, 3.0, 1.0, 2.0), LctParams(2.0, 3.0, 3.0, 5.0)),
        (LctParams(0.0, 1.0, -1.0, 0.0), LctParams(0.0, 1.0, -1.0, 5.0)),
    ]
    rng = np.random.default_rng(17)
    xs = rng.uniform(-3, 3, size=40)
    ts = rng.uniform(-8, 8, size=40)
    worst = 0.0
    for A1, A2 in pairs:
        m1 = magnitude_closed_form(f, A1, xs, ts)
        m2 = magnitude_closed_form(f, A2, xs, ts)
        worst = max(worst, float(np.max(np.abs(m1 - m2))))
    return [
        _check(
            "magnitude_independent_of_free_row",
            worst <= 1e-10,
            f"max absolute gap {worst:.3e} across matrices sharing (a, b) (tol 1e-10)",
        )
    ]


def _suite_stability() -> list[dict]:
    sigma, beta = 1.0 / math.sqrt(2.0 * math.pi), 1.0
    A = LctParams(2.0, 3.0, 1.0, 2.0)
    C = inflated_frame_sum(sigma, beta)
    checks = []
    for k in range(3):
        f = random_signal(n0=2, amplitude=1.0, seed=100 + k, beta=beta, sigma=sigma)
        g = random_signal(n0=2, amplitude=1.0, seed=200 + k, beta=beta, sigma=sigma)
        anchors = np.linspace(-2.0, 2.0, 6)
        fa = np.abs(f.eval(anchors))
        gamma = float(np.min(fa))
        if gamma <= 0:
            checks.append(_check(f"stability_pair{k}", False, "degenerate anchor value"))
            continue
        r = float(np.max(np.diff(anchors)))
        interval = 2.0 + r
        grid = np.linspace(-interval, interval, 257)
        lhs = phase_aligned_error(f.eval(grid), g.eval(grid)).sup_err
        sc = stability_constants(
            sup_norm_upper_bound(f, interval),
            sup_norm_upper_bound(g, interval),
            gamma,
            anchors.size,
            r,
            sigma,
            beta,
            C,
        )
        mixed = mixed_norm_discrepancy(f, g, A, suggested_row_range(f, g))
        rhs = sc.global_constant * mixed
        checks.append(
            _check(
                f"stability_pair{k}",
                lhs <= rhs,
                f"min_tau sup|f - tau g| = {lhs:.4e} <= {rhs:.4e} = constant x mixed norm",
            )
        )
    return checks


def _suite_dataset(cfg: dict | None, out: Path) -> list[dict]:
    if cfg is None:
        return [_check("dataset_check_skipped", True, "no config/dataset supplied")]
    dataset_path = _file(cfg, out, "dataset")
    if not dataset_path.exists():
        return [_check("dataset_check_skipped", True, f"no dataset at {dataset_path}")]
    meas = load_measurements(dataset_path)
    checks = [
        _check(
            "dataset_structure",
            True,
            f"{meas.values.shape[0]}x{meas.values.shape[1]} samples parsed",
        )
    ]
    truth = _load_truth(cfg, out, meas.signal_ref)
    if truth is None:
        checks.append(_check("dataset_values_skipped", True, "no ground-truth signal"))
        return checks
    if meas.noise_level > 0:
        checks.append(
            _check(
                "dataset_values_skipped",
                True,
                f"noisy dataset (delta={meas.noise_level}); value check needs exact data",
            )
        )
        return checks
    xs = meas.x_values
    ts = meas.t_values
    recomputed = magnitude_closed_form(truth, meas.lct, xs[:, None], ts[None, :])
    gap = float(np.max(np.abs(recomputed - meas.values)))
    scale = max(1.0, float(np.max(np.abs(recomputed))))
    checks.append(
        _check(
            "dataset_matches_closed_form",
            gap <= 1e-9 * scale,
            f"max |dataset - closed form| = {gap:.3e} (tol {1e-9 * scale:.1e})",
        )
    )
    return checks


_SUITES = {
    "oracle": lambda cfg, out: _suite_oracle(),
    "biorthogonality": lambda cfg, out: _suite_biorthogonality(),
    "theta": lambda cfg, out: _suite_theta(),
    "phase": lambda cfg, out: _suite_phase(),
    "equivariance": lambda cfg, out: _suite_equivariance(),
    "d_independence": lambda cfg, out: _suite_d_independence(),
    "stability": lambda cfg, out: _suite_stability(),
    "dataset": _suite_dataset,
}


def cmd_verify(cfg: dict | None, out: Path, suite: str | None) -> int:
    if suite is not None and suite not in _SUITES:
        raise ParameterError(
            f"unknown suite {suite!r}; available: {', '.join(sorted(_SUITES))}"
        )
    names = [suite] if suite is not None else list(_SUITES)
    results = {}
    all_passed = True
    first_failure = None
    for name in names:
        t0 = time.perf_counter()
        checks = _SUITES[name](cfg, out)
        passed = all(c["passed"] for c in checks)
        results[name] = {
            "passed": passed,
            "checks": checks,
            "elapsed_sec": time.perf_counter() - t0,
        }
        status = "pass" if passed else "FAIL"
        print(f"verify[{name}]: {status} ({len(checks)} checks)")
        for c in checks:
            if not c["passed"] and first_failure is None:
                first_failure = f"{name}:{c['name']}"
        all_passed &= passed
    summary = {"suites": results, "all_passed": all_passed}
    _write_json(_file(cfg or {}, out, "verify_report"), summary)
    if not all_passed:
        raise PropertyFailure(f"first failing property: {first_failure}")
    return 0


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------


def cmd_experiment(cfg: dict, out: Path, seed: int | None, threads: int, full: bool) -> int:
    f = _build_signal(cfg, seed)
    A = _get_lct(cfg)
    alg = _get_algorithm(cfg)
    lattice, _ = _resolve_lattice(cfg, f, A, alg)
    cells = (2 * lattice.N + 1) * (2 * lattice.H + 1)
    if cells >= _FULL_SCALE_CELLS and not full:
        raise ParameterError(
            f"experiment lattice has {cells} samples (>= {_FULL_SCALE_CELLS}); "
            "pass --full to run at this scale"
        )
    cmd_simulate(cfg, out, seed, threads)
    cmd_reconstruct(cfg, out, full)
    cmd_bounds(cfg, out)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stlct-phase",
        description=(
            "Simulate phaseless windowed-transform lattice measurements of "
            "Gaussian shift-invariant signals and reconstruct the signal up "
            "to a global unimodular constant."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config in (
        ("simulate", True),
        ("reconstruct", True),
        ("bounds", True),
        ("verify", False),
        ("experiment", True),
    ):
        p = sub.add_parser(name)
        p.add_argument(
            "--config",
            required=needs_config,
            default=None,
            help="path to the JSON experiment config",
        )
        p.add_argument("--out", default=None, help="output directory (default: $STLCT_PHASE_OUT or .)")
        p.add_argument("--seed", type=int, default=None, help="override signal and noise seeds")
        p.add_argument("--threads", type=int, default=1, help="worker threads for sampling")
        p.add_argument("--full", action="store_true", help="allow full-scale lattices")
        p.add_argument("--suite", default=None, help="verify: run only this property suite")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        out = _out_dir(args)
        cfg = _load_config(args.config) if args.config else None
        if args.command == "simulate":
            return cmd_simulate(cfg, out, args.seed, args.threads)
        if args.command == "reconstruct":
            return cmd_reconstruct(cfg, out, args.full)
        if args.command == "bounds":
            return cmd_bounds(cfg, out)
        if args.command == "verify":
            return cmd_verify(cfg, out, args.suite)
        if args.command == "experiment":
            return cmd_experiment(cfg, out, args.seed, args.threads, args.full)
        raise ParameterError(f"unknown command {args.command}")
    except AnchorError as exc:
        print(
            f"error: anchor selection failed: {exc}\n"
            "hint: lower gamma_tilde, increase the reach r, or reduce noise",
            file=sys.stderr,
        )
        return 3
    except InfeasibleToleranceError as exc:
        print(f"error: infeasible tolerance: {exc}", file=sys.stderr)
        return 4
    except PropertyFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except ZeroBasePointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (
        ParameterError,
        DataFormatError,
        QuadratureConfigError,
        FittingError,
        LatticeConsistencyError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
