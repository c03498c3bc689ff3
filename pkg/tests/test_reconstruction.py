"""Unit tests for the reconstruction pipeline: detector, anchor selection,
phase correlations, stitching, and the semidiscrete cross-check."""

import math

import numpy as np
import pytest

from stlct_phase.errors import (
    AnchorGapError,
    EndpointError,
    ParameterError,
)
from stlct_phase.measurement import LatticeSpec, sample_exact
from stlct_phase.reconstruction import (
    AnchorDetector,
    AnchorSet,
    ReconstructionEngine,
    phase_aligned_error,
    phase_correlation,
    reconstruct,
    reconstruct_semidiscrete,
    select_anchors,
)
from stlct_phase.signal_model import GaussianSisSignal, random_signal
from stlct_phase.stlct import LctParams

SIGMA = 1.0 / math.sqrt(2.0 * math.pi)
BETA = 1.0
A_MAIN = LctParams(2.0, 3.0, 1.0, 2.0)
S, R = 3.0, 1.0

_CACHE = {}


def pipeline_setup():
    """One moderately sized dataset shared by the pipeline tests."""
    if "m" not in _CACHE:
        f = random_signal(n0=8, amplitude=1.0, seed=3, beta=BETA, sigma=SIGMA)
        lattice = LatticeSpec(N=15, H=280, h=1.0 / 16.0)
        _CACHE["f"] = f
        _CACHE["m"] = sample_exact(f, A_MAIN, lattice)
    return _CACHE["f"], _CACHE["m"]


def test_detector_approximates_squared_modulus():
    f, m = pipeline_setup()
    det = AnchorDetector(m)
    t = np.linspace(-S, S, 241)
    err = np.max(np.abs(det(t) - np.abs(f.eval(t)) ** 2))
    assert err <= 5e-3


def test_phase_correlation_approximates_tensor_product():
    f, m = pipeline_setup()
    p = 0.5
    xi = np.linspace(0.0, R, 9)
    est = phase_correlation(m, p, xi)
    expected = f.eval(p) * np.conj(f.eval(p + xi))
    scale = max(1.0, float(np.max(np.abs(expected))))
    assert float(np.max(np.abs(est - expected))) <= 1e-3 * scale


def test_greedy_anchor_properties():
    f, m = pipeline_setup()
    det = AnchorDetector(m)
    grid = np.linspace(-S, S, 481)
    threshold = 0.6 * float(np.min(det(grid)))
    anchors = select_anchors(det, S, R, threshold)
    assert anchors.positions[0] == -S
    assert anchors.positions[-1] == S
    assert np.all(anchors.detector_values >= threshold)
    assert np.all(anchors.gaps <= R * (1.0 + 1e-9))
    # greedy maximality: skipping one anchor always spans more than the reach
    if anchors.count >= 3:
        two_step = anchors.positions[2:] - anchors.positions[:-2]
        assert np.all(two_step >= R * (1.0 - 1e-9))


def test_endpoint_error_when_interval_edge_is_dark():
    f, m = pipeline_setup()
    det = AnchorDetector(m)
    huge = 10.0 * float(np.max(det(np.linspace(-S, S, 241))))
    with pytest.raises(EndpointError):
        select_anchors(det, S, R, huge)


def test_anchor_gap_error_on_dead_zone():
    # two bumps at t = -3 and t = 3 with a dark valley much wider than the
    # reach; both endpoints clear the threshold, the valley cannot
    f = GaussianSisSignal(coeffs={-3: 1.0 + 0j, 3: 1.0 + 0j}, beta=1.0, sigma=SIGMA)
    A = LctParams.gabor()
    m = sample_exact(f, A, LatticeSpec(N=8, H=60, h=0.25))
    det = AnchorDetector(m)
    with pytest.raises(AnchorGapError) as err:
        select_anchors(det, 3.0, 1.0, 0.3)
    assert "no admissible anchor" in str(err.value)


def test_select_anchors_parameter_validation():
    f, m = pipeline_setup()
    det = AnchorDetector(m)
    with pytest.raises(ParameterError):
        select_anchors(det, -1.0, R, 0.05)
    with pytest.raises(ParameterError):
        select_anchors(det, S, 0.0, 0.05)
    with pytest.raises(ParameterError):
        select_anchors(det, S, R, 0.0)
    with pytest.raises(ParameterError):
        select_anchors(det, S, R, 0.05, scan_step=R)  # coarser than r/16


def test_anchor_set_validation():
    with pytest.raises(ParameterError):
        AnchorSet(np.array([0.0]), np.array([1.0]), 0.5, 1.0, 0.01)
    with pytest.raises(ParameterError):
        AnchorSet(np.array([0.0, 0.0]), np.array([1.0, 1.0]), 0.5, 1.0, 0.01)
    with pytest.raises(ParameterError):
        AnchorSet(np.array([0.0, 1.0]), np.array([1.0]), 0.5, 1.0, 0.01)


def test_transition_factors_are_unimodular():
    f, m = pipeline_setup()
    det = AnchorDetector(m)
    grid = np.linspace(-S, S, 481)
    threshold = 0.6 * float(np.min(det(grid)))
    anchors = select_anchors(det, S, R, threshold)
    engine = ReconstructionEngine(m, anchors)
    rho = engine.transition_factors()
    assert rho.shape == (anchors.count - 1,)
    assert float(np.max(np.abs(np.abs(rho) - 1.0))) <= 1e-12


def test_full_pipeline_accuracy():
    f, m = pipeline_setup()
    det = AnchorDetector(m)
    grid = np.linspace(-S, S, 241)
    threshold = 0.6 * float(np.min(det(grid)))
    rec = reconstruct(m, S, R, threshold)
    values = rec(grid)
    pa = phase_aligned_error(f.eval(grid), values)
    assert pa.sup_err <= 5e-3
    # the reconstruction carries an arbitrary global phase, so the raw
    # (unaligned) error is allowed to be large; alignment is what matters
    assert pa.sup_err <= np.max(np.abs(f.eval(grid) - values)) + 1e-15


def test_reconstruction_domain_is_enforced():
    f, m = pipeline_setup()
    det = AnchorDetector(m)
    grid = np.linspace(-S, S, 241)
    threshold = 0.6 * float(np.min(det(grid)))
    rec = reconstruct(m, S, R, threshold)
    lo = rec.anchors.positions[0]
    hi = rec.anchors.positions[-1]
    with pytest.raises(ParameterError):
        rec(np.array([lo - 0.5]))
    with pytest.raises(ParameterError):
        rec(np.array([hi + 0.5]))
    # interior evaluation works and is finite
    assert np.all(np.isfinite(rec(np.array([lo, 0.0, hi]))))


def test_semidiscrete_route_matches_truth():
    # the continuous-measurement (quadrature) route is an independent oracle
    # for the lattice-sum estimator it cross-checks
    f = random_signal(n0=2, amplitude=1.0, seed=77, beta=BETA, sigma=SIGMA)
    grid = np.linspace(-2, 2, 81)
    p = float(grid[np.argmax(np.abs(f.eval(grid)))])
    xi = np.array([0.0, 0.35, 0.7])
    est = reconstruct_semidiscrete(f, A_MAIN, p, xi)
    expected = f.eval(p + xi)
    assert float(np.max(np.abs(est - expected))) <= 1e-6


def test_phase_alignment_recovers_synthetic_rotation():
    rng = np.random.default_rng(90)
    truth = rng.normal(size=50) + 1j * rng.normal(size=50)
    tau = complex(math.cos(1.1), math.sin(1.1))
    recon = np.conj(tau) * truth  # truth == tau * recon exactly
    pa = phase_aligned_error(truth, recon)
    assert pa.sup_err <= 1e-13 * float(np.max(np.abs(truth)))
    best = pa.tau_opt if pa.sup_err_opt <= pa.sup_err_ls else pa.tau_ls
    assert abs(best - tau) <= 1e-6
    assert pa.sup_err == min(pa.sup_err_ls, pa.sup_err_opt)


def test_csv_writers(tmp_path):
    import csv

    from stlct_phase.reconstruction import save_anchors_csv, save_reconstruction_csv

    f, m = pipeline_setup()
    det = AnchorDetector(m)
    grid = np.linspace(-S, S, 25)
    threshold = 0.6 * float(np.min(det(np.linspace(-S, S, 241))))
    rec = reconstruct(m, S, R, threshold)
    values = rec(grid)
    truth = f.eval(grid)
    pa = phase_aligned_error(truth, values)

    rpath = tmp_path / "rec.csv"
    save_reconstruction_csv(rpath, grid, values, truth, pa.tau_ls)
    rows = list(csv.reader(rpath.open()))
    assert rows[0] == [
        "t",
        "recon_re",
        "recon_im",
        "signal_re",
        "signal_im",
        "aligned_residual",
    ]
    assert len(rows) == grid.size + 1
    # values round-trip exactly through repr
    assert float(rows[1][0]) == grid[0]
    assert float(rows[1][1]) == values[0].real

    apath = tmp_path / "anchors.csv"
    save_anchors_csv(apath, rec.anchors)
    arows = list(csv.reader(apath.open()))
    assert arows[0] == ["j", "position", "detector_value"]
    assert len(arows) == rec.anchors.count + 1
    assert int(arows[1][0]) == 1
