"""Unit tests for the Gaussian shift-invariant signal model."""

import math

import numpy as np
import pytest

from stlct_phase.errors import DataFormatError, ParameterError
from stlct_phase.signal_model import (
    GaussianSisSignal,
    load_signal,
    random_signal,
    save_signal,
    signal_from_json,
    signal_to_json,
    sup_norm_on_interval,
    sup_norm_upper_bound,
)

SIGMA = 1.0 / math.sqrt(2.0 * math.pi)


def brute_eval(f: GaussianSisSignal, t: float) -> complex:
    """Independent evaluation: direct compensated sums over the coefficients."""
    re = math.fsum(
        (c.real * math.exp(-((t - f.beta * n) ** 2) / (2.0 * f.sigma**2)))
        for n, c in f.coeffs.items()
    )
    im = math.fsum(
        (c.imag * math.exp(-((t - f.beta * n) ** 2) / (2.0 * f.sigma**2)))
        for n, c in f.coeffs.items()
    )
    return complex(re, im)


def test_eval_matches_brute_force():
    f = random_signal(n0=6, amplitude=2.0, seed=10, beta=0.8, sigma=0.35)
    rng = np.random.default_rng(11)
    ts = rng.uniform(-7, 7, size=40)
    vals = f.eval(ts)
    for t, v in zip(ts, vals):
        ref = brute_eval(f, float(t))
        assert abs(v - ref) <= 1e-13 * max(1.0, abs(ref))


def test_eval_scalar_and_shapes():
    f = random_signal(n0=3, amplitude=1.0, seed=0, beta=1.0, sigma=SIGMA)
    v = f.eval(0.3)
    assert isinstance(v, complex)
    arr = f.eval(np.zeros((2, 5)))
    assert arr.shape == (2, 5)
    assert np.all(arr == f.eval(0.0))


def test_random_signal_determinism_and_range():
    f1 = random_signal(n0=5, amplitude=3.0, seed=7, beta=1.0, sigma=SIGMA)
    f2 = random_signal(n0=5, amplitude=3.0, seed=7, beta=1.0, sigma=SIGMA)
    assert f1.coeffs == f2.coeffs
    assert len(f1.coeffs) == 11
    assert set(f1.coeffs) == set(range(-5, 6))
    assert all(
        abs(c.real) <= 3.0 and abs(c.imag) <= 3.0 for c in f1.coeffs.values()
    )
    f3 = random_signal(n0=5, amplitude=3.0, seed=8, beta=1.0, sigma=SIGMA)
    assert f1.coeffs != f3.coeffs


def test_norm_helpers():
    f = random_signal(n0=4, amplitude=1.5, seed=3, beta=1.0, sigma=SIGMA)
    vals = np.abs(f.values)
    assert f.coeff_inf_norm == float(np.max(vals))
    assert f.coeff_abs_sum == pytest.approx(float(np.sum(vals)), rel=1e-15)
    assert f.n_max == 4
    s = 3.0
    lower = sup_norm_on_interval(f, s)
    upper = sup_norm_upper_bound(f, s)
    assert lower <= upper
    # the upper bound dominates a dense independent sampling
    dense = np.max(np.abs(f.eval(np.linspace(-s, s, 20001))))
    assert dense <= upper


def test_lipschitz_bound_dominates_difference_quotients():
    f = random_signal(n0=4, amplitude=1.0, seed=5, beta=1.0, sigma=SIGMA)
    L = f.lipschitz_bound()
    rng = np.random.default_rng(6)
    t1 = rng.uniform(-5, 5, size=200)
    t2 = t1 + rng.uniform(-0.05, 0.05, size=200)
    quotients = np.abs(f.eval(t1) - f.eval(t2)) / np.abs(t1 - t2)
    assert np.all(quotients <= L * (1.0 + 1e-9))


def test_tensor_product_identities():
    f = random_signal(n0=3, amplitude=1.0, seed=9, beta=1.0, sigma=SIGMA)
    t = np.linspace(-2, 2, 41)
    assert np.allclose(f.tensor_product(0.0, t), np.abs(f.eval(t)) ** 2, rtol=1e-13)
    xi = 0.6
    lhs = f.tensor_product(-xi, t)
    rhs = np.conj(f.tensor_product(xi, t + xi))
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-15)


def test_json_round_trip_exact():
    f = random_signal(n0=6, amplitude=2.0, seed=21, beta=0.75, sigma=0.3)
    g = signal_from_json(signal_to_json(f))
    assert g.beta == f.beta and g.sigma == f.sigma
    assert g.coeffs == f.coeffs


def test_save_load_round_trip(tmp_path):
    f = random_signal(n0=2, amplitude=1.0, seed=1, beta=1.0, sigma=SIGMA)
    path = tmp_path / "sig.json"
    save_signal(f, path)
    g = load_signal(path)
    assert g.coeffs == f.coeffs and g.beta == f.beta and g.sigma == f.sigma


def test_validation_errors():
    with pytest.raises(ParameterError):
        GaussianSisSignal(coeffs={0: 1.0 + 0j}, beta=0.0, sigma=SIGMA)
    with pytest.raises(ParameterError):
        GaussianSisSignal(coeffs={0: 1.0 + 0j}, beta=1.0, sigma=-1.0)
    with pytest.raises(ParameterError):
        GaussianSisSignal(coeffs={0.5: 1.0 + 0j}, beta=1.0, sigma=SIGMA)
    with pytest.raises(ParameterError):
        GaussianSisSignal(coeffs={0: complex("nan")}, beta=1.0, sigma=SIGMA)
    with pytest.raises(ParameterError):
        random_signal(n0=-1, amplitude=1.0, seed=0, beta=1.0, sigma=SIGMA)
    # the empty signal is deliberately allowed and evaluates to zero
    empty = GaussianSisSignal(coeffs={}, beta=1.0, sigma=SIGMA)
    assert empty.coeff_inf_norm == 0.0 and empty.eval(0.3) == 0.0


def test_malformed_json_rejected():
    with pytest.raises(DataFormatError):
        signal_from_json("{not json")
    with pytest.raises(DataFormatError):
        signal_from_json('{"beta": 1.0, "sigma": 0.4}')
