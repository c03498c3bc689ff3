"""Unit tests for the error-bound and planning module.

The discretization-bound formulas are transliterated here a second time,
independently of the library, and both implementations are compared at
relative 1e-12 on randomized parameter sets — a deliberate dual-route
check on the most consequential arithmetic in the package.
"""

import math

import numpy as np
import pytest

from stlct_phase.bounds import (
    DiscretizationBound,
    conditioning_factor,
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
from stlct_phase.errors import (
    InfeasibleToleranceError,
    LatticeConsistencyError,
    ParameterError,
)
from stlct_phase.measurement import LatticeSpec
from stlct_phase.signal_model import random_signal, sup_norm_upper_bound
from stlct_phase.special_functions import (
    DualGeneratorSpec,
    c_sigma_beta,
    estimate_decay_constants,
)
from stlct_phase.stlct import LctParams

SIGMA = 1.0 / math.sqrt(2.0 * math.pi)
BETA = 1.0
A_MAIN = LctParams(2.0, 3.0, 1.0, 2.0)


def dual_d_constants(sigma, beta, r, K, nu):
    """Independent transliteration of the four planning constants."""
    w2 = (1.0 + 2.0 * math.sqrt(2.0 * math.pi) * sigma / beta) ** 2
    s_fac = 1.0 + 2.0 / (nu * beta)
    e_r = math.exp(r**2 / (4.0 * sigma**2))
    d1 = (4.0 * math.sqrt(math.pi) * sigma / (nu * beta)) * K * e_r * w2
    d2 = 4.0 * math.sqrt(math.pi) * K * sigma * e_r * w2 * s_fac * math.exp(1.0 + r / sigma)
    d3 = 2.0 * math.sqrt(math.pi) * K * sigma * e_r * w2 * s_fac
    d4 = 2.0 * math.sqrt(2.0) * K * e_r * s_fac
    return d1, d2, d3, d4


def dual_local_bound(f, A, lattice, s, r, m, q, xi, eta_inf, K, nu):
    """Independent transliteration of the three-term discretization bound."""
    sigma, beta = f.sigma, f.beta
    b, h = A.b, lattice.h
    c2 = f.coeff_inf_norm**2
    w2 = (1.0 + 2.0 * math.sqrt(2.0 * math.pi) * sigma / beta) ** 2
    s_fac = 1.0 + 2.0 / (nu * beta)
    front = K * math.exp(xi**2 / (4.0 * sigma**2))
    term_trunc = front * (4.0 * math.sqrt(math.pi) * sigma / (nu * beta)) * c2 * w2 * math.exp(
        -nu * beta * m / 2.0
    )
    term_noise = front * 2.0 * math.sqrt(2.0) * h * s_fac * eta_inf
    term_quad = (
        front
        * 2.0
        * math.sqrt(math.pi)
        * sigma
        * c2
        * w2
        * s_fac
        * (
            2.0 * math.exp(1.0 + abs(xi) / sigma) / math.expm1(b / (sigma * h))
            + math.exp(-2.0 * (math.pi * sigma * h * q / b) ** 2)
        )
    )
    return term_trunc, term_noise, term_quad


def test_d_constants_match_independent_transliteration():
    rng = np.random.default_rng(100)
    for _ in range(20):
        sigma = float(rng.uniform(0.25, 0.5))
        beta = 1.0
        r = float(rng.uniform(0.3, 2.0))
        dc = estimate_decay_constants(DualGeneratorSpec(sigma, beta))
        mine = d_constants(sigma, beta, r, dc)
        ref = dual_d_constants(sigma, beta, r, dc.K, dc.nu)
        for a, b in zip(mine, ref):
            assert a == pytest.approx(b, rel=1e-12)


def test_d_constant_internal_ratio():
    dc = estimate_decay_constants(DualGeneratorSpec(SIGMA, BETA))
    r = 1.5
    d1, d2, d3, d4 = d_constants(SIGMA, BETA, r, dc)
    assert d2 / d3 == pytest.approx(2.0 * math.exp(1.0 + r / SIGMA), rel=1e-13)
    assert all(v > 0 for v in (d1, d2, d3, d4))


def test_local_error_bound_matches_independent_transliteration():
    rng = np.random.default_rng(101)
    dc = estimate_decay_constants(DualGeneratorSpec(SIGMA, BETA))
    f = random_signal(n0=4, amplitude=1.0, seed=1, beta=BETA, sigma=SIGMA)
    s, r = 5.0, 1.5
    lead_n = leading_time_rows(s, r, BETA)
    for _ in range(10):
        m = int(rng.integers(0, 20))
        q = int(rng.integers(0, 80))
        h = float(rng.choice([0.25, 0.125, 0.0625]))
        lead_h = leading_frequency_columns(A_MAIN.a, BETA, lead_n + m, h)
        lattice = LatticeSpec(N=lead_n + m, H=lead_h + q, h=h)
        xi = float(rng.uniform(0.0, r))
        eta = float(rng.uniform(0.0, 1e-4))
        bound = local_error_bound(f, A_MAIN, lattice, s, r, m, q, xi, eta, dc)
        t1, t2, t3 = dual_local_bound(f, A_MAIN, lattice, s, r, m, q, xi, eta, dc.K, dc.nu)
        assert bound.term_truncation == pytest.approx(t1, rel=1e-12)
        assert bound.term_noise == pytest.approx(t2, rel=1e-12, abs=1e-300)
        assert bound.term_quadrature == pytest.approx(t3, rel=1e-12)
        assert bound.total == pytest.approx(t1 + t2 + t3, rel=1e-12)


def test_leading_terms_full_scale_values():
    # the headline configuration: sigma = 1/sqrt(2 pi), beta = 1, s = 40,
    # r = 3/2, a = 2, h = 1/16, N = 90
    assert leading_time_rows(40.0, 1.5, 1.0) == 82
    assert leading_frequency_columns(2.0, 1.0, 90, 1.0 / 16.0) == 1440


def test_local_error_bound_validation():
    dc = estimate_decay_constants(DualGeneratorSpec(SIGMA, BETA))
    f = random_signal(n0=4, amplitude=1.0, seed=1, beta=BETA, sigma=SIGMA)
    s, r = 5.0, 1.5
    lead_n = leading_time_rows(s, r, BETA)
    h = 1.0 / 16.0
    lead_h = leading_frequency_columns(A_MAIN.a, BETA, lead_n + 10, h)
    good = LatticeSpec(N=lead_n + 10, H=lead_h + 60, h=h)
    local_error_bound(f, A_MAIN, good, s, r, 10, 60, r, 0.0, dc)
    # N inconsistent with the declared margin
    bad = LatticeSpec(N=lead_n + 11, H=lead_h + 60, h=h)
    with pytest.raises(LatticeConsistencyError):
        local_error_bound(f, A_MAIN, bad, s, r, 10, 60, r, 0.0, dc)
    with pytest.raises(ParameterError):
        local_error_bound(f, A_MAIN, good, s, r, 10, 60, 2.0 * r, 0.0, dc)
    with pytest.raises(ParameterError):
        local_error_bound(f, A_MAIN, good, s, r, 10, 60, r, -1.0, dc)


def test_planner_satisfies_its_own_conditions():
    f = random_signal(n0=5, amplitude=1.0, seed=2, beta=BETA, sigma=SIGMA)
    gamma, s, r = 0.12, 5.0, 1.5
    dc = estimate_decay_constants(DualGeneratorSpec(SIGMA, BETA))
    f_sup = sup_norm_upper_bound(f, s)
    eps = min(gamma**2, gamma**3 / f_sup)
    plan = plan_parameters(f, gamma, s, r, eps, SIGMA, BETA, A_MAIN, dc)
    assert all(v["ok"] for v in plan.conditions.values() if isinstance(v, dict))
    assert plan.gamma_tilde == pytest.approx(1.5 * gamma**2, rel=1e-15)
    assert plan.kappa == pytest.approx(max(1.0, f_sup) / min(gamma, gamma**2), rel=1e-13)
    assert plan.epsilon == eps
    assert plan.h in [2.0**-j for j in range(13)]


def test_planner_round_trip_through_the_bound():
    # substituting the planned lattice back into the three-term bound must
    # come in under the budget the four conditions were built to enforce:
    # each of the three signal terms <= r eps / (16 s), the noise term
    # likewise, so the total at |xi| <= r stays below 4 r eps / (16 s)
    f = random_signal(n0=5, amplitude=1.0, seed=2, beta=BETA, sigma=SIGMA)
    gamma, s, r = 0.12, 5.0, 1.5
    dc = estimate_decay_constants(DualGeneratorSpec(SIGMA, BETA))
    f_sup = sup_norm_upper_bound(f, s)
    eps = min(gamma**2, gamma**3 / f_sup)
    plan = plan_parameters(f, gamma, s, r, eps, SIGMA, BETA, A_MAIN, dc)
    lattice = LatticeSpec(N=plan.N, H=plan.H, h=plan.h)
    bound = local_error_bound(
        f, A_MAIN, lattice, s, r, plan.m, plan.q, r, plan.eta_max, dc
    )
    budget = 4.0 * r * eps / (16.0 * s)
    assert bound.total <= budget * (1.0 + 1e-9)


def test_planner_rejects_infeasible_tolerance():
    f = random_signal(n0=5, amplitude=1.0, seed=2, beta=BETA, sigma=SIGMA)
    gamma = 0.12
    dc = estimate_decay_constants(DualGeneratorSpec(SIGMA, BETA))
    with pytest.raises(InfeasibleToleranceError):
        plan_parameters(f, gamma, 5.0, 1.5, 2.0 * gamma**2, SIGMA, BETA, A_MAIN, dc)
    with pytest.raises(InfeasibleToleranceError):
        plan_parameters(f, gamma, 5.0, 1.5, 0.0, SIGMA, BETA, A_MAIN, dc)
    with pytest.raises(ParameterError):
        plan_parameters(f, gamma, 5.0, 11.0, 1e-4, SIGMA, BETA, A_MAIN, dc)  # r > 2s
    with pytest.raises(ParameterError):
        plan_parameters(f, -0.1, 5.0, 1.5, 1e-4, SIGMA, BETA, A_MAIN, dc)


def test_conditioning_factor():
    assert conditioning_factor(2.0, 0.5) == pytest.approx(2.0 / 0.25, rel=1e-15)
    assert conditioning_factor(0.5, 2.0) == pytest.approx(1.0 / 2.0, rel=1e-15)


def test_stability_constants_structure():
    C = inflated_frame_sum(SIGMA, BETA)
    assert C == pytest.approx(1.05 * c_sigma_beta(DualGeneratorSpec(SIGMA, BETA)), rel=1e-12)
    sc10 = stability_constants(1.5, 1.2, 0.3, 10, 1.0, SIGMA, BETA, C)
    sc20 = stability_constants(1.5, 1.2, 0.3, 20, 1.0, SIGMA, BETA, C)
    # the global constant scales with ceil(J/2): doubling J doubles it
    assert sc20.global_constant / sc10.global_constant == pytest.approx(2.0, rel=1e-14)
    # transliteration of the two aggregate constants
    zeta = (2.0 / 0.3) * (2.0 * 1.5 / (3.0 * 0.3) + math.exp(1.0 / (4.0 * SIGMA**2)))
    assert sc10.zeta == pytest.approx(zeta, rel=1e-13)
    assert sc10.local_constant == pytest.approx(math.sqrt(2.0) * zeta * C, rel=1e-13)
    expected_global = (
        (16.0 * math.sqrt(2.0) / 3.0)
        * 5
        * math.exp(1.0 / (4.0 * SIGMA**2))
        * C
        * max(1.0, 1.5 + 1.2)
        / min(0.3, 0.09)
    )
    assert sc10.global_constant == pytest.approx(expected_global, rel=1e-13)
    with pytest.raises(ParameterError):
        stability_constants(1.5, 1.2, 0.0, 10, 1.0, SIGMA, BETA, C)
    with pytest.raises(ParameterError):
        stability_constants(1.5, 1.2, 0.3, 1, 1.0, SIGMA, BETA, C)


def test_mixed_norm_trivial_cases():
    f = random_signal(n0=2, amplitude=1.0, seed=3, beta=BETA, sigma=SIGMA)
    n_range = suggested_row_range(f, f)
    assert mixed_norm_discrepancy(f, f, A_MAIN, n_range) == 0.0
    # a global phase leaves every measured magnitude unchanged
    import dataclasses

    g = dataclasses.replace(
        f, coeffs={n: v * complex(math.cos(0.7), math.sin(0.7)) for n, v in f.coeffs.items()}
    )
    assert mixed_norm_discrepancy(f, g, A_MAIN, n_range) <= 1e-12


def test_mixed_norm_detects_differences():
    f = random_signal(n0=2, amplitude=1.0, seed=3, beta=BETA, sigma=SIGMA)
    g = random_signal(n0=2, amplitude=1.0, seed=4, beta=BETA, sigma=SIGMA)
    assert mixed_norm_discrepancy(f, g, A_MAIN, suggested_row_range(f, g)) > 1e-3


def test_report_dicts_are_json_ready():
    import json

    dc = estimate_decay_constants(DualGeneratorSpec(SIGMA, BETA))
    f = random_signal(n0=4, amplitude=1.0, seed=1, beta=BETA, sigma=SIGMA)
    s, r = 5.0, 1.5
    lead_n = leading_time_rows(s, r, BETA)
    h = 1.0 / 16.0
    lead_h = leading_frequency_columns(A_MAIN.a, BETA, lead_n + 10, h)
    lattice = LatticeSpec(N=lead_n + 10, H=lead_h + 60, h=h)
    bound = local_error_bound(f, A_MAIN, lattice, s, r, 10, 60, r, 0.0, dc)
    assert isinstance(bound, DiscretizationBound)
    json.dumps(bound.report_dict())
    gamma = 0.12
    eps = min(gamma**2, gamma**3 / sup_norm_upper_bound(f, s))
    plan = plan_parameters(f, gamma, s, r, eps, SIGMA, BETA, A_MAIN, dc)
    json.dumps(plan.report_dict())
    C = inflated_frame_sum(SIGMA, BETA)
    json.dumps(stability_constants(1.5, 1.2, 0.3, 10, 1.0, SIGMA, BETA, C).report_dict())
