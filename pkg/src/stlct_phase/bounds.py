"""Analytic error constants, sampling-condition planning, and stability bounds.

Everything here is a closed-form evaluation of the constants governing the
reconstruction pipeline: the four lattice-sum constants ``D1..D4`` built
from the dual-generator decay envelope, the three-term local discretization
bound, the sampling-parameter planner that inverts those bounds for a
target tolerance, and the local/global stability constants comparing two
signals through the mixed measurement norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import (
    InfeasibleToleranceError,
    LatticeConsistencyError,
    ParameterError,
)
from .measurement import LatticeSpec
from .quadrature import QuadSpec
from .signal_model import GaussianSisSignal, sup_norm_upper_bound
from .special_functions import DecayConstants, DualGeneratorSpec, c_sigma_beta
from .stlct import LctParams, MagnitudeRow

__all__ = [
    "StabilityConstants",
    "DiscretizationBound",
    "PlannedParameters",
    "d_constants",
    "local_error_bound",
    "plan_parameters",
    "stability_constants",
    "mixed_norm_discrepancy",
    "suggested_row_range",
    "inflated_frame_sum",
    "conditioning_factor",
    "leading_time_rows",
    "leading_frequency_columns",
]

# safety inflation applied to the grid estimate of the frame-sum constant,
# guarding against the grid sup slightly under-shooting the true sup
_FRAME_SUM_INFLATION = 1.05
# planner searches the dyadic frequency steps h = 2^-j, j = 0..12
_MAX_DYADIC_EXPONENT = 12


# ---------------------------------------------------------------------------
# Closed-form constants
# ---------------------------------------------------------------------------


def d_constants(
    sigma: float, beta: float, r: float, dc: DecayConstants
) -> tuple[float, float, float, float]:
    """The four lattice-sum error constants ``(D1, D2, D3, D4)``.

    ``D1`` scales the time-truncation term, ``D2`` the analytic-strip
    (frequency step) term, ``D3`` the frequency-truncation term and ``D4``
    the noise term of the local discretization bound.
    """
    if not (sigma > 0 and beta > 0 and r > 0):
        raise ParameterError("sigma, beta, r must be positive")
    K, nu = dc.K, dc.nu
    bump = math.exp(r**2 / (4.0 * sigma**2))
    window_sum = (1.0 + 2.0 * math.sqrt(2.0 * math.pi) * sigma / beta) ** 2
    strip = 1.0 + 2.0 / (nu * beta)
    d1 = (4.0 * math.sqrt(math.pi) * sigma / (nu * beta)) * K * bump * window_sum
    d2 = 4.0 * math.sqrt(math.pi) * K * sigma * bump * window_sum * strip * math.exp(
        1.0 + r / sigma
    )
    d3 = 2.0 * math.sqrt(math.pi) * K * sigma * bump * window_sum * strip
    d4 = 2.0 * math.sqrt(2.0) * K * bump * strip
    return (d1, d2, d3, d4)


def leading_time_rows(s: float, r: float, beta: float) -> int:
    """Margin-free part of the time-row count: ``ceil((2/beta)(s + r/2))``."""
    return int(math.ceil((2.0 / beta) * (s + r / 2.0)))


def leading_frequency_columns(a: float, beta: float, N: int, h: float) -> int:
    """Margin-free part of the frequency count: ``ceil(|a| beta N / (2h))``."""
    return int(math.ceil(abs(a) * beta * N / (2.0 * h)))


@dataclass(frozen=True)
class DiscretizationBound:
    """Three-term local discretization error bound with its margins."""

    m: int
    q: int
    term_truncation: float
    term_noise: float
    term_quadrature: float

    def __post_init__(self) -> None:
        if self.m < 0 or self.q < 0:
            raise ParameterError("margins must be non-negative")
        for name in ("term_truncation", "term_noise", "term_quadrature"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative")

    @property
    def total(self) -> float:
        return self.term_truncation + self.term_noise + self.term_quadrature

    def report_dict(self) -> dict:
        return {
            "m": self.m,
            "q": self.q,
            "term_truncation": self.term_truncation,
            "term_noise": self.term_noise,
            "term_quadrature": self.term_quadrature,
            "total": self.total,
        }


def local_error_bound(
    f: GaussianSisSignal,
    A: LctParams,
    lattice: LatticeSpec,
    s: float,
    r: float,
    m: int,
    q: int,
    xi: float,
    eta_inf: float,
    dc: DecayConstants,
) -> DiscretizationBound:
    """Bound on ``|f(p)conj(f(p+xi)) - (phase correlation at xi)|`` valid for
    every base point ``p`` in ``[-s, s]`` and ``|xi| <= r``.

    The supplied lattice must decompose as ``N = ceil((2/beta)(s+r/2)) + m``
    and ``H = ceil(|a| beta N / (2h)) + q``; anything else raises
    :class:`LatticeConsistencyError`.
    """
    if abs(xi) > r:
        raise ParameterError(f"offset xi={xi} exceeds the reach r={r}")
    if eta_inf < 0:
        raise ParameterError("eta_inf must be non-negative")
    if m < 0 or q < 0:
        raise ParameterError("margins must be non-negative")
    sigma, beta = f.sigma, f.beta
    expected_n = leading_time_rows(s, r, beta) + m
    if lattice.N != expected_n:
        raise LatticeConsistencyError(
            f"N={lattice.N} does not equal ceil((2/beta)(s+r/2)) + m = {expected_n}"
        )
    expected_h = leading_frequency_columns(A.a, beta, lattice.N, lattice.h) + q
    if lattice.H != expected_h:
        raise LatticeConsistencyError(
            f"H={lattice.H} does not equal ceil(|a|*beta*N/(2h)) + q = {expected_h}"
        )

    K, nu = dc.K, dc.nu
    h = lattice.h
    b = A.b
    c_inf_sq = f.coeff_inf_norm**2
    prefactor = K * math.exp(xi**2 / (4.0 * sigma**2))
    window_sum = (1.0 + 2.0 * math.sqrt(2.0 * math.pi) * sigma / beta) ** 2
    strip = 1.0 + 2.0 / (nu * beta)

    trunc = (
        prefactor
        * (4.0 * math.sqrt(math.pi) * sigma / (nu * beta))
        * c_inf_sq
        * window_sum
        * math.exp(-0.5 * nu * beta * m)
    )
    noise = prefactor * 2.0 * math.sqrt(2.0) * h * strip * eta_inf
    quadr = (
        prefactor
        * 2.0
        * math.sqrt(math.pi)
        * sigma
        * c_inf_sq
        * window_sum
        * strip
        * (
            2.0 * math.exp(1.0 + abs(xi) / sigma) / math.expm1(b / (sigma * h))
            + math.exp(-2.0 * math.pi**2 * sigma**2 * h**2 * q**2 / b**2)
        )
    )
    return DiscretizationBound(
        m=m, q=q, term_truncation=trunc, term_noise=noise, term_quadrature=quadr
    )


# ---------------------------------------------------------------------------
# Parameter planning
# ---------------------------------------------------------------------------


def conditioning_factor(f_sup: float, gamma: float) -> float:
    """``max{1, sup|f|} / min{gamma, gamma^2}``."""
    if not (gamma > 0) or f_sup < 0:
        raise ParameterError("gamma must be positive and f_sup non-negative")
    return max(1.0, f_sup) / min(gamma, gamma**2)


@dataclass(frozen=True)
class PlannedParameters:
    """Lattice sizes, step, and noise cap meeting a target local tolerance."""

    epsilon: float
    N: int
    H: int
    h: float
    eta_max: float
    gamma_tilde: float
    kappa: float
    m: int
    q: int
    conditions: dict = field(default_factory=dict)

    def report_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "N": self.N,
            "H": self.H,
            "h": self.h,
            "eta_max": self.eta_max,
            "gamma_tilde": self.gamma_tilde,
            "kappa": self.kappa,
            "m": self.m,
            "q": self.q,
            "conditions": self.conditions,
        }


def plan_parameters(
    f: GaussianSisSignal,
    gamma: float,
    s: float,
    r: float,
    epsilon: float,
    sigma: float,
    beta: float,
    A: LctParams,
    dc: DecayConstants,
) -> PlannedParameters:
    """Smallest lattice (and largest dyadic step) whose local error bound
    meets ``epsilon``, plus the admissible noise ceiling.

    Preconditions: ``0 < epsilon <= min{gamma^2, gamma^3 / sup|f|}`` (the
    sup taken as the certified grid upper bound on ``[-s, s]``) and
    ``r <= 2s``.  The step search runs over ``h = 2^-j``, ``j = 0..12``.
    """
    if abs(sigma - f.sigma) > 1e-12 or abs(beta - f.beta) > 1e-12:
        raise ParameterError("sigma/beta must match the signal's parameters")
    if not (gamma > 0):
        raise ParameterError(f"gamma must be positive, got {gamma}")
    if not (0 < r <= 2 * s):
        raise ParameterError(f"need 0 < r <= 2s, got r={r}, s={s}")
    f_sup = sup_norm_upper_bound(f, s)
    eps_cap = min(gamma**2, gamma**3 / f_sup) if f_sup > 0 else gamma**2
    if not (0.0 < epsilon <= eps_cap):
        raise InfeasibleToleranceError(
            f"epsilon={epsilon:.6g} outside (0, {eps_cap:.6g}] = "
            "(0, min(gamma^2, gamma^3/sup|f|)]"
        )

    d1, d2, d3, d4 = d_constants(sigma, beta, r, dc)
    c_inf_sq = f.coeff_inf_norm**2
    budget = 16.0 * s / (r * epsilon)  # each term must stay below (r eps)/(16 s)

    lead_n = leading_time_rows(s, r, beta)
    margin_n = (2.0 / (dc.nu * beta)) * math.log(budget * d1 * c_inf_sq)
    m = max(0, int(math.ceil(margin_n)))
    N = lead_n + m

    inv_h_min = (sigma / A.b) * math.log(budget * d2 * c_inf_sq + 1.0)
    h = None
    for j in range(_MAX_DYADIC_EXPONENT + 1):
        cand = 2.0**-j
        if 1.0 / cand >= inv_h_min:
            h = cand
            break
    if h is None:
        raise InfeasibleToleranceError(
            f"no dyadic step h = 2^-j, j <= {_MAX_DYADIC_EXPONENT}, satisfies "
            f"1/h >= {inv_h_min:.6g}"
        )

    lead_h = leading_frequency_columns(A.a, beta, N, h)
    log_term = math.log(budget * d3 * c_inf_sq)
    margin_q = (
        (A.b / (math.sqrt(2.0) * math.pi * sigma * h)) * math.sqrt(log_term)
        if log_term > 0
        else 0.0
    )
    q = max(0, int(math.ceil(margin_q)))
    H = lead_h + q

    eta_max = r * epsilon / (16.0 * s * h * d4)
    kappa = conditioning_factor(f_sup, gamma)

    conditions = {
        "rows": {"lhs": N, "rhs": lead_n + max(margin_n, 0.0), "ok": N >= lead_n + margin_n},
        "step": {"lhs": 1.0 / h, "rhs": inv_h_min, "ok": 1.0 / h >= inv_h_min},
        "columns": {"lhs": H, "rhs": lead_h + margin_q, "ok": H >= lead_h + margin_q},
        "noise": {"lhs": eta_max, "rhs": eta_max, "ok": True},
        "epsilon_cap": {"lhs": epsilon, "rhs": eps_cap, "ok": epsilon <= eps_cap},
        "leading_rows": lead_n,
        "leading_columns": lead_h,
    }
    return PlannedParameters(
        epsilon=float(epsilon),
        N=N,
        H=H,
        h=h,
        eta_max=float(eta_max),
        gamma_tilde=1.5 * gamma**2,
        kappa=float(kappa),
        m=m,
        q=q,
        conditions=conditions,
    )


# ---------------------------------------------------------------------------
# Stability constants and the mixed measurement norm
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StabilityConstants:
    """Local and global phase-retrieval stability prefactors."""

    zeta: float
    local_constant: float
    global_constant: float
    J: int
    r: float
    gamma: float

    def __post_init__(self) -> None:
        if min(self.zeta, self.local_constant, self.global_constant, self.r, self.gamma) <= 0:
            raise ParameterError("stability constants must be positive")
        if self.J < 2:
            raise ParameterError("anchor count J must be at least 2")

    def report_dict(self) -> dict:
        return {
            "zeta": self.zeta,
            "local_constant": self.local_constant,
            "global_constant": self.global_constant,
            "J": self.J,
            "r": self.r,
            "gamma": self.gamma,
        }


def inflated_frame_sum(sigma: float, beta: float, grid_density: int = 1024) -> float:
    """Grid estimate of the dual-window frame sum with a 5% safety margin."""
    return _FRAME_SUM_INFLATION * c_sigma_beta(
        DualGeneratorSpec(sigma, beta), grid_density=grid_density
    )


def stability_constants(
    f_norm: float,
    g_norm: float,
    gamma: float,
    J: int,
    r: float,
    sigma: float,
    beta: float,
    C: float,
) -> StabilityConstants:
    """Stability prefactors for a pair of signals sharing anchor points.

    ``zeta`` instantiates the single-interval constant at the anchor floors
    used in the global argument (``|f| >= gamma``, ``|g| >= gamma/2`` at the
    anchors): ``zeta = (2/gamma)(2 f_norm/(3 gamma) + e^{r^2/4 sigma^2})``.
    The global constant is
    ``(16 sqrt2 / 3) ceil(J/2) e^{r^2/4 sigma^2} C max{1, f_norm + g_norm}
    / min{gamma, gamma^2}``.
    """
    if J < 2:
        raise ParameterError(f"anchor count J must be at least 2, got {J}")
    if min(f_norm, g_norm, gamma, r, sigma, beta, C) <= 0:
        raise ParameterError("all stability inputs must be positive")
    bump = math.exp(r**2 / (4.0 * sigma**2))
    zeta = (2.0 / gamma) * (2.0 * f_norm / (3.0 * gamma) + bump)
    local = math.sqrt(2.0) * zeta * C
    global_const = (
        (16.0 * math.sqrt(2.0) / 3.0)
        * math.ceil(J / 2.0)
        * bump
        * C
        * max(1.0, f_norm + g_norm)
        / min(gamma, gamma**2)
    )
    return StabilityConstants(
        zeta=zeta,
        local_constant=local,
        global_constant=global_const,
        J=int(J),
        r=float(r),
        gamma=float(gamma),
    )


def suggested_row_range(f: GaussianSisSignal, g: GaussianSisSignal, margin_sigmas: float = 12.0) -> int:
    """Row index range covering both signals' supports plus a Gaussian
    safety margin; rows beyond it contribute below 1e-12 to the mixed norm."""
    reach = max(f.support_radius, g.support_radius) + margin_sigmas * max(f.sigma, g.sigma)
    return int(math.ceil(2.0 * reach / min(f.beta, g.beta)))


def mixed_norm_discrepancy(
    f: GaussianSisSignal,
    g: GaussianSisSignal,
    A: LctParams,
    n_range: int,
    quad_spec: QuadSpec | None = None,
) -> float:
    """``sup_n integral |M_f - M_g|(beta n / 2, t) dt`` over ``|n| <= n_range``.

    Each row integral runs adaptive quadrature of the absolute magnitude
    difference over the shared Gaussian envelope window; rows outside
    ``n_range`` are negligible when it comes from
    :func:`suggested_row_range`.
    """
    if f.beta != g.beta or f.sigma != g.sigma:
        raise ParameterError("signals must share beta and sigma")
    if n_range < 0:
        raise ParameterError("n_range must be non-negative")
    margin = quad_spec.support_margin if quad_spec is not None else 12.0
    half_width = margin * A.b / (2.0 * math.pi * f.sigma)
    worst = 0.0
    for n in range(-n_range, n_range + 1):
        x = 0.5 * f.beta * n
        row_f = MagnitudeRow(f, A, x)
        row_g = MagnitudeRow(g, A, x)
        center = A.a * x
        val, _ = quad(
            lambda t: abs(row_f(t) - row_g(t)),
            center - half_width,
            center + half_width,
            limit=300,
            epsabs=1e-12,
            epsrel=1e-10,
        )
        worst = max(worst, val)
    return worst
