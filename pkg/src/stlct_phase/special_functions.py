"""Special functions for Gaussian shift-invariant signal analysis.

This module provides the analytic machinery behind the reconstruction
pipeline:

* the third Jacobi theta function ``theta3(z, c) = sum_n c^{n^2} e^{2inz}``;
* the frequency-domain profile ``Lambda(t) = exp(-pi^2 sigma^2 t^2) /
  theta3(beta*pi*t/2, exp(-beta^2/(8 sigma^2)))`` whose inverse Fourier
  transform generates the dual window of the Gaussian on the half-density
  lattice ``(beta/2) Z``;
* the dual generator ``dual_gen_xi(t) = sqrt(2) * exp(xi^2/(4 sigma^2)) *
  invF(Lambda)(t - xi/2)``, biorthogonal to the Gaussian tensor-product
  windows on that lattice;
* an exponential decay envelope ``|invF(Lambda)(t)| <= K exp(-nu |t|)``,
  either certified (inside the parameter regime where the constants
  ``K = 205/sigma``, ``nu = 1/4`` are proven) or fitted numerically;
* the lattice absolute-sum constant
  ``C(sigma, beta) = sup_t sum_n |invF(Lambda)(t - beta*n/2)|`` entering all
  stability and discretisation bounds;
* the Gaussian periodization ``sqrt(pi)*sigma*beta *
  theta3(pi*beta*t, exp(-beta^2/(4 sigma^2)))`` whose strict positivity is
  what makes the Gaussian a Riesz generator.

``invF`` denotes the inverse Fourier transform with the convention
``invF(g)(t) = integral g(u) exp(+2*pi*i*u*t) du``; since ``Lambda`` is real
and even, ``invF(Lambda)`` is real and even as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import FittingError, ParameterError, QuadratureConfigError
from .quadrature import QuadSpec, trapezoid_nodes

__all__ = [
    "DualGeneratorSpec",
    "DecayConstants",
    "FourierLambdaTable",
    "theta3",
    "lambda_fn",
    "inv_fourier_lambda",
    "build_table",
    "dual_generator",
    "estimate_decay_constants",
    "c_sigma_beta",
    "riesz_periodization",
    "biorthogonality_defect",
]

#: Truncation level for the effective support of invF(Lambda) tables.
_SUPPORT_TOL = 1e-13

#: Target absolute accuracy of the cubic interpolation table.
_INTERP_TOL = 1e-9


@dataclass(frozen=True)
class DualGeneratorSpec:
    """Parameters of the Gaussian generator and its dual.

    Attributes
    ----------
    sigma:
        Width of the Gaussian window ``exp(-t^2 / (2 sigma^2))``.
    beta:
        Step of the coefficient lattice ``beta * Z``; the dual generator
        lives on the half-density lattice ``(beta/2) * Z``.
    xi:
        Separation of the two window copies in the tensor product; the
        dual generator depends on it through a shift by ``xi/2`` and the
        amplitude factor ``exp(xi^2/(4 sigma^2))``.
    """

    sigma: float
    beta: float
    xi: float = 0.0

    def __post_init__(self) -> None:
        if not (self.sigma > 0.0) or not math.isfinite(self.sigma):
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if not (self.beta > 0.0) or not math.isfinite(self.beta):
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if not math.isfinite(self.xi):
            raise ParameterError(f"xi must be finite, got {self.xi}")

    @property
    def nome(self) -> float:
        """Theta nome ``exp(-beta^2/(8 sigma^2))`` of the Lambda profile."""
        return math.exp(-self.beta**2 / (8.0 * self.sigma**2))

    def window(self, t: np.ndarray | float) -> np.ndarray | float:
        """Gaussian window ``exp(-t^2/(2 sigma^2))``."""
        t = np.asarray(t, dtype=float)
        return np.exp(-(t**2) / (2.0 * self.sigma**2))


@dataclass(frozen=True)
class DecayConstants:
    """Exponential envelope ``|invF(Lambda)(t)| <= K exp(-nu |t|)``.

    ``certified`` is True when the constants come from the proven regime
    ``beta/4 <= sigma <= beta/2 <= 1`` (where ``K = 205/sigma`` and
    ``nu = 1/4``), False when they were fitted numerically.
    """

    K: float
    nu: float
    certified: bool
    fit_samples: int = 0

    def envelope(self, t: np.ndarray | float) -> np.ndarray | float:
        return self.K * np.exp(-self.nu * np.abs(np.asarray(t, dtype=float)))


# ---------------------------------------------------------------------------
# Jacobi theta function
# ---------------------------------------------------------------------------


def theta3(z: np.ndarray | float, c: float, tol: float = 1e-14):
    """Third Jacobi theta function ``sum_{n in Z} c^{n^2} exp(2 i n z)``.

    Evaluated for real ``z`` (where the sum collapses to
    ``1 + 2 sum_{n>=1} c^{n^2} cos(2 n z)`` and is real) and nome
    ``c in (0, 1)``.  The series is truncated once a geometric majorant of
    the tail drops below ``tol`` relative to the partial sum's magnitude,
    so the first omitted term is below ``tol``.

    Raises
    ------
    ParameterError
        If ``c`` is outside the open interval (0, 1), ``tol`` is not
        positive, or ``c`` is so close to 1 that the series cannot be
        truncated in a reasonable number of terms.
    """
    if not (0.0 < c < 1.0):
        raise ParameterError(f"theta nome must lie in (0, 1), got {c}")
    if not (tol > 0.0):
        raise ParameterError(f"truncation tolerance must be positive, got {tol}")
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)

    total = np.ones_like(z_arr)
    log_c = math.log(c)
    n = 1
    while True:
        term_mag = math.exp(log_c * n * n)  # c^{n^2}
        if term_mag == 0.0:
            break
        total = total + (2.0 * term_mag) * np.cos((2.0 * n) * z_arr)
        # Tail after n terms is bounded by the geometric series starting at
        # the next term: 2 c^{(n+1)^2} / (1 - c^{2n+3}).
        next_mag = math.exp(log_c * (n + 1) * (n + 1))
        tail = 2.0 * next_mag / (1.0 - math.exp(log_c * (2 * n + 3)))
        # Compare against the partial sum's magnitude, floored to keep the
        # criterion meaningful near the zeros-adjacent minima of theta3.
        floor = max(float(np.min(np.abs(total))), 1e-300)
        if tail <= tol * floor:
            break
        n += 1
        if n > 100_000:
            raise ParameterError(
                f"theta3 series truncation needs more than 1e5 terms (c={c}); "
                "nome too close to 1"
            )
    return float(total[0]) if scalar else total


# ---------------------------------------------------------------------------
# Lambda profile and its inverse Fourier transform
# ---------------------------------------------------------------------------


def lambda_fn(spec: DualGeneratorSpec, t: np.ndarray | float):
    """Frequency profile ``exp(-pi^2 sigma^2 t^2) / theta3(beta*pi*t/2, nome)``.

    Real, even, strictly positive, and Gaussian-dominated:
    ``0 < lambda_fn(t) <= exp(-pi^2 sigma^2 t^2) / theta_min`` with
    ``theta_min = theta3(pi/2, nome) > 0``.
    """
    t_arr = np.asarray(t, dtype=float)
    num = np.exp(-((math.pi * spec.sigma) ** 2) * t_arr**2)
    den = theta3(0.5 * spec.beta * math.pi * t_arr, spec.nome)
    return num / den


def _theta_min(spec: DualGeneratorSpec) -> float:
    """Minimum of theta3(., nome) over the reals (attained at z = pi/2)."""
    return float(theta3(0.5 * math.pi, spec.nome))


def _lambda_integral_bound(spec: DualGeneratorSpec) -> float:
    """Rigorous upper bound for ``integral Lambda = invF(Lambda)(0)``."""
    return 1.0 / (spec.sigma * math.sqrt(math.pi) * _theta_min(spec))


def _default_cutoff(spec: DualGeneratorSpec) -> float:
    """Window half-width: Gaussian tail of Lambda below exp(-64)."""
    return max(8.0 / (math.pi * spec.sigma), 6.0)


def _lambda_integral(spec: DualGeneratorSpec) -> float:
    """Cheap accurate value of ``integral Lambda`` (coarse-rule trapezoid)."""
    cutoff = _default_cutoff(spec)
    nodes, weights = trapezoid_nodes(cutoff, cutoff / 4096.0)
    return float(weights @ lambda_fn(spec, nodes))


def _alias_safe_step(spec: DualGeneratorSpec, t_max: float, amp: float) -> float:
    """Trapezoid step so images of invF(Lambda) aliased from ``+-1/step``
    contribute below 1e-13 for all ``|t| <= t_max``.

    Uses the safety-halved analytic-strip decay rate ``beta/(8 sigma^2)``
    and the amplitude bound ``sup |invF(Lambda)| <= integral Lambda``.
    """
    nu_safe = spec.beta / (8.0 * spec.sigma**2)
    k_est = max(1.5 * amp, 1.0)
    clearance = math.log(k_est / _SUPPORT_TOL) / nu_safe
    return 1.0 / (abs(t_max) + clearance)


def _resolve_trapezoid(
    spec: DualGeneratorSpec, t_max: float, quad: QuadSpec | None
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights of the Lambda trapezoid rule, validated for accuracy."""
    amp = _lambda_integral(spec)
    cutoff = _default_cutoff(spec)
    step = _alias_safe_step(spec, t_max, amp)
    if quad is not None:
        if quad.cutoff is not None:
            cutoff = quad.cutoff
        if quad.step is not None:
            step = quad.step
    # Mass of Lambda beyond the cutoff, via the Gaussian tail bound
    # integral_{U}^{inf} exp(-a u^2) du <= exp(-a U^2) / (2 a U).
    a = (math.pi * spec.sigma) ** 2
    tail = math.exp(-a * cutoff**2) / (2.0 * a * cutoff * _theta_min(spec))
    if tail > 1e-12 * max(amp, 1.0):
        raise QuadratureConfigError(
            f"cutoff {cutoff} excludes non-negligible Lambda mass ({tail:.3e})"
        )
    return trapezoid_nodes(cutoff, step)


def inv_fourier_lambda(
    spec: DualGeneratorSpec,
    t: np.ndarray | float,
    quad: QuadSpec | None = None,
):
    """Inverse Fourier transform of Lambda, ``integral Lambda(u) cos(2 pi u t) du``.

    Real and even.  Computed by a uniform trapezoid rule on
    ``[-U, U]`` with ``U = max(8/(pi*sigma), 6)``; by Poisson summation the
    rule's error equals the sum of images of invF(Lambda) aliased in from
    shifts ``k/step``, so the default step keeps those images below 1e-13
    over the requested range of ``t``.
    """
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t_flat = np.atleast_1d(t_arr).ravel()
    t_max = float(np.max(np.abs(t_flat))) if t_flat.size else 0.0
    nodes, weights = _resolve_trapezoid(spec, t_max, quad)
    coeff = weights * lambda_fn(spec, nodes)

    out = np.empty(t_flat.shape, dtype=float)
    chunk = max(1, 8_000_000 // max(nodes.size, 1))
    for lo in range(0, t_flat.size, chunk):
        sel = t_flat[lo : lo + chunk]
        phase = (2.0 * math.pi) * np.multiply.outer(sel, nodes)
        out[lo : lo + chunk] = np.cos(phase) @ coeff
    out = out.reshape(np.atleast_1d(t_arr).shape)
    return float(out[0]) if scalar else out


class FourierLambdaTable:
    """Cached evaluation of ``invF(Lambda)`` on ``[-t_max, t_max]``.

    The reconstruction formulas evaluate the dual generator at millions of
    points, so invF(Lambda) is precomputed once on a uniform grid and then
    interpolated with a cubic spline.  The grid step is chosen so the
    interpolation error stays below 1e-9: in addition to the hard caps
    ``beta/64`` and ``sigma/16``, the cubic error estimate
    ``(5/384) h^4 max|f''''| ~ 0.16 (h/sigma)^4 amp`` is inverted for ``h``.
    Outside ``[-t_max, t_max]`` the table returns 0; choose ``t_max`` so the
    tail is below the truncation level (see :func:`suggested_t_max`).
    """

    def __init__(
        self,
        spec: DualGeneratorSpec,
        t_max: float,
        quad: QuadSpec | None = None,
    ):
        if t_max <= 0:
            raise ParameterError("table half-width t_max must be positive")
        base = DualGeneratorSpec(spec.sigma, spec.beta)  # xi plays no role here
        self.spec = base
        self.t_max = float(t_max)
        amp = _lambda_integral(base)
        self.amp = amp
        step = min(
            base.beta / 64.0,
            base.sigma / 16.0,
            base.sigma * (_INTERP_TOL / (0.16 * max(amp, 1e-6))) ** 0.25,
        )
        n_half = int(math.ceil(self.t_max / step))
        self.step = self.t_max / n_half
        grid_pos = self.step * np.arange(0, n_half + 1)
        vals_pos = inv_fourier_lambda(base, grid_pos, quad)
        grid = np.concatenate([-grid_pos[:0:-1], grid_pos])
        vals = np.concatenate([vals_pos[:0:-1], vals_pos])  # even extension
        self.grid = grid
        self.table_values = vals
        self._spline = CubicSpline(grid, vals, extrapolate=False)
        # Smallest radius beyond which every tabulated |value| is < 1e-13.
        mags = np.maximum.accumulate(np.abs(vals_pos)[::-1])[::-1]
        idx = np.nonzero(mags >= _SUPPORT_TOL)[0]
        self.support_radius = float(grid_pos[idx[-1]]) if idx.size else 0.0

    def values(self, t: np.ndarray | float):
        """Interpolated invF(Lambda)(t); 0 outside the tabulated range."""
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        out = self._spline(np.atleast_1d(t_arr))
        out = np.nan_to_num(out, nan=0.0, posinf=0.0, neginf=0.0)
        return float(out[0]) if scalar else out.reshape(t_arr.shape)


def suggested_t_max(spec: DualGeneratorSpec, reach: float = 0.0) -> float:
    """Table half-width covering both the decay tail and a required reach.

    ``reach`` is the largest argument the pipeline will request (for the
    reconstruction sums this is ``s + r/2 + beta*N/2``); on top of it the
    estimate extends to where the amplitude has decayed below the
    truncation level, using a safety-reduced strip decay rate.
    """
    nu_est = 0.8 * spec.beta / (4.0 * spec.sigma**2)
    amp = max(_lambda_integral(spec), 1e-6)
    decay_reach = math.log(max(amp, 1.0) / _SUPPORT_TOL) / nu_est * 1.25 + 10.0
    return float(np.clip(max(reach + 2.0, decay_reach), 25.0, 400.0))


_TABLE_CACHE: dict[tuple[float, float, float], FourierLambdaTable] = {}


def build_table(
    spec: DualGeneratorSpec, t_max: float | None = None
) -> FourierLambdaTable:
    """Build (or fetch from a process-wide cache) an invF(Lambda) table."""
    if t_max is None:
        t_max = suggested_t_max(spec)
    t_key = 10.0 * math.ceil(t_max / 10.0)
    key = (spec.sigma, spec.beta, t_key)
    table = _TABLE_CACHE.get(key)
    if table is None:
        table = FourierLambdaTable(DualGeneratorSpec(spec.sigma, spec.beta), t_key)
        _TABLE_CACHE[key] = table
    return table


def dual_generator(
    spec: DualGeneratorSpec,
    t: np.ndarray | float,
    table: FourierLambdaTable | None = None,
):
    """Dual generator ``sqrt(2) exp(xi^2/(4 sigma^2)) invF(Lambda)(t - xi/2)``.

    Real-valued; biorthogonal to the shifted tensor-product windows
    ``window(t - xi - beta*n/2) * window(t - beta*n/2)`` on the half-density
    lattice.  When ``table`` is given (or cached), values come from the
    interpolation table; otherwise from direct quadrature.
    """
    t_arr = np.asarray(t, dtype=float)
    amp = math.sqrt(2.0) * math.exp(spec.xi**2 / (4.0 * spec.sigma**2))
    shifted = t_arr - 0.5 * spec.xi
    if table is not None:
        return amp * table.values(shifted)
    return amp * inv_fourier_lambda(spec, shifted)


# ---------------------------------------------------------------------------
# Decay envelope
# ---------------------------------------------------------------------------

_REGIME_SLACK = 1e-12


def in_certified_regime(sigma: float, beta: float) -> bool:
    """True when ``beta/4 <= sigma <= beta/2 <= 1`` (up to 1e-12 slack)."""
    return (
        beta / 4.0 <= sigma + _REGIME_SLACK
        and sigma <= beta / 2.0 + _REGIME_SLACK
        and beta / 2.0 <= 1.0 + _REGIME_SLACK
    )


def estimate_decay_constants(
    spec: DualGeneratorSpec,
    table: FourierLambdaTable | None = None,
    n_samples: int = 500,
) -> DecayConstants:
    """Exponential envelope constants for ``invF(Lambda)``.

    Inside the certified regime ``beta/4 <= sigma <= beta/2 <= 1`` the
    proven constants ``K = 205/sigma``, ``nu = 1/4`` are returned.
    Otherwise ``|invF(Lambda)|`` is sampled on ``[0, 20 sigma]`` and the
    tightest dominating envelope is fitted: a least-squares line through
    ``log |invF(Lambda)|`` on the magnitude window ``[1e-10, 1e-2]`` when
    that window holds enough samples (falling back to the tail half of the
    range for large-amplitude profiles), after which ``K`` is inflated so
    the envelope dominates every sample.

    Raises
    ------
    FittingError
        If the fitted slope is not a genuine decay (nu <= 0).
    """
    sigma, beta = spec.sigma, spec.beta
    if in_certified_regime(sigma, beta):
        return DecayConstants(K=205.0 / sigma, nu=0.25, certified=True)

    t_hi = 20.0 * sigma
    if table is None or table.t_max < t_hi:
        table = build_table(spec, t_max=t_hi + 2.0)
    t_s = np.linspace(0.0, t_hi, n_samples)
    vals = np.abs(table.values(t_s))

    window = (vals >= 1e-10) & (vals <= 1e-2)
    if np.count_nonzero(window) >= 20:
        sel = window
    else:
        # Large-amplitude profile: the absolute window is empty, fit the
        # tail half of the sampled range instead (excluding near-zeros).
        tail = t_s >= 0.5 * t_hi
        floor = max(float(vals[tail].max()), 1e-300) * 1e-8
        sel = tail & (vals > floor)
        if np.count_nonzero(sel) < 10:
            raise FittingError(
                "too few usable samples to fit a decay envelope "
                f"(sigma={sigma}, beta={beta})"
            )
    slope, _ = np.polyfit(t_s[sel], np.log(vals[sel]), 1)
    nu = -float(slope)
    if not (nu > 0.0):
        raise FittingError(
            f"fitted envelope does not decay (nu={nu:.3e}) for "
            f"sigma={sigma}, beta={beta}"
        )
    positive = vals > 0.0
    k_dom = float(np.max(vals[positive] * np.exp(nu * t_s[positive])))
    return DecayConstants(
        K=k_dom * (1.0 + 1e-9),
        nu=nu,
        certified=False,
        fit_samples=int(np.count_nonzero(sel)),
    )


# ---------------------------------------------------------------------------
# Lattice absolute-sum constant and periodization
# ---------------------------------------------------------------------------


def c_sigma_beta(
    spec: DualGeneratorSpec,
    grid_density: int = 1024,
    table: FourierLambdaTable | None = None,
) -> float:
    """Grid supremum of ``sum_n |invF(Lambda)(t - beta*n/2)|``.

    The summand is ``beta/2``-periodic, so the supremum is taken over one
    period sampled at ``grid_density`` equispaced points anchored at 0
    (doubling ``grid_density`` refines the grid by nesting, so the value is
    monotone non-decreasing under doubling).  The lattice sum is truncated
    at the table's empirical support radius, beyond which all tabulated
    values are below 1e-13.
    """
    if grid_density < 1:
        raise ParameterError("grid_density must be a positive integer")
    if table is None:
        table = build_table(spec)
    half = 0.5 * spec.beta
    t_grid = half * np.arange(grid_density) / grid_density
    reach = table.support_radius + half
    n_max = int(math.ceil(reach / half))
    offsets = half * np.arange(-n_max, n_max + 1)
    args = t_grid[:, None] - offsets[None, :]
    sums = np.sum(np.abs(table.values(args)), axis=1)
    return float(np.max(sums))


def riesz_periodization(sigma: float, beta: float, t: np.ndarray | float):
    """Periodization ``sum_k |F(window)(t - k/beta)|^2`` in closed form:
    ``sqrt(pi) * sigma * beta * theta3(pi*beta*t, exp(-beta^2/(4 sigma^2)))``.

    ``1/beta``-periodic, strictly positive, maximal at ``t = 0`` and minimal
    at ``t = 1/(2 beta)`` — the frame bounds of the Gaussian generator.
    """
    if sigma <= 0 or beta <= 0:
        raise ParameterError("sigma and beta must be positive")
    t_arr = np.asarray(t, dtype=float)
    nome = math.exp(-(beta**2) / (4.0 * sigma**2))
    out = math.sqrt(math.pi) * sigma * beta * theta3(math.pi * beta * t_arr, nome)
    return out


# ---------------------------------------------------------------------------
# Biorthogonality check
# ---------------------------------------------------------------------------


def biorthogonality_defect(
    spec: DualGeneratorSpec,
    n: int,
    table: FourierLambdaTable | None = None,
) -> float:
    """Deviation of ``<dual_gen_xi(. - beta*n/2), window_xi>`` from ``delta_{n,0}``.

    ``window_xi(t) = window(t - xi) * window(t)`` is the Gaussian tensor
    product; exact biorthogonality of the dual generator on the
    half-density lattice means the inner product is 1 for ``n = 0`` and 0
    otherwise.  Returns the absolute deviation, computed by a fine
    trapezoid rule on the Gaussian's effective support.
    """
    sigma, xi = spec.sigma, spec.xi
    center = 0.5 * xi
    nodes, weights = trapezoid_nodes(14.0 * sigma, sigma / 64.0)
    t = nodes + center
    if table is None:
        table = build_table(
            spec, t_max=suggested_t_max(spec, reach=abs(center) + 0.5 * abs(n) * spec.beta + 14.0 * sigma)
        )
    dual_vals = dual_generator(spec, t - 0.5 * n * spec.beta, table=table)
    window_prod = spec.window(t - xi) * spec.window(t)
    inner = float(weights @ (dual_vals * window_prod))
    target = 1.0 if n == 0 else 0.0
    return abs(inner - target)
