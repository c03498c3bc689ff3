"""Short-time transforms with chirped Gaussian windows, in closed form.

For a transform matrix ``(a, b; c, d)`` with unit determinant and ``b > 0``,
the windowed transform analysed here is

    S f(x, t) = integral f(u) * conj(w(u - x)) * k(t, u) du,

with kernel ``k(t, u) = exp(i*pi*(a*u^2 - 2*t*u + d*t^2)/b) / sqrt(i*b)``
and the chirp-modulated Gaussian window
``w(s) = exp(i*pi*(a/b)*s^2) * exp(-s^2/(2*sigma^2))``.  For signals in the
Gaussian shift-invariant space both the transform and its squared magnitude
have closed forms (Gaussian-enveloped trigonometric sums), which this module
implements together with a slow, independent quadrature oracle and the
trapezoid Fourier sums applied to the magnitude data.

The squared magnitude factorises as

    M(x, t) = (pi*sigma^2/b) * exp(-2*pi^2*sigma^2*(t - a*x)^2/b^2) * V_x(t),

where ``V_x`` is a trigonometric polynomial whose coefficients are chirped
autocorrelations of the signal coefficients; ``V_x`` extends to an entire
function with a sub-Gaussian growth bound on horizontal strips, which is
what makes trapezoid sums of the magnitude exponentially accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .quadrature import QuadSpec, gauss_legendre_panels
from .signal_model import GaussianSisSignal

__all__ = [
    "LctParams",
    "MagnitudeRow",
    "stlct_closed_form",
    "stlct_quadrature_oracle",
    "magnitude_closed_form",
    "magnitude_row",
    "correlation_coefficients",
    "correlation_coefficient_bound",
    "v_strip_bound",
    "strip_half_width",
    "trapezoid_fourier",
]


@dataclass(frozen=True)
class LctParams:
    """Transform matrix ``(a, b; c, d)`` with ``a d - b c = 1`` and ``b > 0``."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        for name, val in (("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)):
            if not math.isfinite(val):
                raise ParameterError(f"matrix entry {name} must be finite, got {val}")
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-12:
            raise ParameterError(f"matrix determinant must be 1, got {det!r}")
        if not (self.b > 0.0):
            raise ParameterError(f"matrix entry b must be positive, got {self.b}")

    @classmethod
    def gabor(cls) -> "LctParams":
        """The matrix ``(0, 1; -1, 0)`` for which the transform reduces to
        the short-time Fourier transform with a plain Gaussian window."""
        return cls(0.0, 1.0, -1.0, 0.0)

    @property
    def sqrt_ib(self) -> complex:
        """Principal branch of ``sqrt(i*b)`` (= ``sqrt(b) e^{i pi/4}``)."""
        return complex(np.sqrt(1j * self.b))


# ---------------------------------------------------------------------------
# Closed form of the transform
# ---------------------------------------------------------------------------


def stlct_closed_form(
    f: GaussianSisSignal,
    A: LctParams,
    x: np.ndarray | float,
    t: np.ndarray | float,
):
    """Transform value ``S f(x, t)`` in closed form.

    ``S f(x,t) = (sigma*sqrt(pi)/sqrt(i b)) * exp(i pi (d/b) t^2)
    * exp(-i pi (a/b) x^2) * exp(-pi^2 sigma^2 (t - a x)^2 / b^2)
    * sum_k c_k exp(-(x - beta k)^2/(4 sigma^2))
    * exp(-i pi (x + beta k)(t - a x)/b)``.

    Broadcasts over ``x`` and ``t``.
    """
    sigma, beta = f.sigma, f.beta
    x_b, t_b = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(t, dtype=float)
    )
    scalar = x_b.ndim == 0
    xf = np.atleast_1d(x_b).ravel()
    tf = np.atleast_1d(t_b).ravel()
    w = tf - A.a * xf
    pref = (
        (sigma * math.sqrt(math.pi) / A.sqrt_ib)
        * np.exp(1j * math.pi * (A.d / A.b) * tf**2)
        * np.exp(-1j * math.pi * (A.a / A.b) * xf**2)
        * np.exp(-((math.pi * sigma / A.b) ** 2) * w**2)
    )
    ksum = np.zeros(xf.shape, dtype=np.complex128)
    if f.values.size:
        centers = beta * f.indices.astype(float)
        chunk = max(1, 2_000_000 // f.values.size)
        for lo in range(0, xf.size, chunk):
            xs = xf[lo : lo + chunk, None]
            ws = w[lo : lo + chunk, None]
            gauss = np.exp(-((xs - centers[None, :]) ** 2) / (4.0 * sigma**2))
            phase = np.exp(
                (-1j * math.pi / A.b) * (xs + centers[None, :]) * ws
            )
            ksum[lo : lo + chunk] = (gauss * phase) @ f.values
    out = (pref * ksum).reshape(np.atleast_1d(x_b).shape)
    return complex(out[0]) if scalar else out


def stlct_quadrature_oracle(
    f: GaussianSisSignal,
    A: LctParams,
    x: float,
    t: float,
    quad: QuadSpec | None = None,
) -> complex:
    """Independent reference value of ``S f(x, t)`` by direct quadrature.

    Integrates ``f(u) conj(w(u - x)) k(t, u)`` with composite
    Gauss-Legendre panels over the window's effective support
    ``[x - margin*sigma, x + margin*sigma]``; the panel width is capped so
    each panel sees at most a fraction of an oscillation of the residual
    linear phase ``2 pi (a x - t) u / b``.  Slow but structurally unrelated
    to the closed form; used only for verification.
    """
    quad = quad or QuadSpec()
    sigma = f.sigma
    margin = quad.support_margin
    lo, hi = x - margin * sigma, x + margin * sigma
    freq = abs(A.a * x - t) / A.b  # cycles per unit length
    width = quad.panel_width
    if width is None:
        width = min(sigma / 4.0, 0.25 / max(freq, 1e-12))
    u, wts = gauss_legendre_panels(lo, hi, width, quad.panel_nodes)
    window = np.exp(
        -1j * math.pi * (A.a / A.b) * (u - x) ** 2 - (u - x) ** 2 / (2.0 * sigma**2)
    )
    kernel = np.exp(
        (1j * math.pi / A.b) * (A.a * u**2 - 2.0 * t * u + A.d * t**2)
    ) / A.sqrt_ib
    vals = f.eval(u) * window * kernel
    return complex(np.sum(wts * vals))


# ---------------------------------------------------------------------------
# Squared magnitude in closed form
# ---------------------------------------------------------------------------


def correlation_coefficients(
    f: GaussianSisSignal, A: LctParams, x: float
) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients ``r_l(x)`` of the trigonometric factor ``V_x``.

    ``V_x(t) = sum_l r_l(x) exp(i pi beta l t / b)`` with

    ``r_l(x) = exp(-i pi beta a x l / b) * sum_n c_n conj(c_{n+l})
    * exp(-(x - beta n)^2/(4 sigma^2))
    * exp(-(x - beta (n+l))^2/(4 sigma^2))``.

    Returns ``(ls, r)`` where ``ls`` are the lag indices.  Lags are kept
    while the a-priori bound
    ``coeff_inf_norm^2 (1 + sigma sqrt(2 pi)/beta) exp(-beta^2 l^2/(8 sigma^2))``
    stays above 1e-14 (and within the finite coefficient span), mirroring
    the envelope used in the error analysis.
    """
    sigma, beta = f.sigma, f.beta
    if f.values.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.complex128)
    idx = f.indices
    span = int(idx[-1] - idx[0])
    bound0 = correlation_coefficient_bound(f, 0)
    if bound0 <= 1e-14:
        l_max = 0
    else:
        l_max = int(
            math.floor(
                math.sqrt(8.0 * sigma**2 / beta**2 * math.log(bound0 / 1e-14))
            )
        )
    l_max = min(l_max, span)
    ls = np.arange(-l_max, l_max + 1, dtype=np.int64)

    # Dense coefficient array over the contiguous index range for O(1) lags.
    dense = np.zeros(span + 1, dtype=np.complex128)
    dense[idx - idx[0]] = f.values
    centers = beta * np.arange(idx[0], idx[-1] + 1, dtype=float)
    env = np.exp(-((x - centers) ** 2) / (4.0 * sigma**2))

    r = np.zeros(ls.shape, dtype=np.complex128)
    for k, l in enumerate(ls):
        if l >= 0:
            prod = dense[: span + 1 - l] * np.conj(dense[l:]) * env[: span + 1 - l] * env[l:]
        else:
            prod = dense[-l:] * np.conj(dense[: span + 1 + l]) * env[-l:] * env[: span + 1 + l]
        chirp = np.exp(-1j * math.pi * beta * A.a * x * l / A.b)
        r[k] = chirp * np.sum(prod)
    return ls, r


def correlation_coefficient_bound(f: GaussianSisSignal, l: int) -> float:
    """A-priori bound ``coeff_inf_norm^2 (1 + sigma sqrt(2 pi)/beta)
    * exp(-beta^2 l^2 / (8 sigma^2))`` on ``|r_l(x)|``, uniform in ``x``."""
    sigma, beta = f.sigma, f.beta
    return (
        f.coeff_inf_norm**2
        * (1.0 + sigma * math.sqrt(2.0 * math.pi) / beta)
        * math.exp(-(beta**2) * l**2 / (8.0 * sigma**2))
    )


def v_strip_bound(f: GaussianSisSignal, A: LctParams, y: float) -> float:
    """Growth bound ``coeff_inf_norm^2 (1 + 2 sqrt(2 pi) sigma/beta)^2
    * exp(2 pi^2 sigma^2 y^2 / b^2)`` for ``|V_x(t + i y)|``, uniform in
    ``x`` and real ``t``."""
    sigma, beta = f.sigma, f.beta
    return (
        f.coeff_inf_norm**2
        * (1.0 + 2.0 * math.sqrt(2.0 * math.pi) * sigma / beta) ** 2
        * math.exp(2.0 * (math.pi * sigma * y / A.b) ** 2)
    )


def strip_half_width(f: GaussianSisSignal, A: LctParams) -> float:
    """Half-width ``b/(2 pi sigma)`` of the strip on which the magnitude's
    analytic extension keeps an integrable envelope."""
    return A.b / (2.0 * math.pi * f.sigma)


class MagnitudeRow:
    """Squared magnitude ``M(x, .)`` along one time slice, reusable.

    Precomputes the correlation coefficients of ``V_x`` once so repeated
    evaluations (quadrature oracles, trapezoid sums) are cheap.  Supports
    complex ``t`` through :meth:`v` (no positivity checks there); real
    evaluation via :meth:`__call__` asserts the assembled ``V_x`` is real
    up to rounding and clamps tiny negative values to 0.
    """

    def __init__(self, f: GaussianSisSignal, A: LctParams, x: float):
        self.f = f
        self.A = A
        self.x = float(x)
        self.ls, self.r = correlation_coefficients(f, A, x)
        self.r_scale = float(np.sum(np.abs(self.r)))
        self.prefactor = math.pi * f.sigma**2 / A.b

    def v(self, t: np.ndarray | complex):
        """Trigonometric factor ``V_x(t)`` for real or complex ``t``."""
        t_arr = np.asarray(t)
        if self.ls.size == 0:
            return np.zeros(t_arr.shape, dtype=np.complex128)
        phase = np.exp(
            (1j * math.pi * self.f.beta / self.A.b)
            * np.multiply.outer(t_arr, self.ls.astype(float))
        )
        return phase @ self.r

    def __call__(self, t: np.ndarray | float):
        """Clamped real magnitude ``M(x, t)`` for real ``t``.

        Raises
        ------
        AssertionError
            If the assembled ``V_x`` has an imaginary residual above 1e-8
            (relative to its coefficient scale) or dips below the negative
            tolerance -1e-10 — both signal a coefficient bug upstream.
        """
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        v_vals = self.v(np.atleast_1d(t_arr))
        tol_scale = max(1.0, self.r_scale)
        imag_res = float(np.max(np.abs(v_vals.imag))) if v_vals.size else 0.0
        if imag_res > 1e-8 * tol_scale:
            raise AssertionError(
                f"imaginary residual {imag_res:.3e} of assembled V_x exceeds "
                "tolerance; correlation coefficients are inconsistent"
            )
        sigma = self.f.sigma
        w = np.atleast_1d(t_arr) - self.A.a * self.x
        m_vals = (
            self.prefactor
            * np.exp(-2.0 * (math.pi * sigma / self.A.b) ** 2 * w**2)
            * v_vals.real
        )
        if m_vals.size and float(np.min(m_vals)) < -1e-10 * tol_scale:
            raise AssertionError(
                f"magnitude {float(np.min(m_vals)):.3e} below negative "
                "tolerance; correlation coefficients are inconsistent"
            )
        m_vals = np.maximum(m_vals, 0.0)
        return float(m_vals[0]) if scalar else m_vals.reshape(t_arr.shape)


def magnitude_row(f: GaussianSisSignal, A: LctParams, x: float) -> MagnitudeRow:
    """Reusable evaluator of ``M(x, .)`` for a fixed time-shift ``x``."""
    return MagnitudeRow(f, A, x)


def magnitude_closed_form(
    f: GaussianSisSignal,
    A: LctParams,
    x: np.ndarray | float,
    t: np.ndarray | float,
):
    """Squared transform magnitude ``M(x, t) = |S f(x, t)|^2`` in closed form.

    Broadcasts over ``x`` and ``t`` (rows with equal ``x`` share the
    correlation coefficients).  Values are real, clamped to ``>= 0`` after
    an internal consistency check; see :class:`MagnitudeRow`.
    """
    x_b, t_b = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(t, dtype=float)
    )
    scalar = x_b.ndim == 0
    xf = np.atleast_1d(x_b).ravel()
    tf = np.atleast_1d(t_b).ravel()
    out = np.empty(xf.shape, dtype=float)
    for xv in np.unique(xf):
        sel = xf == xv
        out[sel] = MagnitudeRow(f, A, float(xv))(tf[sel])
    out = out.reshape(np.atleast_1d(x_b).shape)
    return float(out[0]) if scalar else out


def trapezoid_fourier(
    f: GaussianSisSignal,
    A: LctParams,
    x: float,
    xi: float,
    h: float,
    H: int,
) -> complex:
    """Truncated trapezoid Fourier sum of the magnitude slice:
    ``h * sum_{k=-H}^{H} M(x, h k) exp(-2 pi i xi h k / b)``.

    This is the quadrature applied to exact (noiseless) magnitude data; its
    distance to the continuous integral obeys the strip-contour bound used
    in the discretisation analysis.
    """
    if h <= 0:
        raise ParameterError(f"lattice step h must be positive, got {h}")
    if H < 0:
        raise ParameterError(f"lattice size H must be non-negative, got {H}")
    k = np.arange(-H, H + 1, dtype=float)
    row = MagnitudeRow(f, A, x)
    vals = row(h * k)
    phase = np.exp(-2j * math.pi * xi * h * k / A.b)
    return complex(h * np.sum(vals * phase))
