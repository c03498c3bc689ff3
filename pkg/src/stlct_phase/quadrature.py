"""Quadrature configuration shared by the numerical oracles.

Two rule families are used throughout the package:

* uniform trapezoid rules on symmetric windows ``[-U, U]`` — exponentially
  accurate for the analytic, rapidly decaying integrands that arise here
  (Gaussian-enveloped periodic functions), with the discretisation error
  controlled through Poisson summation;
* composite Gauss-Legendre panels — used by the slow reference oracles that
  integrate chirped Gaussian windows directly.

:class:`QuadSpec` bundles the knobs of both families; ``None`` fields mean
"derive a safe default from the problem parameters".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class QuadSpec:
    """Quadrature configuration.

    Parameters
    ----------
    cutoff:
        Half-width ``U`` of the symmetric integration window.  ``None``
        derives it from the integrand's Gaussian envelope.
    step:
        Node spacing for trapezoid rules.  ``None`` derives it from the
        aliasing analysis of the transformed integrand.
    panel_width:
        Width of each Gauss-Legendre panel.  ``None`` derives it from the
        window width and the local chirp frequency.
    panel_nodes:
        Gauss-Legendre nodes per panel.
    support_margin:
        Margin, in units of the Gaussian width ``sigma``, added around the
        effective support of the integrand.
    """

    cutoff: float | None = None
    step: float | None = None
    panel_width: float | None = None
    panel_nodes: int = 20
    support_margin: float = 12.0

    def __post_init__(self) -> None:
        if self.cutoff is not None and self.cutoff <= 0:
            raise ParameterError("quadrature cutoff must be positive")
        if self.step is not None and self.step <= 0:
            raise ParameterError("quadrature step must be positive")
        if self.panel_width is not None and self.panel_width <= 0:
            raise ParameterError("panel width must be positive")
        if self.panel_nodes < 2:
            raise ParameterError("need at least 2 Gauss-Legendre nodes per panel")
        if self.support_margin <= 0:
            raise ParameterError("support margin must be positive")


def trapezoid_nodes(half_width: float, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric trapezoid nodes and weights on ``[-half_width, half_width]``.

    The step is shrunk (never enlarged) so the endpoints land exactly on
    ``±half_width``; the node set always contains 0.
    """
    if half_width <= 0 or step <= 0:
        raise ParameterError("trapezoid window and step must be positive")
    n_half = max(1, int(np.ceil(half_width / step)))
    h = half_width / n_half
    nodes = h * np.arange(-n_half, n_half + 1)
    weights = np.full(nodes.shape, h)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return nodes, weights


def gauss_legendre_panels(
    lo: float, hi: float, panel_width: float, nodes_per_panel: int
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on ``[lo, hi]``."""
    if hi <= lo:
        raise ParameterError("empty integration interval")
    n_panels = max(1, int(np.ceil((hi - lo) / panel_width)))
    edges = np.linspace(lo, hi, n_panels + 1)
    base_x, base_w = np.polynomial.legendre.leggauss(nodes_per_panel)
    half = 0.5 * (edges[1:] - edges[:-1])  # (n_panels,)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    w = (half[:, None] * base_w[None, :]).ravel()
    return x, w
