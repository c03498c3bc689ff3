"""Sampled phaseless measurements on the half-density time-frequency lattice.

Measurements live on the lattice ``(beta/2){-N..N} x h{-H..H}``: entry
``(n, k)`` holds the squared transform magnitude at time shift
``beta*n/2`` and frequency node ``h*k``, optionally corrupted by additive
i.i.d. Gaussian noise (never clamped — noisy magnitudes may go negative,
exactly as the error analysis assumes).

The on-disk dataset format is a single text file: one JSON header line
``{beta, sigma, a, b, c, d, N, H, h, delta, seed, signal_ref}`` followed by
``(2N+1)(2H+1)`` CSV lines ``n,k,Y`` in row-major order.  Values are
written with shortest round-trip decimals, so binary64 payloads reload
bit-exactly.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataFormatError, ParameterError
from .signal_model import GaussianSisSignal
from .stlct import LctParams, MagnitudeRow

__all__ = [
    "LatticeSpec",
    "MeasurementSet",
    "sample_exact",
    "add_noise",
    "matrix_inf_norm",
    "save_measurements",
    "load_measurements",
]


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice sizes: time index range ``-N..N`` (step ``beta/2``),
    frequency index range ``-H..H`` (step ``h``)."""

    N: int
    H: int
    h: float

    def __post_init__(self) -> None:
        if self.N < 0 or self.H < 0:
            raise ParameterError(f"lattice sizes must be non-negative, got N={self.N}, H={self.H}")
        if not (self.h > 0.0) or not math.isfinite(self.h):
            raise ParameterError(f"lattice step h must be positive, got {self.h}")

    @property
    def shape(self) -> tuple[int, int]:
        return (2 * self.N + 1, 2 * self.H + 1)

    def x_values(self, beta: float) -> np.ndarray:
        """Time shifts ``beta*n/2`` for ``n = -N..N``."""
        return 0.5 * beta * np.arange(-self.N, self.N + 1, dtype=float)

    def t_values(self) -> np.ndarray:
        """Frequency nodes ``h*k`` for ``k = -H..H``."""
        return self.h * np.arange(-self.H, self.H + 1, dtype=float)


@dataclass(frozen=True)
class MeasurementSet:
    """Magnitude samples plus the metadata needed to invert them.

    ``values[i, j]`` is the sample at ``n = i - N``, ``k = j - H``.
    ``noise_inf`` is the realized max-absolute-row-sum of the noise matrix
    (0 for exact data, None when unknown, e.g. after reloading noisy data).
    """

    lattice: LatticeSpec
    beta: float
    sigma: float
    lct: LctParams
    values: np.ndarray
    noise_level: float = 0.0
    seed: int | None = None
    noise_inf: float | None = 0.0
    signal_ref: str | None = None

    def __post_init__(self) -> None:
        if not (self.beta > 0.0):
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if not (self.sigma > 0.0):
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.lattice.shape:
            raise ParameterError(
                f"values shape {vals.shape} does not match lattice {self.lattice.shape}"
            )
        object.__setattr__(self, "values", vals)

    @property
    def x_values(self) -> np.ndarray:
        return self.lattice.x_values(self.beta)

    @property
    def t_values(self) -> np.ndarray:
        return self.lattice.t_values()


def sample_exact(
    f: GaussianSisSignal,
    A: LctParams,
    lattice: LatticeSpec,
    threads: int = 1,
) -> MeasurementSet:
    """Exact magnitude samples ``M(beta*n/2, h*k)`` on the lattice.

    Rows are computed independently from the magnitude closed form; with
    ``threads > 1`` they are dispatched to a thread pool, assembled in
    index order so the result is identical for any thread count.
    """
    xs = lattice.x_values(f.beta)
    ts = lattice.t_values()
    values = np.empty(lattice.shape, dtype=float)

    def fill(i: int) -> None:
        values[i] = MagnitudeRow(f, A, float(xs[i]))(ts)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, range(xs.size)))
    else:
        for i in range(xs.size):
            fill(i)
    return MeasurementSet(
        lattice=lattice,
        beta=f.beta,
        sigma=f.sigma,
        lct=A,
        values=values,
        noise_level=0.0,
        seed=None,
        noise_inf=0.0,
    )


def add_noise(m: MeasurementSet, delta: float, seed: int) -> MeasurementSet:
    """Additive i.i.d. Gaussian noise ``N(0, delta^2)`` on every entry.

    Draws come from ``numpy.random.default_rng(seed)`` (PCG64) in row-major
    order.  Negative noisy magnitudes are kept as-is.  ``delta = 0``
    returns the values bit-for-bit unchanged.
    """
    if delta < 0:
        raise ParameterError(f"noise level must be non-negative, got {delta}")
    if delta == 0.0:
        return replace(m, noise_level=0.0, seed=seed, noise_inf=0.0)
    rng = np.random.default_rng(seed)
    eta = rng.normal(0.0, delta, size=m.values.shape)
    return replace(
        m,
        values=m.values + eta,
        noise_level=float(delta),
        seed=int(seed),
        noise_inf=matrix_inf_norm(eta),
    )


def matrix_inf_norm(B: np.ndarray) -> float:
    """Max absolute row sum ``max_n sum_k |B[n, k]|`` (0 for empty input)."""
    B = np.asarray(B, dtype=float)
    if B.size == 0:
        return 0.0
    if B.ndim == 1:
        B = B[None, :]
    return float(np.max(np.sum(np.abs(B), axis=1)))


# ---------------------------------------------------------------------------
# Dataset files
# ---------------------------------------------------------------------------


def save_measurements(m: MeasurementSet, path) -> None:
    """Write the single-file dataset: JSON header line + CSV payload."""
    header = {
        "beta": m.beta,
        "sigma": m.sigma,
        "a": m.lct.a,
        "b": m.lct.b,
        "c": m.lct.c,
        "d": m.lct.d,
        "N": m.lattice.N,
        "H": m.lattice.H,
        "h": m.lattice.h,
        "delta": m.noise_level,
        "seed": m.seed,
        "signal_ref": m.signal_ref,
    }
    N, H = m.lattice.N, m.lattice.H
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, separators=(", ", ": ")))
        fh.write("\n")
        for i in range(2 * N + 1):
            n = i - N
            row = m.values[i]
            fh.write(
                "\n".join(
                    f"{n},{k - H},{float(row[k])!r}" for k in range(2 * H + 1)
                )
            )
            fh.write("\n")


def load_measurements(path) -> MeasurementSet:
    """Parse a dataset file; raises :class:`DataFormatError` on any
    structural inconsistency (bad header, wrong row order, missing or
    extra entries, unparseable numbers)."""
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"invalid dataset header: {exc}") from exc
        try:
            lattice = LatticeSpec(N=int(header["N"]), H=int(header["H"]), h=float(header["h"]))
            beta = float(header["beta"])
            sigma = float(header["sigma"])
            lct = LctParams(
                float(header["a"]), float(header["b"]), float(header["c"]), float(header["d"])
            )
            delta = float(header["delta"])
            seed = header.get("seed")
            seed = int(seed) if seed is not None else None
            signal_ref = header.get("signal_ref")
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"malformed dataset header: {exc}") from exc

        N, H = lattice.N, lattice.H
        values = np.empty(lattice.shape, dtype=float)
        count = 0
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise DataFormatError(f"malformed dataset row: {line!r}")
            try:
                n, k, y = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise DataFormatError(f"malformed dataset row: {line!r}") from exc
            expect_n = count // (2 * H + 1) - N
            expect_k = count % (2 * H + 1) - H
            if n != expect_n or k != expect_k:
                raise DataFormatError(
                    f"dataset row out of order: got ({n},{k}), expected ({expect_n},{expect_k})"
                )
            values[n + N, k + H] = y
            count += 1
        if count != values.size:
            raise DataFormatError(
                f"dataset has {count} payload rows, expected {values.size}"
            )
    return MeasurementSet(
        lattice=lattice,
        beta=beta,
        sigma=sigma,
        lct=lct,
        values=values,
        noise_level=delta,
        seed=seed,
        noise_inf=0.0 if delta == 0.0 else None,
        signal_ref=signal_ref,
    )
