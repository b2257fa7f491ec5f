"""Exact 1-D discrete Gaussian over the integers: pmf tables and inversion sampling.

The infinite sum over Z is truncated to a window wide enough that the omitted
mass is provably below ``tail_eps``: the centered Gaussian tail outside
``c +- w`` with ``w = alpha * sqrt(2 ln(4/eps)) + 1`` contributes less than
eps of the total, by the standard tail bound (the +1 absorbs the
integer-rounding slack). All exponent sums subtract the max exponent first so
small alpha cannot underflow to an all-zero table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_TAIL_EPS = 1e-12


@dataclass(frozen=True)
class Gaussian1DParams:
    """Standard deviation and center of a discrete Gaussian on Z."""

    alpha: float
    center: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if not math.isfinite(self.center):
            raise ValueError(f"center must be finite, got {self.center}")


@dataclass(frozen=True)
class IntegerSupport:
    """Closed integer window [lo, hi] carrying all but `omitted_mass_bound`."""

    lo: int
    hi: int
    omitted_mass_bound: float


def truncation_halfwidth(alpha: float, tail_eps: float) -> float:
    return alpha * math.sqrt(2.0 * math.log(4.0 / tail_eps)) + 1.0


def support_bounds(p: Gaussian1DParams, tail_eps: float = DEFAULT_TAIL_EPS) -> IntegerSupport:
    """Integer window around the center whose complement has mass < tail_eps."""
    if not (0.0 < tail_eps < 1.0):
        raise ValueError(f"tail_eps must lie in (0, 1), got {tail_eps}")
    w = truncation_halfwidth(p.alpha, tail_eps)
    return IntegerSupport(
        lo=math.floor(p.center - w), hi=math.ceil(p.center + w), omitted_mass_bound=tail_eps
    )


def pmf_table(
    p: Gaussian1DParams, tail_eps: float = DEFAULT_TAIL_EPS
) -> tuple[np.ndarray, np.ndarray]:
    """Support points and normalized probabilities over the truncated window."""
    sup = support_bounds(p, tail_eps)
    ks = np.arange(sup.lo, sup.hi + 1)
    logw = -((ks - p.center) ** 2) / (2.0 * p.alpha * p.alpha)
    w = np.exp(logw - logw.max())
    return ks, w / w.sum()


def pmf(p: Gaussian1DParams, k: int, tail_eps: float = DEFAULT_TAIL_EPS) -> float:
    """Probability of integer k; zero outside the truncated support."""
    ks, probs = pmf_table(p, tail_eps)
    if k < ks[0] or k > ks[-1]:
        return 0.0
    return float(probs[k - ks[0]])


def _inverse_cdf_draw(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Index of the smallest entry whose cumulative probability reaches u."""
    cum = np.cumsum(probs)
    u = rng.random()
    return int(np.searchsorted(cum, u, side="left"))


def sample(
    p: Gaussian1DParams, rng: np.random.Generator, tail_eps: float = DEFAULT_TAIL_EPS
) -> int:
    """Exact inversion draw from the truncated pmf table."""
    ks, probs = pmf_table(p, tail_eps)
    return int(ks[_inverse_cdf_draw(probs, rng)])


def sample_restricted(
    p: Gaussian1DParams,
    allowed: "np.ndarray | list[int] | tuple[int, ...]",
    rng: np.random.Generator,
) -> int:
    """Draw from rho_{alpha,c} renormalized over a finite integer set.

    With `allowed` equal to the full truncated support this reproduces
    `sample` draw-for-draw (same table, same inversion).
    """
    ks = np.asarray(sorted(int(k) for k in allowed))
    if ks.size == 0:
        raise ValueError("allowed set must be non-empty")
    logw = -((ks - p.center) ** 2) / (2.0 * p.alpha * p.alpha)
    w = np.exp(logw - logw.max())
    return int(ks[_inverse_cdf_draw(w / w.sum(), rng)])


# Vectorized row-wise helpers: one independent 1-D discrete Gaussian per row,
# sharing a fixed alpha. Used by the batch Klein sampler, the chain ensembles,
# and exact pmf evaluation over large point sets. The window is anchored at
# round(center) per row, which shifts the truncation by < 1 point relative to
# the scalar table; the resulting pmf difference is below tail_eps.


def pmf_rows(
    alpha: float,
    centers: np.ndarray,
    values: np.ndarray,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> np.ndarray:
    """Normalized pmf of values[i] under D_{Z, alpha, centers[i]} for each row i."""
    centers = np.asarray(centers, dtype=float)
    values = np.asarray(values)
    w = truncation_halfwidth(alpha, tail_eps)
    half = int(math.ceil(w))
    offs = np.arange(-half, half + 1)
    ks = np.round(centers)[:, None] + offs[None, :]
    dev = ks - centers[:, None]
    logw = -(dev * dev) / (2.0 * alpha * alpha)
    m = logw.max(axis=1)
    z = np.exp(logw - m[:, None]).sum(axis=1)
    dv = values - centers
    pv = np.exp(-(dv * dv) / (2.0 * alpha * alpha) - m) / z
    return np.where(np.abs(dv) <= w + 0.5, pv, 0.0)


def sample_rows(
    alpha: float,
    centers: np.ndarray,
    rng: np.random.Generator,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> np.ndarray:
    """One inversion draw per row from D_{Z, alpha, centers[i]}.

    Processes rows in chunks so wide tables (large alpha) stay within a few
    tens of MB; uniforms are drawn up front so chunking cannot change draws.
    """
    centers = np.asarray(centers, dtype=float)
    n = centers.shape[0]
    half = int(math.ceil(truncation_halfwidth(alpha, tail_eps)))
    offs = np.arange(-half, half + 1)
    u_all = rng.random(n)
    out = np.empty(n, dtype=np.int64)
    chunk = max(1, int(4_000_000 / (2 * half + 1)))
    for start in range(0, n, chunk):
        sl = slice(start, min(start + chunk, n))
        base = np.round(centers[sl])
        dev = base[:, None] + offs[None, :] - centers[sl, None]
        logw = -(dev * dev) / (2.0 * alpha * alpha)
        cum = np.cumsum(np.exp(logw - logw.max(axis=1, keepdims=True)), axis=1)
        idx = np.sum(cum < (u_all[sl] * cum[:, -1])[:, None], axis=1)
        out[sl] = (base + (idx - half)).astype(np.int64)
    return out
