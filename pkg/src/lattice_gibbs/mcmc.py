"""Markov-chain kernels targeting a lattice Gaussian: random-scan Gibbs and
the blocked Gibbs-Klein kernel, plus chain execution helpers.

Gibbs resamples one coordinate from its exact 1-D conditional. Gibbs-Klein
resamples an m-coordinate block of a freshly permuted basis with one backward
Klein pass; each step re-factorizes the permuted basis, faithfully following
the unoptimized formulation.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import dgauss1d as dg
from .dgauss1d import DEFAULT_TAIL_EPS, Gaussian1DParams
from .klein import GaussianParams, backward_pmf, backward_sample_into
from .linalg import LatticeBasis, Permutation, permute_basis, random_permutation
from .oracle import DiscreteDistribution

MAX_KERNEL_ENUM_DIM = 7


class ScanOrder(enum.Enum):
    RANDOM = "random"
    FIXED = "fixed"


@dataclass(frozen=True)
class ChainState:
    x: tuple[int, ...]
    t: int

    def vector(self) -> np.ndarray:
        return np.array(self.x, dtype=np.int64)


@dataclass(frozen=True)
class GibbsKleinConfig:
    basis: LatticeBasis
    target: GaussianParams
    block_size: int

    def __post_init__(self) -> None:
        if not 1 <= self.block_size <= self.basis.n:
            raise ValueError(
                f"block size must lie in [1, {self.basis.n}], got {self.block_size}"
            )
        if self.target.center.shape != (self.basis.n,):
            raise ValueError("target center dimension does not match basis")


@dataclass(frozen=True)
class ChainTrace:
    states: tuple[ChainState, ...]
    burn_in: int
    rng_seed: "int | None" = None


def _as_state(x, t: int = 0) -> ChainState:
    if isinstance(x, ChainState):
        return x
    return ChainState(tuple(int(v) for v in x), t)


def _conditional_params(
    basis: LatticeBasis, target: GaussianParams, x: np.ndarray, i: int
) -> Gaussian1DParams:
    """1-D conditional of coordinate i given the others.

    Expanding ||Bx - c||^2 in x_i gives a discrete Gaussian with step
    sigma/||b_i|| centered at the least-squares value of x_i.
    """
    col = basis.matrix[:, i]
    nrm2 = float(col @ col)
    resid = basis.matrix @ x - target.center - col * x[i]
    return Gaussian1DParams(target.sigma / math.sqrt(nrm2), -float(resid @ col) / nrm2)


def gibbs_conditional(
    basis: LatticeBasis,
    target: GaussianParams,
    x: np.ndarray,
    i: int,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> DiscreteDistribution:
    """P(x_i | x_[-i]) as an explicit distribution over the truncated support."""
    params = _conditional_params(basis, target, np.asarray(x, dtype=float), i)
    ks, probs = dg.pmf_table(params, tail_eps)
    return DiscreteDistribution(tuple(int(k) for k in ks), probs, tail_eps)


def gibbs_step(
    basis: LatticeBasis,
    target: GaussianParams,
    state: ChainState,
    rng: np.random.Generator,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> ChainState:
    """Resample one uniformly chosen coordinate from its conditional."""
    x = state.vector().astype(float)
    i = int(rng.integers(basis.n))
    params = _conditional_params(basis, target, x, i)
    new_x = list(state.x)
    new_x[i] = dg.sample(params, rng, tail_eps)
    return ChainState(tuple(new_x), state.t + 1)


def gibbs_kernel_prob(
    basis: LatticeBasis,
    target: GaussianParams,
    s_i,
    s_j,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> float:
    """One-step transition probability of random-scan Gibbs from s_i to s_j.

    Zero beyond single-coordinate moves; the diagonal aggregates the
    resample-to-same-value mass of every coordinate.
    """
    a = np.asarray(s_i, dtype=np.int64)
    b = np.asarray(s_j, dtype=np.int64)
    diff = np.nonzero(a != b)[0]
    n = basis.n
    if diff.size >= 2:
        return 0.0
    if diff.size == 1:
        k = int(diff[0])
        return gibbs_conditional(basis, target, a, k, tail_eps).prob(int(b[k])) / n
    return (
        sum(
            gibbs_conditional(basis, target, a, k, tail_eps).prob(int(a[k]))
            for k in range(n)
        )
        / n
    )


def gibbs_klein_step(
    cfg: GibbsKleinConfig,
    state: ChainState,
    rng: np.random.Generator,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> ChainState:
    """One blocked update: permute, re-factorize, Klein-sample the block."""
    perm = random_permutation(cfg.basis.n, rng)
    permuted = permute_basis(cfg.basis, perm)
    z = perm.apply(state.vector()).astype(float)
    c_prime = permuted.q_factor.T @ cfg.target.center
    backward_sample_into(
        permuted.r_factor, c_prime, cfg.target.sigma, z, cfg.block_size, rng, tail_eps
    )
    x = perm.unapply(z.astype(np.int64))
    return ChainState(tuple(int(v) for v in x), state.t + 1)


def gibbs_klein_block_pmf(
    cfg: GibbsKleinConfig,
    perm: Permutation,
    z_block_new: np.ndarray,
    z_rest: np.ndarray,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> float:
    """Exact probability the block pass outputs z_block_new given z_rest and perm."""
    m = cfg.block_size
    z_block_new = np.asarray(z_block_new, dtype=float)
    z_rest = np.asarray(z_rest, dtype=float)
    if z_block_new.shape != (m,) or z_rest.shape != (cfg.basis.n - m,):
        raise ValueError("block/rest shapes do not match the configured split")
    permuted = permute_basis(cfg.basis, perm)
    c_prime = permuted.q_factor.T @ cfg.target.center
    z = np.concatenate([z_block_new, z_rest])
    return backward_pmf(permuted.r_factor, c_prime, cfg.target.sigma, z, m, tail_eps)


def gibbs_klein_kernel_prob(
    cfg: GibbsKleinConfig,
    s_i,
    s_j,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> float:
    """One-step Gibbs-Klein transition probability, averaged over permutations.

    Exact enumeration of all n! permutations; intended for kernel-level
    verification at small n.
    """
    n = cfg.basis.n
    if n > MAX_KERNEL_ENUM_DIM:
        raise ValueError(f"kernel enumeration limited to n <= {MAX_KERNEL_ENUM_DIM}")
    a = np.asarray(s_i, dtype=np.int64)
    b = np.asarray(s_j, dtype=np.int64)
    m = cfg.block_size
    total = 0.0
    count = 0
    for order in itertools.permutations(range(n)):
        perm = Permutation(order)
        z_i = perm.apply(a)
        z_j = perm.apply(b)
        count += 1
        if np.array_equal(z_i[m:], z_j[m:]):
            total += gibbs_klein_block_pmf(cfg, perm, z_j[:m], z_j[m:], tail_eps)
    return total / count


def run_chain(
    kernel: str,
    basis: LatticeBasis,
    target: GaussianParams,
    x0,
    steps: int,
    rng: np.random.Generator,
    *,
    block_size: "int | None" = None,
    burn_in: int = 0,
    scan: ScanOrder = ScanOrder.RANDOM,
    tail_eps: float = DEFAULT_TAIL_EPS,
    rng_seed: "int | None" = None,
) -> ChainTrace:
    """Apply the chosen kernel `steps` times from x0, recording every state."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if scan is not ScanOrder.RANDOM:
        raise NotImplementedError("only random-scan updating is implemented")
    state = _as_state(x0)
    states = [state]
    if kernel == "gibbs":
        for _ in range(steps):
            state = gibbs_step(basis, target, state, rng, tail_eps)
            states.append(state)
    elif kernel == "gibbs-klein":
        if block_size is None:
            raise ValueError("gibbs-klein kernel requires block_size")
        cfg = GibbsKleinConfig(basis, target, block_size)
        for _ in range(steps):
            state = gibbs_klein_step(cfg, state, rng, tail_eps)
            states.append(state)
    else:
        raise ValueError(f"unknown kernel {kernel!r} (expected 'gibbs' or 'gibbs-klein')")
    return ChainTrace(tuple(states), burn_in, rng_seed)


def gibbs_ensemble(
    basis: LatticeBasis,
    target: GaussianParams,
    x0,
    n_chains: int,
    steps: int,
    rng: np.random.Generator,
    *,
    record_at: "tuple[int, ...]" = (),
    pool_from: "int | None" = None,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> tuple[dict[int, np.ndarray], "dict[tuple, int] | None"]:
    """Run many independent Gibbs chains in lockstep, vectorized across chains.

    Same kernel as `gibbs_step`, grouped by chosen coordinate per step so the
    1-D draws batch. Returns snapshots of the (n_chains, n) state array at the
    requested times and, if `pool_from` is set, pooled state counts over all
    steps t > pool_from.
    """
    n = basis.n
    x = np.tile(np.asarray(x0, dtype=np.int64), (n_chains, 1))
    col_nrm2 = np.einsum("ij,ij->j", basis.matrix, basis.matrix)
    alphas = target.sigma / np.sqrt(col_nrm2)
    resid = x @ basis.matrix.T - target.center  # running Bx - c per chain
    snapshots: dict[int, np.ndarray] = {}
    pooled: "dict[tuple, int] | None" = {} if pool_from is not None else None
    if 0 in record_at:
        snapshots[0] = x.copy()
    for t in range(1, steps + 1):
        coords = rng.integers(0, n, size=n_chains)
        for i in range(n):
            rows = np.nonzero(coords == i)[0]
            if rows.size == 0:
                continue
            col = basis.matrix[:, i]
            centers = x[rows, i] - (resid[rows] @ col) / col_nrm2[i]
            new_vals = dg.sample_rows(alphas[i], centers, rng, tail_eps)
            resid[rows] += np.outer(new_vals - x[rows, i], col)
            x[rows, i] = new_vals
        if t in record_at:
            snapshots[t] = x.copy()
        if pooled is not None and t > pool_from:
            uniq, counts = np.unique(x, axis=0, return_counts=True)
            for row, cnt in zip(uniq, counts):
                key = tuple(int(v) for v in row)
                pooled[key] = pooled.get(key, 0) + int(cnt)
    return snapshots, pooled
