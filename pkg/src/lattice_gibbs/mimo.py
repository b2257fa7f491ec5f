"""Uncoded MIMO detection benchmark: ZF / ML baselines versus lattice Gaussian
sampler decoders on the channel lattice.

Conventions (the textbook ones, fixed here for reproducibility):

* 16-QAM levels {-3,-1,1,3} per real dimension, average symbol energy 10,
  4 bits per symbol, Gray-labeled per real dimension.
* E_b/N_0 handling: E_b = E_s/4, N_0 = E_b 10^(-dB/10), each real noise
  dimension has variance N_0/2.
* Complex model y = Hx + w is realified as [[Re H, -Im H], [Im H, Re H]],
  which preserves Euclidean distances, then rescaled to the integer lattice:
  with symbol levels s = 2k - 3, k in {0..3}, the decoding problem becomes
  CVP(G, t) with G = 2 B_real and t = y_real + 3 B_real 1.
* Sampler decoders run with every 1-D draw restricted to {0..3} and return
  the best (lowest residual) point among all states visited, starting from
  the rounded ZF estimate.
"""

from __future__ import annotations

import functools
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np

QAM16_LEVELS = (-3.0, -1.0, 1.0, 3.0)
BITS_PER_SYMBOL = 4
AVG_SYMBOL_ENERGY = 10.0  # mean |s|^2 over the 16-QAM set
# Gray labels per real level, indexed by k = (level + 3) / 2
GRAY_BITS = ((0, 0), (0, 1), (1, 1), (1, 0))

SAMPLER_DECODERS = ("klein", "gibbs", "gibbs-klein")


@dataclass(frozen=True)
class MimoConfig:
    n_tx: int = 4
    n_rx: int = 4
    ebn0_db: float = 15.0
    trials: int = 10_000
    iteration_budgets: tuple[int, ...] = (1, 5, 20)
    block_sizes: tuple[int, ...] = (1, 2, 4, 8)
    decoders: tuple[str, ...] = ("zf", "ml", "klein", "gibbs", "gibbs-klein")
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_tx != self.n_rx:
            raise ValueError("square channels only: n_tx must equal n_rx")
        if self.n_tx < 1 or self.trials < 0:
            raise ValueError("bad antenna count or trial count")
        if any(t < 1 for t in self.iteration_budgets):
            raise ValueError("iteration budgets must be positive")
        n_real = 2 * self.n_tx
        if any(not 1 <= m <= n_real for m in self.block_sizes):
            raise ValueError(f"block sizes must lie in [1, {n_real}]")
        known = {"zf", "ml", *SAMPLER_DECODERS}
        unknown = set(self.decoders) - known
        if unknown:
            raise ValueError(f"unknown decoders: {sorted(unknown)}")


@dataclass(frozen=True)
class BerRow:
    decoder: str
    block_size: "int | None"
    iterations: "int | None"
    trials: int
    bit_errors: int
    bits: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0


@dataclass(frozen=True)
class BerTable:
    rows: tuple[BerRow, ...]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("decoder,block_size,iterations,trials,bit_errors,bits,ber\n")
        for r in self.rows:
            bs = "" if r.block_size is None else str(r.block_size)
            it = "" if r.iterations is None else str(r.iterations)
            out.write(
                f"{r.decoder},{bs},{it},{r.trials},{r.bit_errors},{r.bits},{r.ber:.10g}\n"
            )
        return out.getvalue()


def noise_variance_per_real_dim(ebn0_db: float) -> float:
    eb = AVG_SYMBOL_ENERGY / BITS_PER_SYMBOL
    n0 = eb * 10.0 ** (-ebn0_db / 10.0)
    return n0 / 2.0


def complex_to_real_lattice(h: np.ndarray) -> np.ndarray:
    """[[Re H, -Im H], [Im H, Re H]]: the distance-preserving real embedding."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"H must be square, got shape {h.shape}")
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def complex_to_real_vector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.concatenate([v.real, v.imag])


def real_to_complex_vector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    half = v.shape[0] // 2
    return v[:half] + 1j * v[half:]


def generate_instance(
    cfg: MimoConfig, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fresh channel, uniform 16-QAM symbols, and noisy observation."""
    n_t, n_r = cfg.n_tx, cfg.n_rx
    h = (rng.normal(size=(n_r, n_t)) + 1j * rng.normal(size=(n_r, n_t))) / math.sqrt(2.0)
    levels = np.asarray(QAM16_LEVELS)
    symbols = levels[rng.integers(0, 4, n_t)] + 1j * levels[rng.integers(0, 4, n_t)]
    std = math.sqrt(noise_variance_per_real_dim(cfg.ebn0_db))
    noise = std * (rng.normal(size=n_r) + 1j * rng.normal(size=n_r))
    return h, symbols, h @ symbols + noise


def nearest_levels(values: np.ndarray) -> np.ndarray:
    """Round each real value to the nearest 16-QAM level."""
    return np.clip(2.0 * np.round((np.asarray(values, dtype=float) + 3.0) / 2.0) - 3.0, -3.0, 3.0)


def zf_decode(h: np.ndarray, y: np.ndarray, constellation=QAM16_LEVELS) -> np.ndarray:
    """Invert the channel and round componentwise."""
    del constellation  # fixed 16-QAM grid
    try:
        x_ls = np.linalg.solve(h, y)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular channel matrix") from exc
    return nearest_levels(x_ls.real) + 1j * nearest_levels(x_ls.imag)


@functools.lru_cache(maxsize=4)
def _all_candidates(n_tx: int) -> np.ndarray:
    """All 16^n_tx symbol vectors, lexicographic in (re, im) per antenna."""
    if n_tx > 5:
        raise ValueError(f"exhaustive ML enumeration limited to n_tx <= 5, got {n_tx}")
    points = [re + 1j * im for re in QAM16_LEVELS for im in QAM16_LEVELS]
    cands = np.array(list(itertools.product(points, repeat=n_tx)), dtype=complex)
    cands.setflags(write=False)
    return cands


def ml_decode(h: np.ndarray, y: np.ndarray, constellation=QAM16_LEVELS) -> np.ndarray:
    """Exhaustive argmin of ||Hx - y||; first (lexicographic) winner on ties."""
    del constellation
    cands = _all_candidates(h.shape[1])
    diff = cands @ h.T - y
    costs = np.einsum("ij,ij->i", diff.real, diff.real) + np.einsum(
        "ij,ij->i", diff.imag, diff.imag
    )
    return cands[int(np.argmin(costs))].copy()


def symbols_to_bits(symbols: np.ndarray) -> np.ndarray:
    """Gray bit labels, 4 bits per complex symbol (re pair then im pair)."""
    bits: list[int] = []
    for s in np.asarray(symbols, dtype=complex):
        for part in (s.real, s.imag):
            bits.extend(GRAY_BITS[int(round((part + 3.0) / 2.0))])
    return np.array(bits, dtype=np.int8)


def count_bit_errors(decided: np.ndarray, transmitted: np.ndarray) -> int:
    return int(np.sum(symbols_to_bits(decided) != symbols_to_bits(transmitted)))


def _integer_lattice_problem(h: np.ndarray, y: np.ndarray):
    """Rescale to CVP(G, t) over k in {0..3}^(2 n_tx); distances are preserved."""
    b_real = complex_to_real_lattice(h)
    g = 2.0 * b_real
    t = complex_to_real_vector(y) + 3.0 * b_real.sum(axis=1)
    return g, t


# Lean inner-loop helpers: same math as dgauss1d.sample_restricted and
# linalg.qr_decompose, stripped of per-call validation for the trial loop.

_ALLOWED_COEFFS = np.arange(4.0)


def _draw_restricted4(alpha: float, center: float, rng: np.random.Generator) -> int:
    logw = -((_ALLOWED_COEFFS - center) ** 2) / (2.0 * alpha * alpha)
    w = np.exp(logw - logw.max())
    cum = np.cumsum(w)
    return int(np.searchsorted(cum, rng.random() * cum[-1], side="left"))


def _qr_pos(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q, r = np.linalg.qr(mat)
    signs = np.sign(np.diag(r))
    signs[signs == 0.0] = 1.0
    return q * signs[np.newaxis, :], r * signs[:, np.newaxis]


def _backward_restricted(
    r: np.ndarray,
    c_prime: np.ndarray,
    sigma: float,
    z: np.ndarray,
    m: int,
    rng: np.random.Generator,
) -> None:
    for i in range(m - 1, -1, -1):
        rii = r[i, i]
        center = (c_prime[i] - r[i, i + 1 :] @ z[i + 1 :]) / rii
        z[i] = _draw_restricted4(sigma / abs(rii), center, rng)


def _coeffs_to_symbols(k: np.ndarray) -> np.ndarray:
    return real_to_complex_vector(2.0 * np.asarray(k, dtype=float) - 3.0)


def _decode_checkpoints(
    h: np.ndarray,
    y: np.ndarray,
    strategy: str,
    budgets: tuple[int, ...],
    rng: np.random.Generator,
    block_size: "int | None" = None,
) -> dict[int, np.ndarray]:
    """Run one sampler chain, returning the best-visited point at each budget.

    One iteration samples n = 2 n_tx components: n coordinate steps for gibbs,
    n/m block steps for gibbs-klein, one full backward pass for klein.
    """
    g, t = _integer_lattice_problem(h, y)
    n = g.shape[0]
    q0, r0 = _qr_pos(g)
    sigma = float(np.abs(np.diag(r0)).min() / math.sqrt(math.log(n)))
    c_prime0 = q0.T @ t

    k = np.clip(np.round((complex_to_real_vector(zf_decode(h, y)) + 3.0) / 2.0), 0, 3).astype(
        np.int64
    )
    resid = g @ k - t
    best_cost = float(resid @ resid)
    best_k = k.copy()

    col_nrm2 = np.einsum("ij,ij->j", g, g)
    col_alpha = sigma / np.sqrt(col_nrm2)
    results: dict[int, np.ndarray] = {}
    max_budget = max(budgets)
    for iteration in range(1, max_budget + 1):
        if strategy == "klein":
            z = np.zeros(n)
            _backward_restricted(r0, c_prime0, sigma, z, n, rng)
            k = z.astype(np.int64)
            resid = g @ k - t
            cost = float(resid @ resid)
            if cost < best_cost:
                best_cost, best_k = cost, k.copy()
        elif strategy == "gibbs":
            for _ in range(n):
                i = int(rng.integers(n))
                gi = g[:, i]
                center = k[i] - float(resid @ gi) / col_nrm2[i]
                new = _draw_restricted4(col_alpha[i], center, rng)
                if new != k[i]:
                    resid = resid + (new - k[i]) * gi
                    k[i] = new
                    cost = float(resid @ resid)
                    if cost < best_cost:
                        best_cost, best_k = cost, k.copy()
        elif strategy == "gibbs-klein":
            if block_size is None:
                raise ValueError("gibbs-klein decoding requires block_size")
            for _ in range(-(-n // block_size)):
                order = rng.permutation(n)
                q, r = _qr_pos(g[:, order])
                z = k[order].astype(float)
                _backward_restricted(r, q.T @ t, sigma, z, block_size, rng)
                k = np.empty(n, dtype=np.int64)
                k[order] = z.astype(np.int64)
                resid = g @ k - t
                cost = float(resid @ resid)
                if cost < best_cost:
                    best_cost, best_k = cost, k.copy()
        else:
            raise ValueError(f"unknown sampler strategy {strategy!r}")
        if iteration in budgets:
            results[iteration] = _coeffs_to_symbols(best_k)
    return results


def sampler_decode(
    h: np.ndarray,
    y: np.ndarray,
    strategy: str,
    iterations: int,
    rng: np.random.Generator,
    block_size: "int | None" = None,
) -> np.ndarray:
    """Best constellation point visited by the chosen sampler within the budget."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    return _decode_checkpoints(h, y, strategy, (iterations,), rng, block_size)[iterations]


def ber_experiment_detailed(cfg: MimoConfig) -> tuple[BerTable, dict[tuple, np.ndarray]]:
    """Paired BER comparison plus per-trial bit-error counts per decoder.

    Channels, symbols, and noise are identical across decoders within a trial;
    each decoder draws from its own spawned substream. The per-trial arrays
    are keyed by (decoder, block_size, iterations) with None for fields that
    do not apply, enabling paired significance margins downstream.
    """
    if cfg.trials == 0:
        return BerTable(()), {}
    budgets = tuple(sorted(set(cfg.iteration_budgets)))
    jobs: list[tuple[str, "int | None"]] = []
    for dec in cfg.decoders:
        if dec == "gibbs-klein":
            jobs.extend(("gibbs-klein", m) for m in cfg.block_sizes)
        elif dec in ("klein", "gibbs"):
            jobs.append((dec, None))
    keys: list[tuple] = []
    if "zf" in cfg.decoders:
        keys.append(("zf", None, None))
    if "ml" in cfg.decoders:
        keys.append(("ml", None, None))
    keys.extend((s, m, b) for s, m in jobs for b in budgets)
    per_trial = {k: np.zeros(cfg.trials, dtype=np.int32) for k in keys}

    children = np.random.SeedSequence(cfg.seed).spawn(cfg.trials)
    for trial in range(cfg.trials):
        streams = children[trial].spawn(1 + len(jobs))
        h, symbols, y = generate_instance(cfg, np.random.default_rng(streams[0]))
        if "zf" in cfg.decoders:
            per_trial[("zf", None, None)][trial] = count_bit_errors(zf_decode(h, y), symbols)
        if "ml" in cfg.decoders:
            per_trial[("ml", None, None)][trial] = count_bit_errors(ml_decode(h, y), symbols)
        for job_idx, (strategy, m) in enumerate(jobs):
            rng = np.random.default_rng(streams[1 + job_idx])
            decided = _decode_checkpoints(h, y, strategy, budgets, rng, m)
            for budget, sym_hat in decided.items():
                per_trial[(strategy, m, budget)][trial] = count_bit_errors(sym_hat, symbols)

    bits_total = cfg.trials * cfg.n_tx * BITS_PER_SYMBOL
    rows = tuple(
        BerRow(dec, m, budget, cfg.trials, int(per_trial[(dec, m, budget)].sum()), bits_total)
        for dec, m, budget in keys
    )
    return BerTable(rows), per_trial


def ber_experiment(cfg: MimoConfig) -> BerTable:
    """Paired BER comparison: identical channels/symbols/noise across decoders."""
    return ber_experiment_detailed(cfg)[0]
