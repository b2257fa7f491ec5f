"""Command-line front end: sampling runs, convergence diagnostics, MIMO benchmark.

All commands are deterministic given --seed (or the LATTICE_GIBBS_SEED env
var; hard default 0) and write CSV with '\n' line endings and '.' decimals.
Output is assembled in memory and written in one shot, so a failing run never
leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import mcmc, mimo, oracle
from .dgauss1d import DEFAULT_TAIL_EPS
from .klein import GaussianParams, KleinSampler, klein_sample_many
from .linalg import LatticeBasis, load_basis

SEED_ENV_VAR = "LATTICE_GIBBS_SEED"

ALGORITHMS = ("klein", "gibbs", "gibbs-klein")


@dataclass(frozen=True)
class RunConfig:
    """Validated settings shared by the sampling-style subcommands."""

    basis: LatticeBasis
    algorithm: str
    sigma: float
    center: np.ndarray
    x0: np.ndarray
    block_size: "int | None"
    iterations: int
    chains: int
    burn_in: int
    seed: int
    tail_eps: float
    output: str

    @property
    def target(self) -> GaussianParams:
        return GaussianParams(self.sigma, self.center)


def _resolve_seed(arg_seed: "int | None") -> int:
    if arg_seed is not None:
        return arg_seed
    env = os.environ.get(SEED_ENV_VAR)
    return int(env) if env else 0


def _parse_vector(text: "str | None", n: int, what: str) -> np.ndarray:
    if text is None:
        return np.zeros(n)
    vals = [float(v) for v in text.split(",") if v.strip() != ""]
    if len(vals) != n:
        raise ValueError(f"{what} must have {n} comma-separated entries, got {len(vals)}")
    return np.array(vals)


def _write_output(path: str, content: str) -> None:
    if path == "-":
        sys.stdout.write(content)
    else:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(content)


def _build_run_config(args: argparse.Namespace) -> RunConfig:
    basis = load_basis(args.basis)
    n = basis.n
    if args.algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {args.algo!r}")
    if args.algo == "gibbs-klein":
        if args.block_size is None:
            raise ValueError("--block-size is required for gibbs-klein")
        if not 1 <= args.block_size <= n:
            raise ValueError(f"--block-size must lie in [1, {n}]")
    if args.sigma <= 0:
        raise ValueError("--sigma must be positive")
    if args.iters < 0:
        raise ValueError("--iters must be >= 0")
    if args.chains < 1:
        raise ValueError("--chains must be >= 1")
    if not 0.0 < args.tail_eps < 1.0:
        raise ValueError("--tail-eps must lie in (0, 1)")
    if args.burn_in < 0:
        raise ValueError("--burn-in must be >= 0")
    center = _parse_vector(args.center, n, "--center")
    x0 = _parse_vector(args.x0, n, "--x0").astype(np.int64)
    return RunConfig(
        basis=basis,
        algorithm=args.algo,
        sigma=args.sigma,
        center=center,
        x0=x0,
        block_size=args.block_size,
        iterations=args.iters,
        chains=args.chains,
        burn_in=args.burn_in,
        seed=_resolve_seed(args.seed),
        tail_eps=args.tail_eps,
        output=args.output,
    )


def _chain_streams(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def cmd_sample(cfg: RunConfig) -> int:
    """Write one CSV row per recorded state: chain,t,x_1,...,x_n."""
    n = cfg.basis.n
    header = "chain,t," + ",".join(f"x_{i + 1}" for i in range(n))
    lines = [header]
    rngs = _chain_streams(cfg.seed, cfg.chains)
    for chain_idx, rng in enumerate(rngs):
        if cfg.algorithm == "klein":
            sampler = KleinSampler(cfg.basis, cfg.target)
            draws = klein_sample_many(sampler, cfg.iterations, rng, cfg.tail_eps)
            for t in range(cfg.iterations):
                if t + 1 >= cfg.burn_in:
                    coords = ",".join(str(int(v)) for v in draws[t])
                    lines.append(f"{chain_idx},{t + 1},{coords}")
        else:
            trace = mcmc.run_chain(
                cfg.algorithm,
                cfg.basis,
                cfg.target,
                cfg.x0,
                cfg.iterations,
                rng,
                block_size=cfg.block_size,
                burn_in=cfg.burn_in,
                tail_eps=cfg.tail_eps,
                rng_seed=cfg.seed,
            )
            for state in trace.states:
                if state.t >= cfg.burn_in:
                    coords = ",".join(str(v) for v in state.x)
                    lines.append(f"{chain_idx},{state.t},{coords}")
    _write_output(cfg.output, "\n".join(lines) + "\n")
    return 0


def _default_checkpoints(t_max: int) -> list[int]:
    pts = []
    t = 1
    while t < t_max:
        pts.append(t)
        t *= 2
    if t_max >= 1:
        pts.append(t_max)
    return sorted(set(pts))


def _gibbs_klein_snapshots(
    cfg: RunConfig, checkpoints: list[int]
) -> dict[int, np.ndarray]:
    marks = set(checkpoints)
    snaps = {t: np.empty((cfg.chains, cfg.basis.n), dtype=np.int64) for t in marks}
    kcfg = mcmc.GibbsKleinConfig(cfg.basis, cfg.target, cfg.block_size)
    for chain_idx, rng in enumerate(_chain_streams(cfg.seed, cfg.chains)):
        state = mcmc.ChainState(tuple(int(v) for v in cfg.x0), 0)
        for t in range(1, max(checkpoints) + 1):
            state = mcmc.gibbs_klein_step(kcfg, state, rng, cfg.tail_eps)
            if t in marks:
                snaps[t][chain_idx] = state.x
    return snaps


def cmd_diagnose(cfg: RunConfig, checkpoints: "list[int] | None" = None) -> int:
    """Write CSV t,tv_distance of empirical-vs-exact TV across the ensemble.

    Also prints a detailed-balance residual report (stderr) for the MCMC
    kernels, computed over the highest-probability single-flip pairs.
    """
    exact = oracle.enumerate_support(cfg.basis, cfg.target, cfg.tail_eps)
    if checkpoints is None:
        checkpoints = _default_checkpoints(cfg.iterations)
    checkpoints = sorted(set(checkpoints))
    if not checkpoints or checkpoints[0] < 1 or checkpoints[-1] > cfg.iterations:
        raise ValueError("checkpoints must lie in [1, iters]")

    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    if cfg.algorithm == "klein":
        sampler = KleinSampler(cfg.basis, cfg.target)
        snaps = {
            t: klein_sample_many(sampler, cfg.chains, rng, cfg.tail_eps) for t in checkpoints
        }
    elif cfg.algorithm == "gibbs":
        snaps, _ = mcmc.gibbs_ensemble(
            cfg.basis,
            cfg.target,
            cfg.x0,
            cfg.chains,
            max(checkpoints),
            rng,
            record_at=tuple(checkpoints),
            tail_eps=cfg.tail_eps,
        )
    else:
        snaps = _gibbs_klein_snapshots(cfg, checkpoints)

    lines = ["t,tv_distance"]
    for t in checkpoints:
        tv = oracle.tv_distance(oracle.empirical_from_states(snaps[t]), exact)
        lines.append(f"{t},{tv:.10g}")
    _write_output(cfg.output, "\n".join(lines) + "\n")

    if cfg.algorithm in ("gibbs", "gibbs-klein"):
        pairs = oracle.single_flip_pairs(exact, max_pairs=200)
        if cfg.algorithm == "gibbs":
            kernel = lambda a, b: mcmc.gibbs_kernel_prob(  # noqa: E731
                cfg.basis, cfg.target, a, b, cfg.tail_eps
            )
        else:
            kcfg = mcmc.GibbsKleinConfig(cfg.basis, cfg.target, cfg.block_size)
            kernel = lambda a, b: mcmc.gibbs_klein_kernel_prob(  # noqa: E731
                kcfg, a, b, cfg.tail_eps
            )
        report = oracle.detailed_balance_residual(kernel, exact, pairs)
        print(
            f"detailed_balance max_abs={report.max_abs_residual:.6e} "
            f"max_rel={report.max_rel_residual:.6e} pairs={report.pairs_checked}",
            file=sys.stderr,
        )
    return 0


def cmd_mimo(args: argparse.Namespace) -> int:
    """Run the paired BER experiment and write the table CSV."""
    cfg = mimo.MimoConfig(
        n_tx=args.ntx,
        n_rx=args.nrx if args.nrx is not None else args.ntx,
        ebn0_db=args.ebn0_db,
        trials=args.trials,
        iteration_budgets=tuple(int(v) for v in args.iterations.split(",")),
        block_sizes=tuple(int(v) for v in args.block_sizes.split(",")),
        decoders=tuple(args.decoders.split(",")),
        seed=_resolve_seed(args.seed),
    )
    table = mimo.ber_experiment(cfg)
    _write_output(args.output, table.to_csv())
    return 0


def _add_common_sampling_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--basis", required=True, help="basis file (header n, then n rows)")
    p.add_argument("--algo", required=True, choices=ALGORITHMS)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--center", default=None, help="comma-separated target center")
    p.add_argument("--x0", default=None, help="comma-separated integer start state")
    p.add_argument("--block-size", type=int, default=None)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--burn-in", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tail-eps", type=float, default=DEFAULT_TAIL_EPS)
    p.add_argument("--output", "-o", default="-", help="CSV path ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lattice-gibbs",
        description="Lattice Gaussian sampling, MCMC diagnostics, and MIMO decoding",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="draw samples / run chains, CSV per state")
    _add_common_sampling_flags(p_sample)

    p_diag = sub.add_parser("diagnose", help="TV convergence vs the exact oracle")
    _add_common_sampling_flags(p_diag)
    p_diag.add_argument("--checkpoints", default=None, help="comma-separated t values")

    p_mimo = sub.add_parser("mimo", help="paired BER benchmark")
    p_mimo.add_argument("--ntx", type=int, default=4)
    p_mimo.add_argument("--nrx", type=int, default=None)
    p_mimo.add_argument("--ebn0-db", type=float, default=15.0)
    p_mimo.add_argument("--trials", type=int, required=True)
    p_mimo.add_argument("--iterations", default="1,5,20")
    p_mimo.add_argument("--block-sizes", default="1,2,4,8")
    p_mimo.add_argument("--decoders", default="zf,ml,klein,gibbs,gibbs-klein")
    p_mimo.add_argument("--seed", type=int, default=None)
    p_mimo.add_argument("--output", "-o", default="-")
    return parser


def main(argv: "list[str] | None" = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sample":
            return cmd_sample(_build_run_config(args))
        if args.command == "diagnose":
            checkpoints = None
            if args.checkpoints is not None:
                checkpoints = [int(v) for v in args.checkpoints.split(",")]
            return cmd_diagnose(_build_run_config(args), checkpoints)
        if args.command == "mimo":
            return cmd_mimo(args)
        raise ValueError(f"unknown command {args.command!r}")
    except (ValueError, OSError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
