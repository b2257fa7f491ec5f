"""Discrete Gaussian sampling over lattices.

Klein's nearest-plane sampler, coordinate-wise Gibbs and blocked Gibbs-Klein
MCMC kernels, an exact enumeration oracle for validation, and an uncoded MIMO
decoding benchmark, all behind a deterministic seeded CLI.
"""

from .dgauss1d import Gaussian1DParams, IntegerSupport
from .klein import GaussianParams, KleinSampler, klein_pmf, klein_sample, klein_sigma_default
from .linalg import LatticeBasis, Permutation, load_basis
from .mcmc import ChainState, ChainTrace, GibbsKleinConfig, run_chain
from .mimo import BerTable, MimoConfig, ber_experiment
from .oracle import BalanceReport, DiscreteDistribution, enumerate_support, tv_distance

__all__ = [
    "BalanceReport",
    "BerTable",
    "ChainState",
    "ChainTrace",
    "DiscreteDistribution",
    "Gaussian1DParams",
    "GaussianParams",
    "GibbsKleinConfig",
    "IntegerSupport",
    "KleinSampler",
    "LatticeBasis",
    "MimoConfig",
    "Permutation",
    "ber_experiment",
    "enumerate_support",
    "klein_pmf",
    "klein_sample",
    "klein_sigma_default",
    "load_basis",
    "run_chain",
    "tv_distance",
]

__version__ = "0.1.0"
