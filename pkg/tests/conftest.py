import numpy as np
import pytest

from lattice_gibbs.linalg import LatticeBasis


def make_random_basis(rng: np.random.Generator, n: int = 3) -> LatticeBasis:
    """Random full-rank basis with moderate conditioning.

    Rotation x diagonal x unit upper-triangular shear keeps enumeration boxes
    at desk scale while still exercising genuinely correlated columns.
    """
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    diag = rng.uniform(0.85, 1.25, n)
    shear = np.eye(n)
    shear[np.triu_indices(n, 1)] = rng.uniform(-0.3, 0.3, n * (n - 1) // 2)
    return LatticeBasis.from_matrix(q @ np.diag(diag) @ shear)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def basis_2d():
    """The workhorse 2-D test basis: columns (1,0) and (0.5,1)."""
    return LatticeBasis.from_matrix([[1.0, 0.5], [0.0, 1.0]])
