"""Dense basis handling: QR factorization, Gram-Schmidt norms, permutations.

A lattice basis is stored column-wise: ``matrix[:, i]`` is the i-th basis
vector, so a coefficient vector ``x`` maps to the lattice point ``matrix @ x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Relative diagonal threshold below which a factorization is rejected.
SINGULAR_RTOL = 1e-12


class SingularBasisError(ValueError):
    """Basis columns are linearly dependent (or numerically close to it)."""


def qr_decompose(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """QR-factorize a full-rank square matrix with r_ii > 0.

    LAPACK Householder QR with a sign fix on each column of Q / row of R so
    the diagonal of R is strictly positive, which makes the factorization
    unique and keeps downstream step sizes sigma/r_ii sign-stable.
    |r_ii| equals the norm of the i-th Gram-Schmidt vector either way.
    """
    b = np.asarray(matrix, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError(f"basis matrix must be square, got shape {b.shape}")
    if b.shape[0] < 1:
        raise ValueError("basis must have dimension >= 1")
    q, r = np.linalg.qr(b)
    signs = np.sign(np.diag(r))
    signs[signs == 0.0] = 1.0
    q = q * signs[np.newaxis, :]
    r = r * signs[:, np.newaxis]
    max_col_norm = np.linalg.norm(b, axis=0).max()
    if np.min(np.diag(r)) < SINGULAR_RTOL * max_col_norm:
        raise SingularBasisError(
            "basis is singular or near-singular: min |r_ii| = "
            f"{np.min(np.abs(np.diag(r))):.3e} vs column scale {max_col_norm:.3e}"
        )
    return q, r


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LatticeBasis:
    """Full-rank basis with cached QR factors. Immutable once built."""

    n: int
    matrix: np.ndarray
    q_factor: np.ndarray
    r_factor: np.ndarray

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "LatticeBasis":
        q, r = qr_decompose(matrix)
        return cls(
            n=q.shape[0],
            matrix=_readonly(matrix),
            q_factor=_readonly(q),
            r_factor=_readonly(r),
        )

    @classmethod
    def identity(cls, n: int) -> "LatticeBasis":
        return cls.from_matrix(np.eye(n))

    def point(self, x: np.ndarray) -> np.ndarray:
        """Lattice point B @ x for an integer coefficient vector."""
        return self.matrix @ np.asarray(x, dtype=float)


def gram_schmidt_norms(basis: LatticeBasis) -> np.ndarray:
    """Norms of the Gram-Schmidt orthogonalized basis vectors, i.e. |r_ii|."""
    return np.abs(np.diag(basis.r_factor))


@dataclass(frozen=True)
class Permutation:
    """Permutation of column indices, stored as an index array.

    ``order[i] = j`` means position i of the permuted object takes entry j of
    the original, so applying to a basis gives ``B[:, order]``.
    """

    order: tuple[int, ...] = field()

    def __post_init__(self) -> None:
        if sorted(self.order) != list(range(len(self.order))):
            raise ValueError(f"not a permutation of 0..{len(self.order) - 1}: {self.order}")

    @property
    def n(self) -> int:
        return len(self.order)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.order):
            inv[j] = i
        return Permutation(tuple(inv))

    def apply(self, x: np.ndarray) -> np.ndarray:
        """z = E^-1 x: coefficients of x relabeled to the permuted basis."""
        return np.asarray(x)[list(self.order)]

    def unapply(self, z: np.ndarray) -> np.ndarray:
        """x = E z: undo `apply`, so B @ unapply(z) == (B E) @ z."""
        z = np.asarray(z)
        x = np.empty_like(z)
        x[list(self.order)] = z
        return x


def random_permutation(n: int, rng: np.random.Generator) -> Permutation:
    """Uniformly random permutation (Fisher-Yates via the generator)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Permutation(tuple(int(i) for i in rng.permutation(n)))


def permute_basis(basis: LatticeBasis, perm: Permutation) -> LatticeBasis:
    """Reorder basis columns by `perm` and re-factorize."""
    if perm.n != basis.n:
        raise ValueError(f"permutation size {perm.n} != basis dimension {basis.n}")
    return LatticeBasis.from_matrix(basis.matrix[:, list(perm.order)])


def load_basis(path: str) -> LatticeBasis:
    """Read a basis file: first line n, then n rows of n reals.

    Row i holds the i-th coordinate of every basis column.
    """
    with open(path, "r", encoding="ascii") as fh:
        tokens = fh.read().split()
    if not tokens:
        raise ValueError(f"empty basis file: {path}")
    n = int(tokens[0])
    if n < 1:
        raise ValueError(f"bad dimension {n} in {path}")
    vals = tokens[1:]
    if len(vals) != n * n:
        raise ValueError(f"expected {n * n} entries after header in {path}, got {len(vals)}")
    matrix = np.array([float(v) for v in vals], dtype=float).reshape(n, n)
    return LatticeBasis.from_matrix(matrix)
