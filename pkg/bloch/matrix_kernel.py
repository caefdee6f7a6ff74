"""Dense complex square-matrix arithmetic and spectral helpers for small N.

Every function takes array-likes, validates shape, and returns new complex128
arrays; inputs are never modified.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from bloch.errors import DimensionError, NotHermitianError

HERMITIAN_TOL = 1e-10

ArrayLike = Union[np.ndarray, Sequence]


@dataclass(frozen=True)
class SpectralResult:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])


def as_matrix(a: ArrayLike) -> np.ndarray:
    """Coerce to a square complex128 matrix or raise DimensionError."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def _same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def add(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _same_dim(a, b)
    return a + b


def mul(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _same_dim(a, b)
    return a @ b


def conj_transpose(a: ArrayLike) -> np.ndarray:
    return as_matrix(a).conj().T.copy()


def trace(a: ArrayLike) -> complex:
    return complex(np.trace(as_matrix(a)))


def hs_inner(a: ArrayLike, b: ArrayLike) -> complex:
    """Hilbert-Schmidt inner product Tr(a† b)."""
    a, b = as_matrix(a), as_matrix(b)
    _same_dim(a, b)
    # Tr(a† b) == sum(conj(a) * b) without forming the product
    return complex(np.vdot(a, b))


def kron(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def hermitian_deviation(a: ArrayLike) -> float:
    """Largest entry of |a - a†|."""
    m = as_matrix(a)
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(a: ArrayLike, tol: float = HERMITIAN_TOL) -> bool:
    return hermitian_deviation(a) <= tol


def eig_hermitian(a: ArrayLike, vectors: bool = False, tol: float = HERMITIAN_TOL) -> SpectralResult:
    """Eigenvalues (ascending) and optionally eigenvectors of a Hermitian matrix.

    The input is symmetrized as (a + a†)/2 before the dense solve.
    Eigenvectors are returned as the columns of a unitary matrix.
    """
    m = as_matrix(a)
    dev = hermitian_deviation(m)
    if dev > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max deviation {dev:.3e} > {tol:.0e})")
    sym = 0.5 * (m + m.conj().T)
    if vectors:
        w, v = np.linalg.eigh(sym)
        return SpectralResult(eigenvalues=w, eigenvectors=v)
    return SpectralResult(eigenvalues=np.linalg.eigvalsh(sym))


def _subsystem_index(keep: Union[int, str]) -> int:
    if isinstance(keep, str):
        key = keep.strip().upper()
        if key in ("A", "B"):
            return 0 if key == "A" else 1
    elif keep in (0, 1):
        return int(keep)
    raise DimensionError(f"keep must be 'A', 'B', 0 or 1, got {keep!r}")


def partial_trace(a: ArrayLike, dims: Tuple[int, int], keep: Union[int, str] = "A") -> np.ndarray:
    """Reduced matrix of one factor of a bipartite operator on C^{N_A} ⊗ C^{N_B}."""
    m = as_matrix(a)
    n_a, n_b = (int(d) for d in dims)
    if n_a < 1 or n_b < 1 or n_a * n_b != m.shape[0]:
        raise DimensionError(
            f"dims {n_a}x{n_b} do not factor a {m.shape[0]}x{m.shape[0]} matrix"
        )
    t = m.reshape(n_a, n_b, n_a, n_b)
    if _subsystem_index(keep) == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)
