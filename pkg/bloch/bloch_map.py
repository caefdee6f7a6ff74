"""The correspondence D(r) = (I + c_N r.Λ)/N between operator-states and Bloch vectors."""

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from bloch.errors import BasisError, DimensionError, NotHermitianError, StateError, WeightError
from bloch.generator_bases import GeneratorBasis, standard_basis
from bloch.matrix_kernel import (
    HERMITIAN_TOL,
    as_matrix,
    eig_hermitian,
    hermitian_deviation,
    identity,
)

WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OperatorState:
    """Hermitian, unit-trace, positive semidefinite N x N matrix."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = as_matrix(self.matrix)
        dev = hermitian_deviation(m)
        if dev > HERMITIAN_TOL:
            raise NotHermitianError(f"state matrix is not Hermitian (deviation {dev:.3e})")
        tr = np.trace(m)
        if abs(tr - 1.0) > HERMITIAN_TOL:
            raise StateError(f"state matrix must have unit trace, got {tr.real:.12g}")
        low = eig_hermitian(m).min_eigenvalue
        if low < -HERMITIAN_TOL:
            raise StateError(f"state matrix is not positive semidefinite (min eigenvalue {low:.3e})")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class BlochVector:
    components: np.ndarray
    basis: GeneratorBasis

    def __post_init__(self) -> None:
        c = np.array(self.components, dtype=float).reshape(-1)
        if c.size != self.basis.size:
            raise DimensionError(
                f"vector has {c.size} components but the basis has {self.basis.size} generators"
            )
        c.setflags(write=False)
        object.__setattr__(self, "components", c)

    @property
    def n_dim(self) -> int:
        return self.basis.n_dim

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def dot(self, other: "BlochVector") -> float:
        same_basis(self, other)
        return float(self.components @ other.components)

    def replace(self, components: Sequence[float]) -> "BlochVector":
        return BlochVector(np.asarray(components, dtype=float), self.basis)


def bases_match(a: GeneratorBasis, b: GeneratorBasis) -> bool:
    if a is b:
        return True
    return a.labels == b.labels and a.stack.shape == b.stack.shape and np.allclose(
        a.stack, b.stack, rtol=0.0, atol=1e-12
    )


def same_basis(*vectors: BlochVector) -> GeneratorBasis:
    basis = vectors[0].basis
    for v in vectors[1:]:
        if not bases_match(v.basis, basis):
            raise BasisError("vectors refer to different generator bases")
    return basis


def pure_state(psi: Sequence[complex]) -> OperatorState:
    """Vector-state |ψ><ψ| of a (not necessarily normalized) nonzero vector."""
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise StateError("cannot build a vector-state from the zero vector")
    v = v / nrm
    return OperatorState(np.outer(v, v.conj()))


def decode(r: BlochVector) -> np.ndarray:
    """(1/N)(I + c_N Σ r_i Λ_i). Hermitian with unit trace, but not necessarily PSD."""
    b = r.basis
    n = b.n_dim
    return (identity(n) + b.c_n * np.einsum("k,kij->ij", r.components, b.stack)) / n


def encode_matrix(m: Union[np.ndarray, Sequence], basis: GeneratorBasis) -> BlochVector:
    """r_i = e_N Tr(m Λ_i) for any Hermitian m of matching dimension."""
    m = as_matrix(m)
    if m.shape[0] != basis.n_dim:
        raise DimensionError(f"matrix is {m.shape[0]}x{m.shape[0]} but basis is SU({basis.n_dim})")
    dev = hermitian_deviation(m)
    if dev > HERMITIAN_TOL:
        raise NotHermitianError(f"cannot encode a non-Hermitian matrix (deviation {dev:.3e})")
    raw = basis.e_n * np.einsum("kij,ji->k", basis.stack, m)
    residue = float(np.max(np.abs(raw.imag)))
    if residue > HERMITIAN_TOL:
        raise NotHermitianError(f"imaginary residue {residue:.3e} in Bloch components")
    return BlochVector(raw.real, basis)


def encode(d: Union[OperatorState, np.ndarray], basis: GeneratorBasis) -> BlochVector:
    state = d if isinstance(d, OperatorState) else OperatorState(d)
    return encode_matrix(state.matrix, basis)


def purity(r: BlochVector) -> float:
    """Tr D(r)^2 = 1/N + (1 - 1/N) |r|^2."""
    n = r.n_dim
    return 1.0 / n + (1.0 - 1.0 / n) * float(r.components @ r.components)


def is_state(r: BlochVector, tol: float = 1e-10) -> bool:
    return eig_hermitian(decode(r)).min_eigenvalue >= -tol


def to_state(r: BlochVector) -> OperatorState:
    """Decode and validate; raises StateError outside the state region."""
    return OperatorState(decode(r))


def convex_combine(terms: Iterable[Tuple[float, BlochVector]]) -> BlochVector:
    """Σ w_i r_i for weights that are nonnegative and sum to one.

    Weights are checked, never renormalized.
    """
    terms = list(terms)
    if not terms:
        raise WeightError("convex_combine needs at least one term")
    weights = np.array([float(w) for w, _ in terms])
    if np.any(weights < 0):
        raise WeightError(f"negative weight in convex combination: {weights.min():.6g}")
    if abs(weights.sum() - 1.0) > WEIGHT_TOL:
        raise WeightError(f"weights sum to {weights.sum():.15g}, expected 1")
    basis = same_basis(*(r for _, r in terms))
    comps = np.stack([r.components for _, r in terms])
    return BlochVector(weights @ comps, basis)


def qubit_from_spherical(rad: float, theta: float, phi: float) -> OperatorState:
    """½[[1 + r cosθ, r sinθ e^{-iφ}], [r sinθ e^{iφ}, 1 - r cosθ]]."""
    if not 0.0 <= rad <= 1.0:
        raise StateError(f"radius must lie in [0, 1], got {rad}")
    off = rad * math.sin(theta) * np.exp(-1j * phi)
    m = 0.5 * np.array(
        [[1.0 + rad * math.cos(theta), off], [np.conj(off), 1.0 - rad * math.cos(theta)]],
        dtype=np.complex128,
    )
    return OperatorState(m)


def qubit_vector(x: float, y: float, z: float) -> BlochVector:
    """Bloch vector against the Pauli basis."""
    return BlochVector(np.array([x, y, z], dtype=float), _pauli())


@functools.lru_cache(maxsize=None)
def _pauli() -> GeneratorBasis:
    return standard_basis(2)
