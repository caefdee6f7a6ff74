"""Measurement simplexes, Born weights and the hidden-measurement membrane sampler.

A non-degenerate observable A = Σ a_i P_i defines N unit vertices n_i (the
Bloch vectors of its eigenprojectors) spanning a regular simplex. A state r
falls orthogonally onto the simplex at r∥ = Σ w_i n_i, and the barycentric
weights w_i are the Born probabilities. The membrane then breaks at a point
λ drawn uniformly over the simplex; the outcome is the vertex i whose
sub-region contains λ, i.e. the index minimizing λ_j / w_j.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln

from bloch.bloch_map import BlochVector, OperatorState, bases_match, encode, encode_matrix
from bloch.errors import BasisError, BlochError, DegenerateSpectrumError, DimensionError, WeightError
from bloch.generator_bases import GeneratorBasis, e_constant
from bloch.matrix_kernel import as_matrix, eig_hermitian
from bloch.sampling import parallel_counts

logger = logging.getLogger(__name__)

DEGENERACY_GAP = 1e-8
CLAMP_TOL = 1e-10
SAMPLE_BLOCK = 1 << 18


@dataclass(frozen=True, eq=False)
class MeasurementSimplex:
    vertices: Tuple[BlochVector, ...]
    projectors: Tuple[np.ndarray, ...]
    eigenvalues: np.ndarray
    basis: GeneratorBasis

    @property
    def n_dim(self) -> int:
        return self.basis.n_dim

    @property
    def vertex_matrix(self) -> np.ndarray:
        """Vertices as rows, shape (N, N^2 - 1)."""
        return np.stack([v.components for v in self.vertices])


@dataclass(frozen=True, eq=False)
class BarycentricCoords:
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float).reshape(-1)
        if np.any(w < -CLAMP_TOL):
            raise WeightError(f"barycentric weight below zero: {w.min():.3e}")
        w = np.where(w < 0.0, 0.0, w)
        if abs(w.sum() - 1.0) > 1e-10:
            raise WeightError(f"barycentric weights sum to {w.sum():.15g}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True, eq=False)
class MembraneOutcome:
    outcome_index: int
    lambda_bary: np.ndarray


@dataclass(frozen=True, eq=False)
class MeasurementRun:
    counts: np.ndarray
    probabilities: np.ndarray
    collapsed: Tuple[OperatorState, ...]

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def three_sigma(self) -> np.ndarray:
        return three_sigma(self.probabilities, self.shots)


def three_sigma(p: Union[float, np.ndarray], shots: int) -> np.ndarray:
    """3 sqrt(p(1-p)/shots), the binomial tolerance band on a frequency."""
    p = np.asarray(p, dtype=float)
    return 3.0 * np.sqrt(p * (1.0 - p) / shots)


def simplex_from_vectors(
    vectors: Sequence[Sequence[complex]],
    basis: GeneratorBasis,
    eigenvalues: Optional[Sequence[float]] = None,
) -> MeasurementSimplex:
    """Simplex of the projectors onto an orthonormal list of N vectors, kept in order."""
    v = np.asarray(vectors, dtype=np.complex128)
    n = basis.n_dim
    if v.shape != (n, n):
        raise DimensionError(f"expected {n} vectors of length {n}, got shape {v.shape}")
    dev = float(np.max(np.abs(v.conj() @ v.T - np.eye(n))))
    if dev > 1e-10:
        raise BasisError(f"eigenvectors are not orthonormal (deviation {dev:.3e})")
    projectors = tuple(np.outer(row, row.conj()) for row in v)
    vertices = tuple(encode_matrix(p, basis) for p in projectors)
    labels = np.arange(1.0, n + 1.0) if eigenvalues is None else np.asarray(eigenvalues, dtype=float)
    return MeasurementSimplex(vertices=vertices, projectors=projectors, eigenvalues=labels, basis=basis)


def simplex_from_observable(a: Union[np.ndarray, Sequence], basis: GeneratorBasis) -> MeasurementSimplex:
    """Vertices are the eigenprojectors of A in ascending eigenvalue order."""
    a = as_matrix(a)
    if a.shape[0] != basis.n_dim:
        raise DimensionError(f"observable is {a.shape[0]}x{a.shape[0]} but basis is SU({basis.n_dim})")
    spec = eig_hermitian(a, vectors=True)
    gaps = np.diff(spec.eigenvalues)
    if gaps.size and gaps.min() <= DEGENERACY_GAP:
        raise DegenerateSpectrumError(
            f"observable is degenerate (smallest eigenvalue gap {gaps.min():.3e})"
        )
    return simplex_from_vectors(spec.eigenvectors.T, basis, spec.eigenvalues)


def _check_basis(r: BlochVector, s: MeasurementSimplex) -> None:
    if not bases_match(r.basis, s.basis):
        raise BasisError("state vector and simplex use different generator bases")


def project_onto_simplex(r: BlochVector, s: MeasurementSimplex) -> Tuple[BarycentricCoords, BlochVector]:
    """Split r = r∥ + r⊥ with r∥ on the affine hull of the vertices.

    Solves the normal equations on the N-1 edge directions n_k - n_N.
    """
    _check_basis(r, s)
    verts = s.vertex_matrix
    apex = verts[-1]
    edges = verts[:-1] - apex
    gram = edges @ edges.T
    c = np.linalg.solve(gram, edges @ (r.components - apex))
    weights = np.append(c, 1.0 - c.sum())
    r_par = apex + c @ edges
    return BarycentricCoords(weights), r.replace(r.components - r_par)


def parallel_component(r: BlochVector, s: MeasurementSimplex) -> BlochVector:
    w, _ = project_onto_simplex(r, s)
    return r.replace(w.weights @ s.vertex_matrix)


def born_probabilities(d: Union[OperatorState, np.ndarray], s: MeasurementSimplex) -> BarycentricCoords:
    """p_i = (1/N)[1 + (N-1) r.n_i]."""
    r = encode(d, s.basis)
    n = s.n_dim
    return BarycentricCoords((1.0 + (n - 1) * (s.vertex_matrix @ r.components)) / n)


def immersion_path(r: BlochVector, s: MeasurementSimplex, tau: float) -> BlochVector:
    """r_τ = (1 - τ) r + τ r∥, the point particle sinking onto the simplex."""
    if not 0.0 <= tau <= 1.0:
        raise WeightError(f"tau must lie in [0, 1], got {tau}")
    r_par = parallel_component(r, s)
    return r.replace((1.0 - tau) * r.components + tau * r_par.components)


def sample_uniform_simplex(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Flat Dirichlet draws via normalized unit exponentials, shape (size, n)."""
    g = rng.standard_exponential((size, n))
    return g / g.sum(axis=1, keepdims=True)


def classify(lam: np.ndarray, w: BarycentricCoords) -> np.ndarray:
    """Sub-region index of each point: argmin over w_j > 0 of λ_j / w_j.

    Zero-weight vertices never win; ties go to the smaller index.
    """
    lam = np.atleast_2d(lam)
    wt = w.weights
    ratios = np.where(wt > 0.0, lam / np.where(wt > 0.0, wt, 1.0), np.inf)
    return np.argmin(ratios, axis=1)


def sample_membrane(w: BarycentricCoords, rng: np.random.Generator) -> MembraneOutcome:
    lam = sample_uniform_simplex(len(w), 1, rng)
    return MembraneOutcome(outcome_index=int(classify(lam, w)[0]), lambda_bary=lam[0])


def sample_outcomes(w: BarycentricCoords, rng: np.random.Generator, size: int) -> np.ndarray:
    """Outcome index of each of `size` independent membrane draws."""
    return classify(sample_uniform_simplex(len(w), size, rng), w)


def sample_counts(w: BarycentricCoords, rng: np.random.Generator, shots: int) -> np.ndarray:
    """Outcome histogram of `shots` membrane draws, drawn in fixed-size blocks."""
    n = len(w)
    counts = np.zeros(n, dtype=np.int64)
    remaining = int(shots)
    while remaining > 0:
        block = min(remaining, SAMPLE_BLOCK)
        counts += np.bincount(sample_outcomes(w, rng, block), minlength=n)
        remaining -= block
    return counts


def run_measurement(
    d: Union[OperatorState, np.ndarray],
    s: MeasurementSimplex,
    shots: int,
    rng: np.random.Generator,
) -> MeasurementRun:
    if shots < 1:
        raise BlochError(f"shots must be at least 1, got {shots}")
    probs = born_probabilities(d, s)
    counts = sample_counts(probs, rng, shots)
    logger.debug("measured %d shots: %s", shots, counts.tolist())
    return MeasurementRun(
        counts=counts,
        probabilities=probs.weights,
        collapsed=tuple(OperatorState(p) for p in s.projectors),
    )


def run_measurement_parallel(
    d: Union[OperatorState, np.ndarray],
    s: MeasurementSimplex,
    shots: int,
    seed: int,
    workers: int = 1,
) -> MeasurementRun:
    """run_measurement split over seeded worker streams."""
    probs = born_probabilities(d, s)
    counts = parallel_counts(lambda rng, n: sample_counts(probs, rng, n), shots, seed, workers)
    return MeasurementRun(
        counts=counts,
        probabilities=probs.weights,
        collapsed=tuple(OperatorState(p) for p in s.projectors),
    )


def repeat_measurement(collapsed: OperatorState, s: MeasurementSimplex, rng: np.random.Generator) -> int:
    """Measure an already collapsed state again; first-kind measurements repeat."""
    return sample_membrane(born_probabilities(collapsed, s), rng).outcome_index


def simplex_volume(n: int) -> float:
    """Lebesgue measure of the regular (N-1)-simplex with edge sqrt(2N/(N-1))."""
    d = n - 1
    edge = math.sqrt(2.0 * n / (n - 1))
    return math.exp(d * math.log(edge) - gammaln(d + 1)) * math.sqrt((d + 1) / 2.0 ** d)


def subregion_fraction(w: BarycentricCoords, i: int, absolute: bool = False) -> float:
    """μ(A_i)/μ(Δ) = w_i; with absolute=True the measure μ(A_i) itself."""
    if not 0 <= i < len(w):
        raise DimensionError(f"outcome index {i} out of range 0..{len(w) - 1}")
    frac = float(w.weights[i])
    return frac * simplex_volume(len(w)) if absolute else frac


def edge_fraction(x: float, n: int) -> float:
    """Relative sub-region measure of a particle at distance x along a simplex edge."""
    return x / (2.0 * e_constant(n))


def vertex_coordinates_2d() -> np.ndarray:
    """In-plane coordinates of the three vertices of the N=3 simplex (unit circumradius)."""
    h = math.sqrt(3.0) / 2.0
    return np.array([[-h, -0.5], [0.0, 1.0], [h, -0.5]])


def shoelace_area(points: np.ndarray) -> float:
    p = np.asarray(points, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(x @ np.roll(y, -1) - y @ np.roll(x, -1)))
