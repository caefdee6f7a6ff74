"""Sector decompositions and correlation experiments for bipartite systems.

In the tensorial basis a bipartite Bloch vector splits into contiguous
sectors: A (N_A^2 - 1 slots), B (N_B^2 - 1) and AB ((N_A^2 - 1)(N_B^2 - 1),
row-major in (i, j)). A product state reads

    r = d_A r_A ⊕ d_B r_B ⊕ d_AB (r_A ⊗ r_B)

and a two-term entangled state adds an interference vector r_int living in
four AB slots, orthogonal to everything else.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from bloch.bloch_map import BlochVector, OperatorState, bases_match, decode, encode, pure_state, qubit_vector
from bloch.errors import BasisError, BlochError, DegenerateSpectrumError, DimensionError, StateError, WeightError
from bloch.generator_bases import (
    GeneratorBasis,
    e_constant,
    standard_basis,
    superposition_basis,
    superposition_order,
    tensorial_basis,
)
from bloch.matrix_kernel import eig_hermitian, kron
from bloch.measurement_engine import (
    DEGENERACY_GAP,
    project_onto_simplex,
    sample_outcomes,
    simplex_from_observable,
    simplex_from_vectors,
)
from bloch.sampling import child_seed, parallel_counts, split_shots

logger = logging.getLogger(__name__)

AXIS_TOL = 1e-12
PAIR_TOL = 1e-12


def sector_offsets(dims: Sequence[int]) -> Dict[Tuple[int, ...], range]:
    """Index range of every sector of an n-factor tensorial basis.

    Keys are the tuples of active factor positions, in the order the
    tensorial basis emits them: singletons first, then pairs, and so on.
    """
    dims = [int(d) for d in dims]
    out: Dict[Tuple[int, ...], range] = {}
    start = 0
    for order in range(1, len(dims) + 1):
        for active in itertools.combinations(range(len(dims)), order):
            size = int(np.prod([d * d - 1 for d in (dims[i] for i in active)]))
            out[active] = range(start, start + size)
            start += size
    return out


def scale_constant(active_dims: Sequence[int], n_total: int) -> float:
    """d = sqrt(Π (N_i - 1) / (N - 1)) for the sector of the given factor dims."""
    return math.sqrt(float(np.prod([d - 1 for d in active_dims])) / (n_total - 1))


@dataclass(frozen=True, eq=False)
class SectorLayout:
    basis: GeneratorBasis
    offsets: Dict[str, range] = field(init=False)

    def __post_init__(self) -> None:
        if self.basis.kind != "tensorial" or len(self.basis.factors) != 2:
            raise BasisError("a sector layout needs a two-factor tensorial basis")
        raw = sector_offsets(self.factor_dims)
        object.__setattr__(self, "offsets", {"A": raw[(0,)], "B": raw[(1,)], "AB": raw[(0, 1)]})

    @classmethod
    def from_factors(cls, basis_a: GeneratorBasis, basis_b: GeneratorBasis) -> "SectorLayout":
        return cls(tensorial_basis([basis_a, basis_b]))

    @classmethod
    def standard(cls, n_a: int, n_b: int) -> "SectorLayout":
        return cls.from_factors(standard_basis(n_a), standard_basis(n_b))

    @property
    def factor_dims(self) -> Tuple[int, int]:
        return self.basis.factor_dims

    @property
    def basis_a(self) -> GeneratorBasis:
        return self.basis.factors[0]

    @property
    def basis_b(self) -> GeneratorBasis:
        return self.basis.factors[1]

    @property
    def n_dim(self) -> int:
        return self.basis.n_dim

    @property
    def d_a(self) -> float:
        return scale_constant([self.factor_dims[0]], self.n_dim)

    @property
    def d_b(self) -> float:
        return scale_constant([self.factor_dims[1]], self.n_dim)

    @property
    def d_ab(self) -> float:
        return scale_constant(self.factor_dims, self.n_dim)

    @property
    def r0(self) -> float:
        return 1.0 / math.sqrt(self.n_dim - 1)

    def ab_index(self, i: int, j: int) -> int:
        """Position in the full vector of the 1-based AB slot (i, j)."""
        m_b = self.factor_dims[1] ** 2 - 1
        return self.offsets["AB"].start + (i - 1) * m_b + (j - 1)


@dataclass(frozen=True, eq=False)
class SectorDecomposition:
    r_a: BlochVector
    r_b: BlochVector
    r_ab: np.ndarray
    r_int: np.ndarray
    layout: SectorLayout

    def reassemble(self) -> BlochVector:
        lay = self.layout
        comps = np.zeros(lay.basis.size)
        comps[lay.offsets["A"].start : lay.offsets["A"].stop] = lay.d_a * self.r_a.components
        comps[lay.offsets["B"].start : lay.offsets["B"].stop] = lay.d_b * self.r_b.components
        comps[lay.offsets["AB"].start : lay.offsets["AB"].stop] = lay.d_ab * self.r_ab
        return BlochVector(comps + self.r_int, lay.basis)


def _check_factor(r: BlochVector, basis: GeneratorBasis, side: str) -> None:
    if not bases_match(r.basis, basis):
        raise DimensionError(f"r_{side} is not expressed in the layout's {side} factor basis")


def product_compose(r_a: BlochVector, r_b: BlochVector, layout: SectorLayout) -> BlochVector:
    """Bloch vector of D_A ⊗ D_B from the factor vectors."""
    _check_factor(r_a, layout.basis_a, "A")
    _check_factor(r_b, layout.basis_b, "B")
    dec = SectorDecomposition(
        r_a=r_a,
        r_b=r_b,
        r_ab=np.outer(r_a.components, r_b.components).ravel(),
        r_int=np.zeros(layout.basis.size),
        layout=layout,
    )
    return dec.reassemble()


def sector_split(
    r: BlochVector,
    layout: SectorLayout,
    reference_ab: Optional[Sequence[float]] = None,
) -> SectorDecomposition:
    """Read the one-entity sectors off r and split the AB sector.

    Without a separable reference the whole AB content is reported as r_ab
    and r_int is zero. With one, r_ab is the reference and r_int the residual.
    """
    if r.basis.size != layout.basis.size:
        raise DimensionError(f"vector has {r.basis.size} components, layout expects {layout.basis.size}")
    if not bases_match(r.basis, layout.basis):
        raise BasisError("vector is not expressed in the layout's tensorial basis")
    comps = r.components
    off = layout.offsets
    r_a = BlochVector(comps[off["A"].start : off["A"].stop] / layout.d_a, layout.basis_a)
    r_b = BlochVector(comps[off["B"].start : off["B"].stop] / layout.d_b, layout.basis_b)
    ab = comps[off["AB"].start : off["AB"].stop]
    r_int = np.zeros(layout.basis.size)
    if reference_ab is None:
        r_ab = ab / layout.d_ab
    else:
        r_ab = np.asarray(reference_ab, dtype=float).reshape(-1)
        if r_ab.size != len(off["AB"]):
            raise DimensionError(f"reference AB sector has {r_ab.size} slots, expected {len(off['AB'])}")
        r_int[off["AB"].start : off["AB"].stop] = ab - layout.d_ab * r_ab
    return SectorDecomposition(r_a=r_a, r_b=r_b, r_ab=r_ab, r_int=r_int, layout=layout)


def separable_compose(terms: Sequence[Tuple[float, BlochVector, BlochVector]], layout: SectorLayout) -> BlochVector:
    """Σ p_μ (r_A^μ, r_B^μ) composed as products; the AB sector is not an outer product in general."""
    terms = list(terms)
    if not terms:
        raise WeightError("separable_compose needs at least one term")
    weights = np.array([float(p) for p, _, _ in terms])
    if np.any(weights < 0):
        raise WeightError(f"negative weight in separable mixture: {weights.min():.6g}")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise WeightError(f"weights sum to {weights.sum():.15g}, expected 1")
    comps = sum(p * product_compose(ra, rb, layout).components for p, ra, rb in terms)
    return BlochVector(comps, layout.basis)


def display_order_ab(layout: SectorLayout) -> List[int]:
    """AB-sector positions in shell order (1,1), (2,2), (1,2), (2,1), (3,3), (1,3), (2,3), (3,2), (3,1), ...

    Shell k lists (k,k), then (1,k) .. (k-1,k), then (k,k-1) .. (k,1).
    """
    m_a = layout.factor_dims[0] ** 2 - 1
    m_b = layout.factor_dims[1] ** 2 - 1
    order: List[Tuple[int, int]] = []
    for k in range(1, max(m_a, m_b) + 1):
        shell = [(k, k)] + [(i, k) for i in range(1, k)] + [(k, j) for j in range(k - 1, 0, -1)]
        order += [(i, j) for i, j in shell if i <= m_a and j <= m_b]
    return [(i - 1) * m_b + (j - 1) for i, j in order]


@dataclass(frozen=True, eq=False)
class EntangledPairSpec:
    """|ψ> = a1 |ψ_A>|φ_B> + a2 e^{iα} |φ_A>|ψ_B>."""

    a1: float
    a2: float
    alpha: float
    psi_a: np.ndarray
    phi_a: np.ndarray
    psi_b: np.ndarray
    phi_b: np.ndarray

    def __post_init__(self) -> None:
        if self.a1 < 0 or self.a2 < 0 or abs(self.a1 ** 2 + self.a2 ** 2 - 1.0) > PAIR_TOL:
            raise StateError(f"amplitudes ({self.a1}, {self.a2}) are not a normalized nonnegative pair")
        for side in ("a", "b"):
            psi = np.asarray(getattr(self, f"psi_{side}"), dtype=np.complex128).reshape(-1)
            phi = np.asarray(getattr(self, f"phi_{side}"), dtype=np.complex128).reshape(-1)
            if psi.shape != phi.shape or psi.size < 2:
                raise BasisError(f"psi_{side} and phi_{side} must be vectors of the same length >= 2")
            gram = np.array([[np.vdot(psi, psi), np.vdot(psi, phi)], [np.vdot(phi, psi), np.vdot(phi, phi)]])
            if np.max(np.abs(gram - np.eye(2))) > PAIR_TOL:
                raise BasisError(f"psi_{side} and phi_{side} are not orthonormal")
            object.__setattr__(self, f"psi_{side}", psi)
            object.__setattr__(self, f"phi_{side}", phi)

    @classmethod
    def canonical(
        cls, a1: float, alpha: float, dims: Tuple[int, int] = (2, 2), a2: Optional[float] = None
    ) -> "EntangledPairSpec":
        """ψ = first and φ = second canonical vector on both sides; a2 defaults to √(1 - a1²)."""
        e = [np.eye(d, dtype=np.complex128) for d in dims]
        if a2 is None:
            a2 = math.sqrt(max(0.0, 1.0 - a1 * a1))
        return cls(a1, a2, alpha, e[0][0], e[0][1], e[1][0], e[1][1])

    @property
    def dims(self) -> Tuple[int, int]:
        return self.psi_a.size, self.psi_b.size


def singlet_spec() -> EntangledPairSpec:
    """(|01> - |10>)/√2 written as a two-term superposition."""
    return EntangledPairSpec.canonical(1.0 / math.sqrt(2.0), math.pi)


def entangled_state(spec: EntangledPairSpec) -> OperatorState:
    psi = spec.a1 * np.kron(spec.psi_a, spec.phi_b) + spec.a2 * np.exp(1j * spec.alpha) * np.kron(
        spec.phi_a, spec.psi_b
    )
    return pure_state(psi)


def _adapted_onb(psi: np.ndarray, phi: np.ndarray) -> np.ndarray:
    rest = null_space(np.vstack([psi.conj(), phi.conj()]))
    return np.vstack([psi, phi, rest.T])


def entangled_layout(spec: EntangledPairSpec) -> SectorLayout:
    """Tensorial layout whose factor bases start with the ψ/φ off-diagonals and W chain."""
    basis_a = superposition_basis(spec.dims[0], _adapted_onb(spec.psi_a, spec.phi_a))
    basis_b = superposition_basis(spec.dims[1], _adapted_onb(spec.psi_b, spec.phi_b))
    return SectorLayout.from_factors(basis_a, basis_b)


def _mixture_vector(p1: float, p2: float, basis: GeneratorBasis) -> BlochVector:
    """Vector of p1 |b1><b1| + p2 |b2><b2| (p1 + p2 = 1) in a superposition-arranged basis."""
    n = basis.n_dim
    comps = np.zeros(basis.size)
    comps[2] = p1 - p2
    comps[3 : n + 1] = [math.sqrt(2.0 / ((i - 2) * (i - 1))) for i in range(4, n + 2)]
    return BlochVector(e_constant(n) * comps, basis)


def _check_adapted(layout: SectorLayout, spec: EntangledPairSpec) -> None:
    for basis, psi, phi in ((layout.basis_a, spec.psi_a, spec.phi_a), (layout.basis_b, spec.psi_b, spec.phi_b)):
        n = basis.n_dim
        arranged = tuple(standard_basis(n).labels[p] for p in superposition_order(n))
        head = basis.basis_vectors()[:2]
        if basis.labels != arranged or not np.allclose(head, [psi, phi], atol=1e-12):
            raise BasisError("layout factors are not adapted to the entangled pair (see entangled_layout)")


def entangled_decompose(spec: EntangledPairSpec, layout: Optional[SectorLayout] = None) -> SectorDecomposition:
    """Closed-form sectors of a two-term entangled state.

    r_A and r_B are the reduced mixtures a1²ψ + a2²φ and a1²φ + a2²ψ, the AB
    sector is a1² r^A⊗s^B + a2² s^A⊗r^B with r, s the vectors of ψ, φ, and
    r_int = e_N √2 a1 a2 (cos α, cos α, -sin α, sin α) at AB slots
    (1,1), (2,2), (1,2), (2,1).
    """
    layout = entangled_layout(spec) if layout is None else layout
    _check_adapted(layout, spec)
    a1s, a2s = spec.a1 ** 2, spec.a2 ** 2
    r_a = _mixture_vector(a1s, a2s, layout.basis_a)
    r_b = _mixture_vector(a2s, a1s, layout.basis_b)
    ra_psi, ra_phi = _mixture_vector(1.0, 0.0, layout.basis_a), _mixture_vector(0.0, 1.0, layout.basis_a)
    rb_psi, rb_phi = _mixture_vector(1.0, 0.0, layout.basis_b), _mixture_vector(0.0, 1.0, layout.basis_b)
    r_ab = (
        a1s * np.outer(ra_psi.components, rb_phi.components)
        + a2s * np.outer(ra_phi.components, rb_psi.components)
    ).ravel()
    amp = e_constant(layout.n_dim) * math.sqrt(2.0) * spec.a1 * spec.a2
    r_int = np.zeros(layout.basis.size)
    for (i, j), value in zip(
        ((1, 1), (2, 2), (1, 2), (2, 1)),
        (math.cos(spec.alpha), math.cos(spec.alpha), -math.sin(spec.alpha), math.sin(spec.alpha)),
    ):
        r_int[layout.ab_index(i, j)] = amp * value
    return SectorDecomposition(r_a=r_a, r_b=r_b, r_ab=r_ab, r_int=r_int, layout=layout)


def _eigenvectors(obs: np.ndarray) -> np.ndarray:
    """Eigenvectors of a non-degenerate factor observable as rows, ascending eigenvalue."""
    spec = eig_hermitian(np.asarray(obs, dtype=np.complex128), vectors=True)
    gaps = np.diff(spec.eigenvalues)
    if gaps.size and gaps.min() <= DEGENERACY_GAP:
        raise DegenerateSpectrumError(f"factor observable is degenerate (gap {gaps.min():.3e})")
    return spec.eigenvectors.T


def _eigenprojectors(obs: np.ndarray) -> List[np.ndarray]:
    return [np.outer(v, v.conj()) for v in _eigenvectors(obs)]


def product_measurement_probs(r: BlochVector, obs_a: np.ndarray, obs_b: np.ndarray) -> np.ndarray:
    """P(i, j) = Tr(D(r) P_i^A ⊗ P_j^B), indices in ascending eigenvalue order."""
    d = decode(r)
    proj_a = _eigenprojectors(obs_a)
    proj_b = _eigenprojectors(obs_b)
    if len(proj_a) * len(proj_b) != d.shape[0]:
        raise DimensionError(f"observables of size {len(proj_a)}x{len(proj_b)} do not match a {d.shape[0]}-level state")
    table = np.array([[np.trace(d @ kron(pa, pb)).real for pb in proj_b] for pa in proj_a])
    return table


def check_axis(n: Sequence[float]) -> np.ndarray:
    v = np.asarray(n, dtype=float).reshape(-1)
    if v.size != 3 or abs(np.linalg.norm(v) - 1.0) > AXIS_TOL:
        raise StateError(f"measurement axis must be a unit 3-vector, got {list(v)}")
    return v


def spin_observable(n: Sequence[float]) -> np.ndarray:
    """n . σ, eigenvalues -1 (index 0) and +1 (index 1)."""
    return np.einsum("k,kij->ij", check_axis(n), standard_basis(2).stack)


def singlet_expectation(n_a: Sequence[float], n_b: Sequence[float]) -> float:
    return -float(check_axis(n_a) @ check_axis(n_b))


def singlet_table(n_a: Sequence[float], n_b: Sequence[float]) -> np.ndarray:
    """Analytic joint table [a, b] (0 = -, 1 = +): ¼(1 ∓ cos θ) for equal/opposite signs."""
    c = float(check_axis(n_a) @ check_axis(n_b))
    same, diff = 0.25 * (1.0 - c), 0.25 * (1.0 + c)
    return np.array([[same, diff], [diff, same]])


@dataclass(frozen=True)
class RodExperimentConfig:
    n_a_axis: Tuple[float, float, float]
    n_b_axis: Tuple[float, float, float]
    shots: int
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_a_axis", tuple(check_axis(self.n_a_axis)))
        object.__setattr__(self, "n_b_axis", tuple(check_axis(self.n_b_axis)))
        if self.shots < 1:
            raise BlochError(f"shots must be at least 1, got {self.shots}")


@dataclass(frozen=True, eq=False)
class RodResult:
    counts: np.ndarray
    order: str

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    @property
    def e_hat(self) -> float:
        c = self.counts
        return float(c[1, 1] + c[0, 0] - c[1, 0] - c[0, 1]) / self.shots


def _rod_task(first_axis: np.ndarray, second_axis: np.ndarray):
    """Counts over (first outcome, second outcome) for one rod run.

    The first entity sits at the center of its sphere and is measured on a
    1-simplex along first_axis (50/50). The rod then pushes the second entity
    to the antipode of the first one's outcome, the rod is disabled, and the
    second entity is measured along second_axis with the membrane sampler.
    """
    pauli = standard_basis(2)
    first = simplex_from_observable(spin_observable(first_axis), pauli)
    second = simplex_from_observable(spin_observable(second_axis), pauli)
    center_w, _ = project_onto_simplex(qubit_vector(0.0, 0.0, 0.0), first)
    forced_w = [
        project_onto_simplex(BlochVector(-sign * first_axis, pauli), second)[0] for sign in (-1.0, 1.0)
    ]

    def task(rng: np.random.Generator, n: int) -> np.ndarray:
        out_first = sample_outcomes(center_w, rng, n)
        counts = np.zeros((2, 2), dtype=np.int64)
        for k in (0, 1):
            m = int(np.count_nonzero(out_first == k))
            if m:
                counts[k] += np.bincount(sample_outcomes(forced_w[k], rng, m), minlength=2)
        return counts

    return task


def rod_experiment(
    cfg: RodExperimentConfig,
    rng: Optional[np.random.Generator] = None,
    order: str = "AB",
    workers: int = 1,
) -> RodResult:
    """Sequential rod-model measurement of the singlet; counts indexed [a, b].

    With an explicit rng the run uses that single stream; otherwise it is
    split over `workers` streams derived from cfg.seed.
    """
    order = order.upper()
    if order not in ("AB", "BA"):
        raise StateError(f"order must be 'AB' or 'BA', got {order!r}")
    n_a, n_b = np.asarray(cfg.n_a_axis), np.asarray(cfg.n_b_axis)
    task = _rod_task(n_a, n_b) if order == "AB" else _rod_task(n_b, n_a)
    if rng is not None:
        counts = task(rng, cfg.shots)
    else:
        counts = parallel_counts(task, cfg.shots, cfg.seed, workers)
    if order == "BA":
        counts = counts.T
    logger.debug("rod order=%s counts=%s", order, counts.tolist())
    return RodResult(counts=np.asarray(counts), order=order)


def optimal_chsh_axes() -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """a = 0°, a' = 90°, b = 45°, b' = 135° in the x-z plane."""

    def axis(deg: float) -> np.ndarray:
        t = math.radians(deg)
        return np.array([math.sin(t), 0.0, math.cos(t)])

    return axis(0.0), axis(90.0), axis(45.0), axis(135.0)


CHSH_PAIRS = (("a", "b"), ("a", "b'"), ("a'", "b"), ("a'", "b'"))


def chsh_correlations(
    a: Sequence[float],
    a_prime: Sequence[float],
    b: Sequence[float],
    b_prime: Sequence[float],
    mode: str = "analytic",
    shots: int = 4_000_000,
    seed: int = 0,
    workers: int = 1,
) -> np.ndarray:
    """E for the pairs (a,b), (a,b'), (a',b), (a',b').

    Monte Carlo mode spends `shots` in total, split evenly over the pairs,
    each pair on its own seed derived from `seed`; every pair needs at
    least one shot.
    """
    pairs = ((a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime))
    if mode == "analytic":
        return np.array([singlet_expectation(x, y) for x, y in pairs])
    if mode != "monte_carlo":
        raise StateError(f"mode must be 'analytic' or 'monte_carlo', got {mode!r}")
    if shots < len(pairs):
        raise BlochError(f"Monte Carlo CHSH needs at least {len(pairs)} shots, one per pair, got {shots}")
    per_pair = split_shots(shots, len(pairs))
    out = []
    for k, ((x, y), n) in enumerate(zip(pairs, per_pair)):
        cfg = RodExperimentConfig(tuple(x), tuple(y), n, child_seed(seed, k))
        out.append(rod_experiment(cfg, workers=workers).e_hat)
    return np.array(out)


def chsh_value(correlations: Sequence[float]) -> float:
    e = list(correlations)
    return abs(e[0] - e[1] + e[2] + e[3])


def chsh(
    a: Sequence[float],
    a_prime: Sequence[float],
    b: Sequence[float],
    b_prime: Sequence[float],
    mode: str = "analytic",
    shots: int = 4_000_000,
    seed: int = 0,
    workers: int = 1,
) -> float:
    """S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')|."""
    return chsh_value(chsh_correlations(a, a_prime, b, b_prime, mode, shots, seed, workers))


def separable_singlet_mixture(axis: Sequence[float], layout: Optional[SectorLayout] = None) -> BlochVector:
    """½(|+-><+-| + |-+><-+|) along a spin axis: anticorrelated yet separable."""
    layout = SectorLayout.standard(2, 2) if layout is None else layout
    n = check_axis(axis)
    up, down = BlochVector(n, layout.basis_a), BlochVector(-n, layout.basis_a)
    up_b, down_b = BlochVector(n, layout.basis_b), BlochVector(-n, layout.basis_b)
    return separable_compose([(0.5, up, down_b), (0.5, down, up_b)], layout)


@dataclass(frozen=True, eq=False)
class SectorProjectionReport:
    joint_weights: np.ndarray
    weights_a: np.ndarray
    weights_b: np.ndarray
    deviation_a: float
    deviation_b: float

    @property
    def ok(self) -> bool:
        return max(self.deviation_a, self.deviation_b) < 1e-10


def parallel_sector_projection_check(
    spec: EntangledPairSpec, obs_a: np.ndarray, obs_b: np.ndarray
) -> SectorProjectionReport:
    """Compare the one-entity sectors of r∥ (product 3-simplex) with the factor projections.

    Projecting r onto the simplex of P_i^A ⊗ P_j^B and reading its A sector
    must give d_A times the projection of r_A onto the A factor simplex; same for B.
    """
    layout = SectorLayout.standard(*spec.dims)
    r = encode(entangled_state(spec), layout.basis)
    joint_simplex = simplex_from_vectors(
        [np.kron(va, vb) for va in _eigenvectors(obs_a) for vb in _eigenvectors(obs_b)], layout.basis
    )
    joint, _ = project_onto_simplex(r, joint_simplex)
    r_par = sector_split(BlochVector(joint.weights @ joint_simplex.vertex_matrix, layout.basis), layout)

    dec = sector_split(r, layout)
    factor_a = simplex_from_observable(obs_a, layout.basis_a)
    factor_b = simplex_from_observable(obs_b, layout.basis_b)
    w_a, _ = project_onto_simplex(dec.r_a, factor_a)
    w_b, _ = project_onto_simplex(dec.r_b, factor_b)
    par_a = w_a.weights @ factor_a.vertex_matrix
    par_b = w_b.weights @ factor_b.vertex_matrix
    return SectorProjectionReport(
        joint_weights=joint.weights.reshape(spec.dims),
        weights_a=w_a.weights,
        weights_b=w_b.weights,
        deviation_a=float(np.max(np.abs(r_par.r_a.components - par_a))),
        deviation_b=float(np.max(np.abs(r_par.r_b.components - par_b))),
    )
