"""Closed-form interference analysis of two- and three-state superpositions.

Two-state: |ψ> = a1 e^{iα1}|b1> + a2 e^{iα2}|b2>, α = α2 - α1, measured
against P± = |±><±| with |±> = (|b1> ± |b2>)/√2. Three-state: amplitudes
a1, a2, a3 with α = α2 - α1, δ = α3 - α1, γ = δ - α, measured against the
Fourier basis χ_j of C^3.
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from bloch.bloch_map import BlochVector, OperatorState, pure_state
from bloch.errors import BasisError, StateError
from bloch.generator_bases import (
    THREE_STATE_ORDER,
    GeneratorBasis,
    e_constant,
    standard_basis,
    superposition_order,
    three_state_basis,
)
from bloch.measurement_engine import MeasurementSimplex, simplex_from_vectors

NORM_TOL = 1e-12
OMEGA = np.exp(2j * math.pi / 3.0)

# (α, δ) pairs that cancel all three interference terms at equal amplitudes.
NO_INTERFERENCE_PAIRS: Tuple[Tuple[float, float], ...] = (
    (0.0, 2 * math.pi / 3),
    (0.0, -2 * math.pi / 3),
    (-2 * math.pi / 3, 0.0),
    (2 * math.pi / 3, 0.0),
    (-2 * math.pi / 3, -2 * math.pi / 3),
    (2 * math.pi / 3, 2 * math.pi / 3),
)


def _check_norm(*amps: float) -> None:
    if any(a < 0.0 for a in amps):
        raise StateError(f"amplitudes must be nonnegative, got {amps}")
    total = sum(a * a for a in amps)
    if abs(total - 1.0) > NORM_TOL:
        raise StateError(f"squared amplitudes sum to {total:.15g}, expected 1")


@dataclass(frozen=True)
class Superposition2:
    a1: float
    a2: float
    alpha: float
    n_dim: int = 2

    def __post_init__(self) -> None:
        _check_norm(self.a1, self.a2)
        if self.n_dim < 2:
            raise StateError(f"a two-state superposition needs N >= 2, got {self.n_dim}")

    @classmethod
    def from_a1(cls, a1: float, alpha: float, n_dim: int = 2) -> "Superposition2":
        return cls(a1, math.sqrt(max(0.0, 1.0 - a1 * a1)), alpha, n_dim)

    @classmethod
    def from_beta(cls, beta: float, alpha: float, n_dim: int = 2) -> "Superposition2":
        """Circle-of-longitude parameterization cos²(β/2) = a1²."""
        return cls(abs(math.cos(beta / 2.0)), abs(math.sin(beta / 2.0)), alpha, n_dim)

    @property
    def beta(self) -> float:
        return 2.0 * math.acos(min(1.0, self.a1))

    def amplitudes(self) -> np.ndarray:
        psi = np.zeros(self.n_dim, dtype=np.complex128)
        psi[0] = self.a1
        psi[1] = self.a2 * np.exp(1j * self.alpha)
        return psi


@dataclass(frozen=True)
class Superposition3:
    a1: float
    a2: float
    a3: float
    alpha: float
    delta: float

    def __post_init__(self) -> None:
        _check_norm(self.a1, self.a2, self.a3)

    @property
    def gamma(self) -> float:
        return self.delta - self.alpha

    def amplitudes(self) -> np.ndarray:
        return np.array(
            [self.a1, self.a2 * np.exp(1j * self.alpha), self.a3 * np.exp(1j * self.delta)],
            dtype=np.complex128,
        )


@dataclass(frozen=True, eq=False)
class InterferenceReport:
    probabilities: np.ndarray
    interference_terms: np.ndarray
    classical_part: np.ndarray


def interference2(s: Superposition2) -> InterferenceReport:
    """I± = ±a1 a2 cos α and P(ψ -> P±) = ½(1 + 2 I±), ordered (+, -)."""
    i_plus = s.a1 * s.a2 * math.cos(s.alpha)
    terms = np.array([i_plus, -i_plus])
    classical = np.array([0.5, 0.5])
    return InterferenceReport(
        probabilities=classical + terms, interference_terms=terms, classical_part=classical
    )


def plus_minus_vectors(n_dim: int = 2) -> np.ndarray:
    """Rows |+>, |-> built on the first two basis vectors."""
    v = np.zeros((2, n_dim), dtype=np.complex128)
    v[:, 0] = 1.0 / math.sqrt(2.0)
    v[0, 1] = 1.0 / math.sqrt(2.0)
    v[1, 1] = -1.0 / math.sqrt(2.0)
    return v


def _require_superposition_arrangement(basis: GeneratorBasis) -> None:
    n = basis.n_dim
    expected = standard_basis(n).labels
    wanted = tuple(expected[i] for i in superposition_order(n))
    if basis.kind != "standard" or basis.labels != wanted:
        raise BasisError("basis must start with U(1,2), V(1,2), W(1)..W(N-1)")


def _w_chain(n: int) -> np.ndarray:
    """Components 4..N+1 shared by all superpositions of b1 and b2 (before e_N)."""
    return np.array([math.sqrt(2.0 / ((i - 2) * (i - 1))) for i in range(4, n + 2)])


def superposition2_vector(s: Superposition2, basis: GeneratorBasis) -> BlochVector:
    """Bloch vector of |ψ><ψ| in the superposition arrangement of the generators."""
    _require_superposition_arrangement(basis)
    n = basis.n_dim
    if n != s.n_dim:
        raise BasisError(f"superposition lives in C^{s.n_dim} but basis is SU({n})")
    comps = np.zeros(basis.size)
    comps[0] = 2.0 * s.a1 * s.a2 * math.cos(s.alpha)
    comps[1] = 2.0 * s.a1 * s.a2 * math.sin(s.alpha)
    comps[2] = s.a1 ** 2 - s.a2 ** 2
    comps[3 : n + 1] = _w_chain(n)
    return BlochVector(e_constant(n) * comps, basis)


def superposition2_state(s: Superposition2, basis: Optional[GeneratorBasis] = None) -> OperatorState:
    """|ψ><ψ| built matrix-side over the basis vectors of `basis` (canonical by default)."""
    psi = s.amplitudes()
    if basis is not None and basis.onb is not None:
        psi = basis.onb.T @ psi
    return pure_state(psi)


def plus_minus_simplex(basis: GeneratorBasis) -> MeasurementSimplex:
    """Simplex of the observable with P+ and P- among its eigenprojectors.

    For N > 2 the remaining vertices are the projectors onto b3 .. bN.
    """
    n = basis.n_dim
    vecs = np.zeros((n, n), dtype=np.complex128)
    vecs[:2] = plus_minus_vectors(n)
    vecs[2:, 2:] = np.eye(n - 2)
    if basis.onb is not None:
        vecs = vecs @ basis.onb
    return simplex_from_vectors(vecs, basis)


def two_state_parallel(s: Superposition2, basis: GeneratorBasis) -> Tuple[np.ndarray, BlochVector]:
    """Weights ½(1 ± 2 a1 a2 cos α) and r∥ on the edge between n+ and n-."""
    weights = interference2(s).probabilities
    n_plus = superposition2_vector(Superposition2.from_a1(1 / math.sqrt(2), 0.0, s.n_dim), basis)
    n_minus = superposition2_vector(Superposition2.from_a1(1 / math.sqrt(2), math.pi, s.n_dim), basis)
    return weights, n_plus.replace(weights[0] * n_plus.components + weights[1] * n_minus.components)


def effective_projection(s: Superposition2, basis: GeneratorBasis) -> Tuple[np.ndarray, ...]:
    """First three coordinates of n, n+, n-, n1 and n2.

    Only these coordinates depend on (a1, a2, α), so the measurement unfolds
    in a 3-ball of radius e_N where the simplex edge n+ n- has length 2 e_N.
    """
    vectors = [
        s,
        Superposition2.from_a1(1 / math.sqrt(2), 0.0, s.n_dim),
        Superposition2.from_a1(1 / math.sqrt(2), math.pi, s.n_dim),
        Superposition2(1.0, 0.0, 0.0, s.n_dim),
        Superposition2(0.0, 1.0, 0.0, s.n_dim),
    ]
    return tuple(superposition2_vector(v, basis).components[:3].copy() for v in vectors)


def latitude_disk(
    s: Superposition2,
    basis: GeneratorBasis,
    alphas: Iterable[float],
    taus: Iterable[float],
) -> List[BlochVector]:
    """Points r_τ(α) of the disk spanned by the circle of latitude through s.

    The two phase-dependent coordinates shrink by (1 - τ); the rest stay fixed.
    """
    taus = list(taus)
    for t in taus:
        if not 0.0 <= t <= 1.0:
            raise StateError(f"tau must lie in [0, 1], got {t}")
    out = []
    for a in alphas:
        base = superposition2_vector(Superposition2(s.a1, s.a2, a, s.n_dim), basis).components
        for t in taus:
            c = base.copy()
            c[:2] *= 1.0 - t
            out.append(BlochVector(c, basis))
    return out


def interference3(s: Superposition3) -> InterferenceReport:
    """I_j for the three Fourier-basis outcomes and P(ψ -> F_j) = (1 + 3 I_j)/3."""
    a1, a2, a3 = s.a1, s.a2, s.a3
    al, de, ga = s.alpha, s.delta, s.gamma
    t = 2 * math.pi / 3
    terms = (2.0 / 3.0) * np.array(
        [
            a1 * a2 * math.cos(al) + a1 * a3 * math.cos(de) + a2 * a3 * math.cos(ga),
            a1 * a2 * math.cos(al - t) + a1 * a3 * math.cos(de - 2 * t) + a2 * a3 * math.cos(ga - t),
            a1 * a2 * math.cos(al - 2 * t) + a1 * a3 * math.cos(de - t) + a2 * a3 * math.cos(ga - 2 * t),
        ]
    )
    classical = np.full(3, 1.0 / 3.0)
    return InterferenceReport(
        probabilities=classical + terms, interference_terms=terms, classical_part=classical
    )


def _require_three_state_order(basis: GeneratorBasis) -> None:
    expected = standard_basis(3).labels
    wanted = tuple(expected[i] for i in THREE_STATE_ORDER)
    if basis.kind != "standard" or basis.labels != wanted:
        raise BasisError("basis must list U/V pairs (12, 13, 23) first and W(1), W(2) last")


def superposition3_vector(s: Superposition3, basis: Optional[GeneratorBasis] = None) -> BlochVector:
    basis = three_state_basis() if basis is None else basis
    _require_three_state_order(basis)
    a1, a2, a3 = s.a1, s.a2, s.a3
    comps = math.sqrt(3.0) * np.array(
        [
            a1 * a2 * math.cos(s.alpha),
            a1 * a2 * math.sin(s.alpha),
            a1 * a3 * math.cos(s.delta),
            a1 * a3 * math.sin(s.delta),
            a2 * a3 * math.cos(s.gamma),
            a2 * a3 * math.sin(s.gamma),
            (a1 ** 2 - a2 ** 2) / 2.0,
            (a1 ** 2 + a2 ** 2 - 2.0 * a3 ** 2) / (2.0 * math.sqrt(3.0)),
        ]
    )
    return BlochVector(comps, basis)


def superposition3_state(s: Superposition3) -> OperatorState:
    return pure_state(s.amplitudes())


def superposition3_path(s: Superposition3, tau: float, basis: Optional[GeneratorBasis] = None) -> BlochVector:
    """Decoherence path towards the canonical simplex: off-diagonal part scaled by 1 - τ."""
    if not 0.0 <= tau <= 1.0:
        raise StateError(f"tau must lie in [0, 1], got {tau}")
    r = superposition3_vector(s, basis)
    c = r.components.copy()
    c[:6] *= 1.0 - tau
    return r.replace(c)


def chi_vectors() -> np.ndarray:
    """Rows χ1, χ2, χ3 = (1, ω^k, ω^{2k})/√3 for k = 0, 1, 2."""
    k = np.arange(3)
    return np.array([OMEGA ** (j * k) for j in range(3)]) / math.sqrt(3.0)


def chi_simplex(basis: Optional[GeneratorBasis] = None) -> MeasurementSimplex:
    return simplex_from_vectors(chi_vectors(), three_state_basis() if basis is None else basis)


def mub_vertices3() -> Tuple[BlochVector, ...]:
    """n1, n2, n3 (canonical basis) and m1, m2, m3 (χ basis) in the three-state order."""
    basis = three_state_basis()
    h = math.sqrt(3.0) / 2.0
    r3 = math.sqrt(3.0)
    raw: Sequence[Sequence[float]] = (
        (0, 0, 0, 0, 0, 0, h, 0.5),
        (0, 0, 0, 0, 0, 0, -h, 0.5),
        (0, 0, 0, 0, 0, 0, 0, -1.0),
        np.array([1, 0, 1, 0, 1, 0, 0, 0]) / r3,
        -np.array([1, -r3, 1, r3, 1, -r3, 0, 0]) / (2 * r3),
        -np.array([1, r3, 1, -r3, 1, r3, 0, 0]) / (2 * r3),
    )
    return tuple(BlochVector(np.asarray(v, dtype=float), basis) for v in raw)
