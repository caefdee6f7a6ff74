"""Determinations of the SU(N) generators with explicit index bookkeeping.

Two families are built here:

- the standard U/V/W family over an arbitrary orthonormal basis of C^N,
  ordered so that for k = 2..N the pairs (U_jk, V_jk), j = 1..k-1, come
  first and W_{k-1} closes the block (Pauli at N=2, Gell-Mann at N=3);
- the tensorial family built from generator bases of the factors of a
  composite space, ordered by sector (one nonzero index, then two, ...).

Standard labels are tuples ("U", j, k), ("V", j, k) and ("W", l) with
1-based indices; tensorial labels are integer tuples (j_1, ..., j_n).
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from bloch.errors import BasisError
from bloch.matrix_kernel import hermitian_deviation, identity

ORTHONORMAL_TOL = 1e-12

Label = Tuple[Union[str, int], ...]

# Off-diagonal pairs first, then the two diagonal generators.
THREE_STATE_ORDER: Tuple[int, ...] = (0, 1, 3, 4, 5, 6, 2, 7)


def c_constant(n: int) -> float:
    """Dimensional constant c_N = sqrt(N(N-1)/2) of D(r) = (I + c_N r.Λ)/N."""
    return math.sqrt(n * (n - 1) / 2.0)


def e_constant(n: int) -> float:
    """e_N = N / (2 c_N), the factor in r_i = e_N Tr(D Λ_i)."""
    return n / (2.0 * c_constant(n))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GeneratorBasis:
    n_dim: int
    matrices: Tuple[np.ndarray, ...]
    labels: Tuple[Label, ...]
    kind: str = "standard"
    factors: Tuple["GeneratorBasis", ...] = ()
    onb: Optional[np.ndarray] = None
    stack: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.matrices) != self.n_dim ** 2 - 1:
            raise BasisError(
                f"an SU({self.n_dim}) basis needs {self.n_dim ** 2 - 1} matrices, got {len(self.matrices)}"
            )
        if len(self.labels) != len(self.matrices):
            raise BasisError("labels and matrices differ in length")
        object.__setattr__(self, "matrices", tuple(_readonly(m) for m in self.matrices))
        object.__setattr__(self, "stack", _readonly(np.stack(self.matrices)))

    @property
    def size(self) -> int:
        return len(self.matrices)

    @property
    def c_n(self) -> float:
        return c_constant(self.n_dim)

    @property
    def e_n(self) -> float:
        return e_constant(self.n_dim)

    @property
    def factor_dims(self) -> Tuple[int, ...]:
        return tuple(f.n_dim for f in self.factors)

    def basis_vectors(self) -> np.ndarray:
        """Rows are the orthonormal vectors a standard basis was built on."""
        if self.kind != "standard":
            raise BasisError("only standard bases carry an underlying orthonormal basis")
        return identity(self.n_dim) if self.onb is None else self.onb

    def index_of(self, label: Label) -> int:
        try:
            return self.labels.index(tuple(label))
        except ValueError:
            raise BasisError(f"label {label!r} not in basis") from None


@dataclass(frozen=True)
class BasisReport:
    hermitian_ok: bool
    traceless_ok: bool
    orthonormal_ok: bool
    worst_deviation: float

    @property
    def ok(self) -> bool:
        return self.hermitian_ok and self.traceless_ok and self.orthonormal_ok


def label_text(label: Label) -> str:
    """Render a label for JSON/CSV output: 'U(1,2)', 'W(3)', '(0,3)'."""
    if label and isinstance(label[0], str):
        return f"{label[0]}({','.join(str(i) for i in label[1:])})"
    return "(" + ",".join(str(i) for i in label) + ")"


def check_onb(vectors: Sequence[Sequence[complex]], n: int) -> np.ndarray:
    """Validate an orthonormal list of n vectors; return them as matrix columns."""
    b = np.asarray(vectors, dtype=np.complex128)
    if b.shape != (n, n):
        raise BasisError(f"expected {n} vectors of length {n}, got shape {b.shape}")
    cols = b.T
    dev = float(np.max(np.abs(cols.conj().T @ cols - np.eye(n))))
    if dev > ORTHONORMAL_TOL:
        raise BasisError(f"vectors are not orthonormal (max deviation {dev:.3e})")
    return cols


def _w_matrix(l: int, cols: np.ndarray) -> np.ndarray:
    diag = np.zeros(cols.shape[0])
    diag[:l] = 1.0
    diag[l] = -float(l)
    return math.sqrt(2.0 / (l * (l + 1))) * (cols * diag) @ cols.conj().T


def standard_basis(n: int, onb: Optional[Sequence[Sequence[complex]]] = None) -> GeneratorBasis:
    """U/V/W generators over `onb` (canonical basis by default)."""
    if n < 2:
        raise BasisError(f"N must be at least 2, got {n}")
    cols = identity(n) if onb is None else check_onb(onb, n)
    matrices: List[np.ndarray] = []
    labels: List[Label] = []
    for k in range(1, n):
        bk = cols[:, k]
        for j in range(k):
            bj = cols[:, j]
            jk = np.outer(bj, bk.conj())
            matrices.append(jk + jk.conj().T)
            labels.append(("U", j + 1, k + 1))
            matrices.append(-1j * (jk - jk.conj().T))
            labels.append(("V", j + 1, k + 1))
        matrices.append(_w_matrix(k, cols))
        labels.append(("W", k))
    onb_rows = None if onb is None else _readonly(cols.T)
    return GeneratorBasis(n_dim=n, matrices=tuple(matrices), labels=tuple(labels), onb=onb_rows)


def superposition_order(n: int) -> List[int]:
    """Permutation of standard_basis(n) putting U12, V12, W1..W_{N-1} first."""
    labels = standard_basis(n).labels
    head = [labels.index(("U", 1, 2)), labels.index(("V", 1, 2))]
    head += [labels.index(("W", l)) for l in range(1, n)]
    return head + [i for i in range(len(labels)) if i not in head]


def superposition_basis(n: int, onb: Optional[Sequence[Sequence[complex]]] = None) -> GeneratorBasis:
    """Standard generators arranged for two-state superpositions of onb[0], onb[1]."""
    return reorder(standard_basis(n, onb), superposition_order(n))


def three_state_basis(onb: Optional[Sequence[Sequence[complex]]] = None) -> GeneratorBasis:
    """Gell-Mann generators with the off-diagonal pairs first and W1, W2 last."""
    return reorder(standard_basis(3, onb), THREE_STATE_ORDER)


def tensorial_basis(factors: Sequence[GeneratorBasis]) -> GeneratorBasis:
    """Generators 2^((1-n)/2) Λ_{j1} ⊗ ... ⊗ Λ_{jn} of the composite space.

    Index 0 of each factor stands for sqrt(2/N_i) I. The all-zero tuple is
    proportional to the identity and is left out. Ordering is by sector:
    tuples with one nonzero index (factor by factor), then two, and so on.
    """
    factors = tuple(factors)
    if len(factors) < 2:
        raise BasisError("a tensorial basis needs at least two factors")
    nf = len(factors)
    extended = [
        [math.sqrt(2.0 / f.n_dim) * identity(f.n_dim)] + list(f.matrices) for f in factors
    ]
    prefactor = 2.0 ** ((1 - nf) / 2.0)
    matrices: List[np.ndarray] = []
    labels: List[Label] = []
    for order in range(1, nf + 1):
        for active in itertools.combinations(range(nf), order):
            ranges = [range(1, factors[i].n_dim ** 2) for i in active]
            for inner in itertools.product(*ranges):
                label = [0] * nf
                for pos, j in zip(active, inner):
                    label[pos] = j
                m = extended[0][label[0]]
                for i in range(1, nf):
                    m = np.kron(m, extended[i][label[i]])
                matrices.append(prefactor * m)
                labels.append(tuple(label))
    n = int(np.prod([f.n_dim for f in factors]))
    return GeneratorBasis(
        n_dim=n, matrices=tuple(matrices), labels=tuple(labels), kind="tensorial", factors=factors
    )


def two_qubit_display_order() -> List[int]:
    """Permutation of tensorial_basis(su2, su2) into the usual listing order.

    The listing runs (0,1), (0,2), (0,3), (1,0), (2,0), (3,0), then the
    two-qubit correlators (1,1) ... (3,3) lexicographically.
    """
    return [3, 4, 5, 0, 1, 2] + list(range(6, 15))


def verify_basis(b: GeneratorBasis) -> BasisReport:
    tol = ORTHONORMAL_TOL
    herm = max(hermitian_deviation(m) for m in b.matrices)
    trace_dev = float(np.max(np.abs(np.einsum("kii->k", b.stack))))
    gram = np.einsum("aij,bij->ab", b.stack.conj(), b.stack)
    ortho = float(np.max(np.abs(gram - 2.0 * np.eye(b.size))))
    return BasisReport(
        hermitian_ok=herm < tol,
        traceless_ok=trace_dev < tol,
        orthonormal_ok=ortho < tol,
        worst_deviation=max(herm, trace_dev, ortho),
    )


def reorder(b: GeneratorBasis, perm: Sequence[int]) -> GeneratorBasis:
    """New basis whose i-th generator is b's perm[i]-th one."""
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(b.size)):
        raise BasisError(f"not a permutation of 0..{b.size - 1}")
    return GeneratorBasis(
        n_dim=b.n_dim,
        matrices=tuple(b.matrices[p] for p in perm),
        labels=tuple(b.labels[p] for p in perm),
        kind=b.kind,
        factors=b.factors,
        onb=b.onb,
    )


def inverse_permutation(perm: Sequence[int]) -> List[int]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return inv


def basis_coefficients(h: np.ndarray, b: GeneratorBasis) -> Tuple[float, np.ndarray]:
    """Expansion h = c0 sqrt(2/N) I + Σ c_i Λ_i of a Hermitian matrix."""
    h = np.asarray(h, dtype=np.complex128)
    c0 = float(np.real(np.trace(h))) * math.sqrt(2.0 / b.n_dim) / 2.0
    coeffs = np.real(np.einsum("kij,ji->k", b.stack, h)) / 2.0
    return c0, coeffs


def reconstruct(c0: float, coeffs: np.ndarray, b: GeneratorBasis) -> np.ndarray:
    return c0 * math.sqrt(2.0 / b.n_dim) * identity(b.n_dim) + np.einsum("k,kij->ij", coeffs, b.stack)
