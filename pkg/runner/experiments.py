"""Command handlers: one function per command, each returning a results dict.

`execute` dispatches a validated ExperimentConfig, times it and wraps the
result in a RunRecord. `csv_table` flattens a record's results into the
rows written for --format csv.
"""

import itertools
import logging
import math
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np

import bloch
from bloch.bloch_map import BlochVector, OperatorState, decode, encode, is_state, purity
from bloch.generator_bases import label_text, reorder, superposition_basis, two_qubit_display_order, verify_basis
from bloch.interference_lab import (
    Superposition2,
    Superposition3,
    chi_simplex,
    interference2,
    interference3,
    plus_minus_simplex,
    superposition2_state,
    superposition3_state,
)
from bloch.matrix_kernel import eig_hermitian, partial_trace
from bloch.measurement_engine import born_probabilities, run_measurement_parallel, simplex_from_observable
from bloch.multipartite import (
    CHSH_PAIRS,
    EntangledPairSpec,
    RodExperimentConfig,
    SectorLayout,
    chsh_correlations,
    chsh_value,
    entangled_decompose,
    entangled_state,
    optimal_chsh_axes,
    rod_experiment,
    sector_split,
    singlet_expectation,
    singlet_table,
)
from runner.config import CHSH_AXES, ConfigError, ExperimentConfig
from runner.formats import (
    axis_from_json,
    basis_from_descriptor,
    basis_to_json,
    complex_vector_from_json,
    dim_from_size,
    matrix_from_json,
    matrix_to_json,
    to_jsonable,
    vector_from_json,
)

logger = logging.getLogger(__name__)

TSIRELSON = 2.0 * math.sqrt(2.0)
SPIN_LABELS = ("-", "+")


@dataclass(frozen=True)
class RunRecord:
    config: ExperimentConfig
    results: Dict[str, Any]
    wall_time: float
    library_version: str = bloch.__version__

    def payload(self, timing: bool = False) -> Dict[str, Any]:
        """Stdout payload; wall_time only on request so replays stay byte-identical."""
        out = {"config": self.config.to_dict(), "library_version": self.library_version, "results": self.results}
        if timing:
            out["wall_time"] = self.wall_time
        return out


def _as_list(value: Any) -> List[float]:
    values = value if isinstance(value, list) else [value]
    if not values or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in values):
        raise ConfigError(f"expected a number or a list of numbers, got {value!r}")
    return [float(v) for v in values]


def _number(params: Dict[str, Any], key: str, default: Any) -> Any:
    value = params.get(key, default)
    if value is not None and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise ConfigError(f"'{key}' must be a number, got {value!r}")
    return value


def run_basis(cfg: ExperimentConfig) -> Dict[str, Any]:
    p = cfg.parameters
    action = p.get("action", "dump")
    if action not in ("dump", "verify"):
        raise ConfigError(f"basis action must be 'dump' or 'verify', got {action!r}")
    kind = p.get("kind", "standard")
    desc = {"kind": kind}
    if kind == "tensorial":
        desc["factors"] = p.get("factors", [2, 2])
    else:
        desc["n_dim"] = p.get("n_dim", 2)
    basis = basis_from_descriptor(desc)
    if p.get("display_order"):
        if basis.kind != "tensorial" or basis.factor_dims != (2, 2):
            raise ConfigError("display_order applies to the two-qubit tensorial basis only")
        basis = reorder(basis, two_qubit_display_order())
    report = verify_basis(basis)
    out: Dict[str, Any] = {
        "report": {
            "hermitian": report.hermitian_ok,
            "traceless": report.traceless_ok,
            "orthonormal": report.orthonormal_ok,
            "worst_deviation": report.worst_deviation,
        }
    }
    if action == "dump":
        out.update(basis_to_json(basis))
    return out


def run_encode(cfg: ExperimentConfig) -> Dict[str, Any]:
    p = cfg.parameters
    state = matrix_from_json(p["state"])
    basis = basis_from_descriptor(p.get("basis"), state.shape[0])
    r = encode(OperatorState(state), basis)
    return {
        "n_dim": basis.n_dim,
        "basis_kind": basis.kind,
        "labels": [label_text(lab) for lab in basis.labels],
        "vector": r.components,
        "norm": r.norm(),
        "purity": purity(r),
    }


def run_decode(cfg: ExperimentConfig) -> Dict[str, Any]:
    p = cfg.parameters
    v = vector_from_json(p["vector"])
    basis = basis_from_descriptor(p.get("basis"), dim_from_size(v.size, "vector"))
    r = BlochVector(v, basis)
    d = decode(r)
    eigenvalues = eig_hermitian(d).eigenvalues
    return {
        "n_dim": basis.n_dim,
        "matrix": matrix_to_json(d),
        "eigenvalues": eigenvalues,
        "min_eigenvalue": float(eigenvalues[0]),
        "is_state": is_state(r),
        "purity": purity(r),
    }


def run_measure(cfg: ExperimentConfig) -> Dict[str, Any]:
    p = cfg.parameters
    state = OperatorState(matrix_from_json(p["state"]))
    observable = matrix_from_json(p["observable"])
    basis = basis_from_descriptor(p.get("basis"), state.n_dim)
    simplex = simplex_from_observable(observable, basis)
    run = run_measurement_parallel(state, simplex, cfg.shots, cfg.seed, cfg.workers)
    return {
        "eigenvalues": simplex.eigenvalues,
        "analytic": run.probabilities,
        "empirical": run.frequencies,
        "counts": run.counts,
        "stderr3": run.three_sigma(),
        "shots": run.shots,
    }


def run_interfere(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Closed-form interference terms checked against the full Born pipeline."""
    p = cfg.parameters
    mode = p.get("mode", 2)
    alphas = _as_list(p.get("alpha", 0.0))
    rows: List[Dict[str, Any]] = []
    if mode == 2:
        n = p.get("n_dim", 2)
        if isinstance(n, bool) or not isinstance(n, int):
            raise ConfigError(f"'n_dim' must be an integer, got {n!r}")
        a1 = _number(p, "a1", 1.0 / math.sqrt(2.0))
        a2 = _number(p, "a2", None)
        simplex = plus_minus_simplex(superposition_basis(n))
        for alpha in alphas:
            s = Superposition2.from_a1(a1, alpha, n) if a2 is None else Superposition2(a1, a2, alpha, n)
            rep = interference2(s)
            born = born_probabilities(superposition2_state(s), simplex).weights[:2]
            rows.append(
                {
                    "alpha": alpha,
                    "I": rep.interference_terms,
                    "P": rep.probabilities,
                    "pipeline_deviation": float(np.max(np.abs(born - rep.probabilities))),
                }
            )
        amplitudes = [s.a1, s.a2]
    else:
        third = 1.0 / math.sqrt(3.0)
        a1, a2, a3 = (_number(p, k, third) for k in ("a1", "a2", "a3"))
        deltas = _as_list(p.get("delta", 0.0))
        simplex = chi_simplex()
        for alpha, delta in itertools.product(alphas, deltas):
            s = Superposition3(a1, a2, a3, alpha, delta)
            rep = interference3(s)
            born = born_probabilities(superposition3_state(s), simplex).weights
            rows.append(
                {
                    "alpha": alpha,
                    "delta": delta,
                    "I": rep.interference_terms,
                    "P": rep.probabilities,
                    "pipeline_deviation": float(np.max(np.abs(born - rep.probabilities))),
                }
            )
        amplitudes = [a1, a2, a3]
    return {"mode": mode, "amplitudes": amplitudes, "rows": rows}


def _factors(p: Dict[str, Any]) -> Tuple[int, int]:
    factors = p.get("factors", [2, 2])
    if (
        not isinstance(factors, list)
        or len(factors) != 2
        or any(isinstance(f, bool) or not isinstance(f, int) or f < 2 for f in factors)
    ):
        raise ConfigError(f"'factors' must be two integers >= 2, got {factors!r}")
    return factors[0], factors[1]


def _entangled_spec(obj: Any, dims: Tuple[int, int]) -> EntangledPairSpec:
    if not isinstance(obj, dict):
        raise ConfigError("'entangled' must be a JSON object")
    allowed = {"a1", "a2", "alpha", "psi_a", "phi_a", "psi_b", "phi_b"}
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown entangled-pair key '{sorted(unknown)[0]}'")
    a1 = _number(obj, "a1", 1.0 / math.sqrt(2.0))
    a2 = _number(obj, "a2", None)
    alpha = _number(obj, "alpha", 0.0)
    vectors = [obj.get(k) for k in ("psi_a", "phi_a", "psi_b", "phi_b")]
    if all(v is None for v in vectors):
        return EntangledPairSpec.canonical(a1, alpha, dims, a2)
    if any(v is None for v in vectors):
        raise ConfigError("give all of psi_a, phi_a, psi_b, phi_b or none of them")
    if a2 is None:
        a2 = math.sqrt(max(0.0, 1.0 - a1 * a1))
    return EntangledPairSpec(a1, a2, alpha, *(complex_vector_from_json(v) for v in vectors))


def run_decompose(cfg: ExperimentConfig) -> Dict[str, Any]:
    p = cfg.parameters
    dims = _factors(p)
    if p.get("entangled") is not None:
        spec = _entangled_spec(p["entangled"], dims)
        dec = entangled_decompose(spec)
        state = entangled_state(spec)
        r = encode(state, dec.layout.basis)
    else:
        state = OperatorState(matrix_from_json(p["state"]))
        layout = SectorLayout.standard(*dims)
        if state.n_dim != layout.n_dim:
            raise ConfigError(f"state is {state.n_dim}-dimensional but factors {list(dims)} give {layout.n_dim}")
        r = encode(state, layout.basis)
        ref = p.get("reference_ab")
        dec = sector_split(r, layout, None if ref is None else vector_from_json(ref))
    layout = dec.layout
    separable = r.components - dec.r_int
    checks = {
        "reassembly": float(np.max(np.abs(dec.reassemble().components - r.components))),
        "reduced_a": float(np.max(np.abs(decode(dec.r_a) - partial_trace(state.matrix, dims, "A")))),
        "reduced_b": float(np.max(np.abs(decode(dec.r_b) - partial_trace(state.matrix, dims, "B")))),
        "interference_overlap": abs(float(dec.r_int @ separable)),
    }
    return {
        "factors": list(dims),
        "d_a": layout.d_a,
        "d_b": layout.d_b,
        "d_ab": layout.d_ab,
        "labels_a": [label_text(lab) for lab in layout.basis_a.labels],
        "labels_b": [label_text(lab) for lab in layout.basis_b.labels],
        "r_a": dec.r_a.components,
        "r_b": dec.r_b.components,
        "r_ab": dec.r_ab,
        "r_int": dec.r_int[layout.offsets["AB"].start : layout.offsets["AB"].stop],
        "checks": checks,
    }


def run_rod(cfg: ExperimentConfig) -> Dict[str, Any]:
    p = cfg.parameters
    n_a, n_b = axis_from_json(p["n_a"], "n_a"), axis_from_json(p["n_b"], "n_b")
    result = rod_experiment(
        RodExperimentConfig(n_a, n_b, cfg.shots, cfg.seed), order=p.get("order", "AB"), workers=cfg.workers
    )
    return {
        "order": result.order,
        "counts": result.counts,
        "frequencies": result.counts / result.shots,
        "analytic_table": singlet_table(n_a, n_b),
        "e_hat": result.e_hat,
        "e_analytic": singlet_expectation(n_a, n_b),
        "shots": result.shots,
    }


def run_chsh(cfg: ExperimentConfig) -> Dict[str, Any]:
    p = cfg.parameters
    if p.get("optimal"):
        axes = [tuple(float(x) for x in v) for v in optimal_chsh_axes()]
    else:
        axes = [axis_from_json(p[k], k) for k in CHSH_AXES]
    mode = p.get("mode", "analytic")
    corr = chsh_correlations(*axes, mode=mode, shots=cfg.shots, seed=cfg.seed, workers=cfg.workers)
    out: Dict[str, Any] = {
        "mode": mode,
        "axes": dict(zip(CHSH_AXES, axes)),
        "correlations": [{"pair": f"({x},{y})", "E": float(e)} for (x, y), e in zip(CHSH_PAIRS, corr)],
        "S": chsh_value(corr),
        "tsirelson_bound": TSIRELSON,
    }
    if mode == "monte_carlo":
        out["shots"] = cfg.shots
    return out


HANDLERS: Dict[str, Callable[[ExperimentConfig], Dict[str, Any]]] = {
    "basis": run_basis,
    "encode": run_encode,
    "decode": run_decode,
    "measure": run_measure,
    "interfere": run_interfere,
    "decompose": run_decompose,
    "rod": run_rod,
    "chsh": run_chsh,
}


def execute(cfg: ExperimentConfig) -> RunRecord:
    handler = HANDLERS[cfg.command]
    if cfg.monte_carlo:
        logger.info("%s: seed=%d shots=%d workers=%d", cfg.command, cfg.seed, cfg.shots, cfg.workers)
    start = time.perf_counter()
    results = handler(cfg)
    elapsed = time.perf_counter() - start
    logger.info("%s finished in %.3fs", cfg.command, elapsed)
    return RunRecord(config=cfg, results=to_jsonable(results), wall_time=elapsed)


def _complex_cells(matrix: Sequence[Sequence[Sequence[float]]]) -> List[Tuple[int, int, float, float]]:
    return [(i, j, z[0], z[1]) for i, row in enumerate(matrix) for j, z in enumerate(row)]


def csv_table(record: RunRecord) -> Tuple[List[str], List[List[Any]]]:
    """Header and rows for the record's command."""
    res = record.results
    command = record.config.command
    if command == "basis":
        if "matrices" not in res:
            return ["check", "value"], [[k, v] for k, v in res["report"].items()]
        rows = [[lab, i, j, re, im] for lab, m in zip(res["labels"], res["matrices"]) for i, j, re, im in _complex_cells(m)]
        return ["label", "row", "col", "re", "im"], rows
    if command == "encode":
        return ["index", "label", "component"], [[k, lab, c] for k, (lab, c) in enumerate(zip(res["labels"], res["vector"]))]
    if command == "decode":
        return ["row", "col", "re", "im"], [list(cell) for cell in _complex_cells(res["matrix"])]
    if command == "measure":
        rows = [
            [k, res["eigenvalues"][k], res["analytic"][k], res["empirical"][k], res["counts"][k], res["stderr3"][k]]
            for k in range(len(res["counts"]))
        ]
        return ["outcome", "eigenvalue", "analytic", "empirical", "count", "stderr3"], rows
    if command == "interfere":
        if res["mode"] == 2:
            header = ["alpha", "I_plus", "I_minus", "P_plus", "P_minus"]
            return header, [[r["alpha"], *r["I"], *r["P"]] for r in res["rows"]]
        header = ["alpha", "delta", "I1", "I2", "I3", "P1", "P2", "P3"]
        return header, [[r["alpha"], r["delta"], *r["I"], *r["P"]] for r in res["rows"]]
    if command == "decompose":
        rows = [
            [sector, k, value]
            for sector, key in (("A", "r_a"), ("B", "r_b"), ("AB", "r_ab"), ("int", "r_int"))
            for k, value in enumerate(res[key])
        ]
        return ["sector", "index", "value"], rows
    if command == "rod":
        rows = [
            [SPIN_LABELS[a], SPIN_LABELS[b], res["counts"][a][b], res["frequencies"][a][b], res["analytic_table"][a][b]]
            for a in (0, 1)
            for b in (0, 1)
        ]
        return ["a", "b", "count", "frequency", "analytic"], rows
    rows = [[c["pair"], c["E"]] for c in res["correlations"]] + [["S", res["S"]]]
    return ["pair", "E"], rows
