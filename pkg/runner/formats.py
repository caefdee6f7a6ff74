"""JSON/CSV payload writers and the JSON codecs for matrices, vectors and bases.

Matrices travel as row-major nested lists whose entries are [re, im] pairs
(a bare real number is accepted on input). Floats are written with Python's
shortest round-trip repr in both formats, so a CSV cell parses back to the
same double as the JSON value.
"""

import csv
import io
import json
import math
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from bloch.generator_bases import (
    GeneratorBasis,
    label_text,
    standard_basis,
    superposition_basis,
    tensorial_basis,
    three_state_basis,
)
from runner.config import ConfigError

BASIS_KINDS = ("standard", "superposition", "three_state", "tensorial")


def _entry(value: Any) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"matrix entry must be a number or [re, im], got {value!r}")
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
    ):
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"matrix entry must be a number or [re, im], got {value!r}")


def matrix_from_json(obj: Any) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(row, list) for row in obj):
        raise ConfigError("matrix must be a non-empty list of rows")
    n = len(obj)
    if any(len(row) != n for row in obj):
        raise ConfigError(f"matrix must be square, got rows of lengths {[len(r) for r in obj]}")
    return np.array([[_entry(v) for v in row] for row in obj], dtype=np.complex128)


def matrix_to_json(m: np.ndarray) -> List[List[List[float]]]:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def vector_from_json(obj: Any) -> np.ndarray:
    if not isinstance(obj, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj
    ):
        raise ConfigError("vector must be a list of real numbers")
    return np.array(obj, dtype=float)


def complex_vector_from_json(obj: Any) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ConfigError("state vector must be a non-empty list")
    return np.array([_entry(v) for v in obj], dtype=np.complex128)


def axis_from_json(obj: Any, name: str) -> Tuple[float, float, float]:
    v = vector_from_json(obj)
    if v.size != 3:
        raise ConfigError(f"axis '{name}' must have three components, got {v.size}")
    return tuple(float(x) for x in v)


def dim_from_size(size: int, what: str) -> int:
    """N with N^2 - 1 == size."""
    n = int(round(math.sqrt(size + 1)))
    if n < 2 or n * n - 1 != size:
        raise ConfigError(f"{what} of length {size} is not N^2 - 1 for any N >= 2")
    return n


def basis_from_descriptor(desc: Optional[Dict[str, Any]], n_dim: Optional[int] = None) -> GeneratorBasis:
    """Build a basis from {"kind": ..., "n_dim": N} or {"kind": "tensorial", "factors": [...]}.

    Without a descriptor the standard basis of dimension n_dim is used.
    """
    if desc is None:
        if n_dim is None:
            raise ConfigError("a basis descriptor or a dimension is required")
        return standard_basis(n_dim)
    if not isinstance(desc, dict):
        raise ConfigError("basis descriptor must be a JSON object")
    unknown = set(desc) - {"kind", "n_dim", "factors"}
    if unknown:
        raise ConfigError(f"unknown basis descriptor key '{sorted(unknown)[0]}'")
    kind = desc.get("kind", "standard")
    if kind not in BASIS_KINDS:
        raise ConfigError(f"basis kind must be one of {', '.join(BASIS_KINDS)}, got {kind!r}")
    if kind == "tensorial":
        factors = desc.get("factors")
        if not isinstance(factors, list) or len(factors) < 2:
            raise ConfigError("tensorial basis needs a 'factors' list of at least two entries")
        built = [basis_from_descriptor(f) if isinstance(f, dict) else standard_basis(_dim(f)) for f in factors]
        basis = tensorial_basis(built)
    else:
        n = _dim(desc.get("n_dim", n_dim))
        if kind == "standard":
            basis = standard_basis(n)
        elif kind == "superposition":
            basis = superposition_basis(n)
        else:
            if n != 3:
                raise ConfigError("the three_state arrangement exists for N = 3 only")
            basis = three_state_basis()
    if n_dim is not None and basis.n_dim != n_dim:
        raise ConfigError(f"basis is SU({basis.n_dim}) but the data is {n_dim}-dimensional")
    return basis


def _dim(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 2:
        raise ConfigError(f"dimension must be an integer >= 2, got {value!r}")
    return value


def basis_to_json(basis: GeneratorBasis) -> Dict[str, Any]:
    return {
        "n_dim": basis.n_dim,
        "kind": basis.kind,
        "labels": [label_text(lab) for lab in basis.labels],
        "matrices": [matrix_to_json(m) for m in basis.matrices],
    }


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def render_json(payload: Dict[str, Any]) -> str:
    return json.dumps(to_jsonable(payload), indent=2, allow_nan=False) + "\n"


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def error_object(exc: BaseException, command: Optional[str]) -> str:
    return json.dumps({"error": {"type": type(exc).__name__, "message": str(exc), "command": command}}) + "\n"
