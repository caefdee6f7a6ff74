import json
import os
import subprocess
from pathlib import Path

import numpy as np


def run_module(
    py: str, mod: str, args: list[str], cwd: Path, extra_env: dict | None = None
) -> subprocess.CompletedProcess:
    env = os.environ.copy()
    env["PYTHONPATH"] = str(cwd)
    env.pop("BLOCH_SEED", None)
    env.pop("BLOCH_LOG_LEVEL", None)
    env.update(extra_env or {})
    cmd = [py, "-m", mod, *args]
    return subprocess.run(cmd, cwd=cwd, capture_output=True, text=True, env=env)


def payload(cp: subprocess.CompletedProcess) -> dict:
    return json.loads(cp.stdout)


def random_density(n: int, rng: np.random.Generator, rank: int = 0) -> np.ndarray:
    """Random N x N density matrix (full rank unless rank is given)."""
    k = rank or n
    g = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    d = g @ g.conj().T
    return d / np.trace(d).real


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_observable(n: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian with well-separated eigenvalues 1..N in a random eigenbasis."""
    u = random_unitary(n, rng)
    return (u * np.arange(1.0, n + 1.0)) @ u.conj().T


def random_unit_axis(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)
