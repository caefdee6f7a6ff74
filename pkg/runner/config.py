"""Experiment configuration: a JSON file, flag overrides, validation.

A config file is a single JSON object:

    {"command": "chsh", "parameters": {"optimal": true}, "seed": 42, "shots": 1000000}

Top-level keys and per-command parameter keys are closed sets; anything
else is rejected with a ConfigError naming the offending key.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

from bloch.errors import BlochError
from bloch.multipartite import CHSH_PAIRS
from bloch.sampling import default_seed

logger = logging.getLogger(__name__)


class ConfigError(BlochError):
    """Malformed, unknown or contradictory configuration."""

    pass


DEFAULT_SHOTS = 100_000
OUTPUT_FORMATS = ("json", "csv")
TOP_LEVEL_KEYS = ("command", "parameters", "seed", "shots", "workers", "output_format", "output_path")

PARAMETER_KEYS: Dict[str, tuple] = {
    "basis": ("action", "kind", "n_dim", "factors", "display_order"),
    "encode": ("state", "basis"),
    "decode": ("vector", "basis"),
    "measure": ("state", "observable", "basis"),
    "interfere": ("mode", "a1", "a2", "a3", "alpha", "delta", "n_dim"),
    "decompose": ("state", "factors", "entangled", "reference_ab"),
    "rod": ("n_a", "n_b", "order"),
    "chsh": ("a", "a_prime", "b", "b_prime", "optimal", "mode"),
}

REQUIRED_PARAMETERS: Dict[str, tuple] = {
    "encode": ("state",),
    "decode": ("vector",),
    "measure": ("state", "observable"),
    "rod": ("n_a", "n_b"),
}

COMMANDS = tuple(PARAMETER_KEYS)
CHSH_AXES = ("a", "a_prime", "b", "b_prime")
CHSH_MIN_SHOTS = len(CHSH_PAIRS)


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    shots: int = DEFAULT_SHOTS
    workers: int = 1
    output_format: str = "json"
    output_path: Optional[str] = None

    @property
    def monte_carlo(self) -> bool:
        return is_monte_carlo(self.command, self.parameters)

    def to_dict(self) -> Dict[str, Any]:
        """Config echo for run records; shots only where they are used."""
        out: Dict[str, Any] = {"command": self.command, "parameters": self.parameters, "seed": self.seed}
        if self.monte_carlo:
            out["shots"] = self.shots
            out["workers"] = self.workers
        out["output_format"] = self.output_format
        return out


def is_monte_carlo(command: str, parameters: Mapping[str, Any]) -> bool:
    if command in ("measure", "rod"):
        return True
    return command == "chsh" and parameters.get("mode", "analytic") == "monte_carlo"


def _load_file(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return raw


def _int_field(raw: Mapping[str, Any], key: str, default: Optional[int]) -> Optional[int]:
    value = raw.get(key)
    if value is None:
        return default
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}")
    return value


def _check_parameters(command: str, params: Mapping[str, Any]) -> None:
    allowed = PARAMETER_KEYS[command]
    for key in params:
        if key not in allowed:
            raise ConfigError(f"unknown parameter '{key}' for command '{command}' (allowed: {', '.join(allowed)})")
    for key in REQUIRED_PARAMETERS.get(command, ()):
        if params.get(key) is None:
            raise ConfigError(f"command '{command}' needs parameter '{key}'")

    if command == "chsh":
        given = [k for k in CHSH_AXES if params.get(k) is not None]
        if params.get("optimal"):
            if given:
                raise ConfigError(f"'optimal' cannot be combined with explicit axes ({', '.join(given)})")
        elif len(given) != len(CHSH_AXES):
            raise ConfigError("chsh needs either 'optimal': true or all four axes a, a_prime, b, b_prime")
        if params.get("mode", "analytic") not in ("analytic", "monte_carlo"):
            raise ConfigError(f"chsh mode must be 'analytic' or 'monte_carlo', got {params.get('mode')!r}")
    elif command == "interfere":
        mode = params.get("mode", 2)
        if mode not in (2, 3):
            raise ConfigError(f"interfere mode must be 2 or 3, got {mode!r}")
        if mode == 2 and (params.get("a3") is not None or params.get("delta") is not None):
            raise ConfigError("a3 and delta only apply to three-state superpositions (mode 3)")
        if mode == 3 and params.get("n_dim") not in (None, 3):
            raise ConfigError("three-state superpositions live in N = 3")
    elif command == "decompose":
        if (params.get("state") is None) == (params.get("entangled") is None):
            raise ConfigError("decompose needs exactly one of 'state' or 'entangled'")
        if params.get("entangled") is not None and params.get("reference_ab") is not None:
            raise ConfigError("'reference_ab' applies to explicit states only")
    elif command == "rod":
        if params.get("order", "AB") not in ("AB", "BA"):
            raise ConfigError(f"rod order must be 'AB' or 'BA', got {params.get('order')!r}")


def parse_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Merge a config file (optional) with flag overrides and validate.

    Overrides win over file values; their 'parameters' entry is merged key by
    key into the file's parameters. Seed falls back to $BLOCH_SEED, then 0.
    """
    raw: Dict[str, Any] = _load_file(path) if path else {}
    for key in raw:
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError(f"unknown config key '{key}' (allowed: {', '.join(TOP_LEVEL_KEYS)})")

    params = raw.get("parameters") or {}
    if not isinstance(params, dict):
        raise ConfigError("'parameters' must be a JSON object")
    params = dict(params)
    for key, value in (overrides or {}).items():
        if key == "parameters":
            params.update({k: v for k, v in value.items() if v is not None})
        elif value is not None:
            raw[key] = value

    command = raw.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r} (expected one of: {', '.join(COMMANDS)})")
    _check_parameters(command, params)
    mc = is_monte_carlo(command, params)

    seed = _int_field(raw, "seed", None)
    try:
        seed = default_seed(seed, warn=mc)
    except BlochError as e:
        raise ConfigError(str(e)) from None
    shots = _int_field(raw, "shots", DEFAULT_SHOTS)
    workers = _int_field(raw, "workers", 1)
    if mc and shots < 1:
        raise ConfigError(f"'shots' must be at least 1, got {shots}")
    if mc and command == "chsh" and shots < CHSH_MIN_SHOTS:
        raise ConfigError(f"Monte Carlo chsh needs 'shots' >= {CHSH_MIN_SHOTS} (one per axis pair), got {shots}")
    if workers < 1:
        raise ConfigError(f"'workers' must be at least 1, got {workers}")

    output_format = raw.get("output_format", "json")
    if output_format not in OUTPUT_FORMATS:
        raise ConfigError(f"output_format must be one of {', '.join(OUTPUT_FORMATS)}, got {output_format!r}")
    output_path = raw.get("output_path")
    if output_path is not None and not isinstance(output_path, str):
        raise ConfigError("'output_path' must be a string")

    cfg = ExperimentConfig(
        command=command,
        parameters=params,
        seed=seed,
        shots=shots,
        workers=workers,
        output_format=output_format,
        output_path=output_path,
    )
    logger.debug("config: %s", cfg)
    return cfg
