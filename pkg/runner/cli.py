import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, Optional

# Ensure the workspace root (parent of this runner dir) is on sys.path so the
# sibling 'bloch' package imports regardless of invocation path.
_THIS_DIR = os.path.dirname(os.path.abspath(__file__))
_WORKSPACE_ROOT = os.path.dirname(_THIS_DIR)
if _WORKSPACE_ROOT not in sys.path:
    sys.path.insert(0, _WORKSPACE_ROOT)

from bloch.errors import BlochError  # noqa: E402
from runner.config import PARAMETER_KEYS, ConfigError, ExperimentConfig, parse_config  # noqa: E402
from runner.formats import error_object, render_csv, render_json  # noqa: E402

logger = logging.getLogger("runner")

LOG_LEVEL_ENV = "BLOCH_LOG_LEVEL"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

EXIT_OK = 0
EXIT_COMPUTATION = 1
EXIT_CONFIG = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as ConfigError instead of exiting."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(f"{self.prog}: {message}")


def json_arg(value: str) -> Any:
    """Inline JSON, or the path of a file holding JSON."""
    if os.path.isfile(value):
        with open(value, "r", encoding="utf-8") as f:
            value = f.read()
    try:
        return json.loads(value)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"not valid JSON (or a JSON file): {e}") from None


def param_arg(value: str) -> tuple:
    """'key=value' with value parsed as JSON, else kept as a string."""
    key, sep, raw = value.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError("--param expects key=value")
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Master seed (default: $BLOCH_SEED, else 0)")
    common.add_argument("--shots", type=int, default=None, help="Monte Carlo shots (default: 100000)")
    common.add_argument("--workers", type=int, default=None, help="Parallel shot chunks (default: 1)")
    common.add_argument(
        "--format",
        dest="output_format",
        type=str.lower,
        choices=["json", "csv"],
        default=None,
        help="Payload format on stdout (default: json)",
    )
    common.add_argument("--output", dest="output_path", default=None, help="Write the payload to a file instead")
    common.add_argument(
        "--param",
        dest="params",
        type=param_arg,
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Set any command parameter; VALUE is parsed as JSON when possible",
    )
    common.add_argument("--timing", action="store_true", help="Include wall_time in the payload")
    return common


def _overrides(args: argparse.Namespace, command: Optional[str]) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    # Per-command flags use the parameter names as their dest.
    for key in PARAMETER_KEYS.get(command or "", ()):
        value = getattr(args, key, None)
        if value is not None and value is not False:
            params[key] = value
    params.update(dict(args.params))
    return {
        "command": command,
        "parameters": params,
        "seed": args.seed,
        "shots": args.shots,
        "workers": args.workers,
        "output_format": args.output_format,
        "output_path": args.output_path,
    }


def _command_entry(args: argparse.Namespace) -> ExperimentConfig:
    return parse_config(None, _overrides(args, args.command))


def _run_entry(args: argparse.Namespace) -> ExperimentConfig:
    return parse_config(args.config, _overrides(args, None))


def _axis(value: str) -> list:
    parts = [p for p in value.replace(",", " ").split() if p]
    try:
        axis = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"axis must be three numbers, got {value!r}") from None
    if len(axis) != 3:
        raise argparse.ArgumentTypeError(f"axis must be three numbers, got {value!r}")
    return axis


def _factors(value: str) -> list:
    try:
        return [int(p) for p in value.replace("x", ",").split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError(f"factors must look like 2,3 or 2x3, got {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bloch", description="Extended Bloch representation toolkit")
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=LOG_LEVELS,
        default=None,
        help="Logging level on stderr (default: $BLOCH_LOG_LEVEL, else WARNING)",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_options()

    # run command: everything from a config file, flags override
    p_run = subparsers.add_parser("run", parents=[common], help="Run the experiment described by a JSON config file")
    p_run.add_argument("config", help="Path to the JSON config file")
    p_run.set_defaults(func=_run_entry)

    p_basis = subparsers.add_parser("basis", parents=[common], help="Dump or verify a generator basis")
    p_basis.add_argument("action", nargs="?", choices=["dump", "verify"], default=None, help="dump (default) or verify")
    p_basis.add_argument(
        "--kind",
        choices=["standard", "superposition", "three_state", "tensorial"],
        default=None,
        help="Basis arrangement (default: standard)",
    )
    p_basis.add_argument("--n-dim", type=int, default=None, help="Hilbert space dimension N (default: 2)")
    p_basis.add_argument("--factors", type=_factors, default=None, help="Factor dimensions for tensorial, e.g. 2,2")
    p_basis.add_argument(
        "--display-order", action="store_true", help="List the two-qubit tensorial basis in display order"
    )
    p_basis.set_defaults(func=_command_entry)

    p_enc = subparsers.add_parser("encode", parents=[common], help="Density matrix to Bloch vector")
    p_enc.add_argument("--state", type=json_arg, default=None, help="Matrix of [re, im] entries (JSON or file)")
    p_enc.add_argument("--basis", type=json_arg, default=None, help='Basis descriptor, e.g. {"kind": "standard", "n_dim": 3}')
    p_enc.set_defaults(func=_command_entry)

    p_dec = subparsers.add_parser("decode", parents=[common], help="Bloch vector to matrix, with a positivity check")
    p_dec.add_argument("--vector", type=json_arg, default=None, help="Real components (JSON or file)")
    p_dec.add_argument("--basis", type=json_arg, default=None, help="Basis descriptor (default: standard)")
    p_dec.set_defaults(func=_command_entry)

    p_meas = subparsers.add_parser("measure", parents=[common], help="Born weights and membrane Monte Carlo")
    p_meas.add_argument("--state", type=json_arg, default=None, help="Density matrix (JSON or file)")
    p_meas.add_argument("--observable", type=json_arg, default=None, help="Non-degenerate observable (JSON or file)")
    p_meas.add_argument("--basis", type=json_arg, default=None, help="Basis descriptor (default: standard)")
    p_meas.set_defaults(func=_command_entry)

    p_int = subparsers.add_parser("interfere", parents=[common], help="Interference terms of superpositions")
    p_int.add_argument("--mode", type=int, choices=[2, 3], default=None, help="Two- or three-state superposition")
    p_int.add_argument("--a1", type=float, default=None, help="Amplitude a1")
    p_int.add_argument("--a2", type=float, default=None, help="Amplitude a2")
    p_int.add_argument("--a3", type=float, default=None, help="Amplitude a3 (mode 3)")
    p_int.add_argument("--alpha", type=float, nargs="+", default=None, help="Relative phase(s) α in radians")
    p_int.add_argument("--delta", type=float, nargs="+", default=None, help="Relative phase(s) δ in radians (mode 3)")
    p_int.add_argument("--n-dim", type=int, default=None, help="Dimension N for mode 2 (default: 2)")
    p_int.set_defaults(func=_command_entry)

    p_decomp = subparsers.add_parser("decompose", parents=[common], help="Sector decomposition of a bipartite state")
    p_decomp.add_argument("--state", type=json_arg, default=None, help="Bipartite density matrix (JSON or file)")
    p_decomp.add_argument("--factors", type=_factors, default=None, help="Factor dimensions (default: 2,2)")
    p_decomp.add_argument(
        "--entangled", type=json_arg, default=None, help='Two-term pair, e.g. {"a1": 0.6, "alpha": 1.0}'
    )
    p_decomp.add_argument("--reference-ab", type=json_arg, default=None, help="Separable reference AB sector")
    p_decomp.set_defaults(func=_command_entry)

    p_rod = subparsers.add_parser("rod", parents=[common], help="Rod-model singlet coincidence experiment")
    p_rod.add_argument("--n-a", type=_axis, default=None, help="Unit axis for A, e.g. '0,0,1'")
    p_rod.add_argument("--n-b", type=_axis, default=None, help="Unit axis for B")
    p_rod.add_argument("--order", type=str.upper, choices=["AB", "BA"], default=None, help="Measurement order")
    p_rod.set_defaults(func=_command_entry)

    p_chsh = subparsers.add_parser("chsh", parents=[common], help="CHSH value for the singlet")
    p_chsh.add_argument("--optimal", action="store_true", help="Use the coplanar axes reaching 2√2")
    for flag, name in (("a", "a"), ("a-prime", "a'"), ("b", "b"), ("b-prime", "b'")):
        p_chsh.add_argument(f"--{flag}", type=_axis, default=None, help=f"Unit axis {name}")
    p_chsh.add_argument("--mode", choices=["analytic", "monte_carlo"], default=None, help="analytic (default) or monte_carlo")
    p_chsh.set_defaults(func=_command_entry)

    return parser


def _configure_logging(level: Optional[str]) -> None:
    level = level or os.getenv(LOG_LEVEL_ENV, "WARNING").upper()
    if level not in LOG_LEVELS:
        level = "WARNING"
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _fail(exc: BaseException, command: Optional[str], code: int) -> int:
    _configure_logging(None)
    logger.error("%s", exc)
    sys.stdout.write(error_object(exc, command))
    return code


def main(argv=None) -> int:
    parser = build_parser()
    command: Optional[str] = None
    try:
        args = parser.parse_args(argv)
        _configure_logging(args.log_level)
        command = args.command
        cfg = args.func(args)
        command = cfg.command
    except ConfigError as e:
        return _fail(e, command, EXIT_CONFIG)
    except OSError as e:
        return _fail(e, command, EXIT_IO)

    from runner import experiments

    try:
        record = experiments.execute(cfg)
    except ConfigError as e:
        return _fail(e, command, EXIT_CONFIG)
    except BlochError as e:
        return _fail(e, command, EXIT_COMPUTATION)

    if cfg.output_format == "csv":
        text = render_csv(*experiments.csv_table(record))
    else:
        text = render_json(record.payload(timing=args.timing))

    if cfg.output_path:
        try:
            with open(cfg.output_path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        except OSError as e:
            return _fail(e, command, EXIT_IO)
        logger.info("wrote %s payload to %s", cfg.output_format, cfg.output_path)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
