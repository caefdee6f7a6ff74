#!/usr/bin/env python3
"""
One-shot tour of the bloch toolkit.

Dumps the qubit basis, measures a σ3 eigenstate, scans two-state
interference, decomposes the singlet and evaluates CHSH (analytic and
rod-model Monte Carlo), writing every payload into an output directory.

Usage:
  python bloch_simple.py [--out bloch_demo] [--seed 42] [--shots 200000] [--workers 2]

This is a convenience wrapper around `python -m runner.cli` commands.
"""
from __future__ import annotations

import argparse
import json
import subprocess
import sys
from pathlib import Path


def run(cmd: list[str]) -> None:
    print("$", " ".join(cmd))
    proc = subprocess.run(cmd)
    if proc.returncode != 0:
        sys.exit(proc.returncode)


def main() -> int:
    ap = argparse.ArgumentParser(description="bloch toolkit demo runner")
    ap.add_argument("--out", default="bloch_demo", help="Output directory (default: bloch_demo)")
    ap.add_argument("--seed", type=int, default=42, help="Master seed (default: 42)")
    ap.add_argument("--shots", type=int, default=200_000, help="Monte Carlo shots (default: 200000)")
    ap.add_argument("--workers", type=int, default=2, help="Parallel shot chunks (default: 2)")
    args = ap.parse_args()

    out = Path(args.out).expanduser().resolve()
    out.mkdir(parents=True, exist_ok=True)
    cli = [sys.executable, "-m", "runner.cli"]
    mc = ["--seed", str(args.seed), "--shots", str(args.shots), "--workers", str(args.workers)]

    # 1) Pauli basis and the sigma_3 "up" state measured along sigma_3
    run([*cli, "basis", "dump", "--n-dim", "2", "--output", str(out / "basis_su2.json")])
    up = json.dumps([[1, 0], [0, 0]])
    sigma3 = json.dumps([[1, 0], [0, -1]])
    run([*cli, "measure", "--state", up, "--observable", sigma3, *mc, "--output", str(out / "measure_up.json")])

    # 2) Interference scan over the relative phase, as CSV for plotting
    phases = [f"{k * 0.39269908169872414:.17g}" for k in range(17)]
    run([*cli, "interfere", "--mode", "2", "--a1", "0.6", "--alpha", *phases, "--format", "csv",
         "--output", str(out / "interfere2.csv")])

    # 3) Singlet sectors and CHSH
    singlet = json.dumps({"a1": 0.7071067811865476, "alpha": 3.141592653589793})
    run([*cli, "decompose", "--entangled", singlet, "--output", str(out / "singlet_sectors.json")])
    run([*cli, "chsh", "--optimal", "--output", str(out / "chsh_analytic.json")])
    run([*cli, "chsh", "--optimal", "--mode", "monte_carlo", *mc, "--output", str(out / "chsh_rod.json")])

    print(f"Wrote payloads to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
