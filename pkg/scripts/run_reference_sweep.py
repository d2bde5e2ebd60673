#!/usr/bin/env python3
"""Hysteresis experiment on the reference axial mode.

Scans the drive frequency up and then down across the bistable
interval of configs/reference_z.toml with carried mechanical state,
and compares what the integrator does against the slow-flow
predictions: settled amplitudes against the stable response branches,
and the two jump locations against the fold points.

The scan replays the lab protocol (settle, then measure, at every
step), so expect roughly a minute of wall time.  --quick halves the
settle window and doubles the step for a faster, coarser pass.

Run from anywhere:  python scripts/run_reference_sweep.py [--quick]
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import time
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from multiduff.config import load_config          # noqa: E402
from multiduff.dynamics import sweep              # noqa: E402
from multiduff.estimation import branch_amplitude # noqa: E402
from multiduff.multiscale import (                # noqa: E402
    fold_points, peak_amplitude)

TWO_PI = 2.0 * math.pi
CONFIG = REPO / "configs" / "reference_z.toml"


def predicted_jump_hz(folds, w0: float, direction: str) -> float:
    # the carried state rides its branch to the fold furthest along
    # the scan, so the positive scan drops at the upper fold and the
    # negative scan rises at the lower one
    edge = max(folds) if direction == "positive" else min(folds)
    return (w0 + edge) / TWO_PI


def largest_step(records):
    best, at = 0.0, None
    for prev, cur in zip(records, records[1:]):
        step = cur.a_z - prev.a_z
        if abs(step) > abs(best):
            best, at = step, cur.freq_hz
    return at, best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--quick", action="store_true",
                        help="coarser scan: half settle, double step")
    args = parser.parse_args()

    cfg = load_config(CONFIG)
    inputs = cfg.response_inputs()
    w0 = inputs.coeffs.omega0
    protocol = cfg.protocol.build()
    if args.quick:
        protocol = dataclasses.replace(
            protocol, step_hz=2 * protocol.step_hz,
            settle_time=protocol.settle_time / 2)

    folds = fold_points(inputs)
    a_peak, sigma_peak = peak_amplitude(inputs)
    print(f"drive omega0/2pi   = {w0 / TWO_PI:.6g} Hz")
    print(f"peak response      = {a_peak:.6g} m at "
          f"{(w0 + sigma_peak) / TWO_PI:.6g} Hz")
    print(f"bistable interval  = {(w0 + min(folds)) / TWO_PI:.2f} .. "
          f"{(w0 + max(folds)) / TWO_PI:.2f} Hz")

    for direction in ("positive", "negative"):
        proto = protocol
        if direction == "negative":
            proto = dataclasses.replace(
                proto, start_hz=protocol.end_hz, end_hz=protocol.start_hz,
                direction="negative")
        t0 = time.perf_counter()
        records = sweep(cfg.model3d(), proto)
        elapsed = time.perf_counter() - t0

        freq = [r.freq_hz for r in records]
        sigma = TWO_PI * (pred := __import__("numpy").asarray(freq)) - w0
        expected = branch_amplitude(sigma, inputs, direction)

        print(f"\n{direction} scan ({len(records)} steps, "
              f"{elapsed:.1f} s wall)")
        print(f"  {'freq Hz':>12} {'a_z m':>12} {'branch m':>12} {'rel':>9}")
        for r, a_ref in zip(records, expected):
            rel = abs(r.a_z - a_ref) / max(a_ref, 1e-30)
            flag = "" if r.converged else "  (unconverged)"
            print(f"  {r.freq_hz:>12.1f} {r.a_z:>12.5e} "
                  f"{a_ref:>12.5e} {rel:>9.2e}{flag}")

        at, step = largest_step(records)
        pred_hz = predicted_jump_hz(folds, w0, direction)
        kind = "down" if step < 0 else "up"
        print(f"  jump {kind} of {abs(step):.3e} m after {at:.1f} Hz; "
              f"fold predicts {pred_hz:.1f} Hz "
              f"(off by {abs(at - pred_hz):.1f} Hz, one step is "
              f"{proto.step_hz:.0f} Hz)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
