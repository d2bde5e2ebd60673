"""Command-line entry point.

Subcommands tie the library together into reproducible runs driven by
one TOML config:

    multiduff coeffs   -c run.toml          coefficient report
    multiduff response -c run.toml          steady-state response CSV
    multiduff simulate -c run.toml          single-frequency trajectory
    multiduff sweep    -c run.toml          stepped-frequency scan
    multiduff fit      -c run.toml data.csv parameter recovery

Exit codes: 0 success, 1 validation error, 2 numerical failure,
3 I/O or file-format error.  Commands draw no randomness, so a rerun
with the same config and data writes byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys

import numpy as np

from . import io
from .coefficients import (AxisCoefficients, tabulated_coefficients,
                           _coeffs_from_slots, closed_form_slots,
                           max_relative_discrepancy, taylor_slots)
from .config import RunConfig, load_config
from .dynamics import (SweepProtocol, integrate, steady_amplitude, sweep,
                       trajectory_image)
from .errors import (ConfigError, IOFormatError, NumericalError,
                     SweepAborted, ValidationError)
from .estimation import branch_amplitude, fit_response
from .multiscale import ResponseInputs, response_curve

TWO_PI = 2.0 * math.pi


class _Parser(argparse.ArgumentParser):
    # usage problems are validation errors (exit 1), not argparse's
    # default exit 2, which is reserved for numerical failures
    def error(self, message):
        raise ValidationError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="multiduff",
                     description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-c", "--config", required=True,
                       help="path to the run config (TOML)")
        p.add_argument("-o", "--output-dir", default=None,
                       help="override [output].dir from the config")
        p.set_defaults(func=func)
        return p

    add("coeffs", cmd_coeffs,
        "compare closed-form and Taylor-derived axis coefficients")
    add("response", cmd_response,
        "steady-state response branches over a detuning range")
    add("simulate", cmd_simulate,
        "integrate one drive frequency and record the trajectory")
    add("sweep", cmd_sweep,
        "stepped-frequency scan with carried state (hysteresis)")
    p_fit = add("fit", cmd_fit,
                "recover model parameters from a measured scan")
    p_fit.add_argument("data", help="measurement CSV "
                       f"({io.MEASUREMENT_HEADER})")
    return parser


def _out_dir(cfg: RunConfig, args) -> str:
    directory = args.output_dir or cfg.output.directory
    os.makedirs(directory, exist_ok=True)
    return directory


def _coeff_lines(tag: str, c: AxisCoefficients) -> list:
    names = ("omega0", "mu", "alpha2", "alpha3", "alpha21", "alpha22",
             "alpha4", "alpha5", "alpha6", "alpha7", "alpha8", "alpha2x",
             "alpha2y", "omega0x", "omega0y", "k")
    return [f"{tag}.{n} = {repr(getattr(c, n))}" for n in names]


def cmd_coeffs(args) -> int:
    cfg = load_config(args.config)
    cfg.require("trap", "multipole")
    mu, k, axis = 0.0, 0.0, "z"
    if cfg.model is not None:
        if cfg.model.direct is not None:
            raise ValidationError(
                "coeffs checks the multipole derivation; it takes "
                "[trap] + [multipole], not [model.direct]")
        mu, k, axis = cfg.model.mu_driven, cfg.model.k, cfg.model.drive_axis
    if axis != "z":
        raise ValidationError(
            "closed-form coefficient tables exist for the z axis only")

    mc = cfg.multipole_coefficients()
    closed = tabulated_coefficients(mc, cfg.trap.params, mu=mu, k=k)
    slots_closed = closed_form_slots(mc, cfg.trap.params)
    slots_taylor = taylor_slots(mc, cfg.trap.params, about=(0.0, 0.0, 0.0),
                                axis="z")
    taylor = _coeffs_from_slots(slots_taylor, "z", mu, k)
    discrepancy = max_relative_discrepancy(slots_closed, slots_taylor)

    lines = [f"axis = z",
             f"max_relative_discrepancy = {repr(discrepancy)}"]
    lines += _coeff_lines("closed_form", closed)
    lines += _coeff_lines("taylor", taylor)
    path = os.path.join(_out_dir(cfg, args), cfg.output.coeffs)
    io._write_text(path, io.header_lines(cfg.digest) + lines)
    print("\n".join(lines))
    print(f"wrote {path}")
    return 0


def cmd_response(args) -> int:
    cfg = load_config(args.config)
    cfg.require("model", "response")
    inputs = cfg.response_inputs()
    r = cfg.response
    sigmas = np.linspace(r.sigma_min, r.sigma_max, r.n_points)
    points = response_curve(inputs, sigmas)
    rows = [(p.sigma / TWO_PI, p.a, p.branch, p.stable) for p in points]
    path = os.path.join(_out_dir(cfg, args), cfg.output.response)
    io.write_csv(path, ["sigma_hz", "a_m", "branch", "stable"], rows,
                 cfg.digest)
    peak = max(points, key=lambda p: p.a)
    print(f"{len(points)} solutions on {r.n_points} detunings; "
          f"peak a = {peak.a:.6e} m at sigma = {peak.sigma / TWO_PI:.3f} Hz")
    print(f"wrote {path}")
    return 0


def _trailing_half(trajectory):
    keep = trajectory.times >= trajectory.times[-1] / 2.0
    return dataclasses.replace(trajectory,
                               times=trajectory.times[keep],
                               positions=trajectory.positions[keep],
                               velocities=trajectory.velocities[keep])


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    cfg.require("model", "simulate")
    sim = cfg.simulate
    model = cfg.model3d(drive_omega=sim.drive_omega)
    traj = integrate(model, sim.duration_s, n_samples=sim.n_samples,
                     rtol=sim.rtol)
    out = _out_dir(cfg, args)
    path = os.path.join(out, cfg.output.trajectory)
    rows = [(t, p[0], p[1], p[2], v[0], v[1], v[2])
            for t, p, v in zip(traj.times, traj.positions, traj.velocities)]
    io.write_csv(path, ["t_s", "x_m", "y_m", "z_m",
                        "vx_m_s", "vy_m_s", "vz_m_s"], rows, cfg.digest)
    print(f"wrote {path}")

    # amplitudes and the image both come from the trailing half, after
    # the from-rest transient has rung down
    est = steady_amplitude(traj, window=traj.duration / 2.0)
    print(f"steady amplitude (m): a_x = {est.axis('x'):.6e}, "
          f"a_y = {est.axis('y'):.6e}, a_z = {est.axis('z'):.6e} "
          f"(converged = {str(est.converged).lower()})")
    if sim.image:
        image = trajectory_image(_trailing_half(traj), plane=sim.image_plane,
                                 bins=sim.image_bins)
        img_path = os.path.join(out, cfg.output.image)
        io.write_pgm(img_path, image, cfg.digest)
        print(f"wrote {img_path}")
    return 0


def _write_sweep_csv(cfg, args, records) -> str:
    rows = [(r.freq_hz, r.sigma_hz, r.a_x, r.a_y, r.a_z, r.converged)
            for r in records]
    path = os.path.join(_out_dir(cfg, args), cfg.output.sweep)
    io.write_csv(path, ["freq_hz", "sigma_hz", "a_x_m", "a_y_m", "a_z_m",
                        "converged"], rows, cfg.digest)
    return path


def _step_images(cfg, args, records) -> int:
    """From-rest settle-and-measure snapshot at every step inside the
    detuning window.  The default window sits below the bistable
    interval, where the steady state is unique, so an independent
    from-rest run reaches the same attractor as the carried sweep."""
    proto = cfg.protocol
    stem, ext = os.path.splitext(cfg.output.image)
    n_written = 0
    for i, rec in enumerate(records):
        if abs(rec.sigma_hz) > proto.image_sigma_window_hz:
            continue
        model = cfg.model3d(drive_omega=TWO_PI * rec.freq_hz)
        settled = integrate(model, proto.settle_s, rtol=proto.rtol)
        measured = integrate(model, proto.measure_s, state=settled.final,
                             rtol=proto.rtol)
        image = trajectory_image(measured, plane=proto.image_plane,
                                 bins=proto.image_bins)
        path = os.path.join(_out_dir(cfg, args), f"{stem}_step{i:04d}{ext}")
        io.write_pgm(path, image, cfg.digest)
        n_written += 1
    return n_written


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    cfg.require("model", "protocol")
    proto = cfg.protocol
    protocol = SweepProtocol(start_hz=proto.start_hz, end_hz=proto.end_hz,
                             step_hz=proto.step_hz,
                             settle_time=proto.settle_s,
                             measure_time=proto.measure_s,
                             direction=proto.direction,
                             reset_each_step=proto.reset_each_step)
    model = cfg.model3d()
    aborted = None
    try:
        records = sweep(model, protocol, rtol=proto.rtol)
    except SweepAborted as exc:
        aborted = exc
        records = exc.records
    path = _write_sweep_csv(cfg, args, records)
    print(f"{len(records)} steps, "
          f"{sum(1 for r in records if not r.converged)} unconverged")
    print(f"wrote {path}")
    if proto.images:
        n = _step_images(cfg, args, records)
        print(f"wrote {n} step images")
    if aborted is not None:
        print(f"error: {aborted} (partial results kept)", file=sys.stderr)
        return 2
    return 0


def cmd_fit(args) -> int:
    cfg = load_config(args.config)
    cfg.require("model")
    mode = cfg.model.coupling
    if mode == "explicit":
        raise ValidationError(
            "fit supports coupling = 'uncoupled' or 'lumped'")
    omega0 = cfg.axis_coefficients().omega0
    measurement = io.read_measurement_csv(args.data)
    result = fit_response(measurement, omega0,
                          fixed=cfg.fit.fixed or None, mode=mode,
                          window_edge=cfg.model.window_edge,
                          robust=cfg.fit.robust)

    out = _out_dir(cfg, args)
    report_path = os.path.join(out, cfg.output.fit_report)
    io.write_fit_report(report_path, result, cfg.digest)

    scan = measurement.only_scan()
    est = result.estimates
    coeffs = AxisCoefficients(axis=scan.axis, omega0=omega0, mu=est["mu"],
                              alpha3=est["alpha_total"], k=est["k"])
    if mode == "lumped":
        inputs = ResponseInputs.with_lumped(coeffs, est["coupling"],
                                            window_edge=cfg.model.window_edge)
    else:
        inputs = ResponseInputs.uncoupled(coeffs)
    rows = []
    for f in scan.freq_hz:
        sigma = TWO_PI * f - omega0
        rows.append((f, sigma / TWO_PI,
                     branch_amplitude(sigma, inputs, scan.direction)))
    curve_path = os.path.join(out, cfg.output.fit_curve)
    io.write_csv(curve_path, ["freq_hz", "sigma_hz", "a_m"], rows,
                 cfg.digest)

    for name in sorted(est):
        if name in result.fixed:
            print(f"{name} = {est[name]:.6e} (fixed)")
        else:
            print(f"{name} = {est[name]:.6e} "
                  f"+- {result.half_widths[name]:.3e}")
    print(f"residual rms = {result.residual_rms:.3e} m over "
          f"{result.n_used}/{result.n_points} rows")
    print(f"wrote {report_path}")
    print(f"wrote {curve_path}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (IOFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
