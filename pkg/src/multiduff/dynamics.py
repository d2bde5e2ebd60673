"""Time-domain simulation: trajectories, steady amplitudes, sweeps.

Coordinates are displacements about the model equilibrium, in m.  The
state lives in a rotating drive-phase convention: a `State` carries
the drive phase at its own time, so the instantaneous drive force is
k * cos(state.phase) and segments integrate with segment-local time.
Long sweeps therefore never evaluate the drive at large absolute
phase arguments.

The default per-step relative tolerance (1e-11) is set by the energy
budget: with the 7(8) pair the measured energy drift of an undamped
nonlinear oscillation is about 6e-12 per period in relative terms, so
1e4-period runs stay conservative to better than 1e-7.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .coefficients import AXES, _COL, Model3D
from .errors import (StiffnessError, SweepAborted, ValidationError)

TWO_PI = 2.0 * math.pi

# Error-control absolute floors: positions resolve sub-pm scales,
# velocities the matching omega-scaled floor.
ATOL_POSITION = 1e-16
ATOL_VELOCITY = 1e-10

# Steady-state bookkeeping: amplitude chunks span this many drive
# periods, and two consecutive chunk estimates within this relative
# band count as converged.
CHUNK_PERIODS = 25
CONVERGENCE_BAND = 0.01
AMPLITUDE_FLOOR = 1e-15

_PLANES = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}


# ------------------------------------------------------------- states

@dataclass(frozen=True)
class State:
    """Instantaneous mechanical state.

    position/velocity are (x, y, z) displacement coordinates about the
    model equilibrium; `phase` is the drive phase at `time`.
    """

    position: np.ndarray
    velocity: np.ndarray
    time: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        for name in ("position", "velocity"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise ValidationError(f"{name} must have shape (3,)")
            if not np.all(np.isfinite(v)):
                raise ValidationError(f"{name} must be finite")
            v = v.copy()
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        if not (math.isfinite(self.time) and math.isfinite(self.phase)):
            raise ValidationError("time and phase must be finite")


def initial_state(model: Model3D, position=(0.0, 0.0, 0.0),
                  velocity=(0.0, 0.0, 0.0)) -> State:
    """Default start: at rest on the equilibrium, drive phase zero."""
    del model  # displacement coordinates make this model independent
    return State(np.asarray(position, float), np.asarray(velocity, float))


def acceleration(model: Model3D, state: State) -> np.ndarray:
    """Reference acceleration (m/s^2): minus the potential gradient,
    minus per-axis viscous damping, plus the instantaneous drive."""
    x, y, z = state.position
    out = np.empty(3)
    for i, g in enumerate(model.potential.gradient()):
        out[i] = -float(g.evaluate(x, y, z))
    out -= 2.0 * np.asarray(model.mu_vector()) * state.velocity
    if model.drive_k != 0.0:
        out[_COL[model.drive_axis]] += model.drive_k * math.cos(state.phase)
    return out


def energy(model: Model3D, state: State) -> float:
    """Conservative mechanical energy per mass (J/kg): potential value
    plus kinetic term.  Damping and drive are not included."""
    x, y, z = state.position
    return (float(model.potential.evaluate(x, y, z))
            + 0.5 * float(np.dot(state.velocity, state.velocity)))


# -------------------------------------------------- kernel marshalling

class _Packed:
    """Model unpacked into the flat arrays the compiled kernels take."""

    def __init__(self, model: Model3D, omega: float, rtol: float,
                 method: str):
        if method not in _kernel.METHODS:
            raise ValidationError(
                f"unknown method {method!r}; choose from "
                f"{sorted(_kernel.METHODS)}")
        if not (0.0 < rtol <= 1e-3):
            raise ValidationError("rtol must lie in (0, 1e-3]")
        if model.potential.total_degree() > 4:
            raise ValidationError("potential must be at most quartic")
        coefs, exps = [], []
        offsets = [0]
        grad = model.potential.as_float().gradient()
        for i in range(3):
            for e, c in sorted(grad[i].terms.items()):
                if c != 0.0:
                    coefs.append(float(c))
                    exps.append(e)
            offsets.append(len(coefs))
        self.gcoef = np.asarray(coefs, dtype=float)
        self.gexp = (np.asarray(exps, dtype=np.int64) if exps
                     else np.zeros((0, 3), dtype=np.int64))
        self.goff = np.asarray(offsets, dtype=np.int64)
        self.mu = np.asarray(model.mu_vector(), dtype=float)
        self.drive_idx = _COL[model.drive_axis]
        self.k = float(model.drive_k)
        self.omega = float(omega)
        self.rtol = float(rtol)
        self.atol = np.array([ATOL_POSITION] * 3 + [ATOL_VELOCITY] * 3)
        self.tableau = _kernel.METHODS[method]
        # initial trial step: a small fraction of the fastest period
        rates = [omega] + [model.axes[a].omega0 for a in AXES
                           if model.axes[a].omega0 > 0]
        self.h0 = (TWO_PI / max(rates)) / 100.0 if max(rates) > 0 else 1e-6

    def _call(self, fn, y, phase, duration, h, h_max, *extra):
        A, C, B, E, inv_order = self.tableau
        return fn(y, phase, self.omega, self.k, self.drive_idx, self.mu,
                  self.gcoef, self.gexp, self.goff, A, C, B, E, inv_order,
                  duration, self.rtol, self.atol, h, h_max, *extra)

    def advance(self, y, phase, duration, h, h_max=0.0):
        status, tau, h_next = self._call(_kernel.advance, y, phase,
                                         duration, h, h_max)
        self._check(status, tau)
        return h_next

    def measure_chunk(self, y, phase, duration, h, h_max):
        status, tau, h_next, lo, hi = self._call(
            _kernel.measure_chunk, y, phase, duration, h, h_max)
        self._check(status, tau)
        return h_next, (hi - lo) / 2.0

    def sample_run(self, y, phase, duration, h, h_max, n_samples):
        status, tau, h_next, samples, count = self._call(
            _kernel.sample_run, y, phase, duration, h, h_max, n_samples)
        self._check(status, tau)
        if count != n_samples:
            raise StiffnessError(
                f"dense output stalled at sample {count}/{n_samples}",
                time=tau)
        return h_next, samples

    def _check(self, status, tau):
        if status != 0:
            raise StiffnessError(
                "step size underflow: system too stiff at the requested "
                "tolerance", time=tau)


# --------------------------------------------------------- trajectories

@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution segment.

    times are absolute (s); positions/velocities are (n, 3) arrays in
    displacement coordinates; `final` is the exact integrator end
    state (last row equals it up to sampling round-off);
    `drive_omega` is the angular drive frequency used (rad/s).
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    final: State
    drive_omega: float

    def __post_init__(self):
        n = self.times.shape[0]
        if self.positions.shape != (n, 3) or self.velocities.shape != (n, 3):
            raise ValidationError("trajectory arrays must align")

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def axis_positions(self, axis: str) -> np.ndarray:
        return self.positions[:, _COL[axis]]


def integrate(model: Model3D, duration: float, state: State | None = None,
              n_samples: int | None = None, rtol: float = 1e-11,
              method: str = "rkf78") -> Trajectory:
    """Integrate for `duration` seconds from `state` (default: rest at
    the equilibrium) and return a uniformly sampled trajectory.

    The drive frequency is model.drive_omega.  Default sampling is 64
    per drive period (or per fastest natural period when undriven),
    capped at 1e6 samples.
    """
    if not (duration > 0 and math.isfinite(duration)):
        raise ValidationError("duration must be positive and finite")
    packed = _Packed(model, model.drive_omega, rtol, method)
    if state is None:
        state = initial_state(model)
    if n_samples is None:
        rates = [model.drive_omega] + [model.axes[a].omega0 for a in AXES
                                       if model.axes[a].omega0 > 0]
        t_ref = TWO_PI / max(rates) if max(rates) > 0 else duration
        n_samples = int(min(1_000_000, max(64, math.ceil(
            64.0 * duration / t_ref))))
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    y = np.concatenate([state.position, state.velocity])
    _, samples = packed.sample_run(y, state.phase, duration, packed.h0,
                                   0.0, int(n_samples))
    dt = duration / n_samples
    times = state.time + dt * np.arange(n_samples + 1)
    rows = np.vstack([np.concatenate([state.position, state.velocity]),
                      samples])
    final = State(y[:3].copy(), y[3:].copy(), state.time + duration,
                  math.remainder(state.phase + packed.omega * duration,
                                 TWO_PI))
    return Trajectory(times=times, positions=rows[:, :3],
                      velocities=rows[:, 3:], final=final,
                      drive_omega=packed.omega)


# ----------------------------------------------------- amplitude reads

@dataclass(frozen=True)
class AmplitudeEstimate:
    """Per-axis steady amplitudes (m, order x, y, z) with a convergence
    verdict: halves of the window agreeing within 1 percent."""

    amplitude: np.ndarray
    converged: bool

    def axis(self, name: str) -> float:
        return float(self.amplitude[_COL[name]])


def _hermite_bounds(p: np.ndarray, v: np.ndarray, t: np.ndarray):
    """Per-axis (lo, hi) position bounds over a sampled trajectory,
    refining interior extrema with a cubic Hermite model per interval."""
    lo = p.min(axis=0)
    hi = p.max(axis=0)
    h = np.diff(t)[:, None]
    p0, p1 = p[:-1], p[1:]
    v0, v1 = v[:-1], v[1:]
    dp = p0 - p1
    aq = 6.0 * dp + 3.0 * h * (v0 + v1)
    bq = -6.0 * dp - h * (4.0 * v0 + 2.0 * v1)
    cq = h * v0
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = bq * bq - 4.0 * aq * cq
        sqrt_disc = np.sqrt(np.where(disc >= 0.0, disc, np.nan))
        roots = [np.where(aq != 0.0, (-bq + sqrt_disc) / (2.0 * aq), np.nan),
                 np.where(aq != 0.0, (-bq - sqrt_disc) / (2.0 * aq), np.nan),
                 np.where((aq == 0.0) & (bq != 0.0), -cq / bq, np.nan)]
    for s in roots:
        valid = np.isfinite(s) & (s > 0.0) & (s < 1.0)
        if not valid.any():
            continue
        s = np.where(valid, s, 0.0)
        s2, s3 = s * s, s * s * s
        val = ((2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * h * v0
               + (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * h * v1)
        val_lo = np.where(valid, val, np.inf).min(axis=0)
        val_hi = np.where(valid, val, -np.inf).max(axis=0)
        lo = np.minimum(lo, val_lo)
        hi = np.maximum(hi, val_hi)
    return lo, hi


def _amplitudes_close(a: np.ndarray, b: np.ndarray) -> bool:
    ref = np.maximum(np.maximum(a, b), AMPLITUDE_FLOOR)
    return bool(np.all(np.abs(a - b) <= CONVERGENCE_BAND * ref))


def steady_amplitude(trajectory: Trajectory,
                     window: float | None = None) -> AmplitudeEstimate:
    """Per-axis amplitude (half the peak-to-peak excursion) over the
    trailing `window` seconds (default: the whole trajectory).

    Extrema between samples are refined with the cubic Hermite model
    built from stored positions and velocities.  The convergence flag
    compares the two halves of the window.
    """
    t = trajectory.times
    if window is not None:
        if window <= 0:
            raise ValidationError("window must be positive")
        keep = t >= t[-1] - window
        if keep.sum() < 8:
            raise ValidationError("window must cover at least 8 samples")
        t = t[keep]
    else:
        keep = slice(None)
    p = trajectory.positions[keep]
    v = trajectory.velocities[keep]
    if trajectory.drive_omega > 0:
        t_drive = TWO_PI / trajectory.drive_omega
        if t[-1] - t[0] < 20.0 * t_drive:
            raise ValidationError(
                "amplitude window must span at least 20 drive periods")
    if t.shape[0] < 8:
        raise ValidationError("need at least 8 samples")
    lo, hi = _hermite_bounds(p, v, t)
    mid = t.shape[0] // 2
    lo1, hi1 = _hermite_bounds(p[:mid + 1], v[:mid + 1], t[:mid + 1])
    lo2, hi2 = _hermite_bounds(p[mid:], v[mid:], t[mid:])
    converged = _amplitudes_close((hi1 - lo1) / 2.0, (hi2 - lo2) / 2.0)
    return AmplitudeEstimate(amplitude=(hi - lo) / 2.0, converged=converged)


# --------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepProtocol:
    """Stepped-frequency scan description.

    Frequencies in Hz; direction "positive" scans upward from
    start_hz, "negative" downward.  Settle and measure windows are in
    seconds and must each cover at least 50 drive periods at every
    frequency in the scan.  reset_each_step restarts every frequency
    from rest instead of carrying the state (hysteresis needs the
    carried state, so the default keeps it).
    """

    start_hz: float
    end_hz: float
    step_hz: float
    settle_time: float
    measure_time: float
    direction: str = "positive"
    reset_each_step: bool = False

    def __post_init__(self):
        if self.direction not in ("positive", "negative"):
            raise ValidationError(
                "direction must be 'positive' or 'negative'")
        if not (self.step_hz > 0):
            raise ValidationError("step_hz must be positive")
        if min(self.start_hz, self.end_hz) <= 0:
            raise ValidationError("scan frequencies must be positive")
        span = self.end_hz - self.start_hz
        if self.direction == "positive" and span < 0:
            raise ValidationError("positive scan needs end_hz >= start_hz")
        if self.direction == "negative" and span > 0:
            raise ValidationError("negative scan needs end_hz <= start_hz")
        t_max = 1.0 / min(self.start_hz, self.end_hz)
        for name in ("settle_time", "measure_time"):
            value = getattr(self, name)
            if value < 50.0 * t_max:
                raise ValidationError(
                    f"{name} must cover at least 50 drive periods "
                    f"({50.0 * t_max:.3e} s at {1.0 / t_max:.6g} Hz)")

    def frequencies(self) -> np.ndarray:
        n = int(round(abs(self.end_hz - self.start_hz) / self.step_hz)) + 1
        sign = 1.0 if self.direction == "positive" else -1.0
        return self.start_hz + sign * self.step_hz * np.arange(n)


@dataclass(frozen=True)
class SweepRecord:
    """One settled frequency step: drive frequency, detuning from the
    driven axis, per-axis steady amplitudes, and whether consecutive
    amplitude chunks agreed before the time cap."""

    freq_hz: float
    sigma_hz: float
    amplitude: np.ndarray = field(repr=False)
    converged: bool = True

    @property
    def a_x(self) -> float:
        return float(self.amplitude[0])

    @property
    def a_y(self) -> float:
        return float(self.amplitude[1])

    @property
    def a_z(self) -> float:
        return float(self.amplitude[2])

    def axis(self, name: str) -> float:
        return float(self.amplitude[_COL[name]])


def sweep(model: Model3D, protocol: SweepProtocol,
          state: State | None = None, rtol: float = 1e-11,
          method: str = "rkf78") -> list[SweepRecord]:
    """Stepped-frequency response scan with carried state.

    Each step settles for protocol.settle_time at the new frequency,
    then measures amplitude in chunks of 25 drive periods until two
    consecutive chunks agree within 1 percent (at least the full
    measure_time, at most 20 settle times; past the cap the record is
    flagged unconverged).  The mechanical state and accumulated drive
    phase carry across steps, so fold crossings replay the lab
    hysteresis protocol.  Integration failure raises SweepAborted
    carrying the finished records.
    """
    if model.drive_k == 0.0:
        raise ValidationError("sweep needs a driven model (drive_k != 0)")
    f0_hz = model.driven.omega0 / TWO_PI
    if state is None:
        state = initial_state(model)
    records: list[SweepRecord] = []
    y = np.concatenate([state.position, state.velocity])
    phase = state.phase
    h = None
    for f in protocol.frequencies():
        omega = TWO_PI * float(f)
        packed = _Packed(model, omega, rtol, method)
        if h is None or protocol.reset_each_step:
            h = packed.h0
        if protocol.reset_each_step:
            y = np.concatenate([state.position, state.velocity])
            phase = state.phase
        t_drive = TWO_PI / omega
        chunk = CHUNK_PERIODS * t_drive
        n_chunks_min = max(2, math.ceil(
            protocol.measure_time / chunk - 1e-9))
        cap = max(20.0 * protocol.settle_time, n_chunks_min * chunk)
        h_meas = t_drive / 64.0
        try:
            h = packed.advance(y, phase, protocol.settle_time, h)
            phase = math.remainder(phase + omega * protocol.settle_time,
                                   TWO_PI)
            amp_prev = None
            amp = np.zeros(3)
            converged = False
            elapsed = 0.0
            done = 0
            while True:
                h, amp = packed.measure_chunk(y, phase, chunk,
                                              min(h, h_meas), h_meas)
                phase = math.remainder(phase + omega * chunk, TWO_PI)
                elapsed += chunk
                done += 1
                if (done >= n_chunks_min and amp_prev is not None
                        and _amplitudes_close(amp, amp_prev)):
                    converged = True
                    break
                if elapsed >= cap:
                    break
                amp_prev = amp
        except StiffnessError as exc:
            raise SweepAborted("sweep step failed to integrate",
                               records=records, freq_hz=float(f),
                               cause=exc) from exc
        records.append(SweepRecord(freq_hz=float(f),
                                   sigma_hz=float(f) - f0_hz,
                                   amplitude=amp, converged=converged))
    return records


# --------------------------------------------------------------- images

@dataclass(frozen=True)
class TrajectoryImage:
    """2D occupancy histogram of a trajectory projection.

    counts[i, j] bins abscissa edge pair (h_edges[i:i+2]) against
    ordinate pair (v_edges[j:j+2]); every sample lands in exactly one
    bin, so counts.sum() equals the number of samples."""

    plane: str
    counts: np.ndarray
    h_edges: np.ndarray
    v_edges: np.ndarray

    @property
    def n_samples(self) -> int:
        return int(self.counts.sum())

    def extent(self):
        """(abscissa span, ordinate span) of the occupied region."""
        return (float(self.h_edges[-1] - self.h_edges[0]),
                float(self.v_edges[-1] - self.v_edges[0]))


def trajectory_image(trajectory: Trajectory, plane: str = "xz",
                     bins: int = 64) -> TrajectoryImage:
    """Histogram the trajectory onto a coordinate plane ("xy", "xz" or
    "yz", abscissa listed first).  Bin edges hug the data exactly, with
    a degenerate axis padded to a single occupied bin."""
    if plane not in _PLANES:
        raise ValidationError(f"plane must be one of {sorted(_PLANES)}")
    if not (isinstance(bins, int) and bins >= 1):
        raise ValidationError("bins must be a positive integer")
    ih, iv = _PLANES[plane]
    hdat = trajectory.positions[:, ih]
    vdat = trajectory.positions[:, iv]
    ranges = []
    for d in (hdat, vdat):
        lo, hi = float(d.min()), float(d.max())
        if lo == hi:
            pad = max(1e-12, abs(lo) * 1e-9)
            lo, hi = lo - pad, hi + pad
        ranges.append((lo, hi))
    counts, h_edges, v_edges = np.histogram2d(hdat, vdat, bins=bins,
                                              range=ranges)
    return TrajectoryImage(plane=plane, counts=counts.astype(np.int64),
                           h_edges=h_edges, v_edges=v_edges)
