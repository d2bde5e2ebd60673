"""Compiled integration kernels.

Adaptive explicit Runge-Kutta integration of the coupled secular
equations of motion.  State vector y = (x, y, z, vx, vy, vz) in
displacement coordinates about the model equilibrium.  The force is
the packed gradient of the per-mass quartic potential plus per-axis
viscous damping and a single-axis cosine drive.

Time inside a kernel call is the segment-local tau starting at 0; the
caller carries the accumulated drive phase phi0 across segments, so
the instantaneous drive is k * cos(phi0 + omega * tau) and long runs
never evaluate trigonometry at large absolute arguments.

Step control: scale_i = atol_i + rtol * max(|y_i|, |y_new_i|),
err_norm = rms(err_i / scale_i), accept when err_norm <= 1, then
h *= clip(0.9 * err_norm**(-1/order), 0.2, 5).  A step size driven
below duration * 1e-15 reports stiffness (status 1) with the failing
segment time.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# ------------------------------------------------------------ tableaus

# Fehlberg 7(8), 13 stages; the 8th-order solution is propagated and
# the embedded difference (41/840)(k1 + k11 - k12 - k13) h estimates
# the local error.
_C78 = np.array([0.0, 2 / 27, 1 / 9, 1 / 6, 5 / 12, 1 / 2, 5 / 6, 1 / 6,
                 2 / 3, 1 / 3, 1.0, 0.0, 1.0])
_A78 = np.zeros((13, 13))
_A78[1, 0] = 2 / 27
_A78[2, :2] = (1 / 36, 1 / 12)
_A78[3, :3] = (1 / 24, 0.0, 1 / 8)
_A78[4, :4] = (5 / 12, 0.0, -25 / 16, 25 / 16)
_A78[5, :5] = (1 / 20, 0.0, 0.0, 1 / 4, 1 / 5)
_A78[6, :6] = (-25 / 108, 0.0, 0.0, 125 / 108, -65 / 27, 125 / 54)
_A78[7, :7] = (31 / 300, 0.0, 0.0, 0.0, 61 / 225, -2 / 9, 13 / 900)
_A78[8, :8] = (2.0, 0.0, 0.0, -53 / 6, 704 / 45, -107 / 9, 67 / 90, 3.0)
_A78[9, :9] = (-91 / 108, 0.0, 0.0, 23 / 108, -976 / 135, 311 / 54,
               -19 / 60, 17 / 6, -1 / 12)
_A78[10, :10] = (2383 / 4100, 0.0, 0.0, -341 / 164, 4496 / 1025, -301 / 82,
                 2133 / 4100, 45 / 82, 45 / 164, 18 / 41)
_A78[11, :11] = (3 / 205, 0.0, 0.0, 0.0, 0.0, -6 / 41, -3 / 205, -3 / 41,
                 3 / 41, 6 / 41, 0.0)
_A78[12, :12] = (-1777 / 4100, 0.0, 0.0, -341 / 164, 4496 / 1025, -289 / 82,
                 2193 / 4100, 51 / 82, 33 / 164, 12 / 41, 0.0, 1.0)
_B78 = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 34 / 105, 9 / 35, 9 / 35, 9 / 280,
                 9 / 280, 0.0, 41 / 840, 41 / 840])
_E78 = np.zeros(13)
_E78[0] = _E78[10] = 41 / 840
_E78[11] = _E78[12] = -41 / 840
_INV_ORDER_78 = 1.0 / 8.0

# Dormand-Prince 5(4), 7 stages; 5th-order solution propagated.
_C54 = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A54 = np.zeros((7, 7))
_A54[1, 0] = 1 / 5
_A54[2, :2] = (3 / 40, 9 / 40)
_A54[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_A54[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A54[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_A54[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_B54 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784,
                 11 / 84, 0.0])
_E54 = _B54 - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                        -92097 / 339200, 187 / 2100, 1 / 40])
_INV_ORDER_54 = 1.0 / 5.0

METHODS = {"rkf78": (_A78, _C78, _B78, _E78, _INV_ORDER_78),
           "dp54": (_A54, _C54, _B54, _E54, _INV_ORDER_54)}

_STATUS_OK = 0
_STATUS_STIFF = 1


@njit(cache=True)
def _derivs(y, tau, phi0, omega, k_drive, drive_idx, mu,
            gcoef, gexp, goff, out):
    # per-variable power tables up to cubic (gradient of a quartic)
    pw = np.empty((3, 4))
    for v in range(3):
        pw[v, 0] = 1.0
        pw[v, 1] = y[v]
        pw[v, 2] = y[v] * y[v]
        pw[v, 3] = pw[v, 2] * y[v]
    for a in range(3):
        acc = 0.0
        for n in range(goff[a], goff[a + 1]):
            acc += (gcoef[n] * pw[0, gexp[n, 0]] * pw[1, gexp[n, 1]]
                    * pw[2, gexp[n, 2]])
        out[a] = y[3 + a]
        out[3 + a] = -acc - 2.0 * mu[a] * y[3 + a]
    if k_drive != 0.0:
        out[3 + drive_idx] += k_drive * np.cos(phi0 + omega * tau)


@njit(cache=True)
def _try_step(y, tau, h, phi0, omega, k_drive, drive_idx, mu,
              gcoef, gexp, goff, A, C, B, E,
              rtol, atol, K, y_new, err_stage):
    s = B.shape[0]
    for i in range(s):
        for c in range(6):
            acc = 0.0
            for j in range(i):
                acc += A[i, j] * K[j, c]
            err_stage[c] = y[c] + h * acc
        _derivs(err_stage, tau + C[i] * h, phi0, omega, k_drive, drive_idx,
                mu, gcoef, gexp, goff, K[i])
    err_norm_sq = 0.0
    for c in range(6):
        acc = 0.0
        eacc = 0.0
        for i in range(s):
            acc += B[i] * K[i, c]
            eacc += E[i] * K[i, c]
        y_new[c] = y[c] + h * acc
        scale = atol[c] + rtol * max(abs(y[c]), abs(y_new[c]))
        e = h * eacc / scale
        err_norm_sq += e * e
    return np.sqrt(err_norm_sq / 6.0)


@njit(cache=True)
def _refine_extrema(p0, v0, p1, v1, h, lo, hi):
    """Cubic-Hermite extrema of one coordinate inside a step; returns
    updated (lo, hi) including the endpoint p1."""
    if p1 < lo:
        lo = p1
    if p1 > hi:
        hi = p1
    # H'(s)/h = aq s^2 + bq s + cq on s in [0, 1]
    dp = p0 - p1
    aq = 6.0 * dp + 3.0 * h * (v0 + v1)
    bq = -6.0 * dp - h * (4.0 * v0 + 2.0 * v1)
    cq = h * v0
    for root in range(2):
        if aq == 0.0:
            if bq == 0.0:
                break
            s = -cq / bq
            if root == 1:
                break
        else:
            disc = bq * bq - 4.0 * aq * cq
            if disc < 0.0:
                break
            sq = np.sqrt(disc)
            s = (-bq + sq) / (2.0 * aq) if root == 0 else \
                (-bq - sq) / (2.0 * aq)
        if 0.0 < s < 1.0:
            s2 = s * s
            s3 = s2 * s
            val = ((2.0 * s3 - 3.0 * s2 + 1.0) * p0
                   + (s3 - 2.0 * s2 + s) * h * v0
                   + (-2.0 * s3 + 3.0 * s2) * p1
                   + (s3 - s2) * h * v1)
            if val < lo:
                lo = val
            if val > hi:
                hi = val
    return lo, hi


@njit(cache=True)
def _run_segment(y, phi0, omega, k_drive, drive_idx, mu,
                 gcoef, gexp, goff, A, C, B, E, inv_order,
                 duration, rtol, atol, h_init, h_max,
                 track_extrema, lo, hi,
                 sample_dt, samples, n_samples):
    """Advance y over [0, duration].

    track_extrema: update lo/hi (3,) per-axis position bounds with
    Hermite-refined extrema.  n_samples > 0: store (pos, vel) rows in
    samples at times (i+1)*sample_dt, stepping exactly onto each
    sample time.  Returns (status, tau_reached, h_next, sample_count).
    """
    stages = B.shape[0]
    K = np.empty((stages, 6))
    y_new = np.empty(6)
    scratch = np.empty(6)
    tau = 0.0
    h = h_init
    if h > duration:
        h = duration
    if h_max > 0.0 and h > h_max:
        h = h_max
    h_floor = duration * 1e-15
    s_idx = 0
    if track_extrema:
        for a in range(3):
            if y[a] < lo[a]:
                lo[a] = y[a]
            if y[a] > hi[a]:
                hi[a] = y[a]
    while tau < duration:
        target = duration
        if n_samples > 0 and s_idx < n_samples:
            t_next = (s_idx + 1) * sample_dt
            if t_next < target:
                target = t_next
        # clamp the controller step to the cap and the next output time;
        # a clamp is not an accuracy signal, so only unclamped accepted
        # steps update the controller
        h_try = h
        if h_max > 0.0 and h_try > h_max:
            h_try = h_max
        clamped = True
        if tau + h_try >= target:
            h_try = target - tau
        elif h_try == h:
            clamped = False
        if tau + h_try == tau:
            return _STATUS_STIFF, tau, h, s_idx
        err = _try_step(y, tau, h_try, phi0, omega, k_drive, drive_idx, mu,
                        gcoef, gexp, goff, A, C, B, E, rtol, atol,
                        K, y_new, scratch)
        if np.isnan(err):
            # runaway solution: force a rejection with a hard shrink
            err = 1e16
        if err == 0.0:
            factor = 5.0
        else:
            factor = 0.9 * err ** (-inv_order)
            if factor < 0.2:
                factor = 0.2
            elif factor > 5.0:
                factor = 5.0
        if err <= 1.0:
            if track_extrema:
                for a in range(3):
                    lo[a], hi[a] = _refine_extrema(
                        y[a], y[3 + a], y_new[a], y_new[3 + a], h_try,
                        lo[a], hi[a])
            tau += h_try
            for c in range(6):
                y[c] = y_new[c]
            if n_samples > 0 and s_idx < n_samples:
                if tau >= (s_idx + 1) * sample_dt - 1e-9 * sample_dt:
                    for c in range(6):
                        samples[s_idx, c] = y[c]
                    s_idx += 1
            if not clamped:
                h = h_try * factor
        else:
            h = h_try * factor
            if h < h_floor:
                return _STATUS_STIFF, tau, h, s_idx
    return _STATUS_OK, tau, h, s_idx


@njit(cache=True)
def advance(y, phi0, omega, k_drive, drive_idx, mu, gcoef, gexp, goff,
            A, C, B, E, inv_order, duration, rtol, atol, h_init, h_max):
    """Settle-style segment: no output, returns
    (status, tau_reached, h_next)."""
    lo = np.zeros(3)
    hi = np.zeros(3)
    samples = np.empty((0, 6))
    status, tau, h, _ = _run_segment(
        y, phi0, omega, k_drive, drive_idx, mu, gcoef, gexp, goff,
        A, C, B, E, inv_order, duration, rtol, atol, h_init, h_max,
        False, lo, hi, 0.0, samples, 0)
    return status, tau, h


@njit(cache=True)
def measure_chunk(y, phi0, omega, k_drive, drive_idx, mu, gcoef, gexp, goff,
                  A, C, B, E, inv_order, duration, rtol, atol,
                  h_init, h_max):
    """Measurement segment: returns (status, tau_reached, h_next,
    lo, hi) with per-axis Hermite-refined position bounds."""
    lo = np.empty(3)
    hi = np.empty(3)
    for a in range(3):
        lo[a] = y[a]
        hi[a] = y[a]
    samples = np.empty((0, 6))
    status, tau, h, _ = _run_segment(
        y, phi0, omega, k_drive, drive_idx, mu, gcoef, gexp, goff,
        A, C, B, E, inv_order, duration, rtol, atol, h_init, h_max,
        True, lo, hi, 0.0, samples, 0)
    return status, tau, h, lo, hi


@njit(cache=True)
def sample_run(y, phi0, omega, k_drive, drive_idx, mu, gcoef, gexp, goff,
               A, C, B, E, inv_order, duration, rtol, atol,
               h_init, h_max, n_samples):
    """Dense-output segment: n_samples states at uniform spacing
    duration/n_samples (end-inclusive).  Returns (status, tau_reached,
    h_next, samples, count)."""
    lo = np.zeros(3)
    hi = np.zeros(3)
    samples = np.empty((n_samples, 6))
    sample_dt = duration / n_samples
    status, tau, h, count = _run_segment(
        y, phi0, omega, k_drive, drive_idx, mu, gcoef, gexp, goff,
        A, C, B, E, inv_order, duration, rtol, atol, h_init, h_max,
        False, lo, hi, sample_dt, samples, n_samples)
    return status, tau, h, samples, count
