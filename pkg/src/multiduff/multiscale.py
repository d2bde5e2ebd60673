"""Closed-form steady-state response of the driven cubic oscillator.

Everything here works on the slow envelope: with drive detuning
sigma = omega_drive - omega0 and polar envelope (a, gamma), the slow
flow is

    da/dT2    = k sin(gamma) / (2 omega0) - a mu
    dgamma/dT2 = sigma - N(a) + k cos(gamma) / (2 a omega0)

with the backbone N(a) = 3 alpha_eff(a) a^2 / (8 omega0).  Fixed
points satisfy the implicit response relation

    omega0^2 a^2 [ (N(a) - sigma)^2 + mu^2 ] = k^2 / 4,

a cubic in A = a^2.  Three coupling modes feed alpha_eff:

  uncoupled  alpha_p = alpha3 - 10 alpha2^2 / (9 omega0^2)
  lumped     alpha_p plus a constant coupling shift applied only at
             detunings at or below a window edge
  explicit   alpha_p plus fixed transverse amplitudes b, c entering
             as a constant backbone offset q_c (their alpha
             contribution scales as 1/a^2, so alpha_eff(a) a^2 stays
             polynomial in A)

All detunings and rates are angular (rad/s, 1/s); amplitudes are in m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import AxisCoefficients
from .errors import ValidationError, ZeroAmplitudeError

TWO_PI = 2.0 * math.pi
DEFAULT_WINDOW_EDGE = TWO_PI * 250.0

MODES = ("uncoupled", "lumped", "explicit")

# relative slack for treating a nearly repeated cubic root as real and
# for flagging a marginal (fold-adjacent) stability verdict
REAL_ROOT_BAND = 1e-8
MARGINAL_BAND = 1e-9


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class ResponseInputs:
    """Driven-axis coefficients plus one coupling description.

    Exactly one mode is active: "uncoupled" ignores the transverse
    axes, "lumped" adds `lumped` (1/(m^2 s^2)) to the effective cubic
    coefficient for sigma <= window_edge, "explicit" uses fixed
    transverse amplitudes b (eta axis) and c (zeta axis) in m.
    """

    coeffs: AxisCoefficients
    mode: str = "uncoupled"
    b: float = 0.0
    c: float = 0.0
    lumped: float = 0.0
    window_edge: float = DEFAULT_WINDOW_EDGE

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}")
        for name in ("b", "c", "lumped", "window_edge"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.b < 0 or self.c < 0:
            raise ValidationError("transverse amplitudes must be >= 0")
        if self.mode != "lumped" and self.lumped != 0.0:
            raise ValidationError(
                "lumped value requires mode='lumped'")
        if self.mode != "explicit" and (self.b != 0.0 or self.c != 0.0):
            raise ValidationError(
                "transverse amplitudes require mode='explicit'")
        if self.mode == "explicit":
            # the coupling factors divide by the partner frequencies
            _coupling_factors(self.coeffs)

    @classmethod
    def uncoupled(cls, coeffs: AxisCoefficients) -> "ResponseInputs":
        return cls(coeffs=coeffs)

    @classmethod
    def with_lumped(cls, coeffs: AxisCoefficients, value: float,
                    window_edge: float = DEFAULT_WINDOW_EDGE
                    ) -> "ResponseInputs":
        return cls(coeffs=coeffs, mode="lumped", lumped=value,
                   window_edge=window_edge)

    @classmethod
    def with_amplitudes(cls, coeffs: AxisCoefficients, b: float = 0.0,
                        c: float = 0.0) -> "ResponseInputs":
        return cls(coeffs=coeffs, mode="explicit", b=b, c=c)


@dataclass(frozen=True)
class ResponsePoint:
    """One steady-state solution: detuning sigma (rad/s), amplitude a
    (m), branch id counting roots at this sigma from the smallest
    amplitude up, linearized stability, and a marginal flag raised
    when the verdict sits numerically on a fold."""

    sigma: float
    a: float
    branch: int
    stable: bool
    marginal: bool = False

    def __post_init__(self):
        if not (self.a > 0):
            raise ValidationError("amplitude must be positive")


@dataclass(frozen=True)
class SlowFlowState:
    """Envelope state: amplitude a >= 0 (m) and phase gamma (rad)."""

    a: float
    gamma: float

    def __post_init__(self):
        if self.a < 0 or not math.isfinite(self.a):
            raise ValidationError("amplitude must be finite and >= 0")
        if not math.isfinite(self.gamma):
            raise ValidationError("phase must be finite")


# --------------------------------------------------- effective nonlinearity

def _coupling_factors(c: AxisCoefficients):
    """(X, Y): per-(c/a)^2 and per-(b/a)^2 additions to alpha_total.

    X couples through the zeta chain (alpha5, alpha8, alpha2x at
    omega0x), Y through the eta chain (alpha4, alpha7, alpha2y at
    omega0y).  A vanishing partner frequency is only an error when the
    matching product is nonzero."""
    x = 2.0 * c.alpha5 / 3.0
    if c.alpha8 * c.alpha2x != 0.0:
        if c.omega0x <= 0.0:
            raise ValidationError(
                "alpha8*alpha2x coupling needs omega0x > 0")
        x -= 2.0 * c.alpha8 * c.alpha2x / (3.0 * c.omega0x**2)
    y = 2.0 * c.alpha4 / 3.0
    if c.alpha7 * c.alpha2y != 0.0:
        if c.omega0y <= 0.0:
            raise ValidationError(
                "alpha7*alpha2y coupling needs omega0y > 0")
        y -= 2.0 * c.alpha7 * c.alpha2y / (3.0 * c.omega0y**2)
    return x, y


def alpha_uncoupled(coeffs: AxisCoefficients) -> float:
    """Effective cubic coefficient of the isolated axis: the bare cubic
    term corrected by the second-order effect of the quadratic term."""
    return coeffs.alpha3 - 10.0 * coeffs.alpha2**2 / (9.0 * coeffs.omega0**2)


def alpha_total(coeffs: AxisCoefficients, b_over_a: float = 0.0,
                c_over_a: float = 0.0) -> float:
    """Effective cubic coefficient including transverse feeding at
    fixed amplitude ratios b/a and c/a."""
    if not (math.isfinite(b_over_a) and math.isfinite(c_over_a)):
        raise ValidationError("amplitude ratios must be finite")
    out = alpha_uncoupled(coeffs)
    if b_over_a != 0.0 or c_over_a != 0.0:
        x, y = _coupling_factors(coeffs)
        out += x * c_over_a**2 + y * b_over_a**2
    return out


def _pq(inputs: ResponseInputs, in_window: bool):
    """Backbone decomposition N(a) = p*a^2 + q_c for one window side.

    p carries every amplitude-dependent contribution (the lumped
    coupling is amplitude-independent in alpha but quadratic in the
    backbone, so it lives in p); q_c is the constant offset from
    explicit transverse amplitudes."""
    c = inputs.coeffs
    alpha_p = alpha_uncoupled(c)
    if inputs.mode == "lumped" and in_window:
        alpha_p += inputs.lumped
    p = 3.0 * alpha_p / (8.0 * c.omega0)
    q_c = 0.0
    if inputs.mode == "explicit" and (inputs.b != 0.0 or inputs.c != 0.0):
        x, y = _coupling_factors(c)
        q_c = 3.0 * (x * inputs.c**2 + y * inputs.b**2) / (8.0 * c.omega0)
    return p, q_c


def _window_sides(inputs: ResponseInputs, sigma: float):
    """The (p, q_c) set that applies at this detuning."""
    if inputs.mode == "lumped":
        return _pq(inputs, sigma <= inputs.window_edge)
    return _pq(inputs, False)


def backbone(inputs: ResponseInputs, a: float) -> float:
    """Detuning of the response peak at amplitude a: N(a) = p a^2 + q_c.

    In lumped mode the window side is resolved self-consistently
    against the resulting detuning; inside the hysteretic sliver where
    both sides are consistent, the in-window value is returned."""
    if not (a > 0):
        raise ValidationError("amplitude must be positive")
    if isinstance(inputs, AxisCoefficients):
        inputs = ResponseInputs.uncoupled(inputs)
    A = a * a
    if inputs.mode == "lumped":
        p_in, q_in = _pq(inputs, True)
        n_in = p_in * A + q_in
        if n_in <= inputs.window_edge:
            return n_in
        p_out, q_out = _pq(inputs, False)
        return p_out * A + q_out
    p, q_c = _pq(inputs, False)
    return p * A + q_c


def peak_amplitude(k: float, mu: float, omega0: float) -> float:
    """Largest reachable steady amplitude, at the backbone detuning."""
    if min(k, mu, omega0) <= 0:
        raise ValidationError("k, mu, omega0 must all be positive")
    return k / (2.0 * mu * omega0)


def alpha_from_peak(a_m: float, sigma_m: float, omega0: float) -> float:
    """Invert the backbone at the peak: alpha = 8 omega0 sigma_m /
    (3 a_m^2).  Sign of sigma_m carries the hardening/softening sign."""
    if not (a_m > 0 and omega0 > 0):
        raise ValidationError("a_m and omega0 must be positive")
    return 8.0 * omega0 * sigma_m / (3.0 * a_m**2)


# ------------------------------------------------------------ root finding

def _cubic_coeffs(inputs: ResponseInputs, sigma: float, in_window: bool):
    """Coefficients of the response cubic in A = a^2:
    w0^2 [p^2 A^3 + 2 p q A^2 + (q^2 + mu^2) A] - k^2/4 = 0,
    with q = q_c - sigma."""
    c = inputs.coeffs
    p, q_c = _pq(inputs, in_window)
    q = q_c - sigma
    w2 = c.omega0**2
    return (w2 * p * p, 2.0 * w2 * p * q, w2 * (q * q + c.mu**2),
            -0.25 * c.k**2)


def _polish(coeffs, x):
    c3, c2, c1, c0 = coeffs
    for _ in range(3):
        f = ((c3 * x + c2) * x + c1) * x + c0
        df = (3.0 * c3 * x + 2.0 * c2) * x + c1
        if df == 0.0:
            break
        step = f / df
        x -= step
        if abs(step) <= 1e-16 * abs(x):
            break
    return x


def _cubic_real_roots(c3, c2, c1, c0):
    """Real roots of a real cubic, closed form, Newton-polished.

    A complex pair with |Im| below REAL_ROOT_BAND * |Re| collapses to
    one (near-double) real root."""
    if c3 == 0.0:
        if c2 == 0.0:
            if c1 == 0.0:
                return []
            return [-c0 / c1]
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc < 0.0:
            return []
        s = math.sqrt(disc)
        return sorted([(-c1 - s) / (2.0 * c2), (-c1 + s) / (2.0 * c2)])
    # depressed form t^3 + pt + q with A = t - c2/(3 c3)
    shift = c2 / (3.0 * c3)
    p = c1 / c3 - 3.0 * shift * shift
    q = 2.0 * shift**3 - shift * c1 / c3 + c0 / c3
    quarter = q * q / 4.0 + p**3 / 27.0
    roots = []
    if quarter <= 0.0:
        # three real roots (trig form); quarter == 0 gives repeats
        m = 2.0 * math.sqrt(max(-p / 3.0, 0.0))
        if m == 0.0:
            roots = [0.0, 0.0, 0.0]
        else:
            arg = min(1.0, max(-1.0, 3.0 * q / (p * m)))
            theta = math.acos(arg) / 3.0
            roots = [m * math.cos(theta - TWO_PI * j / 3.0)
                     for j in range(3)]
    else:
        s = math.sqrt(quarter)
        u = math.copysign(abs(-q / 2.0 + s) ** (1.0 / 3.0), -q / 2.0 + s)
        v = 0.0 if u == 0.0 else -p / (3.0 * u)
        roots = [u + v]
        # complex pair -(u+v)/2 +- i sqrt(3)/2 (u-v)
        re = -(u + v) / 2.0
        im = math.sqrt(3.0) / 2.0 * abs(u - v)
        if im < REAL_ROOT_BAND * abs(re):
            roots.append(re)
    return sorted(_polish((c3, c2, c1, c0), t - shift) for t in roots)


def response_amplitudes(sigma: float, inputs: ResponseInputs
                        ) -> list[ResponsePoint]:
    """All positive steady-state amplitudes at detuning sigma, sorted
    ascending, with branch ids and linearized stability."""
    if isinstance(inputs, AxisCoefficients):
        inputs = ResponseInputs.uncoupled(inputs)
    in_window = inputs.mode == "lumped" and sigma <= inputs.window_edge
    coeffs = _cubic_coeffs(inputs, sigma, in_window)
    amps = [math.sqrt(A) for A in _cubic_real_roots(*coeffs) if A > 0.0]
    points = []
    for i, a in enumerate(amps):
        stable, marginal = stability(a, sigma, inputs)
        points.append(ResponsePoint(sigma=sigma, a=a, branch=i,
                                    stable=stable, marginal=marginal))
    return points


def response_curve(inputs: ResponseInputs, sigmas) -> list[ResponsePoint]:
    """response_amplitudes over a detuning grid, concatenated."""
    out = []
    for s in np.asarray(sigmas, dtype=float):
        out.extend(response_amplitudes(float(s), inputs))
    return out


def steady_detuning(a: float, inputs: ResponseInputs):
    """The two detunings at which amplitude a is a steady state:
    sigma = N(a) +- sqrt(k^2/(4 w0^2 a^2) - mu^2).

    Returns None when a exceeds the reachable peak (negative
    radicand).  In lumped mode each branch is kept only if it lands on
    the window side it was computed with; an inconsistent branch is
    returned as None inside the tuple."""
    if isinstance(inputs, AxisCoefficients):
        inputs = ResponseInputs.uncoupled(inputs)
    if not (a > 0):
        raise ValidationError("amplitude must be positive")
    c = inputs.coeffs
    forcing = (c.k / (2.0 * c.omega0 * a))**2
    rad = forcing - c.mu**2
    if rad < 0.0:
        # exact-peak queries can round a hair negative
        if rad > -1e-12 * forcing:
            rad = 0.0
        else:
            return None
    root = math.sqrt(rad)
    if inputs.mode != "lumped":
        p, q_c = _pq(inputs, False)
        n = p * a * a + q_c
        return (n + root, n - root)
    out = []
    for sign in (+1.0, -1.0):
        chosen = None
        for in_window in (True, False):
            p, q_c = _pq(inputs, in_window)
            sigma = p * a * a + q_c + sign * root
            if (sigma <= inputs.window_edge) == in_window:
                chosen = sigma
                break
        out.append(chosen)
    return tuple(out)


# ------------------------------------------------------- slow flow, stability

def slow_flow(state: SlowFlowState, inputs: ResponseInputs, sigma: float):
    """(da/dT2, dgamma/dT2) of the envelope equations at this state."""
    if isinstance(inputs, AxisCoefficients):
        inputs = ResponseInputs.uncoupled(inputs)
    c = inputs.coeffs
    a, gamma = state.a, state.gamma
    if a == 0.0:
        if c.k != 0.0:
            raise ZeroAmplitudeError(
                "phase is undefined at zero amplitude under drive")
        p, q_c = _window_sides(inputs, sigma)
        return (0.0, sigma - q_c)
    p, q_c = _window_sides(inputs, sigma)
    n = p * a * a + q_c
    f1 = c.k * math.sin(gamma) / (2.0 * c.omega0) - a * c.mu
    f2 = sigma - n + c.k * math.cos(gamma) / (2.0 * a * c.omega0)
    return (f1, f2)


def fixed_point_phase(a: float, sigma: float,
                      inputs: ResponseInputs) -> float:
    """Envelope phase gamma at the steady state (a, sigma)."""
    if isinstance(inputs, AxisCoefficients):
        inputs = ResponseInputs.uncoupled(inputs)
    c = inputs.coeffs
    if c.k == 0.0:
        raise ValidationError("phase needs a nonzero drive")
    if not (a > 0):
        raise ValidationError("amplitude must be positive")
    p, q_c = _window_sides(inputs, sigma)
    n = p * a * a + q_c
    gamma = math.atan2(c.mu, n - sigma)
    return gamma if c.k > 0 else math.remainder(gamma + math.pi, TWO_PI)


def stability(a: float, sigma: float, inputs: ResponseInputs):
    """(stable, marginal) from the slow-flow Jacobian at the fixed
    point: trace -2 mu, determinant mu^2 + 2 p A (N - sigma) +
    (N - sigma)^2 with A = a^2.  Stable iff the determinant is
    positive (damping makes the trace negative); |det| within
    MARGINAL_BAND of its natural scale flags a marginal point."""
    if isinstance(inputs, AxisCoefficients):
        inputs = ResponseInputs.uncoupled(inputs)
    if not (a > 0):
        raise ValidationError("amplitude must be positive")
    c = inputs.coeffs
    p, q_c = _window_sides(inputs, sigma)
    A = a * a
    dn = p * A + q_c - sigma
    det = c.mu**2 + 2.0 * p * A * dn + dn * dn
    scale = c.mu**2 + 2.0 * abs(p) * A * abs(dn) + dn * dn
    marginal = abs(det) <= MARGINAL_BAND * max(scale, 1e-300)
    return (det > 0.0, marginal)


def slow_flow_orbit(state: SlowFlowState, inputs: ResponseInputs,
                    sigma: float, duration: float,
                    n_steps: int = 2000) -> SlowFlowState:
    """Forward-integrate the slow flow (classic RK4, fixed step) and
    return the end state.  The envelope relaxes on the 1/mu scale."""
    if duration <= 0 or n_steps < 1:
        raise ValidationError("need positive duration and steps")
    h = duration / n_steps
    a, g = state.a, state.gamma

    def f(av, gv):
        return slow_flow(SlowFlowState(max(av, 0.0), gv), inputs, sigma)

    for _ in range(n_steps):
        k1 = f(a, g)
        k2 = f(a + 0.5 * h * k1[0], g + 0.5 * h * k1[1])
        k3 = f(a + 0.5 * h * k2[0], g + 0.5 * h * k2[1])
        k4 = f(a + h * k3[0], g + h * k3[1])
        a += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        g += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        a = max(a, 0.0)
    return SlowFlowState(a, g)


# ------------------------------------------------------------------ folds

def _discriminant(inputs: ResponseInputs, sigma: float,
                  in_window: bool) -> float:
    c3, c2, c1, c0 = _cubic_coeffs(inputs, sigma, in_window)
    scale = max(abs(c3), abs(c2), abs(c1), abs(c0))
    if scale == 0.0:
        return 0.0
    c3, c2, c1, c0 = (v / scale for v in (c3, c2, c1, c0))
    return (18.0 * c3 * c2 * c1 * c0 - 4.0 * c2**3 * c0
            + c2**2 * c1**2 - 4.0 * c3 * c1**3 - 27.0 * c3**2 * c0**2)


def fold_points(inputs: ResponseInputs, span: float | None = None,
                grid: int = 4000) -> list[float]:
    """Detunings where two response branches merge (double root of the
    cubic): the predicted jump frequencies.  Sign changes of the cubic
    discriminant are located on a grid over [-span, span] and refined
    by bisection.  In lumped mode each window side is scanned on its
    own sigma domain."""
    if isinstance(inputs, AxisCoefficients):
        inputs = ResponseInputs.uncoupled(inputs)
    c = inputs.coeffs
    if c.mu <= 0 or c.k == 0:
        raise ValidationError("fold analysis needs mu > 0 and a drive")
    if span is None:
        a_pk = peak_amplitude(abs(c.k), c.mu, c.omega0)
        reach = [20.0 * c.mu]
        for in_window in ((True, False) if inputs.mode == "lumped"
                          else (False,)):
            p, q_c = _pq(inputs, in_window)
            reach.append(abs(p) * a_pk**2 + abs(q_c))
        span = 4.0 * max(reach)
    sides = ([(True, -span, min(span, inputs.window_edge)),
              (False, min(span, inputs.window_edge), span)]
             if inputs.mode == "lumped" else [(False, -span, span)])
    out = []
    for in_window, lo, hi in sides:
        if not (hi > lo):
            continue
        # p == 0 degenerates the cubic to a linear equation in A: one
        # root at every sigma, identically zero discriminant, no folds
        if _pq(inputs, in_window)[0] == 0.0:
            continue
        xs = np.linspace(lo, hi, grid + 1)
        vals = np.array([_discriminant(inputs, float(s), in_window)
                         for s in xs])
        for i in range(grid):
            va, vb = vals[i], vals[i + 1]
            if va == 0.0:
                out.append(float(xs[i]))
                continue
            if va * vb < 0.0:
                a_, b_ = float(xs[i]), float(xs[i + 1])
                fa = va
                for _ in range(200):
                    m = 0.5 * (a_ + b_)
                    fm = _discriminant(inputs, m, in_window)
                    if fm == 0.0 or (b_ - a_) <= 1e-15 * max(1.0, abs(m)):
                        a_ = b_ = m
                        break
                    if fa * fm < 0.0:
                        b_ = m
                    else:
                        a_, fa = m, fm
                out.append(0.5 * (a_ + b_))
    out.sort()
    deduped = []
    for s in out:
        if not deduped or abs(s - deduped[-1]) > 1e-12 * max(span, 1.0):
            deduped.append(s)
    return deduped
