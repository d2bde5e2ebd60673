"""Duffing-model coefficients from the trap potential, two independent ways.

The driven-axis equation of motion is

    z'' + 2 mu z' + omega0**2 z + alpha2 z**2 + alpha3 z**3
        + alpha21 z**2 y + alpha22 z**2 x + alpha4 z y**2 + alpha5 z x**2
        + alpha6 z x y + alpha7 z y + alpha8 z x = k cos(omega t)

with cyclic analogues for the other axes.  Every force term is the
gradient of one scalar per-mass potential, so the coefficients can be
produced either from frozen closed-form tables (rational combinations
of the multipole amplitudes, see _closed_form_tables) or by Taylor
expansion of the pseudopotential; the two routes are cross-validated
in the test suite.

Axis convention: the driven axis xi has ordered partners (eta, zeta)
given by z -> (y, x), x -> (z, y), y -> (x, z).  AxisCoefficients
field names follow the z-axis template: alpha7/alpha4/alpha2y/omega0y
belong to the eta chain (y when the driven axis is z) and
alpha8/alpha5/alpha2x/omega0x to the zeta chain (x when driven is z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from ._closed_form_tables import BASIS_DEGREE, DC_TABLE, RF_TABLE
from .errors import (NonConfiningAxisError, NonPrincipalAxesError,
                     ValidationError)
from .multipole import (MultipoleCoefficients, TrapParams, find_equilibrium,
                        pseudopotential_per_mass)
from .polynomial import TrivariatePolynomial

AXES = ("x", "y", "z")
PARTNERS = {"z": ("y", "x"), "x": ("z", "y"), "y": ("x", "z")}
_COL = {"x": 0, "y": 1, "z": 2}

# slot -> (readout multiplier, template exponents (self, eta, zeta)).
# A per-mass potential term c * xi**i eta**j zeta**k contributes to the
# xi equation through d/dxi, hence the multiplier i.
_SLOTS = {
    "omega0_sq": (2, (2, 0, 0)),
    "alpha2":    (3, (3, 0, 0)),
    "alpha3":    (4, (4, 0, 0)),
    "alpha21":   (3, (3, 1, 0)),
    "alpha22":   (3, (3, 0, 1)),
    "alpha4":    (2, (2, 2, 0)),
    "alpha5":    (2, (2, 0, 2)),
    "alpha6":    (2, (2, 1, 1)),
    "alpha7":    (2, (2, 1, 0)),
    "alpha8":    (2, (2, 0, 1)),
    "omega0y_sq": (2, (0, 2, 0)),
    "omega0x_sq": (2, (0, 0, 2)),
    "alpha2y":   (3, (0, 3, 0)),
    "alpha2x":   (3, (0, 0, 3)),
}


def template_exponents(axis: str, d_self: int, d_eta: int, d_zeta: int):
    """Map (driven, eta-partner, zeta-partner) degrees to (x, y, z)."""
    eta, zeta = PARTNERS[axis]
    out = [0, 0, 0]
    out[_COL[axis]] = d_self
    out[_COL[eta]] = d_eta
    out[_COL[zeta]] = d_zeta
    return tuple(out)


@dataclass(frozen=True)
class AxisCoefficients:
    """Equation-of-motion coefficients for one driven axis.

    omega0 in rad/s; mu in 1/s; alpha2, alpha7, alpha8, alpha2x,
    alpha2y in (rad/s)**2/m; alpha3, alpha21, alpha22, alpha4, alpha5,
    alpha6 in (rad/s)**2/m**2; k in m/s**2.  omega0x / omega0y are the
    partner-axis frequencies (zeta / eta chains); 0 marks "not known",
    allowed only while the matching coupling chain stays unused.
    """

    axis: str
    omega0: float
    mu: float = 0.0
    alpha2: float = 0.0
    alpha3: float = 0.0
    alpha21: float = 0.0
    alpha22: float = 0.0
    alpha4: float = 0.0
    alpha5: float = 0.0
    alpha6: float = 0.0
    alpha7: float = 0.0
    alpha8: float = 0.0
    alpha2x: float = 0.0
    alpha2y: float = 0.0
    omega0x: float = 0.0
    omega0y: float = 0.0
    k: float = 0.0

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValidationError(f"axis must be one of {AXES}, got {self.axis!r}")
        for f in fields(self):
            if f.name == "axis":
                continue
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ValidationError(f"{f.name} must be finite, got {v!r}")
        if self.omega0 <= 0:
            raise NonConfiningAxisError(
                f"axis {self.axis}: omega0 must be positive, got {self.omega0}")
        if self.mu < 0:
            raise ValidationError(f"mu must be >= 0, got {self.mu}")
        for name in ("omega0x", "omega0y"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")


@dataclass(frozen=True)
class Model3D:
    """Coupled three-axis model: one shared per-mass potential (quartic,
    expanded about the stored equilibrium, displacement coordinates in
    m, value in J/kg) plus damping and a single-axis drive.

    The per-axis views in `axes` are readouts of `potential`; the
    integrator differentiates `potential` directly, so every
    cross-coupling force (including the partner-equation counterparts
    of alpha21/alpha22/alpha6/alpha7/alpha8 that the per-axis template
    does not name) is present automatically and mutually consistent.
    """

    axes: dict
    drive_axis: str
    drive_k: float
    drive_omega: float
    potential: TrivariatePolynomial
    equilibrium: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.drive_axis not in AXES:
            raise ValidationError(f"drive_axis must be one of {AXES}")
        if set(self.axes) != set(AXES):
            raise ValidationError("axes must map exactly x, y, z")
        for name, c in self.axes.items():
            if c.axis != name:
                raise ValidationError(f"axes[{name!r}] labeled {c.axis!r}")
        if not (math.isfinite(self.drive_k) and math.isfinite(self.drive_omega)):
            raise ValidationError("drive_k and drive_omega must be finite")
        if self.drive_omega < 0:
            raise ValidationError("drive_omega must be >= 0")

    @property
    def driven(self) -> AxisCoefficients:
        return self.axes[self.drive_axis]

    def mu_vector(self):
        return tuple(self.axes[a].mu for a in AXES)


def closed_form_slots(mc: MultipoleCoefficients, trap: TrapParams) -> dict:
    """The 14 z-template potential readouts from the frozen rational
    tables.  Keys as in _SLOTS but named for the z axis (omega0_sq is
    omega0z**2).  Raw values; no confinement requirement."""
    e, m = trap.charge, trap.mass
    r0, om2 = mc.r0, mc.omega_rf ** 2
    out = {}
    for slot in _SLOTS:
        key = slot if slot != "omega0_sq" else "omega0z_sq"
        total = 0.0
        for j, q in DC_TABLE[key]:
            total += float(q) * e * mc.v_eff(j) / (m * r0 ** BASIS_DEGREE[j - 1])
        for j, jp, q in RF_TABLE[key]:
            total += (float(q) * e * e * mc.u_eff(j) * mc.u_eff(jp)
                      / (m * m * om2
                         * r0 ** (BASIS_DEGREE[j - 1] + BASIS_DEGREE[jp - 1])))
        out[slot] = total
    return out


def taylor_slots(mc: MultipoleCoefficients, trap: TrapParams,
                 about=(0.0, 0.0, 0.0), axis: str = "z") -> dict:
    """The same readouts by symbolic Taylor expansion of the
    pseudopotential about `about` (independent of the tables)."""
    p = pseudopotential_per_mass(mc, trap)
    if any(about):
        p = p.shift_arguments(*about)
    return {slot: mult * float(p.coefficient(template_exponents(axis, *mono)))
            for slot, (mult, mono) in _SLOTS.items()}


def omega0z_closed_form(mc: MultipoleCoefficients, trap: TrapParams) -> float:
    """Axial secular frequency (rad/s) from the two j=7 terms alone:
    omega0z**2 = 8 e**2 U7**2 M7**2 / (m**2 Omega**2 r0**4)
               + 4 e V7 M7 / (m r0**2)."""
    e, m = trap.charge, trap.mass
    w2 = (8 * e * e * mc.u_eff(7) ** 2 / (m * m * mc.omega_rf ** 2 * mc.r0 ** 4)
          + 4 * e * mc.v_eff(7) / (m * mc.r0 ** 2))
    if w2 <= 0:
        raise NonConfiningAxisError(
            f"z axis not confining: omega0z**2 = {w2:.6g} <= 0")
    return math.sqrt(w2)


def _coeffs_from_slots(slots: dict, axis: str, mu: float, k: float
                       ) -> AxisCoefficients:
    w2 = slots["omega0_sq"]
    if w2 <= 0:
        raise NonConfiningAxisError(
            f"axis {axis} not confining: omega0**2 = {w2:.6g} <= 0")
    wx2, wy2 = slots["omega0x_sq"], slots["omega0y_sq"]
    return AxisCoefficients(
        axis=axis, omega0=math.sqrt(w2), mu=mu, k=k,
        alpha2=slots["alpha2"], alpha3=slots["alpha3"],
        alpha21=slots["alpha21"], alpha22=slots["alpha22"],
        alpha4=slots["alpha4"], alpha5=slots["alpha5"],
        alpha6=slots["alpha6"], alpha7=slots["alpha7"],
        alpha8=slots["alpha8"],
        alpha2x=slots["alpha2x"], alpha2y=slots["alpha2y"],
        omega0x=math.sqrt(wx2) if wx2 > 0 else 0.0,
        omega0y=math.sqrt(wy2) if wy2 > 0 else 0.0)


def tabulated_coefficients(mc: MultipoleCoefficients, trap: TrapParams,
                          mu: float = 0.0, k: float = 0.0) -> AxisCoefficients:
    """z-axis coefficients straight from the closed-form tables
    (origin-referenced).  mu and k are attached, never derived."""
    return _coeffs_from_slots(closed_form_slots(mc, trap), "z", mu, k)


def _quartic_about(mc, trap, about) -> TrivariatePolynomial:
    p = pseudopotential_per_mass(mc, trap)
    if any(about):
        p = p.shift_arguments(*about)
    return p.truncate(4).as_float()


def _check_expansion_point(p: TrivariatePolynomial, r0: float, about):
    """The model template has no constant-force or cross-quadratic
    terms, so the expansion point must be stationary with a diagonal
    Hessian."""
    hdiag = max(abs(2 * p.coefficient((2, 0, 0))),
                abs(2 * p.coefficient((0, 2, 0))),
                abs(2 * p.coefficient((0, 0, 2))))
    if hdiag == 0:
        raise ValidationError("potential has no quadratic part at the "
                              "expansion point")
    grad = max(abs(p.coefficient((1, 0, 0))), abs(p.coefficient((0, 1, 0))),
               abs(p.coefficient((0, 0, 1))))
    if grad > 1e-8 * hdiag * r0:
        raise ValidationError(
            f"expansion point {about} is not stationary "
            f"(|grad| ~ {grad:.3g} vs curvature scale {hdiag * r0:.3g})")
    cross = max(abs(p.coefficient((1, 1, 0))), abs(p.coefficient((1, 0, 1))),
                abs(p.coefficient((0, 1, 1))))
    if cross > 1e-9 * hdiag:
        raise NonPrincipalAxesError(
            f"Hessian at {about} has cross terms ~ {cross:.3g} "
            f"(diagonal scale {hdiag:.3g}); rotate to principal axes first")


def _axis_view(p: TrivariatePolynomial, axis: str, mu: float, k: float
               ) -> AxisCoefficients:
    slots = {slot: mult * float(p.coefficient(template_exponents(axis, *mono)))
             for slot, (mult, mono) in _SLOTS.items()}
    return _coeffs_from_slots(slots, axis, mu, k)


def derive_axis(mc: MultipoleCoefficients, trap: TrapParams, axis: str = "z",
                about=None, mu: float = 0.0, k: float = 0.0
                ) -> AxisCoefficients:
    """Coefficients for `axis` by Taylor expansion of the
    pseudopotential about the equilibrium (or an explicit stationary
    `about` point).  This is the oracle route for the closed forms."""
    if axis not in AXES:
        raise ValidationError(f"axis must be one of {AXES}, got {axis!r}")
    if about is None:
        about = find_equilibrium(mc, trap)
    p = _quartic_about(mc, trap, about)
    _check_expansion_point(p, mc.r0, about)
    return _axis_view(p, axis, mu, k)


def build_model3d(mc: MultipoleCoefficients, trap: TrapParams,
                  mu=(0.0, 0.0, 0.0), drive_axis: str = "z",
                  drive_k: float = 0.0, drive_omega: float = 0.0,
                  about=None) -> Model3D:
    """Full coupled model about the trap equilibrium.  mu is the
    per-axis damping (x, y, z) in 1/s; drive applies to one axis."""
    mu = _mu_triple(mu)
    if about is None:
        about = find_equilibrium(mc, trap)
    p = _quartic_about(mc, trap, about)
    _check_expansion_point(p, mc.r0, about)
    axes = {}
    for i, a in enumerate(AXES):
        axes[a] = _axis_view(p, a, mu[i], drive_k if a == drive_axis else 0.0)
    return Model3D(axes=axes, drive_axis=drive_axis, drive_k=drive_k,
                   drive_omega=drive_omega, potential=p,
                   equilibrium=tuple(float(c) for c in about))


def _mu_triple(mu):
    if isinstance(mu, dict):
        extra = set(mu) - set(AXES)
        if extra:
            raise ValidationError(f"unknown damping axes {sorted(extra)}")
        mu = tuple(float(mu.get(a, 0.0)) for a in AXES)
    else:
        mu = tuple(float(v) for v in mu)
        if len(mu) != 3:
            raise ValidationError("mu must give three per-axis rates (x, y, z)")
    if any(not math.isfinite(v) or v < 0 for v in mu):
        raise ValidationError("damping rates must be finite and >= 0")
    return mu


def model3d_from_axis_coefficients(coeffs: AxisCoefficients,
                                   mu=None,
                                   drive_omega: float = 0.0) -> Model3D:
    """Synthetic coupled model from one axis's coefficient set.

    Builds the unique quartic potential whose driven-axis readout
    reproduces `coeffs` and whose partner axes are harmonic at
    coeffs.omega0y / coeffs.omega0x with the partner quadratic
    self-terms alpha2y / alpha2x.  Partner equations then receive the
    completion forces implied by the shared potential (for driven z:
    the x equation gains -(alpha8/2) z**2 - alpha5 x z**2
    - (alpha22/3) z**3 - (alpha6/2) y z**2, and analogously for y).
    Requires nonzero partner frequencies whenever the matching chain
    couples; mu defaults to the driven-axis rate on all axes.
    """
    c = coeffs
    eta_used = any((c.alpha21, c.alpha4, c.alpha6, c.alpha7, c.alpha2y))
    zeta_used = any((c.alpha22, c.alpha5, c.alpha6, c.alpha8, c.alpha2x))
    if eta_used and c.omega0y <= 0:
        raise ValidationError("omega0y required: eta-chain coupling is active")
    if zeta_used and c.omega0x <= 0:
        raise ValidationError("omega0x required: zeta-chain coupling is active")
    wy = c.omega0y if c.omega0y > 0 else c.omega0
    wx = c.omega0x if c.omega0x > 0 else c.omega0

    terms = {
        (2, 0, 0): 0.5 * c.omega0 ** 2,
        (0, 2, 0): 0.5 * wy ** 2,
        (0, 0, 2): 0.5 * wx ** 2,
        (3, 0, 0): c.alpha2 / 3.0,
        (4, 0, 0): c.alpha3 / 4.0,
        (3, 1, 0): c.alpha21 / 3.0,
        (3, 0, 1): c.alpha22 / 3.0,
        (2, 2, 0): c.alpha4 / 2.0,
        (2, 0, 2): c.alpha5 / 2.0,
        (2, 1, 1): c.alpha6 / 2.0,
        (2, 1, 0): c.alpha7 / 2.0,
        (2, 0, 1): c.alpha8 / 2.0,
        (0, 3, 0): c.alpha2y / 3.0,
        (0, 0, 3): c.alpha2x / 3.0,
    }
    p = TrivariatePolynomial(
        {template_exponents(c.axis, *mono): v
         for mono, v in terms.items() if v != 0.0}, unit="J/kg")

    if mu is None:
        mu = (c.mu, c.mu, c.mu)
    mu = _mu_triple(mu)
    axes = {}
    for i, a in enumerate(AXES):
        axes[a] = _axis_view(p, a, mu[i], c.k if a == c.axis else 0.0)
    return Model3D(axes=axes, drive_axis=c.axis, drive_k=c.k,
                   drive_omega=drive_omega, potential=p)


def max_relative_discrepancy(slots_a: dict, slots_b: dict) -> float:
    """Worst component-wise relative difference between two slot dicts
    (scale floor avoids 0/0 on empty slots)."""
    worst = 0.0
    for key in slots_a:
        a, b = slots_a[key], slots_b[key]
        scale = max(abs(a), abs(b))
        if scale > 0:
            worst = max(worst, abs(a - b) / scale)
    return worst
