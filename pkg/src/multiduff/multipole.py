"""Multipole potentials on a documented real-solid-harmonic basis.

The basis covers indices j = 1..25: degree 0 (j=1), dipoles (2-4),
quadrupoles (5-9), hexapoles (10-16), octopoles (17-25).  Entries are
Cartesian polynomials in the dimensionless coordinates (x/r0, y/r0,
z/r0) with unit integer leading coefficients and no normalization
constants; the per-index constants M_j are user-settable and default
to 1.  Within each degree the index runs over the azimuthal order
m = -l..+l (j = l*l + l + 1 + m), negative m giving the sin-type
(y-leaning) and positive m the cos-type (x-leaning) combination.

The rf drive enters through its spatial envelope; the time-averaged
(ponderomotive) effect of the drive is folded into a single static
pseudopotential

    Psi_eff = e * Phi_dc + e**2 / (4 m Omega**2) * |grad Phi_rf|**2

whose gradient supplies every force used downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Tuple

import numpy as np

from .errors import (NonConvergenceError, SaddlePointError, ValidationError)
from .polynomial import TrivariatePolynomial

N_INDICES = 25

# Exponent-triple tables for the 25 basis polynomials, dimensionless
# coordinates, unit leading coefficients.  Keys are (i, j, k) for
# x**i * y**j * z**k.
_BASIS_TERMS = (
    # l = 0
    {(0, 0, 0): 1},                                        # j=1: 1
    # l = 1
    {(0, 1, 0): 1},                                        # j=2: y
    {(0, 0, 1): 1},                                        # j=3: z
    {(1, 0, 0): 1},                                        # j=4: x
    # l = 2
    {(1, 1, 0): 1},                                        # j=5: xy
    {(0, 1, 1): 1},                                        # j=6: yz
    {(0, 0, 2): 2, (2, 0, 0): -1, (0, 2, 0): -1},          # j=7: 2z2-x2-y2
    {(1, 0, 1): 1},                                        # j=8: xz
    {(2, 0, 0): 1, (0, 2, 0): -1},                         # j=9: x2-y2
    # l = 3
    {(2, 1, 0): 3, (0, 3, 0): -1},                         # j=10: y(3x2-y2)
    {(1, 1, 1): 1},                                        # j=11: xyz
    {(0, 1, 2): 4, (2, 1, 0): -1, (0, 3, 0): -1},          # j=12: y(4z2-x2-y2)
    {(0, 0, 3): 2, (2, 0, 1): -3, (0, 2, 1): -3},          # j=13: z(2z2-3x2-3y2)
    {(1, 0, 2): 4, (3, 0, 0): -1, (1, 2, 0): -1},          # j=14: x(4z2-x2-y2)
    {(2, 0, 1): 1, (0, 2, 1): -1},                         # j=15: z(x2-y2)
    {(3, 0, 0): 1, (1, 2, 0): -3},                         # j=16: x(x2-3y2)
    # l = 4
    {(3, 1, 0): 1, (1, 3, 0): -1},                         # j=17: xy(x2-y2)
    {(2, 1, 1): 3, (0, 3, 1): -1},                         # j=18: yz(3x2-y2)
    {(1, 1, 2): 6, (3, 1, 0): -1, (1, 3, 0): -1},          # j=19: xy(6z2-x2-y2)
    {(0, 1, 3): 4, (2, 1, 1): -3, (0, 3, 1): -3},          # j=20: yz(4z2-3x2-3y2)
    {(0, 0, 4): 8, (2, 0, 2): -24, (0, 2, 2): -24,
     (4, 0, 0): 3, (0, 4, 0): 3, (2, 2, 0): 6},            # j=21: 8z4-24z2(x2+y2)+3(x2+y2)2
    {(1, 0, 3): 4, (3, 0, 1): -3, (1, 2, 1): -3},          # j=22: xz(4z2-3x2-3y2)
    {(2, 0, 2): 6, (0, 2, 2): -6,
     (4, 0, 0): -1, (0, 4, 0): 1},                         # j=23: (x2-y2)(6z2-x2-y2)
    {(3, 0, 1): 1, (1, 2, 1): -3},                         # j=24: xz(x2-3y2)
    {(4, 0, 0): 1, (2, 2, 0): -6, (0, 4, 0): 1},           # j=25: x4-6x2y2+y4
)

_DEGREE_OF_INDEX = (0,) + (1,) * 3 + (2,) * 5 + (3,) * 7 + (4,) * 9


@dataclass(frozen=True)
class BasisEntry:
    index: int            # j, 1-based
    degree: int           # l
    poly: TrivariatePolynomial   # dimensionless arguments


@dataclass(frozen=True)
class HarmonicBasis:
    """Ordered 25-entry harmonic basis.  Index j is 1-based."""

    entries: Tuple[BasisEntry, ...]

    def entry(self, j: int) -> BasisEntry:
        if not 1 <= j <= N_INDICES:
            raise ValidationError(f"basis index {j} outside 1..{N_INDICES}")
        return self.entries[j - 1]

    def poly(self, j: int) -> TrivariatePolynomial:
        return self.entry(j).poly

    def degree(self, j: int) -> int:
        return self.entry(j).degree


_BASIS_CACHE: HarmonicBasis | None = None


def build_basis() -> HarmonicBasis:
    """The frozen 25-entry basis; every entry is exactly harmonic."""
    global _BASIS_CACHE
    if _BASIS_CACHE is None:
        entries = tuple(
            BasisEntry(j, _DEGREE_OF_INDEX[j - 1],
                       TrivariatePolynomial(terms))
            for j, terms in enumerate(_BASIS_TERMS, start=1))
        _BASIS_CACHE = HarmonicBasis(entries)
    return _BASIS_CACHE


def basis_table_markdown() -> str:
    """Markdown table of the basis (index, degree, polynomial)."""
    basis = build_basis()
    lines = [
        "# Harmonic basis table",
        "",
        "Cartesian real solid harmonics in the dimensionless coordinates",
        "(x/r0, y/r0, z/r0).  Unit integer leading coefficients, no",
        "normalization constants (the per-index constants M_j are applied",
        "separately and default to 1).  Within each degree l the index is",
        "j = l*l + l + 1 + m for azimuthal order m = -l..+l.",
        "",
        "| j | degree | polynomial |",
        "|---|--------|------------|",
    ]
    for e in basis.entries:
        lines.append(f"| {e.index} | {e.degree} | {e.poly} |")
    lines.append("")
    return "\n".join(lines)


def _as_25(values, what: str) -> Tuple[float, ...]:
    vals = tuple(float(v) for v in values)
    if len(vals) != N_INDICES:
        raise ValidationError(
            f"{what} must have exactly {N_INDICES} slots, got {len(vals)}")
    if not all(np.isfinite(vals)):
        raise ValidationError(f"{what} contains non-finite values")
    return vals


def _from_sparse(mapping: Mapping[int, float], what: str) -> Tuple[float, ...]:
    out = [0.0] * N_INDICES
    for j, v in mapping.items():
        j = int(j)
        if not 1 <= j <= N_INDICES:
            raise ValidationError(f"{what}[{j}]: index outside 1..{N_INDICES}")
        out[j - 1] = float(v)
    return tuple(out)


@dataclass(frozen=True)
class TrapParams:
    """Charge (C) and mass (kg) of the trapped particle."""

    charge: float
    mass: float

    def __post_init__(self):
        if self.charge == 0:
            raise ValidationError("charge must be nonzero")
        if not self.mass > 0:
            raise ValidationError("mass must be positive")


@dataclass(frozen=True)
class MultipoleCoefficients:
    """Aggregated multipole amplitudes.

    U_star[j-1] is the rf amplitude (volts) of index j, V_star[j-1]
    the dc amplitude, M[j-1] the dimensionless normalization constant.
    r0 is the length scale (m), omega_rf the rf angular frequency
    (rad/s).
    """

    r0: float
    omega_rf: float
    U_star: Tuple[float, ...] = (0.0,) * N_INDICES
    V_star: Tuple[float, ...] = (0.0,) * N_INDICES
    M: Tuple[float, ...] = (1.0,) * N_INDICES

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValidationError("r0 must be positive")
        if not self.omega_rf > 0:
            raise ValidationError("omega_rf must be positive")
        object.__setattr__(self, "U_star", _as_25(self.U_star, "U_star"))
        object.__setattr__(self, "V_star", _as_25(self.V_star, "V_star"))
        object.__setattr__(self, "M", _as_25(self.M, "M"))

    @classmethod
    def from_sparse(cls, r0: float, omega_rf: float,
                    U: Mapping[int, float] | None = None,
                    V: Mapping[int, float] | None = None,
                    M: Mapping[int, float] | None = None
                    ) -> "MultipoleCoefficients":
        """Build from {index: value} maps; unspecified slots are 0
        (U, V) or 1 (M)."""
        u = _from_sparse(U or {}, "U")
        v = _from_sparse(V or {}, "V")
        m = [1.0] * N_INDICES
        for j, val in (M or {}).items():
            j = int(j)
            if not 1 <= j <= N_INDICES:
                raise ValidationError(f"M[{j}]: index outside 1..{N_INDICES}")
            m[j - 1] = float(val)
        return cls(r0=r0, omega_rf=omega_rf, U_star=u, V_star=v,
                   M=tuple(m))

    def u_eff(self, j: int) -> float:
        """U_star[j] * M[j]."""
        return self.U_star[j - 1] * self.M[j - 1]

    def v_eff(self, j: int) -> float:
        return self.V_star[j - 1] * self.M[j - 1]


@dataclass(frozen=True)
class Electrode:
    label: str
    v_dc: float
    u_rf: float


@dataclass(frozen=True)
class ElectrodeConfig:
    """Per-electrode voltages and their multipole weight rows.

    weights[i][j-1] is the dimensionless contribution of electrode i
    to multipole index j.
    """

    electrodes: Tuple[Electrode, ...]
    weights: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.weights) != len(self.electrodes):
            raise ValidationError(
                f"{len(self.electrodes)} electrodes but "
                f"{len(self.weights)} weight rows")
        rows = tuple(_as_25(row, f"weights[{i}]")
                     for i, row in enumerate(self.weights))
        object.__setattr__(self, "weights", rows)
        object.__setattr__(self, "electrodes", tuple(self.electrodes))


def aggregate_electrodes(cfg: ElectrodeConfig
                         ) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """Weighted sums U*_j = sum_i U_i g_ij and V*_j = sum_i V_i g_ij."""
    g = np.asarray(cfg.weights, dtype=float)
    u = np.array([e.u_rf for e in cfg.electrodes], dtype=float)
    v = np.array([e.v_dc for e in cfg.electrodes], dtype=float)
    return tuple(u @ g), tuple(v @ g)


def _superpose(mc: MultipoleCoefficients, amplitudes) -> TrivariatePolynomial:
    basis = build_basis()
    total = TrivariatePolynomial.zero("V")
    s = 1.0 / mc.r0
    for j in range(1, N_INDICES + 1):
        amp = amplitudes[j - 1] * mc.M[j - 1]
        if amp == 0.0:
            continue
        scaled = basis.poly(j).scale_arguments(s, s, s).with_unit("V")
        total = total + amp * scaled
    return total


def potential_dc(mc: MultipoleCoefficients) -> TrivariatePolynomial:
    """Static potential (volts) as a polynomial in meters coordinates."""
    return _superpose(mc, mc.V_star)


def potential_rf_envelope(mc: MultipoleCoefficients) -> TrivariatePolynomial:
    """Spatial amplitude (volts) of the rf drive; the cos(Omega t)
    factor is separated out and never enters the polynomial."""
    return _superpose(mc, mc.U_star)


def pseudopotential(mc: MultipoleCoefficients,
                    trap: TrapParams) -> TrivariatePolynomial:
    """Static effective potential (joules):

        e * Phi_dc + e**2 / (4 m Omega**2) * |grad Phi_rf|**2

    One scalar potential carries both the dc force and the
    time-averaged rf force; its gradient over the mass reproduces the
    secular equation of motion.  Total degree <= 6.
    """
    dc = potential_dc(mc)
    rf = potential_rf_envelope(mc)
    gx, gy, gz = rf.gradient()
    grad_sq = gx * gx + gy * gy + gz * gz
    e = trap.charge
    factor = e * e / (4.0 * trap.mass * mc.omega_rf**2)
    return (e * dc).with_unit("J") + (factor * grad_sq).with_unit("J")


def pseudopotential_per_mass(mc: MultipoleCoefficients,
                             trap: TrapParams) -> TrivariatePolynomial:
    """pseudopotential / m, in J/kg; its negative gradient is the
    secular acceleration field."""
    return ((1.0 / trap.mass) * pseudopotential(mc, trap)).with_unit("J/kg")


def find_equilibrium(mc: MultipoleCoefficients, trap: TrapParams,
                     seed: Sequence[float] = (0.0, 0.0, 0.0),
                     max_iter: int = 100) -> np.ndarray:
    """Newton iteration on grad(Psi_eff) from `seed`.

    Returns the location of a local minimum.  Raises
    NonConvergenceError when the iteration exhausts its budget and
    SaddlePointError when the stationary point it reaches is not a
    minimum (Hessian not positive definite, degenerate potentials
    included).
    """
    psi = pseudopotential(mc, trap)
    grad = psi.gradient()
    hess = [[grad[a].derivative(b) for b in range(3)] for a in range(3)]

    point = np.asarray(seed, dtype=float).copy()
    if point.shape != (3,):
        raise ValidationError("seed must be a 3-vector")
    step_tol = 1e-13 * mc.r0

    converged = False
    for _ in range(max_iter):
        g = np.array([grad[a](*point) for a in range(3)])
        if not np.all(np.isfinite(g)):
            raise NonConvergenceError("gradient became non-finite")
        if np.all(g == 0.0):
            converged = True
            break
        H = np.array([[hess[a][b](*point) for b in range(3)]
                      for a in range(3)])
        try:
            delta = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            raise SaddlePointError(
                "singular Hessian during equilibrium search; "
                "the potential has no isolated stationary point here")
        point = point + delta
        if np.linalg.norm(delta) <= step_tol:
            converged = True
            break
    if not converged:
        raise NonConvergenceError(
            f"equilibrium search did not converge in {max_iter} iterations")

    H = np.array([[hess[a][b](*point) for b in range(3)] for a in range(3)])
    try:
        np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        raise SaddlePointError(
            "stationary point is not a minimum "
            "(Hessian not positive definite)")
    return point
