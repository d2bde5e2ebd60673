#!/usr/bin/env python3
"""Regenerate the closed-form coefficient tables and the basis docs.

The per-axis model coefficients are rational combinations of the
multipole amplitudes.  Each z-equation coefficient is read out of the
per-mass potential

    P = e*Phi_dc/m + e**2/(4 m**2 Omega**2) * |grad Phi_rf|**2

expanded about the origin: a dc index j contributes

    q_dc * e * V_j * M_j / (m * r0**l_j)

and an rf index pair (j, j') contributes

    q_rf * e**2 * U_j * U_j' * M_j * M_j' / (m**2 * Omega**2 * r0**(l_j + l_j'))

with q_dc, q_rf exact rationals fixed by the basis polynomials alone.
This script computes every q by exact integer polynomial arithmetic,
self-checks the result against a direct numeric expansion, and writes

    src/multiduff/_closed_form_tables.py
    docs/harmonic_basis.md

Run from anywhere:  python scripts/derive_closed_forms.py [--check-only]
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from multiduff.multipole import (  # noqa: E402
    MultipoleCoefficients, N_INDICES, TrapParams, basis_table_markdown,
    build_basis, pseudopotential_per_mass)

# slot -> (readout multiplier, monomial exponents in the per-mass
# potential).  A potential term P = c * x**i y**j z**k enters the
# axis equations through its gradient; e.g. the z-equation term
# alpha4 * z * y**2 comes from c * y**2 z**2 with alpha4 = 2c.
READOUTS = {
    "omega0z_sq": (2, (0, 0, 2)),
    "alpha2":     (3, (0, 0, 3)),
    "alpha3":     (4, (0, 0, 4)),
    "alpha21":    (3, (0, 1, 3)),
    "alpha22":    (3, (1, 0, 3)),
    "alpha4":     (2, (0, 2, 2)),
    "alpha5":     (2, (2, 0, 2)),
    "alpha6":     (2, (1, 1, 2)),
    "alpha7":     (2, (0, 1, 2)),
    "alpha8":     (2, (1, 0, 2)),
    "omega0x_sq": (2, (2, 0, 0)),
    "omega0y_sq": (2, (0, 2, 0)),
    "alpha2x":    (3, (3, 0, 0)),
    "alpha2y":    (3, (0, 3, 0)),
}


def generate_tables():
    basis = build_basis()
    degrees = tuple(e.degree for e in basis.entries)

    dc_table = {slot: [] for slot in READOUTS}
    rf_table = {slot: [] for slot in READOUTS}

    for j in range(1, N_INDICES + 1):
        poly = basis.poly(j)
        for slot, (mult, mono) in READOUTS.items():
            coeff = poly.coefficient(mono)
            if coeff:
                dc_table[slot].append((j, Fraction(mult * coeff)))

    grads = {j: basis.poly(j).gradient() for j in range(1, N_INDICES + 1)}
    for j in range(1, N_INDICES + 1):
        for jp in range(j, N_INDICES + 1):
            g = (grads[j][0] * grads[jp][0] + grads[j][1] * grads[jp][1]
                 + grads[j][2] * grads[jp][2])
            pair = 1 if j == jp else 2
            for slot, (mult, mono) in READOUTS.items():
                coeff = g.coefficient(mono)
                if coeff:
                    rf_table[slot].append(
                        (j, jp, Fraction(mult * coeff * pair, 4)))

    dc_table = {s: tuple(v) for s, v in dc_table.items()}
    rf_table = {s: tuple(v) for s, v in rf_table.items()}
    return dc_table, rf_table, degrees


def evaluate_tables(dc_table, rf_table, degrees,
                    mc: MultipoleCoefficients, trap: TrapParams):
    """Numeric slot values from the tables (mirror of the package's
    closed_form_slots, kept independent here for the self-check)."""
    e, m = trap.charge, trap.mass
    r0, om = mc.r0, mc.omega_rf
    out = {}
    for slot in READOUTS:
        total = 0.0
        for j, q in dc_table[slot]:
            total += float(q) * e * mc.v_eff(j) / (m * r0**degrees[j - 1])
        for j, jp, q in rf_table[slot]:
            total += (float(q) * e**2 * mc.u_eff(j) * mc.u_eff(jp)
                      / (m**2 * om**2 * r0**(degrees[j - 1] + degrees[jp - 1])))
        out[slot] = total
    return out


def taylor_slots_origin(mc, trap):
    """Independent numeric path: expand the pseudopotential and read
    the same monomials."""
    p = pseudopotential_per_mass(mc, trap)
    return {slot: mult * p.coefficient(mono)
            for slot, (mult, mono) in READOUTS.items()}


def self_check(dc_table, rf_table, degrees, n_configs=30, seed=7):
    rng = np.random.default_rng(seed)
    trap = TrapParams(charge=1.602176634e-19, mass=40 * 1.66053906892e-27)
    worst = 0.0
    for _ in range(n_configs):
        u = {j: rng.uniform(-500, 500) for j in range(2, N_INDICES + 1)}
        v = {j: rng.uniform(-500, 500) for j in range(2, N_INDICES + 1)}
        m = {j: rng.uniform(0.1, 10) for j in range(1, N_INDICES + 1)}
        mc = MultipoleCoefficients.from_sparse(
            r0=8e-4, omega_rf=2 * np.pi * 15e6, U=u, V=v, M=m)
        a = evaluate_tables(dc_table, rf_table, degrees, mc, trap)
        b = taylor_slots_origin(mc, trap)
        for slot in READOUTS:
            scale = max(abs(a[slot]), abs(b[slot]), 1e-300)
            worst = max(worst, abs(a[slot] - b[slot]) / scale)
    return worst


def render_module(dc_table, rf_table, degrees) -> str:
    lines = [
        '"""Closed-form coefficient tables.',
        "",
        "Generated by scripts/derive_closed_forms.py; do not edit by hand.",
        "",
        "DC_TABLE[slot] lists (j, q): the contribution",
        "q * e * V_j * M_j / (m * r0**BASIS_DEGREE[j-1]).",
        "RF_TABLE[slot] lists (j, jp, q): the contribution",
        "q * e**2 * U_j * U_jp * M_j * M_jp",
        "    / (m**2 * Omega**2 * r0**(BASIS_DEGREE[j-1] + BASIS_DEGREE[jp-1])).",
        "Cross pairs (j != jp) already carry their combinatorial factor 2.",
        '"""',
        "",
        "from fractions import Fraction as F",
        "",
        f"BASIS_DEGREE = {degrees!r}",
        "",
        "DC_TABLE = {",
    ]
    for slot in READOUTS:
        entries = ", ".join(f"({j}, F({q.numerator}, {q.denominator}))"
                            for j, q in dc_table[slot])
        comma = "," if len(dc_table[slot]) == 1 else ""
        lines.append(f'    "{slot}": ({entries}{comma}),')
    lines.append("}")
    lines.append("")
    lines.append("RF_TABLE = {")
    for slot in READOUTS:
        parts = [f"({j}, {jp}, F({q.numerator}, {q.denominator}))"
                 for j, jp, q in rf_table[slot]]
        if len(parts) <= 3:
            comma = "," if len(parts) == 1 else ""
            lines.append(f'    "{slot}": ({", ".join(parts)}{comma}),')
        else:
            lines.append(f'    "{slot}": (')
            for i in range(0, len(parts), 3):
                lines.append("        " + ", ".join(parts[i:i + 3]) + ",")
            lines.append("    ),")
    lines.append("}")
    lines.append("")
    return "\n".join(lines)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--check-only", action="store_true",
                    help="verify tables and docs match without writing")
    args = ap.parse_args(argv)

    dc_table, rf_table, degrees = generate_tables()
    worst = self_check(dc_table, rf_table, degrees)
    print(f"self-check: worst relative slot discrepancy = {worst:.3e}")
    if worst > 1e-12:
        print("FAILED: tables disagree with direct expansion", file=sys.stderr)
        return 1

    module_text = render_module(dc_table, rf_table, degrees)
    docs_text = basis_table_markdown()
    module_path = REPO / "src" / "multiduff" / "_closed_form_tables.py"
    docs_path = REPO / "docs" / "harmonic_basis.md"

    if args.check_only:
        ok = True
        for path, text in ((module_path, module_text), (docs_path, docs_text)):
            if not path.exists() or path.read_text() != text:
                print(f"STALE: {path}", file=sys.stderr)
                ok = False
        if ok:
            print("tables and docs are up to date")
        return 0 if ok else 1

    docs_path.parent.mkdir(parents=True, exist_ok=True)
    module_path.write_text(module_text)
    docs_path.write_text(docs_text)
    print(f"wrote {module_path}")
    print(f"wrote {docs_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
