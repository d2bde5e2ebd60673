"""Closed-form coefficient tables.

Generated by scripts/derive_closed_forms.py; do not edit by hand.

DC_TABLE[slot] lists (j, q): the contribution
q * e * V_j * M_j / (m * r0**BASIS_DEGREE[j-1]).
RF_TABLE[slot] lists (j, jp, q): the contribution
q * e**2 * U_j * U_jp * M_j * M_jp
    / (m**2 * Omega**2 * r0**(BASIS_DEGREE[j-1] + BASIS_DEGREE[jp-1])).
Cross pairs (j != jp) already carry their combinatorial factor 2.
"""

from fractions import Fraction as F

BASIS_DEGREE = (0, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4, 4, 4)

DC_TABLE = {
    "omega0z_sq": ((7, F(4, 1)),),
    "alpha2": ((13, F(6, 1)),),
    "alpha3": ((21, F(32, 1)),),
    "alpha21": ((20, F(12, 1)),),
    "alpha22": ((22, F(12, 1)),),
    "alpha4": ((21, F(-48, 1)), (23, F(-12, 1))),
    "alpha5": ((21, F(-48, 1)), (23, F(12, 1))),
    "alpha6": ((19, F(12, 1)),),
    "alpha7": ((12, F(8, 1)),),
    "alpha8": ((14, F(8, 1)),),
    "omega0x_sq": ((7, F(-2, 1)), (9, F(2, 1))),
    "omega0y_sq": ((7, F(-2, 1)), (9, F(-2, 1))),
    "alpha2x": ((14, F(-3, 1)), (16, F(3, 1))),
    "alpha2y": ((10, F(-3, 1)), (12, F(-3, 1))),
}

RF_TABLE = {
    "omega0z_sq": (
        (2, 12, F(4, 1)), (3, 13, F(6, 1)), (4, 14, F(4, 1)),
        (6, 6, F(1, 2)), (7, 7, F(8, 1)), (8, 8, F(1, 2)),
    ),
    "alpha2": (
        (2, 20, F(6, 1)), (3, 21, F(48, 1)), (4, 22, F(6, 1)),
        (6, 12, F(6, 1)), (7, 13, F(36, 1)), (8, 14, F(6, 1)),
    ),
    "alpha3": (
        (6, 20, F(8, 1)), (7, 21, F(256, 1)), (8, 22, F(8, 1)),
        (12, 12, F(16, 1)), (13, 13, F(36, 1)), (14, 14, F(16, 1)),
    ),
    "alpha21": (
        (5, 22, F(6, 1)), (6, 21, F(-24, 1)), (6, 23, F(-18, 1)),
        (7, 20, F(60, 1)), (8, 19, F(9, 1)), (9, 20, F(-12, 1)),
        (11, 14, F(6, 1)), (12, 13, F(36, 1)), (12, 15, F(-12, 1)),
    ),
    "alpha22": (
        (5, 20, F(6, 1)), (6, 19, F(9, 1)), (7, 22, F(60, 1)),
        (8, 21, F(-24, 1)), (8, 23, F(18, 1)), (9, 22, F(12, 1)),
        (11, 12, F(6, 1)), (13, 14, F(36, 1)), (14, 15, F(12, 1)),
    ),
    "alpha4": (
        (5, 19, F(6, 1)), (6, 18, F(-3, 1)), (6, 20, F(3, 1)),
        (7, 21, F(-96, 1)), (7, 23, F(-24, 1)), (8, 22, F(-3, 1)),
        (8, 24, F(-3, 1)), (9, 21, F(96, 1)), (9, 23, F(24, 1)),
        (10, 12, F(-12, 1)), (11, 11, F(1, 2)), (12, 12, F(20, 1)),
        (13, 15, F(6, 1)), (14, 14, F(-4, 1)), (14, 16, F(-12, 1)),
        (15, 15, F(2, 1)),
    ),
    "alpha5": (
        (5, 19, F(6, 1)), (6, 18, F(3, 1)), (6, 20, F(-3, 1)),
        (7, 21, F(-96, 1)), (7, 23, F(24, 1)), (8, 22, F(3, 1)),
        (8, 24, F(3, 1)), (9, 21, F(-96, 1)), (9, 23, F(24, 1)),
        (10, 12, F(12, 1)), (11, 11, F(1, 2)), (12, 12, F(-4, 1)),
        (13, 15, F(-6, 1)), (14, 14, F(20, 1)), (14, 16, F(12, 1)),
        (15, 15, F(2, 1)),
    ),
    "alpha6": (
        (5, 21, F(-96, 1)), (6, 22, F(6, 1)), (6, 24, F(-6, 1)),
        (7, 19, F(24, 1)), (8, 18, F(6, 1)), (8, 20, F(6, 1)),
        (10, 14, F(24, 1)), (11, 13, F(-6, 1)), (12, 14, F(48, 1)),
        (12, 16, F(-24, 1)),
    ),
    "alpha7": (
        (2, 21, F(-48, 1)), (2, 23, F(-12, 1)), (3, 20, F(12, 1)),
        (4, 19, F(6, 1)), (5, 14, F(4, 1)), (6, 15, F(-2, 1)),
        (7, 12, F(24, 1)), (8, 11, F(1, 1)), (9, 12, F(-8, 1)),
    ),
    "alpha8": (
        (2, 19, F(6, 1)), (3, 22, F(12, 1)), (4, 21, F(-48, 1)),
        (4, 23, F(12, 1)), (5, 12, F(4, 1)), (6, 11, F(1, 1)),
        (7, 14, F(24, 1)), (8, 15, F(2, 1)), (9, 14, F(8, 1)),
    ),
    "omega0x_sq": (
        (2, 10, F(3, 1)), (2, 12, F(-1, 1)), (3, 13, F(-3, 1)),
        (3, 15, F(1, 1)), (4, 14, F(-3, 1)), (4, 16, F(3, 1)),
        (5, 5, F(1, 2)), (7, 7, F(2, 1)), (7, 9, F(-4, 1)),
        (8, 8, F(1, 2)), (9, 9, F(2, 1)),
    ),
    "omega0y_sq": (
        (2, 10, F(-3, 1)), (2, 12, F(-3, 1)), (3, 13, F(-3, 1)),
        (3, 15, F(-1, 1)), (4, 14, F(-1, 1)), (4, 16, F(-3, 1)),
        (5, 5, F(1, 2)), (6, 6, F(1, 2)), (7, 7, F(2, 1)),
        (7, 9, F(4, 1)), (9, 9, F(2, 1)),
    ),
    "alpha2x": (
        (2, 17, F(3, 2)), (2, 19, F(-3, 2)), (3, 22, F(-9, 2)),
        (3, 24, F(3, 2)), (4, 21, F(18, 1)), (4, 23, F(-6, 1)),
        (4, 25, F(6, 1)), (5, 10, F(9, 2)), (5, 12, F(-3, 2)),
        (7, 14, F(9, 1)), (7, 16, F(-9, 1)), (8, 13, F(-9, 2)),
        (8, 15, F(3, 2)), (9, 14, F(-9, 1)), (9, 16, F(9, 1)),
    ),
    "alpha2y": (
        (2, 21, F(18, 1)), (2, 23, F(6, 1)), (2, 25, F(6, 1)),
        (3, 18, F(-3, 2)), (3, 20, F(-9, 2)), (4, 17, F(-3, 2)),
        (4, 19, F(-3, 2)), (5, 14, F(-3, 2)), (5, 16, F(-9, 2)),
        (6, 13, F(-9, 2)), (6, 15, F(-3, 2)), (7, 10, F(9, 1)),
        (7, 12, F(9, 1)), (9, 10, F(9, 1)), (9, 12, F(9, 1)),
    ),
}
