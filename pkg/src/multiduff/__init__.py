"""Coupled driven Duffing dynamics of a trapped ion in a
surface-electrode multipole potential.

Workflow: describe the trap potential on the documented harmonic
multipole basis (`multipole`), derive the per-axis nonlinear
equation-of-motion coefficients from its pseudopotential
(`coefficients`), integrate frequency sweeps with hysteresis
(`dynamics`), evaluate the multiple-scales steady-state response
(`multiscale`), and fit model parameters to measured response curves
(`estimation`).  The `cli` module ties these into reproducible runs.
"""

__version__ = "0.1.0"
