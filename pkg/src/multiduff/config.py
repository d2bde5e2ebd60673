"""Run configuration: the boundary layer between the human-edited TOML
file and the library.

All user-facing frequencies are plain Hz and carry an `_hz` suffix;
this module is the only place they are converted to angular units.
Unknown keys anywhere in the file are errors, so a typo can never
silently fall back to a default.

Schema (sections are optional unless a command needs them):

    [trap]                    charge_c (default elementary charge),
                              mass_amu XOR mass_kg, r0_m, omega_rf_hz
    [multipole]               M (optional {index = constant} table)
      [multipole.amplitudes]  U / V tables, {index = volts}, XOR:
      [[multipole.electrodes]] label, v_dc, u_rf,
                              weights = {index = g}
    [model]                   drive_axis, mu (scalar or [x, y, z]), k,
                              coupling = uncoupled|lumped|explicit,
                              coupling_value, window_edge_hz,
                              partner_b_m, partner_c_m
      [model.direct]          omega0_hz, omega0x_hz, omega0y_hz,
                              alpha2..alpha8, alpha21, alpha22,
                              alpha2x, alpha2y
    [protocol]                start_hz, end_hz, step_hz, settle_s,
                              measure_s, direction, reset_each_step,
                              rtol, images, image_sigma_window_hz,
                              image_plane, image_bins
    [response]                sigma_min_hz, sigma_max_hz, n_points
    [simulate]                freq_hz, duration_s, n_samples, rtol,
                              image, image_plane, image_bins
    [fit]                     robust, fixed = {mu, k}
    [output]                  dir plus per-command file names

The model is defined either by [model.direct] coefficients or derived
from [trap] + [multipole]; supplying both is an error.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .coefficients import (AXES, AxisCoefficients, build_model3d,
                           derive_axis, model3d_from_axis_coefficients)
from .errors import ConfigError, IOFormatError
from .multipole import (Electrode, ElectrodeConfig, MultipoleCoefficients,
                        TrapParams, aggregate_electrodes)
from .multiscale import ResponseInputs

TWO_PI = 2.0 * math.pi

ELEMENTARY_CHARGE = 1.602176634e-19
ATOMIC_MASS_KG = 1.66053906892e-27

_MISSING = object()


class _Section:
    """One TOML table with typed key access; every key must be
    consumed exactly once, and finish() rejects the rest."""

    def __init__(self, data: dict, path: str):
        self._data = dict(data)
        self.path = path

    def _take(self, key):
        return self._data.pop(key, _MISSING)

    def _path(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def number(self, key: str, default=_MISSING, positive=False,
               nonnegative=False) -> float:
        v = self._take(key)
        if v is _MISSING:
            if default is _MISSING:
                raise ConfigError("required key is missing",
                                  key_path=self._path(key))
            return default
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"expected a number, got {v!r}",
                              key_path=self._path(key))
        v = float(v)
        if not math.isfinite(v):
            raise ConfigError("must be finite", key_path=self._path(key))
        if positive and not v > 0:
            raise ConfigError(f"must be > 0, got {v}",
                              key_path=self._path(key))
        if nonnegative and v < 0:
            raise ConfigError(f"must be >= 0, got {v}",
                              key_path=self._path(key))
        return v

    def integer(self, key: str, default=_MISSING, minimum=None) -> int:
        v = self._take(key)
        if v is _MISSING:
            if default is _MISSING:
                raise ConfigError("required key is missing",
                                  key_path=self._path(key))
            return default
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"expected an integer, got {v!r}",
                              key_path=self._path(key))
        if minimum is not None and v < minimum:
            raise ConfigError(f"must be >= {minimum}, got {v}",
                              key_path=self._path(key))
        return v

    def string(self, key: str, default=_MISSING, choices=None) -> str:
        v = self._take(key)
        if v is _MISSING:
            if default is _MISSING:
                raise ConfigError("required key is missing",
                                  key_path=self._path(key))
            return default
        if not isinstance(v, str):
            raise ConfigError(f"expected a string, got {v!r}",
                              key_path=self._path(key))
        if choices is not None and v not in choices:
            raise ConfigError(f"must be one of {sorted(choices)}, got {v!r}",
                              key_path=self._path(key))
        return v

    def boolean(self, key: str, default=_MISSING) -> bool:
        v = self._take(key)
        if v is _MISSING:
            if default is _MISSING:
                raise ConfigError("required key is missing",
                                  key_path=self._path(key))
            return default
        if not isinstance(v, bool):
            raise ConfigError(f"expected true/false, got {v!r}",
                              key_path=self._path(key))
        return v

    def raw(self, key: str):
        """Untyped take (tables, arrays); _MISSING when absent."""
        return self._take(key)

    def finish(self):
        if self._data:
            key = sorted(self._data)[0]
            raise ConfigError("unknown key", key_path=self._path(key))


def _index_table(raw, path: str) -> dict:
    """{multipole index: number} from a TOML table with 1..25 keys."""
    if not isinstance(raw, dict):
        raise ConfigError("expected a table of index = value pairs",
                          key_path=path)
    out = {}
    for key, value in raw.items():
        try:
            j = int(key)
        except (TypeError, ValueError):
            raise ConfigError("index keys must be integers 1..25",
                              key_path=f"{path}.{key}") from None
        if not 1 <= j <= 25:
            raise ConfigError("index outside 1..25",
                              key_path=f"{path}.{key}")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}",
                              key_path=f"{path}.{key}")
        out[j] = float(value)
    return out


# ------------------------------------------------------------- sections

@dataclass(frozen=True)
class TrapSection:
    params: TrapParams
    r0: float
    omega_rf: float  # rad/s


@dataclass(frozen=True)
class MultipoleSection:
    amplitudes: dict | None      # {"U": {j: volts}, "V": {j: volts}}
    electrodes: ElectrodeConfig | None
    M: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ModelSection:
    drive_axis: str
    mu: tuple                    # per-axis (x, y, z), 1/s
    k: float
    coupling: str
    coupling_value: float
    window_edge: float           # rad/s
    partner_b: float
    partner_c: float
    direct: AxisCoefficients | None

    @property
    def mu_driven(self) -> float:
        return self.mu[AXES.index(self.drive_axis)]


@dataclass(frozen=True)
class ProtocolSection:
    start_hz: float
    end_hz: float
    step_hz: float
    settle_s: float
    measure_s: float
    direction: str
    reset_each_step: bool
    rtol: float
    images: bool
    image_sigma_window_hz: float
    image_plane: str
    image_bins: int


@dataclass(frozen=True)
class ResponseSection:
    sigma_min: float             # rad/s
    sigma_max: float
    n_points: int


@dataclass(frozen=True)
class SimulateSection:
    drive_omega: float           # rad/s
    duration_s: float
    n_samples: int | None
    rtol: float
    image: bool
    image_plane: str
    image_bins: int


@dataclass(frozen=True)
class FitSection:
    robust: bool = False
    fixed: dict = field(default_factory=dict)


@dataclass(frozen=True)
class OutputSection:
    directory: str = "."
    coeffs: str = "coeffs.txt"
    response: str = "response.csv"
    sweep: str = "sweep.csv"
    trajectory: str = "trajectory.csv"
    image: str = "trajectory.pgm"
    fit_report: str = "fit_report.txt"
    fit_curve: str = "fit_curve.csv"


# ------------------------------------------------------ section parsers

def _parse_trap(data: dict) -> TrapSection:
    s = _Section(data, "trap")
    charge = s.number("charge_c", default=ELEMENTARY_CHARGE)
    mass_amu = s.number("mass_amu", default=None, positive=True)
    mass_kg = s.number("mass_kg", default=None, positive=True)
    if (mass_amu is None) == (mass_kg is None):
        raise ConfigError("exactly one of mass_amu / mass_kg is required",
                          key_path="trap")
    r0 = s.number("r0_m", positive=True)
    omega_rf = TWO_PI * s.number("omega_rf_hz", positive=True)
    s.finish()
    mass = mass_kg if mass_kg is not None else mass_amu * ATOMIC_MASS_KG
    return TrapSection(params=TrapParams(charge=charge, mass=mass),
                       r0=r0, omega_rf=omega_rf)


def _parse_electrode(data: dict, path: str) -> tuple:
    s = _Section(data, path)
    label = s.string("label", default=path.rsplit(".", 1)[-1])
    v_dc = s.number("v_dc", default=0.0)
    u_rf = s.number("u_rf", default=0.0)
    raw = s.raw("weights")
    if raw is _MISSING:
        raise ConfigError("required key is missing",
                          key_path=f"{path}.weights")
    sparse = _index_table(raw, f"{path}.weights")
    s.finish()
    row = [0.0] * 25
    for j, g in sparse.items():
        row[j - 1] = g
    return Electrode(label=label, v_dc=v_dc, u_rf=u_rf), tuple(row)


def _parse_multipole(data: dict) -> MultipoleSection:
    s = _Section(data, "multipole")
    raw_amp = s.raw("amplitudes")
    raw_el = s.raw("electrodes")
    raw_m = s.raw("M")
    s.finish()
    if (raw_amp is _MISSING) == (raw_el is _MISSING):
        raise ConfigError(
            "exactly one of [multipole.amplitudes] / "
            "[[multipole.electrodes]] is required", key_path="multipole")
    m = {} if raw_m is _MISSING else _index_table(raw_m, "multipole.M")
    if raw_amp is not _MISSING:
        a = _Section(raw_amp if isinstance(raw_amp, dict) else {},
                     "multipole.amplitudes")
        if not isinstance(raw_amp, dict):
            raise ConfigError("expected a table",
                              key_path="multipole.amplitudes")
        raw_u = a.raw("U")
        raw_v = a.raw("V")
        a.finish()
        amp = {
            "U": {} if raw_u is _MISSING
            else _index_table(raw_u, "multipole.amplitudes.U"),
            "V": {} if raw_v is _MISSING
            else _index_table(raw_v, "multipole.amplitudes.V"),
        }
        return MultipoleSection(amplitudes=amp, electrodes=None, M=m)
    if not (isinstance(raw_el, list) and raw_el
            and all(isinstance(e, dict) for e in raw_el)):
        raise ConfigError("expected an array of electrode tables",
                          key_path="multipole.electrodes")
    pairs = [_parse_electrode(e, f"multipole.electrodes[{i}]")
             for i, e in enumerate(raw_el)]
    cfg = ElectrodeConfig(electrodes=tuple(p[0] for p in pairs),
                          weights=tuple(p[1] for p in pairs))
    return MultipoleSection(amplitudes=None, electrodes=cfg, M=m)


_DIRECT_ALPHAS = ("alpha2", "alpha3", "alpha21", "alpha22", "alpha4",
                  "alpha5", "alpha6", "alpha7", "alpha8", "alpha2x",
                  "alpha2y")


def _parse_model(data: dict) -> ModelSection:
    s = _Section(data, "model")
    drive_axis = s.string("drive_axis", default="z", choices=set(AXES))
    raw_mu = s.raw("mu")
    if raw_mu is _MISSING:
        mu = (0.0, 0.0, 0.0)
    elif isinstance(raw_mu, (int, float)) and not isinstance(raw_mu, bool):
        if not (math.isfinite(raw_mu) and raw_mu >= 0):
            raise ConfigError("must be finite and >= 0",
                              key_path="model.mu")
        mu = (float(raw_mu),) * 3
    elif (isinstance(raw_mu, list) and len(raw_mu) == 3
          and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                  and math.isfinite(v) and v >= 0 for v in raw_mu)):
        mu = tuple(float(v) for v in raw_mu)
    else:
        raise ConfigError(
            "expected a damping rate or [mu_x, mu_y, mu_z], each >= 0",
            key_path="model.mu")
    k = s.number("k", default=0.0)
    coupling = s.string("coupling", default="uncoupled",
                        choices={"uncoupled", "lumped", "explicit"})
    coupling_value = s.number("coupling_value", default=None)
    window_edge_hz = s.number("window_edge_hz", default=250.0,
                              positive=True)
    partner_b = s.number("partner_b_m", default=None, nonnegative=True)
    partner_c = s.number("partner_c_m", default=None, nonnegative=True)
    raw_direct = s.raw("direct")
    s.finish()

    if coupling == "lumped":
        if coupling_value is None:
            raise ConfigError("required when coupling = 'lumped'",
                              key_path="model.coupling_value")
    elif coupling_value is not None:
        raise ConfigError("only allowed when coupling = 'lumped'",
                          key_path="model.coupling_value")
    if coupling != "explicit":
        for name, value in (("partner_b_m", partner_b),
                            ("partner_c_m", partner_c)):
            if value is not None:
                raise ConfigError("only allowed when coupling = 'explicit'",
                                  key_path=f"model.{name}")

    direct = None
    if raw_direct is not _MISSING:
        if not isinstance(raw_direct, dict):
            raise ConfigError("expected a table", key_path="model.direct")
        d = _Section(raw_direct, "model.direct")
        kwargs = {
            "axis": drive_axis,
            "omega0": TWO_PI * d.number("omega0_hz", positive=True),
            "omega0x": TWO_PI * d.number("omega0x_hz", default=0.0,
                                         nonnegative=True),
            "omega0y": TWO_PI * d.number("omega0y_hz", default=0.0,
                                         nonnegative=True),
            "mu": mu[AXES.index(drive_axis)],
            "k": k,
        }
        for name in _DIRECT_ALPHAS:
            kwargs[name] = d.number(name, default=0.0)
        d.finish()
        direct = AxisCoefficients(**kwargs)

    return ModelSection(drive_axis=drive_axis, mu=mu, k=k,
                        coupling=coupling,
                        coupling_value=coupling_value or 0.0,
                        window_edge=TWO_PI * window_edge_hz,
                        partner_b=partner_b or 0.0,
                        partner_c=partner_c or 0.0, direct=direct)


def _parse_protocol(data: dict) -> ProtocolSection:
    s = _Section(data, "protocol")
    out = ProtocolSection(
        start_hz=s.number("start_hz", positive=True),
        end_hz=s.number("end_hz", positive=True),
        step_hz=s.number("step_hz", positive=True),
        settle_s=s.number("settle_s", positive=True),
        measure_s=s.number("measure_s", positive=True),
        direction=s.string("direction", default="positive",
                           choices={"positive", "negative"}),
        reset_each_step=s.boolean("reset_each_step", default=False),
        rtol=s.number("rtol", default=1e-11, positive=True),
        images=s.boolean("images", default=False),
        image_sigma_window_hz=s.number("image_sigma_window_hz",
                                       default=50.0, positive=True),
        image_plane=s.string("image_plane", default="xz",
                             choices={"xy", "xz", "yz"}),
        image_bins=s.integer("image_bins", default=64, minimum=1))
    s.finish()
    return out


def _parse_response(data: dict) -> ResponseSection:
    s = _Section(data, "response")
    lo = s.number("sigma_min_hz")
    hi = s.number("sigma_max_hz")
    n = s.integer("n_points", default=801, minimum=2)
    s.finish()
    if not hi > lo:
        raise ConfigError("sigma_max_hz must exceed sigma_min_hz",
                          key_path="response.sigma_max_hz")
    return ResponseSection(sigma_min=TWO_PI * lo, sigma_max=TWO_PI * hi,
                           n_points=n)


def _parse_simulate(data: dict) -> SimulateSection:
    s = _Section(data, "simulate")
    out = SimulateSection(
        drive_omega=TWO_PI * s.number("freq_hz", positive=True),
        duration_s=s.number("duration_s", positive=True),
        n_samples=s.integer("n_samples", default=None, minimum=2),
        rtol=s.number("rtol", default=1e-11, positive=True),
        image=s.boolean("image", default=False),
        image_plane=s.string("image_plane", default="xz",
                             choices={"xy", "xz", "yz"}),
        image_bins=s.integer("image_bins", default=64, minimum=1))
    s.finish()
    return out


def _parse_fit(data: dict) -> FitSection:
    s = _Section(data, "fit")
    robust = s.boolean("robust", default=False)
    raw_fixed = s.raw("fixed")
    s.finish()
    fixed = {}
    if raw_fixed is not _MISSING:
        if not isinstance(raw_fixed, dict):
            raise ConfigError("expected a table", key_path="fit.fixed")
        f = _Section(raw_fixed, "fit.fixed")
        for name in ("mu", "k"):
            v = f.number(name, default=None, positive=True)
            if v is not None:
                fixed[name] = v
        f.finish()
    return FitSection(robust=robust, fixed=fixed)


def _parse_output(data: dict) -> OutputSection:
    s = _Section(data, "output")
    out = OutputSection(
        directory=s.string("dir", default="."),
        coeffs=s.string("coeffs", default="coeffs.txt"),
        response=s.string("response", default="response.csv"),
        sweep=s.string("sweep", default="sweep.csv"),
        trajectory=s.string("trajectory", default="trajectory.csv"),
        image=s.string("image", default="trajectory.pgm"),
        fit_report=s.string("fit_report", default="fit_report.txt"),
        fit_curve=s.string("fit_curve", default="fit_curve.csv"))
    s.finish()
    return out


# ------------------------------------------------------------ run config

@dataclass(frozen=True)
class RunConfig:
    """Parsed, validated configuration plus the digest of the exact
    file bytes it came from (embedded in every emitted artifact)."""

    digest: str
    trap: TrapSection | None
    multipole: MultipoleSection | None
    model: ModelSection | None
    protocol: ProtocolSection | None
    response: ResponseSection | None
    simulate: SimulateSection | None
    fit: FitSection
    output: OutputSection

    def require(self, *names: str):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ConfigError(
                f"this command needs the [{missing[0]}] section",
                key_path=missing[0])

    def multipole_coefficients(self) -> MultipoleCoefficients:
        self.require("trap", "multipole")
        mp, trap = self.multipole, self.trap
        if mp.amplitudes is not None:
            return MultipoleCoefficients.from_sparse(
                r0=trap.r0, omega_rf=trap.omega_rf,
                U=mp.amplitudes["U"], V=mp.amplitudes["V"], M=mp.M)
        u_star, v_star = aggregate_electrodes(mp.electrodes)
        m = [1.0] * 25
        for j, v in mp.M.items():
            m[j - 1] = v
        return MultipoleCoefficients(r0=trap.r0, omega_rf=trap.omega_rf,
                                     U_star=tuple(map(float, u_star)),
                                     V_star=tuple(map(float, v_star)),
                                     M=tuple(m))

    def _check_model_source(self):
        self.require("model")
        if self.model.direct is not None and self.multipole is not None:
            raise ConfigError(
                "[model.direct] and [multipole] both present; the model "
                "must come from exactly one source", key_path="model")
        if self.model.direct is None and self.multipole is None:
            raise ConfigError(
                "the model needs [model.direct] or [trap] + [multipole]",
                key_path="model")

    def axis_coefficients(self) -> AxisCoefficients:
        """Driven-axis coefficients from whichever source the file
        defines."""
        self._check_model_source()
        m = self.model
        if m.direct is not None:
            return m.direct
        return derive_axis(self.multipole_coefficients(), self.trap.params,
                           axis=m.drive_axis, mu=m.mu_driven, k=m.k)

    def response_inputs(self) -> ResponseInputs:
        coeffs = self.axis_coefficients()
        m = self.model
        if m.coupling == "lumped":
            return ResponseInputs.with_lumped(coeffs, m.coupling_value,
                                              window_edge=m.window_edge)
        if m.coupling == "explicit":
            return ResponseInputs.with_amplitudes(coeffs, b=m.partner_b,
                                                  c=m.partner_c)
        return ResponseInputs.uncoupled(coeffs)

    def model3d(self, drive_omega: float = 0.0):
        self._check_model_source()
        m = self.model
        if m.direct is not None:
            return model3d_from_axis_coefficients(m.direct, mu=m.mu,
                                                  drive_omega=drive_omega)
        return build_model3d(self.multipole_coefficients(),
                             self.trap.params, mu=m.mu,
                             drive_axis=m.drive_axis, drive_k=m.k,
                             drive_omega=drive_omega)


_PARSERS = {
    "trap": _parse_trap,
    "multipole": _parse_multipole,
    "model": _parse_model,
    "protocol": _parse_protocol,
    "response": _parse_response,
    "simulate": _parse_simulate,
    "fit": _parse_fit,
    "output": _parse_output,
}


def parse_config(text_bytes: bytes) -> RunConfig:
    """Validate raw TOML bytes into a RunConfig."""
    try:
        raw = tomllib.loads(text_bytes.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config is not UTF-8 text: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    unknown = sorted(set(raw) - set(_PARSERS))
    if unknown:
        raise ConfigError("unknown section", key_path=unknown[0])
    parsed = {}
    for name, parser in _PARSERS.items():
        if name in raw:
            if not isinstance(raw[name], (dict,)):
                raise ConfigError("expected a table", key_path=name)
            parsed[name] = parser(raw[name])
    return RunConfig(
        digest=hashlib.sha256(text_bytes).hexdigest()[:16],
        trap=parsed.get("trap"),
        multipole=parsed.get("multipole"),
        model=parsed.get("model"),
        protocol=parsed.get("protocol"),
        response=parsed.get("response"),
        simulate=parsed.get("simulate"),
        fit=parsed.get("fit", FitSection()),
        output=parsed.get("output", OutputSection()))


def load_config(path: str) -> RunConfig:
    """Read and validate a config file."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IOFormatError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data)
