"""End-to-end command-line checks: config schema enforcement, exit
codes, artifact headers, byte-level determinism, and a noiseless fit
roundtrip through real files."""

import math
import subprocess
import sys

import numpy as np
import pytest

from _helpers import ALPHA3_Z, K_Z, MU_Z, W0Z
from multiduff import cli, estimation
from multiduff import io as mio
from multiduff.config import load_config, parse_config
from multiduff.errors import ConfigError

TWO_PI = 2.0 * math.pi

DIRECT_MODEL = """
[model]
drive_axis = "z"
mu = 177.1
k = 7.5e4

[model.direct]
omega0_hz = 191.7e3
alpha3 = 0.1959e18
"""

QUADRUPOLE = """
[trap]
mass_amu = 40.0
r0_m = 8.0e-4
omega_rf_hz = 15.0e6

[multipole.amplitudes]
U = { 7 = 46.982776545832195 }
V = { 7 = -1.7769771389425617, 9 = -1.7675926534843875 }

[model]
mu = [0.0, 0.0, 177.1]
k = 7.5e4
"""


def write_config(tmp_path, body, name="run.toml"):
    path = tmp_path / name
    path.write_text(body, encoding="utf-8")
    return str(path)


def run(argv, capsys=None):
    code = cli.main(argv)
    if capsys is None:
        return code, "", ""
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestConfig:
    def test_digest_tracks_bytes(self):
        a = parse_config(b"[fit]\nrobust = true\n")
        b = parse_config(b"[fit]\nrobust = false\n")
        assert a.digest != b.digest
        assert len(a.digest) == 16

    def test_mass_exclusivity(self):
        with pytest.raises(ConfigError, match="mass_amu / mass_kg"):
            parse_config(b"[trap]\nmass_amu = 40\nmass_kg = 6.6e-26\n"
                         b"r0_m = 8e-4\nomega_rf_hz = 15e6\n")
        with pytest.raises(ConfigError, match="mass_amu / mass_kg"):
            parse_config(b"[trap]\nr0_m = 8e-4\nomega_rf_hz = 15e6\n")

    def test_unknown_key_names_path(self):
        with pytest.raises(ConfigError, match=r"trap\.bogus"):
            parse_config(b"[trap]\nmass_amu = 40\nr0_m = 8e-4\n"
                         b"omega_rf_hz = 15e6\nbogus = 1\n")
        with pytest.raises(ConfigError, match="junk"):
            parse_config(b"[junk]\nx = 1\n")

    def test_type_enforcement(self):
        with pytest.raises(ConfigError, match=r"model\.k"):
            parse_config(b"[model]\nk = true\n")
        with pytest.raises(ConfigError, match=r"fit\.robust"):
            parse_config(b"[fit]\nrobust = 1\n")
        with pytest.raises(ConfigError, match=r"response\.n_points"):
            parse_config(b"[response]\nsigma_min_hz = 0.0\n"
                         b"sigma_max_hz = 1.0\nn_points = 2.5\n")

    def test_mu_forms(self):
        scalar = parse_config(DIRECT_MODEL.encode())
        assert scalar.model.mu == (177.1, 177.1, 177.1)
        triple = parse_config(b"[model]\nmu = [1.0, 2.0, 3.0]\n")
        assert triple.model.mu == (1.0, 2.0, 3.0)
        assert triple.model.mu_driven == 3.0
        with pytest.raises(ConfigError, match=r"model\.mu"):
            parse_config(b"[model]\nmu = [1.0, 2.0]\n")
        with pytest.raises(ConfigError, match=r"model\.mu"):
            parse_config(b"[model]\nmu = -1.0\n")

    def test_coupling_value_rules(self):
        with pytest.raises(ConfigError, match="coupling_value"):
            parse_config(b"[model]\ncoupling = 'lumped'\n")
        with pytest.raises(ConfigError, match="coupling_value"):
            parse_config(b"[model]\ncoupling_value = 1e18\n")

    def test_hz_conversion_at_boundary(self):
        cfg = parse_config(
            b"[model]\nwindow_edge_hz = 250.0\n\n[response]\n"
            b"sigma_min_hz = -10.0\nsigma_max_hz = 10.0\n")
        assert cfg.model.window_edge == pytest.approx(TWO_PI * 250.0)
        assert cfg.response.sigma_min == pytest.approx(-TWO_PI * 10.0)

    def test_direct_model_round_trip(self):
        cfg = parse_config(DIRECT_MODEL.encode())
        coeffs = cfg.axis_coefficients()
        assert coeffs.omega0 == pytest.approx(W0Z)
        assert coeffs.mu == pytest.approx(MU_Z)
        assert coeffs.alpha3 == pytest.approx(ALPHA3_Z)
        assert coeffs.k == pytest.approx(K_Z)

    def test_derived_model_matches_reference(self):
        cfg = parse_config(QUADRUPOLE.encode())
        coeffs = cfg.axis_coefficients()
        assert coeffs.omega0 == pytest.approx(W0Z, rel=1e-12)
        assert coeffs.alpha3 == 0.0

    def test_model_needs_exactly_one_source(self):
        both = QUADRUPOLE + "\n[model.direct]\nomega0_hz = 191.7e3\n"
        with pytest.raises(ConfigError, match="exactly one source"):
            parse_config(both.encode()).axis_coefficients()
        with pytest.raises(ConfigError, match="model"):
            parse_config(b"[model]\nk = 1.0\n").axis_coefficients()

    def test_electrode_route(self):
        cfg = parse_config(b"""
[trap]
mass_amu = 40.0
r0_m = 8.0e-4
omega_rf_hz = 15.0e6

[[multipole.electrodes]]
label = "rf"
u_rf = 100.0
weights = { 7 = 0.25 }

[[multipole.electrodes]]
label = "dc"
v_dc = -2.0
weights = { 7 = 0.5, 9 = 0.5 }
""")
        mc = cfg.multipole_coefficients()
        assert mc.U_star[6] == pytest.approx(25.0)
        assert mc.V_star[6] == pytest.approx(-1.0)
        assert mc.V_star[8] == pytest.approx(-1.0)

    def test_bad_multipole_index(self):
        with pytest.raises(ConfigError, match=r"U\.26"):
            parse_config(b"[multipole.amplitudes]\nU = { 26 = 1.0 }\n")

    def test_missing_file(self, tmp_path):
        from multiduff.errors import IOFormatError
        with pytest.raises(IOFormatError, match="cannot read"):
            load_config(str(tmp_path / "nope.toml"))


class TestExitCodes:
    def test_malformed_config_names_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "[model]\nbad_key = 1\n")
        code, _, err = run(["response", "-c", cfg], capsys)
        assert code == 1
        assert "model.bad_key" in err

    def test_usage_error(self, capsys):
        code, _, err = run(["bogus"], capsys)
        assert code == 1
        assert "invalid choice" in err

    def test_missing_config_file(self, tmp_path, capsys):
        code, _, err = run(["response", "-c", str(tmp_path / "no.toml")],
                           capsys)
        assert code == 3

    def test_missing_section(self, tmp_path, capsys):
        cfg = write_config(tmp_path, DIRECT_MODEL)
        code, _, err = run(["response", "-c", cfg], capsys)
        assert code == 1
        assert "response" in err

    def test_numerical_failure(self, tmp_path, capsys):
        # dc-only axial anti-confinement: the derivation fails after
        # the config itself validates
        cfg = write_config(tmp_path, """
[trap]
mass_amu = 40.0
r0_m = 8.0e-4
omega_rf_hz = 15.0e6

[multipole.amplitudes]
V = { 7 = 1.7769771389425617 }

[model]
k = 7.5e4
mu = 177.1

[response]
sigma_min_hz = -10.0
sigma_max_hz = 10.0
n_points = 11
""")
        code, _, err = run(["response", "-c", cfg, "-o", str(tmp_path)],
                           capsys)
        assert code == 2

    def test_missing_data_file(self, tmp_path, capsys):
        cfg = write_config(tmp_path, DIRECT_MODEL)
        code, _, err = run(["fit", "-c", cfg, str(tmp_path / "no.csv")],
                           capsys)
        assert code == 3

    def test_empty_data_file(self, tmp_path, capsys):
        cfg = write_config(tmp_path, DIRECT_MODEL)
        data = tmp_path / "empty.csv"
        data.write_text("")
        code, _, err = run(["fit", "-c", cfg, str(data)], capsys)
        assert code == 3
        assert "no data rows" in err


RESPONSE_BODY = DIRECT_MODEL + """
[response]
sigma_min_hz = -200.0
sigma_max_hz = 400.0
n_points = 201
"""


class TestResponseCommand:
    def test_artifact_and_determinism(self, tmp_path, capsys):
        cfg = write_config(tmp_path, RESPONSE_BODY)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert run(["response", "-c", cfg, "-o", str(out_a)], capsys)[0] == 0
        assert run(["response", "-c", cfg, "-o", str(out_b)], capsys)[0] == 0
        text = (out_a / "response.csv").read_bytes()
        assert text == (out_b / "response.csv").read_bytes()
        lines = text.decode().splitlines()
        digest = load_config(cfg).digest
        assert lines[0] == "# artifact-version: 0.1.0"
        assert lines[1] == f"# config-digest: sha256:{digest}"
        assert lines[2] == "sigma_hz,a_m,branch,stable"

    def test_peak_location(self, tmp_path, capsys):
        cfg = write_config(tmp_path, RESPONSE_BODY)
        code, out, _ = run(["response", "-c", cfg, "-o", str(tmp_path)],
                           capsys)
        assert code == 0
        rows = [ln.split(",") for ln in
                (tmp_path / "response.csv").read_text().splitlines()[3:]]
        stable = [(float(s), float(a)) for s, a, _, flag in rows
                  if flag == "true"]
        sigma_peak, a_peak = max(stable, key=lambda t: t[1])
        # the 3 Hz grid brackets, not hits, the true maximum
        assert a_peak == pytest.approx(K_Z / (2 * MU_Z * W0Z), rel=5e-3)
        assert sigma_peak == pytest.approx(300.0, abs=3.1)

    def test_linear_model_single_branch(self, tmp_path, capsys):
        body = RESPONSE_BODY.replace("alpha3 = 0.1959e18", "alpha3 = 0.0")
        cfg = write_config(tmp_path, body, name="lin.toml")
        code, _, _ = run(["response", "-c", cfg, "-o", str(tmp_path)],
                         capsys)
        assert code == 0
        rows = [ln.split(",") for ln in
                (tmp_path / "response.csv").read_text().splitlines()[3:]]
        assert all(r[2] == "0" and r[3] == "true" for r in rows)
        sigma_peak = max(((float(s), float(a)) for s, a, *_ in rows),
                         key=lambda t: t[1])[0]
        assert abs(sigma_peak) <= 3.1


class TestCoeffsCommand:
    def test_quadrupole_report(self, tmp_path, capsys):
        cfg = write_config(tmp_path, QUADRUPOLE)
        code, out, _ = run(["coeffs", "-c", cfg, "-o", str(tmp_path)],
                           capsys)
        assert code == 0
        report = (tmp_path / "coeffs.txt").read_text().splitlines()
        values = dict(ln.split(" = ") for ln in report[2:])
        assert float(values["max_relative_discrepancy"]) < 1e-9
        for tag in ("closed_form", "taylor"):
            assert float(values[f"{tag}.alpha3"]) == 0.0
            assert float(values[f"{tag}.omega0"]) == pytest.approx(
                W0Z, rel=1e-9)
        assert "max_relative_discrepancy" in out

    def test_rejects_direct_model(self, tmp_path, capsys):
        cfg = write_config(tmp_path, DIRECT_MODEL)
        code, _, err = run(["coeffs", "-c", cfg], capsys)
        assert code == 1


class TestSimulateCommand:
    BODY = DIRECT_MODEL + """
[simulate]
freq_hz = 191.7e3
duration_s = 2.0e-3
n_samples = 2000
image = true
image_plane = "xz"
image_bins = 16
"""

    def test_files_and_determinism(self, tmp_path, capsys):
        cfg = write_config(tmp_path, self.BODY)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        code, out, _ = run(["simulate", "-c", cfg, "-o", str(out_a)], capsys)
        assert code == 0
        assert "steady amplitude" in out
        assert run(["simulate", "-c", cfg, "-o", str(out_b)], capsys)[0] == 0
        for name in ("trajectory.csv", "trajectory.pgm"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
        header = (out_a / "trajectory.csv").read_text().splitlines()
        assert header[2] == "t_s,x_m,y_m,z_m,vx_m_s,vy_m_s,vz_m_s"
        # n_samples intervals, so both endpoints appear
        assert len(header) == 3 + 2000 + 1
        pgm = (out_a / "trajectory.pgm").read_bytes()
        assert pgm.startswith(b"P5\n# artifact-version: 0.1.0\n")
        assert b"16 16" in pgm

    def test_uncoupled_drive_stays_axial(self, tmp_path, capsys):
        cfg = write_config(tmp_path, self.BODY)
        code, out, _ = run(["simulate", "-c", cfg, "-o", str(tmp_path)],
                           capsys)
        assert code == 0
        assert "a_x = 0.000000e+00" in out
        assert "a_y = 0.000000e+00" in out


class TestSweepCommand:
    BODY = DIRECT_MODEL + """
[protocol]
start_hz = 191.5e3
end_hz = 191.9e3
step_hz = 200.0
settle_s = 1.0e-3
measure_s = 3.0e-4
direction = "positive"
"""

    def test_csv_shape(self, tmp_path, capsys):
        cfg = write_config(tmp_path, self.BODY)
        code, out, _ = run(["sweep", "-c", cfg, "-o", str(tmp_path)], capsys)
        assert code == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert lines[2] == "freq_hz,sigma_hz,a_x_m,a_y_m,a_z_m,converged"
        rows = [ln.split(",") for ln in lines[3:]]
        assert len(rows) == 3
        assert [float(r[0]) for r in rows] == [191500.0, 191700.0, 191900.0]
        # driven hardening response grows toward the fold
        a_z = [float(r[4]) for r in rows]
        assert a_z[0] < a_z[1] < a_z[2]
        assert all(float(r[2]) == 0.0 for r in rows)


class TestFitCommand:
    def test_noiseless_roundtrip(self, tmp_path, capsys):
        from _helpers import paper_z_coeffs
        cfg = write_config(tmp_path, DIRECT_MODEL)
        freq = (W0Z + TWO_PI * np.arange(-100.0, 350.0, 10.0)) / TWO_PI
        meas = estimation.synthesize_measurement(
            paper_z_coeffs(), freq, direction="positive", noise=0.0)
        data = tmp_path / "scan.csv"
        mio.write_measurement_csv(str(data), meas,
                                  load_config(cfg).digest)
        code, out, _ = run(["fit", "-c", cfg, str(data), "-o",
                            str(tmp_path)], capsys)
        assert code == 0
        report = dict(
            ln.split(" = ")
            for ln in (tmp_path / "fit_report.txt").read_text().splitlines()
            if " = " in ln)
        assert report["mode"] == "uncoupled"
        mu = float(report["mu"].split(" +- ")[0])
        k = float(report["k"].split(" +- ")[0])
        alpha = float(report["alpha_total"].split(" +- ")[0])
        assert mu == pytest.approx(MU_Z, rel=1e-4)
        assert k == pytest.approx(K_Z, rel=1e-4)
        assert alpha == pytest.approx(ALPHA3_Z, rel=1e-4)
        curve = (tmp_path / "fit_curve.csv").read_text().splitlines()
        assert curve[2] == "freq_hz,sigma_hz,a_m"
        assert len(curve) == 3 + meas.n_rows
        # fitted curve overlays the noiseless data
        amps = np.array([float(ln.split(",")[2]) for ln in curve[3:]])
        assert np.allclose(amps, meas.amplitude_m, rtol=1e-4)

    def test_explicit_mode_rejected(self, tmp_path, capsys):
        body = DIRECT_MODEL.replace(
            'k = 7.5e4', 'k = 7.5e4\ncoupling = "explicit"')
        cfg = write_config(tmp_path, body)
        data = tmp_path / "scan.csv"
        data.write_text("freq_hz,amplitude_m,axis,direction\n"
                        "191700.0,1e-6,z,positive\n")
        code, _, err = run(["fit", "-c", cfg, str(data)], capsys)
        assert code == 1
        assert "uncoupled" in err


def test_console_module_entry(tmp_path):
    cfg = write_config(tmp_path, RESPONSE_BODY)
    proc = subprocess.run(
        [sys.executable, "-m", "multiduff", "response", "-c", cfg,
         "-o", str(tmp_path)],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "response.csv").exists()
