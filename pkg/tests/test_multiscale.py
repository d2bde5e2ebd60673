"""Steady-state response of the driven axis: backbone and peak
relations, response-cubic roots, branch stability, fold locations, and
the envelope (slow-flow) equations."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _helpers import ALPHA3_Z, K_Z, MU_Z, W0X, W0Y, W0Z, paper_z_coeffs
from multiduff import multiscale as ms
from multiduff.coefficients import (AxisCoefficients,
                                    model3d_from_axis_coefficients)
from multiduff.dynamics import integrate, steady_amplitude
from multiduff.errors import ValidationError, ZeroAmplitudeError

TWO_PI = 2 * math.pi

A_PEAK = K_Z / (2 * MU_Z * W0Z)

# frozen outputs for the reference operating point, cross-checked below
# against an independent quartic-based oracle
SIGMA_PEAK = 1884.8863661578835
FOLD_LOW = 702.7204791661879
FOLD_HIGH = 1889.0555955720579

LUMPED_CHI = 4.5e18
WINDOW_EDGE = TWO_PI * 250.0


def reference_inputs(**over):
    return ms.ResponseInputs.uncoupled(paper_z_coeffs(**over))


def lumped_inputs(**over):
    return ms.ResponseInputs.with_lumped(paper_z_coeffs(**over),
                                         LUMPED_CHI,
                                         window_edge=WINDOW_EDGE)


def quartic_fold_oracle(coeffs):
    """Fold detunings by an independent route.

    The double-root condition of the response cubic eliminates sigma
    and leaves a quartic in A = a^2,

        mu^2 A^4 - k^2/(4 w0^2) A^3 + k^4/(64 w0^4 p^2) = 0,

    solved here with numpy's companion-matrix eigenvalues; each
    positive real root maps back through
    sigma = p A + k^2/(8 w0^2 p A^2)."""
    p = 3.0 * ms.alpha_uncoupled(coeffs) / (8.0 * coeffs.omega0)
    w2 = coeffs.omega0**2
    roots = np.roots([coeffs.mu**2, -coeffs.k**2 / (4.0 * w2), 0.0, 0.0,
                      coeffs.k**4 / (64.0 * w2**2 * p**2)])
    amps_sq = sorted(r.real for r in roots
                     if r.real > 0 and abs(r.imag) <= 1e-9 * abs(r.real))
    sig = sorted(p * A + coeffs.k**2 / (8.0 * w2 * p * A**2)
                 for A in amps_sq)
    return sig, amps_sq


# ------------------------------------------------- effective nonlinearity

def test_alpha_uncoupled_reduces_to_cubic_without_quadratic():
    c = paper_z_coeffs()
    assert c.alpha2 == 0.0
    assert ms.alpha_uncoupled(c) == ALPHA3_Z
    c2 = paper_z_coeffs(alpha2=3e8)
    expected = ALPHA3_Z - 10.0 * (3e8)**2 / (9.0 * W0Z**2)
    assert ms.alpha_uncoupled(c2) == pytest.approx(expected, rel=1e-15)


def test_alpha_total_hand_arithmetic():
    # numbers chosen so every piece is exact mental arithmetic:
    # alpha_u = 2e15 - 10*(3e8)^2/(9e12)        = 2e15 - 1e5
    # X = 2*3e14/3 - 2*3e9*2e9/(3*(1e6)^2)      = 2e14 - 4e6
    # Y = 2*6e15/3 - 2*5e9*3e9/(3*(1e6)^2)      = 4e15 - 1e7
    # total = alpha_u + X*(0.25)^2 + Y*(0.5)^2
    c = AxisCoefficients(axis="z", omega0=1e6, alpha2=3e8, alpha3=2e15,
                         alpha4=6e15, alpha5=3e14, alpha7=5e9, alpha8=3e9,
                         alpha2x=2e9, alpha2y=3e9, omega0x=1e6, omega0y=1e6)
    got = ms.alpha_total(c, b_over_a=0.5, c_over_a=0.25)
    assert got == pytest.approx(3012499997150000.0, rel=1e-14)
    assert ms.alpha_total(c) == ms.alpha_uncoupled(c)
    with pytest.raises(ValidationError):
        ms.alpha_total(c, b_over_a=math.inf)


def test_lumped_window_effective_cubic_sum():
    # inside the window the backbone slope corresponds to the summed
    # cubic coefficient 0.1959e18 + 4.5e18 = 4.6959e18
    a = 1e-6
    slope = 8.0 * W0Z * ms.backbone(lumped_inputs(), a) / (3.0 * a * a)
    assert slope == pytest.approx(4.6959e18, rel=1e-12)


# ---------------------------------------------------------- backbone, peak

def test_backbone_reference_values():
    inp = reference_inputs()
    expected = 3.0 * ALPHA3_Z * 1e-8 / (8.0 * W0Z)
    assert ms.backbone(inp, 1e-4) == pytest.approx(expected, rel=1e-13)
    assert ms.backbone(inp, 1e-4) == pytest.approx(609.907, abs=1e-3)
    assert ms.backbone(inp, A_PEAK) == pytest.approx(SIGMA_PEAK, rel=1e-12)
    assert ms.backbone(inp, A_PEAK) / TWO_PI == pytest.approx(300.0,
                                                              abs=0.05)
    # bare coefficient sets are accepted directly
    assert ms.backbone(paper_z_coeffs(), 1e-4) == ms.backbone(inp, 1e-4)


def test_backbone_vanishes_without_nonlinearity():
    inp = reference_inputs(alpha3=0.0)
    for a in (1e-6, 1e-4, 1e-2):
        assert ms.backbone(inp, a) == 0.0
    with pytest.raises(ValidationError):
        ms.backbone(inp, 0.0)


def test_peak_amplitude_value_and_scaling():
    a_m = ms.peak_amplitude(K_Z, MU_Z, W0Z)
    assert a_m == pytest.approx(1.758e-4, rel=1e-3)
    assert ms.peak_amplitude(2 * K_Z, MU_Z, W0Z) == 2 * a_m
    assert ms.peak_amplitude(K_Z, 2 * MU_Z, W0Z) == a_m / 2
    with pytest.raises(ValidationError):
        ms.peak_amplitude(K_Z, 0.0, W0Z)


def test_alpha_from_peak_inverts_backbone():
    inp = reference_inputs()
    got = ms.alpha_from_peak(A_PEAK, ms.backbone(inp, A_PEAK), W0Z)
    assert got == pytest.approx(ALPHA3_Z, rel=1e-12)
    # softening sign survives the round trip
    soft = reference_inputs(alpha3=-ALPHA3_Z)
    sig = ms.backbone(soft, A_PEAK)
    assert sig < 0
    assert ms.alpha_from_peak(A_PEAK, sig, W0Z) == pytest.approx(
        -ALPHA3_Z, rel=1e-12)
    with pytest.raises(ValidationError):
        ms.alpha_from_peak(0.0, sig, W0Z)


# -------------------------------------------------------- steady detunings

def test_steady_detuning_peak_is_degenerate():
    inp = reference_inputs()
    pair = ms.steady_detuning(A_PEAK, inp)
    assert pair is not None
    assert pair[0] == pytest.approx(SIGMA_PEAK, rel=1e-9)
    assert pair[1] == pytest.approx(SIGMA_PEAK, rel=1e-9)
    assert ms.steady_detuning(1.01 * A_PEAK, inp) is None


def test_steady_detuning_splits_below_peak():
    inp = reference_inputs()
    a = 0.5 * A_PEAK
    lo_rate = math.sqrt((K_Z / (2.0 * W0Z * a))**2 - MU_Z**2)
    hi, lo = ms.steady_detuning(a, inp)
    n = ms.backbone(inp, a)
    assert hi == pytest.approx(n + lo_rate, rel=1e-12)
    assert lo == pytest.approx(n - lo_rate, rel=1e-12)
    with pytest.raises(ValidationError):
        ms.steady_detuning(0.0, inp)


def test_steady_detuning_roundtrips_through_response():
    inp = reference_inputs()
    for a in (1e-5, 5e-5, 1.2e-4, 1.7e-4):
        for sigma in ms.steady_detuning(a, inp):
            pts = ms.response_amplitudes(sigma, inp)
            assert min(abs(p.a - a) for p in pts) <= 1e-9 * a


# ---------------------------------------------------------- response roots

def test_linear_resonance_amplitude():
    inp = reference_inputs(alpha3=0.0)
    pts = ms.response_amplitudes(0.0, inp)
    assert len(pts) == 1
    assert pts[0].a == pytest.approx(K_Z / (2.0 * W0Z * MU_Z), rel=1e-12)
    assert pts[0].stable and not pts[0].marginal


def test_root_counts_around_the_fold_interval():
    inp = reference_inputs()
    assert len(ms.response_amplitudes(TWO_PI * 50.0, inp)) == 1
    assert len(ms.response_amplitudes(-TWO_PI * 80.0, inp)) == 1
    assert len(ms.response_amplitudes(TWO_PI * 320.0, inp)) == 1
    mid = ms.response_amplitudes(0.5 * (FOLD_LOW + FOLD_HIGH), inp)
    assert len(mid) == 3
    assert [p.branch for p in mid] == [0, 1, 2]
    assert [p.stable for p in mid] == [True, False, True]
    assert len(ms.response_amplitudes(FOLD_LOW - 50.0, inp)) == 1
    assert len(ms.response_amplitudes(FOLD_HIGH + 50.0, inp)) == 1


def test_response_points_satisfy_forcing_balance():
    # every returned amplitude must satisfy
    # w0^2 a^2 [(N(a) - sigma)^2 + mu^2] = k^2/4
    # and feed back through steady_detuning to the sigma it came from
    rng = np.random.default_rng(7)
    for _ in range(60):
        w0 = TWO_PI * rng.uniform(5e4, 5e6)
        mu = 10.0 ** rng.uniform(0.5, 3.5)
        k = 10.0 ** rng.uniform(2.0, 6.0)
        alpha3 = rng.choice([-1.0, 1.0]) * 10.0 ** rng.uniform(14.0, 19.0)
        alpha2 = rng.choice([-1.0, 0.0, 1.0]) * 10.0 ** rng.uniform(6, 10)
        c = AxisCoefficients(axis="z", omega0=w0, mu=mu, k=k,
                             alpha3=alpha3, alpha2=alpha2)
        inp = ms.ResponseInputs.uncoupled(c)
        a_pk = ms.peak_amplitude(k, mu, w0)
        scale = max(abs(ms.backbone(inp, a_pk)), 20.0 * mu)
        for sigma in rng.uniform(-2.0 * scale, 2.0 * scale, size=5):
            sigma = float(sigma)
            pts = ms.response_amplitudes(sigma, inp)
            assert 1 <= len(pts) <= 3
            for pt in pts:
                n = ms.backbone(inp, pt.a)
                dn = n - sigma
                resid = w0**2 * pt.a**2 * (dn * dn + mu * mu) - k * k / 4.0
                # recomputing N - sigma here loses up to
                # eps * (|N| + |sigma|)^2 against the k^2/4 balance
                cond = w0**2 * pt.a**2 * ((abs(n) + abs(sigma))**2
                                          + mu * mu)
                assert abs(resid) <= 1e-11 * max(cond, k * k / 4.0)
                back = ms.steady_detuning(pt.a, inp)
                assert back is not None
                assert min(abs(s - sigma) for s in back) <= (
                    1e-9 * max(abs(n) + abs(sigma), mu))


@settings(max_examples=150, deadline=None)
@given(st.floats(min_value=-2.5 * SIGMA_PEAK, max_value=2.5 * SIGMA_PEAK,
                 allow_nan=False))
def test_response_structure_over_detuning(sigma):
    inp = reference_inputs()
    pts = ms.response_amplitudes(sigma, inp)
    assert 1 <= len(pts) <= 3
    assert [p.branch for p in pts] == list(range(len(pts)))
    amps = [p.a for p in pts]
    assert amps == sorted(amps)
    assert all(a <= A_PEAK * (1.0 + 1e-12) for a in amps)
    marginal = any(p.marginal for p in pts)
    if len(pts) == 3 and not marginal:
        assert [p.stable for p in pts] == [True, False, True]
    if len(pts) == 1 and not marginal:
        assert pts[0].stable
    # away from the folds the count is exactly 3 inside, 1 outside
    near_fold = min(abs(sigma - FOLD_LOW), abs(sigma - FOLD_HIGH))
    if near_fold > 1e-6 * SIGMA_PEAK and not marginal:
        inside = FOLD_LOW < sigma < FOLD_HIGH
        assert len(pts) == (3 if inside else 1)


def test_response_curve_concatenates_grid():
    inp = reference_inputs()
    sigmas = [-500.0, 0.0, 900.0, 1200.0, 2500.0]
    pts = ms.response_curve(inp, sigmas)
    assert len(pts) == sum(len(ms.response_amplitudes(s, inp))
                           for s in sigmas)
    assert [p.sigma for p in pts[:1]] == [-500.0]


def test_response_accepts_bare_coefficients():
    pts_a = ms.response_amplitudes(500.0, paper_z_coeffs())
    pts_b = ms.response_amplitudes(500.0, reference_inputs())
    assert [p.a for p in pts_a] == [p.a for p in pts_b]


# ------------------------------------------------------------------- folds

def test_fold_points_match_quartic_oracle():
    cases = ({}, {"alpha3": 5e17, "mu": 50.0}, {"alpha3": -ALPHA3_Z},
             {"k": 2 * K_Z, "alpha2": 5e8})
    for over in cases:
        c = paper_z_coeffs(**over)
        folds = ms.fold_points(ms.ResponseInputs.uncoupled(c))
        oracle, _ = quartic_fold_oracle(c)
        assert len(folds) == len(oracle) == 2
        for f, o in zip(folds, oracle):
            assert f == pytest.approx(o, rel=1e-9)


def test_reference_fold_values():
    folds = ms.fold_points(reference_inputs())
    assert folds == pytest.approx([FOLD_LOW, FOLD_HIGH], rel=1e-12)
    assert FOLD_LOW < SIGMA_PEAK < FOLD_HIGH
    # the jump-down fold sits just above the backbone peak; the offset
    # is mu^2/(4 sigma_peak) to leading order, 2.2e-3 relative here
    assert abs(folds[1] / SIGMA_PEAK - 1.0) < 2.5e-3
    assert folds[1] - SIGMA_PEAK == pytest.approx(
        MU_Z**2 / (4.0 * SIGMA_PEAK), abs=0.05)
    # the jump-down amplitude is just below the peak amplitude
    _, amps_sq = quartic_fold_oracle(paper_z_coeffs())
    a_down = math.sqrt(amps_sq[1])
    assert a_down < A_PEAK
    assert a_down == pytest.approx(A_PEAK, rel=3e-3)


def test_softening_folds_mirror_hardening():
    hard = ms.fold_points(reference_inputs())
    soft = ms.fold_points(reference_inputs(alpha3=-ALPHA3_Z))
    assert soft == pytest.approx(sorted(-f for f in hard), rel=1e-9)


def test_folds_absent_when_monostable():
    assert ms.fold_points(reference_inputs(alpha3=0.0)) == []
    heavy = reference_inputs(mu=5e4)
    assert ms.fold_points(heavy) == []
    for shz in (-300.0, 0.0, 150.0, 300.0):
        pts = ms.response_amplitudes(TWO_PI * shz, heavy)
        assert len(pts) == 1 and pts[0].stable
    with pytest.raises(ValidationError):
        ms.fold_points(reference_inputs(mu=0.0))
    with pytest.raises(ValidationError):
        ms.fold_points(reference_inputs(k=0.0))


def test_stability_is_marginal_exactly_on_the_fold():
    c = paper_z_coeffs()
    inp = reference_inputs()
    sigs, amps_sq = quartic_fold_oracle(c)
    for sigma, A in zip(sigs, sorted(amps_sq)):
        stable, marginal = ms.stability(math.sqrt(A), sigma, inp)
        assert marginal
    stable, marginal = ms.stability(1e-5, 0.0, inp)
    assert stable and not marginal
    with pytest.raises(ValidationError):
        ms.stability(0.0, 0.0, inp)


# --------------------------------------------------------------- slow flow

def test_slow_flow_vanishes_at_every_fixed_point():
    for inp in (reference_inputs(), lumped_inputs()):
        for shz in (50.0, 200.0, 320.0, -80.0):
            sigma = TWO_PI * shz
            for pt in ms.response_amplitudes(sigma, inp):
                gamma = ms.fixed_point_phase(pt.a, sigma, inp)
                f1, f2 = ms.slow_flow(ms.SlowFlowState(pt.a, gamma),
                                      inp, sigma)
                s1 = max(pt.a * MU_Z, K_Z / (2.0 * W0Z))
                s2 = max(abs(sigma), MU_Z, K_Z / (2.0 * pt.a * W0Z))
                assert abs(f1) <= 1e-10 * s1
                assert abs(f2) <= 1e-10 * s2


def test_slow_flow_zero_amplitude_cases():
    inp = reference_inputs()
    with pytest.raises(ZeroAmplitudeError):
        ms.slow_flow(ms.SlowFlowState(0.0, 0.0), inp, 100.0)
    free = reference_inputs(k=0.0)
    f1, f2 = ms.slow_flow(ms.SlowFlowState(0.0, 0.0), free, 100.0)
    assert (f1, f2) == (0.0, 100.0)


def test_slow_flow_without_drive_is_pure_decay():
    free = reference_inputs(k=0.0)
    for a in (1e-6, 1e-4):
        f1, f2 = ms.slow_flow(ms.SlowFlowState(a, 1.3), free, 700.0)
        assert f1 == -a * MU_Z
        assert f2 == pytest.approx(700.0 - ms.backbone(free, a), rel=1e-12)


def test_fixed_point_phase_identities():
    inp = reference_inputs()
    # at the peak the response lags the drive by a quarter cycle
    assert ms.fixed_point_phase(A_PEAK, SIGMA_PEAK, inp) == pytest.approx(
        math.pi / 2.0, rel=1e-6)
    # the amplitude equation pins sin(gamma) on every branch
    sigma = TWO_PI * 200.0
    for pt in ms.response_amplitudes(sigma, inp):
        g = ms.fixed_point_phase(pt.a, sigma, inp)
        assert math.sin(g) * K_Z / (2.0 * W0Z) == pytest.approx(
            pt.a * MU_Z, rel=1e-10)
    flipped = reference_inputs(k=-K_Z)
    g_pos = ms.fixed_point_phase(1e-5, sigma, inp)
    g_neg = ms.fixed_point_phase(1e-5, sigma, flipped)
    assert g_neg == pytest.approx(math.remainder(g_pos + math.pi, TWO_PI),
                                  rel=1e-12)
    with pytest.raises(ValidationError):
        ms.fixed_point_phase(1e-5, sigma, reference_inputs(k=0.0))


def test_slow_flow_orbit_attracts_stable_branches():
    inp = reference_inputs()
    sigma = TWO_PI * 200.0
    lo, mid, hi = ms.response_amplitudes(sigma, inp)
    settle = 10.0 / MU_Z
    end = ms.slow_flow_orbit(ms.SlowFlowState(1e-5, 0.0), inp, sigma,
                             settle, 4000)
    assert end.a == pytest.approx(lo.a, rel=1e-3)
    start_hi = ms.SlowFlowState(1.8e-4,
                                ms.fixed_point_phase(hi.a, sigma, inp))
    end_hi = ms.slow_flow_orbit(start_hi, inp, sigma, settle, 4000)
    assert end_hi.a == pytest.approx(hi.a, rel=1e-3)
    with pytest.raises(ValidationError):
        ms.slow_flow_orbit(start_hi, inp, sigma, 0.0)


def test_slow_flow_orbit_free_decay_is_exponential():
    free = reference_inputs(k=0.0)
    t = 2.0 / MU_Z
    end = ms.slow_flow_orbit(ms.SlowFlowState(1e-4, 0.0), free, 0.0,
                             t, 2000)
    assert end.a == pytest.approx(1e-4 * math.exp(-MU_Z * t), rel=1e-9)


def test_slow_flow_matches_direct_integration():
    # single-branch detunings on both sides of the fold interval
    inp = reference_inputs()
    for shz in (50.0, 320.0):
        sigma = TWO_PI * shz
        pts = ms.response_amplitudes(sigma, inp)
        assert len(pts) == 1
        model = model3d_from_axis_coefficients(paper_z_coeffs(),
                                               drive_omega=W0Z + sigma)
        settle = integrate(model, 0.04, n_samples=2)
        period = TWO_PI / model.drive_omega
        traj = integrate(model, 30.0 * period, state=settle.final,
                         n_samples=30 * 64)
        est = steady_amplitude(traj)
        assert est.converged
        assert est.amplitude[2] == pytest.approx(pts[0].a, rel=2e-3)


# ------------------------------------------------------- coupling windows

def test_lumped_response_equals_uncoupled_beyond_window():
    lump, unc = lumped_inputs(), reference_inputs()
    for shz in (251.0, 300.0):
        pl = ms.response_amplitudes(TWO_PI * shz, lump)
        pu = ms.response_amplitudes(TWO_PI * shz, unc)
        assert [p.a for p in pl] == [p.a for p in pu]
        assert [p.stable for p in pl] == [p.stable for p in pu]


def test_lumped_response_differs_inside_window():
    lump, unc = lumped_inputs(), reference_inputs()
    for shz in (200.0, 250.0):
        pl = ms.response_amplitudes(TWO_PI * shz, lump)
        pu = ms.response_amplitudes(TWO_PI * shz, unc)
        assert [p.a for p in pl] != [p.a for p in pu]


def test_lumped_backbone_above_uncoupled_then_merges():
    lump, unc = lumped_inputs(), reference_inputs()
    # amplitudes that keep the lumped backbone inside the window
    a_edge = math.sqrt(WINDOW_EDGE * 8.0 * W0Z
                       / (3.0 * (ALPHA3_Z + LUMPED_CHI)))
    for a in (1e-6, 1e-5, 0.99 * a_edge):
        assert ms.backbone(lump, a) > ms.backbone(unc, a)
    for a in (1.2 * a_edge, 1e-4, 2e-4):
        assert ms.backbone(lump, a) == ms.backbone(unc, a)


def test_lumped_steady_detuning_lands_on_consistent_sides():
    # a branch whose detuning falls on the window side it was not
    # computed with has no steady state there and comes back as None;
    # at 6e-5 m both branches straddle the edge and the amplitude is
    # unreachable altogether
    lump = lumped_inputs()
    for a, expect in ((1e-5, 2), (3e-5, 1), (6e-5, 0)):
        pair = ms.steady_detuning(a, lump)
        assert pair is not None
        kept = [s for s in pair if s is not None]
        assert len(kept) == expect
        for sigma in kept:
            pts = ms.response_amplitudes(sigma, lump)
            assert min(abs(p.a - a) for p in pts) <= 1e-9 * a


def test_explicit_coupling_shifts_backbone_by_a_constant():
    c = paper_z_coeffs(alpha4=5e16, alpha5=9e14, alpha7=1e9, alpha8=3e9,
                       alpha2x=2e9, alpha2y=4e9)
    coupled = ms.ResponseInputs.with_amplitudes(c, b=2e-5, c=3e-5)
    bare = ms.ResponseInputs.uncoupled(c)
    diffs = [ms.backbone(coupled, a) - ms.backbone(bare, a)
             for a in (1e-6, 1e-5, 1e-4, 2e-4)]
    assert all(d == pytest.approx(diffs[0], rel=1e-9) for d in diffs)
    x = 2.0 * 9e14 / 3.0 - 2.0 * 3e9 * 2e9 / (3.0 * W0X**2)
    y = 2.0 * 5e16 / 3.0 - 2.0 * 1e9 * 4e9 / (3.0 * W0Y**2)
    q_c = 3.0 * (x * (3e-5)**2 + y * (2e-5)**2) / (8.0 * W0Z)
    assert diffs[0] == pytest.approx(q_c, rel=1e-12)


# -------------------------------------------------------------- validation

def test_response_inputs_validation():
    c = paper_z_coeffs()
    with pytest.raises(ValidationError):
        ms.ResponseInputs(coeffs=c, mode="direct")
    with pytest.raises(ValidationError):
        ms.ResponseInputs(coeffs=c, mode="explicit", b=-1e-6)
    with pytest.raises(ValidationError):
        ms.ResponseInputs(coeffs=c, mode="uncoupled", lumped=1e18)
    with pytest.raises(ValidationError):
        ms.ResponseInputs(coeffs=c, mode="lumped", b=1e-6)
    with pytest.raises(ValidationError):
        ms.ResponseInputs(coeffs=c, window_edge=math.nan)
    # explicit mode needs the partner frequency its chain divides by
    orphan = AxisCoefficients(axis="z", omega0=1e6, alpha8=1e9,
                              alpha2x=1e9)
    with pytest.raises(ValidationError):
        ms.ResponseInputs.with_amplitudes(orphan, b=0.0, c=1e-6)


def test_state_and_point_validation():
    with pytest.raises(ValidationError):
        ms.ResponsePoint(sigma=0.0, a=0.0, branch=0, stable=True)
    with pytest.raises(ValidationError):
        ms.SlowFlowState(-1e-9, 0.0)
    with pytest.raises(ValidationError):
        ms.SlowFlowState(1e-9, math.inf)
