"""Mismatch SDR, robust encoder, broadcast region and separation baseline."""

import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from mlmsim import (
    InvalidInputError,
    MismatchInputs,
    broadcast_curve,
    broadcast_point,
    mismatch_sdr,
    no_interference_point,
    optimality_condition,
    robust_encoder_params,
    separation_curve,
    unequal_variance_sdr,
)
from mlmsim.analysis import admissible_alpha_c_max, alpha_bar, beta_opt_sq

snrs = st.floats(min_value=0.1, max_value=1e4)


# ---------------------------------------------------------------------------
# mismatch_sdr


@settings(max_examples=80, deadline=None)
@given(snrs)
def test_mismatch_bound_is_optimal_at_matched_gains(snr):
    alpha_0 = snr / (1.0 + snr)
    beta_0_sq = 4.0
    inputs = MismatchInputs(alpha_c=alpha_0, alpha_s=alpha_0,
                            beta=math.sqrt(alpha_0 * beta_0_sq),
                            snr=snr, beta_0_sq=beta_0_sq)
    bound, _ = mismatch_sdr(inputs)
    assert bound == pytest.approx(1.0 + snr, rel=1e-12)


def test_mismatch_bound_unit_gains_reduces_to_linear_sdr():
    inputs = MismatchInputs(alpha_c=1.0, alpha_s=1.0, beta=math.sqrt(0.5),
                            snr=8.0, beta_0_sq=2.0)
    bound, holds = mismatch_sdr(inputs)
    assert bound == pytest.approx(0.5 / 2.0 * 8.0, rel=1e-12)
    assert holds  # 0.25 + 1/8 < 1


def test_mismatch_bound_vanishes_with_beta():
    for beta in (1e-3, 1e-5):
        inputs = MismatchInputs(alpha_c=0.9, alpha_s=0.5, beta=beta, snr=10.0,
                                beta_0_sq=1.0)
        bound, _ = mismatch_sdr(inputs)
        assert bound < 10.0 * beta**2 / ((1 - 0.5) ** 2 * beta**2)
    tiny, _ = mismatch_sdr(MismatchInputs(0.9, 0.5, 1e-8, 10.0, 1.0))
    assert tiny < 1e-12


def test_mismatch_condition_flag():
    ok = MismatchInputs(alpha_c=1.0, alpha_s=1.0, beta=math.sqrt(0.5), snr=10.0,
                        beta_0_sq=1.0)
    assert ok.condition_holds
    bad = MismatchInputs(alpha_c=1.0, alpha_s=1.0, beta=1.0, snr=10.0, beta_0_sq=1.0)
    assert not bad.condition_holds


# ---------------------------------------------------------------------------
# robust encoder


def test_robust_encoder_reference_point():
    enc = robust_encoder_params(10.0, 1.0, margin=1.0)
    assert enc.beta_sq == pytest.approx(0.9)
    assert enc.predicted_sdr(10.0) == pytest.approx(9.0)
    assert enc.guarantee_ratio == pytest.approx(9.0 / 11.0)


def test_robust_encoder_guarantee_converges_to_one():
    ratios = [robust_encoder_params(s, 1.0).guarantee_ratio for s in (1e2, 1e4, 1e6)]
    assert ratios[0] < ratios[1] < ratios[2] < 1.0
    assert ratios[2] > 0.999


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1.5, max_value=1e5), st.floats(min_value=0.05, max_value=1.0))
def test_robust_encoder_prediction_dominates_guarantee(snr0, margin):
    enc = robust_encoder_params(snr0, 3.0, margin=margin)
    for mult in (1.0, 2.0, 10.0):
        snr = snr0 * mult
        assert enc.predicted_sdr(snr) / (1.0 + snr) >= enc.guarantee_ratio - 1e-12


def test_robust_encoder_rejects_low_snr0():
    with pytest.raises(InvalidInputError):
        robust_encoder_params(1.0, 1.0)
    with pytest.raises(InvalidInputError):
        robust_encoder_params(10.0, 1.0, margin=1.5)


# ---------------------------------------------------------------------------
# broadcast region


def test_broadcast_reference_pair():
    pt = broadcast_point(2.0 / 3.0, 2.0, 10.0)
    assert pt.sdr1 == pytest.approx(3.0, abs=1e-10)
    assert pt.sdr2 == pytest.approx(1.0 + 30.0 / 7.0, abs=1e-10)
    assert pt.alpha_bar == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_broadcast_first_receiver_optimal_point_symbolic():
    a, s1, s2 = sympy.symbols("a s1 s2", positive=True)
    bar = a * (2 - a * (s1 + 1) / s1)
    sdr1 = 1 + bar * s1 / (a**2 + (1 - a) ** 2 * s1)
    specialized = sdr1.subs(a, s1 / (1 + s1))
    assert sympy.simplify(specialized - (1 + s1)) == 0


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.2, max_value=100.0), st.floats(min_value=1.0, max_value=50.0))
def test_broadcast_first_receiver_optimal_point_numeric(snr1, ratio):
    snr2 = snr1 * ratio
    pt = broadcast_point(snr1 / (1.0 + snr1), snr1, snr2)
    assert pt.sdr1 == pytest.approx(1.0 + snr1, rel=1e-10)


def test_broadcast_point_degenerates_at_zero_gain():
    pt = broadcast_point(0.0, 2.0, 10.0)
    assert pt.sdr1 == 1.0 and pt.sdr2 == 1.0 and pt.alpha_bar == 0.0


def test_alpha_bar_range_on_admissible_interval():
    # Strictly positive on the interior; the right endpoint degenerates
    # to exactly zero when snr1 <= 1.
    for snr1 in (0.5, 2.0, 10.0):
        amax = admissible_alpha_c_max(snr1)
        grid = np.linspace(1e-6, amax, 200, endpoint=False)
        bars = np.array([alpha_bar(a, snr1) for a in grid])
        assert np.all(bars > 0.0)
        assert np.all(bars <= 2.0 * grid + 1e-12)
        assert alpha_bar(amax, snr1) >= 0.0
    assert alpha_bar(admissible_alpha_c_max(0.5), 0.5) == pytest.approx(0.0, abs=1e-15)


def test_broadcast_curve_contents():
    region = broadcast_curve(2.0, 10.0, 41)
    assert len(region.points) == 41
    assert region.corners == ((3.0, 1.0), (1.0, 11.0))
    sdr1 = [p.sdr1 for p in region.points]
    assert max(sdr1) <= 3.0 + 1e-9
    assert region.points[0].alpha_c == 0.0
    assert region.points[-1].alpha_c == pytest.approx(1.0)
    # hull contains the extreme distortion pairs and is left-to-right sorted
    d1 = [1.0 / s1 for s1, _ in region.hull]
    assert d1 == sorted(d1)


def test_broadcast_curve_hull_dominates_inputs():
    region = broadcast_curve(2.0, 10.0, 101)
    hull = np.array([(1.0 / s1, 1.0 / s2) for s1, s2 in region.hull])
    raw = [(1.0 / p.sdr1, 1.0 / p.sdr2) for p in region.points]
    raw += [(1.0 / s1, 1.0 / s2) for s1, s2 in region.corners]
    for d1, d2 in raw:
        inside = np.interp(d1, hull[:, 0], hull[:, 1])
        assert d2 >= inside - 1e-12


def test_broadcast_curve_validation():
    with pytest.raises(InvalidInputError):
        broadcast_curve(10.0, 2.0, 16)
    with pytest.raises(InvalidInputError):
        broadcast_curve(2.0, 10.0, 1)


def test_no_interference_point_examples():
    s1, s2 = no_interference_point(2.0, 10.0)
    assert s1 == pytest.approx(3.0, abs=1e-12)
    assert s2 == pytest.approx(25.0 / 3.0, abs=1e-12)
    same = no_interference_point(5.0, 5.0)
    assert same == (pytest.approx(6.0), pytest.approx(6.0))
    # slope in snr2 approaches snr1/(1+snr1)
    _, far = no_interference_point(2.0, 1e9)
    assert far / 1e9 == pytest.approx(2.0 / 3.0, rel=1e-6)


def test_separation_curve_endpoints_and_order():
    curve = separation_curve(2.0, 10.0, 21)
    assert curve[0] == (pytest.approx(1.0), pytest.approx(11.0))
    assert curve[-1] == (pytest.approx(3.0), pytest.approx(3.0))
    for s1, s2 in curve:
        assert s2 >= s1 - 1e-12


def test_mlm_dominates_separation_somewhere():
    # The modulo-lattice curve should beat the separation baseline at some
    # interior trade-off for the reference SNR pairs.
    for snr1, snr2 in ((2.0, 10.0), (10.0, 50.0)):
        region = broadcast_curve(snr1, snr2, 257)
        sep = np.array(separation_curve(snr1, snr2, 513))
        order = np.argsort(sep[:, 0])
        sep = sep[order]
        found = False
        for pt in region.points:
            if pt.sdr1 <= sep[0, 0] or pt.sdr1 >= sep[-1, 0]:
                continue
            sep_sdr2 = np.interp(pt.sdr1, sep[:, 0], sep[:, 1])
            if pt.sdr2 > sep_sdr2 + 1e-9:
                found = True
                break
        assert found, f"no dominating point at SNRs ({snr1}, {snr2})"


# ---------------------------------------------------------------------------
# unequal variances


def test_unequal_variance_matched_gain_is_optimal():
    for snr, sigma2 in ((2.0, 1.0), (10.0, 3.0)):
        b = beta_opt_sq(snr, sigma2)
        assert unequal_variance_sdr(b, sigma2, snr) == pytest.approx(1.0 + snr, rel=1e-12)


def test_optimality_condition_reference_values():
    assert optimality_condition(1.0, 2.0, 15.0 / 11.0, 10.0)
    assert not optimality_condition(1.0, 2.0, 1.0, 10.0)


def test_condition_met_gives_joint_optimality():
    sigma1, snr1, snr2 = 1.0, 2.0, 10.0
    sigma2 = sigma1 * (1.0 + snr1) / snr1 * snr2 / (1.0 + snr2)
    assert sigma2 == pytest.approx(15.0 / 11.0)
    assert optimality_condition(sigma1, snr1, sigma2, snr2)
    shared = beta_opt_sq(snr1, sigma1)
    assert shared == pytest.approx(beta_opt_sq(snr2, sigma2), rel=1e-12)
    assert unequal_variance_sdr(shared, sigma1, snr1) == pytest.approx(1.0 + snr1, rel=1e-12)
    assert unequal_variance_sdr(shared, sigma2, snr2) == pytest.approx(1.0 + snr2, rel=1e-12)
