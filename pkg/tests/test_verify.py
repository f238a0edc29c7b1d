"""Verification battery: suites pass clean, faults flip them, and the
jump-function closed forms agree with direct evaluation."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from osclab import (
    Domain,
    FaultSpec,
    Mollifier,
    QuadratureSpec,
    UnsupportedFunctionError,
    battery_passed,
    battery_to_dict,
    check_bv_divergence,
    check_local_expansion,
    check_maximal_domination,
    check_mollification,
    check_tail_bounds,
    indicator_section_1d,
    make_ball_indicator,
    make_linear,
    make_plateau_bump,
    mollify_1d,
    run_all,
)

GAUSS = QuadratureSpec(method="gauss_1d", node_count=16, seed=8)


def _m_indicator(a, r, R=0.5):
    lo = max(a - r, -R)
    hi = min(a + r, R)
    lam = max(0.0, hi - lo) / (2 * r)
    return 2 * lam * (1 - lam)


# ---------------------------------------------------------------------------
# whole battery
# ---------------------------------------------------------------------------

def test_run_all_green():
    reports = run_all(seed=20260819, n_samples=30, node_count=8192)
    assert battery_passed(reports), [
        (r.suite_name, r.error) for r in reports if not r.passed]
    digest = battery_to_dict(reports)
    assert digest["passed"] and not digest["failed_suites"]
    assert digest["suite_count"] >= 15
    # inconclusive budget: at most 5 percent of all cases
    total = sum(len(r.cases) for r in reports)
    assert digest["inconclusive_total"] <= 0.05 * total
    json.dumps(digest)  # report must be JSON-clean


@pytest.mark.parametrize("fault,expect_suite", [
    (FaultSpec(slope_factor=1.05), "local_expansion"),
    (FaultSpec(expansion_factor=0.95), "local_expansion"),
    (FaultSpec(weight_exponent_shift=0.15), "maximal_domination"),
])
def test_fault_injection_flips_battery(fault, expect_suite):
    reports = run_all(seed=20260819, fault=fault, n_samples=10,
                      node_count=2048)
    digest = battery_to_dict(reports)
    assert not digest["passed"]
    assert any(name.startswith(expect_suite)
               for name in digest["failed_suites"]), digest["failed_suites"]


# ---------------------------------------------------------------------------
# local expansion
# ---------------------------------------------------------------------------

def test_local_expansion_plateau_small_radius():
    f = make_plateau_bump(1, 1.0, 0.5, 1.0)
    rep = check_local_expansion(f, 40, 0.05, GAUSS)
    assert rep.passed and rep.fail_count == 0


def test_local_expansion_needs_gradient_data():
    with pytest.raises(UnsupportedFunctionError):
        check_local_expansion(make_ball_indicator(1, 0.5), 5, 0.05, GAUSS)


def test_local_expansion_identity_sentinels_present():
    f = make_linear(1, [1.0])
    rep = check_local_expansion(f, 5, 0.05, GAUSS)
    names = {c.name for c in rep.cases}
    assert "slope_constant_identity" in names
    assert "remainder_moment_identity" in names


# ---------------------------------------------------------------------------
# mollification
# ---------------------------------------------------------------------------

def test_mollifier_unit_mass():
    for t in (0.05, 0.2, 1.0):
        assert Mollifier(t).mass_defect <= 1e-10


def test_mollify_linear_is_identity():
    # the kernel is even, so convolving v.x leaves it unchanged
    f = make_linear(1, [2.0])
    g = mollify_1d(f, Mollifier(0.3))
    for x in (-1.0, 0.0, 0.7, 2.5):
        assert abs(float(g.eval(np.array([x]))) - 2.0 * x) <= 1e-12


def test_mollify_extends_support():
    f = make_ball_indicator(1, 0.5)
    g = mollify_1d(f, Mollifier(0.1))
    assert g.support_radius == pytest.approx(0.6)
    assert abs(float(g.eval(np.array([0.0]))) - 1.0) <= 1e-12
    assert float(g.eval(np.array([0.7]))) == 0.0


def test_mollification_inequality_suites():
    for fid_make, t in [(lambda: make_linear(1, [1.0]), 0.05),
                        (lambda: make_plateau_bump(1, 1.0, 0.5, 1.0), 0.2),
                        (lambda: make_ball_indicator(1, 0.5), 0.1)]:
        rep = check_mollification(fid_make(), Mollifier(t), 20, GAUSS)
        assert rep.passed, (rep.suite_name,
                            [c.name for c in rep.cases if not c.passed])


def test_mollification_strictly_helps_the_jump():
    # smoothing the indicator strictly lowers the oscillation for some
    # balls: the averaged inequality is not an equality there
    rep = check_mollification(make_ball_indicator(1, 0.5), Mollifier(0.1),
                              40, GAUSS)
    strict = [c for c in rep.cases
              if c.name.startswith("mollified_vs_averaged")
              and c.measured_margin < -1e-3]
    assert len(strict) >= 3, len(strict)


# ---------------------------------------------------------------------------
# maximal domination and tail bounds
# ---------------------------------------------------------------------------

def test_maximal_domination_plateau():
    f = make_plateau_bump(1, 1.0, 0.5, 1.0)
    rep = check_maximal_domination(f, 20, GAUSS)
    assert rep.passed
    names = {c.name for c in rep.cases}
    assert "max_ratio_finite" in names
    assert "weight_integral_identity" in names


def test_maximal_domination_zero_gradient():
    rep = check_maximal_domination(make_linear(1, [0.0]), 10, GAUSS)
    assert rep.passed
    assert any(c.name.startswith("zero_gradient_guard") for c in rep.cases)


def test_tail_bounds_plateau_and_indicator():
    spec = QuadratureSpec(method="gauss_1d", node_count=16, seed=3)
    for f in (make_plateau_bump(1, 1.0, 0.5, 1.0),
              make_ball_indicator(1, 0.5)):
        rep = check_tail_bounds(f, 20, spec)
        assert rep.passed, f.function_id


def test_tail_bounds_reject_unlocalized():
    with pytest.raises(UnsupportedFunctionError):
        check_tail_bounds(make_linear(1, [1.0]), 5, GAUSS)


# ---------------------------------------------------------------------------
# jump-function divergence
# ---------------------------------------------------------------------------

def test_bv_divergence_suite_green():
    dom = Domain(box=((-2.0, 2.0),), r_max=10.0, r_min=1e-3)
    rep = check_bv_divergence(0.5, np.geomspace(1e-1, 1e-4, 4), dom)
    assert rep.passed, [c.name for c in rep.cases if not c.passed]
    names = [c.name for c in rep.cases]
    assert "kappa_ratio_divergence" in names
    assert "floor_refinement_divergence" in names
    assert "fixed_window_scaled_decreases" in names


@given(
    a=st.floats(-3.0, 3.0),
    kappa=st.floats(0.01, 0.49),
    radius=st.floats(0.1, 2.0),
)
@settings(max_examples=120, deadline=None)
def test_indicator_section_membership(a, kappa, radius):
    # endpoints of the closed-form section flip the superlevel property
    # of the directly evaluated oscillation
    sec = indicator_section_1d(a, kappa, radius)
    if sec is None:
        for r in np.geomspace(1e-3 * radius, 50 * radius, 200):
            assert _m_indicator(a, float(r), radius) <= kappa + 1e-9
        return
    lo, hi = sec
    assert 0.0 <= lo < hi
    mid = math.sqrt(max(lo, 1e-12) * hi)
    assert _m_indicator(a, mid, radius) > kappa - 1e-12
    if lo > 0:
        assert _m_indicator(a, lo * 0.995, radius) <= kappa + 1e-9
        assert _m_indicator(a, lo * 1.005, radius) >= kappa - 1e-9
    assert _m_indicator(a, hi * 1.005, radius) <= kappa + 1e-9
    assert _m_indicator(a, hi * 0.995, radius) >= kappa - 1e-9


def test_report_passed_semantics():
    from osclab.verify import CaseResult, VerificationReport
    ok = CaseResult(name="a", inputs={}, measured_margin=0.0, tolerance=1.0,
                    passed=True, verdict="pass", note="")
    bad = CaseResult(name="b", inputs={}, measured_margin=2.0, tolerance=1.0,
                     passed=False, verdict="fail", note="")
    murky = CaseResult(name="c", inputs={}, measured_margin=0.0,
                       tolerance=1.0, passed=True, verdict="inconclusive",
                       note="")
    rep = VerificationReport(suite_name="s", cases=(ok, murky))
    assert rep.passed and rep.inconclusive_count == 1
    rep2 = VerificationReport(suite_name="s", cases=(ok, bad))
    assert not rep2.passed
    rep3 = VerificationReport(suite_name="s", cases=(ok,), error="boom")
    assert not rep3.passed
