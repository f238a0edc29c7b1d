"""Verification suites for the oscillation functional and its statistics.

Each suite samples concrete inputs, measures the margin by which a claimed
inequality or identity holds, and records one case per probe.  A case
passes exactly when its measured margin is at most its tolerance.  A third
verdict, "inconclusive", marks cases whose numerical error estimate is too
large to trust either way; inconclusive cases never fail a suite but are
counted and reported.

Several suites carry identity sentinel cases that recompute a constant by
an independent quadrature route and compare against the closed form in use.
Their purpose is mutation sensitivity: a deliberately corrupted constant
(see weaknorm.FaultSpec) must flip at least one suite from green to red,
otherwise the battery would be vacuous.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .catalog import (TestFunction, default_catalog, grad_norm_p, make_linear,
                      make_plateau_bump, unit_ball_volume)
from .oscillation import (UnsupportedFunctionError, default_r_grid,
                          exact_oscillation_1d, maximal_gradient,
                          mean_oscillation)
from .quadrature import BallSample, QuadratureSpec, gauss_rule, stream
from .weaknorm import (Domain, FaultSpec, c_d_prime, c_dp, distribution_curve,
                       expansion_remainder_coeff, interval_weight)

KEY_VERIFY = 6

# Largest observed plateau-bump value of m_f(a, r) / (r * grid-maximal
# gradient), measured over wide (a, r) sweeps at development time and
# frozen with headroom.  Regression bounds on this implementation's
# behavior, not constants claimed by any theory.
_DOMINATION_BOUND = {1: 0.70, 2: 0.62, 3: 0.52}

# Relative error above which a comparison is not trusted either way.
_INCONCLUSIVE_RTOL = 1e-3


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CaseResult:
    """One probe: passed is the literal predicate margin <= tolerance.

    verdict refines it to "pass" / "fail" / "inconclusive"; the last means
    the numerical error estimate swamped the quantity being compared, so
    neither verdict would be trustworthy.  Inconclusive cases do not fail a
    suite.
    """
    name: str
    inputs: dict
    measured_margin: float
    tolerance: float
    passed: bool
    verdict: str
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs": {k: _plain(v) for k, v in self.inputs.items()},
            "measured_margin": _plain(self.measured_margin),
            "tolerance": _plain(self.tolerance),
            "passed": self.passed,
            "verdict": self.verdict,
            "note": self.note,
        }


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _case(name: str, inputs: dict, margin: float, tol: float,
          inconclusive: bool = False, note: str = "") -> CaseResult:
    margin = float(margin)
    tol = float(tol)
    passed = margin <= tol
    if inconclusive:
        verdict = "inconclusive"
    else:
        verdict = "pass" if passed else "fail"
    return CaseResult(name, inputs, margin, tol, passed, verdict, note)


@dataclass(frozen=True)
class VerificationReport:
    suite_name: str
    cases: tuple
    error: str = ""

    @property
    def pass_count(self) -> int:
        return sum(1 for c in self.cases if c.verdict == "pass")

    @property
    def fail_count(self) -> int:
        return sum(1 for c in self.cases if c.verdict == "fail")

    @property
    def inconclusive_count(self) -> int:
        return sum(1 for c in self.cases if c.verdict == "inconclusive")

    @property
    def passed(self) -> bool:
        return not self.error and self.fail_count == 0

    def to_dict(self) -> dict:
        return {
            "suite_name": self.suite_name,
            "passed": self.passed,
            "pass_count": self.pass_count,
            "fail_count": self.fail_count,
            "inconclusive_count": self.inconclusive_count,
            "error": self.error,
            "cases": [c.to_dict() for c in self.cases],
        }


# ---------------------------------------------------------------------------
# mollifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Mollifier:
    """Compactly supported nonnegative bump of unit mass on the line.

    density is (35/32) (1 - u^2)^3 scaled to live on [-scale, scale]; the
    mass is re-verified by quadrature at construction and must equal one to
    1e-10.
    """
    scale: float
    mass_defect: float = field(init=False)

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError("mollifier scale must be positive")
        x, w = gauss_rule(16)
        mass = float(self.scale * w @ self.density(self.scale * x))
        object.__setattr__(self, "mass_defect", abs(mass - 1.0))
        if self.mass_defect > 1e-10:
            raise ValueError(f"mollifier mass off by {self.mass_defect:.3e}")

    @property
    def support_radius(self) -> float:
        return self.scale

    def density(self, z):
        z = np.asarray(z, dtype=float)
        u = z / self.scale
        body = (35.0 / 32.0 / self.scale) * (1.0 - u * u) ** 3
        return np.where(np.abs(u) <= 1.0, body, 0.0)


def mollify_1d(f: TestFunction, phi: Mollifier) -> TestFunction:
    """Convolution of a piecewise-polynomial line function with the bump.

    Evaluated by per-point Gauss segments split at the kernel window's
    intersections with the breakpoints of f; exact to roundoff for the
    catalog families (polynomial degree stays within the rule's reach).
    The result's breakpoints are the spread originals plus the midpoint of
    their span, which keeps every segment monotone for the symmetric
    unimodal entries.
    """
    if f.dim != 1:
        raise UnsupportedFunctionError("mollification route applies to dimension one")
    t = phi.scale
    x_gl, w_gl = gauss_rule(12)
    bps = tuple(f.breakpoints_1d)

    def ev(x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)[..., None]
        cols = [np.full_like(flat, -t)]
        for b in bps:
            cols.append(np.clip(flat - b, -t, t))
        cols.append(np.full_like(flat, t))
        edges = np.sort(np.concatenate(cols, axis=-1), axis=-1)
        lo = edges[..., :-1]
        hi = edges[..., 1:]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        z = mid[..., None] + half[..., None] * x_gl
        vals = phi.density(z) * f.eval_1d(flat[..., None] - z)
        out = ((vals @ w_gl) * half).sum(axis=-1)
        return out.reshape(x.shape)

    # eval contract takes (..., 1) points
    def ev_nd(pts):
        pts = np.asarray(pts, dtype=float)
        return ev(pts[..., 0])

    new_bps = set()
    for b in bps:
        new_bps.update((b - t, b, b + t))
    if bps:
        new_bps.add(0.5 * (min(bps) + max(bps)))
    support = f.support_radius + t if f.support_radius is not None else None
    return TestFunction(
        function_id=f"mollified:base={f.function_id};t={t!r}",
        dim=1,
        eval=ev_nd,
        grad=None,
        grad_lipschitz=None,
        support_radius=support,
        smoothness_tag="custom",
        breakpoints_1d=tuple(sorted(new_bps)),
        far_value=f.far_value,
        l1_mass=None,
    )


# ---------------------------------------------------------------------------
# suite: small-radius expansion
# ---------------------------------------------------------------------------

def _slope_constant_oracle(d: int) -> float:
    """Mean of |x_1| over the unit ball by slice quadrature.

    Independent of the gamma-function closed form: only unit ball volumes
    and a one-dimensional integral of t (1 - t^2)^((d-1)/2).
    """
    val, err = integrate.quad(lambda t: t * (1.0 - t * t) ** ((d - 1) / 2.0),
                              0.0, 1.0)
    ratio = unit_ball_volume(d - 1) / unit_ball_volume(d) if d > 1 else 0.5
    return 2.0 * ratio * val


def _moment_coeff_oracle(d: int) -> float:
    """Mean of |x|^2 over the unit ball, radially: d / (d + 2)."""
    num, _ = integrate.quad(lambda s: s ** (d + 1), 0.0, 1.0)
    den, _ = integrate.quad(lambda s: s ** (d - 1), 0.0, 1.0)
    return num / den


def check_local_expansion(f: TestFunction, n_samples: int, r_ceiling: float,
                          spec: QuadratureSpec,
                          fault: Optional[FaultSpec] = None) -> VerificationReport:
    """Certified small-radius control of the oscillation.

    For every sampled (a, r) with r at most r_ceiling, the oscillation must
    deviate from slope * r * |grad f(a)| by at most the quadratic remainder
    bound plus three standard errors.  Two identity sentinel cases pin the
    slope constant and the remainder coefficient against independent
    quadrature oracles so that injected constant faults turn the suite red.
    """
    if f.grad is None or f.grad_lipschitz is None:
        raise UnsupportedFunctionError(
            f"{f.function_id} lacks gradient data; the expansion does not apply")
    d = f.dim
    lip = f.grad_lipschitz
    scale = f.support_radius if f.support_radius is not None else 1.0
    rng = stream(spec.seed, KEY_VERIFY, 0)
    slope = c_d_prime(d, fault)
    coeff = expansion_remainder_coeff(d, lip, fault)

    cases = []
    for i in range(n_samples):
        a = rng.uniform(-1.1 * scale, 1.1 * scale, size=d)
        r = float(np.exp(rng.uniform(np.log(r_ceiling / 50.0),
                                     np.log(r_ceiling))))
        est = mean_oscillation(f, BallSample(a, r), spec)
        g = float(np.linalg.norm(np.asarray(f.grad(a[None, :]))[0]))
        ref = slope * r * g
        margin = abs(est.value - ref) - 3.0 * est.std_error
        tol = coeff * r * r + 1e-12 * max(1.0, ref)
        cases.append(_case(
            f"expansion[{i}]",
            {"a": a, "r": r, "m": est.value, "std_error": est.std_error,
             "reference": ref},
            margin, tol))

    oracle = _slope_constant_oracle(d)
    cases.append(_case(
        "slope_constant_identity",
        {"claimed": slope, "quadrature_oracle": oracle},
        abs(slope - oracle), 1e-8 * oracle,
        note="slope constant vs slice quadrature"))
    claimed_unit = expansion_remainder_coeff(d, 1.0, fault)
    moment_oracle = 3.0 * _moment_coeff_oracle(d)
    cases.append(_case(
        "remainder_moment_identity",
        {"claimed": claimed_unit, "quadrature_oracle": moment_oracle},
        abs(claimed_unit - moment_oracle), 1e-8 * moment_oracle,
        note="remainder coefficient vs radial moment quadrature"))

    return VerificationReport(
        suite_name=f"local_expansion[{f.function_id}]", cases=tuple(cases))


# ---------------------------------------------------------------------------
# suite: mollification comparison
# ---------------------------------------------------------------------------

def _oscillation_convolved_with(f: TestFunction, phi: Mollifier, a: float,
                                r: float, panels: int):
    """Quadrature of z -> phi(z) m_f(a - z, r) with a refinement error bar."""
    t = phi.scale
    pts = {-t, t}
    for b in f.breakpoints_1d:
        for edge in (a - r - b, a + r - b):
            if -t < edge < t:
                pts.add(edge)
    base = np.array(sorted(pts))

    def integrate_panels(k: int) -> float:
        edges = []
        for lo, hi in zip(base[:-1], base[1:]):
            edges.append(np.linspace(lo, hi, k + 1)[:-1])
        edges = np.concatenate(edges + [base[-1:]])
        x_gl, w_gl = gauss_rule(8)
        lo = edges[:-1]
        hi = edges[1:]
        half = 0.5 * (hi - lo)
        z = (0.5 * (hi + lo))[:, None] + half[:, None] * x_gl
        m, _ = exact_oscillation_1d(f, a - z, r)
        vals = phi.density(z) * m
        return float(((vals @ w_gl) * half).sum())

    coarse = integrate_panels(panels)
    fine = integrate_panels(2 * panels)
    return fine, abs(fine - coarse)


def check_mollification(f: TestFunction, phi: Mollifier, n_samples: int,
                        spec: QuadratureSpec) -> VerificationReport:
    """Smoothing can only shrink the oscillation, in the averaged sense.

    For sampled (a, r): the oscillation of the mollified function is at
    most the mollification of the oscillation, up to quadrature error.
    Both sides are deterministic in dimension one (exact piecewise rules on
    the left, refined panel quadrature with an error estimate on the
    right); a case whose error estimate swamps the comparison is recorded
    as inconclusive rather than failed.
    """
    if f.dim != 1:
        raise UnsupportedFunctionError("mollification checks run in dimension one")
    g = mollify_1d(f, phi)
    scale = f.support_radius if f.support_radius is not None else 1.0
    rng = stream(spec.seed, KEY_VERIFY, 1)

    cases = [_case(
        "mollifier_unit_mass",
        {"scale": phi.scale, "mass_defect": phi.mass_defect},
        phi.mass_defect, 1e-10)]
    for i in range(n_samples):
        a = float(rng.uniform(-1.1 * scale, 1.1 * scale))
        r = float(np.exp(rng.uniform(np.log(0.05 * scale),
                                     np.log(0.8 * scale))))
        lhs, _ = exact_oscillation_1d(g, a, r)
        lhs = float(lhs)
        rhs, err = _oscillation_convolved_with(f, phi, a, r, panels=12)
        ref = max(abs(lhs), abs(rhs), 1e-300)
        margin = lhs - rhs
        tol = 3.0 * err + 1e-10 * max(1.0, ref)
        # an error estimate at roundoff scale is decisive even when both
        # sides vanish (ball far from where f varies)
        murky = err > max(_INCONCLUSIVE_RTOL * ref, 1e-12)
        cases.append(_case(
            f"mollified_vs_averaged[{i}]",
            {"a": a, "r": r, "lhs": lhs, "rhs": rhs, "quad_error": err},
            margin, tol,
            inconclusive=murky,
            note="" if not murky
            else "panel refinement error too large to compare"))
    return VerificationReport(
        suite_name=f"mollification[{f.function_id};t={phi.scale!r}]",
        cases=tuple(cases))


# ---------------------------------------------------------------------------
# suite: pointwise domination by the maximal gradient
# ---------------------------------------------------------------------------

def check_maximal_domination(f: TestFunction, n_samples: int,
                             spec: QuadratureSpec,
                             fault: Optional[FaultSpec] = None,
                             p_weight: float = 2.0) -> VerificationReport:
    """Oscillation against radius times the grid-maximal gradient.

    Asserts the sampled ratio m_f(a, r) / (r * maximal_gradient(a)) stays
    below the frozen per-dimension regression bound (an observed constant
    of this implementation, reported with every case).  When the maximal
    gradient vanishes the oscillation must vanish too.  A weight-integral
    identity case recomputes the tail weight (R, infinity) against direct
    quadrature, which makes exponent faults visible.
    """
    if f.grad is None:
        raise UnsupportedFunctionError(
            f"{f.function_id} lacks a gradient; domination does not apply")
    d = f.dim
    bound = _DOMINATION_BOUND[d]
    scale = f.support_radius if f.support_radius is not None else 1.0
    rng = stream(spec.seed, KEY_VERIFY, 2)
    grid = default_r_grid(f, ratio=1.05 if d == 1 else 1.1)

    def ratio_samples(count: int, salt: int):
        out = []
        local = stream(spec.seed, KEY_VERIFY, 2, salt)
        for i in range(count):
            a = local.uniform(-1.3 * scale, 1.3 * scale, size=d)
            r = float(np.exp(local.uniform(np.log(5e-3 * scale),
                                           np.log(5.0 * scale))))
            sub = spec if spec.method == "gauss_1d" else QuadratureSpec(
                method=spec.method, node_count=spec.node_count,
                seed=spec.seed + 7919 * salt + i)
            mg = maximal_gradient(f, a, grid, sub)
            est = mean_oscillation(f, BallSample(a, r), sub)
            out.append((a, r, est, mg))
        return out

    cases = []
    ratios = []
    for i, (a, r, est, mg) in enumerate(ratio_samples(n_samples, 0)):
        if mg == 0.0:
            # the 0/0 guard: no gradient mass anywhere means no oscillation
            margin = est.value - 3.0 * est.std_error
            cases.append(_case(
                f"zero_gradient_guard[{i}]",
                {"a": a, "r": r, "m": est.value},
                margin, 1e-12))
            continue
        ratio = max(est.value - 3.0 * est.std_error, 0.0) / (r * mg)
        ratios.append(est.value / (r * mg))
        cases.append(_case(
            f"domination[{i}]",
            {"a": a, "r": r, "m": est.value, "maximal_gradient": mg,
             "ratio": est.value / (r * mg)},
            ratio, bound))

    if ratios:
        max_ratio = max(ratios)
        cases.append(_case(
            "max_ratio_finite",
            {"max_ratio": max_ratio, "frozen_bound": bound},
            0.0 if np.isfinite(max_ratio) else math.inf, 0.0,
            note="largest observed ratio, recorded"))
        half = ratio_samples(max(n_samples // 2, 4), 1)
        alt = [e.value / (r * mg) for _, r, e, mg in half if mg > 0]
        if alt:
            drift = abs(max(alt + ratios) - max_ratio) / max_ratio
            cases.append(_case(
                "ratio_stability_under_doubling",
                {"max_ratio": max_ratio, "enlarged_max": max(alt + ratios)},
                drift, 0.10))
        if f.smoothness_tag == "linear" and d == 1 and spec.method == "gauss_1d":
            cases.append(_case(
                "linear_exact_ratio",
                {"max_ratio": max_ratio, "expected": c_d_prime(1)},
                abs(max_ratio - c_d_prime(1)), 1e-10))

    r_edge = float(np.exp(rng.uniform(np.log(0.2), np.log(2.0))))
    claimed = float(interval_weight(r_edge, None, p_weight, fault))
    oracle, quad_err = integrate.quad(
        lambda r: r ** (-p_weight - 1.0), r_edge, np.inf)
    cases.append(_case(
        "weight_integral_identity",
        {"r_lo": r_edge, "p": p_weight, "claimed": claimed,
         "quadrature_oracle": oracle},
        abs(claimed - oracle), 1e-8 * oracle + 10.0 * quad_err,
        note="tail weight closed form vs direct quadrature"))

    return VerificationReport(
        suite_name=f"maximal_domination[{f.function_id}]", cases=tuple(cases))


# ---------------------------------------------------------------------------
# suite: failure of weak integrability at p = 1 for a jump
# ---------------------------------------------------------------------------

def indicator_section_1d(a: float, kappa: float, radius: float):
    """Exact superlevel radius interval for the interval indicator, or None.

    The oscillation of the indicator of [-radius, radius] at center a rises
    like (r^2 - t^2) / (2 r^2) once the ball reaches the nearer edge
    (t = ||a| - radius||) and switches to 2 lam (1 - lam) with lam =
    radius / r once the ball covers the support, at r = |a| + radius; the
    whole profile is unimodal, so the section is a single interval.  The
    one-edge crossing t / s is only valid below the cover radius; past it
    the crossing solves the covered branch, giving radius (1 - s) / kappa.
    """
    if kappa >= 0.5 or kappa <= 0.0:
        return None
    s = math.sqrt(1.0 - 2.0 * kappa)
    u = abs(a)
    t = abs(u - radius)
    cover = u + radius
    r2 = radius * (1.0 + s) / kappa
    if u > radius:
        # outside the support the profile peaks at the cover radius; the
        # section is empty once that peak falls below the threshold
        if t > 2.0 * radius * s / (1.0 - s):
            return None
        return (t / s, r2)
    r1 = t / s if t <= s * cover else radius * (1.0 - s) / kappa
    return (r1, r2)


def indicator_measure_1d(kappa: float, radius: float, box, r_lo: float,
                         r_hi: float, p: float = 1.0):
    """Deterministic superlevel measure for the interval indicator.

    Exact section endpoints, then adaptive quadrature over the center with
    every branch point supplied explicitly; no statistical noise.  With
    r_lo = 0 and a support edge interior to the box the center integral has
    a non-integrable 1/t edge (the section's weight grows like s/t as the
    center approaches an edge), so the value is certified +inf without
    numerical work.
    """
    if kappa >= 0.5 or kappa <= 0.0:
        return 0.0
    lo_box, hi_box = float(box[0]), float(box[1])
    s = math.sqrt(1.0 - 2.0 * kappa)
    if r_lo <= 0.0:
        for edge in (-radius, radius):
            if lo_box < edge < hi_box:
                return math.inf

    def w(a: float) -> float:
        sec = indicator_section_1d(a, kappa, radius)
        if sec is None:
            return 0.0
        lo = max(sec[0], r_lo)
        hi = min(sec[1], r_hi)
        if hi <= lo:
            return 0.0
        return float(interval_weight(lo, hi, p))

    t_star = 2.0 * radius * s / (1.0 - s)
    cover_kink = 2.0 * radius * s / (1.0 + s)
    pts = set()
    for edge in (-radius, radius):
        for off in (0.0, s * r_lo, s * r_hi, t_star,
                    min(t_star, radius), cover_kink):
            for sign in (-1.0, 1.0):
                q = edge + sign * off
                if lo_box < q < hi_box:
                    pts.add(q)
    val, _ = integrate.quad(w, lo_box, hi_box, points=sorted(pts),
                            limit=400, epsabs=1e-12, epsrel=1e-11)
    return val


def check_bv_divergence(radius: float, kappa_grid, domain: Domain,
                        spec: Optional[QuadratureSpec] = None) -> VerificationReport:
    """A jump has no weak-integrable oscillation at p = 1.

    Everything here is deterministic: section endpoints in closed form and
    adaptive center quadrature.  The untruncated measure is +inf at every
    threshold below one half (certified analytically: the section weight
    grows like 1/t toward the support edges), so the smallest-threshold
    scaled value dominates any multiple of the largest one in the extended
    reals.  Two quantitative cases make the divergence concrete: on any
    fixed truncated radius window the scaled values instead *decrease*
    proportionally to the threshold, and at fixed threshold the truncated
    measure grows by sides * sqrt(1-2 kappa) * ln(factor) per radius-floor
    refinement, without saturating.  A smooth contrast case checks the
    plateau bump stays bounded at p = 1, and the p = 2 behavior of the jump
    is recorded as divergent too (excluded from any summability claim).
    """
    kappas = np.sort(np.asarray(kappa_grid, dtype=float))[::-1]
    if kappas.size < 2 or np.any(kappas <= 0) or np.any(kappas >= 0.5):
        raise ValueError("need at least two thresholds inside (0, 1/2)")
    box = domain.box[0]
    cases = []

    values = {}
    for kappa in kappas:
        nu = indicator_measure_1d(float(kappa), radius, box, 0.0,
                                  domain.r_max, p=1.0)
        values[float(kappa)] = nu
        cases.append(_case(
            f"exact_measure[kappa={kappa:g}]",
            {"kappa": float(kappa), "nu": nu,
             "scaled": kappa * nu if math.isfinite(nu) else math.inf},
            -math.inf if math.isinf(nu) else 0.0, 0.0,
            note="weight grows like sqrt(1-2k)/edge-distance; center "
                 "integral certified divergent" if math.isinf(nu) else ""))

    k_small, k_big = float(kappas[-1]), float(kappas[0])
    s_small = k_small * values[k_small]
    s_big = k_big * values[k_big]
    if math.isinf(s_small) and math.isinf(s_big):
        margin, note = -math.inf, (
            "both scaled values are +inf: the weak quasi-norm diverges at "
            "every threshold, so the ratio criterion holds in the extended reals")
    else:
        margin, note = 2.0 * s_big - s_small, ""
    cases.append(_case(
        "kappa_ratio_divergence",
        {"kappa_small": k_small, "scaled_small": s_small,
         "kappa_big": k_big, "scaled_big": s_big},
        margin, 0.0, note=note))

    # on a fixed truncated window the scaled value falls off linearly in
    # kappa; the divergence lives at the radius floor, not at small kappa
    r_floor = domain.r_min
    trunc = {float(k): indicator_measure_1d(float(k), radius, box, r_floor,
                                            domain.r_max, p=1.0)
             for k in (k_big, k_small)}
    ratio = (k_small * trunc[k_small]) / (k_big * trunc[k_big])
    cases.append(_case(
        "fixed_window_scaled_decreases",
        {"r_min": r_floor, "scaled_small": k_small * trunc[k_small],
         "scaled_big": k_big * trunc[k_big], "ratio": ratio},
        ratio, 0.02,
        note="the naive small-threshold growth reverses once the radius "
             "window is truncated"))

    kappa_mid = float(kappas[min(1, kappas.size - 1)])
    s_mid = math.sqrt(1.0 - 2.0 * kappa_mid)
    sides = sum(1 for edge in (-radius, radius) for sgn in (-1, 1)
                if box[0] < edge + sgn * 1e-9 < box[1])
    factor = 4.0
    floors = [0.1 * radius * factor ** (-k) for k in range(6)]
    nus = [indicator_measure_1d(kappa_mid, radius, box, fl, domain.r_max)
           for fl in floors]
    increments = np.diff(nus)
    theory = sides * s_mid * math.log(factor)
    cases.append(_case(
        "floor_refinement_divergence",
        {"kappa": kappa_mid, "floors": floors, "nu": nus,
         "increment_theory": theory},
        abs(increments[-1] / theory - 1.0), 0.01,
        note="each refinement of the radius floor adds the same weight; "
             "no saturation"))
    cases.append(_case(
        "refinement_monotone",
        {"increments": list(increments)},
        float(np.max(np.abs(increments / theory - 1.0)[2:])), 0.02))

    nu2 = indicator_measure_1d(k_small, radius, box, 0.0, domain.r_max, p=2.0)
    cases.append(_case(
        "p2_divergence_documented",
        {"kappa": k_small, "nu_p2": nu2},
        -math.inf if math.isinf(nu2) else math.inf, 0.0,
        note="the jump diverges at p = 2 as well; excluded from any "
             "summability claim"))

    if spec is not None:
        f = make_plateau_bump(1, 1.0, 0.5, 1.0)
        dom = Domain(box=((-1.5, 1.5),), r_max=20.0, r_min=1e-4)
        top = 0.25
        grid = np.geomspace(top, top * 1e-3, 9)
        curve = distribution_curve(f, 1.0, grid, dom, spec, samples=1024)
        ref = c_dp(1, 1.0) * grad_norm_p(f, 1.0)
        # The scaled curve peaks near 1.68 * ref around kappa ~ 0.2 before
        # descending to the gradient limit, so 2 * ref is a boundedness
        # regression bound, not a limit statement.
        cases.append(_case(
            "smooth_contrast_bounded",
            {"max_scaled": float(curve.scaled.max()), "reference": ref},
            float(curve.scaled.max()), 2.0 * ref,
            note="plateau bump at p = 1 stays bounded where the jump diverges"))

    return VerificationReport(suite_name="bv_divergence", cases=tuple(cases))


# ---------------------------------------------------------------------------
# suite: tail bounds
# ---------------------------------------------------------------------------

def check_tail_bounds(f: TestFunction, n_samples: int,
                      spec: QuadratureSpec) -> VerificationReport:
    """Far-field behavior of the oscillation for localized functions.

    Balls that avoid the region where f varies must show zero oscillation
    (to statistical noise), and every ball obeys the mass bound
    m <= gamma r^-d with gamma = 2 ||f - far||_1 / |B_1|.
    """
    if f.support_radius is None:
        raise UnsupportedFunctionError(
            f"{f.function_id} is not localized; tail bounds do not apply")
    if f.l1_mass is None:
        raise UnsupportedFunctionError(
            f"{f.function_id} carries no mass certificate")
    d = f.dim
    r0 = f.support_radius
    gamma = 2.0 * f.l1_mass / unit_ball_volume(d)
    rng = stream(spec.seed, KEY_VERIFY, 3)

    cases = []
    for i in range(n_samples):
        r = float(np.exp(rng.uniform(np.log(0.05 * r0), np.log(3.0 * r0))))
        direction = rng.normal(size=d)
        direction /= np.linalg.norm(direction)
        sep = float(rng.uniform(0.05, 2.0)) * r0
        a = direction * (r0 + r + sep)
        est = mean_oscillation(f, BallSample(a, r), spec)
        cases.append(_case(
            f"vanishes_outside[{i}]",
            {"a": a, "r": r, "m": est.value, "separation": sep},
            est.value - 3.0 * est.std_error, 1e-12))

    for i in range(n_samples):
        a = rng.uniform(-3.0 * r0, 3.0 * r0, size=d)
        r = float(np.exp(rng.uniform(np.log(0.3 * r0), np.log(30.0 * r0))))
        est = mean_oscillation(f, BallSample(a, r), spec)
        bound = gamma * r ** (-d)
        cases.append(_case(
            f"mass_bound[{i}]",
            {"a": a, "r": r, "m": est.value, "bound": bound},
            est.value - 3.0 * est.std_error - bound, 1e-12))

    return VerificationReport(
        suite_name=f"tail_bounds[{f.function_id}]", cases=tuple(cases))


# ---------------------------------------------------------------------------
# full battery
# ---------------------------------------------------------------------------

def _spec_for(f: TestFunction, seed: int, node_count: int) -> QuadratureSpec:
    if f.dim == 1:
        return QuadratureSpec(method="gauss_1d", node_count=8, seed=seed)
    return QuadratureSpec(method="monte_carlo", node_count=node_count,
                          seed=seed)


def run_all(seed: int = 20260819, fault: Optional[FaultSpec] = None,
            node_count: int = 16384, n_samples: int = 60) -> list:
    """Every suite over the default catalog matrix.

    Suites run independently; an exception in one is captured in its report
    and never aborts the battery.  Returns the list of reports (use
    battery_passed / battery_to_dict for aggregation).
    """
    plateau = {d: make_plateau_bump(d, 1.0, 0.5, 1.0) for d in (1, 2, 3)}
    linear = {d: make_linear(d, [1.0] + [0.5] * (d - 1)) for d in (1, 2)}
    indicator = [f for f in default_catalog()
                 if f.smoothness_tag == "indicator"][0]

    jobs = []
    for d in (1, 2):
        for f in (plateau[d], linear[d]):
            jobs.append((f"local_expansion[{f.function_id}]",
                         lambda f=f, d=d: check_local_expansion(
                             f, n_samples, 0.05, _spec_for(f, seed, node_count),
                             fault=fault)))
    moll_targets = [linear[1], plateau[1], indicator]
    for t in (0.05, 0.2):
        for f in moll_targets:
            jobs.append((f"mollification[{f.function_id};t={t!r}]",
                         lambda f=f, t=t: check_mollification(
                             f, Mollifier(t), max(n_samples // 3, 8),
                             _spec_for(f, seed, node_count))))
    jobs.append((f"mollification[{indicator.function_id};t=0.1]",
                 lambda: check_mollification(
                     indicator, Mollifier(0.1), max(n_samples // 3, 8),
                     _spec_for(indicator, seed, node_count))))
    for d in (1, 2):
        f = plateau[d]
        jobs.append((f"maximal_domination[{f.function_id}]",
                     lambda f=f: check_maximal_domination(
                         f, max(n_samples // 2, 10),
                         _spec_for(f, seed, node_count), fault=fault)))
    jobs.append(("maximal_domination[zero]",
                 lambda: check_maximal_domination(
                     make_linear(1, [0.0]), 8,
                     QuadratureSpec(method="gauss_1d", node_count=8, seed=seed),
                     fault=fault)))
    jobs.append(("bv_divergence", lambda: check_bv_divergence(
        1.0, (1e-1, 1e-2, 1e-3, 1e-4),
        Domain(box=((-2.0, 2.0),), r_max=10.0, r_min=1e-3),
        spec=QuadratureSpec(method="gauss_1d", node_count=8, seed=seed))))
    for d in (1, 2, 3):
        f = plateau[d]
        jobs.append((f"tail_bounds[{f.function_id}]",
                     lambda f=f: check_tail_bounds(
                         f, max(n_samples // 2, 10),
                         _spec_for(f, seed, node_count))))
    jobs.append((f"tail_bounds[{indicator.function_id}]",
                 lambda: check_tail_bounds(
                     indicator, max(n_samples // 2, 10),
                     _spec_for(indicator, seed, node_count))))

    reports = []
    for name, job in jobs:
        try:
            reports.append(job())
        except Exception as exc:  # noqa: BLE001 - collect, never abort
            reports.append(VerificationReport(
                suite_name=name, cases=(),
                error=f"{type(exc).__name__}: {exc}"))
    return reports


def battery_passed(reports) -> bool:
    return all(rep.passed for rep in reports)


def battery_to_dict(reports) -> dict:
    return {
        "passed": battery_passed(reports),
        "suite_count": len(reports),
        "failed_suites": [rep.suite_name for rep in reports if not rep.passed],
        "inconclusive_total": sum(rep.inconclusive_count for rep in reports),
        "reports": [rep.to_dict() for rep in reports],
    }
