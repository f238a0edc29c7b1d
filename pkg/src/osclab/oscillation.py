"""Ball mean oscillation and related local functionals.

The central object is

    m_f(a, r) = average over B_r(a) of |f - (average of f over B_r(a))|

computed as a genuine two-pass estimate: the inner ball average first, then
the average of the absolute deviation, on an independent node set.

Dimension one with method "gauss_1d" is fully deterministic: the interval is
split at the function's breakpoints, the inner mean is a per-segment
Gauss-Legendre rule (exact for piecewise polynomials), the sign changes of
f - mean are located by bisection, and the outer integral is evaluated per
sign-constant segment.  For the piecewise-polynomial catalog entries the
result is exact to roundoff and std_error is reported as 0.

Any dimension with method "monte_carlo" uses two independent uniform node
sets in the ball's local frame.  The inner pass is antithetic (u, -u pairs),
which integrates odd functions exactly; the outer pass is plain.  Error
propagation is first-order additive: the mean-to-deviation map is
1-Lipschitz in the inner mean, so the two standard errors add.
"""
from __future__ import annotations

import numpy as np

from .catalog import TestFunction
from .quadrature import (BallSample, EstimatedValue, QuadratureError,
                         QuadratureSpec, ball_average, gauss_rule, stream,
                         unit_ball_nodes)

# stream keys: distinct sub-streams of one master seed
KEY_OUTER = 0
KEY_INNER = 1
KEY_PAIR = 2

_ROOT_ITERS = 30
_GL_ORDER = 8
_GRADE_PANELS = 8


class UnsupportedFunctionError(ValueError):
    """Raised when an operation needs metadata the function does not carry."""


# ---------------------------------------------------------------------------
# deterministic dimension-one machinery, vectorized over (a, r) pair arrays
# ---------------------------------------------------------------------------

def _edges_1d(breakpoints, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Segment edges of [lo, hi] split at breakpoints, shape (..., K+2).

    Breakpoints outside an interval are clipped to its ends; the zero-width
    segments that result integrate to zero, so every row has one fixed
    layout regardless of which breakpoints it actually contains.
    """
    cols = [lo]
    for b in sorted(breakpoints):
        cols.append(np.clip(b, lo, hi))
    cols.append(hi)
    return np.stack(cols, axis=-1)


def _segment_integrals(fev, edges: np.ndarray, n: int,
                       shift=None) -> np.ndarray:
    """Per-segment Gauss-Legendre integrals of fev (minus shift), (..., K+1)."""
    t, w = gauss_rule(n)
    lo = edges[..., :-1]
    hi = edges[..., 1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[..., None] + half[..., None] * t
    v = fev(x)
    if shift is not None:
        v = v - shift[..., None, None]
    return half * (v @ w)


def _root_refined_edges(fev, edges: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Insert one bisected root of f - mu per segment where the sign flips.

    Returns edges of shape (..., 2K+3): original edges interleaved with the
    roots; segments without a sign change get a zero-width placeholder at
    their right end.  Assumes at most one root per segment, which holds for
    the catalog entries (each is monotone between its breakpoints).
    """
    g_edges = fev(edges) - mu[..., None]
    lo = edges[..., :-1]
    hi = edges[..., 1:]
    glo = g_edges[..., :-1]
    ghi = g_edges[..., 1:]
    cross = (np.sign(glo) * np.sign(ghi)) < 0

    root = hi.copy()
    idx = np.nonzero(cross)
    if idx[0].size:
        blo = lo[idx]
        bhi = hi[idx]
        slo = np.sign(glo[idx])
        mu_rows = np.broadcast_to(mu[..., None], cross.shape)[idx]
        for _ in range(_ROOT_ITERS):
            xm = 0.5 * (blo + bhi)
            same_side = np.sign(fev(xm) - mu_rows) == slo
            blo = np.where(same_side, xm, blo)
            bhi = np.where(same_side, bhi, xm)
        root[idx] = 0.5 * (blo + bhi)

    out = np.empty(edges.shape[:-1] + (2 * edges.shape[-1] - 1,),
                   dtype=float)
    out[..., 0::2] = edges
    out[..., 1::2] = root
    return out


def _abs_moment_1d(fev, breakpoints, a: np.ndarray, r: np.ndarray,
                   mu: np.ndarray, q: float = 1.0) -> np.ndarray:
    """Ball average of |f - mu|^q in dimension one, exact segment route.

    a, r, mu are broadcast-compatible arrays; returns the same shape.
    """
    a = np.asarray(a, dtype=float)
    r = np.asarray(r, dtype=float)
    mu = np.asarray(mu, dtype=float)
    edges = _edges_1d(breakpoints, a - r, a + r)
    refined = _root_refined_edges(fev, edges, mu)
    if q == 1.0:
        seg = _segment_integrals(fev, refined, _GL_ORDER, shift=mu)
        total = np.abs(seg).sum(axis=-1)
        return total / (2.0 * r)
    # graded subdivision toward segment ends handles the |.|^q kink
    frac = 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, _GRADE_PANELS + 1)))
    lo = refined[..., :-1]
    hi = refined[..., 1:]
    sub = lo[..., None] + (hi - lo)[..., None] * frac
    t, w = gauss_rule(_GL_ORDER)
    slo = sub[..., :-1]
    shi = sub[..., 1:]
    half = 0.5 * (shi - slo)
    mid = 0.5 * (shi + slo)
    x = mid[..., None] + half[..., None] * t
    v = np.abs(fev(x) - mu[..., None, None, None]) ** q
    total = (half * (v @ w)).sum(axis=(-2, -1))
    return total / (2.0 * r)


def exact_oscillation_1d(f: TestFunction, a, r, q: float = 1.0,
                         mu_nodes: int = _GL_ORDER):
    """Deterministic (m_f, inner mean) over arrays of 1-d balls.

    Vectorized over broadcastable a and r arrays.  Exact to roundoff for
    piecewise-polynomial f of degree <= 2*mu_nodes - 1 per segment when q
    is 1, 2, or 3.
    """
    if f.dim != 1:
        raise QuadratureError("exact oscillation route applies to dimension one")
    fev = f.eval_1d
    a = np.asarray(a, dtype=float)
    r = np.asarray(r, dtype=float)
    a, r = np.broadcast_arrays(a, r)
    edges = _edges_1d(f.breakpoints_1d, a - r, a + r)
    mu = _segment_integrals(fev, edges, mu_nodes).sum(axis=-1) / (2.0 * r)
    moment = _abs_moment_1d(fev, f.breakpoints_1d, a, r, mu, q)
    if q != 1.0:
        moment = np.maximum(moment, 0.0) ** (1.0 / q)
    return moment, mu


# ---------------------------------------------------------------------------
# public single-ball operations
# ---------------------------------------------------------------------------

def q_oscillation(f: TestFunction, ball: BallSample, q: float,
                  spec: QuadratureSpec) -> EstimatedValue:
    """(average over the ball of |f - mean|^q)^(1/q).

    Nondecreasing in q for fixed inputs; q = 1 is the plain mean oscillation.
    """
    if not (np.isfinite(q) and q >= 1.0):
        raise ValueError(f"q must be a real number >= 1, got {q}")
    if ball.dim != f.dim:
        raise ValueError(f"ball dimension {ball.dim} does not match function dimension {f.dim}")

    if spec.method == "gauss_1d":
        mu = ball_average(lambda x: f.eval(x), ball, spec,
                          breakpoints=f.breakpoints_1d).value
        mom = _abs_moment_1d(f.eval_1d, f.breakpoints_1d,
                             ball.center[0], ball.radius,
                             np.asarray(mu), q)
        val = float(mom)
        if q != 1.0:
            val = max(val, 0.0) ** (1.0 / q)
        if not np.isfinite(val):
            raise QuadratureError("oscillation evaluated to a non-finite value")
        return EstimatedValue(val, 0.0)

    n = spec.node_count
    d = ball.dim
    half = max((n + 1) // 2, 1)
    u_in = unit_ball_nodes(d, half, stream(spec.seed, KEY_INNER))
    x_plus = ball.center[None, :] + ball.radius * u_in
    x_minus = ball.center[None, :] - ball.radius * u_in
    pair_vals = 0.5 * (np.asarray(f.eval(x_plus), dtype=float)
                       + np.asarray(f.eval(x_minus), dtype=float))
    mu = float(np.mean(pair_vals))
    se_mu = float(np.std(pair_vals, ddof=1) / np.sqrt(half)) if half > 1 else 0.0

    u_out = unit_ball_nodes(d, n, stream(spec.seed, KEY_OUTER))
    vals = np.asarray(f.eval(ball.center[None, :] + ball.radius * u_out),
                      dtype=float)
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(pair_vals))):
        raise QuadratureError("integrand produced non-finite values")
    y = np.abs(vals - mu) ** q
    m_q = float(np.mean(y))
    se_m = float(np.std(y, ddof=1) / np.sqrt(n))
    if q == 1.0:
        return EstimatedValue(m_q, se_m + se_mu)
    if m_q <= 0.0:
        return EstimatedValue(0.0, se_mu)
    val = m_q ** (1.0 / q)
    # delta method on the q-th moment, plus the 1-Lipschitz mean propagation
    se = (1.0 / q) * m_q ** (1.0 / q - 1.0) * se_m + se_mu
    return EstimatedValue(val, se)


def mean_oscillation(f: TestFunction, ball: BallSample,
                     spec: QuadratureSpec) -> EstimatedValue:
    """Ball average of |f - ball mean of f|; same code path as q = 1."""
    return q_oscillation(f, ball, 1.0, spec)


def pair_oscillation(f: TestFunction, ball: BallSample, q: float,
                     spec: QuadratureSpec) -> EstimatedValue:
    """(double ball average of |f(x) - f(y)|^q)^(1/q).

    Statistical in every dimension: two independent uniform samples are
    paired.  Sandwiched between the centered variant and twice it.
    """
    if not (np.isfinite(q) and q >= 1.0):
        raise ValueError(f"q must be a real number >= 1, got {q}")
    if ball.dim != f.dim:
        raise ValueError(f"ball dimension {ball.dim} does not match function dimension {f.dim}")
    n = spec.node_count
    d = ball.dim
    ux = unit_ball_nodes(d, n, stream(spec.seed, KEY_OUTER))
    uy = unit_ball_nodes(d, n, stream(spec.seed, KEY_PAIR))
    vx = np.asarray(f.eval(ball.center[None, :] + ball.radius * ux), dtype=float)
    vy = np.asarray(f.eval(ball.center[None, :] + ball.radius * uy), dtype=float)
    if not (np.all(np.isfinite(vx)) and np.all(np.isfinite(vy))):
        raise QuadratureError("integrand produced non-finite values")
    z = np.abs(vx - vy) ** q
    m_q = float(np.mean(z))
    se_m = float(np.std(z, ddof=1) / np.sqrt(n))
    if q == 1.0:
        return EstimatedValue(m_q, se_m)
    if m_q <= 0.0:
        return EstimatedValue(0.0, 0.0)
    return EstimatedValue(m_q ** (1.0 / q),
                          (1.0 / q) * m_q ** (1.0 / q - 1.0) * se_m)


def default_r_grid(f: TestFunction, ratio: float = 1.05) -> np.ndarray:
    """Geometric radius grid spanning [1e-3, 1e2] times the feature scale."""
    scale = f.support_radius if f.support_radius is not None else 1.0
    lo = 1e-3 * scale
    hi = 1e2 * scale
    count = int(np.ceil(np.log(hi / lo) / np.log(ratio))) + 1
    return lo * (hi / lo) ** (np.arange(count) / (count - 1))


def maximal_gradient(f: TestFunction, a, r_grid,
                     spec: QuadratureSpec) -> float:
    """Max over the radius grid of the ball average of |grad f| at center a.

    A grid restriction of the centered maximal function of |grad f|, hence a
    lower bound for it (exact in dimension one with gauss_1d, statistical
    otherwise).  Functions without a gradient are rejected.
    """
    if f.grad is None:
        raise UnsupportedFunctionError(
            f"{f.function_id} has no gradient; maximal averages are undefined")
    a = np.atleast_1d(np.asarray(a, dtype=float))
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.ndim != 1 or r_grid.size == 0 or np.any(r_grid <= 0):
        raise ValueError("r_grid must be a nonempty array of positive radii")

    if spec.method == "gauss_1d":
        if f.dim != 1:
            raise QuadratureError("gauss_1d applies to dimension one only")

        def gmag(x):
            return np.abs(f.grad(x[..., None])[..., 0])

        edges = _edges_1d(f.breakpoints_1d, a[0] - r_grid, a[0] + r_grid)
        seg = _segment_integrals(gmag, edges, _GL_ORDER)
        means = seg.sum(axis=-1) / (2.0 * r_grid)
        return float(np.max(means))

    u = unit_ball_nodes(f.dim, spec.node_count, stream(spec.seed, KEY_OUTER))
    x = a[None, None, :] + r_grid[:, None, None] * u[None, :, :]
    g = np.asarray(f.grad(x), dtype=float)
    mag = np.linalg.norm(g, axis=-1)
    if not np.all(np.isfinite(mag)):
        raise QuadratureError("gradient produced non-finite values")
    return float(np.max(np.mean(mag, axis=1)))
