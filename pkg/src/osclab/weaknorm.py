"""Superlevel statistics of the ball oscillation on center-radius space.

The reference measure on R^d x (0, infinity) is da x dr / r^(p+1).  For a
threshold kappa > 0 the object of interest is the measure of the superlevel
set {(a, r): m_f(a, r) > kappa}, restricted to a box window in the center
variable and to radii at most r_max.  The radius section at fixed center is
resolved deterministically: a geometric scan brackets every sign change of
m_f(a, .) - kappa, bisection refines each bracket, and the weight of the
resulting union of intervals has the closed form (lo^-p - hi^-p) / p per
interval.  Only the center integral is statistical, by (optionally
stratified) uniform sampling over the window.

The window's r_min is a numerical floor, not a truncation: scanning starts
at min(r_min, certified floor) and any section already above threshold at
the first scanned radius is resolved by a certified analytic bracket (the
small-radius expansion for differentiable entries, the constancy radius for
indicator entries), with the bracket's weight spread reported as ambiguity.
For entries with gradient certificates the certified floor sits below every
crossing, so the analytic path is a guard rather than the common case.

Two systematic truncations stay visible rather than hidden: the per-kappa
tail_bound column bounds the weight beyond r_max that the window cannot
see, and centers outside the box contribute nothing by construction (for a
compactly supported function and a box containing its support, that
contribution vanishes in the kappa^p-scaled limit).

Every center gets its own node stream keyed by global sample index, so
results are independent of chunking and thread count, and one scan is
shared across all thresholds (common random numbers), which makes the
curve exactly monotone in kappa up to bisection tolerance.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .catalog import TestFunction, grad_norm_p, unit_ball_volume
from .oscillation import exact_oscillation_1d
from .quadrature import EstimatedValue, QuadratureError, QuadratureSpec, stream, unit_ball_nodes

KEY_CENTERS = 3
KEY_BALL_OUT = 4
KEY_BALL_IN = 5

_CHUNK = 256
_MAX_SLOTS = 4


# ---------------------------------------------------------------------------
# constants and fault injection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FaultSpec:
    """Deliberate defects for mutation-sensitivity checks.

    slope_factor multiplies the oscillation slope constant, expansion_factor
    multiplies the certified quadratic remainder coefficient, and
    weight_exponent_shift perturbs the exponent used in measure weights.
    All defaults are the identity.
    """
    slope_factor: float = 1.0
    expansion_factor: float = 1.0
    weight_exponent_shift: float = 0.0

    @property
    def active(self) -> bool:
        return (self.slope_factor != 1.0 or self.expansion_factor != 1.0
                or self.weight_exponent_shift != 0.0)


def c_d_prime(d: int, fault: Optional[FaultSpec] = None) -> float:
    """Slope of the oscillation of a unit-gradient linear function.

    The mean absolute deviation of one coordinate over the unit ball:
    1/2 in dimension one, 4/(3 pi) in dimension two, 3/8 in three.
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    val = math.exp(math.lgamma((d + 2) / 2.0)
                   - math.lgamma((d + 3) / 2.0)) / math.sqrt(math.pi)
    if fault is not None:
        val *= fault.slope_factor
    return val


def c_dp(d: int, p: float, fault: Optional[FaultSpec] = None) -> float:
    """Limit constant for the scaled superlevel measure: c'_d^p / p."""
    if not (np.isfinite(p) and p >= 1.0):
        raise ValueError(f"p must be a real number >= 1, got {p}")
    return c_d_prime(d, fault) ** p / p


def expansion_remainder_coeff(d: int, grad_lipschitz: float,
                              fault: Optional[FaultSpec] = None) -> float:
    """Certified coefficient of the r^2 remainder in the small-r expansion.

    For f whose gradient is grad_lipschitz-Lipschitz, the deviation
    |m_f(a,r) - c'_d r |grad f(a)|| is at most this coefficient times r^2.
    """
    coeff = 3.0 * d / (d + 2.0) * grad_lipschitz
    if fault is not None:
        coeff *= fault.expansion_factor
    return coeff


def interval_weight(r_lo, r_hi, p: float,
                    fault: Optional[FaultSpec] = None):
    """Measure of a radius interval under dr / r^(p+1): (lo^-p - hi^-p) / p.

    r_hi may be None or inf for the full tail above r_lo.  Vectorized over
    array inputs.
    """
    if not (np.isfinite(p) and p >= 1.0):
        raise ValueError(f"p must be a real number >= 1, got {p}")
    pe = p + (fault.weight_exponent_shift if fault is not None else 0.0)
    lo = np.asarray(r_lo, dtype=float)
    if np.any(lo <= 0):
        raise ValueError("interval weight requires a positive lower radius")
    if r_hi is None:
        return lo ** (-pe) / pe
    hi = np.asarray(r_hi, dtype=float)
    if np.any(hi < lo):
        raise ValueError("interval must have r_hi >= r_lo")
    return (lo ** (-pe) - np.where(np.isinf(hi), 0.0, hi) ** (-pe)) / pe


# ---------------------------------------------------------------------------
# the center-radius window
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """Box window for centers plus the radius range of interest.

    box is ((lo, hi), ...) per coordinate.  Radii are truncated above at
    r_max; r_min is the numerical floor where scanning starts (sections
    reaching below it are resolved by certified analytic brackets, so the
    reported measure always refers to radii in (0, r_max]).
    """
    box: tuple
    r_max: float
    r_min: float

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        object.__setattr__(self, "box", box)
        if not box:
            raise ValueError("domain box must have at least one coordinate")
        for lo, hi in box:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"bad box side ({lo}, {hi})")
        if not (np.isfinite(self.r_max) and self.r_max > 0):
            raise ValueError("r_max must be finite and positive")
        if not 0.0 < self.r_min < self.r_max:
            raise ValueError("need 0 < r_min < r_max")

    @property
    def dim(self) -> int:
        return len(self.box)

    @property
    def volume(self) -> float:
        out = 1.0
        for lo, hi in self.box:
            out *= hi - lo
        return out


def default_domain(f: TestFunction, margin: float = 0.25,
                   r_max: Optional[float] = None) -> Domain:
    """Window with the support (or unit) scale padded by the margin.

    r_max defaults to 10 times (window diameter + support scale), where the
    certified tail bound makes the unseen weight negligible; r_min defaults
    to 1e-4 of the feature scale.
    """
    scale = f.support_radius if f.support_radius is not None else 1.0
    half = scale * (1.0 + margin)
    box = tuple((-half, half) for _ in range(f.dim))
    if r_max is None:
        diag = 2.0 * half * math.sqrt(f.dim)
        r_max = 10.0 * (diag + scale)
    return Domain(box=box, r_max=float(r_max), r_min=1e-4 * scale)


def default_kappa_grid(f: TestFunction, ratio: float = 10.0 ** 0.25,
                       decades: float = 4.0) -> np.ndarray:
    """Decreasing geometric threshold grid, top set by the gradient scale."""
    if f.grad_max is None or f.grad_max <= 0:
        raise ValueError(
            f"{f.function_id} has no gradient bound; pass thresholds explicitly")
    r_typ = f.support_radius if f.support_radius is not None else 1.0
    top = c_d_prime(f.dim) * r_typ * f.grad_max
    count = int(round(decades / math.log10(ratio))) + 1
    return np.geomspace(top, top * 10.0 ** (-decades), count)


def sample_centers(domain: Domain, count: int, seed: int,
                   stratify: bool = True):
    """Uniform centers over the window; returns (centers, stratum_ids, n_strata).

    With stratify the box is split into equal sub-cells, each receiving an
    equal share of the budget (the remainder spread one per cell), and one
    jittered point is drawn per slot.  The estimator stays unbiased (every
    point is uniform in its cell and the cells tile the box evenly) and the
    stratum ids support a per-stratum variance estimate.  Sampling order is
    sorted by stratum, so chunked consumers see a deterministic layout.
    """
    if count < 1:
        raise ValueError("need at least one center sample")
    d = domain.dim
    rng = stream(seed, KEY_CENTERS)
    lo = np.array([s[0] for s in domain.box])
    hi = np.array([s[1] for s in domain.box])
    k = max(1, int((count / 16) ** (1.0 / d))) if stratify else 1
    base = k ** d
    if base <= 1:
        u = rng.uniform(size=(count, d))
        return lo + u * (hi - lo), np.zeros(count, dtype=np.intp), 1
    per, extra = divmod(count, base)
    counts = np.full(base, per, dtype=np.intp)
    counts[:extra] += 1
    ids = np.repeat(np.arange(base, dtype=np.intp), counts)
    cell = np.stack(np.unravel_index(ids, (k,) * d), axis=-1).astype(float)
    u = rng.uniform(size=(count, d))
    pos = (cell + u) / k
    return lo + pos * (hi - lo), ids, base


# ---------------------------------------------------------------------------
# radius-section location: scan, slots, bisection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadiusInterval:
    """One connected piece of the radius section, with honesty flags.

    flags may contain "below_scan_floor" (already above threshold at the
    smallest scanned radius; r_lo comes from a certified analytic bracket
    whose half-width is endpoint_uncertainty), "open_at_r_max" (still above
    threshold at r_max, where the interval is truncated), and "merged"
    (more sign changes than slots; trailing pieces were merged).
    """
    r_lo: float
    r_hi: float
    flags: tuple = ()
    endpoint_uncertainty: float = 0.0


def _certified_floor(f: TestFunction, kappa: float) -> Optional[float]:
    """A radius certified to sit below every crossing of the threshold."""
    d = f.dim
    if f.grad_max is not None and f.grad_max > 0:
        r1 = kappa / (c_d_prime(d) * f.grad_max)
        if f.grad_lipschitz:
            c_rem = expansion_remainder_coeff(d, f.grad_lipschitz)
            return 0.3 * min(r1, math.sqrt(kappa / c_rem))
        return 0.3 * r1
    return None


def _scan_grid(f: TestFunction, domain: Domain, kappa_min: float,
               ratio: float) -> np.ndarray:
    if not 1.0 < ratio <= 1.3:
        raise ValueError("scan ratio must lie in (1, 1.3]")
    start = domain.r_min
    floor = _certified_floor(f, kappa_min)
    if floor is not None:
        start = min(start, floor)
    start = min(start, domain.r_max / ratio ** 2)
    n = int(math.ceil(math.log(domain.r_max / start) / math.log(ratio))) + 1
    return np.geomspace(start, domain.r_max, max(n, 3))


def _slot_positions(above: np.ndarray, max_slots: int):
    """Crossing positions per row from a boolean scan.

    Returns rise/fall position arrays of shape (C, max_slots) indexed into
    [0, J] (gap index: position j means between grid[j-1] and grid[j], with
    0 = below the scan start and J = beyond the last point), a validity
    mask, and the overflow rows whose extra crossings were merged into the
    last slot.
    """
    c_rows, j = above.shape
    pad = np.zeros((c_rows, 1), dtype=bool)
    padded = np.concatenate([pad, above, pad], axis=1)
    rises = padded[:, 1:] & ~padded[:, :-1]
    falls = ~padded[:, 1:] & padded[:, :-1]
    n_int = rises.sum(axis=1)
    overflow = n_int > max_slots

    rise_rank = np.cumsum(rises, axis=1)
    fall_rank = np.cumsum(falls, axis=1)
    rise_pos = np.zeros((c_rows, max_slots), dtype=np.intp)
    fall_pos = np.zeros((c_rows, max_slots), dtype=np.intp)
    valid = np.zeros((c_rows, max_slots), dtype=bool)
    for s in range(max_slots):
        mr = rises & (rise_rank == s + 1)
        mf = falls & (fall_rank == s + 1)
        valid[:, s] = mr.any(axis=1)
        rise_pos[:, s] = np.argmax(mr, axis=1)
        fall_pos[:, s] = np.argmax(mf, axis=1)
    if np.any(overflow):
        # merge everything past the last slot into it, ending at the final fall
        last_fall = j - np.argmax(falls[:, ::-1], axis=1)
        rows = np.nonzero(overflow)[0]
        fall_pos[rows, max_slots - 1] = last_fall[rows]
    return rise_pos, fall_pos, valid, overflow, rises, falls


def _merge_ambiguity(rises_row, falls_row, grid, max_slots, p, fault):
    """Grid-level weight gap introduced by merging overflow intervals."""
    rise_j = np.nonzero(rises_row)[0]
    fall_j = np.nonzero(falls_row)[0]

    def rad(j):
        if j <= 0:
            return grid[0]
        if j >= grid.size:
            return grid[-1]
        return math.sqrt(grid[j - 1] * grid[j])

    lo_m = rad(rise_j[max_slots - 1])
    hi_m = rad(fall_j[-1])
    merged = float(interval_weight(lo_m, hi_m, p, fault))
    strict = 0.0
    for i in range(max_slots - 1, len(rise_j)):
        strict += float(interval_weight(rad(rise_j[i]), rad(fall_j[i]), p, fault))
    return max(merged - strict, 0.0)


def _bisect_crossings(m_at, rows, lo, hi, kappa, rising, iters):
    """Lockstep bisection of m(row, .) - kappa on the given brackets."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above_mid = m_at(rows, mid) > kappa
        take_hi = above_mid == rising
        hi = np.where(take_hi, mid, hi)
        lo = np.where(take_hi, lo, mid)
    return 0.5 * (lo + hi)


def _below_floor_bracket(f: TestFunction, centers: np.ndarray, rows,
                         kappa: float, floor: float):
    """Certified (lo, hi) bracket for a crossing below the scanned range.

    For indicator entries in dimension one the oscillation vanishes while
    the ball stays clear of the jump set, so the breakpoint distance is a
    valid lower bound.  For differentiable entries the small-radius
    expansion m <= c' |grad f(a)| r + coeff r^2 gives the quadratic root.
    The scanned value at the floor being above threshold caps the bracket.
    """
    hi = np.full(rows.size, floor)
    lo = np.full(rows.size, floor * 0.1)
    if f.smoothness_tag == "indicator" and f.dim == 1 and f.breakpoints_1d:
        bps = np.asarray(f.breakpoints_1d, dtype=float)
        t = np.abs(centers[rows, 0][:, None] - bps).min(axis=1)
        lo = np.clip(t, floor * 1e-6, hi * 0.999999)
    elif f.grad is not None and f.grad_max:
        g = np.linalg.norm(np.asarray(f.grad(centers[rows]), dtype=float),
                           axis=-1)
        c1 = c_d_prime(f.dim) * g
        crem = expansion_remainder_coeff(f.dim, f.grad_lipschitz or 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            if crem > 0:
                r1 = (-c1 + np.sqrt(c1 * c1 + 4.0 * crem * kappa)) / (2.0 * crem)
            else:
                r1 = kappa / c1
        ok = np.isfinite(r1) & (r1 > 0)
        lo = np.where(ok, np.minimum(r1, hi * 0.999999), lo)
    return lo, hi


def _resolve_sections(m_at, above, grid, kappa, iters, f, centers,
                      p, fault, max_slots=_MAX_SLOTS):
    """Radius sections per row for one threshold.

    Returns lo, hi, valid, below_floor masks of shape (C, max_slots), the
    per-row ambiguity weight (bracket spreads plus merge gaps), and event
    counters.
    """
    c_rows, j = above.shape
    rise_pos, fall_pos, valid, overflow, rises, falls = _slot_positions(
        above, max_slots)
    lo = np.full((c_rows, max_slots), grid[-1])
    hi = np.full((c_rows, max_slots), grid[-1])
    ambig = np.zeros(c_rows)
    below = np.zeros((c_rows, max_slots), dtype=bool)
    counters = {"below_floor": 0, "open_at_r_max": 0, "merged": 0}

    for s in range(max_slots):
        v = valid[:, s]
        if not np.any(v):
            continue
        rp = rise_pos[:, s]
        fp = fall_pos[:, s]

        rows = np.nonzero(v & (rp > 0))[0]
        if rows.size:
            lo[rows, s] = _bisect_crossings(
                m_at, rows, grid[rp[rows] - 1], grid[rp[rows]], kappa,
                np.ones(rows.size, dtype=bool), iters)
        rows0 = np.nonzero(v & (rp == 0))[0]
        if rows0.size:
            blo, bhi = _below_floor_bracket(f, centers, rows0, kappa, grid[0])
            lo[rows0, s] = 0.5 * (blo + bhi)
            ambig[rows0] += interval_weight(blo, bhi, p, fault)
            below[rows0, s] = True
            counters["below_floor"] += rows0.size

        rows = np.nonzero(v & (fp < j))[0]
        if rows.size:
            hi[rows, s] = _bisect_crossings(
                m_at, rows, grid[fp[rows] - 1], grid[fp[rows]], kappa,
                np.zeros(rows.size, dtype=bool), iters)
        at_end = v & (fp == j)
        hi[at_end, s] = grid[-1]
        counters["open_at_r_max"] += int(np.count_nonzero(at_end))

    over_rows = np.nonzero(overflow)[0]
    for c in over_rows:
        ambig[c] += _merge_ambiguity(rises[c], falls[c], grid,
                                     max_slots, p, fault)
    counters["merged"] = int(over_rows.size)
    hi = np.maximum(hi, lo)
    return lo, hi, valid, below, ambig, counters


# ---------------------------------------------------------------------------
# scan engines
# ---------------------------------------------------------------------------

class _Exact1D:
    def __init__(self, f: TestFunction, centers: np.ndarray):
        self.f = f
        self.a = centers[:, 0]

    def scan(self, grid: np.ndarray) -> np.ndarray:
        m, _ = exact_oscillation_1d(self.f, self.a[:, None], grid[None, :])
        return m

    def m_at(self, rows, r):
        m, _ = exact_oscillation_1d(self.f, self.a[rows], r)
        return m


class _McScan:
    """Per-center pinned node sets in the ball-local frame.

    Each center's nodes are keyed by its global sample index, so m(a, r) is
    a deterministic, r-continuous function per center and results do not
    depend on chunk boundaries or thread count.  The inner mean uses an
    independent antithetic stream, which keeps the two-pass estimate
    unbiased for odd perturbations.
    """

    def __init__(self, f: TestFunction, centers: np.ndarray, seed: int,
                 node_count: int, global_start: int):
        c_rows, d = centers.shape
        n = node_count
        m = max((n + 1) // 2, 1)
        self.f = f
        self.centers = centers
        self.u_out = np.empty((c_rows, n, d))
        self.u_in = np.empty((c_rows, m, d))
        for i in range(c_rows):
            g = global_start + i
            self.u_out[i] = unit_ball_nodes(d, n, stream(seed, KEY_BALL_OUT, g))
            self.u_in[i] = unit_ball_nodes(d, m, stream(seed, KEY_BALL_IN, g))

    def m_at(self, rows, r):
        r = np.asarray(r, dtype=float)
        c = self.centers[rows][:, None, :]
        rr = r[:, None, None]
        ev = self.f.eval
        vo = np.asarray(ev(c + rr * self.u_out[rows]), dtype=float)
        vp = np.asarray(ev(c + rr * self.u_in[rows]), dtype=float)
        vm = np.asarray(ev(c - rr * self.u_in[rows]), dtype=float)
        mu = 0.5 * (vp + vm).mean(axis=1)
        return np.abs(vo - mu[:, None]).mean(axis=1)

    def scan(self, grid: np.ndarray) -> np.ndarray:
        c_rows = self.centers.shape[0]
        out = np.empty((c_rows, grid.size))
        c = self.centers[:, None, :]
        ev = self.f.eval
        for jj, r in enumerate(grid):
            vo = np.asarray(ev(c + r * self.u_out), dtype=float)
            vp = np.asarray(ev(c + r * self.u_in), dtype=float)
            vm = np.asarray(ev(c - r * self.u_in), dtype=float)
            mu = 0.5 * (vp + vm).mean(axis=1)
            out[:, jj] = np.abs(vo - mu[:, None]).mean(axis=1)
        return out


def _make_engine(f, centers, spec, global_start):
    if spec.method == "gauss_1d":
        if f.dim != 1:
            raise QuadratureError("gauss_1d applies to dimension one only")
        return _Exact1D(f, centers)
    return _McScan(f, centers, spec.seed, spec.node_count, global_start)


def _bisect_iters(ratio: float, rel_tol: float) -> int:
    width = math.log(ratio)
    return max(4, int(math.ceil(math.log2(width / rel_tol))))


def superlevel_radius_set(f: TestFunction, a, kappa: float, domain: Domain,
                          spec: QuadratureSpec, scan_ratio: float = 1.02,
                          rel_tol: float = 1e-6) -> list:
    """Connected radius intervals where m_f(a, .) exceeds kappa.

    Geometric scan at the given ratio from min(domain.r_min, certified
    floor) up to domain.r_max, then bisection of each bracketed crossing to
    relative tolerance rel_tol.  Honest about its blind spots via the
    RadiusInterval flags; see that class.
    """
    if not (np.isfinite(kappa) and kappa > 0):
        raise ValueError(f"kappa must be positive, got {kappa}")
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.shape != (f.dim,):
        raise ValueError(f"center must have shape ({f.dim},)")
    if domain.dim != f.dim:
        raise ValueError("domain dimension mismatch")
    grid = _scan_grid(f, domain, kappa, scan_ratio)
    centers = a[None, :]
    eng = _make_engine(f, centers, spec, 0)
    scan = eng.scan(grid)
    iters = _bisect_iters(scan_ratio, rel_tol)
    above = scan > kappa
    lo, hi, valid, below, _, _ = _resolve_sections(
        eng.m_at, above, grid, kappa, iters, f, centers, p=1.0, fault=None)
    _, fall_pos, _, overflow, _, _ = _slot_positions(above, _MAX_SLOTS)
    out = []
    j = grid.size
    for s in range(_MAX_SLOTS):
        if not valid[0, s]:
            continue
        flags = []
        err = rel_tol * hi[0, s]
        if below[0, s]:
            flags.append("below_scan_floor")
            err = max(err, 0.5 * grid[0])
        if fall_pos[0, s] == j:
            flags.append("open_at_r_max")
        if overflow[0] and s == _MAX_SLOTS - 1:
            flags.append("merged")
            err = max(err, float(np.diff(grid).max()))
        out.append(RadiusInterval(float(lo[0, s]), float(hi[0, s]),
                                  tuple(flags), float(err)))
    return out


# ---------------------------------------------------------------------------
# distribution curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistributionCurve:
    """Superlevel measure against threshold, with scaled values and bounds.

    kappa_grid is strictly decreasing; nu is the window-restricted measure
    estimate with nu_stderr its center-sampling standard error (bracket
    ambiguities included); scaled is kappa^p * nu; tail_bound bounds the
    weight beyond r_max that the window cannot see (measure units).
    """
    function_id: str
    dim: int
    p: float
    kappa_grid: np.ndarray
    nu: np.ndarray
    nu_stderr: np.ndarray
    tail_bound: np.ndarray
    domain: Domain
    samples: int
    seed: int
    method: str
    node_count: int
    counters: dict = field(default_factory=dict)

    @property
    def scaled(self) -> np.ndarray:
        return self.kappa_grid ** self.p * self.nu

    @property
    def scaled_stderr(self) -> np.ndarray:
        return self.kappa_grid ** self.p * self.nu_stderr


def _r_tail_bound(f: TestFunction, kappa: float, p: float,
                  domain: Domain) -> float:
    full = domain.volume * domain.r_max ** (-p) / p
    if f.l1_mass is None:
        return full
    gamma = 2.0 * f.l1_mass / unit_ball_volume(f.dim)
    r_top = (gamma / kappa) ** (1.0 / f.dim)
    if r_top <= domain.r_max:
        return 0.0
    return domain.volume * float(interval_weight(domain.r_max, r_top, p))


def _curve_chunk(f, centers, global_start, kappas, p, domain, spec,
                 fault, grid, iters):
    c_rows = centers.shape[0]
    eng = _make_engine(f, centers, spec, global_start)
    scan = eng.scan(grid)
    k_count = kappas.size
    weights = np.zeros((k_count, c_rows))
    ambig = np.zeros((k_count, c_rows))
    counters = {"below_floor": 0, "open_at_r_max": 0, "merged": 0}
    for ki, kappa in enumerate(kappas):
        lo, hi, valid, _, amb, cnt = _resolve_sections(
            eng.m_at, scan > kappa, grid, kappa, iters, f, centers, p, fault)
        w = np.where(valid & (hi > lo),
                     interval_weight(np.maximum(lo, 1e-300), hi, p, fault),
                     0.0)
        weights[ki] = w.sum(axis=1)
        ambig[ki] = amb
        for key in counters:
            counters[key] += cnt[key]
    return weights, ambig, counters


def _curve_engine(f: TestFunction, p: float, kappas: np.ndarray,
                  domain: Domain, spec: QuadratureSpec, samples: int,
                  threads: int, stratify: bool, fault, scan_ratio: float,
                  rel_tol: float) -> DistributionCurve:
    centers, strata, n_strata = sample_centers(domain, samples, spec.seed,
                                               stratify)
    grid = _scan_grid(f, domain, float(kappas[-1]), scan_ratio)
    iters = _bisect_iters(scan_ratio, rel_tol)

    starts = list(range(0, samples, _CHUNK))
    jobs = [(centers[s:s + _CHUNK], s) for s in starts]

    def run(job):
        chunk_centers, start = job
        return _curve_chunk(f, chunk_centers, start, kappas, p, domain,
                            spec, fault, grid, iters)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    k_count = kappas.size
    weights = np.empty((k_count, samples))
    ambig = np.empty((k_count, samples))
    counters = {"below_floor": 0, "open_at_r_max": 0, "merged": 0}
    for (w, am, cnt), start in zip(results, starts):
        weights[:, start:start + w.shape[1]] = w
        ambig[:, start:start + am.shape[1]] = am
        for key in counters:
            counters[key] += cnt[key]

    vol = domain.volume
    nu = vol * weights.mean(axis=1)
    if n_strata > 1:
        se = np.empty(k_count)
        for ki in range(k_count):
            acc = 0.0
            for s in range(n_strata):
                grp = weights[ki, strata == s]
                if grp.size > 1:
                    acc += grp.var(ddof=1) / grp.size
            se[ki] = vol * math.sqrt(acc) / n_strata
    else:
        se = vol * weights.std(axis=1, ddof=1) / math.sqrt(samples)
    se = se + vol * ambig.mean(axis=1)

    tail = np.array([_r_tail_bound(f, float(k), p, domain) for k in kappas])
    return DistributionCurve(
        function_id=f.function_id, dim=f.dim, p=float(p), kappa_grid=kappas,
        nu=nu, nu_stderr=se, tail_bound=tail, domain=domain,
        samples=samples, seed=spec.seed, method=spec.method,
        node_count=spec.node_count, counters=counters)


def distribution_curve(f: TestFunction, p: float, kappa_grid,
                       domain: Domain, spec: QuadratureSpec,
                       samples: int = 4096, threads: int = 1,
                       stratify: bool = True,
                       fault: Optional[FaultSpec] = None,
                       scan_ratio: float = 1.25,
                       rel_tol: float = 1e-6) -> DistributionCurve:
    """Estimate the superlevel measure for a whole threshold grid at once.

    The grid must be geometric-like: at least 8 decreasing points spanning
    at least 3 decades.  One radius scan per center is shared by every
    threshold (common random numbers), so the returned curve is monotone in
    kappa up to bisection tolerance.  Work is split into fixed-size chunks
    whose results are combined in order; threads changes wall time only,
    never the values.
    """
    if domain.dim != f.dim:
        raise ValueError(f"domain dimension {domain.dim} does not match function dimension {f.dim}")
    kappas = np.asarray(kappa_grid, dtype=float)
    if kappas.ndim != 1 or kappas.size < 8:
        raise ValueError("threshold grid needs at least 8 points")
    if not (np.all(np.isfinite(kappas)) and np.all(kappas > 0)):
        raise ValueError("thresholds must be positive finite reals")
    if not np.all(np.diff(kappas) < 0):
        raise ValueError("threshold grid must be strictly decreasing")
    if kappas[0] / kappas[-1] < 999.99:
        raise ValueError("threshold grid must span at least 3 decades")
    return _curve_engine(f, float(p), kappas, domain, spec, samples,
                         threads, stratify, fault, scan_ratio, rel_tol)


def superlevel_measure(f: TestFunction, p: float, kappa: float,
                       domain: Domain, spec: QuadratureSpec,
                       samples: int = 4096, stratify: bool = True,
                       fault: Optional[FaultSpec] = None) -> EstimatedValue:
    """Window-restricted measure of {m_f > kappa} at a single threshold."""
    if not (np.isfinite(kappa) and kappa > 0):
        raise ValueError(f"kappa must be positive, got {kappa}")
    curve = _curve_engine(f, float(p), np.array([float(kappa)]), domain,
                          spec, samples, 1, stratify, fault, 1.25, 1e-6)
    return EstimatedValue(float(curve.nu[0]), float(curve.nu_stderr[0]))


@dataclass(frozen=True)
class WeakSupEstimate:
    """Conservative grid supremum of the scaled curve.

    value = largest scaled point plus one standard error; kappa_at_max is
    where the grid attained it.  A finite-grid maximum, hence a lower-bound
    flavored estimate of the weak quasi-norm to the p.
    """
    value: float
    scaled_max: float
    std_error: float
    kappa_at_max: float


def weak_sup(curve: DistributionCurve) -> WeakSupEstimate:
    """Largest scaled value kappa^p * nu over the grid, plus one stderr."""
    scaled = curve.scaled
    i = int(np.argmax(scaled))
    return WeakSupEstimate(
        value=float(scaled[i] + curve.scaled_stderr[i]),
        scaled_max=float(scaled[i]),
        std_error=float(curve.scaled_stderr[i]),
        kappa_at_max=float(curve.kappa_grid[i]))


# ---------------------------------------------------------------------------
# small-threshold limit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitEstimate:
    """Extrapolated small-threshold limit of the scaled curve.

    uncertainty is the larger of the weighted fit residual and the fitted
    level's standard error; ok is False (with reasons in notes) when the
    sampling noise or the residual exceeds its threshold.
    """
    value: float
    uncertainty: float
    alpha: float
    rel_residual: float
    points_used: int
    ok: bool
    notes: tuple = ()


def limit_extrapolate(curve: DistributionCurve, min_points: int = 5,
                      span: float = 10.0, max_rel_stderr: float = 0.02,
                      alphas=(0.5, 0.75, 1.0, 1.25, 1.5),
                      max_rel_residual: float = 0.05) -> LimitEstimate:
    """Fit scaled(kappa) = L + c * kappa^alpha on the smallest thresholds.

    Uses the points within a factor of span of the smallest kappa (at
    least min_points required).  Weighted least squares per alpha on a
    small grid; the winner by residual provides L.  The exponent alpha is
    purely empirical and reported, never asserted.
    """
    kap = curve.kappa_grid
    mask = kap <= span * kap.min() * (1.0 + 1e-12)
    if int(mask.sum()) < min_points:
        raise ValueError(
            f"need at least {min_points} thresholds within a factor of {span} "
            f"of the smallest, got {int(mask.sum())}")
    x = kap[mask]
    y = curve.scaled[mask]
    sig = curve.scaled_stderr[mask]
    notes = []
    ok = True

    floor = max(1e-12 * max(abs(y).max(), 1e-300), 1e-300)
    w = 1.0 / np.maximum(sig, floor) ** 2
    best = None
    for alpha in alphas:
        design = np.stack([np.ones_like(x), x ** alpha], axis=1)
        a_mat = design.T @ (design * w[:, None])
        b_vec = design.T @ (y * w)
        try:
            coef = np.linalg.solve(a_mat, b_vec)
            cov = np.linalg.inv(a_mat)
        except np.linalg.LinAlgError:
            continue
        resid = y - design @ coef
        score = float(np.sqrt((w * resid ** 2).sum() / w.sum()))
        if best is None or score < best[0]:
            best = (score, float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0))),
                    float(alpha))
    if best is None:
        raise ValueError("extrapolation fit failed for every exponent")
    score, level, level_se, alpha = best
    rel_resid = score / abs(level) if level != 0 else math.inf

    rel_noise = float(np.max(sig / np.maximum(np.abs(y), 1e-300)))
    if rel_noise > max_rel_stderr:
        ok = False
        notes.append(f"sampling noise {rel_noise:.3g} exceeds {max_rel_stderr:g}")
    if rel_resid > max_rel_residual:
        ok = False
        notes.append(f"fit residual {rel_resid:.3g} exceeds {max_rel_residual:g}")
    return LimitEstimate(value=level, uncertainty=max(score, level_se),
                         alpha=alpha, rel_residual=rel_resid,
                         points_used=int(mask.sum()), ok=ok, notes=tuple(notes))


def reference_scaled_limit(f: TestFunction, p: float,
                           domain: Domain) -> Optional[float]:
    """Independent value of c_dp times the window integral of |grad f|^p.

    Closed form for linear entries; radial quadrature for plateau entries
    whose gradient support fits inside the window (the integral then equals
    the whole-space one).  None when no independent route exists.
    """
    if f.smoothness_tag == "linear" and f.grad_max is not None:
        return c_dp(f.dim, p) * f.grad_max ** p * domain.volume
    if f.function_id.startswith("plateau:") and f.support_radius is not None:
        inside = all(lo <= -f.support_radius and hi >= f.support_radius
                     for lo, hi in domain.box)
        if inside:
            return c_dp(f.dim, p) * grad_norm_p(f, p)
    return None


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def write_curve_csv(curve: DistributionCurve, path) -> None:
    """Write the curve with a commented, versioned header; the bytes depend
    only on the curve values, never on thread count."""
    box = " ".join(f"{lo!r}:{hi!r}" for lo, hi in curve.domain.box)
    lines = [
        "# osclab-curve-schema 1",
        f"# function_id={curve.function_id}",
        f"# dim={curve.dim} p={curve.p!r}",
        f"# box={box}",
        f"# r_min={curve.domain.r_min!r} r_max={curve.domain.r_max!r}",
        f"# samples={curve.samples} seed={curve.seed} "
        f"method={curve.method} node_count={curve.node_count}",
        "# counters " + " ".join(f"{k}={v}" for k, v in
                                 sorted(curve.counters.items())),
        "kappa,nu,nu_stderr,kappa_p_nu,tail_bound",
    ]
    scaled = curve.scaled
    for i in range(curve.kappa_grid.size):
        lines.append(",".join(repr(float(v)) for v in (
            curve.kappa_grid[i], curve.nu[i], curve.nu_stderr[i],
            scaled[i], curve.tail_bound[i])))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def curve_summary(curve: DistributionCurve,
                  limit: Optional[LimitEstimate] = None,
                  f: Optional[TestFunction] = None) -> dict:
    """JSON-ready digest of a curve in the documented report schema.

    Pass the function to fill reference_value (the independent target
    c_dp * integral of |grad f|^p) when one is computable.
    """
    sup = weak_sup(curve)
    reference = None
    if f is not None:
        reference = reference_scaled_limit(f, curve.p, curve.domain)
    out = {
        "function_id": curve.function_id,
        "d": curve.dim,
        "p": curve.p,
        "domain": {
            "box": [list(side) for side in curve.domain.box],
            "r_min": curve.domain.r_min,
            "r_max": curve.domain.r_max,
        },
        "sup_estimate": sup.value,
        "sup_at_kappa": sup.kappa_at_max,
        "limit_estimate": None,
        "limit_uncertainty": None,
        "limit_ok": None,
        "limit_notes": [],
        "reference_value": reference,
        "seeds": {"master": curve.seed},
        "samples": curve.samples,
        "method": curve.method,
        "node_count": curve.node_count,
        "counters": dict(curve.counters),
    }
    if limit is not None:
        out["limit_estimate"] = limit.value
        out["limit_uncertainty"] = limit.uncertainty
        out["limit_ok"] = limit.ok
        out["limit_notes"] = list(limit.notes)
    return out
