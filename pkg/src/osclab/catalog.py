"""Catalog of test functions with certified metadata.

Every entry is a pure, vectorized function of points in R^d together with
whatever certificates downstream estimators need: an exact gradient where one
exists, an upper bound for the Lipschitz constant of that gradient, the
radius outside which the function is constant, and, in dimension one, the
breakpoints between which the function is a polynomial.  Entries are
immutable and safe to share across threads.

String identifiers:
    linear:d=2:v=1,0
    plateau:d=1:a=1:ri=0.5:ro=1
    indicator:d=1:r=0.5          (optional :c=0.25 recenters the ball)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

SMOOTHNESS_TAGS = ("smooth_compact_gradient", "linear", "indicator", "custom")

# quintic taper shape S on [0, 1]: S(0)=0, S(1)=1, S'=S''=0 at both ends
_SPRIME_MAX = 15.0 / 8.0           # max of S' = 30 s^2 (1-s)^2, at s = 1/2
_SSECOND_MAX = 10.0 / math.sqrt(3)  # max of |S''| = |60 s (1-s) (1-2s)|


def _taper(s: np.ndarray) -> np.ndarray:
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s))


def _taper_d1(s: np.ndarray) -> np.ndarray:
    return 30.0 * s * s * (1.0 - s) ** 2


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


@dataclass(frozen=True)
class TestFunction:
    """A catalog entry.

    eval maps an array of shape (..., dim) to values of shape (...,).
    grad, when present, maps (..., dim) to (..., dim).
    grad_lipschitz is a certified upper bound for |grad f(x) - grad f(y)| / |x - y|,
    or None when the gradient does not exist as a function.
    support_radius is a radius outside which f is constant, or None.
    grad_max bounds sup |grad f|; breakpoints_1d lists the points (dimension
    one only) between which f is a single polynomial.
    l1_mass is the integral of |f - far_value| when finite, else None.
    """
    function_id: str
    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    grad: Optional[Callable[[np.ndarray], np.ndarray]]
    grad_lipschitz: Optional[float]
    support_radius: Optional[float]
    smoothness_tag: str
    grad_max: Optional[float] = None
    breakpoints_1d: tuple = ()
    far_value: float = 0.0
    l1_mass: Optional[float] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {self.dim}")
        if self.smoothness_tag not in SMOOTHNESS_TAGS:
            raise ValueError(f"unknown smoothness tag {self.smoothness_tag!r}")
        if self.support_radius is not None and self.support_radius <= 0:
            raise ValueError("support_radius must be positive when present")
        if self.grad_lipschitz is not None and self.grad_lipschitz < 0:
            raise ValueError("grad_lipschitz must be nonnegative")

    def eval_1d(self, x: np.ndarray) -> np.ndarray:
        """Convenience for dim == 1: accepts a bare coordinate array."""
        x = np.asarray(x, dtype=float)
        return self.eval(x[..., None])


def _fmt(x: float) -> str:
    return format(float(x), "g")


def make_linear(d: int, v) -> TestFunction:
    """f(x) = v . x, the function whose oscillation is exactly linear in r."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (d,):
        raise ValueError(f"direction must have shape ({d},), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("direction must be finite")
    vn = float(np.linalg.norm(v))
    fid = f"linear:d={d}:v=" + ",".join(_fmt(c) for c in v)

    def ev(x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) @ v

    def gr(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(v, x.shape).copy()

    return TestFunction(
        function_id=fid, dim=d, eval=ev, grad=gr,
        grad_lipschitz=0.0, support_radius=None,
        smoothness_tag="linear", grad_max=vn,
        breakpoints_1d=(), far_value=0.0, l1_mass=None)


def make_plateau_bump(d: int, amplitude: float, inner_radius: float,
                      outer_radius: float) -> TestFunction:
    """Radial C^2 bump: amplitude inside |x| <= ri, zero outside |x| >= ro,
    quintic taper in between.

    The gradient Lipschitz certificate comes from the closed-form Hessian of
    the taper: |f''| <= |A| max|S''| / w^2 radially and, for d >= 2, the
    tangential curvature adds |A| max(S') / (w ri) on the annulus.
    """
    A = float(amplitude)
    ri = float(inner_radius)
    ro = float(outer_radius)
    if not (0.0 < ri < ro):
        raise ValueError("need 0 < inner_radius < outer_radius")
    if not np.isfinite(A):
        raise ValueError("amplitude must be finite")
    w = ro - ri
    lip_radial = abs(A) * _SSECOND_MAX / w ** 2
    if d == 1:
        lip = lip_radial
    else:
        lip = max(lip_radial, abs(A) * _SPRIME_MAX / (w * ri))
    gmax = abs(A) * _SPRIME_MAX / w
    fid = f"plateau:d={d}:a={_fmt(A)}:ri={_fmt(ri)}:ro={_fmt(ro)}"

    def ev(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        rho = np.linalg.norm(x, axis=-1)
        s = np.clip((rho - ri) / w, 0.0, 1.0)
        return A * (1.0 - _taper(s))

    def gr(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        rho = np.linalg.norm(x, axis=-1)
        s = np.clip((rho - ri) / w, 0.0, 1.0)
        mag = -A * _taper_d1(s) / w
        safe = np.where(rho > 0.0, rho, 1.0)
        return (mag / safe)[..., None] * x

    # |f - 0| integrates to the core volume plus the taper shell
    shell = quad(lambda rho: (1.0 - _taper((rho - ri) / w)) * rho ** (d - 1),
                 ri, ro, epsabs=1e-14, epsrel=1e-13)[0]
    surf = d * unit_ball_volume(d)
    mass = abs(A) * (surf * ri ** d / d + surf * shell)

    return TestFunction(
        function_id=fid, dim=d, eval=ev, grad=gr,
        grad_lipschitz=lip, support_radius=ro,
        smoothness_tag="smooth_compact_gradient", grad_max=gmax,
        breakpoints_1d=(-ro, -ri, ri, ro) if d == 1 else (),
        far_value=0.0, l1_mass=mass)


def make_ball_indicator(d: int, radius: float, center=None) -> TestFunction:
    """Indicator of the closed ball of the given radius.

    The boundary convention is the closed ball: f = 1 when |x - c| <= radius.
    The choice only affects a measure-zero set and is fixed here so that the
    function is reproducible pointwise.
    """
    R = float(radius)
    if not (np.isfinite(R) and R > 0):
        raise ValueError("radius must be finite and positive")
    if center is None:
        c = np.zeros(d)
        cid = ""
    else:
        c = np.atleast_1d(np.asarray(center, dtype=float))
        if c.shape != (d,):
            raise ValueError(f"center must have shape ({d},)")
        cid = ":c=" + ",".join(_fmt(x) for x in c)
    fid = f"indicator:d={d}:r={_fmt(R)}" + cid

    def ev(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (np.linalg.norm(x - c, axis=-1) <= R).astype(float)

    bps = (float(c[0]) - R, float(c[0]) + R) if d == 1 else ()
    return TestFunction(
        function_id=fid, dim=d, eval=ev, grad=None,
        grad_lipschitz=None, support_radius=R + float(np.linalg.norm(c)),
        smoothness_tag="indicator", grad_max=None,
        breakpoints_1d=bps, far_value=0.0,
        l1_mass=unit_ball_volume(d) * R ** d)


def translate(f: TestFunction, shift) -> TestFunction:
    """g(x) = f(x - shift); metadata moves rigidly."""
    h = np.atleast_1d(np.asarray(shift, dtype=float))
    if h.shape != (f.dim,):
        raise ValueError("shift dimension mismatch")
    sup = None
    if f.support_radius is not None:
        sup = f.support_radius + float(np.linalg.norm(h))
    return replace(
        f,
        function_id=f.function_id + ":shifted",
        eval=lambda x, _f=f.eval: _f(np.asarray(x, dtype=float) - h),
        grad=(None if f.grad is None
              else (lambda x, _g=f.grad: _g(np.asarray(x, dtype=float) - h))),
        support_radius=sup,
        breakpoints_1d=tuple(b + h[0] for b in f.breakpoints_1d),
        smoothness_tag=f.smoothness_tag if f.smoothness_tag != "linear" else "custom")


def scale_values(f: TestFunction, lam: float) -> TestFunction:
    """g(x) = lam * f(x)."""
    lam = float(lam)
    return replace(
        f,
        function_id=f.function_id + f":times={_fmt(lam)}",
        eval=lambda x, _f=f.eval: lam * _f(x),
        grad=(None if f.grad is None
              else (lambda x, _g=f.grad: lam * _g(x))),
        grad_lipschitz=(None if f.grad_lipschitz is None
                        else abs(lam) * f.grad_lipschitz),
        grad_max=(None if f.grad_max is None else abs(lam) * f.grad_max),
        far_value=lam * f.far_value,
        l1_mass=(None if f.l1_mass is None else abs(lam) * f.l1_mass))


def dilate(f: TestFunction, s: float) -> TestFunction:
    """g(x) = f(x / s) for s > 0; lengths scale by s."""
    s = float(s)
    if s <= 0:
        raise ValueError("dilation factor must be positive")
    return replace(
        f,
        function_id=f.function_id + f":dilated={_fmt(s)}",
        eval=lambda x, _f=f.eval: _f(np.asarray(x, dtype=float) / s),
        grad=(None if f.grad is None
              else (lambda x, _g=f.grad: _g(np.asarray(x, dtype=float) / s) / s)),
        grad_lipschitz=(None if f.grad_lipschitz is None
                        else f.grad_lipschitz / s ** 2),
        grad_max=(None if f.grad_max is None else f.grad_max / s),
        support_radius=(None if f.support_radius is None
                        else f.support_radius * s),
        breakpoints_1d=tuple(b * s for b in f.breakpoints_1d),
        l1_mass=(None if f.l1_mass is None else f.l1_mass * s ** f.dim))


def grad_norm_p(f: TestFunction, p: float) -> float:
    """Integral of |grad f|^p over R^d by adaptive radial quadrature.

    Available for catalog entries whose gradient is radial or constant with
    bounded support of the gradient; used as an independent reference for
    distribution limits.
    """
    fid = f.function_id
    if fid.startswith("plateau:"):
        params = _parse_fields(fid)
        A = abs(float(params["a"]))
        ri = float(params["ri"])
        ro = float(params["ro"])
        w = ro - ri
        d = f.dim

        def g(rho):
            return (A * _taper_d1((rho - ri) / w) / w) ** p * rho ** (d - 1)

        val = quad(g, ri, ro, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        return d * unit_ball_volume(d) * val
    raise ValueError(f"no closed gradient-norm route for {fid!r}")


def _parse_fields(fid: str) -> dict:
    parts = fid.split(":")
    out = {"kind": parts[0]}
    for part in parts[1:]:
        if "=" not in part:
            raise ValueError(f"malformed identifier field {part!r} in {fid!r}")
        k, _, val = part.partition("=")
        out[k] = val
    return out


def parse_function_id(fid: str) -> TestFunction:
    """Build a catalog entry from its string identifier."""
    fields = _parse_fields(fid.strip())
    kind = fields.pop("kind")
    try:
        d = int(fields.pop("d"))
        if kind == "linear":
            v = [float(t) for t in fields.pop("v").split(",")]
            _reject_extras(fid, fields)
            return make_linear(d, v)
        if kind == "plateau":
            a = float(fields.pop("a"))
            ri = float(fields.pop("ri"))
            ro = float(fields.pop("ro"))
            _reject_extras(fid, fields)
            return make_plateau_bump(d, a, ri, ro)
        if kind == "indicator":
            r = float(fields.pop("r"))
            center = None
            if "c" in fields:
                center = [float(t) for t in fields.pop("c").split(",")]
            _reject_extras(fid, fields)
            return make_ball_indicator(d, r, center)
    except KeyError as missing:
        raise ValueError(
            f"identifier {fid!r} is missing the {missing.args[0]}= field"
        ) from None
    raise ValueError(f"unknown function kind {kind!r} in {fid!r}")


def _reject_extras(fid: str, fields: dict) -> None:
    if fields:
        raise ValueError(f"unexpected fields {sorted(fields)} in {fid!r}")


DEFAULT_IDS = (
    "linear:d=1:v=1",
    "linear:d=2:v=1,0",
    "linear:d=3:v=1,2,2",
    "plateau:d=1:a=1:ri=0.5:ro=1",
    "plateau:d=2:a=1:ri=0.5:ro=1",
    "plateau:d=3:a=1:ri=0.5:ro=1",
    "indicator:d=1:r=0.5",
)


def default_catalog() -> list[TestFunction]:
    return [parse_function_id(fid) for fid in DEFAULT_IDS]
