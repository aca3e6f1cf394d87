"""Radial weights on the unit disk, admissibility checks and moment sequences.

A weight is a positive function ``w(r)`` on ``[0, 1)``, extended radially to
the disk.  It determines two Hilbert spaces of analytic functions through
their monomial moments::

    omega_n = 2 n^2 int_0^1 r^(2n-1) w(r) dr    (omega_0 = 1)
    p_n     = 2     int_0^1 r^(2n+1) w(r) dr

so that ``omega_n = n^2 p_(n-1)`` for ``n >= 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from .errors import DomainError, QuadratureError

FD_STEP = 1e-5
DEFAULT_DELTAS = (0.1, 0.25, 0.5, 1.0, 2.0)
SIGN_TOL = 1e-9
L1_THRESHOLD = 1e-8


@dataclass(frozen=True, eq=False)
class Weight:
    """Radial weight with its first two derivatives.

    Use :func:`standard_weight`, :func:`custom_weight` or
    :func:`tabulated_weight` rather than the constructor.
    """

    family: str
    alpha: Optional[float]
    _eval: Callable = field(repr=False)
    _d1: Callable = field(repr=False)
    _d2: Callable = field(repr=False)
    deriv_scheme: str = "analytic"
    smoothed: bool = False
    samples: Optional[tuple] = field(default=None, repr=False)

    def __call__(self, r, order=0):
        return eval_weight(self, r, order)

    @property
    def label(self):
        if self.family == "standard":
            return f"(1-r^2)^{self.alpha:g}"
        return self.family

    def to_descriptor(self):
        if self.family == "standard":
            return {"family": "standard", "alpha": float(self.alpha)}
        if self.family == "custom-table":
            return {"family": "custom-table",
                    "samples": [[float(r), float(v)] for r, v in self.samples]}
        raise DomainError("callable custom weights have no serialized form")


def standard_weight(alpha):
    """The weight ``(1 - r^2)^alpha``, ``alpha > -1``."""
    alpha = float(alpha)
    if not alpha > -1:
        raise DomainError(f"standard weight needs alpha > -1, got {alpha}")

    def f0(r):
        return (1.0 - r * r) ** alpha

    def f1(r):
        return -2.0 * alpha * r * (1.0 - r * r) ** (alpha - 1.0)

    def f2(r):
        s = 1.0 - r * r
        return (-2.0 * alpha * s ** (alpha - 1.0)
                + 4.0 * alpha * (alpha - 1.0) * r * r * s ** (alpha - 2.0))

    return Weight("standard", alpha, f0, f1, f2)


def _central_differences(f, h):
    # Steps shrink near r = 1 so that every stencil stays inside [0, 1).
    def step(r):
        return np.minimum(h, (1.0 - r) / 2.0)

    def d1(r):
        r = np.asarray(r, dtype=float)
        hh = step(r)
        fwd = r < hh
        central = (f(r + hh) - f(np.where(fwd, r, r - hh))) / np.where(fwd, hh, 2 * hh)
        return central

    def d2(r):
        r = np.asarray(r, dtype=float)
        hh = step(r)
        lo = np.where(r < hh, r + hh, r)
        # forward stencil at the left end, centred elsewhere
        return (f(lo + hh) - 2.0 * f(lo) + f(lo - hh)) / (hh * hh)

    return d1, d2


def custom_weight(func, deriv1=None, deriv2=None, h=FD_STEP):
    """Wrap a user-supplied weight; missing derivatives use central differences."""

    def f0(r):
        return np.asarray(func(r), dtype=float)

    d1, d2 = _central_differences(f0, h)
    scheme = "analytic"
    if deriv1 is None or deriv2 is None:
        scheme = f"central-differences(h={h:g})"
    return Weight("custom", None, f0,
                  deriv1 if deriv1 is not None else d1,
                  deriv2 if deriv2 is not None else d2,
                  deriv_scheme=scheme)


def tabulated_weight(samples):
    """Cubic-spline weight through ``[(r, w(r)), ...]``; flagged as smoothed."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 4:
        raise DomainError("samples must be at least four [r, w(r)] pairs")
    order = np.argsort(arr[:, 0])
    r, v = arr[order, 0], arr[order, 1]
    if r[0] < 0 or r[-1] >= 1 or np.any(np.diff(r) <= 0):
        raise DomainError("sample radii must be distinct and lie in [0, 1)")
    if np.any(v <= 0):
        raise DomainError("weight samples must be positive")
    spline = CubicSpline(r, v)
    d1, d2 = spline.derivative(1), spline.derivative(2)
    return Weight("custom-table", None, spline, d1, d2,
                  deriv_scheme="cubic-spline", smoothed=True,
                  samples=tuple(map(tuple, arr[order])))


def weight_from_descriptor(desc):
    family = desc.get("family")
    if family == "standard":
        return standard_weight(desc["alpha"])
    if family == "custom-table":
        return tabulated_weight(desc["samples"])
    raise DomainError(f"unknown weight family {family!r}")


def eval_weight(w, r, order=0):
    """Evaluate ``w``, ``w'`` or ``w''`` at radius ``r`` (scalar or array)."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0) or np.any(arr >= 1) or np.any(~np.isfinite(arr)):
        raise DomainError("weight is defined on [0, 1) only")
    fn = (w._eval, w._d1, w._d2)[order]
    out = np.asarray(fn(arr), dtype=float)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# admissibility
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AdmissibilityReport:
    w1: bool
    w2: bool
    delta: Optional[float]
    w3: bool
    w4: str
    r0: float
    l1: bool
    l1_infimum: float
    margins: dict

    @property
    def admissible(self):
        return self.w1 and self.w2 and self.w3 and self.w4 != "fails"

    def as_dict(self):
        return {
            "admissible": self.admissible,
            "w1": self.w1,
            "w2": self.w2,
            "delta": self.delta,
            "w3": self.w3,
            "w4": self.w4,
            "r0": self.r0,
            "l1": self.l1,
            "l1_infimum": self.l1_infimum,
            "margins": dict(self.margins),
        }


def admissibility_grid(n, closest=1e-7):
    """``n`` radii from 0 to ``1 - closest``, geometrically clustered at 1."""
    return 1.0 - np.geomspace(1.0, closest, n)


def check_admissible(w, grid_size=10_000, delta_candidates=DEFAULT_DELTAS,
                     r0=0.0, tol=SIGN_TOL):
    """Sample-based check of the monotonicity, regularity, decay and
    convexity conditions, plus the dyadic ratio condition.

    Every verdict comes with the worst slack seen on the grid in
    ``report.margins`` (positive means satisfied with room to spare).
    """
    if grid_size < 100:
        raise DomainError("grid_size must be at least 100")
    if not 0 <= r0 < 1:
        raise DomainError("r0 must lie in [0, 1)")
    # finite-difference derivatives are noise-dominated very close to 1
    closest = 1e-7 if w.deriv_scheme in ("analytic", "cubic-spline") else 1e-4
    r = admissibility_grid(grid_size, closest)
    v = eval_weight(w, r)
    margins = {}

    rise = np.diff(v)
    margins["w1"] = float(-rise.max())
    w1 = bool(rise.max() <= tol)

    w2, delta = False, None
    logv = np.log(v)
    log1m = np.log1p(-r)
    margins["w2"] = None
    for d in delta_candidates:
        step = np.diff(logv - (1.0 + d) * log1m).min()
        if margins["w2"] is None or step > margins["w2"]:
            margins["w2"] = float(step)
        if step >= -tol:
            w2, delta = True, float(d)
            margins["w2"] = float(step)
            break

    # decay: log-log slope over the last three decades, or a tiny tail value
    tail = v[-1] / v[0]
    k = np.searchsorted(-log1m, -log1m[-1] - math.log(1e3))
    slope = (logv[-1] - logv[k]) / (log1m[-1] - log1m[k])
    margins["w3"] = float(slope)
    margins["w3_tail"] = float(tail)
    w3 = bool(slope >= 1e-2 or tail <= 1e-6)

    sel = r >= r0
    d1 = eval_weight(w, r[sel], 1)
    d2 = eval_weight(w, r[sel], 2)
    scale = max(1.0, float(np.abs(d2).max()) * 1e-12)
    convex = bool(d2.min() >= -tol * scale)
    concave = bool(d2.max() <= tol * scale)
    slope_tail = np.abs(d1[-len(d1) // 10:])
    flat_tail = bool(np.abs(d1).max() == 0
                     or slope_tail[-1] <= 1e-3 * np.abs(d1).max())
    margins["w4_convex"] = float(d2.min())
    margins["w4_concave"] = float(-d2.max())
    margins["w4_deriv_tail"] = float(slope_tail[-1])
    if convex and flat_tail:
        w4 = "type-I"
    elif concave:
        w4 = "type-II"
    else:
        w4 = "fails"

    l1_inf = check_l1(w)
    margins["l1"] = l1_inf
    return AdmissibilityReport(w1=w1, w2=w2, delta=delta, w3=w3, w4=w4,
                               r0=float(r0), l1=bool(l1_inf > L1_THRESHOLD),
                               l1_infimum=l1_inf, margins=margins)


def l1_ratios(w, kmax=50):
    """Dyadic ratios ``w(1 - 2^-(k+1)) / w(1 - 2^-k)`` for ``k = 0..kmax``.

    The list stops early (with a warning) once the weight underflows.
    """
    if kmax < 10:
        raise DomainError("kmax must be at least 10")
    if kmax > 51:
        raise DomainError("1 - 2^-(kmax+1) is not representable below 1")
    k = np.arange(kmax + 2)
    v = eval_weight(w, 1.0 - 2.0 ** (-k.astype(float)))
    ok = (v > 0) & np.isfinite(v)
    usable = int(np.argmin(ok)) if not ok.all() else len(v)
    if usable < len(v):
        warnings.warn(f"weight underflows at k={usable}; dyadic ratios "
                      f"truncated to k<{usable - 1}", RuntimeWarning,
                      stacklevel=2)
    v = v[:usable]
    return v[1:] / v[:-1]


def check_l1(w, kmax=50):
    """Infimum of the dyadic boundary ratios (0.0 if nothing is usable)."""
    ratios = l1_ratios(w, kmax)
    return float(ratios.min()) if len(ratios) else 0.0


# --------------------------------------------------------------------------
# moments
# --------------------------------------------------------------------------

@lru_cache(maxsize=32)
def gauss_legendre01(n):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, wts = special.roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * wts


@dataclass(frozen=True, eq=False)
class MomentTable:
    nmax: int
    omega_n: np.ndarray
    p_n: np.ndarray
    quadrature_error: float
    nodes: int
    closed_form_error: Optional[float] = None

    def to_csv(self):
        lines = ["n,omega_n,p_n"]
        for n in range(self.nmax + 1):
            lines.append(f"{n},{float(self.omega_n[n])!r},{float(self.p_n[n])!r}")
        return "\n".join(lines) + "\n"


def _bergman_moments(w, kmax, nodes):
    # r = 1 - u^q removes the endpoint singularity of (1 - r^2)^alpha;
    # q = 2 suffices for alpha >= 0, negative alpha needs a stronger map
    q = 2.0
    if w.family == "standard" and w.alpha < 0:
        q = 2.0 / (1.0 + w.alpha)
    u, wts = gauss_legendre01(nodes)
    uq = u ** q
    # the smallest nodes would round to r = 1 in fine rules
    r = np.minimum(1.0 - uq, np.nextafter(1.0, 0.0))
    logr = np.log1p(-uq)
    if w.family == "standard":
        # 1 - r^2 = u^q (2 - u^q) without cancellation
        wv = (uq * (2.0 - uq)) ** w.alpha
    else:
        wv = eval_weight(w, r)
    base = 2.0 * q * u ** (q - 1.0) * wv * wts
    expo = 2.0 * np.arange(kmax + 1) + 1.0
    out = np.empty(kmax + 1)
    chunk = max(1, 4_000_000 // nodes)
    for lo in range(0, kmax + 1, chunk):
        e = np.exp(np.outer(expo[lo:lo + chunk], logr))
        out[lo:lo + chunk] = (e * base).sum(axis=1)
    return out


def beta_moments(alpha, nmax):
    """Closed forms ``omega_n = n^2 B(n, alpha+1)``, ``p_n = B(n+1, alpha+1)``."""
    n = np.arange(nmax + 1, dtype=float)
    p = np.exp(special.betaln(n + 1.0, alpha + 1.0))
    omega = np.ones(nmax + 1)
    omega[1:] = n[1:] ** 2 * np.exp(special.betaln(n[1:], alpha + 1.0))
    return omega, p


def compute_moments(w, nmax, radial_nodes=64, rtol=1e-12, max_nodes=2 ** 14):
    """Moment sequences ``omega_n`` and ``p_n`` for ``n = 0..nmax``.

    Both sequences come from the same quadrature values, so
    ``omega_n[n] == n**2 * p_n[n-1]`` holds to rounding.  The rule doubles
    until successive passes agree to ``rtol``.

    Raises
    ------
    QuadratureError
        If ``max_nodes`` is reached first; ``achieved`` holds the last
        relative change.
    """
    if nmax < 1:
        raise DomainError("nmax must be at least 1")
    nodes = max(16, int(radial_nodes))
    prev = _bergman_moments(w, nmax, nodes)
    while True:
        nodes *= 2
        cur = _bergman_moments(w, nmax, nodes)
        err = float(np.max(np.abs(cur - prev) / np.abs(cur)))
        if err <= rtol:
            break
        if nodes >= max_nodes:
            raise QuadratureError(
                f"moment quadrature did not reach rtol={rtol:g} with "
                f"{nodes} nodes", achieved=err)
        prev = cur
    if np.any(cur <= 0):
        raise QuadratureError("non-positive moment; weight is not positive")
    p = cur
    omega = np.empty(nmax + 1)
    omega[0] = 1.0
    n = np.arange(1, nmax + 1, dtype=float)
    omega[1:] = n * n * p[:-1]
    cf_err = None
    if w.family == "standard":
        omega_cf, p_cf = beta_moments(w.alpha, nmax)
        cf_err = float(max(np.max(np.abs(omega - omega_cf) / omega_cf),
                           np.max(np.abs(p - p_cf) / p_cf)))
    return MomentTable(nmax=int(nmax), omega_n=omega, p_n=p,
                       quadrature_error=err, nodes=nodes,
                       closed_form_error=cf_err)
