"""Numerical readings of the essential norm, Schatten membership and closed
range of a composition operator, all expressed through ``tau = N / w``.

Asymptotic statements need explicit numerical thresholds; the defaults
below are configurable suite constants, and every report carries the
admissibility stamp of the weight so that runs outside the hypotheses of
the underlying theorems are visible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
import numpy as np
from scipy.special import gammaln

from . import quadrature as quad
from .counting import counting_breaks, counting_values, tau_values
from .errors import DomainError
from .operator import diagnose_increments
from .selfmaps import compose_moebius, sigma
from .weights import check_admissible, compute_moments, eval_weight

DEFAULT_RADII = (0.9, 0.99, 0.999, 0.9999)
DEFAULT_ANGLES = 512
COMPACT_TOL = 1e-6
NOTCOMPACT_TOL = 1e-3
CLOSED_RANGE_TOL = 1e-4
DEFAULT_A_GRID = (0.5, 0.75, 0.9)


def admissibility_stamp(w, report=None):
    report = report or check_admissible(w)
    if not report.admissible:
        warnings.warn("weight is not admissible; diagnostics are outside "
                      "the hypotheses of the characterizations", RuntimeWarning,
                      stacklevel=3)
    return {"admissible": report.admissible, "w4": report.w4,
            "l1": report.l1, "delta": report.delta}


# --------------------------------------------------------------------------
# essential norm
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EssentialNormProfile:
    radii: np.ndarray
    sup_values: np.ndarray
    inf_values: np.ndarray
    angular_argmax: np.ndarray
    extrapolated_limsup: float
    verdict: str
    compact_tol: float = COMPACT_TOL
    notcompact_tol: float = NOTCOMPACT_TOL
    stamp: dict = field(default_factory=dict)

    def to_csv(self):
        lines = ["r,sup_tau"]
        lines += [f"{float(r)!r},{float(s)!r}" for r, s in zip(self.radii, self.sup_values)]
        return "\n".join(lines) + "\n"

    def as_dict(self):
        return {
            "radii": [float(r) for r in self.radii],
            "sup_values": [float(s) for s in self.sup_values],
            "inf_values": [float(s) for s in self.inf_values],
            "angular_argmax": [float(t) for t in self.angular_argmax],
            "extrapolated_limsup": self.extrapolated_limsup,
            "verdict": self.verdict,
            "admissibility": self.stamp,
        }


def _ring_extremes(phi, w, r, m):
    theta = 2.0 * np.pi * np.arange(m) / m
    t = tau_values(phi, w, r * np.exp(1j * theta))
    k = int(np.argmax(t))
    best, arg = float(t[k]), float(theta[k])
    # local refinement around the sampled maximum
    step = 2.0 * np.pi / m
    fine = arg + np.linspace(-2 * step, 2 * step, 65)
    tf = tau_values(phi, w, r * np.exp(1j * fine))
    j = int(np.argmax(tf))
    if tf[j] > best:
        best, arg = float(tf[j]), float(fine[j] % (2 * np.pi))
    return best, float(t.min()), arg


def _extrapolate(s):
    if len(s) < 3:
        return float(s[-1])
    d1, d2 = s[-2] - s[-3], s[-1] - s[-2]
    if abs(d2) <= 1e-12 * max(1.0, abs(s[-1])):
        return float(s[-1])
    if d1 != 0 and abs(d2 / d1) < 1:
        q = d2 / d1
        return float(s[-1] + d2 * q / (1 - q))
    if d2 > 0 and d1 > 0:
        return math.inf
    return float(s[-1])


def compactness_verdict(profile, tol=None, notcompact_tol=None):
    """Read a profile: ``Compact``, ``NotCompact``, ``Unbounded-indicator``
    or ``Inconclusive``."""
    tol = profile.compact_tol if tol is None else tol
    ntol = profile.notcompact_tol if notcompact_tol is None else notcompact_tol
    return _verdict(np.asarray(profile.sup_values), tol, ntol)


def _verdict(s, tol, ntol):
    tail = s[-3:]
    if np.all(tail < tol):
        return "Compact"
    if len(tail) == 3 and np.all(np.diff(tail) > 0) and tail[-1] > 2.0 * tail[0]:
        return "Unbounded-indicator"
    if np.all(tail > ntol) and abs(tail[-1] - tail[-2]) <= 0.5 * tail[-1]:
        return "NotCompact"
    return "Inconclusive"


def essential_norm_profile(phi, w, radii=DEFAULT_RADII, angles_per_radius=DEFAULT_ANGLES,
                           compact_tol=COMPACT_TOL, notcompact_tol=NOTCOMPACT_TOL,
                           stamp=None):
    """Angular suprema of ``tau`` on circles approaching the boundary."""
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0) or radii[0] <= 0 or radii[-1] >= 1:
        raise DomainError("radii must increase inside (0, 1)")
    sups, infs, args = [], [], []
    for r in radii:
        s, i, a = _ring_extremes(phi, w, r, angles_per_radius)
        sups.append(s)
        infs.append(i)
        args.append(a)
    sups = np.array(sups)
    return EssentialNormProfile(
        radii=radii, sup_values=sups, inf_values=np.array(infs),
        angular_argmax=np.array(args), extrapolated_limsup=_extrapolate(sups),
        verdict=_verdict(sups, compact_tol, notcompact_tol),
        compact_tol=compact_tol, notcompact_tol=notcompact_tol,
        stamp=stamp if stamp is not None else admissibility_stamp(w))


# --------------------------------------------------------------------------
# Schatten classes
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SchattenReport:
    p: float
    R_sequence: tuple
    integral_values: tuple
    verdict: str
    growth_exponent: float
    limit: float
    stamp: dict = field(default_factory=dict)

    def to_csv(self):
        lines = ["R,integral"]
        lines += [f"{float(r)!r},{float(v)!r}" for r, v in zip(self.R_sequence, self.integral_values)]
        return "\n".join(lines) + "\n"

    def as_dict(self):
        return {"p": self.p, "R_sequence": list(self.R_sequence),
                "integral_values": list(self.integral_values),
                "verdict": self.verdict, "growth_exponent": self.growth_exponent,
                "limit": self.limit, "admissibility": self.stamp}


_SCHATTEN_VERDICT = {"finite": "in-Sp", "diverging": "not-in-Sp",
                     "inconclusive": "inconclusive"}


def schatten_integral(phi, w, p, rule=quad.QuadratureRule(64, 128),
                      R_sequence=(0.9, 0.99, 0.999), stamp=None):
    """Truncated integrals of ``tau^(p/2)`` against the hyperbolic measure."""
    if p <= 0:
        raise DomainError("p must be positive")
    R_sequence = tuple(float(r) for r in R_sequence)
    if len(R_sequence) < 2 or any(b <= a for a, b in zip(R_sequence, R_sequence[1:])) \
            or R_sequence[-1] >= 1:
        raise DomainError("R_sequence must have two or more increasing radii below 1")
    breaks = counting_breaks(phi)

    def f(z):
        return tau_values(phi, w, z) ** (p / 2.0)

    edges = (0.0,) + R_sequence
    total, cumulative = 0.0, []
    for lo, hi in zip(edges[:-1], edges[1:]):
        region = quad.disk(hi, breaks) if lo == 0 else quad.annulus(lo, hi, breaks)
        total += quad.integrate(f, region, rule, measure="hyperbolic",
                                estimate_error=False).value
        cumulative.append(total)
    diag = diagnose_increments(R_sequence, cumulative)
    return SchattenReport(p=float(p), R_sequence=R_sequence,
                          integral_values=tuple(cumulative),
                          verdict=_SCHATTEN_VERDICT[diag.verdict],
                          growth_exponent=diag.growth_exponent, limit=diag.limit,
                          stamp=stamp if stamp is not None else admissibility_stamp(w))


def berezin_transform(phi, w, z, r, rule=quad.QuadratureRule(32, 64)):
    """Average of ``tau * w`` over the pseudo-hyperbolic disk ``Delta(z, r)``,
    normalized by ``(1 - |z|^2)^2 w(z)``."""
    z = complex(z)
    if abs(z) >= 1 or not 0 < r < 1:
        raise DomainError("need |z| < 1 and 0 < r < 1")
    region = quad.pseudo_hyperbolic_disk(z, r)
    # tau(t) w(t) = N(t)
    integral = quad.integrate(lambda t: counting_values(phi, w, t), region, rule,
                              estimate_error=False).value
    return integral / ((1.0 - abs(z) ** 2) ** 2 * eval_weight(w, abs(z)))


# --------------------------------------------------------------------------
# lemma-level checks
# --------------------------------------------------------------------------

def _test_function_terms(w, a, delta):
    s = 1.0 + delta
    x = abs(a) ** 2
    logc = s * math.log1p(-x) - 0.5 * math.log(eval_weight(w, abs(a)))
    return s, x, logc


def test_function_norm(w, a, delta, M=None, moments=None):
    """``H_w`` norm of the normalized kernel-type test function at ``a``.

    The Taylor coefficients of ``(1 - conj(a) z)^-(1+delta)`` are binomial;
    the series is cut at ``M`` (chosen from ``|a|`` when omitted) and the
    remainder is bounded geometrically.
    """
    a = complex(a)
    if abs(a) >= 1 or delta <= 0:
        raise DomainError("need |a| < 1 and delta > 0")
    s, x, logc = _test_function_terms(w, a, delta)
    if x == 0:
        return math.exp(logc)
    if M is None:
        M = int(45.0 / -math.log(x)) + 64
    if moments is None or moments.nmax < M:
        moments = compute_moments(w, M)
    k = np.arange(1, M + 1, dtype=float)
    logg = gammaln(k + s) - gammaln(s) - gammaln(k + 1.0)
    terms = np.exp(2.0 * (logc + logg) + k * math.log(x)) * moments.omega_n[1:M + 1]
    q = terms[-1] / terms[-2]
    tail = terms[-1] * q / (1.0 - q) if q < 1 else math.inf
    return math.sqrt(math.exp(2.0 * logc) + terms.sum() + tail)


test_function_norm.__test__ = False


def weight_comparability(w, b, radial=200, angular=256):
    """Extremes of ``w(|sigma_b(z)|) / w(|z|)`` over a boundary-clustered grid."""
    b = complex(b)
    r = 1.0 - np.geomspace(1.0, 1e-6, radial)
    theta = 2.0 * np.pi * np.arange(angular) / angular
    z = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    moved = np.minimum(np.abs(sigma(b, z)), np.nextafter(1.0, 0.0))
    ratio = eval_weight(w, moved) / eval_weight(w, np.abs(z))
    return float(ratio.max()), float(ratio.min())


# --------------------------------------------------------------------------
# closed range
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """``monomial`` z^n, or the normalized kernel-type function at ``a``."""

    kind: str
    n: int = 0
    a: complex = 0j
    delta: float = 1.0

    __test__ = False

    @property
    def name(self):
        if self.kind == "monomial":
            return f"z^{self.n}"
        return f"f_a(a={self.a.real:g}{self.a.imag:+g}i,delta={self.delta:g})"

    def derivative(self, z, w):
        if self.kind == "monomial":
            return self.n * z ** (self.n - 1)
        s, _, logc = _test_function_terms(w, self.a, self.delta)
        ac = np.conj(self.a)
        return math.exp(logc) * s * ac * (1.0 - ac * z) ** (-s - 1.0)


def monomial(n):
    if n < 1:
        raise DomainError("monomial degree must be >= 1 (constants have f' = 0)")
    return TestFunction("monomial", n=int(n))


def kernel_test_function(a, delta):
    a = complex(a)
    if a == 0 or abs(a) >= 1:
        raise DomainError("test function needs 0 < |a| < 1 (f_0 is constant)")
    return TestFunction("test", a=a, delta=float(delta))


class _ProbeGrid:
    def __init__(self, phi, w, rule):
        self.w = w
        self.z, wt = quad.nodes(quad.disk(1.0, counting_breaks(phi)), rule)
        self.wn = wt * counting_values(phi, w, self.z)
        self.ww = wt * eval_weight(w, np.abs(self.z))

    def ratio(self, f):
        d2 = np.abs(f.derivative(self.z, self.w)) ** 2
        return float(np.sum(d2 * self.wn) / np.sum(d2 * self.ww))


def closed_range_ratio(phi, w, f, rule=quad.QuadratureRule(128, 256)):
    """``int |f'|^2 tau w dA / int |f'|^2 w dA`` for one test function."""
    return _ProbeGrid(phi, w, rule).ratio(f)


@dataclass(frozen=True)
class ClosedRangeReport:
    family: tuple
    ratios: tuple
    infimum: float
    verdict: str
    normalized_origin: bool = False
    stamp: dict = field(default_factory=dict)

    def to_csv(self):
        lines = ["test_fn,ratio"]
        lines += [f"{name},{float(v)!r}" for name, v in zip(self.family, self.ratios)]
        return "\n".join(lines) + "\n"

    def as_dict(self):
        return {"family": list(self.family), "ratios": list(self.ratios),
                "infimum": self.infimum, "verdict": self.verdict,
                "normalized_origin": self.normalized_origin,
                "admissibility": self.stamp}


def probe_family(nmax_monomials=40, a_grid=DEFAULT_A_GRID, delta=1.0):
    fam = [monomial(n) for n in range(1, nmax_monomials + 1)]
    fam += [kernel_test_function(a, delta) for a in a_grid]
    return fam


def closed_range_probe(phi, w, family=None, rule=quad.QuadratureRule(128, 256),
                       normalize_origin=False, tol=CLOSED_RANGE_TOL, stamp=None):
    """Smallest ratio over a finite family of test functions.

    A small infimum refutes closed range; a large one only means the
    necessary condition survived these witnesses.
    """
    if normalize_origin and phi.phi0 != 0:
        phi = compose_moebius(phi.phi0, phi)
    if family is None:
        report = check_admissible(w)
        family = probe_family(delta=report.delta or 1.0)
        stamp = stamp if stamp is not None else admissibility_stamp(w, report)
    grid = _ProbeGrid(phi, w, rule)
    ratios = tuple(grid.ratio(f) for f in family)
    inf = float(min(ratios))
    verdict = "fails" if inf < tol else "necessary-condition-passes"
    return ClosedRangeReport(family=tuple(f.name for f in family), ratios=ratios,
                             infimum=inf, verdict=verdict,
                             normalized_origin=bool(normalize_origin),
                             stamp=stamp if stamp is not None else admissibility_stamp(w))
