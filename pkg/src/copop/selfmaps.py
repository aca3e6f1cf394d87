"""Analytic self-maps of the unit disk.

Every family is stored as a quotient ``P/Q`` of polynomials with ascending
coefficients and ``Q`` zero-free on the closed disk.  Dilations and disk
automorphisms keep closed-form evaluation and inversion; polynomials,
Blaschke products and general rational maps find preimages by solving
``P(a) - z Q(a) = 0``.

The disk automorphism attached to ``a`` is ``sigma_a(z) = (a - z)/(1 - conj(a) z)``,
an involution exchanging ``0`` and ``a``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.signal import lfilter

from . import roots as _roots
from .errors import (ConstantMapError, DomainError, NotASelfMapError,
                     RootFindingError)

BOUNDARY_SAMPLES = 2048
BOUNDARY_TOL = 1e-12
INSIDE_TOL = 1e-14
RESIDUAL_TOL = 1e-10
CRITICAL_TOL = 1e-10
CRITICAL_JITTER = 1e-8
FAMILIES = ("polynomial", "dilation", "moebius", "blaschke", "rational")


def sigma(a, z):
    """The involutive disk automorphism ``(a - z) / (1 - conj(a) z)``."""
    return (a - z) / (1.0 - np.conj(a) * z)


def _trim(c):
    c = np.asarray(c, dtype=complex)
    nz = np.flatnonzero(c)
    return c[: nz[-1] + 1] if len(nz) else np.zeros(1, dtype=complex)


@dataclass(frozen=True, eq=False)
class SelfMap:
    """Analytic self-map ``phi = num/den`` of the unit disk."""

    family: str
    params: dict
    num: np.ndarray = field(repr=False)
    den: np.ndarray = field(repr=False)

    @property
    def degree(self):
        """Valence bound: number of preimages of a generic point, with multiplicity."""
        return max(len(self.num), len(self.den)) - 1

    @property
    def is_constant(self):
        return self.degree == 0

    @property
    def is_polynomial(self):
        return len(self.den) == 1

    def __call__(self, z):
        return self.evaluate(z)

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        if self.family == "moebius":
            a, rot = self.params["a"], cmath.exp(1j * self.params["theta"])
            return rot * sigma(a, z)
        out = P.polyval(z, self.num)
        if not self.is_polynomial:
            out = out / P.polyval(z, self.den)
        return out

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        if self.family == "moebius":
            a, rot = self.params["a"], cmath.exp(1j * self.params["theta"])
            return rot * (abs(a) ** 2 - 1.0) / (1.0 - np.conj(a) * z) ** 2
        dn = P.polyval(z, P.polyder(self.num)) if len(self.num) > 1 else 0 * z
        if self.is_polynomial:
            return dn / self.den[0]
        q = P.polyval(z, self.den)
        dq = P.polyval(z, P.polyder(self.den)) if len(self.den) > 1 else 0 * z
        return (dn * q - P.polyval(z, self.num) * dq) / (q * q)

    @cached_property
    def phi0(self):
        return complex(self.evaluate(0.0))

    @cached_property
    def critical_values(self):
        """Images of the critical points lying in the open disk."""
        if self.degree < 2:
            return np.empty(0, dtype=complex)
        w = P.polysub(P.polymul(P.polyder(self.num), self.den),
                      P.polymul(self.num, P.polyder(self.den)))
        w = _trim(w)
        if len(w) < 2:
            return np.empty(0, dtype=complex)
        crit = _roots.solve(w[::-1])
        crit = crit[np.abs(crit) < 1.0]
        return np.asarray(self.evaluate(crit), dtype=complex)

    @cached_property
    def image_radius(self):
        """``max |phi|`` on the boundary circle (1 for inner functions)."""
        if self.family in ("moebius", "blaschke"):
            return 1.0
        t = 2.0 * np.pi * np.arange(BOUNDARY_SAMPLES) / BOUNDARY_SAMPLES
        return float(np.abs(self.evaluate(np.exp(1j * t))).max())

    def to_descriptor(self):
        def cx(v):
            v = complex(v)
            return [v.real, v.imag]

        p = self.params
        if self.family == "polynomial":
            return {"family": "polynomial", "coeffs": [cx(c) for c in self.num]}
        if self.family == "dilation":
            return {"family": "dilation", "coeffs": [cx(p["lam"])]}
        if self.family == "moebius":
            return {"family": "moebius", "a": cx(p["a"]), "theta": p["theta"]}
        if self.family == "blaschke":
            return {"family": "blaschke", "zeros": [cx(a) for a in p["zeros"]],
                    "theta": p["theta"]}
        return {"family": "rational", "num": [cx(c) for c in self.num],
                "den": [cx(c) for c in self.den]}


# --------------------------------------------------------------------------
# constructors
# --------------------------------------------------------------------------

def _checked(phi, check):
    if check:
        report = validate_selfmap(phi)
        if not report.passes:
            raise NotASelfMapError(
                f"|phi| = {report.max_modulus:.17g} > 1 at boundary point "
                f"{report.location}", point=report.location,
                modulus=report.max_modulus)
    return phi


def polynomial(coeffs, check=True):
    """Polynomial map with ascending coefficients ``c_0 + c_1 z + ...``."""
    num = _trim(coeffs)
    return _checked(SelfMap("polynomial", {}, num, np.ones(1, dtype=complex)), check)


def dilation(lam, check=True):
    lam = complex(lam)
    num = np.array([0.0, lam]) if lam != 0 else np.zeros(1, dtype=complex)
    return _checked(SelfMap("dilation", {"lam": lam}, num,
                            np.ones(1, dtype=complex)), check)


def identity():
    return dilation(1.0)


def rotation(theta):
    return dilation(cmath.exp(1j * theta))


def moebius(a, theta=0.0):
    """``exp(i theta) * sigma_a``."""
    a = complex(a)
    if abs(a) >= 1:
        raise NotASelfMapError(f"automorphism parameter |a| = {abs(a)} >= 1")
    rot = cmath.exp(1j * theta)
    return SelfMap("moebius", {"a": a, "theta": float(theta)},
                   np.array([rot * a, -rot]), np.array([1.0, -np.conj(a)]))


def blaschke(zeros, theta=0.0):
    """Finite Blaschke product ``exp(i theta) prod (z - a_j)/(1 - conj(a_j) z)``."""
    zeros = tuple(complex(a) for a in zeros)
    if not zeros:
        raise DomainError("a Blaschke product needs at least one zero")
    if any(abs(a) >= 1 for a in zeros):
        raise NotASelfMapError("Blaschke zeros must lie in the open disk")
    num = cmath.exp(1j * theta) * P.polyfromroots(zeros).astype(complex)
    den = np.ones(1, dtype=complex)
    for a in zeros:
        den = P.polymul(den, [1.0, -np.conj(a)])
    return SelfMap("blaschke", {"zeros": zeros, "theta": float(theta)},
                   _trim(num), _trim(den))


def rational(num, den, check=True):
    """General rational map ``P/Q`` (ascending coefficients)."""
    num, den = _trim(num), _trim(den)
    if np.all(den == 0):
        raise DomainError("zero denominator")
    if len(den) > 1 and np.any(np.abs(_roots.solve(den[::-1])) <= 1.0):
        raise NotASelfMapError("denominator vanishes in the closed disk")
    if len(den) == 1:
        return polynomial(num / den[0], check=check)
    return _checked(SelfMap("rational", {}, num, den), check)


def map_from_descriptor(desc):
    def cx(v):
        if isinstance(v, (list, tuple)):
            return complex(v[0], v[1])
        return complex(v)

    family = desc.get("family")
    if family == "polynomial":
        return polynomial([cx(c) for c in desc["coeffs"]])
    if family == "dilation":
        return dilation(cx(desc["coeffs"][0]))
    if family == "moebius":
        return moebius(cx(desc["a"]), float(desc.get("theta", 0.0)))
    if family == "blaschke":
        return blaschke([cx(a) for a in desc["zeros"]],
                        float(desc.get("theta", 0.0)))
    if family == "rational":
        return rational([cx(c) for c in desc["num"]],
                        [cx(c) for c in desc["den"]])
    raise DomainError(f"unknown map family {family!r}")


def rotate(phi, post=0.0, pre=0.0):
    """``exp(i post) * phi(exp(i pre) z)`` within the same family."""
    ep, eq = cmath.exp(1j * post), cmath.exp(1j * pre)
    if phi.family == "moebius":
        return moebius(phi.params["a"] / eq, phi.params["theta"] + post + pre)
    if phi.family == "blaschke":
        zeros = [a / eq for a in phi.params["zeros"]]
        d = len(zeros)
        return blaschke(zeros, phi.params["theta"] + post + d * pre)
    if phi.family == "dilation":
        return dilation(phi.params["lam"] * ep * eq)
    k = np.arange(max(len(phi.num), len(phi.den)))
    num = phi.num * ep * eq ** k[: len(phi.num)]
    den = phi.den * eq ** k[: len(phi.den)]
    if phi.family == "polynomial":
        return polynomial(num / den[0], check=False)
    return rational(num, den, check=False)


def compose_moebius(b, phi):
    """``sigma_b o phi`` in the family of ``phi`` where possible, else rational."""
    b = complex(b)
    if abs(b) >= 1:
        raise DomainError("|b| must be < 1")
    if phi.family == "moebius":
        a, th = phi.params["a"], phi.params["theta"]
        zero = complex(sigma(a, b * cmath.exp(-1j * th)))
        if zero != 0:
            rot = complex(sigma(b, phi.evaluate(0.0))) / zero
        else:
            rot = -complex(phi.derivative(0.0)) * (abs(b) ** 2 - 1.0) / (
                1.0 - np.conj(b) * phi.phi0) ** 2
        return moebius(zero, cmath.phase(rot))
    num = P.polysub(b * phi.den, phi.num)
    den = P.polysub(phi.den, np.conj(b) * phi.num)
    return rational(num, den, check=False)


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def eval_map(phi, z, order=0):
    """``phi(z)`` (order 0) or ``phi'(z)`` (order 1) for ``|z| < 1``."""
    arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(arr) >= 1):
        raise DomainError("eval_map needs |z| < 1")
    out = phi.evaluate(arr) if order == 0 else phi.derivative(arr)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ValidationReport:
    passes: bool
    max_modulus: float
    location: complex
    structural: bool


def validate_selfmap(phi):
    """Boundary-sample check that ``phi`` maps the disk into itself."""
    t = 2.0 * np.pi * np.arange(BOUNDARY_SAMPLES) / BOUNDARY_SAMPLES
    zb = np.exp(1j * t)
    mod = np.abs(phi.evaluate(zb))
    k = int(np.argmax(mod))
    structural = phi.family in ("moebius", "blaschke")
    passes = structural or bool(mod[k] <= 1.0 + BOUNDARY_TOL)
    return ValidationReport(passes=passes, max_modulus=float(mod[k]),
                            location=complex(zb[k]), structural=structural)


def _require_nonconstant(phi):
    if phi.is_constant:
        raise ConstantMapError("counting functions are undefined for constant maps")


def preimages_batch(phi, z, jitter_critical=False):
    """All solutions of ``phi(a) = z_i`` for an array of targets.

    Returns ``(roots, inside)``: ``roots`` has shape ``(len(z), degree)``
    with one column per solution counted with multiplicity, ``inside``
    marks those in the open disk.  Solutions outside the disk (or lost to
    a degree drop) are NaN.
    """
    _require_nonconstant(phi)
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if jitter_critical and len(phi.critical_values):
        near = (np.abs(z[:, None] - phi.critical_values[None, :])
                <= CRITICAL_TOL).any(axis=1)
        if near.any():
            z = z.copy()
            zn = z[near]
            z[near] = np.where(zn == 0, CRITICAL_JITTER,
                               zn * (1.0 + CRITICAL_JITTER / np.maximum(np.abs(zn), 1e-300)))
    d = phi.degree
    if phi.family == "dilation":
        sol = (z / phi.params["lam"])[:, None]
    elif phi.family == "moebius":
        a, th = phi.params["a"], phi.params["theta"]
        sol = sigma(a, z * cmath.exp(-1j * th))[:, None]
    else:
        num = np.zeros(d + 1, dtype=complex)
        den = np.zeros(d + 1, dtype=complex)
        num[: len(phi.num)] = phi.num
        den[: len(phi.den)] = phi.den
        asc = num[None, :] - z[:, None] * den[None, :]
        desc = asc[:, ::-1]
        scale = np.abs(desc).max(axis=1)
        desc = _roots.normalize_rows(desc)
        scale = np.abs(desc).max(axis=1)
        degenerate = np.abs(desc[:, 0]) <= 1e-14 * scale
        sol = np.full((len(z), d), np.nan, dtype=complex)
        ok = ~degenerate
        if ok.any():
            sol[ok] = _roots.aberth(desc[ok])
        for i in np.flatnonzero(degenerate):
            r = _roots.solve(desc[i])
            sol[i, : len(r)] = r
    inside = np.isfinite(sol) & (np.abs(sol) < 1.0 - INSIDE_TOL)
    if inside.any():
        res = np.abs(phi.evaluate(np.where(inside, sol, 0.0)) - z[:, None])
        bad = inside & ~(res <= RESIDUAL_TOL)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise RootFindingError(
                f"preimage residual {res[i, j]:.3g} exceeds {RESIDUAL_TOL:g} "
                f"at z={z[i]}")
    sol = np.where(inside, sol, np.nan)
    return sol, inside


def preimages(phi, z, multiplicity=True):
    """Solutions of ``phi(a) = z`` in the open disk as ``[(a, multiplicity), ...]``.

    ``z = phi(0)`` is accepted; see :func:`at_phi0`.  With
    ``multiplicity=False`` every distinct preimage is reported once with
    multiplicity 1.
    """
    z = complex(z)
    if abs(z) >= 1:
        raise DomainError("preimages needs |z| < 1")
    sol, inside = preimages_batch(phi, np.array([z]))
    pts = sol[0][inside[0]]
    groups = _roots.cluster(pts)
    if not multiplicity:
        groups = [(a, 1) for a, _ in groups]
    return groups


def at_phi0(phi, z, tol=1e-12):
    return abs(complex(z) - phi.phi0) <= tol


class TaylorExpansion(NamedTuple):
    coeffs: np.ndarray
    tail: float


def taylor_coefficients(phi, M):
    """Taylor coefficients of ``phi`` at 0 up to degree ``M``."""
    if phi.is_polynomial:
        c = np.zeros(M + 1, dtype=complex)
        k = min(M + 1, len(phi.num))
        c[:k] = phi.num[:k] / phi.den[0]
        return c
    impulse = np.zeros(M + 1, dtype=complex)
    impulse[0] = 1.0
    return lfilter(phi.num, phi.den, impulse)


def _hardy_norms(phi, nmax, M):
    # int |phi(e^it)|^(2n) dt/2pi; trapezoid is exact for degree < samples
    k = BOUNDARY_SAMPLES
    while k < 4 * (M + 1):
        k *= 2
    t = 2.0 * np.pi * np.arange(k) / k
    b2 = np.abs(phi.evaluate(np.exp(1j * t))) ** 2
    n = np.arange(1, nmax + 1)
    return np.array([np.mean(b2 ** m) for m in n])


def power_table(phi, nmax, M):
    """Coefficients of ``phi**n`` for ``n = 1..nmax`` up to degree ``M``.

    Returns ``(coeffs, tails)`` with ``coeffs[n-1]`` the coefficients of
    ``phi**n`` and ``tails[n-1]`` a bound on the discarded mass
    ``sum_{k>M} |c_{n,k}|^2``.
    """
    if nmax < 1 or M < 0:
        raise DomainError("need nmax >= 1 and M >= 0")
    base = taylor_coefficients(phi, M)
    if phi.is_polynomial:
        short = _trim(base)
    else:
        short = base
    out = np.empty((nmax, M + 1), dtype=complex)
    cur = base.copy()
    out[0] = cur
    for n in range(2, nmax + 1):
        cur = np.convolve(cur, short)[: M + 1]
        out[n - 1] = cur
    kept = (np.abs(out) ** 2).sum(axis=1)
    if phi.is_polynomial:
        exact = np.arange(1, nmax + 1) * (len(short) - 1) <= M
        tails = np.zeros(nmax)
        if not exact.all():
            norms = _hardy_norms(phi, nmax, M)
            tails[~exact] = np.maximum(norms[~exact] - kept[~exact], 0.0)
    else:
        tails = np.maximum(_hardy_norms(phi, nmax, M) - kept, 0.0)
    return out, tails


def power_coefficients(phi, n, M):
    """Taylor coefficients ``c_{n,0..M}`` of ``phi(z)**n`` with a tail bound."""
    if n < 1:
        raise DomainError("n must be >= 1")
    coeffs, tails = power_table(phi, n, M)
    return TaylorExpansion(coeffs[-1], float(tails[-1]))
