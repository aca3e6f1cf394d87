"""Generalized Nevanlinna counting function and its ratio to the weight.

``N(z)`` sums the weight over the preimages of ``z`` under ``phi`` (with
multiplicity by default) and ``tau(z) = N(z) / w(|z|)``.  Besides pointwise
evaluation this module checks the two structural facts used throughout:
the change of variables

    int f(phi(z)) |phi'(z)|^2 w(z) dA(z) = int f(z) N(z) dA(z)

and the sub-mean value inequality on Euclidean disks away from the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quadrature as quad
from .errors import DomainError, GeometryError
from .selfmaps import at_phi0, preimages, preimages_batch
from .weights import eval_weight

SUBMEAN_SLACK = 1e-9


@dataclass(frozen=True)
class CountingSample:
    z: complex
    value: float
    preimage_count: int
    at_phi0: bool


def _distinct_mask(sol, inside, tol=1e-6):
    # keep the first member of every cluster of coincident roots
    keep = inside.copy()
    d = sol.shape[1]
    for j in range(1, d):
        for i in range(j):
            dup = inside[:, i] & (np.abs(sol[:, j] - sol[:, i]) <= tol)
            keep[:, j] &= ~dup
    return keep


def counting_values(phi, w, z, multiplicity=True, jitter_critical=True):
    """Vectorized ``N_{phi,w}`` on an array of points in the disk."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    sol, inside = preimages_batch(phi, z.ravel(), jitter_critical=jitter_critical)
    if not multiplicity:
        inside = _distinct_mask(sol, inside)
    mods = np.where(inside, np.abs(sol), 0.0)
    vals = np.where(inside, eval_weight(w, mods), 0.0)
    return vals.sum(axis=1).reshape(shape)


def tau_values(phi, w, z, multiplicity=True):
    z = np.asarray(z, dtype=complex)
    return counting_values(phi, w, z, multiplicity) / eval_weight(w, np.abs(z))


def counting_function(phi, w, z, multiplicity=True):
    """``N_{phi,w}(z)`` with its preimage count and the ``z = phi(0)`` flag."""
    z = complex(z)
    if abs(z) >= 1:
        raise DomainError("counting_function needs |z| < 1")
    pts = preimages(phi, z, multiplicity=multiplicity)
    value = 0.0
    count = 0
    for a, m in pts:
        value += m * eval_weight(w, abs(a))
        count += m
    return CountingSample(z=z, value=float(value), preimage_count=count,
                          at_phi0=at_phi0(phi, z))


def tau(phi, w, z, multiplicity=True):
    """``N_{phi,w}(z) / w(|z|)``."""
    return counting_function(phi, w, z, multiplicity).value / eval_weight(w, abs(complex(z)))


@dataclass(frozen=True)
class CovCheck:
    lhs: float
    rhs: float
    reldiff: float
    lhs_error: float
    rhs_error: float


def counting_breaks(phi):
    """Radii across which ``N`` may fail to be smooth (edge of a round image)."""
    if phi.family == "dilation":
        return (abs(phi.params["lam"]),)
    return ()


def verify_change_of_variables(phi, w, f, rule=quad.QuadratureRule(128, 256)):
    """Both sides of the change-of-variables identity for non-negative ``f``."""
    def pulled_back(z):
        return f(phi.evaluate(z)) * np.abs(phi.derivative(z)) ** 2

    lhs = quad.integrate(pulled_back, quad.disk(1.0), rule, measure=w)
    rhs = quad.integrate(lambda z: f(z) * counting_values(phi, w, z),
                         quad.disk(1.0, breaks=counting_breaks(phi)), rule)
    rel = abs(lhs.value - rhs.value) / max(abs(lhs.value), abs(rhs.value), 1e-300)
    return CovCheck(lhs.value, rhs.value, rel, lhs.error, rhs.error)


@dataclass(frozen=True)
class SubmeanCheck:
    lhs: float
    rhs: float
    holds: bool


def check_submean(phi, w, z, r, rule=quad.QuadratureRule(32, 64)):
    """``N(z) <= (2/r^2) int_{|zeta - z| < r} N dA`` for a disk avoiding |z| <= 1/2."""
    z = complex(z)
    if not (abs(z) - r > 0.5 and abs(z) + r < 1 and r > 0):
        raise GeometryError(
            f"D({z}, {r}) must lie in the annulus 1/2 < |z| < 1")
    lhs = counting_function(phi, w, z).value
    integral = quad.integrate(lambda t: counting_values(phi, w, t),
                              quad.euclidean_disk(z, r), rule,
                              estimate_error=False).value
    rhs = 2.0 / r ** 2 * integral
    return SubmeanCheck(lhs, rhs, bool(lhs <= rhs * (1.0 + SUBMEAN_SLACK) + SUBMEAN_SLACK))
