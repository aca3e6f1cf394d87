"""Polar product rules on disks, annuli and sub-disks of the unit disk.

The area measure is normalized, ``dA = r dr dtheta / pi``, so the unit disk
has mass one.  Radial nodes are Gauss-Legendre, angular nodes the uniform
trapezoid rule.  Rules over regions reaching beyond radius 0.9 map the
radial parameter through ``t -> 1 - (1 - t)^2`` to crowd nodes toward the
outer edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, QuadratureError
from .selfmaps import sigma
from .weights import Weight, eval_weight, gauss_legendre01

CLUSTER_RADIUS = 0.9


@dataclass(frozen=True)
class QuadratureRule:
    radial_nodes: int = 64
    angular_nodes: int = 128

    def refined(self):
        return QuadratureRule(2 * self.radial_nodes, 2 * self.angular_nodes)


@dataclass(frozen=True)
class Region:
    """``disk`` (|z| < R), ``annulus`` (R1 < |z| < R2), ``euclidean-disk``
    D(center, radius) or ``pseudo-hyperbolic`` Delta(a, r)."""

    kind: str
    inner: float = 0.0
    outer: float = 1.0
    center: complex = 0j
    radius: float = 0.0
    breaks: tuple = ()

    def __post_init__(self):
        if self.kind in ("disk", "annulus"):
            if not 0 <= self.inner < self.outer <= 1:
                raise DomainError(f"bad radii {self.inner}, {self.outer}")
        elif self.kind in ("euclidean-disk", "pseudo-hyperbolic"):
            if abs(self.center) + self.radius >= 1 or self.radius <= 0:
                raise DomainError("sub-disk must lie inside the unit disk")
        else:
            raise DomainError(f"unknown region kind {self.kind!r}")


def disk(R=1.0, breaks=()):
    """``|z| < R``; ``breaks`` are extra radii where the integrand may kink."""
    return Region("disk", 0.0, float(R), breaks=tuple(sorted(breaks)))


def annulus(R1, R2, breaks=()):
    return Region("annulus", float(R1), float(R2), breaks=tuple(sorted(breaks)))


def euclidean_disk(center, radius):
    return Region("euclidean-disk", center=complex(center), radius=float(radius))


def pseudo_hyperbolic_disk(a, r):
    c, rho = pseudo_hyperbolic_params(a, r)
    return Region("pseudo-hyperbolic", center=c, radius=rho)


def pseudo_hyperbolic_params(a, r):
    """Euclidean center and radius of ``{z : |sigma_a(z)| < r}``."""
    a = complex(a)
    if abs(a) >= 1 or not 0 < r < 1:
        raise DomainError("need |a| < 1 and 0 < r < 1")
    denom = 1.0 - r * r * abs(a) ** 2
    center = (1.0 - r * r) * a / denom
    radius = (1.0 - abs(a) ** 2) * r / denom
    t = 2.0 * np.pi * np.arange(16) / 16
    edge = np.abs(sigma(a, center + radius * np.exp(1j * t)))
    if np.max(np.abs(edge - r)) > 1e-10:
        raise QuadratureError("pseudo-hyperbolic boundary check failed")
    return center, radius


def _radial_panel(lo, hi, n, cluster):
    t, w = gauss_legendre01(n)
    if cluster:
        s = 1.0 - (1.0 - t) ** 2
        w = w * 2.0 * (1.0 - t)
    else:
        s = t
    return lo + (hi - lo) * s, (hi - lo) * w


def nodes(region, rule):
    """Points and dA-weights of ``rule`` on ``region`` (flattened arrays)."""
    m = rule.angular_nodes
    theta = 2.0 * np.pi * np.arange(m) / m
    if region.kind in ("disk", "annulus"):
        edges = [region.inner]
        edges += [b for b in region.breaks if region.inner < b < region.outer]
        edges.append(region.outer)
        rs, ws = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            r, w = _radial_panel(lo, hi, rule.radial_nodes,
                                 hi > CLUSTER_RADIUS)
            rs.append(r)
            ws.append(w)
        r = np.concatenate(rs)
        wr = np.concatenate(ws) * r
        z = r[:, None] * np.exp(1j * theta)[None, :]
        wt = np.broadcast_to(wr[:, None] * (2.0 / m), z.shape)
        return z.ravel(), wt.ravel().copy()
    s, w = _radial_panel(0.0, region.radius, rule.radial_nodes, False)
    z = region.center + s[:, None] * np.exp(1j * theta)[None, :]
    wt = np.broadcast_to((w * s)[:, None] * (2.0 / m), z.shape)
    return z.ravel(), wt.ravel().copy()


def measure_density(measure, z):
    if measure == "area":
        return 1.0
    if measure == "hyperbolic":
        return (1.0 - np.abs(z) ** 2) ** -2
    if isinstance(measure, Weight):
        return eval_weight(measure, np.abs(z))
    raise DomainError(f"unknown measure {measure!r}")


def _integrate_once(f, region, rule, measure):
    z, wt = nodes(region, rule)
    vals = np.asarray(f(z), dtype=float)
    vals = np.broadcast_to(vals, z.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        loc = complex(z[np.argmax(bad)])
        raise QuadratureError(f"non-finite integrand at z={loc}", location=loc)
    return float(np.sum(vals * measure_density(measure, z) * wt))


class Integral(NamedTuple):
    value: float
    error: float


def integrate(f, region, rule=QuadratureRule(), measure="area",
              estimate_error=True):
    """Integrate a real vectorized ``f(z)`` over ``region``.

    ``measure`` is ``"area"``, ``"hyperbolic"`` (density ``(1-|z|^2)^-2``) or
    a :class:`Weight`.  With ``estimate_error`` the rule is also run with
    doubled node counts; the finer value is returned with the difference
    as its error estimate.
    """
    coarse = _integrate_once(f, region, rule, measure)
    if not estimate_error:
        return Integral(coarse, float("nan"))
    fine = _integrate_once(f, region, rule.refined(), measure)
    return Integral(fine, abs(fine - coarse))
