"""Batched polynomial root finding.

Many polynomials of one common degree are solved at once with the Aberth
simultaneous iteration; rows that fail to converge fall back to companion
matrix eigenvalues, and every root gets a guarded Newton polish.
Coefficients are stored with the highest power first, as in ``np.polyval``.
"""

import numpy as np

from .errors import RootFindingError

MAX_ITER = 200
STEP_TOL = 1e-15
COMPANION_MAX_DEGREE = 30
START_ANGLE = 0.4
NEGLIGIBLE = 1e-14


def _horner(coeffs, z):
    """Value and derivative of each row polynomial at each of its own points."""
    p = np.broadcast_to(coeffs[:, :1], z.shape).astype(complex)
    dp = np.zeros_like(p)
    for j in range(1, coeffs.shape[1]):
        dp = dp * z + p
        p = p * z + coeffs[:, j:j + 1]
    return p, dp


def normalize_rows(coeffs):
    """Scale each row by a power of two so its largest entry is near 1.

    Exact in floating point, and safe for subnormal or huge coefficients.
    """
    _, e = np.frexp(np.abs(coeffs).max(axis=1, keepdims=True))
    e = np.where(np.abs(coeffs).max(axis=1, keepdims=True) > 0, e, 0)
    return np.ldexp(coeffs.real, -e) + 1j * np.ldexp(coeffs.imag, -e)


def root_bound(coeffs):
    """Fujiwara bound on the root moduli of each row."""
    lead = coeffs[:, :1]
    d = coeffs.shape[1] - 1
    k = np.arange(1, d + 1)
    ratios = np.abs(coeffs[:, 1:] / lead) ** (1.0 / k)
    ratios[:, -1] = (np.abs(coeffs[:, -1] / lead[:, 0]) / 2.0) ** (1.0 / d)
    return 2.0 * ratios.max(axis=1)


def initial_guesses(coeffs):
    d = coeffs.shape[1] - 1
    radius = 1.2 * np.maximum(root_bound(coeffs), 1e-3)
    angles = START_ANGLE + 2.0 * np.pi * np.arange(d) / d
    return radius[:, None] * np.exp(1j * angles)[None, :]


def _companion_roots(coeffs):
    d = coeffs.shape[1] - 1
    n = coeffs.shape[0]
    mats = np.zeros((n, d, d), dtype=complex)
    mats[:, 0, :] = -coeffs[:, 1:] / coeffs[:, :1]
    if d > 1:
        idx = np.arange(d - 1)
        mats[:, idx + 1, idx] = 1.0
    return np.linalg.eigvals(mats)


def aberth(coeffs, max_iter=MAX_ITER):
    """Roots of every row of ``coeffs`` (shape ``(n, d+1)``, leading first).

    Returns an ``(n, d)`` complex array.  Leading coefficients must be
    non-zero.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    n, d1 = coeffs.shape
    d = d1 - 1
    if d < 1:
        return np.empty((n, 0), dtype=complex)
    if np.any(coeffs[:, 0] == 0):
        raise RootFindingError("leading coefficient vanishes")
    coeffs = normalize_rows(coeffs)
    if d == 1:
        return -coeffs[:, 1:2] / coeffs[:, :1]

    z = initial_guesses(coeffs)
    active = np.ones(n, dtype=bool)
    eye = np.eye(d, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            if not active.any():
                break
            za = z[active]
            p, dp = _horner(coeffs[active], za)
            ratio = p / dp
            diff = za[:, :, None] - za[:, None, :]
            diff[:, eye] = 1.0
            inv = 1.0 / diff
            inv[:, eye] = 0.0
            s = inv.sum(axis=2)
            step = ratio / (1.0 - ratio * s)
            step = np.where(p == 0, 0.0, step)
            bad = ~np.isfinite(step).all(axis=1)
            step[bad] = 0.0
            za = za - step
            done = (np.abs(step) <= STEP_TOL * (1.0 + np.abs(za))).all(axis=1)
            z[active] = za
            idx = np.flatnonzero(active)
            active[idx[done & ~bad]] = False
            # rows with a blown-up step go straight to the fallback
            active[idx[bad]] = False
            z[idx[bad]] = np.nan

    pending = active | ~np.isfinite(z).all(axis=1)
    if pending.any():
        if d > COMPANION_MAX_DEGREE:
            raise RootFindingError(
                f"Aberth iteration failed on {int(pending.sum())} polynomials "
                f"of degree {d} (no companion fallback above degree "
                f"{COMPANION_MAX_DEGREE})")
        z[pending] = _companion_roots(coeffs[pending])
    return polish(coeffs, z)


def polish(coeffs, z, steps=2):
    """Newton steps, each accepted only where it lowers the residual."""
    with np.errstate(all="ignore"):
        for _ in range(steps):
            p, dp = _horner(coeffs, z)
            cand = z - p / dp
            pc, _ = _horner(coeffs, cand)
            better = np.isfinite(cand) & (np.abs(pc) < np.abs(p))
            z = np.where(better, cand, z)
    return z


def solve(coeffs):
    """Roots of a single polynomial (leading coefficient first).

    Leading coefficients below ``NEGLIGIBLE`` times the largest one are
    trimmed; the roots they would add lie beyond ``1/NEGLIGIBLE`` in modulus.
    """
    c = np.asarray(coeffs, dtype=complex)
    big = np.abs(c).max() if len(c) else 0.0
    keep = np.flatnonzero(np.abs(c) > NEGLIGIBLE * big)
    c = c[keep[0]:] if len(keep) else c[:0]
    if len(c) < 2:
        return np.empty(0, dtype=complex)
    return aberth(c[None, :])[0]


def cluster(roots, tol=1e-6):
    """Group numerically coincident roots: list of ``(root, multiplicity)``."""
    out = []
    used = np.zeros(len(roots), dtype=bool)
    for i, r in enumerate(roots):
        if used[i]:
            continue
        near = (~used) & (np.abs(roots - r) <= tol * max(1.0, abs(r)))
        used |= near
        out.append((complex(roots[near].mean()), int(near.sum())))
    return out
