"""Finite sections of composition operators and Hilbert-Schmidt norms.

In the orthonormal basis ``e_0 = 1``, ``e_n = z^n / sqrt(omega_n)`` of the
weighted Dirichlet-type space, ``<C e_n, e_m> = c_{n,m} sqrt(omega_m/omega_n)``
where ``c_{n,m}`` is the m-th Taylor coefficient of ``phi**n``.  The
Hilbert-Schmidt norm is computed twice: as the sum of squared image norms
of the basis, and as the integral of the Bergman kernel diagonal against
the counting function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature as quad
from .counting import counting_breaks, counting_values
from .errors import ConvergenceError, DomainError, InsufficientMomentsError
from .selfmaps import power_table
from .weights import compute_moments

KERNEL_RTOL = 1e-10
DEFAULT_RSEQ = (0.9, 0.99, 0.999)
FINITE_RATIO = 0.5
DIVERGING_RATIO = 0.8


# --------------------------------------------------------------------------
# kernel diagonal
# --------------------------------------------------------------------------

def _kernel_on_unique(p, x, terms=None):
    logp = np.log(p[:terms] if terms else p)
    m = np.arange(len(logp), dtype=float)
    out = np.empty(len(x))
    tails = np.empty(len(x))
    for i, xi in enumerate(x):
        if xi == 0:
            out[i] = 1.0 / p[0]
            tails[i] = 0.0
            continue
        t = np.exp(m * math.log(xi) - logp)
        out[i] = t.sum()
        if t[-1] <= 1e-250 * out[i]:
            tails[i] = 0.0
            continue
        q = t[-1] / t[-2] if len(t) > 1 else math.inf
        tails[i] = math.inf if q >= 1 else t[-1] * q / (1.0 - q)
    return out, tails


def required_terms(moments, x, rtol=KERNEL_RTOL):
    """Rough number of moments needed to certify the kernel at ``|z|^2 = x``."""
    if x <= 0:
        return 1
    n = moments.nmax
    # terms behave like n^s x^n; s from the last two moments
    s = math.log(moments.p_n[n - 1] / moments.p_n[n]) / math.log(n / (n - 1))
    k = max(n, 16)
    while True:
        tail_rel = k ** s * x ** k * (1 - x) ** s / max(math.gamma(min(s + 1, 170)), 1e-300)
        if tail_rel <= rtol / 10 or k > 10 ** 7:
            return int(k * 1.1) + 16
        k = int(k * 1.25) + 1


def kernel_diag(moments, z, terms=None, rtol=KERNEL_RTOL):
    """Bergman kernel diagonal ``sum_n |z|^(2n) / p_n``.

    Without ``terms`` the full series is required to be resolved by the
    table (tail at most ``rtol`` of the sum); otherwise the first ``terms``
    summands are returned as is.

    Raises
    ------
    InsufficientMomentsError
        With ``required_nmax`` set to an estimate of the table length needed.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise DomainError("kernel_diag needs |z| < 1")
    if terms is not None and terms > moments.nmax + 1:
        raise InsufficientMomentsError("table shorter than requested terms",
                                       required_nmax=terms - 1)
    x = np.abs(z) ** 2
    # rings of a polar grid share |z| up to rounding
    key = np.round(x, 15)
    uniq, inv = np.unique(key, return_inverse=True)
    vals, tails = _kernel_on_unique(moments.p_n, uniq, terms)
    if terms is None:
        bad = tails > rtol * vals
        if bad.any():
            worst = float(uniq[bad].max())
            raise InsufficientMomentsError(
                f"{moments.nmax + 1} moments cannot resolve the kernel at "
                f"|z| = {math.sqrt(worst):.6g}",
                required_nmax=required_terms(moments, worst, rtol))
    out = vals[inv].reshape(z.shape)
    return float(out) if out.ndim == 0 else out


def moments_for_radius(w, R, nmax=64):
    """A moment table long enough for the certified kernel up to ``|z| = R``."""
    moments = compute_moments(w, nmax)
    while True:
        try:
            kernel_diag(moments, np.array([R]))
            return moments
        except InsufficientMomentsError as exc:
            moments = compute_moments(w, max(exc.required_nmax, 2 * moments.nmax))


# --------------------------------------------------------------------------
# series / sequence diagnosis
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesDiagnosis:
    verdict: str
    tail: float
    ratio: float
    slope: float


def diagnose_series(terms):
    """Classify a non-negative term sequence as ``finite``, ``diverging`` or
    ``inconclusive`` and estimate the neglected tail."""
    terms = np.asarray(terms, dtype=float)
    n = np.arange(1, len(terms) + 1, dtype=float)
    k = max(10, len(terms) // 10)
    last, nn = terms[-k:], n[-k:]
    if last[-1] <= 0 or last[-1] < 1e-300:
        return SeriesDiagnosis("finite", 0.0, 0.0, -math.inf)
    pos = last > 0
    ratio = float(np.exp(np.mean(np.diff(np.log(last[pos]))))) if pos.sum() > 1 else 0.0
    slope = float(np.polyfit(np.log(nn[pos]), np.log(last[pos]), 1)[0]) if pos.sum() > 1 else -math.inf
    if ratio < 0.9:
        return SeriesDiagnosis("finite", last[-1] * ratio / (1.0 - ratio), ratio, slope)
    if slope < -1.5:
        return SeriesDiagnosis("finite", last[-1] * nn[-1] / (-slope - 1.0), ratio, slope)
    if slope > -1.1:
        return SeriesDiagnosis("diverging", math.inf, ratio, slope)
    return SeriesDiagnosis("inconclusive", math.nan, ratio, slope)


@dataclass(frozen=True)
class ProfileDiagnosis:
    verdict: str
    limit: float
    growth_exponent: float


def diagnose_increments(R, values, abs_tol=1e-10):
    """Convergence of cumulative integrals ``values[k]`` over ``|z| < R[k]``.

    The growth exponent is the slope of ``log(increment)`` against
    ``log(1 - R)``; a divergence like ``(1 - R)^-g`` gives ``-g``.
    """
    R = np.asarray(R, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        raise DomainError("need at least two truncation radii")
    inc = np.diff(v)
    growth = math.nan
    pos = inc > 0
    if pos.sum() >= 2:
        growth = float(np.polyfit(np.log1p(-R[1:][pos]), np.log(inc[pos]), 1)[0])
    elif pos.sum() == 1 and v[0] > 0:
        growth = float(math.log(inc[pos][0] / v[0]) / math.log((1 - R[1:][pos][0]) / (1 - R[0])))
    scale = max(abs(v[-1]), 1e-300)
    if abs(inc[-1]) <= abs_tol * max(scale, 1.0):
        return ProfileDiagnosis("finite", float(v[-1]), growth)
    if len(inc) >= 2 and inc[-2] > 0:
        q = inc[-1] / inc[-2]
        if q <= FINITE_RATIO:
            return ProfileDiagnosis("finite", float(v[-1] + inc[-1] * q / (1 - q)), growth)
        if q >= DIVERGING_RATIO:
            return ProfileDiagnosis("diverging", math.inf, growth)
    return ProfileDiagnosis("inconclusive", float(v[-1]), growth)


# --------------------------------------------------------------------------
# basis route
# --------------------------------------------------------------------------

def default_truncation(phi, nmax):
    return nmax * max(phi.degree, 4)


def _image_norms(phi, moments, nmax, M, mode):
    if moments.nmax < M:
        raise InsufficientMomentsError("moment table shorter than the truncation",
                                       required_nmax=M)
    coeffs, tails = power_table(phi, nmax, M)
    om = moments.omega_n[: M + 1]
    mag = np.abs(coeffs) ** 2
    deriv = (mag[:, 1:] * om[1:]).sum(axis=1)
    n = np.arange(1, nmax + 1)
    norms = deriv / moments.omega_n[n]
    if mode == "full":
        norms = norms + mag[:, 0] / moments.omega_n[n]
    elif mode != "derivative-only":
        raise DomainError(f"unknown mode {mode!r}")
    return norms, tails


def image_norm(phi, moments, n, M, mode="derivative-only"):
    """``||C_phi e_n||^2``; ``derivative-only`` drops the point-evaluation part."""
    if n < 1:
        raise DomainError("n must be >= 1")
    norms, _ = _image_norms(phi, moments, n, M, mode)
    return float(norms[-1])


@dataclass(frozen=True)
class BasisRoute:
    value: float
    partial: float
    tail: float
    terms: np.ndarray = field(repr=False)
    verdict: str
    slope: float
    truncation_tail: float


def hs_norm_basis(phi, w, nmax=200, M=None, moments=None, mode="derivative-only"):
    """Squared Hilbert-Schmidt norm as ``sum_{n>=1} ||C_phi e_n||^2``."""
    if nmax < 1:
        raise DomainError("nmax must be >= 1")
    M = default_truncation(phi, nmax) if M is None else M
    if moments is None or moments.nmax < M:
        moments = compute_moments(w, M)
    terms, tails = _image_norms(phi, moments, nmax, M, mode)
    diag = diagnose_series(terms)
    partial = float(terms.sum())
    value = partial + diag.tail if diag.verdict == "finite" else (
        math.inf if diag.verdict == "diverging" else partial)
    return BasisRoute(value=value, partial=partial, tail=diag.tail, terms=terms,
                      verdict=diag.verdict, slope=diag.slope,
                      truncation_tail=float(tails.max()))


# --------------------------------------------------------------------------
# integral route
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegralRoute:
    value: float
    R: tuple
    values: tuple
    verdict: str
    growth_exponent: float
    error: float


def hs_norm_integral(phi, w, moments=None, rule=quad.QuadratureRule(64, 128),
                     R_sequence=DEFAULT_RSEQ, kernel_terms=None):
    """``int ||R_z||^2 N(z) dA`` over ``|z| < R`` for each ``R`` in the sequence.

    With ``kernel_terms = K`` the kernel is cut after ``K`` terms and the
    integral runs over the whole disk; this is the exact counterpart of the
    basis route truncated at ``n = K``, finite even when both diverge.
    """
    breaks = counting_breaks(phi)
    if kernel_terms is not None:
        if moments is None or moments.nmax + 1 < kernel_terms:
            moments = compute_moments(w, kernel_terms)
        f = lambda z: kernel_diag(moments, z, terms=kernel_terms) * counting_values(phi, w, z)  # noqa: E731
        res = quad.integrate(f, quad.disk(1.0, breaks), rule)
        return IntegralRoute(value=res.value, R=(1.0,), values=(res.value,),
                             verdict="truncated", growth_exponent=math.nan,
                             error=res.error)
    R_sequence = tuple(float(r) for r in R_sequence)
    if any(b >= a for a, b in zip(R_sequence[1:], R_sequence[:-1])) or R_sequence[-1] >= 1:
        raise DomainError("R_sequence must increase inside (0, 1)")
    if moments is None:
        moments = moments_for_radius(w, R_sequence[-1])
    f = lambda z: kernel_diag(moments, z) * counting_values(phi, w, z)  # noqa: E731
    edges = (0.0,) + R_sequence
    total, err = 0.0, 0.0
    cumulative = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        region = quad.disk(hi, breaks) if lo == 0 else quad.annulus(lo, hi, breaks)
        part = quad.integrate(f, region, rule)
        total += part.value
        err += part.error
        cumulative.append(total)
    diag = diagnose_increments(R_sequence, cumulative)
    return IntegralRoute(value=diag.limit, R=R_sequence, values=tuple(cumulative),
                         verdict=diag.verdict, growth_exponent=diag.growth_exponent,
                         error=err)


@dataclass(frozen=True)
class HSReport:
    basis_value: float
    integral_value: float
    relative_gap: float
    verdict: str
    basis: BasisRoute
    integral: IntegralRoute

    def as_dict(self):
        return {
            "basis": self.basis_value,
            "integral": self.integral_value,
            "gap": self.relative_gap,
            "verdict": self.verdict,
            "basis_verdict": self.basis.verdict,
            "basis_partial": self.basis.partial,
            "basis_tail_slope": self.basis.slope,
            "integral_verdict": self.integral.verdict,
            "integral_R": list(self.integral.R),
            "integral_values": list(self.integral.values),
            "integral_growth_exponent": self.integral.growth_exponent,
        }


def relative_gap(a, b):
    if math.isinf(a) and math.isinf(b):
        return 0.0
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def hs_report(phi, w, nmax=200, M=None, rule=quad.QuadratureRule(64, 128),
              R_sequence=DEFAULT_RSEQ, mode="derivative-only"):
    """Both Hilbert-Schmidt routes with a combined verdict."""
    basis = hs_norm_basis(phi, w, nmax, M, mode=mode)
    integral = hs_norm_integral(phi, w, rule=rule, R_sequence=R_sequence)
    if basis.verdict == integral.verdict and basis.verdict in ("finite", "diverging"):
        verdict = basis.verdict
    else:
        verdict = "inconclusive"
    return HSReport(basis_value=basis.value, integral_value=integral.value,
                    relative_gap=relative_gap(basis.value, integral.value),
                    verdict=verdict, basis=basis, integral=integral)


# --------------------------------------------------------------------------
# matrix and singular values
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    size: int
    entries: np.ndarray = field(repr=False)
    truncation_tail: float

    def to_csv(self):
        lines = ["m,n,re,im"]
        rows, cols = np.nonzero(self.entries)
        for m, n in zip(rows, cols):
            v = complex(self.entries[m, n])
            lines.append(f"{m},{n},{v.real!r},{v.imag!r}")
        return "\n".join(lines) + "\n"


def build_matrix(phi, w, M, moments=None):
    """``(M+1) x (M+1)`` section of ``C_phi`` in the orthonormal monomial basis."""
    if M < 1:
        raise DomainError("M must be >= 1")
    if moments is None or moments.nmax < M:
        moments = compute_moments(w, M)
    coeffs, tails = power_table(phi, M, M)
    om = moments.omega_n[: M + 1]
    A = np.zeros((M + 1, M + 1), dtype=complex)
    A[0, 0] = 1.0
    A[:, 1:] = (coeffs * np.sqrt(om)[None, :]).T / np.sqrt(om[1:])[None, :]
    return OperatorMatrix(size=M + 1, entries=A, truncation_tail=float(tails.sum()))


def _round_robin(n):
    # disjoint column pairs covering every pair once per sweep
    idx = list(range(n + (n % 2)))
    m = len(idx)
    rounds = []
    for _ in range(m - 1):
        pairs = [(idx[i], idx[m - 1 - i]) for i in range(m // 2)]
        rounds.append([(i, j) if i < j else (j, i) for i, j in pairs if max(i, j) < n])
        idx = [idx[0]] + [idx[-1]] + idx[1:-1]
    return rounds


def jacobi_singular_values(A, tol=1e-10, max_sweeps=100):
    """Singular values by one-sided (Hestenes) Jacobi rotations, descending."""
    U = np.array(A, dtype=complex, copy=True)
    if U.shape[0] < U.shape[1]:
        # same singular values, fewer columns to orthogonalize
        U = U.conj().T.copy()
    n = U.shape[1]
    if n == 0:
        return np.empty(0)
    if n == 1:
        return np.array([np.linalg.norm(U[:, 0])])
    rounds = [tuple(np.array(r).T) for r in _round_robin(n) if r]
    for _ in range(max_sweeps):
        rotated = False
        for i, j in rounds:
            ai, aj = U[:, i], U[:, j]
            alpha = np.einsum("ij,ij->j", ai.conj(), ai).real
            beta = np.einsum("ij,ij->j", aj.conj(), aj).real
            gamma = np.einsum("ij,ij->j", ai.conj(), aj)
            g = np.abs(gamma)
            act = (g > tol * np.sqrt(alpha * beta)) & (g > 1e-300)
            if not act.any():
                continue
            rotated = True
            i, j = i[act], j[act]
            ai, aj = U[:, i], U[:, j]
            alpha, beta, gamma, g = alpha[act], beta[act], gamma[act], g[act]
            phase = gamma / g
            zeta = (beta - alpha) / (2.0 * g)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            ajp = aj * phase.conj()
            U[:, i] = c * ai - s * ajp
            U[:, j] = (s * ai + c * ajp) * phase
        if not rotated:
            return np.sort(np.linalg.norm(U, axis=0))[::-1]
    raise ConvergenceError(f"Jacobi SVD not converged after {max_sweeps} sweeps")


def schatten_from_matrix(mat, p, drop_first=False):
    """Schatten ``p``-norm of the matrix section.

    ``drop_first`` removes the constant direction (first row and column),
    leaving the part matched by the derivative-only Hilbert-Schmidt sum.
    """
    if p <= 0:
        raise DomainError("p must be positive")
    A = mat.entries[1:, 1:] if drop_first else mat.entries
    sv = jacobi_singular_values(A)
    return float(np.sum(sv ** p) ** (1.0 / p))
