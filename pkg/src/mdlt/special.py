"""Gamma kernel, Mittag-Leffler and Wright functions.

The two entire functions are summed from their power series with a
term-ratio stopping rule.  Scalar evaluations accumulate the terms with
``math.fsum`` (exactly rounded summation), which plays the role of
extended-precision accumulation; the remaining error then comes from
cancellation between large terms, which is estimated and reported.  For
large positive arguments the Wright series cancels catastrophically, so
those values are taken from a saddle-point contour integral instead.
"""

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special as sc

from .errors import ConfigurationError, DomainError, SeriesConvergenceError

# Largest |z| accepted by the series evaluators.
VALIDATED_RADIUS = 50.0

_EPS = np.finfo(float).eps
_BATCH = 32


@dataclass(frozen=True)
class SeriesAccuracy:
    """Stopping parameters for series summation."""

    rel_tol: float = 1e-14
    max_terms: int = 4000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ConfigurationError("rel_tol must be positive")
        if int(self.max_terms) < 1:
            raise ConfigurationError("max_terms must be at least 1")


@dataclass(frozen=True)
class MLParams:
    """Parameters of the two-parameter Mittag-Leffler function."""

    alpha: float
    beta: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"Mittag-Leffler alpha must be > 0, got {self.alpha}")


@dataclass(frozen=True)
class WrightParams:
    """Parameter of the Wright function; must lie strictly inside (0, 1)."""

    gamma: float

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise DomainError(f"Wright gamma must lie in (0, 1), got {self.gamma}")


DEFAULT_ACCURACY = SeriesAccuracy()


def gamma_kernel(zeta, t):
    r"""Evaluate :math:`g_\zeta(t) = t^{\zeta-1}/\Gamma(\zeta)`.

    Accepts scalars or arrays for ``t``.  At ``t = 0`` the value is 0 for
    ``zeta > 1``, 1 for ``zeta == 1`` and ``inf`` for ``zeta < 1``.
    """
    if not zeta > 0:
        raise DomainError(f"gamma_kernel requires zeta > 0, got {zeta}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("gamma_kernel requires t >= 0")
    with np.errstate(divide="ignore"):
        if zeta == 1:
            out = np.ones_like(t_arr)
        else:
            out = np.where(
                t_arr > 0,
                np.exp((zeta - 1) * np.log(np.where(t_arr > 0, t_arr, 1.0)) - sc.gammaln(zeta)),
                0.0 if zeta > 1 else np.inf,
            )
    if np.ndim(t) == 0:
        return float(out)
    return out


def _reciprocal_gamma_parts(x):
    """Return ``(log|1/Gamma(x)|, sign(1/Gamma(x)))``; poles give sign 0."""
    x = np.asarray(x, dtype=float)
    pole = (x <= 0) & (x == np.round(x))
    safe = np.where(pole, 0.5, x)
    log_mag = -sc.gammaln(safe)
    sign = np.where(pole, 0.0, sc.gammasgn(safe))
    return np.where(pole, -np.inf, log_mag), sign


def _tail_ok(mag, prev_mag, bound):
    """Geometric tail bound: the remaining terms must also fit under ``bound``."""
    if mag == 0 or prev_mag is None:
        return True
    ratio = mag / prev_mag
    if ratio >= 1:
        return False
    return mag / (1.0 - ratio) <= bound


def _check_argument(z):
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError("series argument must be finite")
    if abs(z) > VALIDATED_RADIUS:
        raise DomainError(
            f"|z| = {abs(z):.4g} lies outside the validated domain |z| <= {VALIDATED_RADIUS}"
        )
    return z


# overflowing magnitudes only feed the cancellation estimate, which then reads inf
@np.errstate(over="ignore", invalid="ignore")
def _sum_scalar(z, coeff_parts, acc):
    """Sum ``sum_k c_k z^k`` where ``coeff_parts(k_array)`` gives log|c_k| and sign.

    Returns ``(value, cancellation_estimate)`` where the estimate is an
    absolute error bound from rounding of the individual terms.
    """
    logz = complex(np.log(z)) if z != 0 else None
    re_parts, im_parts = [], []
    abs_total = 0.0
    partial = 0j
    small_run = 0
    prev_mag = None
    k0 = 0
    while k0 < acc.max_terms:
        ks = np.arange(k0, min(k0 + _BATCH, acc.max_terms))
        log_c, sign = coeff_parts(ks)
        if logz is None:
            log_terms = np.where(ks == 0, log_c, -np.inf)
        else:
            log_terms = log_c + ks * logz
        with np.errstate(under="ignore", over="ignore", invalid="ignore"):
            terms = np.where(sign != 0, sign * np.exp(log_terms), 0.0)
            # rounding in the logarithm is amplified by exp
            amp = 1.0 + np.abs(np.where(np.isfinite(log_terms), log_terms.real, 0.0))
        for term, a in zip(terms, amp):
            term = complex(term)
            if not (math.isfinite(term.real) and math.isfinite(term.imag)):
                return complex(math.nan, 0.0), math.inf
            re_parts.append(term.real)
            im_parts.append(term.imag)
            mag = abs(term)
            abs_total += mag * a
            partial += term
            if mag <= acc.rel_tol * abs(partial) and _tail_ok(mag, prev_mag, acc.rel_tol * abs(partial)):
                small_run += 1
            elif mag == 0 and partial == 0:
                small_run += 1
            else:
                small_run = 0
            if mag > 0:
                prev_mag = mag
            if small_run >= 3:
                value = complex(math.fsum(re_parts), math.fsum(im_parts))
                return value, 4 * _EPS * abs_total
        k0 = int(ks[-1]) + 1
    raise SeriesConvergenceError(
        f"series did not meet rel_tol={acc.rel_tol:g} within {acc.max_terms} terms"
    )


def mittag_leffler(p, z, acc=DEFAULT_ACCURACY):
    r"""Two-parameter Mittag-Leffler function :math:`E_{\alpha,\beta}(z)`.

    Parameters
    ----------
    p : MLParams
    z : complex
        Argument with ``|z| <= 50``.
    acc : SeriesAccuracy

    Raises
    ------
    SeriesConvergenceError
        If the tail criterion is not met within ``acc.max_terms`` terms, or
        cancellation between terms makes ``acc.rel_tol`` unattainable.
    """
    z = _check_argument(z)
    alpha, beta = float(p.alpha), float(p.beta)

    def coeffs(ks):
        return _reciprocal_gamma_parts(alpha * ks + beta)

    value, err = _sum_scalar(z, coeffs, acc)
    if err <= acc.rel_tol * abs(value) or err == 0:
        return value
    return _extended_sum(z, lambda k: mpmath.rgamma(alpha * k + beta), acc, err, value)


def _wright_coeffs(gamma):
    def coeffs(ks):
        log_rg, sign = _reciprocal_gamma_parts(1.0 - gamma - gamma * ks)
        # (-z)^k = z^k (-1)^k
        return log_rg - sc.gammaln(ks + 1.0), sign * np.where(ks % 2 == 0, 1.0, -1.0)

    return coeffs


def wright(p, z, acc=DEFAULT_ACCURACY):
    r"""Wright function :math:`\Phi_\gamma(z) = \sum (-z)^k / (k!\,\Gamma(1-\gamma-\gamma k))`.

    Large positive real arguments, where the alternating series loses all
    significant digits, are evaluated by a saddle-point contour integral.
    """
    z = _check_argument(z)
    gamma = float(p.gamma)
    try:
        value, err = _sum_scalar(z, _wright_coeffs(gamma), acc)
    except SeriesConvergenceError:
        value, err = complex(math.nan), math.inf
    if err <= acc.rel_tol * abs(value) or err == 0:
        return value
    if z.imag == 0 and z.real > 0:
        return complex(_wright_saddle(gamma, z.real))
    return _extended_sum(
        -z, lambda k: mpmath.rgamma(1 - gamma - gamma * k) / mpmath.factorial(k), acc, err, value
    )


def _extended_sum(z, coeff, acc, err, rough):
    """Re-sum a cancelling series with enough working bits to absorb the loss."""
    if math.isfinite(err):
        lost = math.log2(max(err / _EPS, 1.0) / max(abs(rough), 1e-300))
    else:
        lost = 1100.0 + 2.0 * abs(z)
    bits = 53 + int(min(lost, 4000)) + int(-math.log2(acc.rel_tol)) + 16
    with mpmath.workprec(bits):
        zm = mpmath.mpc(z.real, z.imag)
        total = mpmath.mpc(0)
        power = mpmath.mpc(1)
        small_run = 0
        prev_mag = None
        for k in range(acc.max_terms):
            term = coeff(k) * power
            total += term
            mag = abs(term)
            if (mag == 0 and total == 0) or (
                mag <= acc.rel_tol * abs(total)
                and _tail_ok(float(mag), prev_mag, float(acc.rel_tol * abs(total)))
            ):
                small_run += 1
            else:
                small_run = 0
            if small_run >= 3 and k > abs(z):
                return complex(total)
            if mag > 0:
                prev_mag = float(mag)
            power *= zm
    raise SeriesConvergenceError(
        f"series did not meet rel_tol={acc.rel_tol:g} within {acc.max_terms} terms"
    )


def _wright_saddle(gamma, x):
    """Wright function at real ``x > 0`` from its Hankel-type integral.

    Uses ``Phi(x) = (1/2 pi i) int exp(s - x s^gamma) s^(gamma-1) ds`` on the
    vertical line through the real saddle point of the exponent.
    """
    s0 = (gamma * x) ** (1.0 / (1.0 - gamma))
    h0 = s0 - x * s0**gamma
    if h0 < -800.0:
        # far below the smallest subnormal even after the prefactor
        return 0.0
    curvature = x * gamma * (1.0 - gamma) * s0 ** (gamma - 2.0)
    width = 1.0 / math.sqrt(curvature)

    def integrand(y):
        s = s0 + 1j * y
        return np.exp(s - x * s**gamma - h0) * s ** (gamma - 1.0)

    # extend until the integrand is negligible relative to its peak
    peak = abs(integrand(np.array([0.0]))[0])
    upper = 4.0 * width
    while abs(integrand(np.array([upper]))[0]) > 1e-18 * peak and upper < 1e7:
        upper *= 1.5
    panel = min(math.pi / 4.0, width / 2.0)
    n_panels = min(int(math.ceil(upper / panel)), 200000)
    nodes, weights = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(0.0, upper, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    ys = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    ws = (half[:, None] * weights[None, :]).ravel()
    total = np.sum(ws * integrand(ys))
    with np.errstate(under="ignore"):
        return math.exp(h0) / math.pi * float(total.real)


def mittag_leffler_array(alpha, beta, z, rel_tol=1e-14, max_terms=4000):
    """Vectorised Mittag-Leffler evaluation for arrays of arguments.

    Falls back to the scalar path (exact accumulation, error checks) for
    elements whose fast summation shows significant cancellation.
    """
    MLParams(alpha, beta)
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = _series_array(flat, lambda ks: _reciprocal_gamma_parts(alpha * ks + beta), rel_tol, max_terms)
    value, err = out
    bad = ~(err <= rel_tol * np.abs(value) + 1e-300)
    if np.any(bad):
        acc = SeriesAccuracy(rel_tol, max_terms)
        p = MLParams(alpha, beta)
        for i in np.flatnonzero(bad):
            value[i] = mittag_leffler(p, flat[i], acc)
    return value.reshape(z.shape)


def wright_array(gamma, z, rel_tol=1e-14, max_terms=4000):
    """Vectorised Wright function evaluation with the saddle-point fallback."""
    WrightParams(gamma)
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    value, err = _series_array(flat, _wright_coeffs(gamma), rel_tol, max_terms)
    bad = ~(err <= rel_tol * np.abs(value) + 1e-300)
    if np.any(bad):
        acc = SeriesAccuracy(rel_tol, max_terms)
        p = WrightParams(gamma)
        for i in np.flatnonzero(bad):
            value[i] = wright(p, flat[i], acc)
    return value.reshape(z.shape)


@np.errstate(over="ignore", invalid="ignore")
def _series_array(z, coeff_parts, rel_tol, max_terms):
    """Plain double-precision series summation over many arguments at once."""
    if z.size == 0:
        return z.copy(), np.zeros(0)
    if np.any(np.abs(z) > VALIDATED_RADIUS) or not np.all(np.isfinite(z)):
        raise DomainError(f"arguments must satisfy |z| <= {VALIDATED_RADIUS}")
    nonzero = z != 0
    logz = np.log(np.where(nonzero, z, 1.0))
    total = np.zeros_like(z)
    abs_total = np.zeros(z.shape)
    done = np.zeros(z.shape, dtype=bool)
    run = np.zeros(z.shape, dtype=int)
    prev = np.full(z.shape, np.inf)
    k0 = 0
    while k0 < max_terms:
        ks = np.arange(k0, min(k0 + _BATCH, max_terms))
        log_c, sign = coeff_parts(ks)
        log_terms = log_c[None, :] + ks[None, :] * logz[:, None]
        with np.errstate(under="ignore", over="ignore", invalid="ignore"):
            terms = np.where(sign[None, :] != 0, sign[None, :] * np.exp(log_terms), 0.0)
            amp = 1.0 + np.abs(np.where(np.isfinite(log_terms), log_terms.real, 0.0))
        terms[~nonzero, :] = 0.0
        if k0 == 0:
            terms[~nonzero, 0] = sign[0] * np.exp(log_c[0]) if sign[0] != 0 else 0.0
        overflow = ~np.all(np.isfinite(terms), axis=1) & ~done
        abs_total[overflow] = np.inf
        done |= overflow
        terms[done] = 0.0
        for j in range(terms.shape[1]):
            term = terms[:, j]
            mag = np.abs(term)
            total += term
            abs_total += mag * amp[:, j]
            bound = rel_tol * np.abs(total)
            ratio = np.where(prev > 0, mag / np.where(prev > 0, prev, 1.0), 0.0)
            ratio = np.where(np.isfinite(prev), ratio, 0.0)
            tail = np.where(ratio < 1, mag / (1 - np.minimum(ratio, 0.999999)), np.inf)
            small = (mag <= bound) & ((tail <= bound) | (mag == 0))
            run = np.where(small, run + 1, 0)
            prev = np.where(mag > 0, mag, prev)
            done |= run >= 3
        if np.all(done):
            return total, 4 * _EPS * abs_total
        k0 = int(ks[-1]) + 1
    abs_total[~done] = np.inf
    return total, 4 * _EPS * abs_total
