"""Operational rules of the transform, each checkable from two sides.

Shift, delay and damping of the argument, moment derivatives of the
transform, the Riemann-Liouville fractional integral along one axis, the
causal (Faltung) convolution on boxes ``[0, t]`` and its product rule, and
the one-dimensional transform of an m-th derivative.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from . import quadrature as Q
from .errors import ConfigurationError, DomainError, QuadratureError
from .transform import (
    Envelope,
    QuadratureConfig,
    VectorFunction,
    _absolute_setup,
    as_point,
    box_integral,
    contract,
    grid_eval,
    laplace_nd,
    norm,
)


@dataclass(frozen=True)
class ShiftVector:
    h: tuple

    def __post_init__(self):
        h = tuple(float(x) for x in np.atleast_1d(self.h))
        if any(not (x >= 0 and math.isfinite(x)) for x in h):
            raise ConfigurationError("shift components must be finite and >= 0")
        object.__setattr__(self, "h", h)


@dataclass(frozen=True)
class DampingVector:
    z: tuple

    def __post_init__(self):
        z = tuple(complex(x) for x in np.atleast_1d(self.z))
        if any(not (math.isfinite(x.real) and math.isfinite(x.imag)) for x in z):
            raise ConfigurationError("damping components must be finite")
        object.__setattr__(self, "z", z)


@dataclass(frozen=True)
class MultiIndex:
    v: tuple

    def __post_init__(self):
        v = tuple(int(x) for x in np.atleast_1d(self.v))
        if any(x < 0 for x in v):
            raise ConfigurationError("multi-index entries must be >= 0")
        object.__setattr__(self, "v", v)

    @property
    def order(self):
        return sum(self.v)


def _as(cls, value):
    return value if isinstance(value, cls) else cls(value)


def _match(f, vec, what):
    if len(vec) != f.dims:
        raise ConfigurationError(f"{what} has {len(vec)} entries, function has {f.dims} variables")


# ---------------------------------------------------------------- shifted functions


def shifted(f, h):
    """``f_h(t) = f(t + h)`` with an envelope derived from ``f``'s."""
    h = np.array(_as(ShiftVector, h).h)
    _match(f, h, "shift")
    env = None
    if f.envelope is not None:
        e = f.envelope
        # (t+h)^a <= t^a for a < 0, and <= (2(1+h))^a (1 + t^a) for a >= 0
        lo = tuple(min(a, b, 0.0) for a, b in zip(e.eta, e.zeta))
        hi = tuple(max(a, b, 0.0) for a, b in zip(e.eta, e.zeta))
        M = e.M
        for j in range(f.dims):
            M *= 2.0 * (2.0 * (1.0 + h[j])) ** hi[j] * math.exp(e.omega[j] * h[j])
        env = Envelope(M, e.omega, lo, hi)
    return VectorFunction(f.dims, f.codim, lambda t: f(t + h), env, f"{f.name}(t+h)")


def delayed(f, h):
    """``f(t - h)`` where ``t >= h`` componentwise, zero elsewhere."""
    h = np.array(_as(ShiftVector, h).h)
    _match(f, h, "delay")

    def ev(t):
        inside = np.all(t >= h, axis=1)
        out = np.zeros((t.shape[0], f.codim), dtype=complex)
        if np.any(inside):
            out[inside] = f(t[inside] - h)
        return out

    return VectorFunction(f.dims, f.codim, ev, f.envelope, f"{f.name}(t-h)")


def damped(f, z):
    """``exp(-z.t) f(t)``."""
    z = np.array(_as(DampingVector, z).z)
    _match(f, z, "damping")
    env = None
    if f.envelope is not None:
        e = f.envelope
        env = Envelope(e.M, tuple(w - zz.real for w, zz in zip(e.omega, z)), e.eta, e.zeta)
    return f.scaled(lambda t: np.exp(-(t @ z)), env, f"exp(-z.t){f.name}")


def moment(f, v):
    """``prod_j t_j^{v_j} / v_j! * f(t)``."""
    v = _as(MultiIndex, v).v
    _match(f, v, "multi-index")
    fact = math.prod(math.factorial(x) for x in v)
    env = None
    if f.envelope is not None:
        e = f.envelope
        env = Envelope(
            e.M / fact,
            e.omega,
            tuple(a + x for a, x in zip(e.eta, v)),
            tuple(b + x for b, x in zip(e.zeta, v)),
        )
    va = np.array(v, dtype=float)
    return f.scaled(lambda t: np.prod(t**va, axis=1) / fact, env, f"t^v {f.name}")


# ---------------------------------------------------------------- rules


def shift_transform(f, h, p, cfg=QuadratureConfig()):
    """Both sides of the shift rule at ``p``.

    ``lhs`` is the transform of ``f(. + h)``.  ``rhs`` is
    ``e^{lam.h} (L f(p) - int over [0,inf)^n minus H of e^{-lam.t} f)``
    with ``H = prod [h_j, inf)``; the excluded region is integrated by
    inclusion-exclusion over boxes where some ``t_j < h_j``.
    """
    h = _as(ShiftVector, h).h
    p = as_point(p)
    _match(f, h, "shift")
    lam = p.array
    lhs = laplace_nd(shifted(f, h), p, cfg).value
    full = laplace_nd(f, p, cfg).value
    T, _ = _absolute_setup(f, p, cfg)
    active = [j for j in range(f.dims) if h[j] > 0]
    excluded = np.zeros(f.codim, dtype=complex)
    for r in range(1, len(active) + 1):
        for S in itertools.combinations(active, r):
            box = tuple(h[j] if j in S else T[j] for j in range(f.dims))
            part, _ = box_integral(f, lam, box, cfg)
            excluded += (-1) ** (r + 1) * part
    rhs = np.exp(np.dot(lam, h)) * (full - excluded)
    return lhs, rhs


def delay_transform(f, h, p, cfg=QuadratureConfig()):
    """``e^{-lam.h} L f(p)``, the transform of the delayed function."""
    h = _as(ShiftVector, h).h
    p = as_point(p)
    _match(f, h, "delay")
    return np.exp(-np.dot(p.array, h)) * laplace_nd(f, p, cfg).value


def delayed_transform_direct(f, h, p, cfg=QuadratureConfig()):
    """Transform of the delayed function by quadrature on ``prod [h_j, h_j + T_j]``."""
    h = np.array(_as(ShiftVector, h).h)
    p = as_point(p)
    T, _ = _absolute_setup(f, p, cfg)
    lam = p.array
    g = delayed(f, h)
    prev = None
    panels = int(cfg.panels)
    while True:
        rules = []
        for j in range(f.dims):
            x, w = Q.axis_rule(T[j], panels, cfg.rule)
            rules.append((x + h[j], w))
        vals = grid_eval(g, [r[0] for r in rules])
        cur = contract(vals, [w * np.exp(-lam[j] * x) for j, (x, w) in enumerate(rules)])
        if prev is not None and norm(cur - prev) <= cfg.rel_tol * max(norm(cur), 1e-300):
            return cur
        if 2 * panels > cfg.max_panels:
            raise QuadratureError("panel cap reached for the delayed transform")
        prev, panels = cur, 2 * panels


def damping_transform(f, z, p, cfg=QuadratureConfig()):
    """``L f(p + z)``, the transform of ``e^{-z.t} f``."""
    z = _as(DampingVector, z).z
    p = as_point(p)
    _match(f, z, "damping")
    return laplace_nd(f, p.array + np.array(z), cfg).value


def transform_derivative(f, v, p, cfg=QuadratureConfig()):
    """Mixed partial ``d^v F(p)`` as a moment transform, no differencing.

    ``d^v F = (-1)^{|v|} prod v_j! * L[prod t_j^{v_j}/v_j! f]``.
    """
    v = _as(MultiIndex, v)
    _match(f, v.v, "multi-index")
    if v.order == 0:
        return laplace_nd(f, p, cfg).value
    fact = math.prod(math.factorial(x) for x in v.v)
    return (-1) ** v.order * fact * laplace_nd(moment(f, v), p, cfg).value


# ---------------------------------------------------------------- fractional integral


def _jacobi_rule(alpha, N):
    x, w = sc.roots_jacobi(N, alpha - 1.0, 0.0)
    return x, w


def _fractional_values(f, j, alpha, pts, rel_tol):
    """``J^alpha`` along axis ``j`` at every row of ``pts``."""
    t = pts[:, j]
    out = np.zeros((len(pts), f.codim), dtype=complex)
    pos = t > 0
    if not np.any(pos):
        return out
    P = pts[pos]
    tj = P[:, j]
    # [0, t/2]: smooth kernel, tanh-sinh for singularities of f at s = 0
    s0, _, w0 = Q.tanh_sinh(0.0, 1.0, step=1.0 / 6.0, reach=4.5)
    prev = None
    N = 24
    while True:
        # [t/2, t]: Gauss-Jacobi absorbs (t - s)^(alpha - 1)
        x, w = _jacobi_rule(alpha, N)
        left_s = 0.5 * tj[:, None] * s0[None, :]
        left_w = 0.5 * tj[:, None] * w0[None, :] * (tj[:, None] - left_s) ** (alpha - 1.0)
        right_s = 0.5 * tj[:, None] + 0.25 * tj[:, None] * (1.0 + x[None, :])
        right_w = (0.25 * tj[:, None]) ** alpha * w[None, :]
        s = np.concatenate([left_s, right_s], axis=1)
        ws = np.concatenate([left_w, right_w], axis=1)
        K = s.shape[1]
        q = np.repeat(P, K, axis=0)
        q[:, j] = s.ravel()
        vals = f(q).reshape(len(P), K, f.codim)
        cur = np.einsum("pk,pkm->pm", ws, vals) / math.gamma(alpha)
        if prev is not None and norm(cur - prev) <= rel_tol * max(norm(cur), 1e-300):
            break
        if N >= 384:
            raise QuadratureError("Gauss-Jacobi refinement did not settle")
        prev, N = cur, 2 * N
    out[pos] = cur
    return out


def fractional_integral(f, axis, alpha, t, cfg=QuadratureConfig()):
    """``J^alpha`` of ``f`` along ``axis`` (1-based) at the point ``t``."""
    j = _check_axis(f, axis)
    if not alpha > 0:
        raise DomainError("fractional order must be > 0")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (f.dims,) or np.any(t < 0):
        raise ConfigurationError(f"expected a point in [0, inf)^{f.dims}")
    return _fractional_values(f, j, float(alpha), t[None, :], cfg.rel_tol)[0]


def fractional_integral_function(f, axis, alpha, cfg=QuadratureConfig()):
    """``J^alpha f`` along one axis as a new function (for composition)."""
    j = _check_axis(f, axis)
    if not alpha > 0:
        raise DomainError("fractional order must be > 0")
    env = None
    if f.envelope is not None:
        e = f.envelope
        # J^alpha t^a = Gamma(a+1)/Gamma(a+alpha+1) t^{a+alpha}
        ratio = max(math.exp(sc.gammaln(a + 1) - sc.gammaln(a + alpha + 1)) for a in (e.eta[j], e.zeta[j]))
        omega = list(e.omega)
        omega[j] = max(omega[j], 0.0)
        eta, zeta = list(e.eta), list(e.zeta)
        eta[j] += alpha
        zeta[j] += alpha
        env = Envelope(e.M * ratio, tuple(omega), tuple(eta), tuple(zeta))
    return VectorFunction(
        f.dims, f.codim, lambda t: _fractional_values(f, j, float(alpha), t, cfg.rel_tol), env, f"J^{alpha} {f.name}"
    )


def _check_axis(f, axis):
    if not 1 <= int(axis) <= f.dims:
        raise ConfigurationError(f"axis must be in 1..{f.dims}")
    return int(axis) - 1


# ---------------------------------------------------------------- convolution


def _conv_axis(t, step):
    """Nodes ``s`` and ``t - s`` (both accurate near 0) with weights on ``[0, t]``."""
    left, right, w = Q._tanh_sinh_reference(step, 4.5)
    h = 0.5 * t
    # first half [0, h]: s = h*left; second half [h, t]: t - s = h*right
    s = np.concatenate([h * left, h + h * left])
    u = np.concatenate([h + h * right, h * right])
    return s, u, np.concatenate([h * w, h * w])


def _convolve_at(a, f, t, step):
    axes = [_conv_axis(tj, step) for tj in t]
    A = grid_eval(a, [ax[1] for ax in axes])
    Fv = grid_eval(f, [ax[0] for ax in axes])
    return contract(A * Fv, [ax[2] for ax in axes])


def _convolve_gl(a, f, t, q):
    x, w = Q.gauss_legendre(q)
    axes = [(0.5 * tj * (1.0 + x), 0.5 * tj * (1.0 - x), 0.5 * tj * w) for tj in t]
    A = grid_eval(a, [ax[1] for ax in axes])
    Fv = grid_eval(f, [ax[0] for ax in axes])
    return contract(A * Fv, [ax[2] for ax in axes])


def faltung_convolve(a, f, t, cfg=QuadratureConfig(), rule="tanh_sinh", nodes=12):
    """``int_{[0,t]} a(t - s) f(s) ds`` for a scalar kernel ``a``.

    Each axis is split at ``t_j / 2``; both halves use tanh-sinh so that
    singularities of ``f`` at ``s = 0`` and of ``a`` at ``s = t`` are
    integrated with nodes clustered at the right end.

    ``rule="gauss_legendre"`` uses one fixed ``nodes``-point rule per axis
    instead.  It never samples close to the axes, which suits integrands
    that are expensive or inaccurate near ``s_j = 0`` but smooth.
    """
    if rule not in ("tanh_sinh", "gauss_legendre"):
        raise ConfigurationError("convolution rule must be 'tanh_sinh' or 'gauss_legendre'")
    if a.codim != 1:
        raise ConfigurationError("the convolution kernel must be scalar")
    if a.dims != f.dims:
        raise ConfigurationError("kernel and function must have the same dimension")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (f.dims,) or np.any(t < 0):
        raise ConfigurationError(f"expected a point in [0, inf)^{f.dims}")
    if np.any(t == 0):
        return np.zeros(f.codim, dtype=complex)
    if rule == "gauss_legendre":
        return _convolve_gl(a, f, t, int(nodes))
    prev = _convolve_at(a, f, t, 1.0 / 3.0)
    step = 1.0 / 6.0
    while True:
        cur = _convolve_at(a, f, t, step)
        if norm(cur - prev) <= cfg.rel_tol * max(norm(cur), 1e-300) or step < 1.0 / 48:
            return cur
        prev, step = cur, step / 2.0


def convolution_envelope(a, f):
    """Envelope of ``a *0 f`` from the envelopes of the factors."""
    ea, ef = a.envelope, f.envelope
    if ea is None or ef is None:
        return None
    M = ea.M * ef.M
    omega, eta, zeta = [], [], []
    for j in range(f.dims):
        combos = [(p, q) for p in (ea.eta[j], ea.zeta[j]) for q in (ef.eta[j], ef.zeta[j])]
        expo = [p + q + 1.0 for p, q in combos]
        M *= 4.0 * max(sc.beta(p + 1.0, q + 1.0) for p, q in combos)
        omega.append(max(ea.omega[j], ef.omega[j]))
        eta.append(min(expo))
        zeta.append(max(expo))
    return Envelope(M, tuple(omega), tuple(eta), tuple(zeta))


def convolution_function(a, f, cfg=QuadratureConfig()):
    """``a *0 f`` as a function of ``t``."""

    def ev(t):
        return np.array([faltung_convolve(a, f, tp, cfg) for tp in t]).reshape(len(t), f.codim)

    return VectorFunction(f.dims, f.codim, ev, convolution_envelope(a, f), f"{a.name}*{f.name}")


def _conv_transform(a, f, lam, delta, step):
    """Exp-sinh tensor quadrature of ``e^{-lam.t} (a *0 f)(t)``."""
    n = f.dims
    rules = [Q.exp_sinh(1.0 / d, step) for d in delta]
    mesh = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    conv = np.array([_convolve_at(a, f, tp, 1.0 / 6.0) for tp in pts])
    conv = conv.reshape(tuple(len(r[0]) for r in rules) + (f.codim,))
    return contract(conv, [w * np.exp(-lam[j] * x) for j, (x, w) in enumerate(rules)])


def convolution_theorem_check(a, f, p, cfg=QuadratureConfig()):
    """Relative gap between ``L(a *0 f)(p)`` and ``L a(p) L f(p)``.

    The left side integrates the convolution itself (computed pointwise) on
    an exp-sinh tensor grid; the right side multiplies two ordinary
    transforms.
    """
    p = as_point(p)
    env = convolution_envelope(a, f)
    if env is None:
        raise ConfigurationError("convolution check needs envelopes on both functions")
    delta = p.real - np.array(env.omega)
    if np.any(delta <= 0):
        raise ConfigurationError("the point must lie in the absolute region of both factors")
    lhs = _conv_transform(a, f, p.array, delta, 1.0 / 10.0)
    rhs = laplace_nd(a, p, cfg).value[0] * laplace_nd(f, p, cfg).value
    return norm(lhs - rhs) / max(norm(rhs), 1e-300)


# ---------------------------------------------------------------- 1D derivative rule


def higher_derivative_transform_1d(transform, initial, m, lam):
    """``L[f^(m)](lam) = lam^m F(lam) - sum_k lam^{m-1-k} f^(k)(0)``.

    ``transform`` is ``F(lam)`` (a number or array) or a callable returning
    it; ``initial`` holds ``f(0), f'(0), ..., f^(m-1)(0)``.
    """
    m = int(m)
    if m < 1:
        raise DomainError("derivative order must be >= 1")
    if len(initial) != m:
        raise ConfigurationError(f"need {m} initial derivatives, got {len(initial)}")
    lam = complex(lam)
    F = transform(lam) if callable(transform) else transform
    out = lam**m * np.asarray(F, dtype=complex)
    for k, d in enumerate(initial):
        out = out - lam ** (m - 1 - k) * np.asarray(d, dtype=complex)
    return out
