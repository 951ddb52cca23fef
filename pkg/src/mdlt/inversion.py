"""Inverting multidimensional Laplace transforms.

Two inverters: the Post-Widder formula (scaled high-order mixed partials at
``lam_j = k_j / t_j``) and Bromwich contour quadrature on tensor products
of one-dimensional contours.  Also Tauberian limit extrapolation and a
uniqueness oracle built on Post-Widder reconstruction.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special as sc

from . import quadrature as Q
from ._parallel import map_chunks
from .errors import ConfigurationError, DecayViolationError, OverflowGuardError
from .transform import contract, grid_eval, norm


class AccuracyWarning(UserWarning):
    """Emitted when an inversion runs in a regime known to be inaccurate."""


# ---------------------------------------------------------------- transforms


@dataclass(frozen=True)
class AxisFactor:
    """One-variable factor of a separable transform.

    ``value(lam)`` is vectorised.  ``log_derivative(k, lam)``, when given,
    returns the complex logarithm of the k-th derivative at a scalar point;
    it lets Post-Widder work at large k without overflow.
    """

    value: Callable
    log_derivative: Optional[Callable] = None


def pole(a=0.0, p=1.0, c=1.0):
    r"""Factor ``c (lam - a)^{-p}`` with closed-form derivatives.

    :math:`\partial^k (\lambda-a)^{-p} = (-1)^k \Gamma(p+k)/\Gamma(p)\,(\lambda-a)^{-p-k}`.
    """

    def value(lam):
        return c * (np.asarray(lam, dtype=complex) - a) ** (-p)

    log_c = complex(np.log(complex(c))) if c != 0 else complex(-np.inf)

    def log_derivative(k, lam):
        return (
            log_c
            + 1j * math.pi * (k % 2)
            + sc.gammaln(p + k)
            - sc.gammaln(p)
            - (p + k) * complex(np.log(complex(lam) - a))
        )

    return AxisFactor(value, log_derivative)


def _logsumexp_complex(logs):
    logs = np.asarray(logs, dtype=complex)
    finite = np.isfinite(logs.real)
    if not np.any(finite):
        return complex(-np.inf)
    top = np.max(logs.real[finite])
    s = np.sum(np.exp(logs[finite] - top))
    return top + complex(np.log(s)) if s != 0 else complex(-np.inf)


def product_factor(u, v):
    """Product of two axis factors; derivatives by the Leibniz rule in log space."""

    def value(lam):
        return u.value(lam) * v.value(lam)

    log_derivative = None
    if u.log_derivative is not None and v.log_derivative is not None:

        def log_derivative(k, lam):
            terms = [
                sc.gammaln(k + 1) - sc.gammaln(i + 1) - sc.gammaln(k - i + 1)
                + u.log_derivative(i, lam)
                + v.log_derivative(k - i, lam)
                for i in range(k + 1)
            ]
            return _logsumexp_complex(terms)

    return AxisFactor(value, log_derivative)


@dataclass(frozen=True)
class Decay:
    """Declared majorant ``||F|| <= M prod |lam_j|^{-1-eps_j}`` on ``Re lam_j > omega_j``."""

    omega: tuple
    eps: tuple
    M: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(float(x) for x in self.omega))
        object.__setattr__(self, "eps", tuple(float(x) for x in self.eps))
        if len(self.omega) != len(self.eps):
            raise ConfigurationError("decay omega and eps must have equal length")
        if any(e < 0 for e in self.eps):
            raise ConfigurationError("decay exponents must be nonnegative")


@dataclass(frozen=True)
class TransformFunction:
    """Transform-domain function ``(N, n) complex -> (N, m)``.

    ``partial(orders, lam)`` returns the mixed partial of the given orders at
    one point.  ``factors`` marks a scalar separable transform (product of
    :class:`AxisFactor`), from which both ``eval`` and partials follow.
    ``sector`` declares analyticity outside a disc on the sector
    ``|arg lam| < pi/2 + gamma`` (needed for sector contours).
    """

    dims: int
    codim: int
    eval: Callable
    decay: Optional[Decay] = None
    partial: Optional[Callable] = None
    factors: Optional[tuple] = None
    sector: bool = False
    name: str = ""

    def __call__(self, lam):
        lam = np.atleast_2d(np.asarray(lam, dtype=complex))
        return np.asarray(self.eval(lam), dtype=complex).reshape(lam.shape[0], self.codim)

    def log_partial(self, orders, lam):
        """Complex log of a mixed partial of a separable scalar transform, or None."""
        if self.factors is None or any(f.log_derivative is None for f in self.factors):
            return None
        return sum(f.log_derivative(int(k), complex(z)) for f, k, z in zip(self.factors, orders, lam))

    @property
    def has_partials(self):
        return self.partial is not None or self.log_partial((0,) * self.dims, (1.0,) * self.dims) is not None


def separable_transform(factors, decay=None, sector=False, name=""):
    """Scalar transform ``prod_j factors[j](lam_j)``."""
    factors = tuple(factors)

    def ev(lam):
        out = np.ones(lam.shape[0], dtype=complex)
        for j, f in enumerate(factors):
            out = out * f.value(lam[:, j])
        return out[:, None]

    return TransformFunction(len(factors), 1, ev, decay, None, factors, sector, name)


def transform_of_antiderivative(F):
    """Transform of ``G`` given the transform ``F`` of ``f``: ``F / (lam_1 ... lam_n)``."""

    def ev(lam):
        return F(lam) / np.prod(lam, axis=1)[:, None]

    factors = None
    if F.factors is not None:
        factors = tuple(product_factor(f, pole(0.0, 1.0)) for f in F.factors)
    decay = None
    if F.decay is not None:
        decay = Decay(tuple(max(w, 0.0) for w in F.decay.omega), tuple(e + 1 for e in F.decay.eps), F.decay.M)
    return TransformFunction(F.dims, F.codim, ev, decay, None, factors, F.sector, F.name + "/G")


# ---------------------------------------------------------------- results


@dataclass
class InversionResult:
    value: np.ndarray
    error_estimate: float = math.nan
    low_order: bool = False


# ---------------------------------------------------------------- Post-Widder


@dataclass(frozen=True)
class PostWidderConfig:
    k: tuple = (32,)
    derivative_source: str = "analytic_callback"

    def __post_init__(self):
        k = tuple(int(x) for x in np.atleast_1d(self.k))
        if not k or any(x < 1 for x in k):
            raise ConfigurationError("Post-Widder orders must be >= 1")
        object.__setattr__(self, "k", k)
        if self.derivative_source not in ("analytic_callback", "moment_quadrature"):
            raise ConfigurationError(f"unknown derivative_source {self.derivative_source!r}")

    def orders(self, n):
        if len(self.k) == 1:
            return self.k * n
        if len(self.k) != n:
            raise ConfigurationError(f"expected {n} Post-Widder orders, got {len(self.k)}")
        return self.k


def _pw_log_prefactor(k, t):
    """log of ``(-1)^k / k! * (k/t)^{k+1}``."""
    ratio = k / t
    if not math.isfinite(ratio) or ratio <= 0:
        raise OverflowGuardError(f"k/t = {k}/{t} is not representable")
    return 1j * math.pi * (k % 2) - sc.gammaln(k + 1) + (k + 1) * math.log(ratio)


def _check_times(t, n):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (n,):
        raise ConfigurationError(f"expected a time point with {n} coordinates")
    if np.any(t <= 0):
        raise ConfigurationError("inversion needs t_j > 0")
    return t


def post_widder_invert(F, t, cfg=PostWidderConfig(), source=None, quad_tol=1e-10):
    """Post-Widder approximation of ``f(t)`` from the transform ``F``.

    With ``derivative_source="moment_quadrature"`` the mixed partial is
    replaced by its moment integral, which needs the original function
    ``source``; the whole expression then becomes an integral of ``source``
    against a product of Gamma densities, evaluated in log space.
    """
    t = _check_times(t, F.dims)
    k = cfg.orders(F.dims)
    low = min(k) < 4
    if low:
        warnings.warn("Post-Widder with k < 4 is inaccurate", AccuracyWarning, stacklevel=2)
    if cfg.derivative_source == "moment_quadrature":
        if source is None:
            raise ConfigurationError("moment_quadrature needs the source function")
        value = _pw_moment(source, t, k, quad_tol, survival=False)
    else:
        value = _pw_analytic(F, t, k)
    return InversionResult(value, math.nan, low)


def post_widder_invert_G(F, t, cfg=PostWidderConfig(), source=None, quad_tol=1e-10):
    """Post-Widder approximation of the antiderivative ``G(t)``.

    Uses the transform ``F / (lam_1 ... lam_n)`` of ``G``; the moment route
    integrates ``source`` against Gamma survival functions, which equals the
    Gamma-density average of ``G``.
    """
    t = _check_times(t, F.dims)
    k = cfg.orders(F.dims)
    low = min(k) < 4
    if low:
        warnings.warn("Post-Widder with k < 4 is inaccurate", AccuracyWarning, stacklevel=2)
    if cfg.derivative_source == "moment_quadrature":
        if source is None:
            raise ConfigurationError("moment_quadrature needs the source function")
        value = _pw_moment(source, t, k, quad_tol, survival=True)
    else:
        value = _pw_analytic(transform_of_antiderivative(F), t, k)
    return InversionResult(value, math.nan, low)


def _pw_analytic(F, t, k):
    lam = tuple(kj / tj for kj, tj in zip(k, t))
    pre = sum(_pw_log_prefactor(kj, tj) for kj, tj in zip(k, t))
    logp = F.log_partial(k, lam)
    if logp is not None:
        total = pre + logp
        if total.real > 709:
            raise OverflowGuardError("Post-Widder value overflows")
        return np.array([np.exp(total)])
    if F.partial is None:
        raise ConfigurationError(
            f"transform {F.name!r} has no analytic partials; use derivative_source='moment_quadrature'"
        )
    d = np.asarray(F.partial(k, np.array(lam, dtype=complex)), dtype=complex).reshape(F.codim)
    with np.errstate(divide="ignore"):
        logs = np.log(d)
    out = np.where(d == 0, 0.0, np.exp(logs + pre))
    if not np.all(np.isfinite(out)):
        raise OverflowGuardError("Post-Widder value overflows")
    return out


def _gamma_window(k, t):
    """Integration window holding essentially all mass of Gamma(k+1, rate k/t)."""
    rate = k / t
    mean = (k + 1) / rate
    sd = math.sqrt(k + 1) / rate
    lo = max(0.0, mean - 14.0 * sd)
    hi = mean + 14.0 * sd + 40.0 / rate
    return lo, hi


def _pw_moment(source, t, k, tol, survival):
    n = source.dims
    axes, weights = [], []
    for j in range(n):
        lo, hi = _gamma_window(k[j], t[j])
        rate = k[j] / t[j]
        if survival:
            lo = 0.0
        panels = 8
        axes.append((lo, hi, rate))
    prev = None
    while True:
        nodes, wts = [], []
        for lo, hi, rate in axes:
            if lo == 0.0:
                x, w = Q.axis_rule(hi, panels)
            else:
                x, w = Q.composite_gl(lo, hi, panels)
            kj = k[len(nodes)]
            if survival:
                dens = sc.gammaincc(kj + 1, rate * x)
            else:
                with np.errstate(divide="ignore"):
                    dens = np.exp((kj + 1) * math.log(rate) + kj * np.log(x) - rate * x - sc.gammaln(kj + 1))
            nodes.append(x)
            wts.append(w * dens)
        vals = grid_eval(source, nodes)
        cur = contract(vals, wts)
        if prev is not None and norm(cur - prev) <= tol * max(norm(cur), 1e-300):
            return cur
        if panels >= 512:
            return cur
        prev = cur
        panels *= 2


# ---------------------------------------------------------------- Bromwich


SHAPES = ("vertical_line", "sector_rays")


@dataclass(frozen=True)
class ContourConfig:
    """Contour parameters; ``None`` entries are chosen from the transform and ``t``.

    ``nodes`` is the Gauss-Legendre order used on every contour panel.
    """

    offsets: Optional[tuple] = None
    half_length: Optional[tuple] = None
    nodes: int = 16
    shape: str = "vertical_line"
    angle: float = math.pi / 4

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigurationError(f"contour shape must be one of {SHAPES}")
        if int(self.nodes) < 8:
            raise ConfigurationError("contour panels need at least 8 nodes")
        if self.shape == "sector_rays" and not 0 < self.angle < math.pi / 2:
            raise ConfigurationError("sector angle must lie in (0, pi/2)")
        if self.half_length is not None:
            hl = tuple(float(x) for x in np.atleast_1d(self.half_length))
            if any(x <= 0 for x in hl):
                raise ConfigurationError("half_length must be positive")
            object.__setattr__(self, "half_length", hl)
        if self.offsets is not None:
            object.__setattr__(self, "offsets", tuple(float(x) for x in np.atleast_1d(self.offsets)))


def _per_axis(value, n, name):
    if value is None:
        return None
    if len(value) == 1:
        return value * n
    if len(value) != n:
        raise ConfigurationError(f"{name} needs {n} entries")
    return value


@dataclass
class _AxisContour:
    """A one-dimensional contour rule for a range of times sharing its nodes.

    ``base`` holds ``dlam/(2 pi i)`` quadrature weights; the time-dependent
    weight at ``t`` is ``base * exp(lam t)`` plus endpoint corrections.
    """

    lam: np.ndarray
    base: np.ndarray
    ends: list  # (index at y, index at y - delta, index at y + delta, y, delta, sign)
    c: float

    def weights(self, t, order):
        w = self.base * np.exp(self.lam * t)
        for i_end, i_lo, i_hi, y, delta, sgn in self.ends:
            # tail int_{y}^{inf} e^{i y t} phi(y) dy (sgn=+1) or int_{-inf}^{y} (sgn=-1),
            # with phi(y) = e^{c t} F(c+iy) / (2 pi); integration by parts
            scale = math.exp(self.c * t) / (2.0 * math.pi)
            osc = np.exp(1j * y * t)
            it = 1j * t
            w[i_end] += -sgn * osc / it * scale
            if order >= 2:
                d = sgn * osc / it**2 * scale / (2.0 * delta)
                w[i_hi] += d
                w[i_lo] -= d
        return w


def _vertical_axis(c, L, t_max, q, gap):
    """Vertical line ``c + iy``, ``|y| <= L``, with panels refined near ``y = 0``.

    ``gap`` is the distance from the line to the abscissa; it keeps the first
    panels finite when ``c <= 0``.
    """
    width_osc = 1.5 * 2.0 * math.pi / t_max
    near = max(c, gap) / 2.0
    edges = [0.0]
    while edges[-1] < L:
        y = edges[-1]
        w = min(width_osc, max(near, y / 4.0))
        edges.append(min(L, y + w))
    pos = np.array(edges)
    full = np.concatenate([-pos[::-1], pos[1:]])
    y, w = Q.gl_on_edges(full, q)
    delta = min(1e-3 * L, 0.05 * width_osc)
    extra_y = np.array([L, L - delta, L + delta, -L, -L + delta, -L - delta])
    ys = np.concatenate([y, extra_y])
    base = np.concatenate([w / (2.0 * math.pi), np.zeros(6)])
    lam = c + 1j * ys
    N = len(y)
    ends = [
        (N, N + 1, N + 2, L, delta, +1.0),
        (N + 3, N + 5, N + 4, -L, delta, -1.0),
    ]
    return _AxisContour(lam, base, ends, c)


def _sector_axis(rho, gamma, t_min, t_max, q):
    """Arc of radius ``rho`` over ``|arg| <= pi/2 + gamma`` plus two rays."""
    theta = math.pi / 2.0 + gamma
    n_arc = max(4, int(math.ceil(rho * t_max * theta / 2.0)) + 4)
    phi, wphi = Q.composite_gl(-theta, theta, n_arc, q)
    lam_arc = rho * np.exp(1j * phi)
    w_arc = 1j * lam_arc * wphi / (2j * math.pi)
    decay = t_min * math.sin(gamma)
    R = rho + 40.0 / decay
    width = min(1.0 / decay, 1.5 * 2.0 * math.pi / (t_max * math.cos(gamma)))
    n_ray = max(4, int(math.ceil((R - rho) / width)))
    r, wr = Q.composite_gl(rho, R, n_ray, q)
    up = r * np.exp(1j * theta)
    down = r * np.exp(-1j * theta)
    # orientation: in along the lower ray, counter-clockwise arc, out along the upper ray
    w_up = np.exp(1j * theta) * wr / (2j * math.pi)
    w_down = -np.exp(-1j * theta) * wr / (2j * math.pi)
    lam = np.concatenate([down, lam_arc, up])
    base = np.concatenate([w_down, w_arc, w_up])
    return _AxisContour(lam, base, [], 0.0)


def _decay_check(F, offsets):
    """Compare ``|F|`` with its declared majorant on the lines ``Re lam_j = c_j``."""
    if F.decay is None:
        return
    ys = np.array([0.0, 1.0, -1.0, 3.0, -3.0, 10.0, -10.0, 30.0, 100.0, -100.0, 1000.0])
    mesh = np.meshgrid(*[c + 1j * ys for c in offsets], indexing="ij")
    lam = np.stack([m.ravel() for m in mesh], axis=1)
    vals = np.max(np.abs(F(lam)), axis=1)
    with np.errstate(divide="ignore"):
        # lam = 0 can lie on a line with c = 0; the bound is infinite there
        bound = F.decay.M * np.prod(np.abs(lam) ** (-1.0 - np.array(F.decay.eps)), axis=1)
    worst = float(np.max(vals / bound))
    if worst > 10.0:
        raise DecayViolationError(
            f"|F| exceeds the declared majorant by a factor {worst:.3g} on the contour"
        )


def _bucket_key(t):
    return tuple(int(math.floor(math.log2(x))) for x in t)


def bromwich_invert(F, t, cfg=ContourConfig()):
    """Bromwich inversion at one time point; see :func:`bromwich_invert_many`."""
    t = _check_times(t, F.dims)
    return bromwich_invert_many(F, t[None, :], cfg)[0]


def bromwich_invert_many(F, ts, cfg=ContourConfig()):
    """Bromwich inversion ``(2 pi i)^{-n} int e^{lam.t} F(lam) dlam`` at many times.

    Times are grouped by power-of-two buckets; each bucket shares one tensor
    contour, so ``F`` is evaluated once per bucket.  On vertical lines the
    truncated ends receive integration-by-parts tail corrections; the
    difference between first- and second-order corrections is reported as
    the error estimate.
    """
    ts = np.atleast_2d(np.asarray(ts, dtype=float))
    n = F.dims
    if ts.shape[1] != n or np.any(ts <= 0):
        raise ConfigurationError("times must be positive points with n coordinates")
    if cfg.shape == "sector_rays" and not F.sector:
        raise ConfigurationError(f"transform {F.name!r} is not declared analytic on sectors")
    omega = F.decay.omega if F.decay is not None else (0.0,) * n
    offsets = _per_axis(cfg.offsets, n, "offsets")
    if offsets is not None and any(c <= w for c, w in zip(offsets, omega)):
        raise ConfigurationError("contour offsets must exceed the abscissas omega_j")
    halfs = _per_axis(cfg.half_length, n, "half_length")
    buckets = {}
    for i, tp in enumerate(ts):
        buckets.setdefault(_bucket_key(tp), []).append(i)
    results = [None] * len(ts)
    for idx in buckets.values():
        group = ts[idx]
        t_lo, t_hi = group.min(axis=0), group.max(axis=0)
        contours = []
        cs = [offsets[j] if offsets else omega[j] + 1.0 + 1.0 / t_lo[j] for j in range(n)]
        _decay_check(F, cs)
        for j in range(n):
            c = cs[j]
            if cfg.shape == "vertical_line":
                L = halfs[j] if halfs else 300.0 / t_lo[j] + 50.0
                contours.append(_vertical_axis(c, L, t_hi[j], int(cfg.nodes), c - omega[j]))
            else:
                rho = max(c, 1.0 / t_lo[j])
                contours.append(_sector_axis(rho, cfg.angle, t_lo[j], t_hi[j], int(cfg.nodes)))
        mesh = np.meshgrid(*[c.lam for c in contours], indexing="ij")
        lam = np.stack([m.ravel() for m in mesh], axis=1)
        vals = map_chunks(F, lam).reshape(tuple(len(c.lam) for c in contours) + (F.codim,))
        for i, tp in zip(idx, group):
            hi = contract(vals, [c.weights(tp[j], 2) for j, c in enumerate(contours)])
            if cfg.shape == "vertical_line":
                lo = contract(vals, [c.weights(tp[j], 1) for j, c in enumerate(contours)])
                err = norm(hi - lo)
            else:
                err = 0.0
            results[i] = InversionResult(hi, err)
    return results


# ---------------------------------------------------------------- Tauberian


@dataclass
class LimitResult:
    value: np.ndarray
    error: float
    converged: bool


def _neville_zero(h, y):
    """Values at ``h = 0`` of interpolants through growing prefixes of ``(h, y)``."""
    h = np.asarray(h, dtype=float)
    y = np.asarray(y, dtype=complex)
    n = len(h)
    P = y.copy()
    estimates = [P[0].copy()]
    table = [y[i].copy() for i in range(n)]
    for level in range(1, n):
        new = []
        for i in range(n - level):
            a, b = h[i], h[i + level]
            new.append((-b * table[i] + a * table[i + 1]) / (a - b))
        table = new
        estimates.append(table[0].copy())
    return estimates


def _extrapolate(F, probe, to_infinity):
    probe = np.asarray(probe, dtype=float)
    if len(probe) < 4:
        raise ConfigurationError("need at least 4 probe values")
    n = F.dims
    lam = np.repeat(probe[:, None], n, axis=1)
    vals = F(lam) * np.prod(lam, axis=1)[:, None]
    h = 1.0 / probe if to_infinity else probe
    order = np.argsort(-np.abs(h))
    # polynomial extrapolation; start from points far from the limit
    est = _neville_zero(h[order], vals[order])
    incs = [norm(b - a) for a, b in zip(est[:-1], est[1:])]
    converged = len(incs) >= 2 and all(b <= a * 1.0 + 1e-15 for a, b in zip(incs[-3:-1], incs[-2:]))
    return LimitResult(est[-1], incs[-1], converged)


def tauberian_initial(F, probe=(8.0, 16.0, 32.0, 64.0, 128.0, 256.0)):
    """``lim lam_1...lam_n F(lam)`` as every ``lam_j -> +inf`` along the diagonal."""
    if any(b <= a for a, b in zip(probe[:-1], probe[1:])):
        raise ConfigurationError("initial-value probe must be increasing")
    return _extrapolate(F, probe, True)


def tauberian_final(F, probe=(0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625)):
    """``lim lam_1...lam_n F(lam)`` as ``lam -> 0+`` along the diagonal."""
    if any(b >= a for a, b in zip(probe[:-1], probe[1:])) or min(probe) <= 0:
        raise ConfigurationError("final-value probe must be positive and decreasing")
    return _extrapolate(F, probe, False)


# ---------------------------------------------------------------- uniqueness


@dataclass
class UniquenessReport:
    transform_gap: float
    gate_passed: bool
    max_discrepancy: float


def uniqueness_check(F1, F2, grid, t_grid, cfg=PostWidderConfig(), tol_in=1e-8, sources=(None, None)):
    """Reconstruction-level discrepancy between two transforms.

    First the transforms are compared on the real grid ``grid`` (the gate).
    If they agree to ``tol_in``, both are inverted by Post-Widder on
    ``t_grid`` and the largest difference is returned; otherwise the
    transform gap itself is reported as the discrepancy.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim == 1:
        # plain values are read as diagonal points
        grid = grid[:, None]
    if grid.shape[1] == 1 and F1.dims > 1:
        grid = np.repeat(grid, F1.dims, axis=1)
    if grid.ndim != 2 or grid.shape[1] != F1.dims:
        raise ConfigurationError(f"gate grid must hold points with {F1.dims} coordinates")
    gap = float(np.max(np.abs(F1(grid) - F2(grid))))
    if gap >= tol_in:
        return UniquenessReport(gap, False, gap)
    worst = 0.0
    for tp in np.atleast_2d(np.asarray(t_grid, dtype=float)):
        vals = []
        for F, src in zip((F1, F2), sources):
            use = cfg
            if src is not None:
                use = PostWidderConfig(cfg.k, "moment_quadrature")
            vals.append(post_widder_invert(F, tp, use, source=src).value)
        worst = max(worst, norm(vals[0] - vals[1]))
    return UniquenessReport(gap, True, worst)
