"""The n-dimensional Laplace integral and its convergence regions.

Functions are :class:`VectorFunction` objects: a vectorised callable from
points of ``[0, inf)^n`` to ``C^m`` plus an optional growth envelope
``M * prod_j (t_j**eta_j + t_j**zeta_j) * exp(omega_j * t_j)``.
The envelope drives truncation of the integration box and the reported
tail bounds.  Norms on ``C^m`` are the max-abs-coordinate norm.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import special as sc

from . import quadrature as Q
from ._parallel import map_chunks
from .errors import ConfigurationError, DivergenceError, QuadratureError

MODES = ("absolute", "iterated", "bounded_partial")
RULES = ("gauss_legendre", "tanh_sinh")
VERDICTS = ("in_Ω_abs", "in_Ω_only", "in_Ω_b", "outside", "undetermined")

MAX_TENSOR_NODES = 4_000_000


def norm(v):
    """Max-abs-coordinate norm."""
    v = np.asarray(v)
    return float(np.max(np.abs(v))) if v.size else 0.0


@dataclass(frozen=True)
class Envelope:
    """Growth bound ``M * prod_j (t^eta_j + t^zeta_j) e^{omega_j t}``."""

    M: float
    omega: tuple
    eta: tuple
    zeta: tuple

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(float(x) for x in self.omega))
        object.__setattr__(self, "eta", tuple(float(x) for x in self.eta))
        object.__setattr__(self, "zeta", tuple(float(x) for x in self.zeta))
        n = len(self.omega)
        if not (len(self.eta) == len(self.zeta) == n) or n == 0:
            raise ConfigurationError("envelope parameters must all have length n >= 1")
        if not self.M >= 0:
            raise ConfigurationError("envelope constant M must be nonnegative")

    @classmethod
    def simple(cls, n, M=1.0, omega=0.0, eta=0.0, zeta=None):
        """Same parameters on every axis."""
        zeta = eta if zeta is None else zeta
        return cls(M, (omega,) * n, (eta,) * n, (zeta,) * n)

    @property
    def dims(self):
        return len(self.omega)

    def bound(self, t):
        """Envelope value at points ``t`` of shape ``(N, n)``."""
        t = np.atleast_2d(np.asarray(t, dtype=float))
        with np.errstate(divide="ignore", over="ignore"):
            per_axis = (t ** np.array(self.eta) + t ** np.array(self.zeta)) * np.exp(
                t * np.array(self.omega)
            )
        return self.M * np.prod(per_axis, axis=1)

    def axis_integral(self, j, delta, T=0.0):
        """``int_T^inf (t^eta + t^zeta) e^{-delta t} dt`` for axis ``j``."""
        total = 0.0
        for p in (self.eta[j], self.zeta[j]):
            a = p + 1.0
            if a <= 0:
                return math.inf
            tail = sc.gammaincc(a, delta * T) if T > 0 else 1.0
            total += math.exp(sc.gammaln(a) - a * math.log(delta)) * tail
        return total

    def antiderivative(self):
        """Envelope satisfied by the box antiderivative ``G``."""
        scale = 1.0
        omega = []
        for j in range(self.dims):
            scale /= min(self.eta[j], self.zeta[j]) + 1.0
            omega.append(max(self.omega[j], 0.0))
        return Envelope(
            self.M * scale,
            tuple(omega),
            tuple(e + 1.0 for e in self.eta),
            tuple(z + 1.0 for z in self.zeta),
        )


@dataclass(frozen=True)
class VectorFunction:
    """Vectorised map ``(N, n) -> (N, m)`` with an optional growth envelope."""

    dims: int
    codim: int
    eval: Callable
    envelope: Optional[Envelope] = None
    name: str = ""
    horizon: float = math.inf  # largest coordinate at which eval is valid

    def __post_init__(self):
        if self.dims < 1 or self.codim < 1:
            raise ConfigurationError("dims and codim must be >= 1")
        if self.envelope is not None and self.envelope.dims != self.dims:
            raise ConfigurationError("envelope dimension does not match dims")

    def __call__(self, t):
        t = np.atleast_2d(np.asarray(t, dtype=float))
        out = np.asarray(self.eval(t), dtype=complex)
        return out.reshape(t.shape[0], self.codim)

    def scaled(self, factor_fn, envelope=None, name=None):
        """Pointwise product with a scalar weight ``factor_fn(t) -> (N,)``."""

        def ev(t):
            return self(t) * np.asarray(factor_fn(t))[:, None]

        return VectorFunction(self.dims, self.codim, ev, envelope, name or self.name, self.horizon)

    def spot_check_envelope(self, samples=200, seed=0, upper=5.0, slack=1.0 + 1e-9):
        """True if the envelope bound holds at random points of ``[0, upper]^n``."""
        if self.envelope is None:
            return True
        rng = np.random.default_rng(seed)
        t = rng.uniform(0.0, upper, size=(samples, self.dims))
        vals = np.max(np.abs(self(t)), axis=1)
        return bool(np.all(vals <= slack * self.envelope.bound(t) + 1e-300))


def scalar_function(dims, fn, envelope=None, name=""):
    """Wrap ``fn: (N, n) -> (N,)`` as a codim-1 :class:`VectorFunction`."""
    return VectorFunction(dims, 1, lambda t: np.asarray(fn(t))[:, None], envelope, name)


@dataclass(frozen=True)
class LaplacePoint:
    lam: tuple

    def __post_init__(self):
        lam = tuple(complex(x) for x in np.atleast_1d(self.lam))
        if not lam:
            raise ConfigurationError("a Laplace point needs at least one coordinate")
        if not all(math.isfinite(z.real) and math.isfinite(z.imag) for z in lam):
            raise ConfigurationError("Laplace point coordinates must be finite")
        object.__setattr__(self, "lam", lam)

    @property
    def n(self):
        return len(self.lam)

    @property
    def array(self):
        return np.array(self.lam, dtype=complex)

    @property
    def real(self):
        return np.array([z.real for z in self.lam])


def as_point(p):
    return p if isinstance(p, LaplacePoint) else LaplacePoint(tuple(np.atleast_1d(p)))


@dataclass(frozen=True)
class QuadratureConfig:
    mode: str = "absolute"
    truncation: Optional[tuple] = None
    panels: int = 8
    rule: str = "tanh_sinh"
    rel_tol: float = 1e-8
    max_panels: int = 1024

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.rule not in RULES:
            raise ConfigurationError(f"rule must be one of {RULES}, got {self.rule!r}")
        if not self.rel_tol > 0:
            raise ConfigurationError("rel_tol must be positive")
        if int(self.panels) < 1:
            raise ConfigurationError("panels must be >= 1")
        if self.truncation is not None:
            tr = tuple(float(x) for x in np.atleast_1d(self.truncation))
            if not all(x > 0 and math.isfinite(x) for x in tr):
                raise ConfigurationError("truncation lengths must be positive and finite")
            object.__setattr__(self, "truncation", tr)

    def truncation_for(self, n):
        if self.truncation is None:
            return None
        tr = self.truncation
        if len(tr) == 1:
            return tr * n
        if len(tr) != n:
            raise ConfigurationError(f"truncation has {len(tr)} entries, expected {n}")
        return tr


@dataclass
class TransformResult:
    value: np.ndarray
    mode_used: str
    tail_estimate: np.ndarray
    converged: bool


@dataclass
class ConvergenceReport:
    abs_abscissa: list = field(default_factory=list)
    memberships: list = field(default_factory=list)


# ---------------------------------------------------------------- tensor rules


def grid_eval(f, axes):
    """Evaluate ``f`` on the tensor grid of 1D node arrays; shape ``(N1,...,Nn,m)``."""
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    vals = map_chunks(f, pts)
    return vals.reshape(tuple(len(a) for a in axes) + (f.codim,))


def contract(values, vectors):
    """Contract each leading axis of ``values`` with the matching 1D vector."""
    out = values
    for v in vectors:
        out = np.tensordot(v, out, axes=(0, 0))
    return out


def _kernel_weights(nodes, weights, lam):
    return weights * np.exp(-lam * nodes)


def _check_nodes(counts):
    total = int(np.prod([float(c) for c in counts]))
    if total > MAX_TENSOR_NODES:
        raise QuadratureError(
            f"tensor rule needs {total} nodes, above the cap of {MAX_TENSOR_NODES}"
        )


def box_integral(f, lam, T, cfg, weight=None):
    """Adaptive tensor quadrature of ``f(t) e^{-lam.t}`` over ``prod [0, T_j]``.

    Panel counts double on every axis until two successive estimates agree
    to ``cfg.rel_tol`` in norm.  Returns ``(value, converged)``.
    """
    n = len(T)
    lam = np.asarray(lam, dtype=complex)
    panels = [
        max(int(cfg.panels), int(math.ceil(T[j] * abs(lam[j].imag) / 6.0))) for j in range(n)
    ]
    prev = None
    while True:
        rules = [Q.axis_rule(T[j], panels[j], cfg.rule) for j in range(n)]
        _check_nodes([len(r[0]) for r in rules])
        vals = grid_eval(f, [r[0] for r in rules])
        if weight is not None:
            vals = vals * weight(rules)[..., None]
        cur = contract(vals, [_kernel_weights(r[0], r[1], lam[j]) for j, r in enumerate(rules)])
        if not np.all(np.isfinite(cur)):
            raise QuadratureError("non-finite value in tensor quadrature")
        if prev is not None and norm(cur - prev) <= cfg.rel_tol * max(norm(cur), 1e-300):
            return cur, True
        if max(panels) * 2 > cfg.max_panels:
            raise QuadratureError(
                f"panel refinement hit the cap of {cfg.max_panels} panels without meeting "
                f"rel_tol={cfg.rel_tol:g}"
            )
        try:
            _check_nodes([len(Q.axis_rule(T[j], 2 * panels[j], cfg.rule)[0]) for j in range(n)])
        except QuadratureError:
            raise QuadratureError(
                f"refinement would exceed {MAX_TENSOR_NODES} nodes before meeting "
                f"rel_tol={cfg.rel_tol:g}"
            ) from None
        prev = cur
        panels = [2 * p for p in panels]


def choose_truncation(env, delta, target):
    """Per-axis box lengths whose envelope tail is at most ``target`` of the total."""
    out = []
    for j, d in enumerate(delta):
        full = env.axis_integral(j, d)
        T = 1.0 / d
        while env.axis_integral(j, d, T) > target * full:
            T *= 2.0
        lo, hi = T / 2.0, T
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            if env.axis_integral(j, d, mid) > target * full:
                lo = mid
            else:
                hi = mid
        out.append(hi)
    return tuple(out)


def envelope_tails(env, delta, T):
    full = [env.axis_integral(j, d) for j, d in enumerate(delta)]
    tails = []
    for j, d in enumerate(delta):
        others = np.prod([full[i] for i in range(len(delta)) if i != j]) if len(delta) > 1 else 1.0
        tails.append(env.M * env.axis_integral(j, d, T[j]) * others)
    return np.array(tails)


def _absolute_setup(f, p, cfg):
    n = f.dims
    lam_re = p.real
    env = f.envelope
    T = cfg.truncation_for(n)
    if env is None:
        if T is None:
            raise ConfigurationError("absolute mode needs an envelope or an explicit truncation")
        return T, np.full(n, math.nan)
    delta = lam_re - np.array(env.omega)
    if np.any(delta <= 0):
        j = int(np.argmax(delta <= 0))
        raise DivergenceError(
            f"Re lambda_{j + 1} = {lam_re[j]:g} does not exceed the envelope abscissa "
            f"omega_{j + 1} = {env.omega[j]:g}"
        )
    if any(min(env.eta[j], env.zeta[j]) <= -1 for j in range(n)):
        raise DivergenceError("envelope exponent <= -1: integrand not integrable at the origin")
    if T is None:
        T = choose_truncation(env, delta, cfg.rel_tol / (10.0 * n))
    return T, envelope_tails(env, delta, T)


def laplace_nd(f, p, cfg=QuadratureConfig()):
    """Laplace integral ``int e^{-lam.t} f(t) dt`` over ``[0, inf)^n``.

    ``cfg.mode`` selects an absolutely convergent box integral (truncated
    using the envelope), nested one-dimensional improper integrals taken
    innermost axis first, or a bounded partial integral over the box
    ``cfg.truncation``.
    """
    p = as_point(p)
    if p.n != f.dims:
        raise ConfigurationError(f"point has {p.n} coordinates, function has {f.dims}")
    if cfg.mode == "absolute":
        T, tails = _absolute_setup(f, p, cfg)
        value, ok = box_integral(f, p.array, T, cfg)
        return TransformResult(value, "absolute", tails, ok)
    if cfg.mode == "bounded_partial":
        T = cfg.truncation_for(f.dims)
        if T is None:
            raise ConfigurationError("bounded_partial mode needs an explicit truncation")
        value, ok = box_integral(f, p.array, T, cfg)
        return TransformResult(value, "bounded_partial", np.zeros(f.dims), ok)
    return _iterated(f, p, cfg)


class _ChannelCache:
    """Memoises a vector-valued integrand so each real channel can be integrated separately."""

    def __init__(self, fn):
        self.fn = fn
        self.store = {}

    def channel(self, c):
        def g(t):
            t = np.asarray(t, dtype=float)
            missing = np.array([x for x in np.unique(t) if x not in self.store])
            if missing.size:
                vals = self.fn(missing)
                for x, v in zip(missing, vals):
                    self.store[x] = v
            out = np.array([self.store[x][c // 2] for x in t])
            return out.real if c % 2 == 0 else out.imag

        return g


class _Diverged(Exception):
    """An inner improper integral came back non-finite; the outer ones are moot."""


def _iterated(f, p, cfg):
    n, m = f.dims, f.codim
    lam = p.array
    status = {"ok": True, "err": np.zeros(n)}

    def integrate(vec_fn, axis):
        cache = _ChannelCache(vec_fn)
        out = np.zeros(m, dtype=complex)
        for c in range(2 * m):
            res = Q.improper_1d(cache.channel(c), tol=cfg.rel_tol)
            if not math.isfinite(res.value):
                raise _Diverged
            if not res.converged:
                status["ok"] = False
            if math.isfinite(res.error):
                status["err"][axis] = max(status["err"][axis], res.error)
            if c % 2 == 0:
                out[c // 2] += res.value
            else:
                out[c // 2] += 1j * res.value
        return out

    def level(prefix, axis):
        if axis == n - 1:

            def innermost(t):
                pts = np.empty((len(t), n))
                pts[:, :axis] = prefix
                pts[:, axis] = t
                with np.errstate(over="ignore", invalid="ignore"):
                    return f(pts) * np.exp(-lam[axis] * t)[:, None]

            return integrate(innermost, axis)

        def outer(t):
            rows = [level(prefix + (x,), axis + 1) for x in t]
            with np.errstate(over="ignore", invalid="ignore"):
                return np.array(rows) * np.exp(-lam[axis] * t)[:, None]

        return integrate(outer, axis)

    try:
        value = level((), 0)
    except _Diverged:
        return TransformResult(np.full(m, complex(math.nan)), "iterated", np.full(n, math.inf), False)
    return TransformResult(value, "iterated", status["err"], status["ok"])


# ---------------------------------------------------------------- antiderivative


def antiderivative_G(f, t, cfg=QuadratureConfig()):
    """``G(t) = int_0^{t_1} ... int_0^{t_n} f``, by adaptive tensor quadrature."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (f.dims,):
        raise ConfigurationError(f"expected a point with {f.dims} coordinates")
    if np.any(t < 0):
        raise ConfigurationError("antiderivative needs t >= 0")
    if np.any(t == 0):
        return np.zeros(f.codim, dtype=complex)
    value, _ = box_integral(f, np.zeros(f.dims), tuple(t), cfg)
    return value


def cumulative_apply(values, axis, edges, q=Q.GL_ORDER):
    """Running integral along ``axis`` of samples on the GL nodes of ``edges``."""
    Cref = Q._reference_cumulative(q)
    _, w_ref = Q.gauss_legendre(q)
    half = 0.5 * np.diff(edges)
    v = np.moveaxis(values, axis, 0)
    shape = v.shape
    v = v.reshape((len(half), q) + shape[1:])
    within = np.einsum("ij,pj...->pi...", Cref, v) * half.reshape((-1, 1) + (1,) * (v.ndim - 2))
    totals = np.einsum("j,pj...->p...", w_ref, v) * half.reshape((-1,) + (1,) * (v.ndim - 2))
    before = np.concatenate([np.zeros((1,) + totals.shape[1:], totals.dtype), np.cumsum(totals, 0)[:-1]])
    out = within + before[:, None]
    return np.moveaxis(out.reshape(shape), 0, axis)


def _lg_transform(f, lam, T, panels):
    """Transforms of ``f`` and of ``G`` on one shared graded tensor grid."""
    n = f.dims
    edges = [Q.graded_edges(T[j], panels) for j in range(n)]
    rules = [Q.gl_on_edges(e) for e in edges]
    _check_nodes([len(r[0]) for r in rules])
    vals = grid_eval(f, [r[0] for r in rules])
    G = vals
    for j in range(n):
        G = cumulative_apply(G, j, edges[j])
    kw = [_kernel_weights(r[0], r[1], lam[j]) for j, r in enumerate(rules)]
    return contract(vals, kw), contract(G, kw)


def check_LG_relation(f, p, cfg=QuadratureConfig()):
    """Relative residual of ``L f = lam_1 ... lam_n L G``.

    Both transforms are computed on the same graded tensor grid; ``G`` is
    obtained there by spectral cumulative integration along each axis.
    """
    p = as_point(p)
    env = f.envelope
    if env is None:
        raise ConfigurationError("check_LG_relation needs an envelope")
    lam = p.array
    env_G = env.antiderivative()
    delta = p.real - np.array(env_G.omega)
    if np.any(delta <= 0):
        raise DivergenceError("need Re lambda_j > max(omega_j, 0) on every axis")
    T = cfg.truncation_for(f.dims) or choose_truncation(env_G, delta, cfg.rel_tol / (10.0 * f.dims))
    panels = max(int(cfg.panels), 4)
    prev = None
    while True:
        Lf, LG = _lg_transform(f, lam, T, panels)
        if prev is not None:
            if norm(Lf - prev[0]) <= cfg.rel_tol * max(norm(Lf), 1e-300) and norm(
                LG - prev[1]
            ) <= cfg.rel_tol * max(norm(LG), 1e-300):
                break
        if 2 * panels > cfg.max_panels:
            raise QuadratureError("panel cap reached in check_LG_relation")
        prev = (Lf, LG)
        panels *= 2
    rhs = np.prod(lam) * LG
    return norm(Lf - rhs) / (1.0 + norm(Lf))


# ---------------------------------------------------------------- regions


def _shell_grid(n, T_max, per_shell, q=8, quarters=False):
    """Per-axis GL rule on [0,1] plus dyadic shells up to ``T_max``.

    With ``quarters`` the returned levels also include the quarter points
    of each shell, which are panel edges because ``per_shell`` is rounded
    up to a multiple of 4.
    """
    k_max = int(round(math.log2(T_max)))
    per_shell = 4 * -(-per_shell // 4) if quarters else per_shell
    edges = [0.0]
    bounds = [0.0] + [2.0**k for k in range(0, k_max + 1)]
    for a, b in zip(bounds[:-1], bounds[1:]):
        edges.extend(np.linspace(a, b, per_shell + 1)[1:].tolist())
    levels = [2.0**k for k in range(0, k_max + 1)]
    if quarters:
        levels = [2.0**k * (1 + i / 4) for k in range(0, k_max) for i in range(4)] + [levels[-1]]
    return Q.gl_on_edges(np.array(edges), q), levels


def _reach(f, T_max, lam):
    """Largest power of two <= T_max keeping f, the weights and their product finite."""
    T = min(T_max, f.horizon)
    if f.envelope is not None:
        w = sum(max(o, 0.0) for o in f.envelope.omega)
        if w > 0:
            T = min(T, 600.0 / w)
    # weights stay below 1e150 in total, so an underflowed f is negligible
    s = sum(abs(float(np.real(x))) for x in lam)
    if s > 0:
        T = min(T, 345.0 / s)
    return 2.0 ** max(math.floor(math.log2(T)), 3)


def _weighted_grid(f, lam, T_max, budget, quarters=False):
    n = f.dims
    T_max = _reach(f, T_max, lam)
    per_axis = max(int(budget ** (1.0 / n)), 64)
    k_max = int(round(math.log2(T_max))) + 1
    per_shell = max(per_axis // (8 * k_max), 1)
    (x, w), levels = _shell_grid(n, T_max, per_shell, quarters=quarters)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = grid_eval(f, [x] * n)
    return x, w, vals, levels


def absolute_partials(f, lam_re, T_max=1024.0, budget=1_000_000):
    """Partial integrals of ``|f| e^{-Re(lam).t}`` over the dyadic cubes ``[0, 2^k]^n``."""
    x, w, vals, levels = _weighted_grid(f, lam_re, T_max, budget)
    mag = np.max(np.abs(vals), axis=-1)[..., None]
    with np.errstate(over="ignore", invalid="ignore"):
        weights = [w * np.exp(-lam_re[j] * x) for j in range(f.dims)]
        parts = []
        for T in levels:
            vecs = [np.where(x <= T * (1 + 1e-12), weights[j], 0.0) for j in range(f.dims)]
            parts.append(float(contract(mag, vecs)[0]))
    return levels, np.array(parts)


def box_partials(f, lam, T_max=16.0, budget=4_000_000):
    """Signed partial integrals of ``f e^{-lam.t}`` over ``[0, T]^n``, T at quarter-shell steps."""
    x, w, vals, levels = _weighted_grid(f, lam, T_max, budget, quarters=True)
    with np.errstate(over="ignore", invalid="ignore"):
        weights = [w * np.exp(-lam[j] * x) for j in range(f.dims)]
        parts = []
        for T in levels:
            vecs = [np.where(x <= T * (1 + 1e-12), weights[j], 0.0) for j in range(f.dims)]
            parts.append(contract(vals, vecs))
    return levels, parts


def _absolutely_convergent(parts):
    if not np.all(np.isfinite(parts)):
        return False
    inc = np.diff(parts)
    total = parts[-1]
    if total == 0:
        return True
    if inc[-1] <= 1e-10 * total:
        return True
    ratios = []
    for a, b in zip(inc[-3:-1], inc[-2:]):
        ratios.append(0.0 if b == 0 else (math.inf if a == 0 else b / a))
    if not all(r <= 0.6 for r in ratios):
        return False
    # geometric tail beyond the last shell
    r = ratios[-1]
    return inc[-1] * r / (1.0 - r) <= 1e-2 * total


def _unbounded(levels, parts):
    norms = np.array([norm(v) if np.all(np.isfinite(v)) else math.inf for v in parts])
    if not np.all(np.isfinite(norms)):
        return True
    if norms.max() > 1e3 * max(norms[0], 1e-300) and norms.max() > 1e-200:
        return True
    # growth of the increments is judged on the dyadic sizes only
    parts = [v for T, v in zip(levels, parts) if math.log2(T).is_integer()]
    inc = np.array([norm(b - a) for a, b in zip(parts[:-1], parts[1:])])
    growing = all(b >= 0.9 * a and b > 0 for a, b in zip(inc[-4:-1], inc[-3:]))
    return growing and inc[-1] > 1e-3 * max(norms[-1], 1e-300)


def classify_point(f, p, cfg=QuadratureConfig(rel_tol=1e-6)):
    """Convergence verdict at ``p``.

    Checks, in order: absolute convergence of ``|f| e^{-Re lam.t}`` over
    dyadic cubes; unbounded growth of the signed box partials (outside);
    convergence of the iterated integral (in_Ω_only); boundedness of the
    box partials (in_Ω_b).  Anything else is undetermined.
    """
    p = as_point(p)
    _, abs_parts = absolute_partials(f, p.real)
    if _absolutely_convergent(abs_parts):
        return "in_Ω_abs"
    levels, parts = box_partials(f, p.array)
    if _unbounded(levels, parts):
        return "outside"
    try:
        res = laplace_nd(f, p, replace(cfg, mode="iterated"))
        if res.converged and np.all(np.isfinite(res.value)):
            return "in_Ω_only"
    except (ArithmeticError, ValueError):
        pass
    return "in_Ω_b"


def _axis_converges(f, axis, sigma, fixed):
    n = f.dims
    levels = [2.0**k for k in range(0, 9)]
    edges = [0.0] + levels
    parts = []
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = Q.axis_rule(b, 1) if a == 0 else Q.composite_gl(a, b, 8)
        pts = np.tile(np.asarray(fixed, dtype=float), (len(x), 1))
        pts = np.insert(pts, axis, x, axis=1) if n > 1 else x[:, None]
        with np.errstate(over="ignore", invalid="ignore"):
            mag = np.max(np.abs(f(pts)), axis=1) * np.exp(-sigma * x)
            total += float(np.dot(w, mag))
        if not math.isfinite(total):
            return False
        parts.append(total)
        # stop before f itself overflows on far shells
        if len(parts) >= 4 and _absolutely_convergent(np.array(parts)):
            return True
    return _absolutely_convergent(np.array(parts))


def estimate_abscissa(f, axis, probe_grid):
    """Smallest probe value at which the one-axis absolute integral converges.

    ``axis`` is 1-based.  The other coordinates are held at 0.5, 1 and 2
    (all combinations); the integral must converge for each.  Bisection over
    the sorted grid assumes convergence is monotone in the probe value.
    Returns ``-inf`` if every probe converges and ``+inf`` if none does.
    """
    grid = [float(x) for x in probe_grid]
    if len(grid) < 3 or any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise ConfigurationError("probe_grid must be strictly increasing with >= 3 points")
    j = int(axis) - 1
    if not 0 <= j < f.dims:
        raise ConfigurationError(f"axis must lie in 1..{f.dims}")
    others = np.array(np.meshgrid(*([[0.5, 1.0, 2.0]] * (f.dims - 1)), indexing="ij"))
    combos = others.reshape(f.dims - 1, -1).T if f.dims > 1 else np.zeros((1, 0))

    def ok(sigma):
        return all(_axis_converges(f, j, sigma, c) for c in combos)

    if ok(grid[0]):
        return -math.inf
    if not ok(grid[-1]):
        return math.inf
    lo, hi = 0, len(grid) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(grid[mid]):
            hi = mid
        else:
            lo = mid
    return grid[hi]


def convergence_report(f, points, probe_grid=None, cfg=QuadratureConfig(rel_tol=1e-6)):
    """Abscissa estimates on every axis plus a verdict per point."""
    grid = probe_grid if probe_grid is not None else np.arange(-4.0, 4.5, 0.5)
    report = ConvergenceReport()
    report.abs_abscissa = [estimate_abscissa(f, j + 1, grid) for j in range(f.dims)]
    for pt in points:
        p = as_point(pt)
        report.memberships.append((p, classify_point(f, p, cfg)))
    return report
