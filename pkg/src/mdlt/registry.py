"""Named test functions and transforms used by the CLI and the test suites.

Entries are addressed by strings such as ``"ml_pair(0.5, 1, 0.5)"`` or
``"poly_exp(k1=1, k2=0, w1=0, w2=-1)"``, or by JSON objects
``{"name": ..., "params": {...}}``.  Each entry yields a time-domain
:class:`~mdlt.transform.VectorFunction` (with envelope), a closed-form
:class:`~mdlt.inversion.TransformFunction`, or both.
"""

import ast
import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as sc

from .errors import ConfigurationError, DomainError
from .inversion import AxisFactor, Decay, pole, product_factor, separable_transform
from .special import (
    VALIDATED_RADIUS,
    MLParams,
    WrightParams,
    _wright_saddle,
    gamma_kernel,
    mittag_leffler_array,
    wright_array,
)
from .transform import Envelope, VectorFunction


@dataclass(frozen=True)
class Entry:
    name: str
    params: tuple  # (name, default) pairs; default None means required
    build: Callable  # (params dict, dims) -> (VectorFunction | None, TransformFunction | None)
    doc: str
    fixed_dims: int = 0  # nonzero if the entry only exists in that dimension


_SPEC = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


def parse_spec(spec):
    """Split a registry reference into ``(name, positional args, keyword args)``."""
    if isinstance(spec, dict):
        if "name" not in spec:
            raise ConfigurationError("function reference needs a 'name'")
        params = spec.get("params", {})
        if isinstance(params, dict):
            return spec["name"], [], dict(params)
        if isinstance(params, list):
            return spec["name"], list(params), {}
        raise ConfigurationError("'params' must be an object or an array")
    if not isinstance(spec, str):
        raise ConfigurationError(f"cannot interpret function reference {spec!r}")
    m = _SPEC.match(spec)
    if not m:
        raise ConfigurationError(f"malformed function reference {spec!r}")
    name, body = m.group(1), m.group(2)
    args, kwargs = [], {}
    if body and body.strip():
        try:
            call = ast.parse(f"f({body})", mode="eval").body
            args = [ast.literal_eval(a) for a in call.args]
            kwargs = {k.arg: ast.literal_eval(k.value) for k in call.keywords}
        except (SyntaxError, ValueError) as exc:
            raise ConfigurationError(f"malformed parameters in {spec!r}") from exc
    return name, args, kwargs


def _bind(entry, args, kwargs):
    names = [p for p, _ in entry.params]
    if len(args) > len(names):
        raise ConfigurationError(f"{entry.name} takes at most {len(names)} parameters")
    out = dict(zip(names, args))
    for k, v in kwargs.items():
        if k not in names:
            raise ConfigurationError(f"{entry.name} has no parameter {k!r}")
        if k in out:
            raise ConfigurationError(f"{entry.name}: parameter {k!r} given twice")
        out[k] = v
    for p, default in entry.params:
        if p not in out:
            if default is None:
                raise ConfigurationError(f"{entry.name} needs parameter {p!r}")
            out[p] = default
    for k, v in out.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigurationError(f"{entry.name}: parameter {k!r} must be a real number, got {v!r}")
    return out


def _per_axis_cache(fn):
    """Evaluate a one-variable function once per distinct coordinate value."""

    def ev(x):
        u, inv = np.unique(x, return_inverse=True)
        return fn(u)[inv]

    return ev


def _separable_function(dims, axis_fn, envelope, name, horizon=math.inf):
    cached = _per_axis_cache(axis_fn)

    def ev(t):
        out = np.ones(t.shape[0], dtype=complex)
        for j in range(dims):
            out = out * cached(t[:, j])
        return out[:, None]

    return VectorFunction(dims, 1, ev, envelope, name, horizon)


def _line_sup(factor, c, power):
    """``2 * sup |lam|^power |factor(lam)|`` over the vertical line ``Re lam = c``."""
    y = np.concatenate([[0.0], np.logspace(-2, 4, 400)])
    lam = c + 1j * np.concatenate([y, -y])
    return 2.0 * float(np.max(np.abs(lam) ** power * np.abs(factor.value(lam))))


def _decay_for(factors, omegas, eps):
    M = 1.0
    for f, w, e in zip(factors, omegas, eps):
        M *= _line_sup(f, w + 1.0, 1.0 + e)
    return Decay(tuple(omegas), tuple(eps), M)


# ---------------------------------------------------------------- builders


def _zero(p, n):
    env = Envelope(0.0, (0.0,) * n, (0.0,) * n, (0.0,) * n)
    f = _separable_function(n, lambda x: np.zeros_like(x, dtype=complex), env, "zero")
    factors = [pole(0.0, 1.0, 0.0)] + [pole(0.0, 1.0)] * (n - 1)
    return f, separable_transform(factors, Decay((0.0,) * n, (0.0,) * n, 0.0), True, "zero")


def _one(p, n):
    f = _separable_function(n, lambda x: np.ones_like(x, dtype=complex), Envelope(0.5**n, (0.0,) * n, (0.0,) * n, (0.0,) * n), "one")
    factors = [pole(0.0, 1.0)] * n
    return f, separable_transform(factors, Decay((0.0,) * n, (0.0,) * n, 1.0), True, "one")


def _exp_decay(p, n):
    a = float(p["a"])
    env = Envelope(0.5**n, (-a,) * n, (0.0,) * n, (0.0,) * n)
    f = _separable_function(n, lambda x: np.exp(-a * x).astype(complex), env, "exp_decay")
    factors = [pole(-a, 1.0)] * n
    return f, separable_transform(factors, _decay_for(factors, [-a] * n, [0.0] * n), True, "exp_decay")


def _fresnel(p, n):
    if n != 2:
        raise ConfigurationError("fresnel2d is two-dimensional")

    def ev(t):
        return (np.sin(t[:, 0] ** 2) * np.sin(t[:, 1] ** 2))[:, None]

    return VectorFunction(2, 1, ev, Envelope(0.25, (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)), "fresnel2d"), None


def _fit_M(axis_fn, eta, zeta, omega, upper):
    """Smallest constant making the one-axis envelope dominate on a sample grid."""
    t = np.concatenate([np.logspace(-6, 0, 200), np.linspace(1.0, upper, 400)])
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        ratio = np.abs(axis_fn(t)) / ((t**eta + t**zeta) * np.exp(omega * t))
    ratio = ratio[np.isfinite(ratio)]
    return 1.5 * float(np.max(ratio))


def _ml_pair(p, n):
    alpha, beta, omega = float(p["alpha"]), float(p["beta"]), float(p["omega"])
    MLParams(alpha, beta)
    w_env = max(omega, 0.0) ** (1.0 / alpha)

    def axis_fn(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            lead = np.where(x > 0, x ** (beta - 1.0), 1.0 if beta == 1 else (0.0 if beta > 1 else np.inf))
        z = omega * x**alpha
        if np.any(np.abs(z) > VALIDATED_RADIUS):
            raise DomainError(
                f"ml_pair argument omega*t^alpha exceeds {VALIDATED_RADIUS}; "
                "reduce the truncation or raise Re(lambda)"
            )
        return lead * mittag_leffler_array(alpha, beta, z, rel_tol=1e-12)

    eta, zeta = beta - 1.0, 0.0
    upper = min(40.0, (VALIDATED_RADIUS / abs(omega)) ** (1.0 / alpha) if omega else 40.0)
    M = _fit_M(axis_fn, eta, zeta, w_env, upper)
    env = Envelope(M**n, (w_env,) * n, (eta,) * n, (zeta,) * n)
    horizon = (VALIDATED_RADIUS / abs(omega)) ** (1.0 / alpha) if omega else math.inf
    f = _separable_function(n, axis_fn, env, "ml_pair", horizon)

    def value(lam):
        lam = np.asarray(lam, dtype=complex)
        return lam ** (alpha - beta) / (lam**alpha - omega)

    if alpha == 1.0 and beta >= 1.0 and float(beta).is_integer():
        factor = pole(omega, 1.0) if beta == 1.0 else product_factor(pole(0.0, beta - 1.0), pole(omega, 1.0))
    else:
        factor = AxisFactor(value)
    factors = [factor] * n
    eps = max(beta - 1.0, 0.0)
    decay = _decay_for(factors, [w_env] * n, [eps] * n)
    return f, separable_transform(factors, decay, True, "ml_pair")


def _wright_density(gamma, s):
    def axis_fn(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        pos = x > 0
        xp = x[pos]
        with np.errstate(divide="ignore", over="ignore"):
            z = s * xp ** (-gamma)
        small = z <= VALIDATED_RADIUS
        phi = np.zeros(xp.shape)
        phi[small] = wright_array(gamma, z[small], rel_tol=1e-12).real
        phi[~small] = [_wright_saddle(gamma, float(v)) for v in z[~small]]
        with np.errstate(over="ignore", invalid="ignore"):
            dens = gamma * s * xp ** (-1.0 - gamma) * phi
        out[pos] = np.where(np.isfinite(dens), dens, 0.0)
        return out

    return axis_fn


def _wright_pair(p, n):
    gamma = float(p["gamma"])
    WrightParams(gamma)
    s = p["s"]
    s = [float(v) for v in (s if isinstance(s, (list, tuple)) else [s] * n)]
    if len(s) != n or any(v <= 0 for v in s):
        raise ConfigurationError("wright_pair needs positive s (scalar or one per axis)")
    fns = [_per_axis_cache(_wright_density(gamma, sj)) for sj in s]
    Ms = [_fit_M(_wright_density(gamma, sj), 0.0, 0.0, 0.0, 40.0) for sj in s]

    def ev(t):
        out = np.ones(t.shape[0], dtype=complex)
        for j in range(n):
            out = out * fns[j](t[:, j])
        return out[:, None]

    env = Envelope(float(np.prod(Ms)), (0.0,) * n, (0.0,) * n, (0.0,) * n)
    f = VectorFunction(n, 1, ev, env, "wright_pair")

    def factor(sj):
        def value(lam):
            return np.exp(-(np.asarray(lam, dtype=complex) ** gamma) * sj)

        return AxisFactor(value)

    factors = [factor(sj) for sj in s]
    # |exp(-lam^g s)| <= exp(-a |lam|^g) with a = s cos(g pi / 2); bound |lam|^2 times it
    M = 1.0
    for sj in s:
        a = sj * math.cos(gamma * math.pi / 2.0)
        r = (2.0 / (a * gamma)) ** (1.0 / gamma)
        M *= r**2 * math.exp(-a * r**gamma)
    return f, separable_transform(factors, Decay((0.0,) * n, (1.0,) * n, M), True, "wright_pair")


def _poly_exp(p, n):
    k = [int(p["k1"]), int(p["k2"])]
    w = [float(p["w1"]), float(p["w2"])]
    if any(x < 0 for x in k):
        raise ConfigurationError("poly_exp exponents must be nonnegative integers")

    def ev(t):
        return (t[:, 0] ** k[0] * t[:, 1] ** k[1] * np.exp(w[0] * t[:, 0] + w[1] * t[:, 1]))[:, None]

    env = Envelope(0.25, tuple(w), tuple(float(x) for x in k), tuple(float(x) for x in k))
    f = VectorFunction(2, 1, ev, env, "poly_exp")
    factors = [pole(w[j], k[j] + 1.0, math.factorial(k[j])) for j in range(2)]
    return f, separable_transform(factors, _decay_for(factors, w, [float(x) for x in k]), True, "poly_exp")


def _gkernel(p, n):
    zeta = float(p["zeta"])
    if zeta <= 0:
        raise DomainError("gkernel needs zeta > 0")
    env = Envelope((0.5 / math.gamma(zeta)) ** n, (0.0,) * n, (zeta - 1.0,) * n, (zeta - 1.0,) * n)
    f = _separable_function(n, lambda x: np.asarray(gamma_kernel(zeta, x), dtype=complex), env, "gkernel")
    factors = [pole(0.0, zeta)] * n
    decay = Decay((0.0,) * n, (zeta - 1.0,) * n, 1.0) if zeta >= 1 else None
    return f, separable_transform(factors, decay, True, "gkernel")


def _transform_only(factor_fn, eps, omega=0.0, sector=True, name=""):
    def build(p, n):
        factors = [factor_fn(p)] * n
        return None, separable_transform(factors, _decay_for(factors, [omega] * n, [eps] * n), sector, name)

    return build


def _box_antiderivative(p, n):
    a = [float(p["a1"]), float(p["a2"])]
    if any(x <= 0 for x in a):
        raise ConfigurationError("box_antiderivative needs positive box sides")

    def factor(aj):
        def value(lam):
            lam = np.asarray(lam, dtype=complex)
            return -np.expm1(-aj * lam) / lam**2

        return AxisFactor(value)

    factors = [factor(x) for x in a]
    return None, separable_transform(factors, Decay((0.0, 0.0), (1.0, 1.0), 4.0), False, "box_antiderivative")


REGISTRY = {
    e.name: e
    for e in [
        Entry("zero", (), _zero, "f = 0; F = 0"),
        Entry("one", (), _one, "f = 1; F = 1/(lam_1...lam_n)"),
        Entry("exp_decay", (("a", 1.0),), _exp_decay, "f = exp(-a(t_1+...+t_n)); F = prod 1/(lam_j+a)"),
        Entry("fresnel2d", (), _fresnel, "f = sin(t_1^2) sin(t_2^2); no closed-form transform", 2),
        Entry(
            "ml_pair",
            (("alpha", None), ("beta", None), ("omega", None)),
            _ml_pair,
            "f = prod t^(beta-1) E_{alpha,beta}(omega t^alpha); F = prod lam^(alpha-beta)/(lam^alpha-omega)",
        ),
        Entry(
            "wright_pair",
            (("gamma", None), ("s", 1.0)),
            _wright_pair,
            "f = prod gamma s t^(-1-gamma) Phi_gamma(s t^-gamma); F = prod exp(-lam^gamma s)",
        ),
        Entry(
            "poly_exp",
            (("k1", None), ("k2", None), ("w1", 0.0), ("w2", 0.0)),
            _poly_exp,
            "f = t_1^k1 t_2^k2 exp(w1 t_1 + w2 t_2); F = k1! k2! / ((lam_1-w1)^(k1+1) (lam_2-w2)^(k2+1))",
            2,
        ),
        Entry("gkernel", (("zeta", None),), _gkernel, "f = prod g_zeta(t_j); F = prod lam^-zeta"),
        Entry("sep_pole", (), _transform_only(lambda p: pole(0.0, 2.0), 1.0, name="sep_pole"), "F = prod 1/lam^2 (f = t_1...t_n)"),
        Entry(
            "sep_shifted_pole",
            (("a", 1.0),),
            lambda p, n: _transform_only(lambda q: pole(-float(q["a"]), 1.0), 0.0, -float(p["a"]), name="sep_shifted_pole")(p, n),
            "F = prod 1/(lam+a) (f = exp(-a sum t))",
        ),
        Entry("inv_prod", (), _transform_only(lambda p: pole(0.0, 1.0), 0.0, name="inv_prod"), "F = prod 1/lam (f = 1)"),
        Entry(
            "box_antiderivative",
            (("a1", 1.0), ("a2", 1.0)),
            _box_antiderivative,
            "F = prod (1-exp(-a_j lam))/lam^2, transform of prod min(t_j, a_j)",
            2,
        ),
    ]
}


def _lookup(spec, dims):
    name, args, kwargs = parse_spec(spec)
    if name not in REGISTRY:
        raise ConfigurationError(f"unknown registry entry {name!r}; known: {sorted(REGISTRY)}")
    entry = REGISTRY[name]
    if entry.fixed_dims and dims != entry.fixed_dims:
        raise ConfigurationError(f"{name} exists only in dimension {entry.fixed_dims}")
    if dims < 1:
        raise ConfigurationError("dims must be >= 1")
    return entry, _bind(entry, args, kwargs)


def get_function(spec, dims=2):
    """Time-domain function for a registry reference."""
    f, _ = get_pair(spec, dims)
    if f is None:
        entry, _ = _lookup(spec, dims)
        raise ConfigurationError(f"{entry.name} has no time-domain function")
    return f


def get_transform(spec, dims=2):
    """Closed-form transform for a registry reference."""
    _, F = get_pair(spec, dims)
    if F is None:
        entry, _ = _lookup(spec, dims)
        raise ConfigurationError(f"{entry.name} has no closed-form transform")
    return F


def _scale_of(spec):
    if isinstance(spec, dict) and "scale" in spec:
        try:
            return float(spec["scale"])
        except (TypeError, ValueError) as exc:
            raise ConfigurationError("'scale' must be a real number") from exc
    return 1.0


def _scaled_factor(factor, s):
    def value(lam):
        return s * factor.value(lam)

    log_derivative = None
    if factor.log_derivative is not None:
        log_s = complex(np.log(complex(s))) if s != 0 else complex(-np.inf)

        def log_derivative(k, lam):
            return log_s + factor.log_derivative(k, lam)

    return AxisFactor(value, log_derivative)


def _apply_scale(pair, s):
    f, F = pair
    if s == 1.0:
        return f, F
    if f is not None:
        env = f.envelope
        if env is not None:
            env = Envelope(abs(s) * env.M, env.omega, env.eta, env.zeta)
        f = f.scaled(lambda t: np.full(t.shape[0], s), env, f"{s:g}*{f.name}")
    if F is not None:
        decay = F.decay
        if decay is not None:
            decay = Decay(decay.omega, decay.eps, abs(s) * decay.M)
        factors = (_scaled_factor(F.factors[0], s),) + tuple(F.factors[1:])
        F = separable_transform(factors, decay, F.sector, f"{s:g}*{F.name}")
    return f, F


def get_pair(spec, dims=2):
    """``(function, transform)`` for a reference; JSON references may carry a real ``scale``."""
    entry, params = _lookup(spec, dims)
    return _apply_scale(entry.build(params, dims), _scale_of(spec))
