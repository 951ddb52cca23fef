"""Transform-domain solvers with matrix coefficients.

Three problem classes are assembled as resolvents in the transform domain
and inverted with the Bromwich contour method:

* a two-variable fractional Cauchy problem ``D^a1 D^a2 u = A u + f``;
* a degenerate Volterra equation ``B u = A (a *0 u) + C f`` in n variables;
* the complete second-order problem
  ``A u_xx + B u_xy + C u_yy + D u_x + E u_y + F u = f``.

Operators are finite matrices, so the multivalued inclusions of the general
theory reduce to equalities.  Before inverting, each solver samples the
resolvent on a log-spaced grid to check its polynomial decay and the
injectivity of the matrix pencil.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError, SingularSystemError
from .inversion import AccuracyWarning, ContourConfig, Decay, TransformFunction, bromwich_invert_many
from .operational import MultiIndex, faltung_convolve
from .registry import get_pair
from .transform import VectorFunction, as_point, norm

SMALLEST_SINGULAR = 1e-10
DECAY_SLACK = 10.0
FD_STEP = 0.05


# ---------------------------------------------------------------- operators and data


def as_matrix(x, m=None, name="matrix"):
    """Coerce a scalar or nested list to a finite complex ``m x m`` array."""
    a = np.asarray(x, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigurationError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ConfigurationError(f"{name} has non-finite entries")
    if m is not None and a.shape[0] != m:
        raise ConfigurationError(f"{name} is {a.shape[0]}x{a.shape[0]}, expected {m}x{m}")
    return a


def _infer_size(mats):
    for x in mats:
        if x is not None:
            return as_matrix(x).shape[0]
    return 1


def _matrices(values, names, m, default):
    out = []
    for x, nm in zip(values, names):
        out.append(default(m) if x is None else as_matrix(x, m, nm))
    return out


def _refs(spec, m):
    if isinstance(spec, (list, tuple)):
        if len(spec) != m:
            raise ConfigurationError(f"expected {m} component references, got {len(spec)}")
        return list(spec)
    if m != 1:
        raise ConfigurationError(f"vector data with {m} components needs a list of {m} references")
    return [spec]


@dataclass(frozen=True)
class Data1D:
    """One-variable vector data with a closed-form transform.

    ``transform`` maps complex ``(N,)`` to ``(N, m)``; ``function`` (optional)
    maps real ``(N,)`` to ``(N, m)``.
    """

    codim: int
    transform: Callable
    function: Optional[Callable] = None
    omega: float = 0.0
    name: str = ""

    @classmethod
    def zero(cls, m):
        return cls(m, lambda lam: np.zeros((len(lam), m), complex), lambda t: np.zeros((len(t), m), complex), 0.0, "0")

    @classmethod
    def from_registry(cls, spec, m=1):
        if spec is None or spec == 0:
            return cls.zero(m)
        pairs = [get_pair(r, dims=1) for r in _refs(spec, m)]
        for f, F in pairs:
            if F is None:
                raise ConfigurationError("boundary data need a closed-form transform")

        def tr(lam):
            lam = np.asarray(lam, dtype=complex).reshape(-1, 1)
            return np.concatenate([F(lam) for _, F in pairs], axis=1)

        fn = None
        if all(f is not None for f, _ in pairs):

            def fn(t):
                t = np.asarray(t, dtype=float).reshape(-1, 1)
                return np.concatenate([f(t) for f, _ in pairs], axis=1)

        omega = max(F.decay.omega[0] if F.decay else 0.0 for _, F in pairs)
        return cls(m, tr, fn, omega, ",".join(F.name for _, F in pairs))


def _as_data(x, m):
    if isinstance(x, Data1D):
        if x.codim != m:
            raise ConfigurationError(f"data {x.name!r} has {x.codim} components, expected {m}")
        return x
    return Data1D.from_registry(x, m)


@dataclass(frozen=True)
class Source:
    """Vector source ``f`` in n variables: transform plus optional time function."""

    transform: TransformFunction
    function: Optional[VectorFunction] = None

    @property
    def codim(self):
        return self.transform.codim

    @property
    def dims(self):
        return self.transform.dims

    @property
    def omega(self):
        if self.transform.decay is None:
            return (0.0,) * self.dims
        return self.transform.decay.omega

    @classmethod
    def zero(cls, m, dims=2):
        return cls.from_registry(["zero"] * m if m > 1 else "zero", m, dims)

    @classmethod
    def from_registry(cls, spec, m=1, dims=2):
        if spec is None or spec == 0:
            return cls.zero(m, dims)
        pairs = [get_pair(r, dims) for r in _refs(spec, m)]
        for f, F in pairs:
            if F is None:
                raise ConfigurationError("sources need a closed-form transform")
        Fs = [F for _, F in pairs]

        def tr(lam):
            return np.concatenate([F(lam) for F in Fs], axis=1)

        decay = None
        if all(F.decay is not None for F in Fs):
            decay = Decay(
                tuple(np.max([F.decay.omega for F in Fs], axis=0)),
                tuple(np.min([F.decay.eps for F in Fs], axis=0)),
                math.sqrt(m) * max(F.decay.M for F in Fs),
            )
        name = ",".join(F.name for F in Fs)
        F = TransformFunction(dims, m, tr, decay, sector=all(F.sector for F in Fs), name=name)
        fn = None
        if all(f is not None for f, _ in pairs):
            fs = [f for f, _ in pairs]
            fn = VectorFunction(dims, m, lambda t: np.concatenate([f(t) for f in fs], axis=1), None, name)
        return cls(F, fn)


def _as_source(x, m, dims=2):
    if isinstance(x, Source):
        if x.codim != m or x.dims != dims:
            raise ConfigurationError(f"source must map R^{dims} to C^{m}")
        return x
    return Source.from_registry(x, m, dims)


# ---------------------------------------------------------------- checks


@dataclass
class GridCheck:
    """Outcome of the sampled decay and injectivity checks."""

    decay_ok: bool
    growth: float  # sup over the grid / sup over the inner part
    M: float  # fitted majorant constant
    min_singular: float


def check_grid(offsets, per_axis=None):
    """Log-spaced sample ``c_j + i y`` with ``|y|`` in ``[0.1, 1000]`` on each axis."""
    n = len(offsets)
    k = per_axis or (16 if n <= 2 else 6)
    y = np.logspace(-1.0, 3.0, k // 2)
    ys = np.concatenate([-y[::-1], y])
    mesh = np.meshgrid(*[c + 1j * ys for c in offsets], indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def check_resolvent(functions, pencil, lam, eps, matrix_name="pencil"):
    """Sample decay of each ``functions[i](lam)`` and the pencil's smallest singular value.

    The weighted norm ``q = ||F|| prod |lam_j|^{1+eps_j}`` must stay within
    ``DECAY_SLACK`` times its maximum over the inner part ``|Im lam_j| <= 10``.
    """
    P = pencil(lam)
    sv = np.linalg.svd(P, compute_uv=False).min(axis=1)
    i = int(np.argmin(sv))
    if not sv[i] > SMALLEST_SINGULAR:
        raise SingularSystemError(
            f"{matrix_name} is not injective at lambda={tuple(lam[i])}",
            point=tuple(lam[i]),
            condition=math.inf if sv[i] == 0 else float(np.linalg.cond(P[i])),
        )
    weight = np.prod(np.abs(lam) ** (1.0 + np.asarray(eps)), axis=1)
    inner = np.all(np.abs(lam.imag) <= 10.0, axis=1)
    growth, M = 0.0, 0.0
    for fn in functions:
        q = np.linalg.norm(fn(lam), axis=1) * weight
        if not np.all(np.isfinite(q)):
            raise SingularSystemError(f"{matrix_name} produced non-finite resolvent values")
        q_in = float(np.max(q[inner]))
        q_all = float(np.max(q))
        M = max(M, q_all)
        if q_all > 0:
            growth = max(growth, q_all / max(q_in, 1e-300))
    ok = growth <= DECAY_SLACK
    if not ok:
        warnings.warn(
            f"sampled resolvent grows by a factor {growth:.3g} against the decay majorant; "
            "continuing as a best-effort run",
            AccuracyWarning,
            stacklevel=3,
        )
    return GridCheck(ok, growth, M, float(sv[i]))


def _solve_batched(P, rhs):
    """``P^{-1} rhs`` for stacks ``(N, m, m)`` and ``(N, m)``."""
    if P.shape[1] == 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            return rhs / P[:, 0, :]
    if P.shape[1] == 2:
        # batched LAPACK calls dominate on millions of tiny systems
        a, b, c, d = P[:, 0, 0], P[:, 0, 1], P[:, 1, 0], P[:, 1, 1]
        det = a * d - b * c
        scale = np.maximum(np.abs(P).reshape(len(P), -1).max(axis=1), 1e-300)
        if np.any(np.abs(det) <= 1e-14 * scale**2):
            raise SingularSystemError("singular resolvent matrix on the contour")
        return np.stack([d * rhs[:, 0] - b * rhs[:, 1], a * rhs[:, 1] - c * rhs[:, 0]], axis=1) / det[:, None]
    try:
        return np.linalg.solve(P, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("singular resolvent matrix on the contour") from exc


# ---------------------------------------------------------------- results


@dataclass
class SolveResult:
    """Solution values on a grid with diagnostics."""

    t: np.ndarray
    values: np.ndarray  # (N, m)
    error_estimates: np.ndarray  # (N,)
    check: GridCheck
    residuals: Optional[np.ndarray] = None  # per checked point
    residual_points: Optional[np.ndarray] = None
    transform: Optional[TransformFunction] = None

    @property
    def decay_ok(self):
        return self.check.decay_ok

    @property
    def max_residual(self):
        if self.residuals is None or len(self.residuals) == 0:
            return math.nan
        return float(np.max(self.residuals))


def _grid_points(t_grid, n):
    t = np.atleast_2d(np.asarray(t_grid, dtype=float))
    if t.shape[1] != n or np.any(t <= 0) or not np.all(np.isfinite(t)):
        raise ConfigurationError(f"t_grid must be positive points in R^{n}")
    return t


def _invert(U, t, cfg):
    res = bromwich_invert_many(U, t, cfg)
    return np.array([r.value for r in res]), np.array([r.error_estimate for r in res])


def _with_decay(eval_fn, dims, m, omega, eps, check, name, sector=False):
    M = 2.0 * max(check.M, 1e-300)
    return TransformFunction(dims, m, eval_fn, Decay(omega, eps, M), sector=sector, name=name)


def _positive_eps(eps, n):
    eps = tuple(float(e) for e in np.broadcast_to(np.asarray(eps, dtype=float), (n,)))
    if any(not e > 0 for e in eps):
        raise ConfigurationError("decay exponents eps must be positive")
    return eps


def _abscissas(omega, n):
    omega = tuple(float(w) for w in np.broadcast_to(np.asarray(omega, dtype=float), (n,)))
    if any(w < 0 for w in omega):
        raise ConfigurationError("abscissas omega must be nonnegative")
    return omega


# ---------------------------------------------------------------- second-order problem


@dataclass(frozen=True)
class SecondOrderProblem:
    """``A u_xx + B u_xy + C u_yy + D u_x + E u_y + F u = f`` on the quarter plane.

    Initial data: ``f1 = u(x,0)``, ``f2 = u_x(x,0)``, ``f3 = u_y(x,0)``,
    ``g1 = u(0,y)``, ``g2 = u_x(0,y)``.  Matrices left as ``None`` are zero.
    Data and source accept registry references or :class:`Data1D` /
    :class:`Source` objects.
    """

    A: object = None
    B: object = None
    C: object = None
    D: object = None
    E: object = None
    F: object = None
    f: object = None
    f1: object = None
    f2: object = None
    f3: object = None
    g1: object = None
    g2: object = None
    omega: tuple = (0.0, 0.0)
    eps: tuple = (0.05, 0.05)
    mats: tuple = field(init=False, repr=False)

    def __post_init__(self):
        m = _infer_size([self.A, self.B, self.C, self.D, self.E, self.F])
        mats = _matrices(
            [self.A, self.B, self.C, self.D, self.E, self.F], "ABCDEF", m, lambda k: np.zeros((k, k), complex)
        )
        if all(not np.any(x) for x in mats):
            raise ConfigurationError("at least one coefficient matrix must be nonzero")
        object.__setattr__(self, "mats", tuple(mats))
        object.__setattr__(self, "f", _as_source(self.f, m, 2))
        for nm in ("f1", "f2", "f3", "g1", "g2"):
            object.__setattr__(self, nm, _as_data(getattr(self, nm), m))
        object.__setattr__(self, "eps", _positive_eps(self.eps, 2))
        data_w = max(getattr(self, nm).omega for nm in ("f1", "f2", "f3", "g1", "g2"))
        omega = _abscissas(self.omega, 2)
        omega = tuple(max(w, s, data_w, 0.0) for w, s in zip(omega, self.f.omega))
        object.__setattr__(self, "omega", omega)

    @property
    def m(self):
        return self.mats[0].shape[0]

    def pencil(self, lam):
        A, B, C, D, E, F = self.mats
        l1 = lam[:, 0][:, None, None]
        l2 = lam[:, 1][:, None, None]
        return l1**2 * A + l1 * l2 * B + l2**2 * C + l1 * D + l2 * E + F

    def _data(self, lam):
        l1, l2 = lam[:, 0], lam[:, 1]
        return {
            "f1": self.f1.transform(l1),
            "f2": self.f2.transform(l1),
            "f3": self.f3.transform(l1),
            "g1": self.g1.transform(l2),
            "g2": self.g2.transform(l2),
        }

    def rhs(self, lam):
        A, B, C, D, E, _ = self.mats
        d = self._data(lam)
        l1, l2 = lam[:, 0][:, None], lam[:, 1][:, None]
        mv = lambda M, v: v @ M.T
        return (
            self.f.transform(lam)
            + mv(A, l1 * d["g1"] + d["g2"])
            + mv(B, l2 * d["g1"] + d["f2"])
            + mv(C, l2 * d["f1"] + d["f3"])
            + mv(D, d["g1"])
            + mv(E, d["f1"])
        )

    def resolvent(self, lam):
        """``G(lam)`` for complex points ``(N, 2)``; shape ``(N, m)``."""
        lam = np.atleast_2d(np.asarray(lam, dtype=complex))
        return _solve_batched(self.pencil(lam), self.rhs(lam))

    def derivative_transforms(self, lam):
        """Transforms of ``u_xx, u_xy, u_yy, u_x, u_y`` given the initial data."""
        G = self.resolvent(lam)
        d = self._data(lam)
        l1, l2 = lam[:, 0][:, None], lam[:, 1][:, None]
        return {
            "xx": l1**2 * G - l1 * d["g1"] - d["g2"],
            "xy": l1 * l2 * G - l2 * d["g1"] - d["f2"],
            "yy": l2**2 * G - l2 * d["f1"] - d["f3"],
            "x": l1 * G - d["g1"],
            "y": l2 * G - d["f1"],
        }


def build_resolvent_second_order(prob, p):
    """``G(lam1, lam2)`` at one point; raises SingularSystemError on a singular pencil."""
    lam = np.array([as_point(p).lam], dtype=complex)
    if lam.shape[1] != 2:
        raise ConfigurationError("the second-order resolvent takes a point in C^2")
    P = prob.pencil(lam)
    cond = float(np.linalg.cond(P[0]))
    if not cond < 1.0 / SMALLEST_SINGULAR:
        raise SingularSystemError(f"pencil is singular at lambda={tuple(lam[0])}", tuple(lam[0]), cond)
    return prob.resolvent(lam)[0]


def _second_order_checks(prob):
    lam = check_grid([w + 1.0 for w in prob.omega])
    coeffs = dict(zip("ABCDE", prob.mats[:5]))
    uses = {"xx": "A", "xy": "B", "yy": "C", "x": "D", "y": "E"}
    fns = [prob.resolvent]
    for key, mat in uses.items():
        if np.any(coeffs[mat]):
            fns.append(lambda z, key=key: prob.derivative_transforms(z)[key])
    return check_resolvent(fns, prob.pencil, lam, prob.eps)


def second_order_transform(prob, check=None):
    """The resolvent ``G`` as a :class:`TransformFunction` with a fitted majorant."""
    check = check or _second_order_checks(prob)
    return _with_decay(prob.resolvent, 2, prob.m, prob.omega, prob.eps, check, "G")


_STENCIL = np.array([(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=float)


def _stencil(t, h):
    """Nine-point stencil around each grid point; ``h`` shrinks near the axes."""
    hs = np.minimum(h, 0.5 * t.min(axis=1))
    return (t[:, None, :] + hs[:, None, None] * _STENCIL[None]).reshape(-1, 2), hs


def _fd_residual(prob, vals, t, hs):
    """Norm of the PDE residual by central differences; ``vals`` is ``(N, 3, 3, m)``."""
    A, B, C, D, E, F = prob.mats
    hh = hs[:, None]
    u = vals[:, 1, 1]
    uxx = (vals[:, 2, 1] - 2 * u + vals[:, 0, 1]) / hh**2
    uyy = (vals[:, 1, 2] - 2 * u + vals[:, 1, 0]) / hh**2
    uxy = (vals[:, 2, 2] - vals[:, 2, 0] - vals[:, 0, 2] + vals[:, 0, 0]) / (4 * hh**2)
    ux = (vals[:, 2, 1] - vals[:, 0, 1]) / (2 * hh)
    uy = (vals[:, 1, 2] - vals[:, 1, 0]) / (2 * hh)
    res = uxx @ A.T + uxy @ B.T + uyy @ C.T + ux @ D.T + uy @ E.T + u @ F.T - prob.f.function(t)
    return np.linalg.norm(res, axis=1)


def solve_second_order(prob, t_grid, inv_cfg=ContourConfig(), residual_step=FD_STEP):
    """Invert ``G`` on ``t_grid`` and report the finite-difference PDE residual.

    The residual needs the source as a time function; it is ``None`` otherwise.
    """
    t = _grid_points(t_grid, 2)
    check = _second_order_checks(prob)
    G = second_order_transform(prob, check)
    if prob.f.function is None:
        vals, errs = _invert(G, t, inv_cfg)
        return SolveResult(t, vals, errs, check, transform=G)
    pts, hs = _stencil(t, float(residual_step))
    vals, errs = _invert(G, pts, inv_cfg)
    vals = vals.reshape(len(t), 3, 3, -1)
    residuals = _fd_residual(prob, vals, t, hs)
    centre = 4  # index of the (0, 0) offset
    errs = errs.reshape(len(t), 9)[:, centre]
    return SolveResult(t, vals[:, 1, 1], errs, check, residuals, t, G)


# ---------------------------------------------------------------- Volterra problem


@dataclass(frozen=True)
class VolterraProblem:
    """``B u(t) = A int_[0,t] a(t - s) u(s) ds + C f(t)`` in n variables.

    ``a`` is a scalar kernel and ``f`` an m-vector source, both given as
    registry references or :class:`Source` objects.  ``omega`` and ``eps``
    are the abscissas and decay exponents of the mild-solution estimates.
    """

    A: object = None
    B: object = None
    C: object = None
    a: object = "one"
    f: object = None
    omega: tuple = (0.0, 0.0)
    eps: tuple = (0.05, 0.05)
    dims: int = 2
    mats: tuple = field(init=False, repr=False)

    def __post_init__(self):
        m = _infer_size([self.A, self.B, self.C])
        eye = lambda k: np.eye(k, dtype=complex)
        A = np.zeros((m, m), complex) if self.A is None else as_matrix(self.A, m, "A")
        B, C = _matrices([self.B, self.C], "BC", m, eye)
        object.__setattr__(self, "mats", (A, B, C))
        n = int(self.dims)
        object.__setattr__(self, "a", _as_source(self.a, 1, n))
        object.__setattr__(self, "f", _as_source(self.f, m, n))
        object.__setattr__(self, "eps", _positive_eps(self.eps, n))
        omega = _abscissas(self.omega, n)
        omega = tuple(max(w, x, y) for w, x, y in zip(omega, self.a.omega, self.f.omega))
        object.__setattr__(self, "omega", omega)

    @property
    def m(self):
        return self.mats[0].shape[0]

    def pencil(self, lam):
        A, B, _ = self.mats
        La = self.a.transform(lam)[:, 0][:, None, None]
        return B[None] - La * A[None]

    def resolvent(self, lam):
        """``(B - La A)^{-1} C Lf`` at complex points ``(N, n)``."""
        lam = np.atleast_2d(np.asarray(lam, dtype=complex))
        C = self.mats[2]
        return _solve_batched(self.pencil(lam), self.f.transform(lam) @ C.T)


def _volterra_checks(prob):
    lam = check_grid([w + 1.0 for w in prob.omega])
    B = prob.mats[1]
    fns = [prob.resolvent, lambda z: prob.resolvent(z) @ B.T]
    return check_resolvent(fns, prob.pencil, lam, prob.eps, "B - (La) A")


def _subsample(N, k):
    if k <= 0:
        return np.array([], dtype=int)
    return np.unique(np.round(np.linspace(0, N - 1, min(k, N))).astype(int))


def mild_residual(prob, U, t, inv_cfg=ContourConfig(), nodes=12):
    """``||B u - A (a *0 u) - C f||`` at each point of ``t``.

    ``u`` is re-evaluated by Bromwich inversion at the convolution nodes,
    which use a fixed Gauss-Legendre rule and so stay away from ``s_j = 0``.
    """
    if prob.a.function is None or prob.f.function is None:
        raise ConfigurationError("the mild residual needs time functions for a and f")
    A, B, C = prob.mats
    n, m = prob.dims, prob.m
    u_fn = VectorFunction(n, m, lambda s: _invert(U, s, inv_cfg)[0])
    out = []
    for tp in t:
        u_t = _invert(U, tp[None, :], inv_cfg)[0][0]
        r = B @ u_t - C @ prob.f.function(tp[None, :])[0]
        if np.any(A):
            r = r - A @ faltung_convolve(prob.a.function, u_fn, tp, rule="gauss_legendre", nodes=nodes)
        out.append(norm(r))
    return np.array(out)


def volterra_transform(prob, check=None):
    """``(B - La A)^{-1} C Lf`` as a :class:`TransformFunction` with a fitted majorant."""
    check = check or _volterra_checks(prob)
    return _with_decay(prob.resolvent, prob.dims, prob.m, prob.omega, prob.eps, check, "U")


def solve_volterra(prob, t_grid, inv_cfg=ContourConfig(), residual_points=1):
    """Mild solution on ``t_grid`` plus its residual on ``residual_points`` grid points."""
    t = _grid_points(t_grid, prob.dims)
    check = _volterra_checks(prob)
    U = volterra_transform(prob, check)
    vals, errs = _invert(U, t, inv_cfg)
    residuals, where = None, None
    if residual_points and prob.a.function is not None and prob.f.function is not None:
        where = t[_subsample(len(t), residual_points)]
        residuals = mild_residual(prob, U, where, inv_cfg)
    return SolveResult(t, vals, errs, check, residuals, where, U)


# ---------------------------------------------------------------- fractional problem

KINDS = ("riemann_liouville", "caputo")


@dataclass(frozen=True)
class FractionalProblem2D:
    """``D^a1_x1 D^a2_x2 u = A u + f`` with Riemann-Liouville or Caputo derivatives.

    ``f_data`` holds ``ceil(alpha2)`` traces in ``x1`` and ``h_data``
    ``ceil(alpha1)`` traces in ``x2``; missing entries are zero.
    """

    alpha1: float
    alpha2: float
    kind: str = "riemann_liouville"
    A: object = None
    f: object = None
    f_data: tuple = ()
    h_data: tuple = ()
    omega: tuple = (0.0, 0.0)
    eps: tuple = (0.05, 0.05)
    mat: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        for a in (self.alpha1, self.alpha2):
            if not 0.0 <= float(a) < 2.0:
                raise ConfigurationError("fractional orders must lie in [0, 2)")
        if self.kind not in KINDS:
            raise ConfigurationError(f"kind must be one of {KINDS}")
        m = _infer_size([self.A])
        object.__setattr__(self, "mat", np.zeros((m, m), complex) if self.A is None else as_matrix(self.A, m, "A"))
        object.__setattr__(self, "f", _as_source(self.f, m, 2))
        m1, m2 = self.orders
        for nm, count in (("f_data", m2), ("h_data", m1)):
            items = list(getattr(self, nm) or ())
            if len(items) > count:
                raise ConfigurationError(f"{nm} takes at most {count} entries for these orders")
            items += [None] * (count - len(items))
            object.__setattr__(self, nm, tuple(_as_data(x, m) for x in items))
        object.__setattr__(self, "eps", _positive_eps(self.eps, 2))
        omega = _abscissas(self.omega, 2)
        dw = max([d.omega for d in self.f_data + self.h_data] + [0.0])
        object.__setattr__(self, "omega", tuple(max(w, s, dw) for w, s in zip(omega, self.f.omega)))

    @property
    def m(self):
        return self.mat.shape[0]

    @property
    def orders(self):
        return math.ceil(float(self.alpha1)), math.ceil(float(self.alpha2))

    def exponents(self):
        """``([(e1, e2) for f_k], [(e1, e2) for h_k])`` multiplying the data transforms."""
        a1, a2 = float(self.alpha1), float(self.alpha2)
        m1, m2 = self.orders
        if self.kind == "riemann_liouville":
            fe = [(a1, m2 - k - 1) for k in range(m2)]
            he = [(m1 - 1 - k, a2) for k in range(m1)]
        else:
            fe = [(a1, a2 - k - 1) for k in range(m2)]
            he = [(a1 - 1 - k, a2) for k in range(m1)]
        return fe, he

    def symbol(self, lam):
        return lam[:, 0] ** float(self.alpha1) * lam[:, 1] ** float(self.alpha2)

    def pencil(self, lam):
        z = self.symbol(lam)[:, None, None]
        return z * np.eye(self.m)[None] - self.mat[None]

    def rhs(self, lam):
        l1, l2 = lam[:, 0], lam[:, 1]
        fe, he = self.exponents()
        out = self.f.transform(lam).copy()
        for (e1, e2), d in zip(fe, self.f_data):
            out += (l1**e1 * l2**e2)[:, None] * d.transform(l1)
        for (e1, e2), d in zip(he, self.h_data):
            out += (l1**e1 * l2**e2)[:, None] * d.transform(l2)
        return out

    def resolvent(self, lam):
        lam = np.atleast_2d(np.asarray(lam, dtype=complex))
        on_cut = (lam.imag == 0) & (lam.real < 0)
        if np.any(on_cut):
            warnings.warn("contour node on the branch cut of lam^alpha", AccuracyWarning, stacklevel=2)
        return _solve_batched(self.pencil(lam), self.rhs(lam))


def _fractional_checks(prob):
    lam = check_grid([w + 1.0 for w in prob.omega])
    return check_resolvent([prob.resolvent], prob.pencil, lam, prob.eps, "lam1^a1 lam2^a2 - A")


def fractional_transform(prob, check=None):
    """Transform of the fractional solution with a fitted majorant."""
    check = check or _fractional_checks(prob)
    return _with_decay(prob.resolvent, 2, prob.m, prob.omega, prob.eps, check, "Lu")


def solve_fractional_2d(prob, t_grid, inv_cfg=ContourConfig()):
    """Invert the fractional resolvent on ``t_grid``."""
    t = _grid_points(t_grid, 2)
    check = _fractional_checks(prob)
    U = fractional_transform(prob, check)
    vals, errs = _invert(U, t, inv_cfg)
    return SolveResult(t, vals, errs, check, transform=U)


# ---------------------------------------------------------------- initial-condition schedule


@dataclass(frozen=True)
class ScheduleEntry:
    """Trace ``u^(derivative)`` with time variable ``zeroed`` (1-based) set to 0."""

    derivative: tuple
    zeroed: int

    def text(self):
        n = len(self.derivative)
        args = ["0" if j + 1 == self.zeroed else f"t{j + 1}" for j in range(n)]
        return f"u^({','.join(map(str, self.derivative))})({','.join(args)})"

    def __str__(self):
        return self.text()


@dataclass(frozen=True)
class InitialConditionSchedule:
    entries: tuple

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def lines(self):
        return [e.text() for e in self.entries]


def default_axis_order(n):
    return tuple(range(n, 0, -1))


def initial_condition_schedule(alpha, axis_order=None):
    """Initial traces needed to eliminate ``D^alpha`` one axis at a time.

    ``axis_order[i]`` is the processing rank (1 = first) of axis ``i + 1``;
    the default ``(n, ..., 1)`` processes the last axis first.  When axis
    ``k`` is processed it contributes ``u^(...)`` at ``t_k = 0`` with the
    ``k``-th index running over ``0..alpha_k - 1``, earlier axes reset to 0
    and later axes still at their ``alpha`` value.
    """
    a = list(alpha.v if isinstance(alpha, MultiIndex) else MultiIndex(tuple(alpha)).v)
    n = len(a)
    if sum(a) == 0:
        raise DomainError("the multi-index must have a positive entry")
    order = default_axis_order(n) if axis_order is None else tuple(int(x) for x in axis_order)
    if sorted(order) != list(range(1, n + 1)):
        raise ConfigurationError(f"axis_order must be a permutation of 1..{n}")
    sequence = sorted(range(n), key=lambda i: order[i])
    current = list(a)
    entries = []
    for k in sequence:
        for j in range(a[k]):
            idx = list(current)
            idx[k] = j
            entries.append(ScheduleEntry(tuple(idx), k + 1))
        current[k] = 0
    return InitialConditionSchedule(tuple(entries))
