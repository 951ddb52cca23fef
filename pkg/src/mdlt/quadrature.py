"""One-dimensional quadrature building blocks.

Everything here produces ``(nodes, weights)`` pairs on an interval, or
integrates a vectorised callable.  Multi-dimensional rules are tensor
products of these and are assembled in :mod:`mdlt.transform`.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as L

from .errors import QuadratureError

GL_ORDER = 16
TS_STEP = 1.0 / 12.0
TS_REACH = 6.2  # sinh argument cutoff; nodes reach ~1e-270 from the endpoint


@lru_cache(maxsize=None)
def gauss_legendre(q=GL_ORDER):
    """Gauss-Legendre nodes and weights on [-1, 1] (cached)."""
    x, w = L.leggauss(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_gl(a, b, panels, q=GL_ORDER):
    """Composite Gauss-Legendre rule on ``[a, b]`` with equal panels."""
    x, w = gauss_legendre(q)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def gl_on_edges(edges, q=GL_ORDER):
    """Gauss-Legendre rule on each ``[edges[i], edges[i+1]]``, concatenated."""
    x, w = gauss_legendre(q)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * x[None, :]).ravel(), (half[:, None] * w[None, :]).ravel()


@lru_cache(maxsize=None)
def _tanh_sinh_reference(step, reach):
    k = np.arange(-int(math.ceil(reach / step)), int(math.ceil(reach / step)) + 1)
    s = k * step
    u = 0.5 * math.pi * np.sinh(s)
    with np.errstate(over="ignore", under="ignore"):
        # distance from the left end of [0, 1]; the mirrored value is the
        # distance from the right end, both accurate down to underflow
        left = 1.0 / (1.0 + np.exp(-2.0 * u))
        right = 1.0 / (1.0 + np.exp(2.0 * u))
        w = 0.5 * step * 0.5 * math.pi * np.cosh(s) / np.cosh(u) ** 2
    keep = (w > 0) & (left > 0) & (right > 0)
    out = left[keep], right[keep], w[keep]
    for arr in out:
        arr.setflags(write=False)
    return out


def tanh_sinh(a, b, step=TS_STEP, reach=TS_REACH):
    """Tanh-sinh rule on ``[a, b]``.

    Returns ``(nodes, mirrored, weights)`` where ``mirrored = a + b - nodes``
    is computed from the distance to ``b`` directly, so integrands with a
    singularity at either end can be evaluated without cancellation.
    """
    left, right, w = _tanh_sinh_reference(step, reach)
    length = b - a
    return a + length * left, a + length * right, length * w


def axis_rule(T, panels, rule="tanh_sinh", q=GL_ORDER):
    """Quadrature on ``[0, T]``: equal panels, the first one tanh-sinh if asked.

    The tanh-sinh option makes integrable endpoint singularities at the
    origin (``t**eta`` with ``eta > -1``) harmless.
    """
    if rule == "gauss_legendre":
        return composite_gl(0.0, T, panels, q)
    if rule != "tanh_sinh":
        raise ValueError(f"unknown rule {rule!r}")
    h = T / panels
    x0, _, w0 = tanh_sinh(0.0, h)
    if panels == 1:
        return x0, w0
    x1, w1 = composite_gl(h, T, panels - 1, q)
    return np.concatenate([x0, x1]), np.concatenate([w0, w1])


def graded_edges(T, panels, levels=40):
    """Panel edges on [0, T]: ``panels`` equal panels, the first split dyadically toward 0."""
    h = T / panels
    fine = h * 0.5 ** np.arange(levels, 0, -1)
    return np.concatenate([[0.0], fine, h * np.arange(1, panels + 1)])


@lru_cache(maxsize=None)
def _reference_cumulative(q):
    """Matrix mapping values at GL nodes to integrals from -1 up to each node."""
    x, _ = gauss_legendre(q)
    V = L.legvander(x, q - 1)
    Vinv = np.linalg.inv(V)
    C = np.empty((q, q))
    for j in range(q):
        coef = L.legint(Vinv[:, j], lbnd=-1)
        C[:, j] = L.legval(x, coef)
    C.setflags(write=False)
    return C


def cumulative_operator(edges, q=GL_ORDER):
    """Nodes, weights and the cumulative-integration matrix for a panel partition.

    ``C @ f(nodes)`` approximates ``int_0^{x_i} f`` at every node ``x_i``,
    spectrally accurate within each panel.
    """
    nodes, weights = gl_on_edges(edges, q)
    Cref = _reference_cumulative(q)
    half = 0.5 * np.diff(np.asarray(edges, dtype=float))
    n_pan = len(half)
    N = n_pan * q
    C = np.zeros((N, N))
    for p in range(n_pan):
        rows = slice(p * q, (p + 1) * q)
        C[rows, : p * q] = weights[None, : p * q]
        C[rows, p * q : (p + 1) * q] = half[p] * Cref
    return nodes, weights, C


def euler_accelerate(partials):
    """Repeated averaging of a partial-sum sequence (Euler transform).

    Returns the single value obtained by averaging neighbours until one
    entry remains.
    """
    row = np.asarray(partials, dtype=float)
    while row.size > 1:
        row = 0.5 * (row[1:] + row[:-1])
    return float(row[0])


@dataclass
class ImproperResult:
    value: float
    converged: bool
    error: float


def _segment(g, a, b, tol, floor, first, panels=4, cap=4096):
    """Adaptive integral of ``g`` on ``[a, b]``; returns (value, nodes, values, ok)."""

    def rule(p):
        if first:
            return axis_rule(b, p)
        return composite_gl(a, b, p)

    x, w = rule(panels)
    gx = g(x)
    prev = float(np.dot(w, gx))
    while panels < cap:
        panels *= 2
        x, w = rule(panels)
        gx = g(x)
        cur = float(np.dot(w, gx))
        if abs(cur - prev) <= max(tol * abs(cur), floor):
            return cur, x, gx, True
        prev = cur
    return prev, x, gx, False


def _sign_changes(values):
    s = np.sign(values)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _lobes(g, start, S0, step, tol, floor, max_lobes=3000, chunk=64):
    """Integrate lobe by lobe from ``start`` and Euler-accelerate the partial sums."""
    x_nodes, w_nodes = gauss_legendre(20)
    crossings = [start]
    partials = [S0]
    accelerated = []
    x = start
    g_x = float(g(np.array([start]))[0])
    quiet = 0
    pending = S0
    while len(partials) < max_lobes:
        xs = x + step * np.arange(1, chunk + 1)
        gv = g(xs)
        grid = np.concatenate([[x], xs])
        vals = np.concatenate([[g_x], gv])
        idx = np.flatnonzero(np.sign(vals[1:]) * np.sign(vals[:-1]) < 0)
        if idx.size == 0:
            # no crossing yet: keep the current lobe open and widen the step
            x, g_x = xs[-1], gv[-1]
            step *= 2.0
            quiet += 1
            if quiet >= 3:
                return None, crossings[-1], pending
            continue
        quiet = 0
        lo, hi = grid[idx], grid[idx + 1]
        flo, fhi = vals[idx], vals[idx + 1]
        root = lo - flo * (hi - lo) / (fhi - flo)
        froot = g(root)
        # one regula-falsi refinement inside the bracket
        left = np.sign(froot) == np.sign(flo)
        a2 = np.where(left, root, lo)
        b2 = np.where(left, hi, root)
        fa2 = np.where(left, froot, flo)
        fb2 = np.where(left, fhi, froot)
        denom = np.where(fb2 != fa2, fb2 - fa2, 1.0)
        root = np.where(fb2 != fa2, a2 - fa2 * (b2 - a2) / denom, root)
        edges = np.concatenate([[crossings[-1]], root])
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        pts = mid[:, None] + half[:, None] * x_nodes[None, :]
        lobe = half * (g(pts.ravel()).reshape(pts.shape) @ w_nodes)
        # integral up to the last crossing; the stretch beyond it is redone next chunk
        run = pending + np.cumsum(lobe)
        pending = float(run[-1])
        partials.extend(run.tolist())
        crossings.extend(root.tolist())
        x = crossings[-1]
        g_x = 0.0
        widths = np.diff(np.asarray(crossings[-(len(root) + 1) :]))
        if widths.size:
            step = max(float(np.min(widths)) / 8.0, 1e-12)
        if len(partials) > 60:
            # mean lobe size per block of 20; sustained growth means divergence
            sizes = np.abs(np.diff(partials))
            blocks = sizes[: sizes.size // 20 * 20].reshape(-1, 20).mean(axis=1)
            if blocks[-1] > 2.0 * blocks.min():
                return ImproperResult(math.nan, False, math.inf), x, pending
        # acceleration over a sliding window of the latest partial sums
        for k in range(len(partials) - len(root), len(partials)):
            if k >= 12:
                accelerated.append(euler_accelerate(partials[k - 11 : k + 1]))
        if len(accelerated) >= 3:
            last = accelerated[-3:]
            spread = max(last) - min(last)
            terms = np.abs(np.diff(partials[-40:])) if len(partials) > 40 else None
            decaying = terms is not None and np.mean(terms[-10:]) < 0.9 * np.mean(terms[:10])
            if decaying and spread <= max(tol * abs(last[-1]), floor):
                return ImproperResult(last[-1], True, spread), x, pending
    val = accelerated[-1] if accelerated else pending
    return ImproperResult(val, False, math.inf), x, pending


def improper_1d(g, tol=1e-8, start=1.0, max_doublings=60, floor=1e-15):
    """Integral of a real vectorised ``g`` over ``[0, inf)``.

    The range is split at ``start * 2**k``.  Segments are integrated
    adaptively; once a segment shows repeated sign changes the remainder is
    handled lobe by lobe (integration between successive zeros) with Euler
    acceleration of the partial sums.  Non-oscillating tails are accepted
    after three successive segment increments pass a geometric tail test.
    """
    total = 0.0
    prev_inc = None
    passes = 0
    a, b = 0.0, start
    ok_all = True
    for _ in range(max_doublings):
        inc, x, gx, ok = _segment(g, a, b, tol, floor * max(1.0, abs(total)), first=(a == 0.0))
        ok_all &= ok
        total += inc
        changes = _sign_changes(gx[np.argsort(x)])
        if changes >= 2:
            step = (b - a) / (8.0 * changes)
            res, x_end, pend = _lobes(g, b, total, step, tol, floor)
            if res is not None:
                return ImproperResult(res.value, res.converged and ok_all, res.error)
            # oscillation died out; resume doubling beyond the lobe region
            total = pend
            a, b = x_end, 2.0 * x_end
            prev_inc = None
            passes = 0
            continue
        bound = max(tol * abs(total), floor)
        if prev_inc is not None and prev_inc != 0:
            r = abs(inc) / abs(prev_inc)
            tail = abs(inc) * r / (1.0 - r) if r < 1 else math.inf
            passes = passes + 1 if (abs(inc) <= bound and tail <= bound) else 0
        elif inc == 0 and (prev_inc is None or prev_inc == 0):
            passes += 1
        else:
            passes = 0
        if passes >= 3:
            return ImproperResult(total, ok_all, abs(inc))
        prev_inc = inc
        a, b = b, 2.0 * b
    return ImproperResult(total, False, math.inf)


def check_panels(panels, cap):
    if panels > cap:
        raise QuadratureError(f"panel refinement exceeded the cap of {cap} panels per axis")


def exp_sinh(scale, step=1.0 / 8.0, lo=-6.5, hi=1.75):
    """Exp-sinh rule on ``[0, inf)``: ``t = scale * exp(pi/2 sinh s)``.

    Suited to integrands decaying like ``exp(-t / scale)`` with an integrable
    singularity at the origin.  The default ``hi`` stops at ``t ~ 60 scale``.
    """
    s = np.arange(math.ceil(lo / step), math.floor(hi / step) + 1) * step
    u = np.exp(0.5 * math.pi * np.sinh(s))
    t = scale * u
    w = step * scale * 0.5 * math.pi * np.cosh(s) * u
    return t, w
