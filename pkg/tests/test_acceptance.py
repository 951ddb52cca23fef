"""Acceptance criteria; each test records one PASS/FAIL line before asserting."""

import math
import time

import numpy as np

from mdlt import (
    PostWidderConfig,
    QuadratureConfig,
    SecondOrderProblem,
    VolterraProblem,
    antiderivative_G,
    bromwich_invert,
    bromwich_invert_many,
    check_LG_relation,
    get_function,
    get_transform,
    initial_condition_schedule,
    laplace_nd,
    post_widder_invert,
    solve_second_order,
    solve_volterra,
    tauberian_final,
    tauberian_initial,
)
from mdlt.inversion import transform_of_antiderivative
from mdlt.operational import convolution_theorem_check

from conftest import ACCEPTANCE_LINES, UPSET_SUITE, cached_verdict, upset_pairs


def record(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_fresnel():
    f = get_function("fresnel2d")
    start = time.perf_counter()
    value = laplace_nd(f, (0.0, 0.0), QuadratureConfig(rel_tol=1e-6, mode="iterated")).value[0].real
    elapsed = time.perf_counter() - start
    inside = cached_verdict("fresnel2d", (0.5, 0.5))
    boundary = cached_verdict("fresnel2d", (0.0, 0.0))
    ok = abs(value - 0.19635) <= 2e-3 and elapsed < 30 and inside == "in_Ω_abs" and boundary == "in_Ω_only"
    # the iterated integral is (sqrt(pi/8))^2 = pi/8 = 0.392699; the target 0.19635 is half of that
    record(1, ok, f"value {value:.6f} vs target 0.19635, pi/8 = {math.pi / 8:.6f}; {elapsed:.1f} s; "
                  f"(0.5,0.5) {inside}, (0,0) {boundary}")


def test_criterion_02_mittag_leffler_pairs():
    cfg = QuadratureConfig(rel_tol=1e-9)
    start = time.perf_counter()
    worst = 0.0
    for a, b, w in [(1, 1, 1), (0.5, 1, 0.5), (1, 2, 1)]:
        f, F = get_function(f"ml_pair({a}, {b}, {w})"), get_transform(f"ml_pair({a}, {b}, {w})")
        edge = w ** (1 / a) + 0.5
        for lam in [(edge + 0.1, edge + 0.1), (edge + 0.6, edge + 1.5), (edge + 1.0 + 0.5j, edge + 0.3 - 1j)]:
            num = laplace_nd(f, lam, cfg).value[0]
            closed = F(np.array([lam], complex))[0, 0]
            worst = max(worst, abs(num - closed) / abs(closed))
    elapsed = time.perf_counter() - start
    record(2, worst < 1e-5 and elapsed < 60, f"max rel error {worst:.2e} over 9 points; {elapsed:.1f} s")


def test_criterion_03_wright_pair():
    f, F = get_function("wright_pair(0.5)"), get_transform("wright_pair(0.5)")
    worst = 0.0
    for lam in [(1.0, 1.0), (2.0, 1.0)]:
        num = laplace_nd(f, lam, QuadratureConfig(rel_tol=1e-8)).value[0]
        closed = math.exp(-sum(math.sqrt(x) for x in lam))
        assert abs(F(np.array([lam], complex))[0, 0] - closed) < 1e-14
        worst = max(worst, abs(num - closed) / closed)
    record(3, worst < 1e-3, f"max rel error {worst:.2e}")


def test_criterion_04_convolution_theorem():
    cases = [
        ("gkernel(0.5)", "exp_decay(1)", (1.0, 1.0)),
        ("one", "poly_exp(k1=1, k2=0)", (1.0, 1.5)),
        ("gkernel(0.5)", "gkernel(1.5)", (1.0, 2.0)),
    ]
    res = [convolution_theorem_check(get_function(a), get_function(f), lam) for a, f, lam in cases]
    record(4, max(res) < 1e-5, "residuals " + ", ".join(f"{r:.1e}" for r in res))


def test_criterion_05_antiderivative_relation():
    cases = {
        "one": [(1.0, 2.0), (0.5, 0.5), (2.0 + 1j, 1.0)],
        "exp_decay(1)": [(1.0, 2.0), (0.25, 0.5), (1.0 - 2j, 3.0)],
        "ml_pair(1, 1, 1)": [(2.5, 3.0), (2.0, 2.0), (3.0 + 1j, 2.5)],
        "gkernel(1.5)": [(1.0, 2.0), (0.5, 1.0), (2.0, 1.0 + 1j)],
    }
    res = [check_LG_relation(get_function(s), lam) for s, pts in cases.items() for lam in pts]
    record(5, max(res) < 1e-5, f"max residual {max(res):.1e} over {len(res)} checks")


def test_criterion_06_post_widder():
    F = get_transform("sep_shifted_pole(1)")
    start = time.perf_counter()
    errors = [abs(post_widder_invert(F, (1.0, 1.0), PostWidderConfig((k,))).value[0] - math.exp(-2)) for k in (8, 16, 32, 64)]
    elapsed = time.perf_counter() - start
    monotone = all(b <= 1.1 * a for a, b in zip(errors, errors[1:]))
    ok = errors[2] <= 0.05 and monotone and elapsed < 10
    record(6, ok, "errors k=8,16,32,64: " + ", ".join(f"{e:.4f}" for e in errors) + f"; {elapsed:.2f} s")


def test_criterion_07_bromwich_round_trip():
    g = np.linspace(0.5, 2.0, 3)
    ts = np.array([(a, b) for a in g for b in g])
    worst = 0.0
    for spec, exact in [("sep_pole", ts[:, 0] * ts[:, 1]), ("sep_shifted_pole(1)", np.exp(-ts.sum(axis=1)))]:
        got = np.array([r.value[0] for r in bromwich_invert_many(get_transform(spec), ts)])
        worst = max(worst, float(np.max(np.abs(got - exact))))
    G = transform_of_antiderivative(get_transform("wright_pair(0.5)"))
    composed = bromwich_invert(G, (1.0, 1.0)).value[0]
    direct = antiderivative_G(get_function("wright_pair(0.5)"), (1.0, 1.0))[0]
    wright_err = abs(composed - direct)
    record(7, worst < 1e-4 and wright_err < 1e-3, f"grid max error {worst:.1e}; Wright composition {wright_err:.1e}")


def test_criterion_08_tauberian():
    initial = {"sep_shifted_pole(1)": 1.0, "inv_prod": 1.0, "ml_pair(1, 2, -1)": 0.0}
    final = {"inv_prod": 1.0, "ml_pair(1, 2, -1)": 1.0, "box_antiderivative(a1=1, a2=2)": 2.0}
    err_i = max(abs(tauberian_initial(get_transform(s)).value[0] - v) for s, v in initial.items())
    err_f = max(abs(tauberian_final(get_transform(s)).value[0] - v) for s, v in final.items())
    record(8, err_i < 1e-3 and err_f < 1e-3, f"initial max error {err_i:.1e}; final max error {err_f:.1e}")


def test_criterion_09_upset_suites():
    violations, checked = [], 0
    for spec in UPSET_SUITE:
        for lo, hi in upset_pairs(spec):
            v0, v1 = cached_verdict(spec, lo), cached_verdict(spec, hi)
            checked += 1
            if v0 == "in_Ω_abs" and v1 != "in_Ω_abs":
                violations.append((spec, lo, hi, v1))
            if v0 == "in_Ω_b" and v1 not in ("in_Ω_abs", "in_Ω_only", "in_Ω_b"):
                violations.append((spec, lo, hi, v1))
    record(9, not violations and checked == 100, f"{len(violations)} violations over {checked} pairs")


def test_criterion_10_schedule():
    first = initial_condition_schedule((3, 2, 0)).lines() == [
        "u^(3,0,0)(t1,0,t3)", "u^(3,1,0)(t1,0,t3)",
        "u^(0,0,0)(0,t2,t3)", "u^(1,0,0)(0,t2,t3)", "u^(2,0,0)(0,t2,t3)",
    ]
    second = initial_condition_schedule((3, 2, 0), (2, 3, 1)).lines() == [
        "u^(0,2,0)(0,t2,t3)", "u^(1,2,0)(0,t2,t3)", "u^(2,2,0)(0,t2,t3)",
        "u^(0,0,0)(t1,0,t3)", "u^(0,1,0)(t1,0,t3)",
    ]
    rng = np.random.default_rng(10)
    bad = 0
    for _ in range(100):
        n = int(rng.integers(1, 5))
        alpha = rng.integers(0, 6, size=n)
        if alpha.sum() == 0:
            alpha[rng.integers(n)] = 1
        order = rng.permutation(n) + 1
        bad += len(initial_condition_schedule(tuple(alpha), tuple(order))) != alpha.sum()
    record(10, first and second and bad == 0, f"listings {first}/{second}; {bad} cardinality failures in 100")


def test_criterion_11_volterra_oracle():
    # sum_k 1/(k!)^2, summed independently
    series = sum(1 / math.factorial(k) ** 2 for k in range(30))
    u = solve_volterra(VolterraProblem(A=1, B=1, C=1, a="one", f="one"), [(1.0, 1.0)]).values[0, 0].real
    record(11, abs(u - 2.279585) < 1e-3 and abs(u - series) < 1e-3, f"u(1,1) = {u:.8f}; series {series:.8f}")


def test_criterion_12_second_order_manufactured():
    m1 = {"name": "exp_decay", "scale": -1}
    prob = SecondOrderProblem(
        A=1, C=1, F=2, f={"name": "exp_decay", "params": {"a": 1}, "scale": 4},
        f1="exp_decay(1)", f2=m1, f3=m1, g1="exp_decay(1)", g2=m1,
    )
    g = np.linspace(0.5, 1.5, 3)
    ts = np.array([(x, y) for x in g for y in g])
    res = solve_second_order(prob, ts)
    err = float(np.max(np.abs(res.values[:, 0] - np.exp(-ts.sum(axis=1)))))
    record(12, err < 1e-3 and res.max_residual < 1e-2, f"grid error {err:.1e}; FD residual {res.max_residual:.1e}")
