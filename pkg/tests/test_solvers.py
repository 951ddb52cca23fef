import math
import warnings

import numpy as np
import pytest
from scipy.special import roots_laguerre

from mdlt import (
    AccuracyWarning,
    ConfigurationError,
    DomainError,
    FractionalProblem2D,
    SecondOrderProblem,
    SingularSystemError,
    TransformFunction,
    VolterraProblem,
    build_resolvent_second_order,
    initial_condition_schedule,
    solve_fractional_2d,
    solve_second_order,
    solve_volterra,
)
from mdlt.inversion import bromwich_invert_many
from mdlt.solvers import Source, check_grid, check_resolvent, fractional_transform, second_order_transform

I0_2 = 2.2795853023360672674  # sum (t1 t2)^k/(k!)^2 at t1 t2 = 1, i.e. I0(2), mpmath


def unit_source():
    return Source(TransformFunction(2, 1, lambda l: np.ones((len(l), 1), complex)))


@pytest.fixture(scope="module")
def manufactured():
    # u = exp(-x-y) solves u_xx + u_yy + 2u = 4 exp(-x-y)
    m1 = {"name": "exp_decay", "scale": -1}
    return SecondOrderProblem(
        A=1, C=1, F=2, f={"name": "exp_decay", "params": {"a": 1}, "scale": 4},
        f1="exp_decay(1)", f2=m1, f3=m1, g1="exp_decay(1)", g2=m1,
    )


# ---------------------------------------------------------------- second order


def test_resolvent_table(manufactured):
    assert build_resolvent_second_order(SecondOrderProblem(A=1, f=unit_source()), (2.0, 3.0))[0] == pytest.approx(0.25)
    assert build_resolvent_second_order(SecondOrderProblem(F=1, f="inv_prod"), (1.0, 1.0))[0] == pytest.approx(1.0)
    assert abs(build_resolvent_second_order(manufactured, (2.0, 2.0))[0] - 1 / 9) < 1e-12


def test_manufactured_solution(manufactured):
    g = np.linspace(0.5, 1.5, 3)
    T = np.array([(x, y) for x in g for y in g])
    res = solve_second_order(manufactured, T)
    assert res.decay_ok
    assert np.max(np.abs(res.values[:, 0] - np.exp(-T.sum(axis=1)))) < 1e-6
    assert res.max_residual < 1e-3


def test_trivial_second_order_problems():
    T = [(0.7, 1.2)]
    zero = solve_second_order(SecondOrderProblem(A=1, C=1, F=2), T, residual_step=0.05)
    assert np.max(np.abs(zero.values)) < 1e-12
    # F u = f is algebraic
    alg = solve_second_order(SecondOrderProblem(F=1, f="one"), T)
    assert abs(alg.values[0, 0] - 1.0) < 1e-6


def test_second_order_validation():
    with pytest.raises(ConfigurationError):
        SecondOrderProblem(f="one")
    with pytest.raises(ConfigurationError):
        SecondOrderProblem(A=[[1, 0], [0, 1]], C=1)
    with pytest.raises(ConfigurationError):
        SecondOrderProblem(A=1, eps=0.0)
    with pytest.raises(ConfigurationError):
        SecondOrderProblem(A=1, omega=-1.0)


@pytest.mark.slow
def test_resolvent_consistency(manufactured):
    # L of the recovered u by Gauss-Laguerre quadrature, against G at random points
    nodes, weights = roots_laguerre(8)
    b = 4.0
    x = nodes / b
    G = second_order_transform(manufactured)
    T = np.array([(p, q) for p in x for q in x])
    U = np.array([r.value[0] for r in bromwich_invert_many(G, T)]).reshape(8, 8)
    rng = np.random.default_rng(1)
    for lam in rng.uniform(2, 4, size=(5, 2)):
        w1 = weights / b * np.exp(-(lam[0] - b) * x)
        w2 = weights / b * np.exp(-(lam[1] - b) * x)
        assert abs(w1 @ U @ w2 - G(lam[None, :])[0, 0]) < 1e-4


# ---------------------------------------------------------------- Volterra


def test_volterra_series_oracle():
    res = solve_volterra(VolterraProblem(A=1, B=1, C=1, a="one", f="one"), [(1.0, 1.0), (0.5, 2.0)])
    np.testing.assert_allclose(res.values[:, 0].real, [I0_2, I0_2], atol=1e-6)
    assert res.max_residual < 1e-3


def test_volterra_without_kernel_term():
    B = [[2.0, 0.0], [0.0, 1.0]]
    prob = VolterraProblem(A=np.zeros((2, 2)), B=B, C=np.eye(2), f=["one", "exp_decay(1)"])
    res = solve_volterra(prob, [(1.0, 0.5)])
    np.testing.assert_allclose(res.values[0].real, [0.5, math.exp(-1.5)], atol=1e-6)


def test_volterra_zero_source():
    res = solve_volterra(VolterraProblem(A=1, f="zero"), [(1.0, 1.0)])
    assert np.max(np.abs(res.values)) < 1e-12


def test_volterra_matrix_resolvent():
    prob = VolterraProblem(A=[[1, 0], [0, 0]], B=np.eye(2), C=np.eye(2), f=["one", "exp_decay(1)"])
    lam = np.array([[2.0, 3.0]])
    # 1/(l1 l2 - 1) on the first row, 1/((l1+1)(l2+1)) on the second
    np.testing.assert_allclose(prob.resolvent(lam)[0], [1 / 5, 1 / 12], rtol=1e-12)


def test_volterra_singular_pencil():
    prob = VolterraProblem(B=[[1, 1], [1, 1]], C=np.eye(2), f=["one", "one"])
    with pytest.raises(SingularSystemError):
        solve_volterra(prob, [(1.0, 1.0)])


def test_volterra_validation():
    with pytest.raises(ConfigurationError):
        VolterraProblem(f=["one", "one"])
    with pytest.raises(ConfigurationError):
        solve_volterra(VolterraProblem(A=1, f="one"), [(0.0, 1.0)])


# ---------------------------------------------------------------- fractional


def test_fractional_first_order_matches_volterra():
    # with a = 1 the two problems differ by the constant 1 (their transforms differ by 1/(l1 l2))
    res = solve_fractional_2d(FractionalProblem2D(1, 1, A=1, f="one"), [(1.0, 1.0)])
    assert abs(res.values[0, 0] - (I0_2 - 1)) < 1e-6


def test_fractional_trivial_cases():
    res = solve_fractional_2d(FractionalProblem2D(1, 1, f="one"), [(1.0, 1.0), (0.5, 2.0), (1.5, 2.0)])
    np.testing.assert_allclose(res.values[:, 0].real, [1.0, 1.0, 3.0], atol=1e-6)
    zero = solve_fractional_2d(FractionalProblem2D(0.5, 1.5, A=1, f="zero"), [(1.0, 1.0)])
    assert np.max(np.abs(zero.values)) < 1e-12


def test_fractional_half_order_source():
    # D^{1/2}_x D^{1/2}_y u = 1 with zero data: u = g_{3/2}(x) g_{3/2}(y)
    res = solve_fractional_2d(FractionalProblem2D(0.5, 0.5, f="one"), [(1.0, 2.0)])
    expected = math.sqrt(1.0) * math.sqrt(2.0) / math.gamma(1.5) ** 2
    assert abs(res.values[0, 0] - expected) < 1e-6


def test_caputo_and_riemann_liouville_agree_at_first_order():
    kw = dict(A=0.5, f="one", f_data=("exp_decay(1)",), h_data=("one",))
    rl = FractionalProblem2D(1, 1, "riemann_liouville", **kw)
    cap = FractionalProblem2D(1, 1, "caputo", **kw)
    assert rl.exponents() == cap.exponents()
    lam = np.array([[2.0, 3.0], [1.5 + 1j, 2.0], [4.0, 1.2 - 0.5j]])
    np.testing.assert_allclose(fractional_transform(rl)(lam), fractional_transform(cap)(lam), rtol=1e-14)


def test_fractional_exponents():
    p = FractionalProblem2D(1.5, 0.5, "riemann_liouville", f="one")
    assert p.orders == (2, 1)
    assert p.exponents() == ([(1.5, 0)], [(1, 0.5), (0, 0.5)])
    c = FractionalProblem2D(1.5, 0.5, "caputo", f="one")
    assert c.exponents() == ([(1.5, -0.5)], [(0.5, 0.5), (-0.5, 0.5)])


def test_fractional_validation():
    with pytest.raises(ConfigurationError):
        FractionalProblem2D(2.0, 1.0, f="one")
    with pytest.raises(ConfigurationError):
        FractionalProblem2D(1, 1, kind="weyl", f="one")
    with pytest.raises(ConfigurationError):
        FractionalProblem2D(1, 1, f="one", f_data=("one", "one"))


# ---------------------------------------------------------------- checks


def test_decay_check_flags_non_decaying_resolvent():
    lam = check_grid((1.0, 1.0))
    assert lam.shape == (256, 2)
    const = lambda l: np.ones((len(l), 1))
    with pytest.warns(AccuracyWarning):
        chk = check_resolvent([const], lambda l: np.ones((len(l), 1, 1)), lam, (0.05, 0.05))
    assert not chk.decay_ok and chk.min_singular == pytest.approx(1.0)


def test_decay_check_accepts_decaying_resolvent():
    lam = check_grid((1.0, 1.0))
    fn = lambda l: (1 / (l[:, 0] * l[:, 1]) ** 1.5)[:, None]
    with warnings.catch_warnings():
        warnings.simplefilter("error", AccuracyWarning)
        chk = check_resolvent([fn], lambda l: np.ones((len(l), 1, 1)), lam, (0.05, 0.05))
    assert chk.decay_ok


# ---------------------------------------------------------------- schedule


def test_schedule_listings():
    assert initial_condition_schedule((3, 2, 0)).lines() == [
        "u^(3,0,0)(t1,0,t3)", "u^(3,1,0)(t1,0,t3)",
        "u^(0,0,0)(0,t2,t3)", "u^(1,0,0)(0,t2,t3)", "u^(2,0,0)(0,t2,t3)",
    ]
    assert initial_condition_schedule((3, 2, 0), (2, 3, 1)).lines() == [
        "u^(0,2,0)(0,t2,t3)", "u^(1,2,0)(0,t2,t3)", "u^(2,2,0)(0,t2,t3)",
        "u^(0,0,0)(t1,0,t3)", "u^(0,1,0)(t1,0,t3)",
    ]


def test_schedule_single_axis():
    for order in (None, (1, 2), (2, 1)):
        assert initial_condition_schedule((1, 0), order).lines() == ["u^(0,0)(0,t2)"]


def test_schedule_errors():
    with pytest.raises(DomainError):
        initial_condition_schedule((0, 0))
    with pytest.raises(ConfigurationError):
        initial_condition_schedule((1, 2), (1, 1))
