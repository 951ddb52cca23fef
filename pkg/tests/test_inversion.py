import math

import numpy as np
import pytest

from mdlt import (
    ConfigurationError,
    ContourConfig,
    MLParams,
    PostWidderConfig,
    TransformFunction,
    bromwich_invert,
    bromwich_invert_many,
    get_function,
    get_transform,
    mittag_leffler,
    post_widder_invert,
    post_widder_invert_G,
    tauberian_final,
    tauberian_initial,
    uniqueness_check,
)

T = (0.5, 2.0)


def test_post_widder_frozen_sequence():
    # frozen from the analytic-partial route; error decays like 1/k
    F = get_transform("sep_shifted_pole(1)")
    expected = {8: 0.12002027, 16: 0.12729639, 32: 0.13121351, 64: 0.13324786}
    for k, v in expected.items():
        got = post_widder_invert(F, (1.0, 1.0), PostWidderConfig((k,))).value[0].real
        assert got == pytest.approx(v, abs=1e-8)


def test_post_widder_moment_route_agrees_with_analytic():
    F = get_transform("exp_decay(1)")
    cfg = PostWidderConfig((8,), "moment_quadrature")
    moment = post_widder_invert(F, (1.0, 1.0), cfg, source=get_function("exp_decay(1)")).value[0]
    analytic = post_widder_invert(F, (1.0, 1.0), PostWidderConfig((8,))).value[0]
    assert abs(moment - analytic) < 1e-8


def test_post_widder_per_axis_orders():
    F = get_transform("sep_pole")
    v = post_widder_invert(F, (1.0, 2.0), PostWidderConfig((200, 400))).value[0].real
    assert v == pytest.approx(2.0, rel=1e-2)


def test_post_widder_of_antiderivative():
    got = post_widder_invert_G(get_transform("sep_shifted_pole(1)"), (1.0, 1.0), PostWidderConfig((32,)))
    assert got.value[0].real == pytest.approx((1 - math.exp(-1)) ** 2, abs=1e-2)


def test_post_widder_requires_partials():
    F = TransformFunction(2, 1, lambda l: (1 / ((l[:, 0] + 1) * (l[:, 1] + 1)))[:, None])
    with pytest.raises(ConfigurationError):
        post_widder_invert(F, (1.0, 1.0))


@pytest.mark.parametrize(
    "spec,expected",
    [
        ("sep_pole", 1.0),
        ("sep_shifted_pole(1)", math.exp(-2.5)),
        ("exp_decay(1)", math.exp(-2.5)),
        (
            "ml_pair(0.5, 1, 0.5)",
            float((mittag_leffler(MLParams(0.5, 1), 0.5 * math.sqrt(0.5)) * mittag_leffler(MLParams(0.5, 1), 0.5 * math.sqrt(2))).real),
        ),
    ],
)
def test_bromwich_closed_forms(spec, expected):
    res = bromwich_invert(get_transform(spec), T)
    assert abs(res.value[0] - expected) < 1e-7 * max(1.0, abs(expected))


def test_bromwich_wright_pair_against_time_function():
    got = bromwich_invert(get_transform("wright_pair(0.5)"), T).value[0]
    ref = get_function("wright_pair(0.5)")(np.array([T]))[0, 0]
    assert abs(got - ref) < 1e-6


def test_bromwich_sector_contour():
    res = bromwich_invert(get_transform("exp_decay(1)"), T, ContourConfig(shape="sector_rays"))
    assert abs(res.value[0] - math.exp(-2.5)) < 1e-7


def test_bromwich_without_declared_decay():
    F = TransformFunction(2, 1, lambda l: (1 / ((l[:, 0] + 1) * (l[:, 1] + 1)))[:, None])
    assert abs(bromwich_invert(F, (1.0, 1.0)).value[0] - math.exp(-2)) < 1e-4


def test_bromwich_many():
    out = bromwich_invert_many(get_transform("sep_pole"), [(1.0, 1.0), (2.0, 3.0)])
    assert [round(r.value[0].real, 6) for r in out] == [1.0, 6.0]
    assert all(r.error_estimate < 1e-5 for r in out)


@pytest.mark.parametrize(
    "kwargs", [dict(nodes=4), dict(shape="spiral"), dict(shape="sector_rays", angle=2.0), dict(half_length=(-1.0,))]
)
def test_contour_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        ContourConfig(**kwargs)


def test_inversion_needs_positive_time():
    with pytest.raises(ConfigurationError):
        bromwich_invert(get_transform("sep_pole"), (0.0, 1.0))
    with pytest.raises(ConfigurationError):
        PostWidderConfig((0,))


@pytest.mark.parametrize(
    "spec,initial,final",
    [
        ("sep_shifted_pole(1)", 1.0, 0.0),
        ("inv_prod", 1.0, 1.0),
        ("ml_pair(1, 2, -1)", 0.0, 1.0),
        ("box_antiderivative(a1=1, a2=2)", 0.0, 2.0),
    ],
)
def test_tauberian_limits(spec, initial, final):
    F = get_transform(spec)
    i, f = tauberian_initial(F), tauberian_final(F)
    assert i.converged and f.converged
    assert abs(i.value[0] - initial) < 1e-6 and abs(f.value[0] - final) < 1e-6


def test_tauberian_probe_validation():
    F = get_transform("inv_prod")
    with pytest.raises(ConfigurationError):
        tauberian_initial(F, (4.0, 2.0, 8.0, 16.0))
    with pytest.raises(ConfigurationError):
        tauberian_final(F, (0.1, 0.2, 0.05, 0.01))
    with pytest.raises(ConfigurationError):
        tauberian_final(F, (0.1, 0.05, 0.01))


def test_uniqueness_gate():
    same = uniqueness_check(get_transform("sep_shifted_pole(1)"), get_transform("exp_decay(1)"),
                            np.linspace(1, 3, 5), [(1.0, 1.0), (0.5, 2.0)])
    assert same.gate_passed and same.max_discrepancy < 1e-12
    differ = uniqueness_check(get_transform("sep_shifted_pole(1)"), get_transform("sep_shifted_pole(1.1)"),
                              np.linspace(1, 3, 5), [(1.0, 1.0)])
    # largest gap on the diagonal is at lambda = 1: 1/4 - 1/4.41
    assert not differ.gate_passed and differ.max_discrepancy == pytest.approx(0.25 - 1 / 4.41, rel=1e-12)


def test_post_widder_table():
    for k in (4, 32):
        assert post_widder_invert(get_transform("inv_prod"), (1.0, 1.0), PostWidderConfig((k,))).value[0].real == pytest.approx(1.0, rel=1e-12)
    F = get_transform("sep_shifted_pole(1)")
    assert abs(post_widder_invert(F, (1.0, 1.0), PostWidderConfig((32,))).value[0] - math.exp(-2)) < 2e-2
    # 1/(l1^2 l2) is the transform of t1; the formula gives t1 (1 + 1/k) exactly
    F = get_transform("poly_exp(k1=1, k2=0)")
    got = post_widder_invert(F, (2.0, 1.0), PostWidderConfig((32,))).value[0]
    assert abs(got - 2.0 * 33 / 32) < 1e-10


def test_bromwich_table():
    cfg = ContourConfig(offsets=(1.0, 1.0), half_length=(200.0, 200.0))
    assert abs(bromwich_invert(get_transform("sep_pole"), (2.0, 3.0), cfg).value[0] - 6.0) < 1e-4
    assert abs(bromwich_invert(get_transform("ml_pair(1, 1, -1)"), (1.0, 1.0)).value[0] - math.exp(-2)) < 1e-4


def test_wright_antiderivative_composition():
    from mdlt.inversion import transform_of_antiderivative
    from mdlt import antiderivative_G

    G = transform_of_antiderivative(get_transform("wright_pair(0.5)"))
    got = bromwich_invert(G, (1.0, 1.0)).value[0]
    direct = antiderivative_G(get_function("wright_pair(0.5)"), (1.0, 1.0))[0]
    assert abs(got - direct) < 1e-3
    # erfc(1/2)^2, the closed form of this antiderivative (mpmath, 20 digits)
    assert abs(got - 0.22992036717730330001) < 1e-7


@pytest.mark.parametrize("spec,initial,final", [("exp_decay(1)", 1.0, 0.0), ("inv_prod", 1.0, 1.0), ("sep_pole", 0.0, None)])
def test_tauberian_table(spec, initial, final):
    F = get_transform(spec)
    assert abs(tauberian_initial(F).value[0] - initial) < 1e-6
    if final is not None:
        assert abs(tauberian_final(F).value[0] - final) < 1e-6


def test_uniqueness_table():
    from mdlt.inversion import TransformFunction as TF
    from mdlt.operational import damping_transform

    inv = get_transform("inv_prod")
    grid = np.linspace(1.0, 3.0, 4)
    assert uniqueness_check(inv, inv, grid, [(1.0, 1.0)]).max_discrepancy == 0.0

    from mdlt.operational import damped as damped_fn

    one = get_function("one")
    damped = TF(2, 1, lambda l: np.array([damping_transform(one, (1.0, 1.0), p) for p in l]))
    # no analytic partials on the second path, so it reconstructs through moments of its source
    rep = uniqueness_check(get_transform("exp_decay(1)"), damped, grid, [(1.0, 1.0)],
                           sources=(None, damped_fn(one, (1.0, 1.0))))
    assert rep.gate_passed and rep.transform_gap < 1e-8 and rep.max_discrepancy < 1e-6

    shifted = TF(2, 1, lambda l: inv(l) + 0.1)
    rep = uniqueness_check(inv, shifted, grid, [(1.0, 1.0)])
    assert not rep.gate_passed and rep.max_discrepancy > 0.05


def test_dilation_covariance():
    # exp_decay(2) is f(2t) for f = exp(-t); inverting its transform gives f(2t)
    for t in [(0.5, 0.5), (1.0, 0.75)]:
        got = bromwich_invert(get_transform("exp_decay(2)"), t).value[0]
        assert abs(got - math.exp(-2 * sum(t))) < 1e-4
