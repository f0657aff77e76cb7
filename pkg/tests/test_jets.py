import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_principal import jets as J
from lorentz_principal import quadrics as Q
from lorentz_principal.errors import DomainError
from lorentz_principal.jets import ChartSpec, Domain, Jet, eval_jet, eval_jet_grid, finite_difference_jet


def _graph(h):
    return ChartSpec("graph", {}, Domain((-1, 1), (-1, 1)), lambda u, v: (u, v, h(u, v)))


def _close_jets(j1, j2, rel):
    for a, b in zip(j1.components(), j2.components()):
        scale = max(1.0, float(np.max(np.abs(b))))
        assert np.max(np.abs(np.asarray(a) - np.asarray(b))) <= rel * scale


def test_paraboloid_jet_at_origin():
    jet = eval_jet(_graph(lambda u, v: u * u + v * v), 0.0, 0.0)
    np.testing.assert_allclose(jet.X, 0.0)
    np.testing.assert_allclose(jet.Xu, [1, 0, 0])
    np.testing.assert_allclose(jet.Xv, [0, 1, 0])
    np.testing.assert_allclose(jet.Xuu, [0, 0, 2])
    np.testing.assert_allclose(jet.Xuv, 0.0)
    np.testing.assert_allclose(jet.Xvv, [0, 0, 2])


def test_principal_chart_point():
    a, b, c = 2.0, 1.5, 2.2
    jet = eval_jet(Q.global_principal_chart(a, b, c), math.pi / 2, math.pi / 2)
    np.testing.assert_allclose(jet.X, [0, b, 0], atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 2.9), st.floats(0.1, 6.1))
def test_jet_matches_finite_differences(u, v):
    chart = Q.global_principal_chart(2.0, 1.5, 2.2)
    exact = eval_jet(chart, u, v)
    _close_jets(exact, finite_difference_jet(chart, u, v), 1e-6)
    # with the smaller step 1e-5 only first derivatives stay above the rounding floor
    fd = finite_difference_jet(chart, u, v, 1e-5)
    for a, b in ((exact.Xu, fd.Xu), (exact.Xv, fd.Xv)):
        assert np.max(np.abs(a - b)) <= 1e-6 * max(1.0, np.max(np.abs(a)))


def test_finite_difference_error_decreases_quadratically():
    chart = _graph(lambda u, v: J.sin(u) * J.cos(v) if isinstance(u, Jet) else np.sin(u) * np.cos(v))
    exact = eval_jet(chart, 0.3, 0.4)
    errs = [np.max(np.abs(finite_difference_jet(chart, 0.3, 0.4, h).Xu - exact.Xu)) for h in (1e-2, 5e-3)]
    assert errs[1] < errs[0] / 3.0


def test_constant_chart_has_zero_derivatives():
    chart = ChartSpec("const", {}, Domain((-1, 1), (-1, 1)), lambda u, v: (1.0, 2.0, 3.0))
    jet = finite_difference_jet(chart, 0.1, 0.2)
    for d in jet.components()[1:]:
        np.testing.assert_allclose(d, 0.0, atol=1e-12)


def test_grid_evaluation_matches_pointwise():
    chart = Q.global_principal_chart(2.0, 1.5, 2.2)
    U, V = np.meshgrid([0.3, 1.1], [0.2, 2.5, 4.0], indexing="ij")
    grid = eval_jet_grid(chart, U, V)
    one = eval_jet(chart, 1.1, 2.5)
    np.testing.assert_allclose(grid.Xuv[1, 1], one.Xuv, rtol=1e-13)


@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_jet_arithmetic_chain_rule(x, y):
    u, v = Jet.var_u(x), Jet.var_v(y)
    f = J.exp(u * v) / (1.0 + u * u)
    fx = math.exp(x * y) * (y * (1 + x * x) - 2 * x) / (1 + x * x) ** 2
    fy = x * math.exp(x * y) / (1 + x * x)
    assert f.du == pytest.approx(fx, rel=1e-12)
    assert f.dv == pytest.approx(fy, rel=1e-12)
    s = J.sqrt(u * u + v * v)
    assert s.duv == pytest.approx(-x * y / (x * x + y * y) ** 1.5, rel=1e-12)


def test_domain_fold_normalisation():
    d = Domain((0.0, math.pi), (0.0, 2 * math.pi), "fold", "periodic")
    u, v, flipped = d.normalize(-0.2, 1.0)
    assert flipped
    assert u == pytest.approx(0.2)
    assert v == pytest.approx(2 * math.pi - 1.0)
    assert d.normalize(1.0, 7.0)[1] == pytest.approx(7.0 - 2 * math.pi)


def test_domain_modes_validated():
    with pytest.raises(ValueError):
        Domain((0, 1), (0, 1), "fold", "fold")
    with pytest.raises(ValueError):
        Domain((0, 1), (0, 1), "wrap")
