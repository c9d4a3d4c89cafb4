import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from fdbench.series import GridError, Series
from fdbench.stencils import (
    SCHEMES,
    BoundaryPolicy,
    EvaluationError,
    Scheme,
    Stencil,
    StencilError,
    builtin_stencil,
    differentiate_series,
    estimate,
    generate_stencil,
    moment,
    theoretical_order,
)

F = Fraction


def sympy_weights(offsets, d):
    """Independent oracle: Fornberg's recursion as implemented by sympy."""
    w = sympy.finite_diff_weights(d, [sympy.Integer(o) for o in offsets], 0)[d][-1]
    return [F(int(v.p), int(v.q)) for v in w]


def assert_moments(s: Stencil):
    d, p = s.derivative_order, s.accuracy_order
    for m in range(d + p):
        expected = math.factorial(d) if m == d else 0
        assert moment(s.offsets, s.coefficients, m) == expected, m
    assert moment(s.offsets, s.coefficients, d + p) != 0


@pytest.mark.parametrize(
    "family, accuracy, offsets, coeffs, p",
    [
        ("forward", "low", (0, 1), (F(-1), F(1)), 1),
        ("forward", "high", (0, 1, 2), (F(-3, 2), F(2), F(-1, 2)), 2),
        ("backward", "low", (-1, 0), (F(-1), F(1)), 1),
        ("backward", "high", (-2, -1, 0), (F(1, 2), F(-2), F(3, 2)), 2),
        ("centered", "low", (-1, 1), (F(-1, 2), F(1, 2)), 2),
        ("centered", "high", (-2, -1, 1, 2), (F(1, 12), F(-8, 12), F(8, 12), F(-1, 12)), 4),
    ],
)
def test_builtin_stencils(family, accuracy, offsets, coeffs, p):
    s = builtin_stencil(Scheme(family, accuracy))
    assert s.offsets == offsets
    assert s.coefficients == coeffs
    assert s.derivative_order == 1
    assert s.accuracy_order == p
    assert_moments(s)


def test_flipped_backward_high_signs_are_not_a_stencil():
    # (3 f_i + 4 f_{i-1} + f_{i-2}) / 2h: weights do not sum to zero
    with pytest.raises(StencilError):
        Stencil((-2, -1, 0), (F(1, 2), F(2), F(3, 2)), 1, 2)


def test_six_schemes_are_distinct():
    assert len(SCHEMES) == 6
    assert {s.name for s in SCHEMES} == {
        "forward1", "backward1", "centered1", "forward2", "backward2", "centered2"
    }
    assert Scheme.from_name("centered2") == Scheme("centered", "high")


@pytest.mark.parametrize(
    "offsets, d, coeffs, p",
    [
        ([0, 1], 1, [F(-1), F(1)], 1),
        ([-1, 1], 1, [F(-1, 2), F(1, 2)], 2),
        ([0, 1, 2], 2, [F(1), F(-2), F(1)], 1),
        ([-2, -1, 0, 1, 2], 1, [F(1, 12), F(-8, 12), F(0), F(8, 12), F(-1, 12)], 4),
    ],
)
def test_generate_stencil_examples(offsets, d, coeffs, p):
    s = generate_stencil(offsets, d)
    assert list(s.coefficients) == coeffs
    assert s.accuracy_order == p
    assert list(s.coefficients) == sympy_weights(offsets, d)


def test_generate_rejects_bad_input():
    with pytest.raises(StencilError, match="capacity"):
        generate_stencil([0, 1], 2)
    with pytest.raises(StencilError, match="duplicate"):
        generate_stencil([0, 1, 1], 1)


def test_generate_sorts_offsets():
    assert generate_stencil([1, 0], 1).offsets == (0, 1)


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_generator_reproduces_builtins(scheme):
    b = builtin_stencil(scheme)
    assert generate_stencil(b.offsets, 1).coefficients == b.coefficients
    if scheme.name == "centered2":
        full = generate_stencil(range(-2, 3), 1)
        assert full.trimmed() == b


@pytest.mark.parametrize(
    "stencil, p",
    [
        (builtin_stencil(Scheme("forward", "low")), 1),
        (builtin_stencil(Scheme("centered", "low")), 2),
        (generate_stencil([-2, -1, 1, 2], 1), 4),
    ],
)
def test_theoretical_order(stencil, p):
    assert theoretical_order(stencil) == p


def test_stencil_rejects_wrong_normalisation():
    with pytest.raises(StencilError):
        Stencil((0, 1), (F(-2), F(2)), 1, 1)
    with pytest.raises(StencilError, match="accuracy order"):
        Stencil((-1, 1), (F(-1, 2), F(1, 2)), 1, 1)


@st.composite
def offset_sets(draw):
    offs = draw(st.lists(st.integers(-4, 4), min_size=2, max_size=9, unique=True))
    d = draw(st.integers(1, min(3, len(offs) - 1)))
    return sorted(offs), d


@settings(max_examples=60, deadline=None)
@given(offset_sets())
def test_generated_stencils_match_fornberg(case):
    offsets, d = case
    s = generate_stencil(offsets, d)
    assert list(s.coefficients) == sympy_weights(offsets, d)
    assert_moments(s)


@settings(max_examples=60, deadline=None)
@given(offset_sets(), st.lists(st.fractions(-3, 3, max_denominator=20), min_size=12, max_size=12),
       st.fractions(-10, 10, max_denominator=50), st.sampled_from([F(1), F(1, 10), F(1, 1000)]))
def test_polynomial_exactness_rational(case, poly_coeffs, x, h):
    offsets, d = case
    s = generate_stencil(offsets, d)
    coeffs = poly_coeffs[: d + s.accuracy_order]  # degree d+p-1

    def poly(t):
        return sum(c * t**k for k, c in enumerate(coeffs))

    exact = sum(
        c * math.perm(k, d) * x ** (k - d) for k, c in enumerate(coeffs) if k >= d
    )
    assert estimate(s, poly, x, h) == exact


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
@pytest.mark.parametrize("h", [1.0, 0.1, 0.01, 1e-3])
def test_polynomial_exactness_float(scheme, h):
    s = builtin_stencil(scheme)
    rng = np.random.default_rng(7)
    deg = s.accuracy_order  # d + p - 1 with d = 1
    for _ in range(20):
        poly = np.polynomial.Polynomial(rng.uniform(0.1, 1.0, deg + 1))
        x = float(rng.uniform(1, 10))
        exact = poly.deriv()(x)
        assert abs(estimate(s, poly, x, h) - exact) <= 1e-10 * abs(exact)


@given(
    st.sampled_from(SCHEMES),
    st.floats(-5, 5),
    st.floats(1e-3, 1),
    st.floats(-3, 3).filter(lambda v: v == 0 or abs(v) > 1e-6),
    st.floats(-3, 3).filter(lambda v: v == 0 or abs(v) > 1e-6),
)
def test_linearity(scheme, x, h, alpha, beta):
    s = builtin_stencil(scheme)
    f, g = math.sin, math.exp
    combo = estimate(s, lambda t: alpha * f(t) + beta * g(t), x, h)
    parts = alpha * estimate(s, f, x, h) + beta * estimate(s, g, x, h)
    scale = (abs(alpha) + abs(beta)) * max(1.0, math.exp(x + 2 * h)) * sum(abs(float(c)) for c in s.coefficients) / h
    assert abs(combo - parts) <= 1e-12 * scale


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_translation_invariance_exact(scheme):
    import mpmath

    s = builtin_stencil(scheme)
    with mpmath.workdps(50):
        a = mpmath.mpf(3) / 7
        x, h = mpmath.mpf(1), mpmath.mpf(1) / 16
        lhs = estimate(s, mpmath.sin, x, h)
        rhs = estimate(s, lambda t: mpmath.sin(t + a), x - a, h)
        assert abs(lhs - rhs) < mpmath.mpf(10) ** -45


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_estimate_constant_and_identity(scheme):
    s = builtin_stencil(scheme)
    assert estimate(s, lambda t: 4.0, 1.3, 0.25) == 0.0
    assert estimate(s, lambda t: t, 2.0, 0.5) == 1.0


def test_estimate_rejects_bad_step():
    s = builtin_stencil(Scheme("forward", "low"))
    with pytest.raises(ValueError):
        estimate(s, math.sin, 0.0, 0.0)
    with pytest.raises(ValueError):
        estimate(s, math.sin, 0.0, -1.0)


def test_estimate_reports_failing_abscissa():
    s = builtin_stencil(Scheme("centered", "low"))

    def f(t):
        if t > 1.2:
            raise ZeroDivisionError("pole")
        return t

    with pytest.raises(EvaluationError) as info:
        estimate(s, f, 1.0, 0.5)
    assert info.value.abscissa == 1.5
    assert isinstance(info.value.original, ZeroDivisionError)


# -- series differentiation -------------------------------------------------

def test_series_linear_forward_fallback():
    t = np.arange(11.0)
    out = differentiate_series(Series(t, t), Scheme("forward", "low"), BoundaryPolicy.FALLBACK)
    assert np.all(out.values == 1.0)
    assert out.trace[-1].offsets == (-1, 0)


def test_series_too_short_mark_missing():
    s = Series([0.0, 1.0, 2.0], [1.0, 2.0, 3.0])
    out = differentiate_series(s, Scheme("centered", "high"), BoundaryPolicy.MARK_MISSING)
    assert np.all(np.isnan(out.values))
    assert out.trace == (None, None, None)


def test_series_backward_fallback_trace_on_logistic():
    from fdbench.models import sample_model
    from fdbench.presets import default_model

    series = sample_model(default_model("logistic"), 0.0, 120.0, 13)
    out = differentiate_series(series, Scheme("backward", "low"))
    assert out.trace[0].offsets == (0, 1)
    assert all(s.offsets == (-1, 0) for s in out.trace[1:])
    v = series.values
    assert out.values[0] == (v[1] - v[0]) / 10.0
    assert out.values[5] == (v[5] - v[4]) / 10.0


def test_series_centered_high_fallback_uses_one_sided_fourth_order():
    t = np.linspace(0, 1, 11)
    out = differentiate_series(Series(t, t**4), Scheme("centered", "high"))
    assert out.trace[0].offsets == (0, 1, 2, 3, 4)
    assert out.trace[1].offsets == (0, 1, 2, 3, 4)
    assert out.trace[5].offsets == (-2, -1, 1, 2)
    assert out.trace[-1].offsets == (-4, -3, -2, -1, 0)
    np.testing.assert_allclose(out.values, 4 * t**3, atol=1e-11)


def test_series_fallback_lowers_accuracy_when_series_is_short():
    t = np.arange(3.0)
    out = differentiate_series(Series(t, t**2), Scheme("centered", "high"))
    # one-sided only: the middle point can get no better than [-1, 0]
    assert [s.offsets for s in out.trace] == [(0, 1, 2), (-1, 0), (-2, -1, 0)]
    assert out.values[0] == 0.0 and out.values[2] == 4.0
    assert out.values[1] == 1.0


def test_series_shrink_policy():
    t = np.arange(8.0)
    out = differentiate_series(Series(t, t**2), Scheme("centered", "high"), BoundaryPolicy.SHRINK)
    assert out.trace[0].offsets == (0, 1)
    assert out.trace[1].offsets == (-1, 1)
    assert out.trace[3].offsets == (-2, -1, 1, 2)
    assert out.trace[6].offsets == (-1, 1)
    assert out.trace[7].offsets == (-1, 0)


def test_series_rejects_nonuniform_grid():
    with pytest.raises(GridError):
        differentiate_series(Series([0.0, 1.0, 2.5], [0.0, 1.0, 2.0]), Scheme("forward", "low"))


def test_series_rejects_too_short():
    with pytest.raises(StencilError):
        differentiate_series(Series([0.0], [1.0]), Scheme("forward", "low"))


def test_series_quadratic_centered_low_exact():
    t = np.arange(11.0)
    out = differentiate_series(Series(t, t**2), Scheme("centered", "low"))
    assert np.array_equal(out.values[1:-1], 2 * t[1:-1])
