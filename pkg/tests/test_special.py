import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from gipj.errors import DomainError
from gipj.special import (
    Hyp2F1Params,
    gamma,
    gamma_ratio,
    hyp2f1,
    hyp2f1_derivative,
    quadratic_power_integral,
    log_gamma,
    unit_circle_convergence,
)

# Reference values computed once with mpmath at 30 digits.
HYP2F1_REFERENCE = [
    ((0.5, 1.2, 1.5, -0.3), 0.89939039006939394),
    ((1 / 6, 2 / 3, 1.0, 0.81), 1.1768591973553381),
    ((1 / 6, 2 / 3, 1.0, 0.999), 1.5567763417777897),
    ((-0.2, 0.3, 1.0, 0.9), 0.92013508450252253),
    ((0.5, 1.5, 1.5, -0.9), 0.72547625011001167),
    ((0.5, 0.7, 1.5, -3.0), 0.69020832529510989),
    ((1.1, 0.4, 2.3, 0.75), 1.2357192406513241),
    ((0.3, 0.3, 1.6, 1.0), 1.1093318013762441),
    ((2.5, -1.3, 1.5, -7.5), 28.504730334498969),
    ((7 / 6, 5 / 3, 2.0, 0.64), 2.6392735850102465),
]

LOG_GAMMA_REFERENCE = [
    (0.1, 2.2527126517342059),
    (0.5, 0.57236494292470009),
    (1 / 6, 1.7167334350782405),
    (2.5, 0.28468287047291916),
    (10.0, 12.80182748008147),
    (123.4, 469.33609744219059),
]


@pytest.mark.parametrize("args,expected", HYP2F1_REFERENCE)
def test_hyp2f1_reference_values(args, expected):
    assert hyp2f1(*args) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("x,expected", LOG_GAMMA_REFERENCE)
def test_log_gamma_reference(x, expected):
    assert abs(log_gamma(x) - expected) <= 1e-13 * max(1.0, abs(expected))


@given(st.floats(min_value=1e-3, max_value=170.0))
def test_log_gamma_matches_stdlib(x):
    assert abs(log_gamma(x) - math.lgamma(x)) <= 1e-12 * max(1.0, abs(math.lgamma(x)))


def test_gamma_negative_and_poles():
    assert gamma(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-13)
    assert gamma(5.0) == pytest.approx(24.0, rel=1e-13)
    with pytest.raises(DomainError):
        gamma(-2.0)
    with pytest.raises(DomainError):
        log_gamma(0.0)
    assert gamma_ratio((1.0,), (-3.0,)) == 0.0


def test_gauss_summation_and_example_limits():
    # Kbar_0 limits in the lam = 3 and lam = -5/2 examples.
    g1 = gamma_ratio((1 / 6,), (1 / 3, 5 / 6))
    assert g1 == pytest.approx(1.840742746635885, rel=1e-13)
    assert hyp2f1(1 / 6, 2 / 3, 1.0, 1.0) == pytest.approx(g1, rel=1e-13)
    g2 = gamma_ratio((0.9,), (0.7, 1.2))
    assert g2 == pytest.approx(0.89662558078179678, rel=1e-13)
    assert hyp2f1(-0.2, 0.3, 1.0, 1.0) == pytest.approx(g2, rel=1e-13)


def test_elementary_special_cases():
    for z in (-5.0, -0.7, -0.2, 0.3, 0.8):
        assert hyp2f1(0.7, 1.3, 1.3, z) == pytest.approx((1 - z) ** -0.7, rel=1e-13)
        if abs(z) < 1:
            assert hyp2f1(1.0, 1.0, 2.0, z) == pytest.approx(-math.log1p(-z) / z, rel=1e-13)
    assert hyp2f1(0.5, 0.5, 1.5, 0.25) == pytest.approx(math.asin(0.5) / 0.5, rel=1e-14)


def test_terminating_series_is_polynomial():
    # 2F1(-2, b; c; z) = 1 - 2 b z / c + b (b+1) z^2 / (c (c+1))
    b, c, z = 1.3, 2.1, -4.0
    want = 1 - 2 * b * z / c + b * (b + 1) * z * z / (c * (c + 1))
    assert hyp2f1(-2.0, b, c, z) == pytest.approx(want, rel=1e-14)


@settings(max_examples=60)
@given(
    st.floats(min_value=-1.5, max_value=1.5),
    st.floats(min_value=-1.5, max_value=1.5),
    st.floats(min_value=0.3, max_value=3.0),
    st.floats(min_value=-0.95, max_value=0.95),
)
def test_euler_transformation(a, b, c, z):
    # 2F1(a,b;c;z) = (1-z)^(c-a-b) 2F1(c-a, c-b; c; z) exercises different branches on each side.
    lhs = hyp2f1(a, b, c, z)
    rhs = (1 - z) ** (c - a - b) * hyp2f1(c - a, c - b, c, z)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize(
    "args,expected",
    [
        # c - a - b within 1e-5 of an integer on (1/2, 1)
        ((1e-15, 0.75, 0.75, 0.75), 1.0000000000000014),
        ((1e-9, 0.7, 0.75, 0.75), 1.0000000012656587),
        ((0.25, 0.250002, 1.5, 0.9), 1.0597185996831775),
        # a - b within 1e-5 of an integer for z < -1
        ((0.3 + 1e-9, 0.3, 1.1, -3.0), 0.87318569530375270),
        ((0.3 + 1e-9, 1.3, 1.1, -3.0), 0.62461141405365126),
        # just outside the gap, connection formulas still used
        ((0.3 + 3e-5, 0.3, 1.1, -3.0), 0.87317465470265175),
    ],
)
def test_near_degenerate_parameters(args, expected):
    assert hyp2f1(*args) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("seam", [-1.0, -0.5, 0.5])
def test_continuity_across_branch_seams(seam):
    a, b, c = 0.37, 0.81, 1.93
    lo, hi = hyp2f1(a, b, c, seam - 1e-12), hyp2f1(a, b, c, seam + 1e-12)
    assert abs(lo - hi) <= 1e-11 * abs(lo)


def test_derivative_matches_difference_quotient():
    a, b, c, z, h = 0.4, 1.1, 1.7, -0.6, 1e-6
    fd = (hyp2f1(a, b, c, z + h) - hyp2f1(a, b, c, z - h)) / (2 * h)
    assert hyp2f1_derivative(a, b, c, z) == pytest.approx(fd, rel=1e-8)


def test_domain_errors():
    with pytest.raises(DomainError):
        hyp2f1(0.5, 0.5, -2.0, 0.1)
    with pytest.raises(DomainError):
        hyp2f1(0.5, 0.5, 1.5, 1.2)
    with pytest.raises(DomainError):
        hyp2f1(1.0, 1.0, 1.5, 1.0)  # a + b - c >= 0
    with pytest.raises(DomainError):
        hyp2f1(2.5, -1.5, 1.5, -7.5)  # integer a - b on the inversion branch
    with pytest.raises(DomainError):
        Hyp2F1Params(0.1, 0.2, 0.3, float("nan")).validate()
    assert Hyp2F1Params(0.5, 1.2, 1.5, -0.3).evaluate() == pytest.approx(0.89939039006939394, rel=1e-12)


def test_unit_circle_classification():
    assert unit_circle_convergence(0.2, 0.3, 1.0, 1.0) == "absolute"
    assert unit_circle_convergence(0.5, 0.7, 1.0, -1.0) == "conditional"
    assert unit_circle_convergence(0.5, 0.7, 1.0, 1.0) == "divergent"
    assert unit_circle_convergence(1.0, 1.0, 1.0, -1.0) == "divergent"
    with pytest.raises(DomainError):
        unit_circle_convergence(0.1, 0.1, 1.0, 0.5)


# Reference antiderivatives by mpmath quadrature.
@pytest.mark.parametrize(
    "b,c0,eps,beta,expected",
    [
        (1.5, 0.3, 0.5, 0.7, 1.7405074851972974),
        (0.8, 1.0, 1.0, -1.0, -0.82141782614065751),
        (-0.4, 0.2, 2.0, 0.9, 1.200201283726255),
    ],
)
def test_quadratic_power_integral_reference(b, c0, eps, beta, expected):
    assert quadratic_power_integral(b, c0, eps, beta) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=40)
@given(
    st.floats(min_value=-3.0, max_value=1.95).filter(lambda b: abs(b - 0.5) > 1e-3),
    st.floats(min_value=0.01, max_value=5.0),
    st.floats(min_value=1.0, max_value=4.0),
    st.floats(min_value=-1.0, max_value=1.0),
    st.floats(min_value=-0.5, max_value=0.5),
)
def test_quadratic_power_integral_is_antiderivative(b, c0, ratio, x, beta0):
    eps = c0 * ratio
    val = quadratic_power_integral(b, c0, eps, beta0 + x, beta0)
    ref, _ = quad(lambda s: (eps + c0 * s * s) ** (-b), 0.0, x, epsabs=1e-14, epsrel=1e-12)
    assert val == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_quadratic_power_integral_guards():
    with pytest.raises(DomainError):
        quadratic_power_integral(0.5, 1.0, 1.0, 0.3)
    with pytest.raises(DomainError):
        quadratic_power_integral(2.0, 1.0, 1.0, 0.3)
    with pytest.raises(DomainError):
        quadratic_power_integral(1.0, 1.0, 0.5, 0.3)
    with pytest.raises(DomainError):
        quadratic_power_integral(1.0, 0.0, 1.0, 0.3)
    with pytest.raises(DomainError):
        quadratic_power_integral(1.0, 1.0, 1.0, 1.5)
    assert quadratic_power_integral(1.2, 0.4, 0.9, 0.25, 0.25) == 0.0
