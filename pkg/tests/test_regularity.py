import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from gipj.data import preset
from gipj.errors import DomainError
from gipj.regularity import (
    asymptotic_constants,
    classify,
    classify_setup,
    detect_trend,
    energy,
    energy_kbar_form,
    energy_rate,
    energy_rate_kbar_form,
    exponent_estimate,
    gamma_ratio_c4_c3,
    lp_bounds,
    lp_norm,
    lp_norm_kbar_form,
    normalize_data_class,
    regularity_report,
    slope_moments,
    table_rows,
    time_bounds,
)
from gipj.representation import (
    blowup_time,
    eta_of_time,
    gamma_alpha,
    kbar,
    make_setup,
    time_of_eta,
    ux,
)

_SETUPS = {}


def setup_for(lam, name):
    if (lam, name) not in _SETUPS:
        _SETUPS[(lam, name)] = make_setup(lam, preset(name))
    return _SETUPS[(lam, name)]


# ---------------------------------------------------------------------------
# Lookup tables
# ---------------------------------------------------------------------------


def test_classify_worked_cases():
    c = classify(3, "smooth")
    assert c.verdict == "two-sided-everywhere" and c.finite_time
    c = classify(-0.5, "smooth", p=2)
    assert c.verdict == "one-sided-discrete"
    assert (c.energy, c.energy_rate, c.lp_limit) == ("constant", "zero", "bounded")
    c = classify(1, "pc")
    assert c.verdict == "norm-inflation-no-pointwise" and c.finite_time is False
    c = classify(-2 / 3, "smooth", p=2)
    assert (c.energy, c.lp_limit) == ("+inf", "+inf")


@pytest.mark.parametrize(
    "lam,verdict",
    [(0, "global"), (0.3, "global-vanishing"), (1, "global-steady-state"), (1.01, "two-sided-everywhere"),
     (-2, "two-sided-everywhere"), (-1.99, "one-sided-discrete"), (-0.01, "one-sided-discrete")],
)
def test_smooth_verdicts(lam, verdict):
    assert classify(lam, "smooth-nondegenerate").verdict == verdict


def test_piecewise_verdicts():
    assert classify(-0.5, "PC", p=1).lp_limit == "bounded"
    assert classify(-0.5, "pc", p=3).lp_limit == "+inf"
    assert classify(-1.5, "pc", p=1).lp_limit == "+inf"
    assert classify(-0.2, "pc").verdict == "finite-time-blowup"
    assert classify(0.6, "pl").verdict == "two-sided-everywhere"
    assert classify(-0.2, "pl").verdict == "one-sided-discrete"
    assert classify(0.3, "pl").finite_time is None
    with pytest.raises(DomainError):
        classify(1, "spline")
    with pytest.raises(DomainError):
        classify(1, "smooth", p=0.5)
    assert normalize_data_class("Fourier") == "smooth"


@pytest.mark.parametrize(
    "lam,p,lp",
    [(0.5, math.inf, "bounded"), (1.5, 2, "+inf"), (-3, 1.5, "+inf"), (-1, 2, "+inf"), (-0.5, math.inf, "+inf"),
     (-1, 1, "bounded"), (-0.45, 2, "bounded"), (-0.45, 3, "+inf"), (-0.35, 6, "+inf"), (-0.1, 3, "bounded"),
     (-0.3, 1.2, "bounded")],
)
def test_smooth_lp_rules(lam, p, lp):
    assert classify(lam, "smooth", p=p).lp_limit == lp


def test_table_rows():
    assert [r.interval for r in table_rows(-0.5)] == ["{-1/2}"]
    assert table_rows(-0.5)[0].energy_rate == "zero"
    assert [r.interval for r in table_rows(-0.45)] == ["(-1/2, -2/5]"]
    assert table_rows(-0.3) == []
    rows = table_rows(-0.35, p=6)
    assert rows[-1].lp == "not in L^6"
    assert table_rows(-0.1, p=3)[0].lp == "in L^3"
    assert table_rows(2)[0].energy == "+inf"


@settings(max_examples=200)
@given(st.floats(-5, 5), st.sampled_from([1, 1.5, 2, 3, 6, math.inf]))
def test_lookup_is_total_and_consistent(lam, p):
    c = classify(lam, "smooth", p=p)
    assert c.lp_limit in ("bounded", "+inf", "not classified")
    assert c.energy in ("bounded", "constant", "+inf")
    # energy is the square of the L^2 norm
    if p == 2 and c.lp_limit != "not classified":
        assert (c.lp_limit == "+inf") == (c.energy == "+inf")
    if -2 / 3 < lam <= 1:
        assert c.energy in ("bounded", "constant")


# ---------------------------------------------------------------------------
# Time bounds
# ---------------------------------------------------------------------------


def test_remark_comparison_bounds():
    s = setup_for(-0.6, "remark")
    assert slope_moments(s) == (pytest.approx(1.0, rel=1e-12), pytest.approx(-0.75, rel=1e-12))
    tb = time_bounds(s)
    assert tb.eta_star == pytest.approx(5 / 6)
    assert tb.energy_comparison == pytest.approx(math.sqrt(15), rel=1e-12)
    assert tb.hypotheses["energy_comparison"]["cubic_moment_dominates"] is False
    assert tb.lower == pytest.approx(5 / 6 / (1 + 1.125 / 2) ** 2)
    assert round(tb.lower, 2) == 0.34
    assert tb.lower <= blowup_time(s) <= tb.upper


def test_remark_cubic_comparison():
    s = setup_for(-0.35, "remark")
    tb = time_bounds(s)
    assert tb.eta_star == pytest.approx(10 / 7)
    assert tb.cubic_comparison == pytest.approx(20 * 6 ** (2 / 3), rel=1e-12)
    # the stated 0.59 is this bound to two decimals
    assert round(tb.lower, 2) == 0.59
    assert 0.59 <= blowup_time(s) <= 10 / 7
    assert tb.energy_comparison is None
    assert classify_setup(s).bounds_hold


def test_sin_bounds_and_omitted_cubic():
    s = setup_for(-0.5, "sin4pi")
    tb = time_bounds(s)
    assert (tb.lower, tb.upper) == (pytest.approx(0.5), pytest.approx(2.0))
    assert tb.cubic_comparison is None  # int u0'^3 vanishes for sin data
    assert time_bounds(setup_for(0.0, "sin4pi")).eta_star == math.inf


@pytest.mark.parametrize("lam", [-0.3, -0.5, -0.9, -1.0, -1.5, -3.0])
@pytest.mark.parametrize("name", ["sin4pi", "remark", "ex4", "pl-ex", "pc-ex56"])
def test_blowup_time_within_bounds(lam, name):
    assert classify_setup(setup_for(lam, name)).bounds_hold


# ---------------------------------------------------------------------------
# Norms and energy
# ---------------------------------------------------------------------------


def test_lp_norm_initial_and_constant_cases():
    s = setup_for(-0.5, "sin4pi")
    assert lp_norm(s, 2, 0.0) == pytest.approx(math.sqrt(0.5), rel=1e-12)
    assert lp_norm(s, math.inf, 0.0) == pytest.approx(1.0)
    for f in (0.3, 0.9, 0.999):
        assert lp_norm(s, 2, f * s.eta_star) == pytest.approx(math.sqrt(0.5), rel=1e-10)
    assert lp_bounds(setup_for(-2.0, "pc-ex56"), 1, 0.3)[0] == pytest.approx(0.0, abs=1e-14)


def test_lp_norm_pc_closed_form():
    # lam = -2 pc data: u_x = +-1/(sqrt(1-4 eta^2) Kbar0^4) on halves mapped to lengths by gamma_alpha
    s = setup_for(-2.0, "pc-ex56")
    for eta in (0.1, 0.3, 0.45):
        p_, q_ = math.sqrt(1 - 2 * eta), math.sqrt(1 + 2 * eta)
        M = (p_ + q_) ** 3 / (8 * q_ * q_ * p_)
        m = -((p_ + q_) ** 3) / (8 * p_ * p_ * q_)
        g_plus, g_minus = q_ / (p_ + q_), p_ / (p_ + q_)
        assert lp_norm(s, 1, eta) == pytest.approx(g_plus * M - g_minus * m, rel=1e-11)


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from([3.0, 1.5, 1.0, 0.5, -0.5, -1.0, -1.5, -2.5]),
    st.sampled_from(["sin4pi", "ex4", "remark", "pl-ex", "pc-ex56"]),
    st.sampled_from([1.0, 1.5, 2.0, 3.0, 6.0]),
    st.floats(0.01, 0.99),
)
def test_norm_forms_and_sandwich(lam, name, p, frac):
    s = setup_for(lam, name)
    eta = frac * s.eta_star
    n = lp_norm(s, p, eta)
    assert lp_norm_kbar_form(s, p, eta) == pytest.approx(n, rel=1e-9)
    lo, hi = lp_bounds(s, p, eta)
    assert lo <= n * (1 + 1e-9) and n <= hi * (1 + 1e-9)
    E, Ed = energy(s, eta)
    assert E == pytest.approx(lp_norm(s, 2, eta) ** 2, rel=1e-9)
    assert energy_kbar_form(s, eta) == pytest.approx(E, rel=1e-9)
    # the Kbar form of dE/dt cancels like eta^-4 as eta -> 0; compare where it is well conditioned
    if frac >= 0.05:
        scale = max(abs(Ed), E ** 1.5, 1e-12)
        assert abs(energy_rate_kbar_form(s, eta) - Ed) <= 1e-8 * scale
    assert energy_rate(s, eta) == Ed


@pytest.mark.parametrize(
    "lam,name,frac",
    [(3.0, "sin4pi", 0.5), (-0.6, "remark", 0.5), (1.5, "ex4", 0.5), (-2.5, "pl-ex", 0.5), (0.0, "remark", 0.5),
     (3.0, "ex4", 0.01), (-0.6, "remark", 0.01)],
)
def test_energy_rate_matches_time_derivative(lam, name, frac):
    s = setup_for(lam, name)
    t = frac * (blowup_time(s) if math.isfinite(blowup_time(s)) else 1.0)
    h = 1e-4 * t
    Ep = energy(s, eta_of_time(s, t + h))[0]
    Em = energy(s, eta_of_time(s, t - h))[0]
    Ed = energy(s, eta_of_time(s, t))[1]
    assert (Ep - Em) / (2 * h) == pytest.approx(Ed, rel=1e-4, abs=1e-8)


def test_energy_constant_and_rate_zero_at_minus_half():
    s = setup_for(-0.5, "remark")
    for f in (0.2, 0.7, 0.99):
        E, Ed = energy(s, f * s.eta_star)
        assert E == pytest.approx(1.0, rel=1e-10)
        assert abs(Ed) < 1e-9


def test_energy_against_quadrature():
    s = setup_for(1.0, "remark")
    eta = 0.5 * s.eta_star
    pts = [0.25, 0.5, 0.75]
    want, _ = quad(lambda a: float(ux(s, a, eta) ** 2 * gamma_alpha(s, a, eta)), 0, 1, points=pts, limit=200, epsabs=1e-13)
    assert energy(s, eta)[0] == pytest.approx(want, rel=1e-7)


# ---------------------------------------------------------------------------
# Asymptotics and trends
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("lam", [0.25, 0.5, 1.0])
def test_c4_over_c3(lam):
    assert gamma_ratio_c4_c3(lam) == pytest.approx(1 - lam / 2, rel=1e-10)
    c = asymptotic_constants(setup_for(lam, "sin4pi"))
    assert c.c4 / c.c3 == pytest.approx(1 - lam / 2, rel=1e-10)


def test_c3_leading_behaviour():
    s = setup_for(0.5, "sin4pi")
    c3 = asymptotic_constants(s).c3
    J = 1e-6
    eta = s.eta_limit
    assert kbar(s, 0, eta) * J ** (1 / s.lam - 0.5) / c3 == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(DomainError):
        asymptotic_constants(setup_for(0.5, "pl-ex"))


def test_detect_trend_synthetic():
    J = np.geomspace(1e-1, 1e-6, 11)
    assert detect_trend(J, J**-0.5).limit == "+inf"
    assert detect_trend(J, -(J**-0.3)).limit == "-inf"
    assert detect_trend(J, 2 + J**0.5).verdict == "bounded"
    assert detect_trend(J, J**0.5).verdict == "vanishes"
    assert detect_trend(J, np.full(11, 3.0)).verdict == "constant"
    assert detect_trend(J, np.log(1 / J)).verdict == "diverges"
    assert detect_trend(J, np.sqrt(np.log(1 / J))).verdict == "diverges"
    # slow convergence to a nonzero limit from either side
    assert detect_trend(J, 1 + J**0.25).verdict == "bounded"
    assert detect_trend(J, 4 - 5 * J**0.17).verdict == "bounded"
    assert exponent_estimate(J, 7 * J**-0.75) == pytest.approx(-0.75, abs=1e-10)


@pytest.mark.parametrize(
    "lam,name,p",
    [(3.0, "sin4pi", 2), (0.5, "sin4pi", 2), (-0.5, "ex4", 2), (-0.6, "remark", 2), (-0.45, "sin4pi", 3),
     (-3.0, "sin4pi", 2), (-1.0, "sin4pi", 2), (-0.35, "sin4pi", 6), (-1.5, "sin4pi", 1.5),
     (-2 / 3, "sin4pi", 2), (-0.4, "remark", 2), (-2.0, "pc-ex56", 1), (-0.5, "pc-ex56", 1), (-0.25, "pc-ex56", 2)],
)
def test_measured_trends_agree_with_theorems(lam, name, p):
    rep = regularity_report(setup_for(lam, name), p=p)
    agree = rep.agreement()
    assert all(v is not False for v in agree.values()), (agree, {k: t.limit for k, t in rep.trends.items()})
    assert any(v is True for v in agree.values())


def test_report_serialises_and_refuses_lambda_zero():
    rep = regularity_report(setup_for(3.0, "sin4pi"), samples=5)
    d = rep.to_dict()
    assert len(d["J"]) == 5 and d["trends"]["M"]["limit"] == "+inf"
    assert d["trends"]["m"]["limit"] == "-inf"
    with pytest.raises(DomainError):
        regularity_report(setup_for(0.0, "sin4pi"))


def test_time_of_eta_consistent_with_report_samples():
    s = setup_for(-0.5, "ex4")
    rep = regularity_report(s, samples=3)
    for eta, *_ in rep.energy_samples:
        assert time_of_eta(s, eta) <= blowup_time(s)
