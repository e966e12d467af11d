"""Norms, energy, theorem-based verdicts and time bounds.

Two independent views of regularity are kept apart here:

* :func:`classify` and :func:`table_rows` only look up the proven statements
  for a given ``lam``, data class and ``p``;
* :func:`detect_trend` and :func:`regularity_report` measure what the
  computed quantities actually do as ``eta`` approaches ``eta_star``.

Tests compare the two.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .representation import (
    ProblemSetup,
    blowup_time_estimate,
    energy as energy_value,
    extrema_track,
    kbar,
)
from .special import gamma_ratio

TREND_SLOPE_TOL = 0.05
TREND_J_RANGE = (1e-6, 1e-1)


# ---------------------------------------------------------------------------
# Norms and energy
# ---------------------------------------------------------------------------


def lp_norm(setup: ProblemSetup, p: float, eta: float) -> float:
    """``||u_x(., t(eta))||_p`` for ``p >= 1`` or ``p = inf``.

    Computed as ``Kbar_0^(-2 lam) (<|y - <y>|^p>)^(1/p)`` with ``y = u0'/J``
    and ``<.>`` the average against ``J^(-1/lam)/Kbar_0``; this is the standard
    change of variables ``x = gamma(alpha)`` with the ``1/(lam eta)`` factor
    divided out analytically, so ``eta = 0`` needs no special case.
    """
    if not (p >= 1):
        raise DomainError(f"p = {p} must be at least 1")
    eta = setup.check_eta(eta)
    if math.isinf(p):
        M, m = extrema_track(setup, eta)
        return max(abs(M), abs(m))
    fr = setup.frame(eta)
    d = np.abs(fr.y - fr.mean_y)
    return fr.kbar0 ** (-2 * setup.lam) * (fr.integrate(fr.K0 * d**p) / fr.kbar0) ** (1.0 / p)


def lp_norm_kbar_form(setup: ProblemSetup, p: float, eta: float) -> float:
    """``||u_x||_p`` from ``int |f|^p / (|lam eta|^p Kbar_0^(1 + 2 lam p))`` with
    ``f = J^(-(1 + 1/(lam p))) - (Kbar_1/Kbar_0) J^(-1/(lam p))``.  Needs ``eta > 0``."""
    eta = setup.check_eta(eta)
    lam = setup.lam
    if lam == 0 or eta == 0:
        raise DomainError("needs lam != 0 and eta > 0")
    fr = setup.frame(eta)
    k0, k1 = kbar(setup, 0, eta), kbar(setup, 1, eta)
    J = fr.J
    f = J ** (-(1 + 1 / (lam * p))) - (k1 / k0) * J ** (-1 / (lam * p))
    val = fr.integrate(np.abs(f) ** p) / (abs(lam * eta) ** p * k0 ** (1 + 2 * lam * p))
    return val ** (1.0 / p)


def lp_bounds(setup: ProblemSetup, p: float, eta: float) -> tuple[float, float]:
    """Lower and upper bounds on ``||u_x||_p`` expressed through ``J``-integrals.

    upper^p = 2^(p-1) / (|lam eta|^p Kbar_0^(1 + 2 lam p)) (int J^(-(p + 1/lam)) + Kbar_1^p / Kbar_0^(p-1))

    lower   = |int J^(-(1 + 1/(lam p))) - (Kbar_1/Kbar_0) int J^(-1/(lam p))| / (|lam eta| Kbar_0^(2 lam + 1/p))

    The upper bound is infinite at ``eta = 0``.  The lower bound vanishes
    identically for ``p = 1``.
    """
    if not (1 <= p < math.inf):
        raise DomainError(f"p = {p} must be finite and at least 1")
    eta = setup.check_eta(eta)
    lam = setup.lam
    if lam == 0:
        raise DomainError("bounds are stated for lam != 0")
    fr = setup.frame(eta)
    k0 = fr.kbar0
    # lower: the bracket equals lam eta int J^(-1/(lam p)) (y - <y>)
    lower = abs(fr.integrate(fr.J ** (-1 / (lam * p)) * (fr.y - fr.mean_y))) / k0 ** (2 * lam + 1 / p)
    if eta == 0:
        return lower, math.inf
    k1 = fr.kbar(1)
    big = fr.integrate(fr.J ** (-(p + 1 / lam)))
    upper_p = 2 ** (p - 1) / (abs(lam * eta) ** p * k0 ** (1 + 2 * lam * p)) * (big + k1**p / k0 ** (p - 1))
    return lower, upper_p ** (1.0 / p)


def energy(setup: ProblemSetup, eta: float) -> tuple[float, float]:
    """``(E, dE/dt)`` at ``eta``."""
    return energy_value(setup, eta), energy_rate(setup, eta)


def energy_kbar_form(setup: ProblemSetup, eta: float) -> float:
    """``E = (Kbar_0 Kbar_2 - Kbar_1^2) / (lam eta Kbar_0^(1 + 2 lam))^2`` (``eta > 0``)."""
    eta = setup.check_eta(eta)
    lam = setup.lam
    if lam == 0 or eta == 0:
        raise DomainError("needs lam != 0 and eta > 0")
    k0, k1, k2 = (kbar(setup, i, eta) for i in range(3))
    return (k0 * k2 - k1 * k1) / (lam * eta * k0 ** (1 + 2 * lam)) ** 2


def energy_rate(setup: ProblemSetup, eta: float) -> float:
    """``dE/dt = (1 + 2 lam) int u_x^3 dx``, from the third central moment of ``u0'/J``."""
    eta = setup.check_eta(eta)
    fr = setup.frame(eta)
    return (1 + 2 * setup.lam) * fr.kbar0 ** (-6 * setup.lam) * fr.central_moment(3)


def energy_rate_kbar_form(setup: ProblemSetup, eta: float) -> float:
    """``dE/dt = (1+2 lam)/(lam eta)^3 [K3/K1 - 3 K2/K0 + 2 (K1/K0)^2] K1 / K0^(1 + 6 lam)``."""
    eta = setup.check_eta(eta)
    lam = setup.lam
    if lam == 0 or eta == 0:
        raise DomainError("needs lam != 0 and eta > 0")
    k0, k1, k2, k3 = (kbar(setup, i, eta) for i in range(4))
    bracket = k3 / k1 - 3 * k2 / k0 + 2 * (k1 / k0) ** 2
    return (1 + 2 * lam) / (lam * eta) ** 3 * bracket * k1 / k0 ** (1 + 6 * lam)


def slope_moments(setup: ProblemSetup) -> tuple[float, float]:
    """``(E0, V0) = (int u0'^2, int u0'^3)``."""
    fr = setup.frame(0.0)
    return fr.integrate(fr.slope**2), fr.integrate(fr.slope**3)


# ---------------------------------------------------------------------------
# Theorem lookup
# ---------------------------------------------------------------------------

DATA_CLASSES = ("smooth", "pl", "pc")
_CLASS_ALIASES = {"smooth-nondegenerate": "smooth", "fourier": "smooth"}


def normalize_data_class(name: str) -> str:
    key = str(name).strip().lower()
    key = _CLASS_ALIASES.get(key, key)
    if key not in DATA_CLASSES:
        raise DomainError(f"data class must be one of {DATA_CLASSES}, got {name!r}")
    return key


def data_class_of(setup: ProblemSetup) -> str:
    return {"fourier": "smooth", "pl": "pl", "pc": "pc"}[setup.data.kind]


@dataclass(frozen=True)
class TableRow:
    """One row of the smooth-data regularity table.

    ``energy``/``energy_rate`` take values ``"+inf"``, ``"-inf"``, ``"bounded"``
    or ``"constant"``/``"zero"``; ``lp`` records membership of ``u_x`` at
    ``eta_star`` in ``L^p`` spaces.
    """

    interval: str
    energy: str
    energy_rate: str
    lp: str


def table_rows(lam: float, p: Optional[float] = None) -> list[TableRow]:
    """Rows of the smooth-data table that contain ``lam``.

    Two rows depend on ``p``; they are only matched when ``p`` is given and
    satisfies the row's condition.  An empty list means the table does not
    classify ``lam``.
    """
    rows: list[TableRow] = []
    if lam <= -2:
        rows.append(TableRow("(-inf, -2]", "+inf", "+inf", "not in L^p for p > 1"))
    if -2 < lam <= -2 / 3:
        rows.append(TableRow("(-2, -2/3]", "+inf", "+inf", "in L^1, not in L^2"))
    if -2 / 3 < lam < -0.5:
        rows.append(TableRow("(-2/3, -1/2)", "bounded", "+inf", "in L^2, not in L^3"))
    if lam == -0.5:
        rows.append(TableRow("{-1/2}", "constant", "zero", "in L^2, not in L^3"))
    if -0.5 < lam <= -0.4:
        rows.append(TableRow("(-1/2, -2/5]", "bounded", "-inf", "in L^2, not in L^3"))
    if p is not None and p >= 3 and -2 / (2 * p - 1) < lam < 0:
        rows.append(TableRow(f"(-2/(2p-1), 0), p={p:g}", "bounded", "bounded", f"in L^{p:g}"))
    if p is not None and p >= 6 and -2 / (p - 1) <= lam <= -2 / p:
        rows.append(TableRow(f"[-2/(p-1), -2/p], p={p:g}", "bounded", "bounded", f"not in L^{p:g}"))
    if 0 <= lam <= 1:
        rows.append(TableRow("[0, 1]", "bounded", "bounded", "in L^inf"))
    if lam > 1:
        rows.append(TableRow("(1, inf)", "+inf", "+inf", "not in L^p for p > 1"))
    return rows


@dataclass(frozen=True)
class Classification:
    """Proven behaviour for the given ``lam``, data class and ``p``.

    ``verdict`` is one of ``global``, ``global-vanishing``,
    ``global-steady-state``, ``one-sided-discrete``, ``two-sided-everywhere``,
    ``finite-time-blowup``, ``norm-inflation-no-pointwise`` or ``not covered``.
    ``finite_time`` is ``None`` when no statement is available.
    ``lp_limit`` is ``"bounded"``, ``"+inf"`` or ``"not classified"``.
    """

    lam: float
    data_class: str
    p: Optional[float]
    verdict: str
    finite_time: Optional[bool]
    lp_limit: str
    energy: str
    energy_rate: str
    rows: tuple[TableRow, ...] = field(default=())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rows"] = [asdict(r) for r in self.rows]
        return d


def _smooth_lp(lam: float, p: Optional[float]) -> str:
    if p is None:
        return "not classified"
    # statements from the theorem on L^p norms
    if 0 <= lam <= 1 or 2 / (1 - 2 * p) < lam <= 1:
        return "bounded"
    if p > 1 and (lam > 1 or lam <= -2):
        return "+inf"
    if 1 < p < math.inf and -2 < lam <= -2 / p:
        return "+inf"
    if math.isinf(p) and lam < 0:
        return "+inf"
    # membership stated row by row in the regularity table
    if -2 < lam <= -2 / 3:
        return "bounded" if p == 1 else "+inf"
    if -2 / 3 < lam <= -0.4:
        if p <= 2:
            return "bounded"
        if p >= 3:
            return "+inf"
    if p >= 6 and -2 / (p - 1) <= lam <= -2 / p:
        return "+inf"
    return "not classified"


def _smooth_energy(lam: float) -> tuple[str, str]:
    e = "bounded" if -2 / 3 < lam <= 1 else "+inf"
    if lam == -0.5:
        e = "constant"
    if lam == -0.5:
        r = "zero"
    elif lam < -0.5 or lam > 1:
        r = "+inf"
    elif -0.5 < lam <= -0.4:
        r = "-inf"
    else:
        r = "bounded"
    return e, r


def classify(lam: float, data_class: str, p: Optional[float] = None) -> Classification:
    """Look up the proven behaviour; no numerics involved."""
    data_class = normalize_data_class(data_class)
    if p is not None and not p >= 1:
        raise DomainError(f"p = {p} must be at least 1")
    lam = float(lam)
    if data_class == "smooth":
        if lam == 0:
            verdict, finite = "global", False
        elif 0 < lam < 1:
            verdict, finite = "global-vanishing", False
        elif lam == 1:
            verdict, finite = "global-steady-state", False
        elif lam > 1 or lam <= -2:
            verdict, finite = "two-sided-everywhere", True
        else:
            verdict, finite = "one-sided-discrete", True
        e, r = _smooth_energy(lam)
        return Classification(lam, data_class, p, verdict, finite, _smooth_lp(lam, p), e, r, tuple(table_rows(lam, p)))

    if data_class == "pc":
        if lam >= 0:
            return Classification(lam, data_class, p, "norm-inflation-no-pointwise", False, "not classified", "not classified", "not classified")
        if lam < -1:
            lp = "+inf"
        elif p is None:
            lp = "not classified"
        elif lam < -1 / p:
            lp = "+inf"
        else:
            lp = "bounded"
        return Classification(lam, data_class, p, "finite-time-blowup", True, lp, "not classified", "not classified")

    # piecewise-linear slope
    if lam > 0.5:
        verdict, finite = "two-sided-everywhere", True
    elif lam < 0:
        verdict, finite = "one-sided-discrete", True
    else:
        verdict, finite = "not covered", None
    return Classification(lam, data_class, p, verdict, finite, "not classified", "not classified", "not classified")


# ---------------------------------------------------------------------------
# Blow-up time bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeBounds:
    """Bounds on the blow-up time.

    ``lower``/``upper`` bracket ``t_star`` for the stated ``lam`` range.
    ``energy_comparison`` (``T^*``) and ``cubic_comparison`` (``T_*``) are
    upper bounds for the breakdown of ``E`` and of ``int u_x^3`` obtained by
    energy arguments; both are expected to exceed ``t_star``.  Their
    hypothesis checks are listed in ``hypotheses`` and the value is reported
    even when a check fails.
    """

    eta_star: float
    lower: Optional[float]
    upper: Optional[float]
    energy_comparison: Optional[float]
    cubic_comparison: Optional[float]
    hypotheses: dict
    notes: tuple[str, ...]

    def to_dict(self) -> dict:
        return asdict(self)


def time_bounds(setup: ProblemSetup) -> TimeBounds:
    lam = setup.lam
    if lam == 0:
        return TimeBounds(math.inf, None, None, None, None, {}, ("global solution, no blow-up",))
    es = setup.eta_star
    M0, m0 = setup.extrema.max_value, setup.extrema.min_value
    E0, V0 = slope_moments(setup)
    v_negative = V0 < -1e-12 * E0**1.5
    lower = upper = None
    notes: list[str] = []
    if -1 <= lam < 0:
        lower = es * (1 - M0 / m0) ** -2
        upper = es
    elif lam < -1:
        lower = es
    else:
        notes.append("no explicit bounds for lam > 0")
    hyp: dict = {}
    energy_comparison = cubic_comparison = None
    if lam < -0.5:
        k = abs(1 + 2 * lam)
        energy_comparison = math.sqrt(3 / (k * E0))
        hyp["energy_comparison"] = {
            "cubic_moment_negative": v_negative,
            "cubic_moment_dominates": k * V0 * V0 / 2 >= 2 * E0**3 / 3,
        }
        if not all(hyp["energy_comparison"].values()):
            notes.append("energy_comparison reported but its hypotheses are not all met")
    if lam < -1 / 3:
        hyp["cubic_comparison"] = {"cubic_moment_negative": v_negative}
        if v_negative:
            cubic_comparison = 3 / ((1 + 3 * lam) * float(np.cbrt(V0)))
        else:
            notes.append("cubic_comparison omitted: int u0'^3 is not negative")
    return TimeBounds(es, lower, upper, energy_comparison, cubic_comparison, hyp, tuple(notes))


# ---------------------------------------------------------------------------
# Asymptotic constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticConstants:
    """Leading coefficients near ``eta_star`` for smooth data, summed over locations.

    ``Kbar_0 ~ c3 J^(1/2 - 1/lam)`` and ``Kbar_1 ~ c4 J^(-1/2 - 1/lam)`` for
    ``0 < lam < 2``; ``Kbar_1 ~ c5 J^(-1/2 - 1/lam)`` for ``lam < -2``, where
    ``J`` is the strain factor at the critical locations.
    """

    c3: Optional[float]
    c4: Optional[float]
    c5: Optional[float]


def gamma_ratio_c4_c3(lam: float) -> float:
    """``(Gamma(1/2 + 1/lam)/Gamma(1 + 1/lam)) / (Gamma(1/lam - 1/2)/Gamma(1/lam))``."""
    r = 1.0 / lam
    return gamma_ratio((0.5 + r,), (1 + r,)) / gamma_ratio((r - 0.5,), (r,))


def asymptotic_constants(setup: ProblemSetup) -> AsymptoticConstants:
    lam = setup.lam
    e = setup.extrema
    if setup.critical_order != "quadratic":
        raise DomainError("constants need a non-degenerate smooth extremum")
    r = 1.0 / lam if lam != 0 else math.inf
    c3 = c4 = c5 = None
    if 0 < lam < 2:
        root = sum(math.sqrt(-math.pi * e.max_value / c) for c in e.max_c)
        c3 = gamma_ratio((r - 0.5,), (r,)) * root
        c4 = gamma_ratio((0.5 + r,), (1 + r,)) * root
    elif lam > 0:
        root = sum(math.sqrt(-math.pi * e.max_value / c) for c in e.max_c)
        c4 = gamma_ratio((0.5 + r,), (1 + r,)) * root
    elif lam < -2:
        root = sum(math.sqrt(-math.pi * e.min_value / c) for c in e.min_c)
        c5 = gamma_ratio((0.5 + r,), (1 + r,)) * root
    return AsymptoticConstants(c3, c4, c5)


# ---------------------------------------------------------------------------
# Measured trends
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Trend:
    """``verdict`` is ``diverges``, ``bounded``, ``vanishes`` or ``constant``.

    ``sign`` is the sign of the quantity at the smallest ``J``; ``r2`` is the
    coefficient of determination of the log-log fit.
    """

    verdict: str
    slope: float
    sign: int
    r2: float

    @property
    def limit(self) -> str:
        """The verdict in table vocabulary (``+inf``, ``-inf``, ``bounded``, ...)."""
        if self.verdict == "diverges":
            return "+inf" if self.sign > 0 else "-inf"
        return self.verdict


def detect_trend(J: Sequence[float], values: Sequence[float]) -> Trend:
    """Classify ``values`` as ``J -> 0`` by the least-squares slope of ``log|value|`` on ``log J``.

    A slope below ``-0.05`` means divergence, above ``+0.05`` means the
    quantity vanishes, and anything in between is bounded.  Samples that agree
    to ``1e-9`` relative (or are all zero) are ``constant``.

    A slowly converging quantity ``A + B J^q`` with small ``q > 0`` can show a
    log-log slope just below ``-0.05``.  When the successive differences over
    the four smallest ``J`` still shrink like ``J^q`` with ``q > 0.05`` the
    verdict is ``bounded`` instead; logarithmic growth has a local difference
    exponent near zero and stays ``diverges``.  Symmetrically, ``vanishes``
    also needs the log-log slope over the four smallest ``J`` to exceed the
    threshold, since ``A + B J^q`` flattens there.
    """
    order = np.argsort(np.asarray(J, dtype=float))[::-1]
    J = np.asarray(J, dtype=float)[order]
    v = np.asarray(values, dtype=float)[order]
    ref = float(np.max(np.abs(v)))
    sign = int(np.sign(v[np.argmin(J)]))
    if ref == 0 or np.ptp(v) <= 1e-9 * ref:
        return Trend("constant", 0.0, sign, 1.0)
    keep = v != 0
    if keep.sum() < 3:
        return Trend("bounded", 0.0, sign, 0.0)
    lx, ly = np.log(J[keep]), np.log(np.abs(v[keep]))
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    ss = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    slope = float(slope)
    if slope < -TREND_SLOPE_TOL:
        tail_J, tail_v = J[-4:], v[-4:]
        if len(J) >= 4 and np.all(np.diff(tail_v) != 0) and exponent_estimate(tail_J, tail_v) > TREND_SLOPE_TOL:
            return Trend("bounded", slope, sign, r2)
        return Trend("diverges", slope, sign, r2)
    if slope > TREND_SLOPE_TOL:
        tail = keep.copy()
        tail[:-4] = False
        if tail.sum() >= 3 and np.polyfit(np.log(J[tail]), np.log(np.abs(v[tail])), 1)[0] <= TREND_SLOPE_TOL:
            return Trend("bounded", slope, sign, r2)
        return Trend("vanishes", slope, sign, r2)
    return Trend("bounded", slope, sign, r2)


def exponent_estimate(J: Sequence[float], values: Sequence[float]) -> float:
    """Power ``q`` in ``value ~ A + B J^q`` from successive differences.

    Differencing removes the additive constant, so the slope of
    ``log|value_k - value_{k+1}|`` against ``log J_k`` estimates ``q`` on a
    geometric ``J`` sequence.
    """
    J = np.asarray(J, dtype=float)
    v = np.asarray(values, dtype=float)
    d = np.abs(np.diff(v))
    return float(np.polyfit(np.log(J[:-1]), np.log(d), 1)[0])


def eta_for_critical_jacobian(setup: ProblemSetup, J: float) -> float:
    """``eta`` at which the strain factor at the critical locations equals ``J``."""
    if setup.lam == 0:
        raise DomainError("no critical strain factor when lam = 0")
    return min(setup.eta_star * (1.0 - J), setup.eta_limit)


@dataclass
class BlowupClassification:
    """Theorem verdicts for a concrete setup together with the computed ``t_star``."""

    data_class: str
    lam: float
    verdict: str
    t_star: float
    t_star_error: float
    t_star_method: str
    t_star_bounds: tuple[Optional[float], Optional[float]]
    comparison_bounds: dict
    bounds_hold: bool
    theorem: Classification

    def to_dict(self) -> dict:
        d = asdict(self)
        d["theorem"] = self.theorem.to_dict()
        return d


def classify_setup(setup: ProblemSetup, p: Optional[float] = None) -> BlowupClassification:
    """Combine the theorem lookup with the computed blow-up time and its bounds."""
    cls = classify(setup.lam, data_class_of(setup), p)
    est = blowup_time_estimate(setup)
    tb = time_bounds(setup)
    lo, hi = tb.lower, tb.upper
    ok = True
    if math.isfinite(est.value):
        tol = max(est.error, 1e-9 * est.value)
        if lo is not None and est.value < lo - tol:
            ok = False
        if hi is not None and est.value > hi + tol:
            ok = False
    elif hi is not None:
        ok = False
    comparison = {
        "energy": tb.energy_comparison,
        "cubic": tb.cubic_comparison,
        "hypotheses": tb.hypotheses,
        "notes": list(tb.notes),
    }
    return BlowupClassification(
        cls.data_class, setup.lam, cls.verdict, est.value, est.error, est.method, (lo, hi), comparison, ok, cls
    )


@dataclass
class RegularityReport:
    """Samples of ``||u_x||_p``, ``E`` and ``dE/dt`` approaching ``eta_star`` with measured trends."""

    lam: float
    p: float
    data_class: str
    eta_star: float
    J: list[float]
    norm_samples: list[tuple[float, float]]
    energy_samples: list[tuple[float, float, float]]
    extrema_samples: list[tuple[float, float, float]]
    trends: dict[str, Trend]
    classification: BlowupClassification

    def predicted(self) -> dict[str, str]:
        """Theorem limits for the quantities that have a trend."""
        th = self.classification.theorem
        return {"lp": th.lp_limit, "E": th.energy, "dE/dt": th.energy_rate}

    def agreement(self) -> dict[str, Optional[bool]]:
        """Per quantity: does the measured trend match the theorem (``None`` if unclassified)."""
        out: dict[str, Optional[bool]] = {}
        for key, want in self.predicted().items():
            got = self.trends[key].limit
            if want in ("not classified",):
                out[key] = None
            elif want == "bounded":
                out[key] = got in ("bounded", "vanishes", "constant")
            elif want == "zero":
                out[key] = got == "constant" and all(abs(s[2]) <= 1e-8 for s in self.energy_samples)
            elif want == "constant":
                out[key] = got == "constant"
            else:
                out[key] = got == want
        return out

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "p": self.p,
            "data_class": self.data_class,
            "eta_star": self.eta_star,
            "J": self.J,
            "norm_samples": [list(s) for s in self.norm_samples],
            "energy_samples": [list(s) for s in self.energy_samples],
            "extrema_samples": [list(s) for s in self.extrema_samples],
            "trends": {k: {**asdict(v), "limit": v.limit} for k, v in self.trends.items()},
            "predicted": self.predicted(),
            "agreement": self.agreement(),
            "classification": self.classification.to_dict(),
        }


def regularity_report(
    setup: ProblemSetup,
    p: float = 2.0,
    samples: int = 11,
    j_range: tuple[float, float] = TREND_J_RANGE,
) -> RegularityReport:
    """Measured trends of ``M``, ``m``, ``||u_x||_p``, ``E`` and ``dE/dt`` as ``eta -> eta_star``.

    Samples are spaced geometrically in the strain factor ``J`` at the
    critical locations over ``j_range``.
    """
    if setup.lam == 0:
        raise DomainError("no blow-up approach to sample when lam = 0")
    Js = np.geomspace(j_range[1], j_range[0], samples)
    etas = [eta_for_critical_jacobian(setup, j) for j in Js]
    norms, ens, exts = [], [], []
    for eta in etas:
        M, m = extrema_track(setup, eta)
        E, Ed = energy(setup, eta)
        norms.append((eta, lp_norm(setup, p, eta)))
        ens.append((eta, E, Ed))
        exts.append((eta, M, m))
    cols = {
        "M": [s[1] for s in exts],
        "m": [s[2] for s in exts],
        "lp": [s[1] for s in norms],
        "E": [s[1] for s in ens],
        "dE/dt": [s[2] for s in ens],
    }
    trends = {k: detect_trend(Js, v) for k, v in cols.items()}
    return RegularityReport(
        setup.lam, p, data_class_of(setup), setup.eta_star, Js.tolist(), norms, ens, exts, trends, classify_setup(setup, p)
    )
