"""Lagrangian representation of periodic solutions.

The equation is ``u_xt + u u_xx - lam u_x^2 = I(t)`` on the unit circle, with
``I(t) = -(lam + 1) int u_x^2 dx`` keeping the mean of ``u_x`` at zero.  Along
characteristics ``gamma(alpha, t)`` the solution is an explicit functional of
the initial slope through the strain factor

    J(alpha, eta) = 1 - lam * eta * u0'(alpha)

and the weighted means ``Kbar_i(eta) = int_0^1 J^(-(i + 1/lam)) d alpha``.  The
auxiliary time ``eta`` runs over ``[0, eta_star)`` where ``J`` first vanishes,
and is linked to physical time by ``dt/deta = Kbar_0(eta)^(2 lam)``.

When ``lam = 0`` the weight ``J^(-1/lam)`` is replaced by its limit
``exp(eta u0')`` and ``eta`` coincides with physical time.

Every public function takes a :class:`ProblemSetup`.  Quantities depending on
``eta`` are computed on a per-``eta`` :class:`Frame` that carries a graded
Gauss-Legendre rule in ``alpha``; frames are memoised on the setup.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .data import InitialData, PiecewiseConstantSlope, PiecewiseLinearSlope, SlopeExtrema, SmoothFourier, is_odd
from .errors import ConfigError, DomainError, GuardBandError, InvariantViolation
from .quadrature import cumulative, gauss_legendre, merge_edges, panel_rule
from .special import quadratic_power_integral

GL_ORDER = 20
TIME_GL_ORDER = 16
EQ_CHECK_RTOL = 1e-8
MAX_CACHED_FRAMES = 4096

# exponent of the local shape |x|^k of u0' at the critical point, as 1/k
_ORDER_THETA = {"quadratic": 0.5, "corner": 1.0, "plateau": 0.0}


def _periodic_offset(x: np.ndarray, c: float) -> np.ndarray:
    """Signed offset ``x - c`` folded into ``[-1/2, 1/2)``."""
    return np.mod(x - c + 0.5, 1.0) - 0.5


# ---------------------------------------------------------------------------
# Setup
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProblemSetup:
    """The parameter ``lam``, the initial data and derived constants.

    ``guard`` is the relative width of the band ``[eta_star (1 - guard),
    eta_star)`` in which public evaluations are refused.
    """

    lam: float
    data: InitialData
    guard: float = 1e-6
    extrema: SlopeExtrema = field(init=False, repr=False)

    def __post_init__(self) -> None:
        lam = float(self.lam)
        if not math.isfinite(lam):
            raise ConfigError("lambda must be finite")
        if not 0.0 < self.guard < 0.1:
            raise ConfigError("guard band must lie in (0, 0.1)")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "extrema", self.data.slope_extrema())
        object.__setattr__(self, "_frames", {})
        object.__setattr__(self, "_lock", threading.Lock())

    # -- constants ---------------------------------------------------------

    @property
    def critical_is_max(self) -> bool:
        """``J`` degenerates where ``u0'`` is maximal for ``lam >= 0``."""
        return self.lam >= 0

    @property
    def ext(self) -> float:
        e = self.extrema
        return e.max_value if self.critical_is_max else e.min_value

    @property
    def critical_locations(self) -> tuple[float, ...]:
        e = self.extrema
        return e.max_locations if self.critical_is_max else e.min_locations

    @property
    def critical_c(self) -> tuple[float, ...]:
        e = self.extrema
        return e.max_c if self.critical_is_max else e.min_c

    @property
    def critical_order(self) -> str:
        e = self.extrema
        return e.max_order if self.critical_is_max else e.min_order

    @property
    def eta_star(self) -> float:
        if self.lam == 0:
            return math.inf
        return 1.0 / (self.lam * self.ext)

    @property
    def eta_limit(self) -> float:
        """Largest ``eta`` accepted by public functions."""
        return self.eta_star * (1.0 - self.guard)

    @cached_property
    def odd(self) -> bool:
        return is_odd(self.data)

    @cached_property
    def _base_panels(self) -> int:
        if isinstance(self.data, SmoothFourier):
            return max(16, 4 * self.data.max_wavenumber)
        return 8

    # -- pointwise strain factor ------------------------------------------

    def slope_gap(self, x: np.ndarray) -> np.ndarray:
        """``ext - u0'(x)``, accurate near the critical locations."""
        x = np.asarray(x, dtype=float)
        data = self.data
        if not isinstance(data, SmoothFourier):
            return self.ext - data.slope(x)
        locs = np.asarray(self.critical_locations)
        dist = np.abs(_periodic_offset(x[..., None], locs))
        nearest = np.argmin(dist, axis=-1)
        out = np.empty_like(x)
        for j, c in enumerate(locs):
            sel = nearest == j
            if np.any(sel):
                base = self.ext - float(data.slope(c))
                out[sel] = base - data.slope_delta(x[sel], c)
        return out

    def jacobian(self, x: np.ndarray, eta: float) -> np.ndarray:
        """``J(x, eta)`` written as ``J_crit + lam eta (ext - u0')`` to avoid cancellation."""
        x = np.asarray(x, dtype=float)
        if self.lam == 0:
            return np.ones_like(x)
        lam = self.lam
        gap = self.eta_star - eta
        spread = np.maximum(lam * eta * self.slope_gap(x), 0.0)
        return lam * self.ext * gap + spread

    def critical_jacobian(self, eta: float) -> float:
        """``J`` at the critical locations: ``1 - lam eta ext``."""
        if self.lam == 0:
            return 1.0
        return self.lam * self.ext * (self.eta_star - eta)

    # -- frames ------------------------------------------------------------

    def check_eta(self, eta: float) -> float:
        eta = float(eta)
        if not math.isfinite(eta) or eta < 0:
            raise DomainError(f"eta = {eta} must be finite and non-negative")
        if self.lam != 0:
            if eta >= self.eta_star:
                raise DomainError(f"eta = {eta} is not below eta_star = {self.eta_star}")
            if eta > self.eta_limit:
                raise GuardBandError(
                    f"eta = {eta} lies in the guard band above {self.eta_limit}"
                )
        return eta

    def frame(self, eta: float) -> "Frame":
        """Memoised :class:`Frame` at ``eta`` (no range check)."""
        key = float(eta)
        frames = self._frames
        fr = frames.get(key)
        if fr is None:
            fr = Frame(self, key)
            with self._lock:
                if len(frames) >= MAX_CACHED_FRAMES:
                    frames.clear()
                frames[key] = fr
        return fr

    def window_widths(self, eta: float) -> list[tuple[float, float, float, float]]:
        """Per critical location: ``(c, left width, right width, curvature)``.

        The width is where ``J`` doubles from its critical value; the curvature
        is the coefficient of the local quadratic model of ``J`` (zero when the
        extremum is not a non-degenerate quadratic one).
        """
        if self.lam == 0 or eta == 0:
            return []
        delta = self.critical_jacobian(eta)
        lam_eta = abs(self.lam) * eta
        out = []
        order = self.critical_order
        if order == "plateau":
            return []
        for j, c in enumerate(self.critical_locations):
            if order == "quadratic":
                curv = lam_eta * abs(self.critical_c[j])
                # curv underflows to zero only for denormal eta, where J is flat
                w = math.sqrt(delta / curv) if curv > 0 else math.inf
                out.append((c, w, w, curv))
            elif order == "corner":
                left, right = self._corner_slopes(c)
                wl = delta / (lam_eta * abs(left)) if lam_eta * left else math.inf
                wr = delta / (lam_eta * abs(right)) if lam_eta * right else math.inf
                out.append((c, wl, wr, 0.0))
            else:
                out.append((c, self._doubling_width(c, -1, eta), self._doubling_width(c, 1, eta), 0.0))
        return out

    def _corner_slopes(self, c: float) -> tuple[float, float]:
        data = self.data
        assert isinstance(data, PiecewiseLinearSlope)
        bp = np.asarray(data.breakpoints)
        j = int(np.argmin(np.abs(bp[:-1] - c)))
        return data.curvatures[j - 1], data.curvatures[j]

    def _doubling_width(self, c: float, side: int, eta: float) -> float:
        delta = self.critical_jacobian(eta)
        reach = 0.5 / self._base_panels

        def f(w: float) -> float:
            return float(self.jacobian(np.array([c + side * w]), eta)[0]) - 2 * delta

        if f(reach) <= 0:
            return math.inf
        return brentq(f, 0.0, reach, xtol=1e-300, rtol=1e-10)

    def partition(self, eta: float) -> np.ndarray:
        nb = self._base_panels
        pts = [np.linspace(0.0, 1.0, nb + 1), np.asarray(self.data.breakpoints, dtype=float)]
        reach = 0.5 / nb
        for c, wl, wr, _ in self.window_widths(eta):
            pts.append(np.array([c]))
            for side, w in ((-1, wl), (1, wr)):
                steps = []
                # never grade below ~1e-15 of the panel scale
                w = max(w, 1e-15 * reach)
                while w < reach:
                    steps.append(c + side * w)
                    w *= 2
                pts.append(np.mod(np.array(steps), 1.0))
        return merge_edges(np.concatenate(pts))


# ---------------------------------------------------------------------------
# Per-eta frame
# ---------------------------------------------------------------------------


class Frame:
    """Quadrature nodes in ``alpha`` and weighted moments at a fixed ``eta``.

    With ``K0 = J^(-1/lam)`` (``exp(eta u0')`` when ``lam = 0``) and
    ``y = u0'/J`` the slope along characteristics is
    ``u_x = Kbar_0^(-2 lam) (y - <y>)``, where ``<.>`` averages against
    ``K0 / Kbar_0``.
    """

    def __init__(self, setup: ProblemSetup, eta: float):
        self.setup = setup
        self.eta = eta
        self.lam = setup.lam
        self.edges = setup.partition(eta)
        self.x, self.w = panel_rule(self.edges, GL_ORDER)
        self.slope = setup.data.slope(self.x)
        self.J = setup.jacobian(self.x, eta)
        self.K0 = self.weight(self.J, self.slope)
        self.y = self.slope / self.J
        self.kbar0 = float(np.dot(self.w, self.K0))
        self.mean_y = float(np.dot(self.w, self.K0 * self.y)) / self.kbar0
        self._kbar: dict[int, float] = {}

    def weight(self, J: np.ndarray, slope: np.ndarray) -> np.ndarray:
        if self.lam == 0:
            return np.exp(self.eta * slope)
        return J ** (-1.0 / self.lam)

    def pointwise(self, alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(J, K0, y)`` at arbitrary ``alpha``."""
        alpha = np.asarray(alpha, dtype=float)
        s = self.setup.data.slope(alpha)
        J = self.setup.jacobian(alpha, self.eta)
        return J, self.weight(J, s), s / J

    @property
    def w1(self) -> float:
        """``int u0' J^(-1 - 1/lam) d alpha``, i.e. ``(Kbar_1 - Kbar_0)/(lam eta)``."""
        return self.mean_y * self.kbar0

    def central_moment(self, order: int) -> float:
        d = self.y - self.mean_y
        return float(np.dot(self.w, self.K0 * d**order)) / self.kbar0

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.w, values))

    def kbar(self, i: int) -> float:
        v = self._kbar.get(i)
        if v is None:
            v = _kbar_strategy(self, i)
            self._kbar[i] = v
        return v

    def cumulative(self, func, targets: np.ndarray) -> np.ndarray:
        return cumulative(func, self.edges, targets, GL_ORDER)


# ---------------------------------------------------------------------------
# Kbar strategies
# ---------------------------------------------------------------------------


def _kbar_strategy(fr: Frame, i: int) -> float:
    setup = fr.setup
    if setup.lam == 0:
        raise DomainError("Kbar_i is undefined for lambda = 0")
    if fr.eta == 0:
        return 1.0
    e = i + 1.0 / setup.lam
    data = setup.data
    if isinstance(data, PiecewiseConstantSlope):
        return _kbar_piecewise_constant(setup, e, fr.eta)
    if isinstance(data, PiecewiseLinearSlope):
        return _kbar_piecewise_linear(setup, e, fr.eta)
    return _kbar_smooth(fr, e)


def _kbar_piecewise_constant(setup: ProblemSetup, e: float, eta: float) -> float:
    data = setup.data
    mids = (np.asarray(data.breakpoints[:-1]) + np.asarray(data.breakpoints[1:])) / 2
    J = setup.jacobian(mids, eta)
    with np.errstate(divide="ignore"):
        return float(np.sum(data.lengths * J ** (-e)))


def _power_integral(j0: float, j1: float, h: float, e: float) -> float:
    """``int_0^h (j0 + (j1 - j0) x/h)^(-e) dx`` for non-negative endpoint values."""
    if j0 > j1:
        j0, j1 = j1, j0
    if j0 == j1:
        return h * j0 ** (-e)
    if j0 == 0.0:
        if e >= 1.0:
            return math.inf
        return h * j1 ** (1.0 - e) / ((1.0 - e) * j1)
    slope = (j1 - j0) / h
    L = math.log1p((j1 - j0) / j0)
    if e == 1.0:
        return L / slope
    return j0 ** (1.0 - e) * math.expm1((1.0 - e) * L) / ((1.0 - e) * slope)


def _kbar_piecewise_linear(setup: ProblemSetup, e: float, eta: float) -> float:
    bp = np.asarray(setup.data.breakpoints)
    J = setup.jacobian(bp, eta)
    # jacobian() folds x = 1 onto 0; the slope is continuous so this is harmless.
    return float(sum(_power_integral(J[k], J[k + 1], bp[k + 1] - bp[k], e) for k in range(bp.size - 1)))


def _kbar_smooth(fr: Frame, e: float) -> float:
    """Graded Gauss-Legendre sum, with the innermost window around each critical
    point integrated as (exact model) + (quadrature of the remainder)."""
    f = fr.J ** (-e)
    total = float(np.dot(fr.w, f))
    if not (e < 2.0 and e != 0.5):
        return total
    delta = fr.setup.critical_jacobian(fr.eta)
    for c, w, _, curv in fr.setup.window_widths(fr.eta):
        if curv <= 0 or not math.isfinite(w) or w >= 0.5 / fr.setup._base_panels:
            continue
        d = _periodic_offset(fr.x, c)
        inside = np.abs(d) < w
        model = (delta + curv * d[inside] ** 2) ** (-e)
        c0 = min(curv * w * w, delta)
        exact = 2.0 * w * quadratic_power_integral(e, c0, delta, 1.0)
        total += exact - float(np.dot(fr.w[inside], model))
    return total


# ---------------------------------------------------------------------------
# Public evaluation functions
# ---------------------------------------------------------------------------


def make_setup(lam: float, data: InitialData, guard: float = 1e-6) -> ProblemSetup:
    return ProblemSetup(lam, data, guard)


def jacobian_factor(setup: ProblemSetup, alpha, eta: float) -> np.ndarray:
    """``J(alpha, eta) = 1 - lam eta u0'(alpha)``."""
    eta = setup.check_eta(eta)
    return setup.jacobian(np.asarray(alpha, dtype=float), eta)


def kbar(setup: ProblemSetup, i: int, eta: float) -> float:
    """``Kbar_i(eta) = int_0^1 J^(-(i + 1/lam)) d alpha``."""
    if setup.lam == 0:
        raise DomainError("Kbar_i is undefined for lambda = 0")
    if i < 0 or int(i) != i:
        raise DomainError(f"moment index must be a non-negative integer, got {i}")
    eta = setup.check_eta(eta)
    return setup.frame(eta).kbar(int(i))


def phi1(setup: ProblemSetup, eta: float) -> float:
    """``phi1 = Kbar_0^lam``."""
    return kbar(setup, 0, eta) ** setup.lam


def ux(setup: ProblemSetup, alpha, eta: float, check: bool = True) -> np.ndarray:
    """``u_x(gamma(alpha, t), t)`` at auxiliary time ``eta``.

    Uses the form ``Kbar_0^(-2 lam) (u0'/J - Kbar_0^(-1) int u0' J^(-1-1/lam))``,
    which is regular at ``eta = 0``.  When ``check`` is set and ``eta`` is not
    tiny, the form ``(1/J - Kbar_1/Kbar_0) / (lam eta Kbar_0^(2 lam))`` is also
    evaluated and the two must agree.
    """
    eta = setup.check_eta(eta)
    alpha = np.asarray(alpha, dtype=float)
    fr = setup.frame(eta)
    J, _, y = fr.pointwise(alpha)
    lam = setup.lam
    out = fr.kbar0 ** (-2 * lam) * (y - fr.mean_y)
    if check and lam != 0 and eta >= 1e-3 * setup.eta_star:
        k0, k1 = fr.kbar(0), fr.kbar(1)
        alt = (1.0 / J - k1 / k0) / (lam * eta * k0 ** (2 * lam))
        scale = np.maximum(np.abs(out), fr.kbar0 ** (-2 * lam) * abs(fr.mean_y) + 1e-300)
        bad = np.abs(alt - out) > EQ_CHECK_RTOL * np.maximum(scale, 1.0)
        if np.any(bad):
            raise InvariantViolation(
                f"the two u_x formulas disagree at eta = {eta}: "
                f"max diff {np.max(np.abs(alt - out)):.3e}"
            )
    return out


def ux_from_kbar(setup: ProblemSetup, alpha, eta: float) -> np.ndarray:
    """``u_x`` from ``(1/J - Kbar_1/Kbar_0) / (lam eta Kbar_0^(2 lam))`` (needs ``eta > 0``)."""
    eta = setup.check_eta(eta)
    if setup.lam == 0 or eta == 0:
        raise DomainError("this form needs lam != 0 and eta > 0")
    k0, k1 = kbar(setup, 0, eta), kbar(setup, 1, eta)
    J = setup.jacobian(np.asarray(alpha, dtype=float), eta)
    return (1.0 / J - k1 / k0) / (setup.lam * eta * k0 ** (2 * setup.lam))


def gamma_alpha(setup: ProblemSetup, alpha, eta: float) -> np.ndarray:
    """Jacobian ``d gamma / d alpha = J^(-1/lam) / Kbar_0``."""
    eta = setup.check_eta(eta)
    fr = setup.frame(eta)
    _, K0, _ = fr.pointwise(np.asarray(alpha, dtype=float))
    return K0 / fr.kbar0


def uxx(setup: ProblemSetup, alpha, eta: float) -> np.ndarray:
    """``u_xx(gamma(alpha, t), t) = u0''(alpha) gamma_alpha^(2 lam - 1)``.

    Defined wherever ``u0''`` is; for piecewise-constant slopes it vanishes
    away from the breakpoints.
    """
    ga = gamma_alpha(setup, alpha, eta)
    return setup.data.curvature(np.asarray(alpha, dtype=float)) * ga ** (2 * setup.lam - 1)


def energy(setup: ProblemSetup, eta: float) -> float:
    """``E = int u_x^2 dx``, via the variance of ``u0'/J`` under the weight ``J^(-1/lam)``.

    Algebraically identical to ``(Kbar_0 Kbar_2 - Kbar_1^2) / (lam eta Kbar_0^(1 + 2 lam))^2``
    but free of the ``0/0`` at ``eta = 0``.
    """
    eta = setup.check_eta(eta)
    fr = setup.frame(eta)
    return fr.kbar0 ** (-4 * setup.lam) * fr.central_moment(2)


def nonlocal_term(setup: ProblemSetup, eta: float) -> float:
    """``I = -(lam + 1) int u_x^2 dx``."""
    return -(setup.lam + 1.0) * energy(setup, eta)


def extrema_track(setup: ProblemSetup, eta: float, grid: int = 2048) -> tuple[float, float]:
    """``(M, m)``: ``u_x`` along the characteristics from the slope extrema.

    ``u_x`` is increasing in ``u0'`` for every ``lam``, so these are the spatial
    max and min; a grid sample is checked against them.
    """
    e = setup.extrema
    locs = np.array([e.max_locations[0], e.min_locations[0]])
    M, m = (float(v) for v in ux(setup, locs, eta, check=False))
    sample = ux(setup, (np.arange(grid) + 0.5) / grid, eta, check=False)
    slack = 1e-10 * max(abs(M), abs(m), 1.0)
    if sample.max() > M + slack or sample.min() < m - slack:
        raise InvariantViolation(f"grid sample escapes [m, M] at eta = {eta}")
    return M, m


# ---------------------------------------------------------------------------
# Tail behaviour near eta_star
# ---------------------------------------------------------------------------


def kbar_exponent(setup: ProblemSetup, i: int) -> tuple[float, bool]:
    """Leading power ``q`` with ``Kbar_i ~ J_crit^q`` as ``eta -> eta_star``.

    Returns ``(q, log)``; ``log`` flags a logarithmic divergence (``q = 0``).
    A non-negative ``q`` means ``Kbar_i`` stays bounded.  Raises for degenerate
    smooth extrema, whose local order is not resolved here.
    """
    if setup.lam == 0:
        raise DomainError("no eta_star when lambda = 0")
    order = setup.critical_order
    if order not in _ORDER_THETA:
        raise DomainError(f"tail exponent unknown for a {order} extremum")
    theta = _ORDER_THETA[order]
    e = i + 1.0 / setup.lam
    if order == "plateau":
        return (-e if e > 0 else 0.0), False
    if e > theta:
        return theta - e, False
    return 0.0, e == theta


def kbar_limit(setup: ProblemSetup, i: int) -> float:
    """``lim_{eta -> eta_star} Kbar_i``, or ``inf`` when it diverges.

    For smooth data the limit is extrapolated from two evaluations using the
    known correction exponent ``theta - e``.
    """
    q, log = kbar_exponent(setup, i)
    if q < 0 or log:
        return math.inf
    data = setup.data
    e = i + 1.0 / setup.lam
    if isinstance(data, PiecewiseConstantSlope):
        return _kbar_piecewise_constant(setup, e, setup.eta_star)
    if isinstance(data, PiecewiseLinearSlope):
        return _kbar_piecewise_linear(setup, e, setup.eta_star)
    r = _ORDER_THETA[setup.critical_order] - e
    g1 = 1e-6 * setup.eta_star
    ratio = 64.0
    k1 = setup.frame(setup.eta_star - g1).kbar(i)
    k2 = setup.frame(setup.eta_star - g1 / ratio).kbar(i)
    f = ratio ** (-r)
    return (k2 - f * k1) / (1.0 - f)


# ---------------------------------------------------------------------------
# Time map
# ---------------------------------------------------------------------------


class TimeMap:
    """Tabulated ``t(eta) = int_0^eta Kbar_0^(2 lam)`` on panels graded toward ``eta_star``.

    Values between panel edges are obtained by Gauss-Legendre quadrature on the
    partial panel, so the map is exact to quadrature accuracy everywhere.
    """

    def __init__(self, setup: ProblemSetup):
        if setup.lam == 0:
            raise DomainError("physical and auxiliary time coincide when lambda = 0")
        self.setup = setup
        es = setup.eta_star
        edges = list(np.linspace(0.0, es / 2, 5))
        g = 0.25
        while g > setup.guard:
            edges.append(es * (1.0 - g))
            g /= 2
        edges.append(setup.eta_limit)
        self.edges = np.array(edges)
        nodes, weights = panel_rule(self.edges, TIME_GL_ORDER)
        vals = np.array([self.rate(mu) for mu in nodes]) * weights
        self.cum = np.concatenate([[0.0], np.cumsum(vals.reshape(-1, TIME_GL_ORDER).sum(axis=1))])

    def rate(self, eta: float) -> float:
        """``dt/deta = Kbar_0^(2 lam)``."""
        return self.setup.frame(eta).kbar(0) ** (2 * self.setup.lam)

    def _partial(self, k: int, eta: float) -> float:
        a = self.edges[k]
        if eta == a:
            return 0.0
        nodes, weights = panel_rule(np.array([a, eta]), TIME_GL_ORDER)
        return float(sum(w * self.rate(mu) for mu, w in zip(nodes, weights)))

    def t(self, eta: float) -> float:
        k = int(np.clip(np.searchsorted(self.edges, eta, side="right") - 1, 0, self.edges.size - 2))
        return float(self.cum[k]) + self._partial(k, eta)

    @property
    def t_limit(self) -> float:
        return float(self.cum[-1])

    def eta(self, t: float, rtol: float = 1e-10) -> float:
        if t < 0:
            raise DomainError(f"t = {t} must be non-negative")
        if t == 0:
            return 0.0
        if t > self.t_limit:
            raise GuardBandError(f"t = {t} maps into the guard band below eta_star")
        k = int(np.clip(np.searchsorted(self.cum, t, side="right") - 1, 0, self.edges.size - 2))
        a, b = self.edges[k], self.edges[k + 1]
        base = float(self.cum[k])
        tol = rtol * (1.0 + t)
        return _monotone_solve(lambda e: base + self._partial(k, e) - t, a, b, tol, self.rate)


def _monotone_solve(f, a: float, b: float, tol: float, deriv) -> float:
    """Root of an increasing ``f`` on ``[a, b]``: safeguarded Newton with bisection."""
    lo, hi = a, b
    x = 0.5 * (a + b)
    for _ in range(200):
        fx = f(x)
        if abs(fx) <= tol:
            # one more Newton step from the residual already in hand
            return min(max(x - fx / deriv(x), lo), hi)
        if fx > 0:
            hi = x
        else:
            lo = x
        step = fx / deriv(x)
        nx = x - step
        if not lo < nx < hi:
            nx = 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * max(abs(hi), 1.0):
            return nx
        x = nx
    raise DomainError("time inversion did not converge")


def time_map(setup: ProblemSetup) -> TimeMap:
    tm = setup.__dict__.get("_time_map")
    if tm is None:
        tm = TimeMap(setup)
        setup.__dict__["_time_map"] = tm
    return tm


def time_of_eta(setup: ProblemSetup, eta: float) -> float:
    """Physical time reached at auxiliary time ``eta``."""
    eta = setup.check_eta(eta)
    if setup.lam == 0:
        return eta
    return time_map(setup).t(eta)


def eta_of_time(setup: ProblemSetup, t: float) -> float:
    """Inverse of :func:`time_of_eta`: bracketed monotone solve to ``1e-10 (1 + t)``, then one Newton step."""
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"t = {t} must be finite and non-negative")
    if setup.lam == 0:
        return t
    return time_map(setup).eta(t)


@dataclass(frozen=True)
class BlowupEstimate:
    value: float
    error: float
    method: str
    exponent: Optional[float] = None


def blowup_time_estimate(setup: ProblemSetup) -> BlowupEstimate:
    """``t_star = int_0^eta_star Kbar_0^(2 lam)``, with the method used.

    The integrand behaves like ``(eta_star - eta)^s`` with ``s = 2 lam q`` and
    ``q`` from :func:`kbar_exponent`.  The integral is infinite when
    ``s <= -1`` (or for ``lam = 0``).  Otherwise the tabulated map gives
    ``t(eta_limit)`` and the remaining tail is integrated with the algebraic
    weight ``(eta_star - eta)^s``.  For degenerate extrema the tail is
    extrapolated from a geometric sequence of gaps instead.
    """
    lam = setup.lam
    if lam == 0:
        return BlowupEstimate(math.inf, 0.0, "global")
    es = setup.eta_star
    try:
        q, log = kbar_exponent(setup, 0)
    except DomainError:
        return _blowup_by_extrapolation(setup)
    s = 2 * lam * q
    if s <= -1 and not log:
        return BlowupEstimate(math.inf, 0.0, "divergent tail", s)
    tm = time_map(setup)
    lo = setup.eta_limit
    s_w = s if s < 0 else 0.0

    def h(mu: float) -> float:
        # the Clenshaw-Curtis rule behind the weighted quadrature touches eta_star itself
        gap = max(es - mu, 1e-14 * es)
        return tm.rate(es - gap) * gap ** (-s_w)

    with warnings.catch_warnings():
        # roundoff warnings here are reflected in the returned error estimate
        warnings.simplefilter("ignore", IntegrationWarning)
        tail, err = quad(h, lo, es, weight="alg", wvar=(0.0, s_w), epsabs=0.0, epsrel=1e-10, limit=200)
    return BlowupEstimate(tm.t_limit + tail, err + 1e-12 * tm.t_limit, "tail model", s)


def _blowup_by_extrapolation(setup: ProblemSetup) -> BlowupEstimate:
    tm = time_map(setup)
    es = setup.eta_star
    gaps = setup.guard * es * np.array([64.0, 8.0, 1.0])
    t0, t1, t2 = (tm.t(es - g) for g in gaps)
    d1, d2 = t1 - t0, t2 - t1
    if d2 <= 0 or d2 >= d1:
        # Increments not shrinking geometrically: treat as divergent.
        return BlowupEstimate(math.inf, math.inf, "extrapolation failed")
    extra = d2 * d2 / (d1 - d2)
    return BlowupEstimate(t2 + extra, abs(extra) + abs(d2), "extrapolation")


def blowup_time(setup: ProblemSetup) -> float:
    """Blow-up time ``t_star`` (``inf`` for global solutions)."""
    return blowup_time_estimate(setup).value


# ---------------------------------------------------------------------------
# Characteristics and the velocity
# ---------------------------------------------------------------------------


def _anchor_velocity(fr: Frame) -> float:
    """``d/dt gamma(0, t)`` keeping ``int u dx = 0``."""
    K0 = lambda a: fr.pointwise(a)[1]
    P = fr.cumulative(K0, fr.x)
    gP = float(np.dot(fr.w, fr.K0 * fr.y * P))
    bracket = fr.kbar0 * fr.w1 / 2 - gP
    return -fr.kbar0 ** (-2 * fr.lam - 2) * bracket


class _AnchorMap:
    """``gamma(0, t)`` tabulated against ``eta`` on the time-map panels."""

    def __init__(self, setup: ProblemSetup):
        self.setup = setup
        if setup.lam == 0:
            self.edges = None
            return
        tm = time_map(setup)
        self.edges = tm.edges
        nodes, weights = panel_rule(self.edges, TIME_GL_ORDER)
        vals = np.array([self.rate(mu) for mu in nodes]) * weights
        self.cum = np.concatenate([[0.0], np.cumsum(vals.reshape(-1, TIME_GL_ORDER).sum(axis=1))])

    def rate(self, eta: float) -> float:
        """``d gamma(0)/d eta`` (``d/dt`` when ``lam = 0``)."""
        fr = self.setup.frame(eta)
        v = _anchor_velocity(fr)
        if self.setup.lam == 0:
            return v
        return v * fr.kbar(0) ** (2 * self.setup.lam)

    def value(self, eta: float) -> float:
        if eta == 0:
            return 0.0
        if self.edges is None:
            n = max(1, int(math.ceil(eta / 0.25)))
            edges = np.linspace(0.0, eta, n + 1)
            k = 0
            base = 0.0
        else:
            k = int(np.clip(np.searchsorted(self.edges, eta, side="right") - 1, 0, self.edges.size - 2))
            base = float(self.cum[k])
            edges = np.array([self.edges[k], eta])
        nodes, weights = panel_rule(edges, TIME_GL_ORDER)
        return base + float(sum(w * self.rate(mu) for mu, w in zip(nodes, weights)))


def _anchor(setup: ProblemSetup) -> _AnchorMap:
    am = setup.__dict__.get("_anchor_map")
    if am is None:
        am = _AnchorMap(setup)
        setup.__dict__["_anchor_map"] = am
    return am


def anchor_position(setup: ProblemSetup, eta: float) -> float:
    """``gamma(0, t(eta))``; identically zero for odd data."""
    eta = setup.check_eta(eta)
    if setup.odd:
        return 0.0
    return _anchor(setup).value(eta)


def anchor_velocity(setup: ProblemSetup, eta: float) -> float:
    eta = setup.check_eta(eta)
    return _anchor_velocity(setup.frame(eta))


def characteristic_at_eta(setup: ProblemSetup, alpha, eta: float) -> np.ndarray:
    """``gamma(alpha, t(eta)) = gamma(0, t) + Kbar_0^(-1) int_0^alpha J^(-1/lam)``.

    Labels outside ``[0, 1]`` use ``gamma(alpha + 1) = gamma(alpha) + 1``.
    """
    eta = setup.check_eta(eta)
    fr = setup.frame(eta)
    alpha = np.asarray(alpha, dtype=float)
    whole = np.floor(alpha)
    P = fr.cumulative(lambda a: fr.pointwise(a)[1], alpha - whole)
    return anchor_position(setup, eta) + P / fr.kbar0 + whole


def characteristic(setup: ProblemSetup, alpha, t: float) -> np.ndarray:
    """Position at time ``t`` of the particle that started at ``alpha``."""
    return characteristic_at_eta(setup, alpha, eta_of_time(setup, t))


def u_along_at_eta(setup: ProblemSetup, alpha, eta: float) -> np.ndarray:
    eta = setup.check_eta(eta)
    fr = setup.frame(eta)
    alpha = np.mod(np.asarray(alpha, dtype=float), 1.0)
    P = fr.cumulative(lambda a: fr.pointwise(a)[1], alpha)

    def g(a):
        _, K0, y = fr.pointwise(a)
        return K0 * y

    W = fr.cumulative(g, alpha)
    base = 0.0 if setup.odd else _anchor_velocity(fr)
    return base + fr.kbar0 ** (-2 * setup.lam - 1) * (W - P * fr.mean_y)


def u_along(setup: ProblemSetup, alpha, t: float) -> np.ndarray:
    """``u(gamma(alpha, t), t)``, normalised so that ``int u dx = 0``."""
    return u_along_at_eta(setup, alpha, eta_of_time(setup, t))


def alpha_of_x(setup: ProblemSetup, x, eta: float, n_alpha: int = 2048) -> np.ndarray:
    """Label ``alpha`` of the particle at ``x`` (taken mod 1) at auxiliary time ``eta``.

    Inverts the characteristic map by cubic Hermite interpolation on a
    uniform ``alpha`` grid, using the exact derivative ``1/gamma_alpha``, then
    applies one Newton step.
    """
    eta = setup.check_eta(eta)
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    a = np.linspace(0.0, 1.0, n_alpha + 1)[:-1]
    g = characteristic_at_eta(setup, a, eta)
    ga = gamma_alpha(setup, a, eta)
    shift = math.floor(g[0])
    g = g - shift
    ae = np.concatenate([a - 1, a, a + 1, [2.0]])
    ge = np.concatenate([g - 1, g, g + 1, [g[0] + 2]])
    de = 1.0 / np.concatenate([ga, ga, ga, ga[:1]])
    alpha = CubicHermiteSpline(ge, ae, de)(x)
    resid = characteristic_at_eta(setup, alpha, eta) - shift - x
    alpha = alpha - resid / gamma_alpha(setup, alpha, eta)
    return alpha


def ux_eulerian(setup: ProblemSetup, x, t: float, n_alpha: int = 2048) -> np.ndarray:
    """``u_x(x, t)`` on Eulerian points ``x`` from the representation."""
    eta = eta_of_time(setup, t)
    alpha = alpha_of_x(setup, x, eta, n_alpha)
    return ux(setup, np.mod(alpha, 1.0), eta, check=False)
