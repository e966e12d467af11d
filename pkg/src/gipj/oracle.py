"""Independent references for the representation formulas.

Nothing here calls into :mod:`gipj.representation`'s quadrature: the PDE is
integrated directly by a Fourier collocation method, and the ``Kbar``
integrals are recomputed by refined trapezoid sums with Richardson
extrapolation.  :func:`compare` is the only place where the two meet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .data import PiecewiseConstantSlope, PiecewiseLinearSlope, SmoothFourier
from .errors import ConvergenceError, DomainError
from .representation import ProblemSetup, blowup_time, ux_eulerian

PDE_RTOL = 1e-9
PDE_ATOL = 1e-12
ROMBERG_MAX_LEVEL = 22


# ---------------------------------------------------------------------------
# Kbar by refined trapezoid sums
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    points: int
    converged: bool


def _segments(setup: ProblemSetup) -> list[tuple[float, float]]:
    data = setup.data
    if isinstance(data, (PiecewiseConstantSlope, PiecewiseLinearSlope)):
        b = data.breakpoints
        return [(b[j], b[j + 1]) for j in range(len(b) - 1)]
    return [(0.0, 1.0)]


def _romberg(f, a: float, b: float, tol: float, max_level: int) -> QuadratureResult:
    h = b - a
    # One-sided limits at the ends keep a jump at a breakpoint out of the sum.
    nudge = 1e-13 * h
    fa, fb = f(np.array([a + nudge]))[0], f(np.array([b - nudge]))[0]
    T = 0.5 * h * (fa + fb)
    rows = [[T]]
    n = 1
    for level in range(1, max_level + 1):
        n *= 2
        mids = a + h * (np.arange(1, n, 2) / n)
        T = 0.5 * T + (h / n) * float(np.sum(f(mids)))
        row = [T]
        for k, prev in enumerate(rows[-1], start=1):
            row.append(row[-1] + (row[-1] - prev) / (4**k - 1))
        err = abs(row[-1] - rows[-1][-1])
        rows.append(row[:8])
        if level >= 4 and err <= tol * abs(row[-1]):
            return QuadratureResult(row[-1], err, n + 1, True)
    return QuadratureResult(rows[-1][-1], err, n + 1, False)


def _periodic_trapezoid(f, tol: float, max_level: int) -> QuadratureResult:
    # Periodic analytic integrands: the plain trapezoid rule converges geometrically.
    prev = None
    for level in range(4, max_level + 1):
        n = 2**level
        val = float(np.mean(f(np.arange(n) / n)))
        if prev is not None:
            err = abs(val - prev)
            if err <= tol * abs(val):
                return QuadratureResult(val, err, n, True)
        prev = val
    return QuadratureResult(val, err, n, False)


def kbar_bruteforce(
    setup: ProblemSetup, i: int, eta: float, tol: float = 1e-12, max_level: int = ROMBERG_MAX_LEVEL
) -> QuadratureResult:
    """``int_0^1 (1 - lam eta u0')^(-(i + 1/lam))`` by refined trapezoid sums.

    Smooth data use the periodic trapezoid rule on ``2^k`` points; piecewise
    data use Romberg extrapolation on each smoothness interval.  The result is
    flagged as not converged after ``2^max_level`` points.
    """
    lam = setup.lam
    if lam == 0:
        raise DomainError("Kbar_i is undefined for lambda = 0")
    if not 0 <= eta < setup.eta_star:
        raise DomainError(f"eta = {eta} outside [0, eta_star)")
    e = i + 1.0 / lam
    slope = setup.data.slope

    def f(a):
        return (1.0 - lam * eta * slope(a)) ** (-e)

    if isinstance(setup.data, SmoothFourier):
        return _periodic_trapezoid(f, tol, max_level)
    total, err, pts, ok = 0.0, 0.0, 0, True
    for a, b in _segments(setup):
        r = _romberg(f, a, b, tol, max_level)
        total += r.value
        err += r.error
        pts += r.points
        ok = ok and r.converged
    return QuadratureResult(total, err, pts, ok)


# ---------------------------------------------------------------------------
# Direct PDE integration
# ---------------------------------------------------------------------------


@dataclass
class OracleRun:
    """Snapshots of ``w = u_x`` on the uniform grid ``x_j = j/N``.

    ``status`` is ``"ok"`` or the integrator's failure message; on failure
    only the snapshots reached are kept.
    """

    lam: float
    N: int
    x: np.ndarray
    times: list[float]
    snapshots: list[np.ndarray]
    nonlocal_terms: list[float]
    energies: list[float]
    status: str = "ok"
    nfev: int = 0
    meta: dict = field(default_factory=dict)


class _Spectral:
    """Right-hand side of ``w_t = -u w_x + lam w^2 + I`` in Fourier space.

    Quadratic products are formed on a 3/2-padded grid so that they carry no
    aliasing error.
    """

    def __init__(self, lam: float, N: int):
        self.lam = lam
        self.N = N
        self.M = 3 * N // 2
        k = np.fft.rfftfreq(N, d=1.0 / N)
        self.ik = 2j * np.pi * k
        self.inv_ik = np.zeros_like(self.ik)
        self.inv_ik[1:] = 1.0 / self.ik[1:]
        # Drop the Nyquist mode from derivatives.
        if N % 2 == 0:
            self.ik[-1] = 0.0
            self.inv_ik[-1] = 0.0

    def _to_padded(self, c: np.ndarray) -> np.ndarray:
        out = np.zeros(self.M // 2 + 1, dtype=complex)
        out[: c.size] = c
        return np.fft.irfft(out, n=self.M) * (self.M / self.N)

    def _from_padded(self, v: np.ndarray) -> np.ndarray:
        c = np.fft.rfft(v) * (self.N / self.M)
        return c[: self.N // 2 + 1]

    def energy(self, w_hat: np.ndarray) -> float:
        # Parseval on the rfft coefficients of a real signal.
        a = np.abs(w_hat) ** 2
        s = a[0] + 2.0 * np.sum(a[1:])
        if self.N % 2 == 0:
            s -= a[-1]
        return float(s) / self.N**2

    def __call__(self, _t: float, w: np.ndarray) -> np.ndarray:
        w_hat = np.fft.rfft(w)
        u = self._to_padded(w_hat * self.inv_ik)
        wx = self._to_padded(w_hat * self.ik)
        wp = self._to_padded(w_hat)
        nl = self._from_padded(-u * wx + self.lam * wp * wp)
        nl[0] -= (self.lam + 1.0) * self.energy(w_hat) * self.N
        return np.fft.irfft(nl, n=self.N)


def pde_solve(
    setup: ProblemSetup,
    times: Sequence[float],
    N: int = 256,
    rtol: float = PDE_RTOL,
    atol: float = PDE_ATOL,
    t_star: Optional[float] = None,
) -> OracleRun:
    """Integrate ``w_t + u w_x = lam w^2 + I(t)`` with ``w = u_x`` for smooth data.

    ``u`` is the mean-zero antiderivative of ``w`` and
    ``I = -(lam + 1) int w^2``.  Space is discretised by Fourier collocation on
    ``N`` points; time by the adaptive explicit Runge-Kutta 4(5) pair.  All
    requested times must satisfy ``t <= 0.8 t_star``.
    """
    if not isinstance(setup.data, SmoothFourier):
        raise DomainError("the spectral oracle needs smooth Fourier data")
    if N < 8 or N & (N - 1):
        raise DomainError(f"N = {N} must be a power of two >= 8")
    times = sorted(float(t) for t in times)
    if not times or times[0] < 0:
        raise DomainError("times must be non-empty and non-negative")
    if t_star is None:
        t_star = blowup_time(setup)
    if times[-1] > 0.8 * t_star:
        raise DomainError(f"t = {times[-1]} exceeds 0.8 t_star = {0.8 * t_star}")
    x = np.arange(N) / N
    w0 = setup.data.slope(x)
    rhs = _Spectral(setup.lam, N)
    run = OracleRun(setup.lam, N, x, [], [], [], [], meta={"rtol": rtol, "atol": atol, "method": "RK45"})
    if times[-1] == 0.0:
        sol_t, sol_y, status, msg, nfev = np.array(times), np.tile(w0[:, None], len(times)), 0, "", 0
    else:
        sol = solve_ivp(rhs, (0.0, times[-1]), w0, method="RK45", t_eval=times, rtol=rtol, atol=atol)
        sol_t, sol_y, status, msg, nfev = sol.t, sol.y, sol.status, sol.message, sol.nfev
    for j, t in enumerate(sol_t):
        w = sol_y[:, j]
        E = rhs.energy(np.fft.rfft(w))
        run.times.append(float(t))
        run.snapshots.append(w)
        run.energies.append(E)
        run.nonlocal_terms.append(-(setup.lam + 1.0) * E)
    run.nfev = nfev
    if status != 0:
        run.status = f"integration stopped: {msg}"
    return run


# ---------------------------------------------------------------------------
# Cross-check
# ---------------------------------------------------------------------------


@dataclass
class Discrepancy:
    times: list[float]
    sup: list[float]
    l2: list[float]
    status: str

    @property
    def max_sup(self) -> float:
        return max(self.sup) if self.sup else math.nan

    def to_dict(self) -> dict:
        return {"times": self.times, "sup": self.sup, "l2": self.l2, "max_sup": self.max_sup, "status": self.status}


def compare(
    setup: ProblemSetup,
    times: Sequence[float],
    N: int = 256,
    n_alpha: int = 2048,
    run: Optional[OracleRun] = None,
) -> Discrepancy:
    """Sup and L2 differences between the representation and the PDE oracle on the ``N``-point grid."""
    t_star = blowup_time(setup)
    for t in times:
        if t > 0.8 * t_star:
            raise DomainError(f"t = {t} exceeds 0.8 t_star = {0.8 * t_star}")
    if run is None:
        run = pde_solve(setup, times, N, t_star=t_star)
    sup, l2 = [], []
    for t, w in zip(run.times, run.snapshots):
        rep = ux_eulerian(setup, run.x, t, n_alpha)
        d = rep - w
        sup.append(float(np.max(np.abs(d))))
        l2.append(float(np.sqrt(np.mean(d * d))))
    if len(run.times) < len(times):
        raise ConvergenceError(f"oracle stopped early: {run.status}")
    return Discrepancy(list(run.times), sup, l2, run.status)
