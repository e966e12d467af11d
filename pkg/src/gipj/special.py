"""Gamma function and the Gauss hypergeometric function on the real line.

The hypergeometric engine evaluates ``2F1(a, b; c; z)`` for real parameters
and real ``z <= 1``.  Away from the origin the power series is replaced by a
linear transformation whose own series converges quickly:

* ``|z| <= 1/2``        direct series
* ``-1 <= z < -1/2``    Pfaff transformation (argument ``z/(z-1)``)
* ``z < -1``            inversion ``z -> 1/z`` (requires ``a - b`` non-integer)
* ``1/2 < z < 1``       reflection ``z -> 1 - z`` (requires ``c - a - b``
                        non-integer, otherwise the plain series is summed)
* ``z == 1``            Gauss summation when ``c - a - b > 0``
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError

SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 10_000
NEAR_INTEGER_GAP = 1e-5

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _is_nonpositive_int(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def _lanczos_log_gamma(x: float) -> float:
    # Valid for x >= 1/2.
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for real ``x > 0``."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"log_gamma needs a finite positive argument, got {x!r}")
    if x == 1.0 or x == 2.0:
        return 0.0
    if x < 0.5:
        # Reflection keeps the Lanczos sum in its accurate range.
        return math.log(math.pi / math.sin(math.pi * x)) - _lanczos_log_gamma(1.0 - x)
    return _lanczos_log_gamma(x)


def gamma_sign_log(x: float) -> tuple[float, float]:
    """Return ``(sign, log|Gamma(x)|)`` for real non-pole ``x``."""
    x = float(x)
    if not math.isfinite(x) or _is_nonpositive_int(x):
        raise DomainError(f"Gamma has a pole or is undefined at {x!r}")
    if x > 0:
        return 1.0, log_gamma(x)
    # Gamma(x) = pi / (sin(pi x) Gamma(1 - x)), with 1 - x > 1.
    s = math.sin(math.pi * x)
    sign = 1.0 if s > 0 else -1.0
    return sign, math.log(math.pi / abs(s)) - log_gamma(1.0 - x)


def gamma(x: float) -> float:
    """Gamma function for real arguments away from the poles."""
    sign, lg = gamma_sign_log(x)
    return sign * math.exp(lg)


def gamma_ratio(num: tuple[float, ...], den: tuple[float, ...]) -> float:
    """``prod Gamma(num) / prod Gamma(den)``; a pole in ``den`` gives 0."""
    if any(_is_nonpositive_int(d) for d in den):
        return 0.0
    sign, total = 1.0, 0.0
    for x in num:
        s, lg = gamma_sign_log(x)
        sign *= s
        total += lg
    for x in den:
        s, lg = gamma_sign_log(x)
        sign *= s
        total -= lg
    return sign * math.exp(total)


@dataclass(frozen=True)
class Hyp2F1Params:
    """Real parameters and argument of ``2F1(a, b; c; z)``."""

    a: float
    b: float
    c: float
    z: float

    def validate(self) -> None:
        for name in ("a", "b", "c", "z"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if _is_nonpositive_int(self.c):
            raise DomainError(f"c = {self.c} is a non-positive integer")
        if self.z > 1.0:
            raise DomainError(f"z = {self.z} lies on the branch cut (1, inf)")

    def evaluate(self) -> float:
        return hyp2f1(self.a, self.b, self.c, self.z)


def unit_circle_convergence(a: float, b: float, c: float, z: float) -> str:
    """Classify the Gauss series at ``|z| = 1``.

    Returns ``"absolute"``, ``"conditional"`` or ``"divergent"``.
    """
    if abs(abs(z) - 1.0) > 0:
        raise DomainError("classification applies to |z| = 1 only")
    s = a + b - c
    if s < 0:
        return "absolute"
    if s < 1 and z != 1.0:
        return "conditional"
    return "divergent"


def _series(a: float, b: float, c: float, z: float) -> float:
    total = 1.0
    term = 1.0
    small = 0
    for k in range(SERIES_MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        total += term
        if term == 0.0:
            return total
        if abs(term) < SERIES_RTOL * abs(total):
            small += 1
            # Two consecutive negligible terms guard against a lucky small one.
            if small >= 2:
                return total
        else:
            small = 0
    raise ConvergenceError(
        f"2F1 series did not converge in {SERIES_MAX_TERMS} terms "
        f"(a={a}, b={b}, c={c}, z={z})"
    )


def _terminating(a: float, b: float, c: float, z: float) -> float:
    n = int(-min(x for x in (a, b) if _is_nonpositive_int(x)))
    total = 1.0
    term = 1.0
    for k in range(n):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        total += term
    return total


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function ``2F1(a, b; c; z)`` for real ``z <= 1``."""
    p = Hyp2F1Params(float(a), float(b), float(c), float(z))
    p.validate()
    a, b, c, z = p.a, p.b, p.c, p.z

    if z == 0.0:
        return 1.0
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        return _terminating(a, b, c, z)
    if z == 1.0:
        if unit_circle_convergence(a, b, c, z) != "absolute":
            raise DomainError(f"2F1 diverges at z = 1 since a + b - c = {a + b - c} >= 0")
        return gamma_ratio((c, c - a - b), (c - a, c - b))
    if abs(z) <= 0.5:
        return _series(a, b, c, z)
    if -1.0 <= z < -0.5:
        return (1.0 - z) ** (-a) * hyp2f1(a, c - b, c, z / (z - 1.0))
    if z < -1.0:
        return _inversion(a, b, c, z)
    # 1/2 < z < 1
    s = c - a - b
    if abs(s - round(s)) < NEAR_INTEGER_GAP:
        # the connection terms carry Gamma(+-s) and cancel like eps / |s - n|
        return _series(a, b, c, z)
    w = 1.0 - z
    first = gamma_ratio((c, s), (c - a, c - b)) * hyp2f1(a, b, 1.0 - s, w)
    second = gamma_ratio((c, -s), (a, b))
    if second != 0.0:
        second *= w**s * hyp2f1(c - a, c - b, 1.0 + s, w)
    return first + second


def _inversion(a: float, b: float, c: float, z: float) -> float:
    d = a - b
    if d == math.floor(d):
        raise DomainError(f"inversion for z < -1 needs a - b non-integer, got {d}")
    if abs(d - round(d)) < NEAR_INTEGER_GAP:
        # Gamma(+-d) terms cancel; Pfaff maps to (1/2, 1) where c - a - (c - b) = -d takes the series
        return (1.0 - z) ** (-a) * hyp2f1(a, c - b, c, z / (z - 1.0))
    mz = -z
    out = 0.0
    coef = gamma_ratio((c, d), (a, c - b))
    if coef != 0.0:
        out += coef * mz ** (-b) * hyp2f1(b, 1.0 + b - c, 1.0 + b - a, 1.0 / z)
    coef = gamma_ratio((c, -d), (b, c - a))
    if coef != 0.0:
        out += coef * mz ** (-a) * hyp2f1(a, 1.0 + a - c, 1.0 + a - b, 1.0 / z)
    return out


def hyp2f1_derivative(a: float, b: float, c: float, z: float) -> float:
    """``d/dz 2F1(a, b; c; z) = (ab/c) 2F1(a+1, b+1; c+1; z)``."""
    return a * b / c * hyp2f1(a + 1.0, b + 1.0, c + 1.0, z)


def quadratic_power_integral(b: float, c0: float, eps: float, beta: float, beta0: float = 0.0) -> float:
    """Antiderivative in ``beta`` of ``(eps + c0 (beta - beta0)^2)^(-b)``.

    Equals ``eps^(-b) (beta - beta0) 2F1(1/2, b; 3/2; -c0 (beta - beta0)^2 / eps)``
    and vanishes at ``beta = beta0``.  The admissible set keeps the
    hypergeometric argument in ``[-1, 0]``: ``b < 2``, ``b != 1/2``,
    ``c0 > 0``, ``eps >= c0`` and ``|beta - beta0| <= 1``.
    """
    if not b < 2.0 or b == 0.5:
        raise DomainError(f"exponent b = {b} outside (-inf, 2) minus {{1/2}}")
    if not c0 > 0.0:
        raise DomainError(f"curvature c0 = {c0} must be positive")
    if not eps >= c0:
        raise DomainError(f"eps = {eps} must be at least c0 = {c0}")
    x = beta - beta0
    if abs(x) > 1.0:
        raise DomainError(f"|beta - beta0| = {abs(x)} exceeds 1")
    return eps ** (-b) * x * hyp2f1(0.5, b, 1.5, -c0 * x * x / eps)
