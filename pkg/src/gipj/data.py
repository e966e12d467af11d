"""Periodic initial data on [0, 1] and the extrema of its slope.

Three classes are supported:

* :class:`SmoothFourier` -- a finite trigonometric sum.  Each mode carries an
  integer ``k`` and contributes ``a cos(k pi x) + b sin(k pi x)``, so ``k`` must
  be even for the data to be 1-periodic.
* :class:`PiecewiseLinearSlope` -- ``u0'`` continuous and linear on each
  segment, so ``u0''`` is piecewise constant.
* :class:`PiecewiseConstantSlope` -- ``u0'`` constant on each segment.

Every class exposes ``u0``, ``slope`` (``u0'``), ``curvature`` (``u0''``) and
:meth:`slope_extrema`.  ``u0`` is normalised to have zero mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError

MEAN_TOL = 1e-12
TIE_RTOL = 1e-10

ArrayLike = Union[float, np.ndarray]


# ---------------------------------------------------------------------------
# Extrema of the slope
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlopeExtrema:
    """Global extrema of ``u0'`` and where they are attained.

    ``*_locations`` are sorted representative points.  For piecewise-constant
    data they are the midpoints of the attaining segments, and the segments
    themselves are listed in ``*_intervals``.  ``*_order`` describes the local
    shape of ``u0'`` at the extremum: ``"quadratic"`` (smooth, non-degenerate),
    ``"degenerate"`` (smooth with vanishing third derivative), ``"corner"``
    (piecewise-linear kink) or ``"plateau"`` (attained on a set of positive
    measure).
    """

    max_value: float
    max_locations: tuple[float, ...]
    min_value: float
    min_locations: tuple[float, ...]
    max_order: str
    min_order: str
    max_intervals: tuple[tuple[float, float], ...] = ()
    min_intervals: tuple[tuple[float, float], ...] = ()
    # u0'''/2 at each location; only meaningful for smooth data.
    max_c: tuple[float, ...] = ()
    min_c: tuple[float, ...] = ()

    @property
    def max_measure(self) -> float:
        return float(sum(b - a for a, b in self.max_intervals))

    @property
    def min_measure(self) -> float:
        return float(sum(b - a for a, b in self.min_intervals))


def _periodic_distance(x: np.ndarray, c: float) -> np.ndarray:
    d = np.abs(np.mod(x - c, 1.0))
    return np.minimum(d, 1.0 - d)


# ---------------------------------------------------------------------------
# Data classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FourierMode:
    k: int
    cos: float = 0.0
    sin: float = 0.0


@dataclass(frozen=True)
class SmoothFourier:
    """``u0(x) = sum_k cos_k cos(k pi x) + sin_k sin(k pi x)``."""

    modes: tuple[FourierMode, ...]
    kind: str = field(default="fourier", init=False)

    def __post_init__(self) -> None:
        if not self.modes:
            raise ConfigError("Fourier data needs at least one mode")
        for m in self.modes:
            if not isinstance(m.k, (int, np.integer)) or m.k <= 0:
                raise ConfigError(f"mode index must be a positive integer, got {m.k!r}")
            if m.k % 2:
                raise ConfigError(f"mode k={m.k} is not 1-periodic (k must be even)")
            if not (math.isfinite(m.cos) and math.isfinite(m.sin)):
                raise ConfigError("Fourier coefficients must be finite")
        if all(m.cos == 0.0 and m.sin == 0.0 for m in self.modes):
            raise ConfigError("data is identically zero")

    def _arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        w = np.array([m.k * math.pi for m in self.modes])
        a = np.array([m.cos for m in self.modes])
        b = np.array([m.sin for m in self.modes])
        return w, a, b

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()

    @property
    def max_wavenumber(self) -> int:
        return max(m.k for m in self.modes)

    def derivative(self, x: ArrayLike, order: int) -> np.ndarray:
        """``order``-th derivative of ``u0`` (``order = 0`` gives ``u0``)."""
        x = np.asarray(x, dtype=float)
        w, a, b = self._arrays()
        ph = np.multiply.outer(x, w)
        # d^n/dx^n cos(wx) = w^n cos(wx + n pi/2), same shift for sin.
        shift = order * math.pi / 2
        terms = (a * np.cos(ph + shift) + b * np.sin(ph + shift)) * w**order
        return terms.sum(axis=-1)

    def u0(self, x: ArrayLike) -> np.ndarray:
        return self.derivative(x, 0)

    def slope(self, x: ArrayLike) -> np.ndarray:
        return self.derivative(x, 1)

    def curvature(self, x: ArrayLike) -> np.ndarray:
        return self.derivative(x, 2)

    def slope_delta(self, x: ArrayLike, c: float) -> np.ndarray:
        """``u0'(x) - u0'(c)`` without cancellation for ``x`` near ``c``."""
        x = np.asarray(x, dtype=float)
        w, a, b = self._arrays()
        half_diff = np.multiply.outer(x - c, w) / 2
        half_sum = np.multiply.outer(x + c, w) / 2
        # u0' = sum w(-a sin + b cos); use sum-to-product identities.
        terms = 2 * w * np.sin(half_diff) * (-a * np.cos(half_sum) - b * np.sin(half_sum))
        return terms.sum(axis=-1)

    def slope_scale(self) -> float:
        w, a, b = self._arrays()
        return float(np.sum((np.abs(a) + np.abs(b)) * w))

    def slope_extrema(self) -> SlopeExtrema:
        n = max(4096, 64 * self.max_wavenumber)
        grid = np.arange(n) / n
        s = self.slope(grid)
        hi = _refine_extrema(self, grid, s, +1)
        lo = _refine_extrema(self, grid, -s, -1)
        return SlopeExtrema(
            max_value=hi[0],
            max_locations=hi[1],
            min_value=lo[0],
            min_locations=lo[1],
            max_order=hi[2],
            min_order=lo[2],
            max_c=hi[3],
            min_c=lo[3],
        )


def _refine_extrema(data: SmoothFourier, grid: np.ndarray, s: np.ndarray, sign: int):
    """Locate all global maxima of ``sign * u0'`` by bracketing ``u0''``."""
    n = grid.size
    h = 1.0 / n
    is_peak = (s >= np.roll(s, 1)) & (s >= np.roll(s, -1))
    idx = np.flatnonzero(is_peak)
    spread = float(s.max() - s.min())
    idx = idx[s[idx] >= s.max() - 1e-3 * max(spread, 1e-300)]

    def f2(x: float) -> float:
        return sign * float(data.curvature(x))

    found: list[tuple[float, float]] = []
    for i in idx:
        left, right = grid[i] - h, grid[i] + h
        fl, fr = f2(left), f2(right)
        if fl == 0.0:
            x = left
        elif fr == 0.0:
            x = right
        elif fl > 0 > fr:
            x = brentq(f2, left, right, xtol=1e-15, rtol=1e-15, maxiter=200)
        else:
            x = float(grid[i])
        x = float(np.mod(x, 1.0))
        found.append((x, sign * float(data.slope(x))))

    best = max(v for _, v in found)
    tol = TIE_RTOL * max(data.slope_scale(), 1e-300)
    locs: list[float] = []
    for x, v in sorted(found):
        if v >= best - tol and all(_periodic_distance(np.array(x), y) > 1e-9 for y in locs):
            locs.append(x)
    locs.sort()
    third_scale = float(
        sum((abs(m.cos) + abs(m.sin)) * (m.k * math.pi) ** 3 for m in data.modes)
    )
    cs = tuple(float(data.derivative(x, 3)) / 2 for x in locs)
    degenerate = any(abs(c) <= 1e-8 * third_scale for c in cs)
    return sign * best, tuple(locs), ("degenerate" if degenerate else "quadratic"), cs


def _as_float_tuple(values: Iterable[Any], what: str) -> tuple[float, ...]:
    out = []
    for v in values:
        try:
            f = float(Fraction(v)) if isinstance(v, str) else float(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad {what} entry {v!r}") from exc
        if not math.isfinite(f):
            raise ConfigError(f"{what} entries must be finite")
        out.append(f)
    return tuple(out)


def _check_breakpoints(bp: Sequence[float]) -> None:
    if len(bp) < 2:
        raise ConfigError("need at least two breakpoints")
    if bp[0] != 0.0 or bp[-1] != 1.0:
        raise ConfigError("breakpoints must start at 0 and end at 1")
    if any(b <= a for a, b in zip(bp, bp[1:])):
        raise ConfigError("breakpoints must be strictly increasing")


def _segment_index(bp: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.clip(np.searchsorted(bp, x, side="right") - 1, 0, bp.size - 2)


@dataclass(frozen=True)
class PiecewiseConstantSlope:
    """``u0' = values[j]`` on ``[breakpoints[j], breakpoints[j+1])``."""

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]
    kind: str = field(default="pc", init=False)

    def __post_init__(self) -> None:
        bp = _as_float_tuple(self.breakpoints, "breakpoint")
        vals = _as_float_tuple(self.values, "slope value")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        _check_breakpoints(bp)
        if len(vals) != len(bp) - 1:
            raise ConfigError("need one slope value per segment")
        mean = sum(
            (Fraction(b) - Fraction(a)) * Fraction(v) for a, b, v in zip(bp, bp[1:], vals)
        )
        if abs(float(mean)) > MEAN_TOL:
            raise ConfigError(f"slope has nonzero mean {float(mean):.3e}")
        if max(vals) == min(vals):
            raise ConfigError("slope is constant, so the data is trivial")

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(np.asarray(self.breakpoints))

    def _offset(self) -> float:
        # Constant making u0 mean-zero: int_0^1 y u0'(y) dy.
        bp = np.asarray(self.breakpoints)
        v = np.asarray(self.values)
        return float(np.sum(v * (bp[1:] ** 2 - bp[:-1] ** 2) / 2))

    def u0(self, x: ArrayLike) -> np.ndarray:
        x = np.mod(np.asarray(x, dtype=float), 1.0)
        bp = np.asarray(self.breakpoints)
        v = np.asarray(self.values)
        cum = np.concatenate([[0.0], np.cumsum(v * np.diff(bp))])
        j = _segment_index(bp, x)
        return self._offset() + cum[j] + v[j] * (x - bp[j])

    def slope(self, x: ArrayLike) -> np.ndarray:
        x = np.mod(np.asarray(x, dtype=float), 1.0)
        bp = np.asarray(self.breakpoints)
        return np.asarray(self.values)[_segment_index(bp, x)]

    def curvature(self, x: ArrayLike) -> np.ndarray:
        return np.zeros_like(np.asarray(x, dtype=float))

    def slope_scale(self) -> float:
        return float(max(abs(v) for v in self.values))

    def slope_extrema(self) -> SlopeExtrema:
        bp = self.breakpoints
        vmax, vmin = max(self.values), min(self.values)
        hi = tuple((bp[j], bp[j + 1]) for j, v in enumerate(self.values) if v == vmax)
        lo = tuple((bp[j], bp[j + 1]) for j, v in enumerate(self.values) if v == vmin)
        return SlopeExtrema(
            max_value=vmax,
            max_locations=tuple((a + b) / 2 for a, b in hi),
            min_value=vmin,
            min_locations=tuple((a + b) / 2 for a, b in lo),
            max_order="plateau",
            min_order="plateau",
            max_intervals=hi,
            min_intervals=lo,
        )


@dataclass(frozen=True)
class PiecewiseLinearSlope:
    """``u0' = slopes[j] + curvatures[j] (x - breakpoints[j])`` on segment ``j``."""

    breakpoints: tuple[float, ...]
    slopes: tuple[float, ...]
    curvatures: tuple[float, ...]
    kind: str = field(default="pl", init=False)

    def __post_init__(self) -> None:
        bp = _as_float_tuple(self.breakpoints, "breakpoint")
        s = _as_float_tuple(self.slopes, "slope")
        c = _as_float_tuple(self.curvatures, "curvature")
        for name, val in (("breakpoints", bp), ("slopes", s), ("curvatures", c)):
            object.__setattr__(self, name, val)
        _check_breakpoints(bp)
        if not len(s) == len(c) == len(bp) - 1:
            raise ConfigError("need one slope and one curvature per segment")
        scale = max(max(abs(v) for v in s), 1e-300)
        for j in range(len(s)):
            end = s[j] + c[j] * (bp[j + 1] - bp[j])
            nxt = s[(j + 1) % len(s)]
            if abs(end - nxt) > 1e-12 * scale:
                raise ConfigError(f"u0' is discontinuous at breakpoint {bp[j + 1]}")
        mean = sum(
            Fraction(sj) * (Fraction(b) - Fraction(a)) + Fraction(cj) * (Fraction(b) - Fraction(a)) ** 2 / 2
            for a, b, sj, cj in zip(bp, bp[1:], s, c)
        )
        if abs(float(mean)) > MEAN_TOL:
            raise ConfigError(f"slope has nonzero mean {float(mean):.3e}")
        if all(cj == 0.0 for cj in c):
            raise ConfigError("slope is constant, so the data is trivial")

    def _seg(self, x: ArrayLike):
        x = np.mod(np.asarray(x, dtype=float), 1.0)
        bp = np.asarray(self.breakpoints)
        j = _segment_index(bp, x)
        return x, bp, j

    def slope(self, x: ArrayLike) -> np.ndarray:
        x, bp, j = self._seg(x)
        return np.asarray(self.slopes)[j] + np.asarray(self.curvatures)[j] * (x - bp[j])

    def curvature(self, x: ArrayLike) -> np.ndarray:
        _, _, j = self._seg(x)
        return np.asarray(self.curvatures)[j]

    def _offset(self) -> float:
        total = 0.0
        for a, b, s, c in zip(self.breakpoints, self.breakpoints[1:], self.slopes, self.curvatures):
            # int_a^b y (s + c (y - a)) dy
            total += (s - c * a) * (b * b - a * a) / 2 + c * (b**3 - a**3) / 3
        return total

    def u0(self, x: ArrayLike) -> np.ndarray:
        x, bp, j = self._seg(x)
        s = np.asarray(self.slopes)
        c = np.asarray(self.curvatures)
        h = np.diff(bp)
        cum = np.concatenate([[0.0], np.cumsum(s * h + c * h * h / 2)])
        d = x - bp[j]
        return self._offset() + cum[j] + s[j] * d + c[j] * d * d / 2

    def slope_scale(self) -> float:
        return float(max(abs(v) for v in self.slopes))

    def slope_extrema(self) -> SlopeExtrema:
        bp, s, c = self.breakpoints, self.slopes, self.curvatures
        vmax, vmin = max(s), min(s)
        n = len(s)

        def collect(target: float):
            locs, ivals = [], []
            for j in range(n):
                if s[j] == target:
                    locs.append(bp[j])
                    if c[j] == 0.0:
                        ivals.append((bp[j], bp[j + 1]))
            order = "plateau" if ivals else "corner"
            return tuple(sorted(locs)), tuple(ivals), order

        hl, hi, ho = collect(vmax)
        ll, li, lo = collect(vmin)
        return SlopeExtrema(
            max_value=vmax,
            max_locations=hl,
            min_value=vmin,
            min_locations=ll,
            max_order=ho,
            min_order=lo,
            max_intervals=hi,
            min_intervals=li,
        )


InitialData = Union[SmoothFourier, PiecewiseLinearSlope, PiecewiseConstantSlope]


def is_odd(data: InitialData, samples: int = 257) -> bool:
    """True when ``u0(-x) = -u0(x)``, which pins the characteristic from 0."""
    if isinstance(data, SmoothFourier):
        return all(m.cos == 0.0 for m in data.modes)
    x = (np.arange(samples) + 0.5) / samples
    scale = max(float(np.max(np.abs(data.u0(x)))), 1e-300)
    return bool(np.max(np.abs(data.u0(x) + data.u0(1.0 - x))) <= 1e-13 * scale)


# ---------------------------------------------------------------------------
# Presets and configuration
# ---------------------------------------------------------------------------


def preset(name: str) -> InitialData:
    """Named data sets used throughout the tests and the command line."""
    pi = math.pi
    if name == "sin4pi":
        # u0' = sin(4 pi x)
        return SmoothFourier((FourierMode(4, cos=-1 / (4 * pi)),))
    if name == "ex4":
        return SmoothFourier((FourierMode(2, cos=1.0), FourierMode(4, cos=2.0)))
    if name == "remark":
        # u0' = sin(2 pi x) + cos(4 pi x)
        return SmoothFourier(
            (FourierMode(2, cos=-1 / (2 * pi)), FourierMode(4, sin=1 / (4 * pi)))
        )
    if name == "pl-ex":
        return PiecewiseLinearSlope((0.0, 0.5, 1.0), (-1.0, 1.0), (4.0, -4.0))
    if name == "pc-ex56":
        return PiecewiseConstantSlope((0.0, 0.25, 0.75, 1.0), (-1.0, 1.0, -1.0))
    raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


PRESETS = ("sin4pi", "ex4", "remark", "pl-ex", "pc-ex56")


def make_data(config: dict[str, Any]) -> InitialData:
    """Build initial data from a key/value tree.

    Examples::

        {"kind": "fourier", "modes": [{"k": 4, "cos": -0.0796}]}
        {"kind": "pc", "breakpoints": [0, "1/4", "3/4", 1], "values": [-1, 1, -1]}
        {"kind": "pl", "breakpoints": [0, 0.5, 1], "slopes": [-1, 1], "curvatures": [4, -4]}
    """
    if not isinstance(config, dict):
        raise ConfigError("data configuration must be a mapping")
    if "preset" in config:
        return preset(str(config["preset"]))
    kind = config.get("kind")
    try:
        if kind == "fourier":
            modes = []
            for m in config["modes"]:
                k = m["k"]
                if isinstance(k, float) and k.is_integer():
                    k = int(k)
                c, s = _as_float_tuple([m.get("cos", 0.0), m.get("sin", 0.0)], "coefficient")
                modes.append(FourierMode(k, c, s))
            return SmoothFourier(tuple(modes))
        if kind == "pc":
            return PiecewiseConstantSlope(tuple(config["breakpoints"]), tuple(config["values"]))
        if kind == "pl":
            return PiecewiseLinearSlope(
                tuple(config["breakpoints"]), tuple(config["slopes"]), tuple(config["curvatures"])
            )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"incomplete {kind} data configuration: {exc}") from exc
    raise ConfigError(f"unknown data kind {kind!r} (expected fourier, pc or pl)")


def load_data(source: str) -> InitialData:
    """Resolve a preset name or read a YAML/JSON data file."""
    if source in PRESETS:
        return preset(source)
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"{source!r} is neither a preset nor an existing file")
    import yaml

    with path.open() as fh:
        config = yaml.safe_load(fh)
    return make_data(config)


def data_to_config(data: InitialData) -> dict[str, Any]:
    if isinstance(data, SmoothFourier):
        return {"kind": "fourier", "modes": [{"k": m.k, "cos": m.cos, "sin": m.sin} for m in data.modes]}
    if isinstance(data, PiecewiseConstantSlope):
        return {"kind": "pc", "breakpoints": list(data.breakpoints), "values": list(data.values)}
    return {
        "kind": "pl",
        "breakpoints": list(data.breakpoints),
        "slopes": list(data.slopes),
        "curvatures": list(data.curvatures),
    }
