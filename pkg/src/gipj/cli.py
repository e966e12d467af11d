"""Command-line driver: classify, solve, verify and reproduce the worked examples.

Every file written starts with ``#`` comment lines holding the library
version, a hash of the run configuration and the tolerances in force, so
identical configurations produce byte-identical output.  The exit code is 0
when every requested check passes, 1 when a check fails and 2 on a usage or
configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import __version__
from .data import data_to_config, load_data, preset
from .errors import ConfigError, DomainError, GuardBandError
from .oracle import compare
from .regularity import classify_setup, detect_trend, eta_for_critical_jacobian, regularity_report
from .representation import (
    ProblemSetup,
    blowup_time_estimate,
    energy,
    eta_of_time,
    extrema_track,
    gamma_alpha,
    kbar,
    kbar_limit,
    make_setup,
    nonlocal_term,
    time_of_eta,
    ux,
    ux_eulerian,
    uxx,
)
from .regularity import energy_rate

DEFAULT_GRID_ALPHA = 65
DEFAULT_ORACLE_N = 256
DEFAULT_VERIFY_TOL = 1e-4


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def parse_range(text: str) -> list[float]:
    """``"a:b:n"`` gives ``n`` evenly spaced points from ``a`` to ``b`` inclusive; a single number is one point."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) == 3:
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1:
                raise ValueError
            return np.linspace(a, b, n).tolist() if n > 1 else [a]
    except ValueError:
        pass
    raise ConfigError(f"range {text!r} must be a number or a:b:n with n >= 1")


@dataclass
class RunConfig:
    command: str
    lam: Optional[float] = None
    data: Optional[str] = None
    p: list[float] = field(default_factory=lambda: [2.0])
    eta: Optional[list[float]] = None
    time: Optional[list[float]] = None
    out: Optional[str] = None
    tol: Optional[float] = None
    grid_alpha: int = DEFAULT_GRID_ALPHA
    oracle_n: int = DEFAULT_ORACLE_N
    eulerian: bool = False
    trends: bool = False
    example: Optional[int] = None

    def validate(self) -> None:
        if self.command in ("classify", "solve", "verify"):
            if self.lam is None or not math.isfinite(self.lam):
                raise ConfigError("--lambda is required and must be finite")
            if not self.data:
                raise ConfigError("--data is required")
        if any(not p >= 1 for p in self.p):
            raise ConfigError("every --p must be at least 1")
        if self.grid_alpha < 2:
            raise ConfigError("--grid-alpha must be at least 2")
        if self.oracle_n < 8 or self.oracle_n & (self.oracle_n - 1):
            raise ConfigError("--oracle-n must be a power of two >= 8")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("--tol must be positive")
        if self.command == "solve" and self.eta is None and self.time is None:
            raise ConfigError("solve needs --eta or --time")
        if self.command == "verify" and not self.time:
            raise ConfigError("verify needs --time")
        if self.command == "reproduce" and self.example not in range(1, 7):
            raise ConfigError("reproduce takes an example number 1..6")

    def as_dict(self) -> dict[str, Any]:
        d = dict(self.__dict__)
        d.pop("out")
        return d

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def workers() -> int:
    raw = os.environ.get("PJ_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"PJ_THREADS={raw!r} is not an integer") from None
    return max(1, n)


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Ordered map over ``items`` with up to ``PJ_THREADS`` workers."""
    n = workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def header(cfg: RunConfig, tolerances: dict[str, float]) -> list[str]:
    tol = ", ".join(f"{k}={_fmt(v)}" for k, v in sorted(tolerances.items()))
    return [
        f"# gipj {__version__}",
        f"# config {cfg.digest()} {json.dumps(cfg.as_dict(), sort_keys=True)}",
        f"# tolerances {tol}",
    ]


class Writer:
    """Writes into ``--out`` when given, otherwise to stdout."""

    def __init__(self, cfg: RunConfig, tolerances: dict[str, float]):
        self.cfg = cfg
        self.head = header(cfg, tolerances)
        self.dir = Path(cfg.out) if cfg.out else None
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def _emit(self, name: str, lines: list[str]) -> None:
        text = "\n".join(self.head + lines) + "\n"
        if self.dir is None:
            sys.stdout.write(f"## {name}\n{text}")
        else:
            (self.dir / name).write_text(text)

    def table(self, name: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
        lines = [",".join(columns)] + [",".join(_fmt(v) for v in r) for r in rows]
        self._emit(name, lines)

    def report(self, name: str, payload: dict) -> None:
        self._emit(name, json.dumps(_jsonable(payload), indent=2, sort_keys=True).splitlines())


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("+inf" if v > 0 else "-inf")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _setup(cfg: RunConfig) -> ProblemSetup:
    return make_setup(cfg.lam, load_data(cfg.data))


def cmd_classify(cfg: RunConfig) -> int:
    setup = _setup(cfg)
    w = Writer(cfg, {"guard": setup.guard})
    ok = True
    payload: dict[str, Any] = {"lambda": setup.lam, "data": data_to_config(setup.data), "results": []}
    for p in cfg.p:
        bc = classify_setup(setup, p)
        ok = ok and bc.bounds_hold
        entry = bc.to_dict()
        if cfg.trends and setup.lam != 0:
            rep = regularity_report(setup, p)
            entry["trends"] = rep.to_dict()["trends"]
            entry["agreement"] = rep.agreement()
            ok = ok and all(v is not False for v in rep.agreement().values())
        payload["results"].append(entry)
    payload["checks_pass"] = ok
    w.report("classify.json", payload)
    return 0 if ok else 1


def cmd_solve(cfg: RunConfig) -> int:
    setup = _setup(cfg)
    w = Writer(cfg, {"guard": setup.guard})
    alpha = np.linspace(0.0, 1.0, cfg.grid_alpha)
    if cfg.time is not None:
        times = cfg.time
        etas = [eta_of_time(setup, t) for t in times]
    else:
        etas = cfg.eta
        times = [time_of_eta(setup, e) for e in etas]

    def lagrangian(args):
        eta, t = args
        return [
            (a, eta, t, v, g, c)
            for a, v, g, c in zip(alpha, ux(setup, alpha, eta), gamma_alpha(setup, alpha, eta), uxx(setup, alpha, eta))
        ]

    def scalars(args):
        eta, t = args
        k0 = kbar(setup, 0, eta) if setup.lam != 0 else math.nan
        k1 = kbar(setup, 1, eta) if setup.lam != 0 else math.nan
        E = energy(setup, eta)
        return (eta, t, k0, k1, E, energy_rate(setup, eta), nonlocal_term(setup, eta))

    pairs = list(zip(etas, times))
    rows = [r for block in parallel_map(lagrangian, pairs) for r in block]
    w.table("lagrangian.csv", ["alpha", "eta", "t", "ux", "gamma_alpha", "uxx"], rows)
    w.table("scalars.csv", ["eta", "t", "kbar0", "kbar1", "E", "E_dot", "I"], parallel_map(scalars, pairs))
    if cfg.eulerian:
        x = np.linspace(0.0, 1.0, cfg.grid_alpha, endpoint=False)
        blocks = parallel_map(lambda t: [(t, xi, v) for xi, v in zip(x, ux_eulerian(setup, x, t))], times)
        w.table("eulerian.csv", ["t", "x", "ux"], [r for b in blocks for r in b])
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    setup = _setup(cfg)
    tol = cfg.tol if cfg.tol is not None else DEFAULT_VERIFY_TOL
    w = Writer(cfg, {"sup": tol, "pde_rtol": 1e-9})
    d = compare(setup, cfg.time, N=cfg.oracle_n)
    ok = d.max_sup <= tol and d.status == "ok"
    w.report("verify.json", {**d.to_dict(), "N": cfg.oracle_n, "tol": tol, "pass": ok})
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------


@dataclass
class Check:
    name: str
    value: Any
    expected: Any
    tol: float
    passed: bool


def _near(name: str, value: float, expected: float, tol: float) -> Check:
    return Check(name, float(value), float(expected), tol, bool(abs(value - expected) <= tol))


def _max_err(name: str, errors: Sequence[float], tol: float) -> Check:
    e = float(np.max(np.abs(errors)))
    return Check(name, e, 0.0, tol, bool(e <= tol))


def _trend_check(name: str, setup: ProblemSetup, f: Callable[[float], float], want: str) -> Check:
    Js = np.geomspace(1e-1, 1e-6, 11)
    vals = [f(eta_for_critical_jacobian(setup, j)) for j in Js]
    got = detect_trend(Js, vals).limit
    return Check(name, got, want, 0.0, got == want)


def _two_sided(setup: ProblemSetup, sign_other: str) -> list[Check]:
    e = setup.extrema
    others = [a for a in (0.0, 0.25, 0.3) if a not in e.max_locations + e.min_locations]
    out = [
        _trend_check("M diverges", setup, lambda eta: extrema_track(setup, eta)[0], "+inf"),
        _trend_check("m diverges", setup, lambda eta: extrema_track(setup, eta)[1], "-inf"),
    ]
    for a in others:
        out.append(_trend_check(f"u_x at alpha={a} diverges", setup, lambda eta, a=a: float(ux(setup, a, eta, check=False)), sign_other))
    return out


def _example_1() -> list[Check]:
    s = make_setup(3.0, preset("sin4pi"))
    return [
        _near("t_star", blowup_time_estimate(s).value, 0.54, 0.01),
        _near("Kbar0 limit", kbar_limit(s, 0), 1.84, 0.01),
        *_two_sided(s, "-inf"),
    ]


def _example_2() -> list[Check]:
    s = make_setup(-2.5, preset("sin4pi"))
    return [
        _near("t_star", blowup_time_estimate(s).value, 0.46, 0.01),
        _near("Kbar0 limit", kbar_limit(s, 0), 0.90, 0.01),
        *_two_sided(s, "+inf"),
    ]


def _example_3() -> list[Check]:
    s = make_setup(1.0, preset("sin4pi"))
    ts = np.linspace(0.0, 3.0, 31)
    etas = np.array([eta_of_time(s, t) for t in ts])
    alpha = np.linspace(0.0, 1.0, 41)
    sa = np.sin(4 * np.pi * alpha)
    ux_err, I_err, M_err, m_err = [], [], [], []
    for eta in etas:
        ux_err.append(np.max(np.abs(ux(s, alpha, eta) - (sa - eta) / (1 - eta * sa))))
        I_err.append(nonlocal_term(s, eta) + 1.0)
        M, m = extrema_track(s, eta)
        M_err.append(M - 1.0)
        m_err.append(m + 1.0)
    return [
        _max_err("eta(t) - tanh t", etas - np.tanh(ts), 1e-8),
        _max_err("u_x closed form", ux_err, 1e-8),
        _max_err("I(t) + 1", I_err, 1e-6),
        _max_err("M - 1", M_err, 1e-8),
        _max_err("m + 1", m_err, 1e-8),
    ]


def _example_4() -> list[Check]:
    s = make_setup(-0.5, preset("ex4"))
    e = s.extrema
    etas = np.linspace(0.0, 0.99 * s.eta_star, 25)
    kb = [kbar(s, 0, eta) - (1 + 17 * math.pi**2 * eta**2 / 2) for eta in etas]
    return [
        _near("m0", e.min_value, -30.0, 0.5),
        _near("argmin", e.min_locations[0], 0.13, 0.005),
        _near("eta_star", s.eta_star, 0.067, 0.001),
        _near("t_star", blowup_time_estimate(s).value, 0.06, 0.005),
        _max_err("Kbar0 - (1 + 17 pi^2 eta^2 / 2)", kb, 1e-8),
    ]


def _example_5() -> list[Check]:
    s = make_setup(1.0, preset("pc-ex56"))
    etas = np.linspace(0.0, 0.99, 34)
    t_err = [time_of_eta(s, eta) - 0.5 * (math.atanh(eta) + eta / (1 - eta**2)) for eta in etas]
    eul_err = []
    for eta in etas[::3]:
        t = time_of_eta(s, eta)
        lo, hi = (1 - eta) / 4, (3 + eta) / 4
        x = np.concatenate([np.linspace(0, lo, 7)[1:-1], np.linspace(lo, hi, 9)[1:-1], np.linspace(hi, 1, 7)[1:-1]])
        inner = (lo < x) & (x < hi)
        want = np.where(inner, (1 + eta) * (1 - eta) ** 2, -(1 - eta) * (1 + eta) ** 2)
        eul_err.append(np.max(np.abs(ux_eulerian(s, x, t) - want)))
    return [
        _max_err("t(eta) closed form", t_err, 1e-8),
        _max_err("Eulerian u_x branches", eul_err, 1e-10),
    ]


def _example_6() -> list[Check]:
    s = make_setup(-2.0, preset("pc-ex56"))
    etas = np.linspace(0.0, 0.499, 30)
    errs = []
    for eta in etas:
        a, b = math.sqrt(1 - 2 * eta), math.sqrt(1 + 2 * eta)
        M_want = (a + b) ** 3 / (8 * b * b * a)
        m_want = -((a + b) ** 3) / (8 * a * a * b)
        M, m = extrema_track(s, eta)
        errs += [(M - M_want) / M_want, (m - m_want) / m_want]
    return [
        _near("t_star", blowup_time_estimate(s).value, 2.0 / 3.0, 1e-6),
        _max_err("M, m closed form (relative)", errs, 1e-8),
    ]


EXAMPLES: dict[int, Callable[[], list[Check]]] = {
    1: _example_1,
    2: _example_2,
    3: _example_3,
    4: _example_4,
    5: _example_5,
    6: _example_6,
}


def cmd_reproduce(cfg: RunConfig) -> int:
    checks = EXAMPLES[cfg.example]()
    w = Writer(cfg, {c.name: c.tol for c in checks})
    ok = all(c.passed for c in checks)
    w.report(
        f"example{cfg.example}.json",
        {"example": cfg.example, "checks": [c.__dict__ for c in checks], "pass": ok},
    )
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  example {cfg.example}: {c.name} = {_fmt(c.value)}", file=sys.stderr)
    return 0 if ok else 1


COMMANDS = {"classify": cmd_classify, "solve": cmd_solve, "verify": cmd_verify, "reproduce": cmd_reproduce}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gipj", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"gipj {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_problem: bool = True) -> None:
        if needs_problem:
            p.add_argument("--lambda", dest="lam", type=float, required=True)
            p.add_argument("--data", required=True, help="preset name or YAML/JSON file")
        p.add_argument("--out", help="output directory (default: stdout)")

    p = sub.add_parser("classify", help="theorem verdicts, blow-up time and bounds")
    common(p)
    p.add_argument("--p", type=float, action="append", help="L^p exponent (repeatable, default 2)")
    p.add_argument("--trends", action="store_true", help="also measure trends near eta_star")

    p = sub.add_parser("solve", help="tabulate the representation solution")
    common(p)
    p.add_argument("--eta", type=parse_range, help="a:b:n auxiliary times")
    p.add_argument("--time", type=parse_range, help="a:b:n physical times")
    p.add_argument("--grid-alpha", type=int, default=DEFAULT_GRID_ALPHA)
    p.add_argument("--eulerian", action="store_true", help="also write u_x on a uniform x grid")

    p = sub.add_parser("verify", help="compare against the direct PDE integrator")
    common(p)
    p.add_argument("--time", "--t", dest="time", type=parse_range, required=True)
    p.add_argument("--oracle-n", type=int, default=DEFAULT_ORACLE_N)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("reproduce", help="check a worked example against its reference numbers")
    p.add_argument("example", type=int)
    common(p, needs_problem=False)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    for key in ("lam", "data", "eta", "time", "out", "tol", "grid_alpha", "oracle_n", "eulerian", "trends", "example"):
        if hasattr(ns, key) and getattr(ns, key) is not None:
            setattr(cfg, key, getattr(ns, key))
    if getattr(ns, "p", None):
        cfg.p = list(ns.p)
    cfg.validate()
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, GuardBandError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
