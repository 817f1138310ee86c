"""Command-line entry point: verification suites, flows, spectra and phase-space runs.

Exit codes: 0 when every check passes, 1 when a verification or simulation
check fails, 2 for usage and domain errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import flow as F
from . import io as qio

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
COMMANDS = ("verify", "simulate", "spectrum", "phase")
SCENARIOS = ("sho", "anti-heisenberg", "nonstandard", "packet")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    target: Optional[str] = None
    dim: Optional[str] = None
    potential: Optional[str] = None
    gauge: str = "generic"
    static: bool = False
    onshell: bool = False
    figure: bool = False
    u: Optional[float] = None
    beta: Optional[float] = None
    nu: Optional[float] = None
    kappa: Optional[float] = None
    Z: Optional[float] = None
    n: Optional[int] = None
    l: Optional[int] = None
    alpha: Optional[float] = None
    grid: Optional[int] = None
    L: Optional[float] = None
    dt: Optional[float] = None
    steps: Optional[int] = None
    s_max: Optional[float] = None
    out: str = "out"
    seed: int = 0
    tolerance: Optional[float] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise UsageError(f"unknown configuration keys: {', '.join(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.command == "simulate" and self.target not in SCENARIOS:
            raise UsageError(f"scenario must be one of {', '.join(SCENARIOS)}")
        if self.command == "spectrum" and self.target != "hydrogen":
            raise UsageError("the only spectrum is 'hydrogen'")
        if self.gauge not in ("generic", "zero"):
            raise UsageError("--gauge must be 'generic' or 'zero'")
        for name in ("dt", "L", "s_max", "tolerance", "u", "nu", "alpha"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        for name in ("grid", "steps", "n"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise UsageError(f"--{name} must be at least 1")
        if self.l is not None and self.l < 0:
            raise UsageError("--l must be non-negative")

    def get(self, name: str, default):
        v = getattr(self, name)
        return default if v is None else v

    def as_dict(self) -> Dict[str, Any]:
        # the output location is not part of the run, so reports compare equal across directories
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None and k != "out"}


@dataclass
class Outcome:
    code: int
    summary: Dict[str, Any]
    files: List[Path] = field(default_factory=list)


# ---------------------------------------------------------------- helpers

def _check(value: float, threshold: float, below: bool = True) -> Dict[str, Any]:
    ok = bool(np.isfinite(value)) and (value < threshold if below else value >= threshold)
    return {"value": float(value), "threshold": float(threshold), "pass": ok}


def _code(checks: Dict[str, Dict[str, Any]]) -> int:
    return EXIT_OK if all(c["pass"] for c in checks.values()) else EXIT_FAIL


def _series_csv(path: Path, series: F.TimeSeries) -> Path:
    return qio.write_csv(path, series.columns(), series.rows())


def _emit(cfg: RunConfig, stem: str, summary: Dict[str, Any], timing: Dict[str, float], files: List[Path]):
    out = Path(cfg.out)
    files.append(qio.write_json(out / f"{stem}.json", summary))
    # wall-clock numbers live apart so the main report is reproducible byte for byte
    files.append(qio.write_json(out / f"{stem}.timing.json", timing))


# ---------------------------------------------------------------- verify

def run_verify(cfg: RunConfig) -> Outcome:
    from .suites import SuiteError, SUITE_IDS, run_suite

    if cfg.target not in SUITE_IDS:
        raise UsageError(f"--suite must be one of {', '.join(SUITE_IDS)}")
    t0 = time.perf_counter()
    try:
        report = run_suite(cfg.target, cfg.dim, cfg.potential, cfg.gauge, cfg.static)
    except SuiteError as exc:
        raise UsageError(str(exc)) from exc
    summary = {
        "config": cfg.as_dict(),
        "identities": [r.as_dict(timing=False) for r in report.results],
        "passed": report.passed,
        "summary": report.summary(),
    }
    timing = {"total_ms": (time.perf_counter() - t0) * 1e3,
              "identities": {r.identity_id: r.elapsed_ms for r in report.results}}
    files: List[Path] = []
    _emit(cfg, f"verify_{cfg.target}", summary, timing, files)
    return Outcome(EXIT_OK if report.passed else EXIT_FAIL, summary, files)


# ---------------------------------------------------------------- simulate

def _sim_sho(cfg: RunConfig):
    nu = cfg.get("nu", 1.0)
    grid = F.Grid(cfg.get("L", 10.0), cfg.get("grid", 1024))
    dt, steps = cfg.get("dt", 1e-3), cfg.get("steps", 2000)
    psi0 = F.coherent_state(grid, x0=1.0, m=1.0, nu=nu)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", F.CFLWarning)
        series = F.sho_evolve(nu, 1.0, 1.0, grid, dt, steps, psi0)
    series.meta.pop("final_state", None)
    dex = F.check_dexpdt(series)
    drift = F.norm_drift(series)
    ref = F.ehrenfest_reference(1.0, 0.0, 1.0, nu, series.values, dt=min(dt, 1e-3))
    ehr = float(np.max(np.abs(series["x"] - ref[:, 0])))
    checks = {
        "norm_drift": _check(drift, cfg.get("tolerance", 1e-10)),
        "dexpdt_residual": _check(dex.max_residual, 1e-3),
        "ehrenfest_x": _check(ehr, 1e-4),
    }
    notes = [str(w.message) for w in caught]
    return series, checks, {"dexpdt_relative": dex.relative, "dexpdt_scale": dex.scale, "warnings": notes}


def _sim_anti(cfg: RunConfig):
    nu, kappa = cfg.get("nu", 1.0), cfg.get("kappa", 0.3)
    # the identity is checked through a central difference, so dt sets its floor
    dt, steps = cfg.get("dt", 1e-4), cfg.get("steps", 100000)
    series = F.anti_heisenberg_evolve(1.0, 0.0, nu, 1.0, kappa, dt, steps)
    chi_ref, _ = F.anti_heisenberg_closed_form(1.0, 0.0, nu, 1.0, kappa, series.values)
    chi = series["chi_re"] + 1j * series["chi_im"]
    inv = F.anti_heisenberg_invariant(series) * np.exp(2 * kappa * series.values)
    checks = {
        "damped_identity": _check(F.damped_identity_residual(series), cfg.get("tolerance", 1e-8)),
        "closed_form_chi": _check(float(np.max(np.abs(chi - chi_ref))), 1e-8),
        "invariant_drift": _check(float(np.max(np.abs(inv - inv[0]))), 1e-8),
    }
    return series, checks, {}


def _sim_nonstandard(cfg: RunConfig):
    levels = cfg.get("grid", 24)
    if levels < 10:
        raise UsageError("nonstandard flow needs --grid of at least 10 levels")
    nu = cfg.get("nu", 1.0)
    a0 = np.zeros((levels, levels), dtype=complex)
    occupied = levels - 4
    a0[np.arange(occupied), np.arange(occupied)] = np.arange(1, occupied + 1)
    rep = F.nonstandard_flow_evolve(a0, nu, cfg.get("steps", 2000), cfg.get("dt", 5e-3))
    channels = {}
    for k in range(occupied):
        channels[f"phase_{k}"] = rep.phase[:, k]
        channels[f"expected_{k}"] = rep.expected[:, k]
        channels[f"magnitude_{k}"] = rep.magnitude[:, k]
    series = F.TimeSeries("t", rep.times, channels, {"nu": nu, "levels": levels})
    mag = np.abs(rep.magnitude[:, :occupied] / rep.magnitude[0, :occupied] - 1.0)
    checks = {
        "phase_relative": _check(rep.max_rel_error, cfg.get("tolerance", 1e-5)),
        "magnitude_drift": _check(float(np.max(mag)), 1e-4),
        "boundary_clear": {"value": float(rep.boundary_flag), "threshold": 0.0, "pass": not rep.boundary_flag},
    }
    return series, checks, {}


def _sim_packet(cfg: RunConfig, files: List[Path]):
    pc = F.PacketConfig(u=cfg.get("u", 1.1), beta=cfg.get("beta", 0.5), s_max=cfg.get("s_max", 5.0),
                        nk=cfg.get("grid", 1201))
    res = F.packet_evolve(pc)
    series = res.series
    xs_pos = F.position_space_mean(res)
    width = F.packet_width(res)
    series.channels["x_position_space"] = xs_pos
    series.channels["width"] = width
    tol = cfg.get("tolerance", 1e-6)
    checks = {
        "t_slope_vs_u": _check(abs(res.time_slope - pc.u), tol),
        "x_affine_residual": _check(res.fits["x"]["max_residual"], 1e-8),
        "x_routes_agree": _check(float(np.max(np.abs(xs_pos - series["x"]))), 1e-6),
    }
    extra = {"momentum": res.momentum, "velocity": res.velocity, "time_slope": res.time_slope}
    # the density itself, so the worldline picture can be redrawn from data alone
    rows = ((s, x, abs(res.psi[i, j]) ** 2) for i, s in enumerate(res.s) for j, x in enumerate(res.x))
    files.append(qio.write_csv(Path(cfg.out) / "packet_density.csv", ["s", "x", "density"], rows))
    if cfg.figure:
        from .figures import packet_figure
        files.append(packet_figure(res, Path(cfg.out) / "packet.png"))
    return series, checks, extra


def run_simulate(cfg: RunConfig) -> Outcome:
    t0 = time.perf_counter()
    files: List[Path] = []
    try:
        if cfg.target == "sho":
            series, checks, extra = _sim_sho(cfg)
        elif cfg.target == "anti-heisenberg":
            series, checks, extra = _sim_anti(cfg)
        elif cfg.target == "nonstandard":
            series, checks, extra = _sim_nonstandard(cfg)
        else:
            series, checks, extra = _sim_packet(cfg, files)
    except F.FlowError as exc:
        raise UsageError(str(exc)) from exc
    stem = cfg.target.replace("-", "_")
    files.append(_series_csv(Path(cfg.out) / f"{stem}.csv", series))
    obs = {name: F.affine_fit(series.values, vals) for name, vals in series.channels.items()}
    summary = {"config": cfg.as_dict(), "observables": obs, "checks": checks, "extra": extra,
               "meta": {k: v for k, v in series.meta.items() if isinstance(v, (int, float, str))}}
    _emit(cfg, f"{stem}_summary", summary, {"total_ms": (time.perf_counter() - t0) * 1e3}, files)
    return Outcome(_code(checks), summary, files)


# ---------------------------------------------------------------- spectrum

def run_spectrum(cfg: RunConfig) -> Outcome:
    t0 = time.perf_counter()
    try:
        hc = F.HydrogenConfig(Z=cfg.get("Z", 1.0), n=cfg.get("n", 1), l=cfg.get("l", 0),
                              u=cfg.get("u", 1.0), onshell=cfg.onshell, alpha=cfg.get("alpha", F.ALPHA))
        res = F.radial_shoot(hc)
    except F.FlowError as exc:
        raise UsageError(str(exc)) from exc
    closed = res.closed_form()
    rel = res.relative_error()
    checks = {"relative_error": _check(rel, cfg.get("tolerance", 1e-6)),
              "node_count": _check(abs(res.nodes - (hc.n - hc.l - 1)), 0.5)}
    mc2_half = hc.m * hc.c ** 2 / 2
    result = {
        "u": res.u, "shooting": res.eigenvalue, "closed_form": closed, "relative_error": rel,
        "binding_shooting": res.binding(), "binding_closed_form": closed - res.u ** 2 / (2 * hc.m * hc.c ** 2),
        "delta_l": F.hydrogen_delta_l(hc.Z, hc.l, hc.alpha), "l_eff": res.l_eff, "nodes": res.nodes,
        "r_crit_bohr": F.r_crit(hc.alpha, hc.Z),
    }
    if hc.onshell:
        result["onshell_target"] = mc2_half
        checks["onshell"] = _check(abs(res.eigenvalue - mc2_half), 1e-9)
    summary = {"config": cfg.as_dict(), "result": result, "checks": checks}
    files: List[Path] = []
    _emit(cfg, "spectrum_hydrogen", summary, {"total_ms": (time.perf_counter() - t0) * 1e3}, files)
    return Outcome(_code(checks), summary, files)


# ---------------------------------------------------------------- phase

def _phase_spec(cfg: RunConfig):
    import sympy as sp

    from . import phase as P

    n = int(cfg.get("dim", "1"))
    nu = sp.nsimplify(cfg.get("nu", 1.0))
    pot = cfg.get("potential", "sho")
    if pot in ("sho", "generic"):
        return P.sho_spec(n, nu=nu)
    if pot == "quartic":
        return P.random_quartic_spec(n, seed=cfg.seed)
    from .ncalg import AlgebraSpec, parse_expression

    e = parse_expression(pot, AlgebraSpec("nonrel", n))
    syms = P._sympy_symbols()
    xs, ps = P.coordinates(n)
    V = P.element_to_sympy(e, xs, ps, sp.Integer(0), syms)
    V = V.subs({syms["m"]: 1, syms["nu"]: nu, syms["hbar"]: 1})
    if V.free_symbols - set(xs):
        raise UsageError(f"potential may only involve x1..x{n}, m and nu")
    return P.PhaseSpec(n, sum(p ** 2 / 2 for p in ps) + V, name="user")


def run_phase(cfg: RunConfig) -> Outcome:
    from . import calculus as C
    from . import phase as P

    t0 = time.perf_counter()
    try:
        spec = _phase_spec(cfg)
    except (P.PhaseError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    report = P.check_geometry(spec)
    if spec.n <= 3:
        P.semiclassical_compare(C.heisenberg_calculus(spec.n), report)
    dt, steps = cfg.get("dt", 1e-3), cfg.get("steps", 10000)
    x0 = np.zeros(2 * spec.n)
    x0[0] = 1.0
    files: List[Path] = []
    try:
        geo = P.geodesic_integrate(spec, x0, steps * dt, dt)
        ham = P.hamilton_integrate(spec, x0, steps * dt, dt)
    except P.PhaseError as exc:
        summary = {"config": cfg.as_dict(), "identities": [r.as_dict(timing=False) for r in report],
                   "error": str(exc)}
        _emit(cfg, "phase_report", summary, {"total_ms": (time.perf_counter() - t0) * 1e3}, files)
        return Outcome(EXIT_FAIL, summary, files)
    dev = P.trajectory_deviation(geo, ham)
    D = 2 * spec.n
    cols = ["t"] + [f"geodesic_x{i}" for i in range(1, D + 1)] + [f"hamilton_x{i}" for i in range(1, D + 1)]
    rows = (np.concatenate([[t], g, h]) for t, g, h in zip(ham.t, geo.states, ham.states))
    files.append(qio.write_csv(Path(cfg.out) / "phase_trajectory.csv", cols, rows))
    if cfg.figure:
        from .figures import trajectory_figure
        files.append(trajectory_figure(geo, ham, Path(cfg.out) / "phase_trajectory.png"))
    checks = {"identities": {"value": float(len(report.failures())), "threshold": 0.0, "pass": report.passed},
              "trajectory_deviation": _check(dev, cfg.get("tolerance", 1e-8))}
    summary = {"config": cfg.as_dict(), "h": str(spec.h_expr),
               "identities": [r.as_dict(timing=False) for r in report], "checks": checks}
    _emit(cfg, "phase_report", summary, {"total_ms": (time.perf_counter() - t0) * 1e3}, files)
    return Outcome(_code(checks), summary, files)


# ---------------------------------------------------------------- parsing and dispatch

def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--figure", action="store_true", help="also render a PNG (needs matplotlib)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qgeodesic", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a symbolic identity suite")
    v.add_argument("--suite", required=True)
    v.add_argument("--dim", help="n for nonrelativistic suites, 4 or 1+3 for spacetime")
    v.add_argument("--potential", help="'generic' or an expression in x1.. and parameters")
    v.add_argument("--gauge", default="generic", choices=("generic", "zero"))
    v.add_argument("--static", action="store_true")
    _common(v)

    s = sub.add_parser("simulate", help="run a numeric flow")
    s.add_argument("scenario", choices=SCENARIOS)
    for name, typ in (("--u", float), ("--beta", float), ("--nu", float), ("--kappa", float),
                      ("--grid", int), ("--L", float), ("--dt", float), ("--steps", int), ("--s-max", float)):
        s.add_argument(name, type=typ)
    _common(s)

    h = sub.add_parser("spectrum", help="hydrogen-like eigenvalues by shooting")
    h.add_argument("system", choices=("hydrogen",))
    h.add_argument("--Z", type=float)
    h.add_argument("--n", type=int)
    h.add_argument("--l", type=int)
    h.add_argument("--u", type=float)
    h.add_argument("--alpha", type=float)
    h.add_argument("--onshell", action="store_true")
    _common(h)

    ph = sub.add_parser("phase", help="classical extended phase space checks and trajectories")
    ph.add_argument("--dim", default="1")
    ph.add_argument("--potential", default="sho", help="'sho', 'quartic' (random, uses --seed) or V(x1..)")
    ph.add_argument("--nu", type=float)
    ph.add_argument("--dt", type=float)
    ph.add_argument("--steps", type=int)
    _common(ph)
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data = dict(vars(args))
    target = data.pop("suite", None) or data.pop("scenario", None) or data.pop("system", None)
    for k in ("suite", "scenario", "system"):
        data.pop(k, None)
    data["target"] = target
    return RunConfig.from_dict(data)


RUNNERS = {"verify": run_verify, "simulate": run_simulate, "spectrum": run_spectrum, "phase": run_phase}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        cfg = config_from_args(args)
        outcome = RUNNERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    checks = outcome.summary.get("checks")
    if checks:
        for name, c in checks.items():
            print(f"{'PASS' if c['pass'] else 'FAIL'} {name}: {c['value']:.6g} (threshold {c['threshold']:.3g})")
    if "error" in outcome.summary:
        print(f"error: {outcome.summary['error']}", file=sys.stderr)
    if "summary" in outcome.summary:
        print(outcome.summary["summary"])
    for f in outcome.files:
        print(f"wrote {f}")
    return outcome.code


if __name__ == "__main__":
    sys.exit(main())
