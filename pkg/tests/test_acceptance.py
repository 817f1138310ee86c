"""One PASS/FAIL line per acceptance criterion, with the measured value and wall time."""

import math
import time
import warnings

import numpy as np
import pytest

from qgeodesic import flow as F
from qgeodesic import phase as Ph
from qgeodesic.calculus import heisenberg_calculus
from qgeodesic.mutations import builtin_mutations
from qgeodesic.oracle import oracle_identities, sho_calculus
from qgeodesic.suites import NONREL_SUITES, REL_SUITES, run_suite

pytestmark = pytest.mark.slow


@pytest.fixture
def line(capsys):
    def emit(k, ok, detail, t0):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail} [{time.perf_counter() - t0:.2f} s]")
        assert ok, detail
    return emit


def test_criterion_1_nonrel_suites(line):
    t0 = time.perf_counter()
    total, failed = 0, []
    for n in (1, 2, 3):
        for suite in NONREL_SUITES:
            rep = run_suite(suite, str(n), "generic")
            total += len(rep)
            failed += [f"{suite}@n={n}:{r.identity_id}" for r in rep.failures()]
    elapsed = time.perf_counter() - t0
    line(1, not failed and elapsed < 60,
         f"{total} identities at n=1,2,3, {len(failed)} nonzero {failed[:3]}, {elapsed:.1f} s (< 60 s)", t0)


def test_criterion_2_rel_suites(line):
    t0 = time.perf_counter()
    total, failed = 0, []
    for suite in REL_SUITES:
        rep = run_suite(suite, "1+3", static=(suite == "lemma5.4"))
        total += len(rep)
        failed += [f"{suite}:{r.identity_id}" for r in rep.failures()]
    elapsed = time.perf_counter() - t0
    line(2, not failed and elapsed < 600,
         f"{total} identities at 1+3, {len(failed)} nonzero {failed[:3]}, {elapsed:.1f} s (< 600 s)", t0)


def test_criterion_3_mutations(line):
    t0 = time.perf_counter()
    muts = builtin_mutations()
    missed = [m.name for m in muts if not m.detected()]
    line(3, len(muts) >= 10 and not missed, f"{len(muts) - len(missed)}/{len(muts)} sign flips detected {missed}", t0)


def test_criterion_4_numeric_oracle(line):
    t0 = time.perf_counter()
    calc = sho_calculus()
    symbolic_ids = set()
    for suite in NONREL_SUITES:
        rep = run_suite(suite, "1", "m*nu^2*x1^2/2")
        assert rep.passed
        symbolic_ids |= {r.identity_id for r in rep}
    norms = oracle_identities(calc, size=256)
    worst = max(norms.values())
    line(4, worst <= 1e-8 and set(norms) == symbolic_ids,
         f"{len(norms)} identities at N=256, max norm {worst:.3e} (<= 1e-8)", t0)


def test_criterion_5_sho_flow(line):
    t0 = time.perf_counter()
    g = F.Grid(10.0, 1024)
    psi0 = F.coherent_state(g, x0=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", F.CFLWarning)
        long = F.sho_evolve(1.0, 1.0, 1.0, g, 1e-3, 10_000, psi0, record_every=100)
        r1 = F.check_dexpdt(F.sho_evolve(1.0, 1.0, 1.0, g, 1e-3, 2000, psi0))
        r2 = F.check_dexpdt(F.sho_evolve(1.0, 1.0, 1.0, g, 5e-4, 4000, psi0))
    drift = F.norm_drift(long)
    ratio = r1.max_residual / r2.max_residual
    ok = drift < 1e-10 and r1.relative and r1.max_residual < 1e-3 and ratio >= 4.0
    line(5, ok, f"norm drift {drift:.2e} (< 1e-10), dexpdt residual {r1.max_residual:.2e} (< 1e-3), "
                f"halving ratio {ratio:.4f} (>= 4)", t0)


def test_criterion_6_packet(line):
    t0 = time.perf_counter()
    res = F.packet_evolve(F.PacketConfig(u=1.1, s_max=5.0))
    elapsed = time.perf_counter() - t0
    errs = {"p": abs(res.momentum - 0.458258), "t/s": abs(res.time_slope - 1.1), "v": abs(res.velocity - 0.416598)}
    resid = res.fits["x"]["max_residual"]
    ok = max(errs.values()) <= 1e-6 and resid < 1e-8 and elapsed < 10
    line(6, ok, f"<p>={res.momentum:.7f} <t>/s={res.time_slope:.7f} v={res.velocity:.7f}, "
                f"affine residual {resid:.1e} (< 1e-8), {elapsed:.2f} s (< 10 s)", t0)


def test_criterion_7_hydrogen(line):
    t0 = time.perf_counter()
    worst = {}
    for Z, tol in ((1, 1e-7), (50, 1e-6)):
        errs = [F.radial_shoot(F.HydrogenConfig(Z=Z, n=n, l=l, u=1.0)).relative_error()
                for n, l in ((1, 0), (2, 0), (2, 1))]
        worst[Z] = (max(errs), tol)
    onshell = max(abs(F.hydrogen_energy(1, n, l, F.onshell_u(1, n, l)) - 0.5)
                  for n, l in ((1, 0), (2, 0), (2, 1)))
    try:
        F.HydrogenConfig(Z=100, alpha=1 / 137.036)
        rejected = False
    except F.DomainError:
        rejected = True
    ok = all(e < tol for e, tol in worst.values()) and onshell < 1e-9 and rejected
    line(7, ok, f"rel err Z=1 {worst[1][0]:.1e} (< 1e-7), Z=50 {worst[50][0]:.1e} (< 1e-6), "
                f"on-shell {onshell:.1e} (< 1e-9), Z=100 rejected={rejected}", t0)


def test_criterion_8_phase(line):
    t0 = time.perf_counter()
    geo_fail = []
    for spec in (Ph.sho_spec(2), Ph.random_quartic_spec(2, seed=0)):
        geo_fail += [r.identity_id for r in Ph.check_geometry(spec).failures()]
    sho = Ph.sho_spec(1)
    dev = Ph.trajectory_deviation(Ph.geodesic_integrate(sho, [1.0, 0.0], 10.0, 1e-3),
                                  Ph.hamilton_integrate(sho, [1.0, 0.0], 10.0, 1e-3))
    semi = [r.identity_id for n in (1, 2, 3) for r in Ph.semiclassical_compare(heisenberg_calculus(n)).failures()]
    ok = not geo_fail and dev < 1e-8 and not semi
    line(8, ok, f"geometry nonzero {geo_fail}, trajectory deviation {dev:.1e} (< 1e-8), "
                f"semiclassical failures {semi}", t0)
