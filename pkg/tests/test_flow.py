import math
import warnings

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from qgeodesic import flow as F

ALPHA = F.ALPHA


@pytest.fixture(autouse=True)
def _quiet_cfl():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", F.CFLWarning)
        yield


# ---------------------------------------------------------------- grid and states

def test_grid_validation():
    with pytest.raises(F.FlowError):
        F.Grid(10.0, 100)
    with pytest.raises(F.FlowError):
        F.Grid(10.0, 8)
    with pytest.raises(F.FlowError):
        F.Grid(-1.0, 64)
    g = F.Grid(10.0, 64)
    assert g.dx == pytest.approx(20 / 64)


def test_wave_function_rejects_nonfinite():
    g = F.Grid(5.0, 16)
    with pytest.raises(F.FlowError):
        F.WaveFunction(g, np.full(16, np.nan))


def test_unnormalized_initial_state_rejected():
    g = F.Grid(10.0, 128)
    with pytest.raises(F.FlowError):
        F.sho_evolve(1, 1, 1, g, 1e-3, 1, F.WaveFunction(g, 2 * F.coherent_state(g).psi))


def test_time_series_monotone():
    with pytest.raises(F.FlowError):
        F.TimeSeries("t", [0.0, 1.0, 0.5])


# ---------------------------------------------------------------- Schrödinger flow

def test_ground_state_stationary():
    g = F.Grid(10.0, 256)
    s = F.sho_evolve(1.0, 1.0, 1.0, g, 1e-3, 500, F.coherent_state(g))
    # odd moments vanish by symmetry; even ones move only at the O(dt^2) splitting level
    for ch in ("x", "p"):
        assert np.max(np.abs(s[ch])) < 1e-12
    for ch in ("p2", "xp_px"):
        assert np.ptp(s[ch]) < 1e-6
    energy = s["p2"][0] / 2 + 0.5 * np.sum(g.x ** 2 * np.abs(F.coherent_state(g).psi) ** 2) * g.dx
    assert energy == pytest.approx(0.5, abs=1e-10)


def test_displaced_state_follows_ehrenfest():
    g = F.Grid(10.0, 512)
    s = F.sho_evolve(1.0, 1.0, 1.0, g, 1e-3, 3000, F.coherent_state(g, 1.0), record_every=10)
    # independent route: integrate the Ehrenfest ODE with an adaptive solver
    sol = solve_ivp(lambda t, y: [y[1], -y[0]], (0, s.values[-1]), [1.0, 0.0], t_eval=s.values,
                    rtol=1e-12, atol=1e-13)
    assert np.max(np.abs(s["x"] - sol.y[0])) < 1e-5
    assert np.max(np.abs(s["x"] - np.cos(s.values))) < 1e-5
    ref = F.ehrenfest_reference(1.0, 0.0, 1.0, 1.0, s.values)
    assert np.max(np.abs(ref[:, 0] - sol.y[0])) < 1e-8


def test_free_packet_momentum_constant():
    g = F.Grid(20.0, 512)
    s = F.sho_evolve(0.0, 1.0, 1.0, g, 1e-3, 1000, F.coherent_state(g, 0.0, 0.7, nu=1.0))
    assert np.ptp(s["p"]) < 1e-12
    assert s["p"][0] == pytest.approx(0.7, abs=1e-10)


def test_cfl_warning():
    g = F.Grid(10.0, 1024)
    with pytest.warns(F.CFLWarning):
        F.sho_evolve(1, 1, 1, g, 1e-2, 1, F.coherent_state(g))


def test_norm_conservation():
    g = F.Grid(10.0, 1024)
    s = F.sho_evolve(1.0, 1.0, 1.0, g, 1e-3, 10000, F.coherent_state(g, 1.0), record_every=50)
    assert F.norm_drift(s) < 1e-10


def test_dexpdt_residual_and_order():
    g = F.Grid(10.0, 1024)
    res = []
    for dt in (1e-3, 5e-4):
        s = F.sho_evolve(1.0, 1.0, 1.0, g, dt, int(round(2.0 / dt)), F.coherent_state(g, 1.0))
        res.append(F.check_dexpdt(s).max_residual)
    assert res[0] < 1e-3
    assert res[0] / res[1] >= 4.0 * 0.99


def test_dexpdt_order_both_splittings():
    g = F.Grid(10.0, 512)
    for order in ("kvk", "vkv"):
        res = []
        for dt in (2e-3, 1e-3):
            s = F.sho_evolve(1.0, 1.0, 1.0, g, dt, int(round(1.0 / dt)), F.coherent_state(g, 1.0), order=order)
            res.append(F.check_dexpdt(s).max_residual)
        assert res[0] / res[1] == pytest.approx(4.0, rel=0.02)


def test_dexpdt_stationary_both_sides_zero():
    g = F.Grid(10.0, 256)
    d = F.check_dexpdt(F.sho_evolve(1.0, 1.0, 1.0, g, 1e-3, 200, F.coherent_state(g)))
    assert np.max(np.abs(d.lhs)) < 1e-6
    assert np.max(np.abs(d.rhs)) < 1e-6


# ---------------------------------------------------------------- anti-Heisenberg

def test_anti_heisenberg_undamped_closed_form():
    s = F.anti_heisenberg_evolve(1.0, 0.5, 1.0, 1.0, 0.0, 1e-3, 5000)
    t = s.values
    chi = 1.0 * np.cos(t) + 0.5 * 1.0 * 1.0 * np.sin(t)
    assert np.max(np.abs(s["chi_re"] - chi)) < 1e-8


def test_anti_heisenberg_invariant():
    s = F.anti_heisenberg_evolve(1.0, 0.5, 1.0, 1.0, 0.0, 1e-4, 20000)
    assert np.ptp(F.anti_heisenberg_invariant(s)) < 1e-10


def test_anti_heisenberg_damped_identity():
    s = F.anti_heisenberg_evolve(1.0, 0.5, 1.3, 0.7, 0.3, 1e-4, 50000)
    assert F.damped_identity_residual(s) < 1e-8
    cf = F.anti_heisenberg_closed_form(1.0, 0.5, 1.3, 0.7, 0.3, s.values)
    assert np.max(np.abs(s["chi_re"] - cf[0].real)) < 1e-8


def test_anti_heisenberg_zero():
    s = F.anti_heisenberg_evolve(0.0, 0.0, 1.0, 1.0, 0.2, 1e-3, 100)
    assert not np.any(s["chi_re"]) and not np.any(s["chi_im"])


# ---------------------------------------------------------------- nonstandard flow

def test_nonstandard_diagonal_phases():
    padded = np.zeros((12, 12))
    padded[:10, :10] = np.diag(np.arange(1, 11.0))
    r = F.nonstandard_flow_evolve(padded, 1.0, 1000, 1e-2)
    assert r.max_rel_error < 1e-6
    assert not r.boundary_flag


def test_nonstandard_identity_unit_magnitude():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", F.BoundaryWarning)
        r = F.nonstandard_flow_evolve(np.eye(10), 1.0, 2500, 2e-3)
    assert r.max_rel_error < 1e-6
    assert np.max(np.abs(r.magnitude - 1.0)) < 1e-6
    assert r.boundary_flag


def test_nonstandard_projector_matches_exponential():
    from scipy.linalg import expm

    a0 = np.zeros((10, 10), dtype=complex)
    a0[0, 0] = 1.0
    r = F.nonstandard_flow_evolve(a0, 1.0, 400, 5e-3)
    assert np.ptp(r.magnitude[:, 0]) < 1e-9
    H = F.oscillator_hamiltonian(10)
    ref = expm(H * r.times[-1] / 1j) @ a0
    assert np.max(np.abs(r.final - ref)) < 1e-9


def test_nonstandard_boundary_flag():
    with pytest.warns(F.BoundaryWarning):
        r = F.nonstandard_flow_evolve(np.diag(np.ones(8)), 1.0, 10, 1e-2)
    assert r.boundary_flag
    with pytest.raises(F.FlowError):
        F.nonstandard_flow_evolve(np.eye(4), 1.0, 10)


# ---------------------------------------------------------------- packet

@pytest.fixture(scope="module")
def packet():
    return F.packet_evolve(F.PacketConfig(u=1.1, beta=0.5, s_max=5.0))


def test_packet_momentum(packet):
    assert packet.momentum == pytest.approx(math.sqrt(1.1 ** 2 - 1), abs=1e-6)
    assert abs(packet.momentum - 0.458258) < 1e-6


def test_packet_time_slope(packet):
    assert abs(packet.time_slope - 1.1) < 1e-6
    assert abs(packet.fits["t"]["intercept"]) < 1e-8


def test_packet_velocity(packet):
    v = math.sqrt(1 - (1 / 1.1) ** 2)
    assert abs(packet.velocity - v) < 1e-6
    assert abs(packet.velocity - 0.416598) < 1e-6


def test_packet_affine(packet):
    for ch in ("x", "t"):
        assert packet.fits[ch]["max_residual"] < 1e-8
        assert abs(packet.fits[ch]["intercept"]) < 1e-8


def test_packet_triangle(packet):
    np.testing.assert_allclose(packet.velocity * packet.series["t"], packet.series["x"], atol=1e-8)


def test_packet_position_routes_agree(packet):
    assert np.max(np.abs(F.position_space_mean(packet) - packet.series["x"])) < 1e-6


def test_packet_spreads(packet):
    w = F.packet_width(packet)
    assert w[-1] > w[0]


def test_packet_domain():
    with pytest.raises(F.DomainError):
        F.PacketConfig(u=0.9)
    with pytest.raises(F.DomainError):
        F.PacketConfig(beta=0.0)
    with pytest.warns(F.AccuracyWarning):
        F.packet_evolve(F.PacketConfig(widths=4.0, nk=201, ns=3))


# ---------------------------------------------------------------- hydrogen closed forms

def test_delta_l_value():
    import mpmath as mp

    mp.mp.dps = 40
    a = mp.mpf("7.2973525693e-3")
    ref = mp.mpf(1) / 2 - mp.sqrt(mp.mpf(1) / 4 - a ** 2)
    assert F.hydrogen_delta_l(1, 0, 7.2973525693e-3) == pytest.approx(float(ref), rel=1e-12)
    assert F.hydrogen_delta_l(1, 0, 7.2973525693e-3) == pytest.approx(5.3257e-5, rel=1e-4)


def test_free_limit():
    assert F.hydrogen_delta_l(0, 2) == 0.0
    assert F.hydrogen_energy(0, 3, 1, 1.3) == pytest.approx(1.3 ** 2 / 2)


def test_onshell_energy():
    for Z, n, l in ((1, 1, 0), (1, 2, 1), (50, 2, 0), (80, 3, 2)):
        u = F.onshell_u(Z, n, l)
        assert abs(F.hydrogen_energy(Z, n, l, u) - 0.5) < 1e-12


def test_supercritical_rejected():
    with pytest.raises(F.DomainError):
        F.hydrogen_delta_l(100, 0, 1 / 137.036)
    with pytest.raises(F.DomainError):
        F.HydrogenConfig(Z=100, alpha=1 / 137.036)
    with pytest.raises(F.DomainError):
        F.HydrogenConfig(n=1, l=1)


def test_effective_potential_terms_equal_at_rcrit():
    for Z in (1, 7):
        r = F.r_crit(Z=Z, bohr=False)
        za = Z * ALPHA
        assert za / r == pytest.approx(za ** 2 / (2 * r ** 2), rel=1e-12)
    assert F.r_crit(bohr=True) == pytest.approx(0.5 * ALPHA ** 2, rel=1e-12)
    assert F.r_crit(Z=3, bohr=True) == pytest.approx(3 * F.r_crit(bohr=True), rel=1e-12)
    with pytest.raises(F.DomainError):
        F.effective_potential(0.0)
    assert F.effective_potential(1.0, Z=1) == pytest.approx(-ALPHA - ALPHA ** 2 / 2)


# ---------------------------------------------------------------- radial shooting

@pytest.mark.parametrize("Z,tol", [(1, 1e-7), (50, 1e-6)])
@pytest.mark.parametrize("n,l", [(1, 0), (2, 0), (2, 1)])
def test_shooting_matches_closed_form(Z, tol, n, l):
    r = F.radial_shoot(F.HydrogenConfig(Z=Z, n=n, l=l, u=1.0))
    assert r.relative_error() < tol
    assert r.nodes == n - l - 1


def test_shooting_eigenfunction_shape():
    for Z, n, l in ((1, 2, 0), (50, 2, 1), (50, 3, 0)):
        r = F.radial_shoot(F.HydrogenConfig(Z=Z, n=n, l=l, u=1.0))
        c = F.radial_closed_shape(r)
        assert np.max(np.abs(np.abs(r.w) - np.abs(c))) < 1e-4


def test_numerov_fourth_order():
    cfg = F.HydrogenConfig(Z=50, n=1, l=0, u=1.0)
    exact = -0.5 / (cfg.n - F.hydrogen_delta_l(cfg.Z, cfg.l, cfg.alpha)) ** 2
    errs = [abs(F.radial_shoot(cfg, step=h).scaled - exact) for h in (0.04, 0.02, 0.01)]
    assert errs[0] / errs[1] >= 16 * 0.9
    assert errs[1] / errs[2] >= 16 * 0.9


def test_bracket_error():
    with pytest.raises(F.BracketError):
        F.radial_shoot(F.HydrogenConfig(Z=1, n=2, l=0), bracket=(-2.5, -1.0))
