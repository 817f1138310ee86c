import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from qgeodesic import phase as Ph
from qgeodesic.calculus import heisenberg_calculus


def _spec(h_fn, n=1, **kw):
    xs, ps = Ph.coordinates(n)
    return Ph.PhaseSpec(n, h_fn(xs, ps), **kw)


def test_vector_field_sho():
    spec = Ph.sho_spec(1, m=2, nu=3)
    x, p = spec.xs[0], spec.ps[0]
    X = Ph.hamiltonian_vector_field(spec)
    assert spec.as_expr(X[0]) == 1
    assert sp.expand(spec.as_expr(X[1]) - p / 2) == 0
    assert sp.expand(spec.as_expr(X[2]) + 18 * x) == 0
    Xb = Ph.hamiltonian_vector_field(spec, extended=False)
    assert spec.as_expr(Xb[0]) == 0


def test_metric_entries():
    spec = _spec(lambda xs, ps: ps[0] ** 2 / 6 + xs[0] ** 4 / 4 - xs[0])
    g = Ph.induced_metric(spec)
    x = spec.xs[0]
    assert spec.as_expr(g[1, 1]) == sp.Rational(1, 3)
    assert sp.expand(spec.as_expr(g[2, 2]) - 3 * x ** 2) == 0
    assert spec.as_expr(g[1, 2]) == 0
    assert all(spec.as_expr(g[0, a]) == 0 for a in range(3))


@settings(max_examples=5)
@given(st.integers(0, 10_000))
def test_metric_symmetric_random_quartic(seed):
    spec = Ph.random_quartic_spec(2, seed)
    g = Ph.induced_metric(spec)
    for a in range(spec.dim):
        for b in range(spec.dim):
            assert g[a, b] == g[b, a]


def test_linear_hamiltonian_flat():
    spec = _spec(lambda xs, ps: 3 * xs[0] - ps[0] + 2)
    assert Ph.induced_metric(spec).is_zero()
    assert Ph.extended_connection(spec).is_zero()


@pytest.mark.parametrize("spec", [Ph.sho_spec(1), Ph.sho_spec(2, m=3, nu=2), Ph.random_quartic_spec(2, 7)],
                         ids=["sho1", "sho2", "quartic2"])
def test_geometry_identities(spec):
    rep = Ph.check_geometry(spec)
    assert rep.passed, rep.summary()
    names = {r.identity_id for r in rep}
    assert "phase.eta-X" in names and "phase.autoparallel" in names


def test_symmetric_variant_torsion_free():
    spec = Ph.random_quartic_spec(1, 3)
    assert Ph.torsion_classical(spec, "symmetric").is_zero()
    assert not Ph.torsion_classical(spec, "standard").is_zero()
    rep = Ph.check_geometry(spec, variant="symmetric")
    failed = {r.identity_id for r in rep.failures()}
    # same symmetric part, so autoparallels survive; parallelism and flatness do not
    assert "phase.autoparallel" not in failed
    assert {"phase.G-parallel", "phase.omega-tilde-parallel", "phase.curvature"} <= failed


def test_tau_mutation_detected():
    rep = Ph.check_geometry(Ph.sho_spec(1, tau=[1, 0]))
    assert not rep.passed
    assert "phase.poisson-torsion-tau" in {r.identity_id for r in rep.failures()}


def test_spec_validation():
    with pytest.raises(Ph.PhaseError):
        Ph.PhaseSpec(0, 0)
    with pytest.raises(Ph.PhaseError):
        _spec(lambda xs, ps: sp.sin(xs[0]))
    with pytest.raises(Ph.PhaseError):
        _spec(lambda xs, ps: ps[0] ** 2, omega=[[1, 0], [0, 1]])
    with pytest.raises(Ph.PhaseError):
        _spec(lambda xs, ps: sp.sqrt(2) * ps[0] ** 2)
    with pytest.raises(Ph.PhaseError):
        Ph.extended_connection(Ph.sho_spec(1), "other")


# ---------------------------------------------------------------- trajectories

def test_sho_autoparallel_matches_cosine():
    spec = Ph.sho_spec(1)
    geo = Ph.geodesic_integrate(spec, [1.0, 0.0], 10.0, 1e-3)
    ham = Ph.hamilton_integrate(spec, [1.0, 0.0], 10.0, 1e-3)
    assert Ph.trajectory_deviation(geo, ham) < 1e-8
    assert np.max(np.abs(geo.states[:, 0] - np.cos(ham.t))) < 1e-8
    assert np.max(np.abs(geo.t - ham.t)) < 1e-9


def test_free_particle_straight_line():
    spec = _spec(lambda xs, ps: ps[0] ** 2 / 2)
    geo = Ph.geodesic_integrate(spec, [0.5, 2.0], 3.0, 1e-2)
    np.testing.assert_allclose(geo.states[:, 0], 0.5 + 2.0 * geo.t, atol=1e-12)
    np.testing.assert_allclose(geo.states[:, 1], 2.0, atol=1e-12)


def test_anharmonic_autoparallel_matches_hamilton():
    spec = _spec(lambda xs, ps: (ps[0] ** 2 + ps[1] ** 2) / 2 + (xs[0] ** 4 + xs[1] ** 4) / 4
                 + xs[0] ** 2 * xs[1] ** 2 / 3, n=2)
    x0 = [0.8, -0.3, 0.1, 0.4]
    geo = Ph.geodesic_integrate(spec, x0, 5.0, 1e-3)
    ham = Ph.hamilton_integrate(spec, x0, 5.0, 1e-3)
    assert Ph.trajectory_deviation(geo, ham) < 1e-7
    sym = Ph.geodesic_integrate(spec, x0, 5.0, 1e-3, variant="symmetric")
    assert Ph.trajectory_deviation(sym, geo) < 1e-12


def test_rk4_fourth_order():
    spec = _spec(lambda xs, ps: ps[0] ** 2 / 2 + xs[0] ** 4 / 4)
    ref = Ph.hamilton_integrate(spec, [1.0, 0.0], 4.0, 1e-3).states[-1]
    errs = [np.max(np.abs(Ph.hamilton_integrate(spec, [1.0, 0.0], 4.0, dt).states[-1] - ref))
            for dt in (0.04, 0.02)]
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.15)


def test_blow_up_detected():
    spec = _spec(lambda xs, ps: ps[0] ** 2 / 2 - xs[0] ** 4)
    with pytest.raises(Ph.PhaseError, match="blow-up"):
        Ph.hamilton_integrate(spec, [2.0, 0.0], 20.0, 1e-3)
    with pytest.raises(Ph.PhaseError):
        Ph.hamilton_integrate(Ph.sho_spec(1), [1.0, 0.0], 1.0, 0.0)


# ---------------------------------------------------------------- semiclassical

@pytest.mark.parametrize("n", [1, 2, 3])
def test_semiclassical_agreement(n):
    rep = Ph.semiclassical_compare(heisenberg_calculus(n))
    assert rep.passed, rep.summary()
    assert len(rep) >= 4
