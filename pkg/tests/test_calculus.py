import numpy as np
import pytest
from hypothesis import given, settings

from qgeodesic import calculus as C
from qgeodesic.calculus import THETA, dp, dx
from qgeodesic.ncalg import AlgebraSpec, matrix_represent, normalize, parse_expression

from conftest import element_strategy

H1, H2, H3 = (C.heisenberg_calculus(n) for n in (1, 2, 3))
K2 = C.kg_calculus(2)
K2S = C.kg_calculus(2, static=True)


def ih_over_m(calc):
    alg = calc.algebra
    return alg.ihbar() * alg.sym("m", -1)


# ---------------------------------------------------------------- d on the algebra

def test_d_of_coordinate():
    assert C.d_algebra(H1, H1.x(1)) == H1.basis(dx(1))
    assert C.d_algebra(H1, H1.p(1)) == H1.basis(dp(1))


def test_d_of_square():
    x = H1.x(1)
    expected = H1.basis(dx(1), coeff=2 * x) - H1.basis(THETA, coeff=ih_over_m(H1))
    assert C.d_algebra(H1, x * x) == expected


def test_d_of_square_relativistic_uses_eta():
    # Laplacian along x0 carries the minus sign of the Minkowski metric
    x0 = K2.x(0)
    expected = K2.basis(dx(0), coeff=2 * x0) + K2.basis(THETA, coeff=ih_over_m(K2))
    assert C.d_algebra(K2, x0 * x0) == expected


def test_d_of_hamiltonian():
    from qgeodesic.connection import d_hamiltonian_stated, heisenberg_hamiltonian

    for calc in (H1, H2, H3):
        assert C.d_algebra(calc, heisenberg_hamiltonian(calc)) == d_hamiltonian_stated(calc)


def test_d_of_scalar_vanishes():
    assert C.d_algebra(H2, H2.s(5, m=1)).is_zero()


# ---------------------------------------------------------------- normal forms

def test_push_left_across_dx():
    x1, x2 = H2.x(1), H2.x(2)
    out = C.push_coefficients_left(H2, [[dx(1), x1, dp(2)]])
    expected = H2.basis(dx(1), dp(2), coeff=x1) - H2.basis(THETA, dp(2), coeff=ih_over_m(H2))
    assert out == expected
    out2 = C.push_coefficients_left(H2, [[dx(1), x2, dp(2)]])
    assert out2 == H2.basis(dx(1), dp(2), coeff=x2)


def test_push_left_scalar_unchanged():
    m = H2.algebra.sym("m")
    out = C.push_coefficients_left(H2, [[dx(1), m, dx(2)]])
    assert out == H2.basis(dx(1), dx(2), coeff=m)


def test_theta_central_in_push():
    p = H2.p(2)
    assert C.push_coefficients_left(H2, [[THETA, p]]) == H2.basis(THETA, coeff=p)


def test_push_left_is_idempotent():
    t = C.push_coefficients_left(H1, [[dp(1), H1.x(1), dx(1), H1.p(1)]])
    again = C.push_coefficients_left(H1, [[c, *k] for k, c in t.terms.items()])
    assert again == t


def test_push_left_matches_matrices():
    # a concrete quadratic potential, compared slot-wise against the matrix picture
    alg = AlgebraSpec("nonrel", 1)
    calc = C.heisenberg_calculus(1, {"V": parse_expression("m*nu^2*x1^2/2", alg)})
    x, pm = calc.x(1), calc.p(1)
    t = C.push_coefficients_left(calc, [[dp(1), x]])
    # dp x = x dp + [dp, x] with [dp, x] = 0; dp p = p dp - i hbar m nu^2 theta'
    assert t == calc.basis(dp(1), coeff=x)
    t2 = C.push_coefficients_left(calc, [[dp(1), pm]])
    coeff = t2.terms[(THETA,)]
    M = matrix_represent(coeff, 32, kind="levels")
    assert np.allclose(M, -1j * np.eye(32))
    assert t2.terms[(dp(1),)] == pm


def test_relation_without_entry_is_reported():
    broken = H1.copy()
    del broken.relations[(dx(1), ("x", 1))]
    with pytest.raises(C.CalculusError):
        C.form_bracket(broken, dx(1), H1.x(1))


def test_theta_central_everywhere():
    for calc in (H1, H2, H3, K2, K2S):
        for g in calc.gens():
            assert C.form_bracket(calc, THETA, calc.gen_element(g)).is_zero()


# ---------------------------------------------------------------- wedge and d on forms

def test_wedge_equal_dx_vanishes():
    for i in H2.algebra.indices:
        assert C.wedge(H2.basis(dx(i)), H2.basis(dx(i))).is_zero()


def test_dp_anticommutator():
    alg = H2.algebra
    for i in alg.indices:
        for j in alg.indices:
            s = C.wedge(H2.basis(dp(i)), H2.basis(dp(j))) + C.wedge(H2.basis(dp(j)), H2.basis(dp(i)))
            expected = H2.zero("W")
            for k in alg.indices:
                expected = expected + C.TensorElement(H2, {(dx(k), THETA): alg.ihbar() * H2.V(i, j, k)}, "W")
            assert s == expected


def test_theta_squared_zero():
    assert C.wedge(H1.basis(THETA), H1.basis(THETA)).is_zero()


def test_d_theta_zero():
    assert C.d_form(H2.basis(THETA)).is_zero()


def test_d_of_x_dx():
    # x dx = d(x^2)/2 + (i hbar / 2m) theta', so d(x dx) vanishes by d^2 = 0 and d theta' = 0
    t = H1.basis(dx(1), coeff=H1.x(1))
    assert C.d_form(t).is_zero()
    rebuilt = _halved(C.d_algebra(H1, H1.x(1) * H1.x(1))) + H1.basis(THETA, coeff=ih_over_m(H1) / 2)
    assert rebuilt == t


def _halved(t):
    return C.TensorElement(t.calc, {k: v / 2 for k, v in t.terms.items()})


def test_d_of_omega_tilde_closed():
    from qgeodesic.connection import d_two_form, omega_tilde_stated

    for calc in (H1, H2):
        assert not d_two_form(omega_tilde_stated(calc))


def test_wedge_rejected_on_relativistic():
    with pytest.raises(C.CalculusError):
        C.wedge(K2.basis(dx(0)), K2.basis(dx(1)))


# ---------------------------------------------------------------- suites

@pytest.mark.parametrize("calc", [H1, H2, H3, K2], ids=["n1", "n2", "n3", "rel2"])
def test_first_order_consistency(calc):
    r = C.check_first_order_consistency(calc)
    assert r.passed, [f.identity_id for f in r.failures()]


def test_corrupted_relation_detected():
    broken = H1.copy("broken")
    key = (dx(1), ("x", 1))
    broken.set_relation(*key[:1], key[1], -broken.relations[key])
    r = C.check_first_order_consistency(broken)
    assert not r.passed
    assert C.check_first_order_consistency(H1).passed


def test_two_form_relations():
    for calc in (H1, H2):
        assert C.check_two_form_relations(calc).passed


def test_quotient_images():
    alg = K2.algebra
    assert C.quotient_reduce(K2.basis(dx(0))) == K2.basis(THETA, coeff=-K2.p(0) * alg.sym("m", -1))
    q = alg.sym("q")
    expected = K2.basis(dx(1), coeff=q * K2.F(0, 1)) - K2.basis(
        THETA, coeff=alg.ihbar() * q * alg.sym("m", -1) / 2 * K2.F(0, 1, 1))
    assert C.quotient_reduce(K2.basis(dp(0))) == expected
    assert C.quotient_reduce(K2.basis(THETA)) == K2.basis(THETA)


def test_quotient_consistency():
    assert C.check_quotient_consistency(K2).passed
    flat = C.kg_calculus(2, bindings={"A": [AlgebraSpec("rel", 2).zero()] * 2})
    assert C.check_quotient_consistency(flat).passed


def test_energy_central_and_closed():
    alg = K2S.algebra
    u = -K2S.p(0) - alg.sym("q") * K2S.A(0)
    assert C.central_closed_check(K2S, u).passed
    assert C.central_closed_check(K2S, alg.one()).passed


def test_bare_p0_not_central():
    r = C.central_closed_check(K2, -K2.p(0))
    assert not r.passed
    assert any(f.identity_id.startswith("central.commute[p") for f in r.failures())


# ---------------------------------------------------------------- properties

el_n2 = element_strategy(H2.algebra, max_terms=2)
el_r2 = element_strategy(K2.algebra, max_terms=2)


@settings(max_examples=100)
@given(el_n2, el_n2)
def test_leibniz_nonrel(a, b):
    assert C.check_d_leibniz(H2, a, b).is_zero()


@settings(max_examples=60)
@given(el_r2, el_r2)
def test_leibniz_rel(a, b):
    assert C.check_d_leibniz(K2, a, b).is_zero()


H2_CUBIC = C.heisenberg_calculus(2, {"V": parse_expression("x1^3/3+x1*x2^2+x2", H2.algebra)})


def _momentum_degree(e):
    return max((len(P) for (_, _, P) in e.terms), default=0)


@settings(max_examples=100)
@given(el_n2)
def test_d_squared_zero_low_momentum_degree(a):
    if _momentum_degree(a) <= 2:
        assert C.d_form(C.d_algebra(H2, a)).is_zero()


@settings(max_examples=60)
@given(el_n2)
def test_d_squared_zero_cubic_potential(a):
    e = H2_CUBIC.conc(a)
    assert C.d_form(C.d_algebra(H2_CUBIC, e)).is_zero()


def test_d_squared_obstruction_at_fourth_derivative():
    # the {dp, dp} relation commutes with p only up to hbar^2 V_{,1111}; d^2(p^3) exposes it
    r = C.d_form(C.d_algebra(H1, H1.p(1) ** 3))
    hbar2 = H1.algebra.sym("hbar", 2)
    assert r == C.TensorElement(H1, {(dx(1), THETA): hbar2 * H1.V(1, 1, 1, 1)}, "W")
    anti = H1.anticommutators[(dp(1), dp(1))]
    lhs = C.TensorElement(H1, {k: v * H1.p(1) - H1.p(1) * v for k, v in anti.terms.items()}, "W")
    assert lhs == -r


@given(el_n2, el_n2)
def test_theta_projection_commuting_differentials(a, b):
    # with theta' set to zero every form commutes with position-only functions
    for g in H2.gens():
        br = C.form_bracket(H2, H2.d_gen(g), H2.x(1) * H2.x(2))
        assert C.set_theta_zero(br).is_zero()
    # and d of a commutator of positions stays zero
    assert C.set_theta_zero(C.d_algebra(H2, H2.x(1) * H2.x(2) - H2.x(2) * H2.x(1))).is_zero()


@given(el_n2)
def test_renormalize_idempotent(a):
    once = normalize(H2.algebra, [(1, [a])])
    assert normalize(H2.algebra, [(1, [once])]) == once == a
