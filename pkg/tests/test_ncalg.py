from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgeodesic.ncalg import (
    AlgebraError,
    AlgebraSpec,
    ParseError,
    commutator,
    deriv,
    hbar_order,
    hermite_functions,
    matrix_represent,
    oracle_norm,
    parse_expression,
    substitute,
)

from conftest import element_strategy

N1, N2, N3 = (AlgebraSpec("nonrel", n) for n in (1, 2, 3))
R2, R4 = AlgebraSpec("rel", 2), AlgebraSpec("rel", 4)


# ---------------------------------------------------------------- basic relations

def test_canonical_commutator():
    assert commutator(N1.x(1), N1.p(1)) == N1.ihbar()


def test_positions_commute():
    assert commutator(N2.x(1), N2.x(2)).is_zero()
    assert commutator(N2.x(1), N2.p(2)).is_zero()


def test_normal_order_places_positions_first():
    e = N1.p(1) * N1.x(1)
    assert e == N1.x(1) * N1.p(1) - N1.ihbar()


def test_nonrel_momenta_commute():
    for a in N3.indices:
        for b in N3.indices:
            assert commutator(N3.p(a), N3.p(b)).is_zero()


def test_rel_momenta_swap_gives_field_strength():
    q = R2.sym("q")
    lhs = R2.p(1) * R2.p(0)
    rhs = R2.p(0) * R2.p(1) - R2.ihbar() * q * R2.F(0, 1)
    assert lhs == rhs


def test_rel_positions_commute():
    for a in R4.indices:
        for b in R4.indices:
            assert commutator(R4.x(a), R4.x(b)).is_zero()


def test_potential_against_momentum():
    for i in N2.indices:
        assert commutator(N2.V(), N2.p(i)) == N2.ihbar() * N2.V(i)


def test_potential_commutator_on_grid():
    # [f(x), p] psi = i hbar f'(x) psi, checked with a spectral derivative
    L, n = 10.0, 256
    x = -L + 2 * L * np.arange(n) / n
    k = 2 * np.pi * np.fft.fftfreq(n, d=2 * L / n)
    psi = np.exp(-x ** 2)
    f = x ** 3
    p = lambda u: -1j * np.fft.ifft(1j * k * np.fft.fft(u))
    lhs = f * p(psi) - p(f * psi)
    rhs = 1j * 3 * x ** 2 * psi
    assert np.max(np.abs(lhs - rhs)) < 1e-8
    e = commutator(parse_expression("x1^3", N1), N1.p(1))
    assert e == N1.ihbar() * 3 * N1.x(1) ** 2


def test_scalars_commute_with_everything():
    m = N2.sym("m")
    for g in N2.generators():
        assert commutator(m, g).is_zero()


def test_index_checks():
    with pytest.raises(AlgebraError):
        N2.x(3)
    with pytest.raises(AlgebraError):
        R4.V()
    with pytest.raises(AlgebraError):
        AlgebraSpec("nonrel", 4)
    with pytest.raises(AlgebraError):
        AlgebraSpec("rel", 3)


def test_mixed_specs_rejected():
    with pytest.raises(AlgebraError):
        N1.x(1) * N2.x(1)


def test_static_gauge_drops_time_derivatives():
    S = AlgebraSpec("rel", 4, static=True)
    assert S.A(1, 0).is_zero()
    assert not S.A(1, 2).is_zero()


# ---------------------------------------------------------------- substitution

def test_substitute_sho_second_derivative():
    V = parse_expression("m*nu^2*x1^2/2", N1)
    out = substitute(N1.V(1, 1), {"V": V})
    assert out == N1.sym("m") * N1.sym("nu", 2)


def test_substitute_zero_potential():
    e = N1.V() + N1.V(1) * N1.p(1)
    assert substitute(e, {"V": N1.zero()}).is_zero()


def test_constant_gauge_has_no_field():
    A = [R2.scalar(3), R2.scalar(Fraction(1, 2))]
    assert substitute(R2.F(0, 1), {"A": A}).is_zero()


def test_non_polynomial_binding_rejected():
    with pytest.raises(AlgebraError):
        substitute(N1.V(), {"V": N1.p(1)})
    with pytest.raises(AlgebraError):
        substitute(N1.V(), {"V": N1.V(1)})


def test_substitute_then_commute():
    V = parse_expression("x1^4/4", N1)
    lhs = substitute(commutator(N1.V(), N1.p(1)), {"V": V})
    rhs = commutator(V, N1.p(1))
    assert lhs == rhs


# ---------------------------------------------------------------- parser

def test_parse_polynomial():
    e = parse_expression("x1^2/2", N1)
    assert e == Fraction(1, 2) * N1.x(1) * N1.x(1)


def test_parse_respects_operator_order():
    e = parse_expression("p1*x1", N1)
    assert e == N1.x(1) * N1.p(1) - N1.ihbar()


def test_parse_two_dimensional_oscillator():
    e = parse_expression("m*nu^2*(x1^2+x2^2)/2", N2)
    half = N2.sym("m") * N2.sym("nu", 2) / 2
    assert e == half * N2.x(1) ** 2 + half * N2.x(2) ** 2


def test_parse_negative_scalar_power():
    assert parse_expression("m^-1", N1) == N1.sym("m", -1)


@pytest.mark.parametrize("text,pos", [("x1 + * 2", 5), ("x1^", 3), ("(x1", 3), ("x1 $ 2", 3)])
def test_parse_error_position(text, pos):
    with pytest.raises(ParseError) as info:
        parse_expression(text, N1)
    assert info.value.position == pos


@pytest.mark.parametrize("text", ["x1^(1/2)", "x1^x1", "x1^1.5", "x1/x1", "2 x1", "y1", "x4"])
def test_parse_rejects(text):
    with pytest.raises(ParseError):
        parse_expression(text, N2)


# ---------------------------------------------------------------- matrix representation

def test_grid_representation_of_canonical_relation():
    comm = N1.x(1) * N1.p(1) - N1.p(1) * N1.x(1) - N1.ihbar()
    assert comm.is_zero()
    X = matrix_represent(N1.x(1), 256)
    P = matrix_represent(N1.p(1), 256)
    H = hermite_functions(256, 8)
    R = (X @ P - P @ X) @ H - 1j * H
    assert np.max(np.linalg.norm(R, axis=0) * np.sqrt(20 / 256)) < 1e-10


def test_matrices_hermitian():
    for e in (N1.x(1), N1.p(1)):
        M = matrix_represent(e, 64)
        assert np.allclose(M, M.conj().T, atol=1e-12)


def test_levels_representation_is_exact():
    e = N1.x(1) * N1.p(1) - N1.p(1) * N1.x(1)
    M = matrix_represent(e, 16, kind="levels")
    assert np.allclose(M, 1j * np.eye(16), atol=1e-12)


def test_generic_atoms_not_representable():
    with pytest.raises(AlgebraError):
        matrix_represent(N1.V(), 32)
    with pytest.raises(AlgebraError):
        matrix_represent(N2.x(1), 32)


def test_oracle_norm_of_nonzero_is_large():
    assert oracle_norm(N1.x(1)) > 0.1


# ---------------------------------------------------------------- properties

el1 = element_strategy(N2)
elr = element_strategy(R2)


@given(el1)
def test_normalization_idempotent(a):
    assert a * N2.one() == a
    assert N2.one() * a == a


@given(el1, el1, el1)
def test_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(elr, elr, elr)
def test_associative_rel(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(el1, el1, el1)
def test_jacobi_nonrel(a, b, c):
    j = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
    assert j.is_zero()


@given(elr, elr, elr)
def test_jacobi_rel(a, b, c):
    j = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
    assert j.is_zero()


@given(el1, el1)
def test_classical_limit_commutes(a, b):
    # ab and ba agree at order hbar^0 once the hbar-free parts are compared
    lhs = hbar_order(a * b, 0) - hbar_order(b * a, 0)
    a0, b0 = hbar_order(a, 0), hbar_order(b, 0)
    assert (hbar_order(a0 * b0, 0) - hbar_order(b0 * a0, 0)).is_zero()
    assert hbar_order(commutator(a0, b0), 0).is_zero()
    assert lhs == hbar_order(commutator(a, b), 0)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=3), st.lists(st.integers(0, 3), min_size=1, max_size=3))
def test_representation_is_multiplicative(ca, cb):
    # polynomials in x and p of low degree, compared on smooth probes
    def poly(cs):
        e = N1.zero()
        for k, c in enumerate(cs):
            e = e + c * (N1.x(1) ** k if k % 2 == 0 else N1.p(1) * N1.x(1) ** (k - 1))
        return e
    a, b = poly(ca), poly(cb)
    H = hermite_functions(256, 4)
    Ma, Mb, Mab = (matrix_represent(e, 256) for e in (a, b, a * b))
    err = np.linalg.norm((Ma @ Mb - Mab) @ H, axis=0).max() * np.sqrt(20 / 256)
    scale = 1 + np.linalg.norm(Mab @ H, axis=0).max() * np.sqrt(20 / 256)
    assert err / scale < 1e-8


@given(el1)
def test_derivative_is_leibniz_on_positions(a):
    f = N2.x(1) ** 2 * N2.V(2) + N2.x(2)
    g = N2.x(1) * N2.V()
    assert deriv(f * g, 1) == deriv(f, 1) * g + f * deriv(g, 1)
