"""Single-entry sign mutations of the built-in tables, for sensitivity testing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List

from . import calculus as C
from . import connection as K
from .ncalg import AlgebraElement
from .report import Report


@dataclass
class Mutation:
    name: str
    run: Callable[[], Report]

    def detected(self) -> bool:
        return not self.run().passed


def flip_term(t: C.TensorElement, gens, k: int = 0) -> C.TensorElement:
    """Negate the ``k``-th scalar term of the coefficient of ``gens`` in ``t``."""
    coef = t.terms[gens]
    keys = sorted(coef.terms, key=repr)
    key = keys[k % len(keys)]
    new = dict(coef.terms)
    c = new[key]
    new[key] = (-c[0], -c[1])
    terms = dict(t.terms)
    terms[gens] = AlgebraElement(coef.spec, new)
    return C.TensorElement(t.calc, terms, t.grade)


def flip_element(e: AlgebraElement, k: int = 0) -> AlgebraElement:
    keys = sorted(e.terms, key=repr)
    key = keys[k % len(keys)]
    new = dict(e.terms)
    c = new[key]
    new[key] = (-c[0], -c[1])
    return AlgebraElement(e.spec, new)


def _nonrel_connection_report(calc, conn, X=None):
    X = X or K.heisenberg_vector_field(calc)
    r = Report()
    sigma = K.derive_sigma(conn)
    K.check_sigma_bimodule(sigma, calc, r)
    K.geodesic_velocity_check(X, conn, K.heisenberg_hamiltonian(calc), calc, sigma, r)
    K.invariant_structure_check(calc, conn=conn, X=X, report=r)
    return r


def _kg_report(calc, conn=None, X=None):
    conn = conn or K.kg_connection(calc)
    X = X or K.kg_vector_field(calc)
    r = Report()
    sigma = K.derive_sigma(conn)
    K.check_vector_field_bimodule(X, calc, r)
    K.check_sigma_bimodule(sigma, calc, r)
    K.geodesic_velocity_check(X, conn, K.kg_hamiltonian(calc), calc, sigma, r)
    return r


def builtin_mutations(n: int = 2, rel_dim: int = 2) -> List[Mutation]:
    """At least ten mutations across the connection, vector field, G and N, xi, eta pieces."""
    out: List[Mutation] = []
    nc = C.heisenberg_calculus(n)
    base = K.heisenberg_connection(nc)
    dx1, dp1, th = C.dx(1), C.dp(1), C.THETA

    def conn_mut(g, gens, k=0):
        return lambda: _nonrel_connection_report(nc, base.replace(g, flip_term(base.on_gen(g), gens, k)))

    out.append(Mutation("nabla(dx1): theta'(x)dp1", conn_mut(dx1, (th, C.dp(1)))))
    out.append(Mutation("nabla(dp1): theta'(x)dx1", conn_mut(dp1, (th, dx1))))
    out.append(Mutation("nabla(dp1): theta'(x)theta'", conn_mut(dp1, (th, th))))
    if n >= 2:
        out.append(Mutation("nabla(dp1): theta'(x)dx2", conn_mut(dp1, (th, C.dx(2)))))

    Xb = K.heisenberg_vector_field(nc)

    def x_mut(g):
        Xm = Xb.replace(g, -Xb.table[g])

        def run():
            r = Report()
            K.check_vector_field_bimodule(Xm, nc, r)
            K.geodesic_velocity_check(Xm, base, K.heisenberg_hamiltonian(nc), nc, report=r)
            return K.invariant_structure_check(nc, X=Xm, report=r)
        return run

    out.append(Mutation("X(dx1)", x_mut(dx1)))
    out.append(Mutation("X(dp1)", x_mut(dp1)))
    out.append(Mutation("X(theta')", x_mut(th)))

    Gb = K.metric_G(nc)

    def g_mut(gens, k=0):
        return lambda: K.invariant_structure_check(nc, G=flip_term(Gb, gens, k))

    out.append(Mutation("G: dp1(x)dx1", g_mut((dp1, dx1))))
    out.append(Mutation("G: theta'(x)theta'", g_mut((th, th))))
    out.append(Mutation("G: theta'(x)dp1", g_mut((th, dp1))))
    out.append(Mutation("G: dx1(x)theta'", g_mut((dx1, th))))

    rc = C.kg_calculus(rel_dim)
    parts = K.kg_parts(rc)

    def part_mut(kind, c, gens=None, k=0):
        def run():
            p = {key: dict(val) for key, val in parts.items()}
            if kind == "N":
                p["N"][c] = flip_element(p["N"][c], k)
            else:
                p[kind][c] = flip_term(p[kind][c], gens, k)
            return _kg_report(rc, K.kg_connection(rc, p))
        return run

    out.append(Mutation("N_0", part_mut("N", 0)))
    out.append(Mutation("N_1", part_mut("N", 1, k=1)))
    out.append(Mutation("xi_1: dx0", part_mut("xi", 1, (C.dx(0),))))
    out.append(Mutation("eta_0: dx1", part_mut("eta", 0, (C.dx(1),))))
    out.append(Mutation("eta_1: dx1", part_mut("eta", 1, (C.dx(1),), k=1)))
    out.append(Mutation("nabla(dx0): theta'(x)dx1", part_mut("dx-main", 0, (th, C.dx(1)))))
    out.append(Mutation("nabla(dp1): dx0(x)dx1", part_mut("dp-main", 1, (C.dx(0), C.dx(1)))))

    Xk = K.kg_vector_field(rc)
    out.append(Mutation("X(dp1) relativistic", lambda: _kg_report(rc, X=Xk.replace(C.dp(1), flip_element(Xk.table[C.dp(1)])))))
    out.append(Mutation("X(dx0) relativistic", lambda: _kg_report(rc, X=Xk.replace(C.dx(0), -Xk.table[C.dx(0)]))))
    return out
