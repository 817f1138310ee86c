"""Bimodule connections, derived braidings, vector fields and the invariant tensor.

A connection is a table ``{generator: rank-2 tensor}`` and is extended to all
1-forms by the right Leibniz rule ``nabla(w b) = nabla(w) b + w (x) db``. The
braiding is never tabulated by hand: :func:`derive_sigma` computes it from
``sigma(dg (x) w) = w (x) dg + [nabla w, g] - nabla([w, g])``.
"""

from __future__ import annotations

from typing import Dict, Mapping, Optional, Tuple

from .calculus import (
    THETA,
    CalculusError,
    CalculusSpec,
    Gen,
    TensorElement,
    bracket,
    d_algebra,
    d_form,
    dp,
    dx,
    form_bracket,
    gen_name,
    lmul,
    quotient_reduce,
    reduced_images,
    rmul,
    tensor,
    wedge,
    wedge23,
    wedge_project,
)
from .ncalg import ONE, AlgebraElement
from .report import Report

SigmaTable = Dict[Tuple[Gen, Gen], TensorElement]


class Connection:
    """Right bimodule connection given on generators."""

    def __init__(self, calc: CalculusSpec, table: Mapping[Gen, TensorElement], name: str = ""):
        self.calc = calc
        self.table = {g: calc.rebind(t) for g, t in table.items()}
        self.name = name
        self._cache: Dict = {}

    def on_gen(self, g: Gen) -> TensorElement:
        if g == THETA and THETA not in self.table:
            return self.calc.zero()
        return self.table[g]

    def replace(self, g: Gen, value: TensorElement) -> "Connection":
        table = dict(self.table)
        table[g] = value
        return Connection(self.calc, table, self.name)

    def __call__(self, t: TensorElement) -> TensorElement:
        return nabla(self, t)


class VectorField:
    """Bimodule map from 1-forms to the algebra, given on generators."""

    def __init__(self, calc: CalculusSpec, table: Mapping[Gen, AlgebraElement]):
        self.calc = calc
        self.table = dict(table)

    def replace(self, g: Gen, value: AlgebraElement) -> "VectorField":
        table = dict(self.table)
        table[g] = value
        return VectorField(self.calc, table)

    def __call__(self, t: TensorElement) -> AlgebraElement:
        out = self.calc.algebra.zero()
        for (g,), c in t.terms.items():
            out = out + c * self.table[g]
        return out

    def pair(self, t: TensorElement) -> AlgebraElement:
        """``(X (x) X)`` on a rank-2 tensor."""
        out = self.calc.algebra.zero()
        for (g1, g2), c in t.terms.items():
            out = out + c * self.table[g1] * self.table[g2]
        return out

    def left(self, t: TensorElement) -> TensorElement:
        """``(X (x) id)`` on a rank-2 tensor."""
        out = self.calc.zero()
        for (g1, g2), c in t.terms.items():
            out = out + lmul(c * self.table[g1], self.calc.basis(g2))
        return out

    def right(self, t: TensorElement) -> TensorElement:
        """``(id (x) X)`` on a rank-2 tensor."""
        out = self.calc.zero()
        for (g1, g2), c in t.terms.items():
            out = out + lmul(c, rmul(self.calc.basis(g1), self.table[g2]))
        return out


# ---------------------------------------------------------------------------
# Extension of a connection to arbitrary 1-forms


def _nabla_coeff_gen(conn: Connection, G: Gen, f, P) -> TensorElement:
    """``nabla(c G)`` for a unit monomial coefficient ``c = f p_P``."""
    key = (G, f, P)
    cache = conn._cache
    if key in cache:
        return cache[key]
    calc = conn.calc
    alg = calc.algebra
    c = AlgebraElement(alg, {((), f, P): ONE})
    base = conn.on_gen(G)
    if not f and not P:
        out = base
    else:
        # c G = G c - [G, c]
        out = rmul(base, c) + tensor(calc.basis(G), d_algebra(calc, c)) - nabla(conn, form_bracket(calc, G, c))
    cache[key] = out
    return out


def nabla(conn: Connection, t: TensorElement) -> TensorElement:
    """Connection applied to a left-normalized 1-form."""
    calc = conn.calc
    out = calc.zero()
    for (G,), c in t.terms.items():
        for (mn, f, P), g in c.terms.items():
            piece = _nabla_coeff_gen(conn, G, f, P)
            scal = AlgebraElement(calc.algebra, {(mn, (), ()): g})
            out = out + lmul(scal, piece)
    return out


def nabla2(conn: Connection, sigma: SigmaTable, t: TensorElement) -> TensorElement:
    """Tensor-product connection ``(id (x) sigma)(nabla (x) id) + id (x) nabla`` on rank 2."""
    calc = conn.calc
    out = calc.zero()
    for (a, w), c in t.terms.items():
        first = nabla(conn, calc.basis(a, coeff=c))
        for (b, g), c2 in first.terms.items():
            out = out + lmul(c2, tensor(calc.basis(b), sigma_apply(sigma, calc.basis(g, w))))
        out = out + lmul(c, tensor(calc.basis(a), nabla(conn, calc.basis(w))))
    return out


# ---------------------------------------------------------------------------
# Built-in connections and vector fields


def heisenberg_connection(calc: CalculusSpec) -> Connection:
    alg = calc.algebra
    minv, ih = alg.sym("m", -1), alg.ihbar()
    table: Dict[Gen, TensorElement] = {THETA: calc.zero()}
    for i in alg.indices:
        table[dx(i)] = calc.basis(THETA, dp(i), coeff=minv * alg.one())
        t = calc.zero()
        for j in alg.indices:
            t = t + calc.basis(THETA, dx(j), coeff=-calc.V(i, j))
        lap_grad = alg.zero()
        for j in alg.indices:
            lap_grad = lap_grad + calc.V(i, j, j)
        t = t + calc.basis(THETA, THETA, coeff=(ih * minv / 2) * lap_grad)
        table[dp(i)] = t
    return Connection(calc, table, "heisenberg")


def heisenberg_vector_field(calc: CalculusSpec) -> VectorField:
    alg = calc.algebra
    table = {THETA: alg.one()}
    for i in alg.indices:
        table[dx(i)] = calc.p(i) / alg.sym("m")
        table[dp(i)] = -calc.V(i)
    return VectorField(calc, table)


def heisenberg_hamiltonian(calc: CalculusSpec) -> AlgebraElement:
    alg = calc.algebra
    h = calc.V()
    for i in alg.indices:
        h = h + calc.p(i) * calc.p(i) / (2 * alg.sym("m"))
    return h


def kg_parts(calc: CalculusSpec) -> Dict[str, Dict[int, object]]:
    """The pieces ``N_c``, ``xi_c``, ``eta_c`` and both connection main terms."""
    alg = calc.algebra
    idx = alg.indices
    eta = alg.eta
    F = calc.F
    ih = alg.ihbar()
    hbar, q = alg.sym("hbar"), alg.sym("q")
    m = alg.sym("m")
    N, xi, et, dxmain, dxtt, dpmain = {}, {}, {}, {}, {}, {}
    for c in idx:
        n_c = alg.zero()
        for nn in idx:
            for a in idx:
                n_c = n_c - (ih * q * q / (2 * m * m)) * eta(nn) * eta(a) * (
                    2 * F(a, nn) * F(nn, c, a) + F(a, nn, a) * F(nn, c))
                n_c = n_c + (hbar * hbar * q / (4 * m * m)) * eta(nn) * eta(a) * F(a, c, a, nn, nn)
        N[c] = n_c
        x_c = calc.zero()
        e_c = calc.zero()
        for a in idx:
            s_xi = alg.zero()
            s_eta = alg.zero()
            for nn in idx:
                s_xi = s_xi + eta(nn) * F(a, c, nn, nn)
                s_eta = s_eta + eta(nn) * F(nn, c, nn, a)
            x_c = x_c + calc.basis(dx(a), coeff=-(ih * q / (2 * m)) * s_xi)
            s2 = alg.zero()
            for e in idx:
                s2 = s2 + eta(e) * F(e, c) * F(a, e)
            e_c = e_c + calc.basis(dx(a), coeff=-(ih * q / (2 * m)) * s_eta - (q * q / m) * s2)
        xi[c] = x_c
        et[c] = e_c
        main = calc.zero()
        for d in idx:
            for e in idx:
                main = main + calc.basis(dx(d), dx(e), coeff=-q * F(d, c, e))
        dpmain[c] = main
    for d in idx:
        t = calc.zero()
        for a in idx:
            t = t + calc.basis(THETA, dx(a), coeff=-(q / m) * eta(d) * F(a, d))
        dxmain[d] = t
        s = alg.zero()
        for a in idx:
            s = s + eta(a) * eta(d) * F(a, d, a)
        dxtt[d] = calc.basis(THETA, THETA, coeff=(ih * q / (2 * m * m)) * s)
    return {"N": N, "xi": xi, "eta": et, "dx-main": dxmain, "dx-theta": dxtt, "dp-main": dpmain}


def kg_connection(calc: CalculusSpec, parts: Optional[Mapping] = None) -> Connection:
    parts = parts if parts is not None else kg_parts(calc)
    table: Dict[Gen, TensorElement] = {THETA: calc.zero()}
    th = calc.basis(THETA)
    for d in calc.algebra.indices:
        table[dx(d)] = parts["dx-main"][d] + parts["dx-theta"][d]
        table[dp(d)] = (parts["dp-main"][d] - tensor(parts["xi"][d], th) - tensor(th, parts["eta"][d])
                        + calc.basis(THETA, THETA, coeff=parts["N"][d]))
    return Connection(calc, table, "kg")


def kg_vector_field(calc: CalculusSpec) -> VectorField:
    alg = calc.algebra
    idx = alg.indices
    m, q, ih = alg.sym("m"), alg.sym("q"), alg.ihbar()
    table = {THETA: alg.one()}
    for a in idx:
        table[dx(a)] = alg.eta(a) * calc.p(a) / m
    for c in idx:
        s = alg.zero()
        for a in idx:
            s = s + alg.eta(a) * (2 * calc.F(c, a) * calc.p(a) - ih * calc.F(c, a, a))
        table[dp(c)] = (q / (2 * m)) * s
    return VectorField(calc, table)


def kg_hamiltonian(calc: CalculusSpec) -> AlgebraElement:
    """``eta^{ab} p_a p_b / 2m``; the 1/hbar normalization is absorbed in the bracket."""
    alg = calc.algebra
    h = alg.zero()
    for a in alg.indices:
        h = h + alg.eta(a) * calc.p(a) * calc.p(a)
    return h / (2 * alg.sym("m"))


# ---------------------------------------------------------------------------
# Braiding


def derive_sigma(conn: Connection) -> SigmaTable:
    """Braiding on generator pairs, derived from the connection."""
    calc = conn.calc
    table: SigmaTable = {}
    for w in calc.form_generators():
        table[(THETA, w)] = calc.basis(w, THETA)
        for g in calc.gens():
            e = calc.gen_element(g)
            G = calc.d_gen(g)
            val = calc.basis(w, G) + bracket(conn.on_gen(w), e) - nabla(conn, form_bracket(calc, w, e))
            if val.grade != "T" or any(len(k) != 2 for k in val.terms):
                raise CalculusError(f"braiding entry for {gen_name(G)} (x) {gen_name(w)} is not a rank-2 tensor")
            table[(G, w)] = val
    return table


def sigma_apply(sigma: SigmaTable, t: TensorElement) -> TensorElement:
    out = t.calc.zero()
    for (g1, g2), c in t.terms.items():
        out = out + lmul(c, sigma[(g1, g2)])
    return out


def stated_sigma_heisenberg(calc: CalculusSpec) -> SigmaTable:
    alg = calc.algebra
    ih, minv = alg.ihbar(), alg.sym("m", -1)
    tt = lambda c: calc.basis(THETA, THETA, coeff=c)
    out: SigmaTable = {}
    for g in calc.form_generators():
        out[(THETA, g)] = calc.basis(g, THETA)
        out[(g, THETA)] = calc.basis(THETA, g)
    for i in alg.indices:
        for j in alg.indices:
            out[(dx(i), dx(j))] = calc.basis(dx(j), dx(i))
            out[(dp(i), dp(j))] = calc.basis(dp(j), dp(i))
            out[(dx(i), dp(j))] = calc.basis(dp(j), dx(i)) + tt(ih * minv * calc.V(j, i))
            out[(dp(i), dx(j))] = calc.basis(dx(j), dp(i)) - tt(ih * minv * calc.V(i, j))
    return out


def stated_sigma_kg(calc: CalculusSpec) -> SigmaTable:
    alg = calc.algebra
    idx = alg.indices
    eta = alg.eta
    F = calc.F
    ih = alg.ihbar()
    hbar, q, m = alg.sym("hbar"), alg.sym("q"), alg.sym("m")
    th = calc.basis(THETA)
    tt = lambda c: calc.basis(THETA, THETA, coeff=c)
    out: SigmaTable = {}
    for g in calc.form_generators():
        out[(THETA, g)] = calc.basis(g, THETA)
        out[(g, THETA)] = calc.basis(THETA, g)
    for e in idx:
        for d in idx:
            # dx^e (x) dx^d
            out[(dx(e), dx(d))] = calc.basis(dx(d), dx(e)) + tt(
                (ih * q / (m * m)) * eta(d) * eta(e) * F(e, d))
            # dp_e (x) dx^d
            inner = calc.zero()
            for a in idx:
                inner = inner + calc.basis(dx(a), coeff=-F(a, e, d))
            s1 = alg.zero()
            s2 = alg.zero()
            for a in idx:
                s1 = s1 + F(a, d) * eta(a) * F(a, e)
                s2 = s2 + eta(a) * F(a, e, d, a)
            inner = inner + calc.basis(THETA, coeff=-(q / m) * s1 + (ih / (2 * m)) * s2)
            out[(dp(e), dx(d))] = calc.basis(dx(d), dp(e)) + lmul((ih * q / m) * eta(d), tensor(th, inner))
    for a in idx:
        for c in idx:
            t = calc.basis(dp(c), dx(a))
            for d in idx:
                t = t + calc.basis(dx(d), THETA, coeff=(ih * q / m) * eta(a) * F(d, c, a))
            M = alg.zero()
            for b in idx:
                M = M - (ih * q * q / (m * m)) * eta(b) * eta(a) * F(b, c) * F(a, b)
                M = M + (hbar * hbar * q / (2 * m * m)) * eta(a) * eta(b) * F(b, c, b, a)
            out[(dx(a), dp(c))] = t + tt(M)
    for e in idx:
        for d in idx:
            t = calc.basis(dp(d), dp(e))
            for r in idx:
                for a in idx:
                    t = t + calc.basis(THETA, dx(a), coeff=(ih * q * q / m) * eta(r) * F(r, d) * F(a, e, r))
                    t = t - calc.basis(dx(a), THETA, coeff=(ih * q * q / m) * eta(r) * F(r, e) * F(a, d, r))
            c3 = alg.zero()
            c2 = alg.zero()
            for r in idx:
                for b in idx:
                    c3 = c3 + eta(r) * eta(b) * F(r, e) * F(b, d) * F(r, b)
                    c2 = c2 + eta(r) * eta(b) * (F(r, d) * F(b, e, b, r) - F(r, d, b, r) * F(b, e))
            t = t + tt((ih * q * q * q / (m * m)) * c3 + (hbar * hbar * q * q / (2 * m * m)) * c2)
            out[(dp(e), dp(d))] = t
    return out


# ---------------------------------------------------------------------------
# Suites


def compare_sigma(derived: SigmaTable, stated: SigmaTable, report: Report, prefix: str, calc: CalculusSpec):
    for key in stated:
        report.add(f"{prefix}.sigma-table[{gen_name(key[0])},{gen_name(key[1])}]", calc,
                   lambda key=key: derived[key] - stated[key])


def check_sigma_bimodule(sigma: SigmaTable, calc: CalculusSpec, report: Optional[Report] = None,
                         prefix: str = "sigma") -> Report:
    """``sigma([a (x) w, g]) = [sigma(a (x) w), g]`` for all generator pairs and generators."""
    report = report if report is not None else Report()
    for (a, w) in sorted(sigma):
        base = calc.basis(a, w)
        for g in calc.gens():
            e = calc.gen_element(g)
            name = f"{prefix}.bimodule[{gen_name(a)},{gen_name(w)};{g[0]}{g[1]}]"
            report.add(name, calc, lambda base=base, e=e, key=(a, w):
                       sigma_apply(sigma, bracket(base, e)) - bracket(sigma[key], e))
    return report


def check_vector_field_bimodule(X: VectorField, calc: CalculusSpec, report: Optional[Report] = None,
                                prefix: str = "X") -> Report:
    """``X([G, g]) = [X(G), g]`` for every relation of the calculus."""
    report = report if report is not None else Report()
    for G in calc.form_generators():
        for g in calc.gens():
            e = calc.gen_element(g)
            report.add(f"{prefix}.bimodule[{gen_name(G)},{g[0]}{g[1]}]", calc,
                       lambda G=G, e=e: X(form_bracket(calc, G, e)) - (X.table[G] * e - e * X.table[G]))
    return report


def geodesic_velocity_check(X: VectorField, conn: Connection, h: AlgebraElement, calc: CalculusSpec,
                            sigma: Optional[SigmaTable] = None, report: Optional[Report] = None,
                            prefix: str = "geodesic") -> Report:
    """The braiding condition on all generator pairs and the autoparallel condition on all generators."""
    report = report if report is not None else Report()
    sigma = sigma if sigma is not None else derive_sigma(conn)
    ih = calc.algebra.ihbar()
    for (a, w) in sorted(sigma):
        report.add(f"{prefix}.XX(sigma-id)[{gen_name(a)},{gen_name(w)}]", calc,
                   lambda key=(a, w): X.pair(sigma[key] - calc.basis(*key)))
    for G in calc.form_generators():
        report.add(f"{prefix}.autoparallel[{gen_name(G)}]", calc,
                   lambda G=G: X.pair(nabla(conn, calc.basis(G))) - (X.table[G] * h - h * X.table[G]) / ih)
    return report


def central_forms(calc: CalculusSpec):
    """The 1-forms ``omega_i = dp_i + V_{,i} theta'`` and ``eta^i = dx^i - (p_i/m) theta'``."""
    alg = calc.algebra
    omegas = {i: calc.basis(dp(i)) + calc.basis(THETA, coeff=calc.V(i)) for i in alg.indices}
    etas = {i: calc.basis(dx(i)) - calc.basis(THETA, coeff=calc.p(i) / alg.sym("m")) for i in alg.indices}
    return omegas, etas


def d_hamiltonian_stated(calc: CalculusSpec) -> TensorElement:
    alg = calc.algebra
    out = calc.zero()
    for i in alg.indices:
        out = out + rmul(calc.basis(dx(i)), calc.V(i)) + calc.basis(dp(i), coeff=calc.p(i) / alg.sym("m"))
    return out


def metric_G(calc: CalculusSpec, drop: Optional[str] = None) -> TensorElement:
    """Invariant antisymmetric tensor ``G``; ``drop`` removes one named piece (mutation use)."""
    alg = calc.algebra
    th = calc.basis(THETA)
    dh = d_hamiltonian_stated(calc)
    pieces = {}
    pieces["dp.dx"] = calc.zero()
    pieces["dx.dp"] = calc.zero()
    for i in alg.indices:
        pieces["dp.dx"] = pieces["dp.dx"] + calc.basis(dp(i), dx(i))
        pieces["dx.dp"] = pieces["dx.dp"] - calc.basis(dx(i), dp(i))
    pieces["th.dh"] = tensor(th, dh)
    pieces["dh.th"] = -tensor(dh, th)
    lap = alg.zero()
    for i in alg.indices:
        lap = lap + calc.V(i, i)
    pieces["th.th"] = calc.basis(THETA, THETA, coeff=alg.ihbar() / alg.sym("m") * lap)
    out = calc.zero()
    for k, v in pieces.items():
        if k != drop:
            out = out + v
    return out


def invariant_structure_check(calc: CalculusSpec, conn: Optional[Connection] = None,
                              X: Optional[VectorField] = None, G: Optional[TensorElement] = None,
                              report: Optional[Report] = None, prefix: str = "invariant") -> Report:
    report = report if report is not None else Report()
    conn = conn or heisenberg_connection(calc)
    X = X or heisenberg_vector_field(calc)
    G = G if G is not None else metric_G(calc)
    sigma = derive_sigma(conn)
    omegas, etas = central_forms(calc)
    gens = calc.gens()
    h = heisenberg_hamiltonian(calc)
    report.add(f"{prefix}.dh", calc, lambda: d_algebra(calc, h) - d_hamiltonian_stated(calc))
    for i in calc.algebra.indices:
        for label, form in ((f"omega{i}", omegas[i]), (f"eta{i}", etas[i])):
            report.add(f"{prefix}.central[{label}]", calc,
                       lambda form=form: [bracket(form, calc.gen_element(g)) for g in gens])
            report.add(f"{prefix}.X-annihilates[{label}]", calc, lambda form=form: X(form))
            report.add(f"{prefix}.nabla-constant[{label}]", calc, lambda form=form: nabla(conn, form))
    report.add(f"{prefix}.nabla-constant[theta']", calc, lambda: nabla(conn, calc.basis(THETA)))
    report.add(f"{prefix}.central[G]", calc, lambda: [bracket(G, calc.gen_element(g)) for g in gens])
    report.add(f"{prefix}.(X(x)id)G", calc, lambda: X.left(G))
    report.add(f"{prefix}.(id(x)X)G", calc, lambda: X.right(G))
    report.add(f"{prefix}.nabla-G", calc, lambda: nabla2(conn, sigma, G))
    report.add(f"{prefix}.G=omega.eta-eta.omega", calc, lambda: G - sum(
        (tensor(omegas[i], etas[i]) - tensor(etas[i], omegas[i]) for i in calc.algebra.indices), calc.zero()))
    return report


# ---------------------------------------------------------------------------
# Torsion, curvature and the 2-form of the invariant tensor


def torsion(conn: Connection) -> Dict[Gen, TensorElement]:
    """``T = wedge nabla + d`` on generators (generators are closed)."""
    return {g: wedge_project(conn.on_gen(g)) for g in conn.calc.form_generators()}


def curvature(conn: Connection) -> Dict[Gen, TensorElement]:
    """``R = (id (x) d + nabla ^ id) nabla`` on generators, valued in 1-forms (x) 2-forms."""
    calc = conn.calc
    out = {}
    for g in calc.form_generators():
        acc = calc.zero("TW")
        for (a, b), c in conn.on_gen(g).terms.items():
            acc = acc + wedge23(tensor(nabla(conn, calc.basis(a, coeff=c)), calc.basis(b)))
        out[g] = acc
    return out


def stated_torsion(calc: CalculusSpec) -> Dict[Gen, TensorElement]:
    alg = calc.algebra
    out = {THETA: calc.zero("W")}
    for i in alg.indices:
        out[dx(i)] = TensorElement(calc, {(dp(i), THETA): -alg.one() / alg.sym("m")}, "W")
        t = calc.zero("W")
        for j in alg.indices:
            t = t + TensorElement(calc, {(dx(j), THETA): calc.V(j, i)}, "W")
        out[dp(i)] = t
    return out


def omega_tilde_stated(calc: CalculusSpec) -> TensorElement:
    alg = calc.algebra
    out = calc.zero("W")
    for i in alg.indices:
        out = out + wedge(calc.basis(dx(i)), calc.basis(dp(i)))
    out = out + wedge(d_hamiltonian_stated(calc), calc.basis(THETA))
    return -2 * out


def _reduce3(calc: CalculusSpec, word, coeff: AlgebraElement) -> Dict[tuple, AlgebraElement]:
    """Order a product of three generators in the 3-forms by adjacent swaps."""
    from .calculus import _pair

    out: Dict[tuple, AlgebraElement] = {}
    stack = [(tuple(word), coeff)]
    while stack:
        w, c = stack.pop()
        if c.is_zero():
            continue
        pos = next((k for k in range(2) if not w[k] < w[k + 1]), None)
        if pos is None:
            out[w] = out[w] + c if w in out else c
            continue
        for (h1, h2), v in _pair(calc, w[pos], w[pos + 1]).items():
            if pos == 0:
                stack.append(((h1, h2, w[2]), c * v))
            else:
                moved = rmul(calc.basis(w[0]), v)
                for (g0,), cv in moved.terms.items():
                    stack.append(((g0, h1, h2), c * cv))
    return {k: v for k, v in out.items() if not v.is_zero()}


def d_two_form(t: TensorElement) -> Dict[tuple, AlgebraElement]:
    """Exterior derivative of a 2-form into ordered generator triples."""
    calc = t.calc
    out: Dict[tuple, AlgebraElement] = {}
    for (g1, g2), c in t.terms.items():
        for (g0,), c0 in d_algebra(calc, c).terms.items():
            for k, v in _reduce3(calc, (g0, g1, g2), c0).items():
                out[k] = out[k] + v if k in out else v
    return {k: v for k, v in out.items() if not v.is_zero()}


class _Triples:
    def __init__(self, terms):
        self.terms = terms

    def term_count(self):
        return sum(len(v.terms) for v in self.terms.values())


def omega_tilde_check(calc: CalculusSpec, G: Optional[TensorElement] = None, conn: Optional[Connection] = None,
                      report: Optional[Report] = None, prefix: str = "omega-tilde") -> Report:
    report = report if report is not None else Report()
    G = G if G is not None else metric_G(calc)
    conn = conn or heisenberg_connection(calc)
    wt = wedge_project(G)
    report.add(f"{prefix}.wedge-G", calc, lambda: wt - omega_tilde_stated(calc))
    report.add(f"{prefix}.closed", calc, lambda: _Triples(d_two_form(wt)))
    alg = calc.algebra
    lam = calc.zero()
    for i in alg.indices:
        lam = lam + calc.basis(dp(i), coeff=calc.x(i))
    lam = -2 * (lam + calc.basis(THETA, coeff=heisenberg_hamiltonian(calc)))
    report.add(f"{prefix}.exact", calc, lambda: d_form(lam) - wt)
    sigma = derive_sigma(conn)
    # the 2-form inherits constancy through (id (x) wedge) of the rank-3 covariant derivative
    report.add(f"{prefix}.covariant-constant", calc, lambda: wedge23(nabla2(conn, sigma, G)))
    return report


def check_torsion_curvature(calc: CalculusSpec, conn: Optional[Connection] = None, report: Optional[Report] = None,
                            prefix: str = "torsion") -> Report:
    report = report if report is not None else Report()
    conn = conn or heisenberg_connection(calc)
    T = torsion(conn)
    Ts = stated_torsion(calc)
    for g in calc.form_generators():
        report.add(f"{prefix}.T[{gen_name(g)}]", calc, lambda g=g: T[g] - Ts[g])
    R = curvature(conn)
    for g in calc.form_generators():
        report.add(f"curvature.R[{gen_name(g)}]", calc, lambda g=g: R[g])
    return report


# ---------------------------------------------------------------------------
# Descent to the reduced quotient


def descent_check(calc: CalculusSpec, conn: Optional[Connection] = None, X: Optional[VectorField] = None,
                  report: Optional[Report] = None, prefix: str = "descent") -> Report:
    report = report if report is not None else Report()
    conn = conn or kg_connection(calc)
    X = X or kg_vector_field(calc)
    imgs = reduced_images(calc)
    for G, img in imgs.items():
        report.add(f"{prefix}.nabla[{gen_name(G)}]", calc,
                   lambda G=G, img=img: quotient_reduce(nabla(conn, calc.basis(G))) - quotient_reduce(nabla(conn, img)))
        report.add(f"{prefix}.X[{gen_name(G)}]", calc, lambda G=G, img=img: X.table[G] - X(img))
    return report
