"""Matrix model of the one-dimensional nonrelativistic calculus.

Every identity of the nonrelativistic suites is re-evaluated here with the
algebra replaced by grid matrices. Nothing is normal ordered: tensors are
dicts ``{generator word: N x N matrix}`` holding left coefficients, and
coefficients are pushed through generator forms with the derivations

    d_x B = [B, P] / (i hbar),    d_p B = [X, B] / (i hbar),

which is exact whenever every relation ``[G, y]`` is a constant multiple of
the central form theta'. The exterior derivative of an arbitrary matrix is
then ``dB = d_x B dx + d_p B dp + lambda(B) theta'`` with the second-order
correction ``lambda = 1/2 sum c_{y y'} d_y d_y'`` fixed by the Leibniz rule.

Only the relation, connection, vector-field and stated tables enter as data;
their polynomial coefficients are turned into matrices once. Norms are taken
on the lowest oscillator eigenfunctions so the periodic wrap of the grid
does not enter.
"""

from __future__ import annotations

from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from . import calculus as C
from . import connection as K
from .calculus import THETA, CalculusSpec, TensorElement, dp, dx, gen_name
from .ncalg import DEFAULT_VALUES, AlgebraElement, hermite_functions, matrix_represent

Num = Dict[tuple, np.ndarray]
DX, DP = dx(1), dp(1)
FORMS = (DX, DP, THETA)


class OracleError(ValueError):
    pass


def _acc(out: Num, key: tuple, val: np.ndarray):
    if key in out:
        out[key] = out[key] + val
    else:
        out[key] = val


def add(*ts: Num, signs: Optional[List[float]] = None) -> Num:
    out: Num = {}
    for k, t in enumerate(ts):
        s = 1.0 if signs is None else signs[k]
        for key, v in t.items():
            _acc(out, key, s * v)
    return out


def sub(a: Num, b: Num) -> Num:
    return add(a, b, signs=[1.0, -1.0])


def scale(t: Num, c) -> Num:
    return {k: c * v for k, v in t.items()}


def lmul(A: np.ndarray, t: Num) -> Num:
    return {k: A @ v for k, v in t.items()}


class MatrixModel:
    """Grid-matrix evaluation of the one-dimensional Heisenberg calculus."""

    def __init__(self, calc: CalculusSpec, size: int = 256, L: float = 10.0,
                 values: Optional[Mapping[str, float]] = None, probes: int = 8):
        if calc.relativistic or calc.algebra.dim != 1:
            raise OracleError("the matrix model covers the one-dimensional nonrelativistic calculus")
        self.calc = calc
        self.size, self.L = size, L
        self.values = dict(DEFAULT_VALUES)
        if values:
            self.values.update(values)
        self.hbar = float(self.values["hbar"])
        self.m = float(self.values["m"])
        self.ih = 1j * self.hbar
        self.I = np.eye(size, dtype=complex)
        self.X = self.mat(calc.x(1))
        self.P = self.mat(calc.p(1))
        self.gen_mat = {("x", 1): self.X, ("p", 1): self.P}
        self.probes = hermite_functions(size, probes, L=L, values=self.values).astype(complex)
        self.dxw = 2.0 * L / size
        # c[G][y]: [G, y] = c theta'
        self.c = {G: {y: self._constant_theta(calc.bracket_x(G, 1) if y == "x" else calc.bracket_p(G, 1))
                      for y in ("x", "p")} for G in FORMS}
        if abs(self.c[DX]["p"] - self.c[DP]["x"]) > 1e-15:
            raise OracleError("relation constants are not symmetric; no second-order d exists")
        self._sigma: Optional[Dict[Tuple[tuple, tuple], Num]] = None

    # -- data conversion ------------------------------------------------------
    def mat(self, e: AlgebraElement) -> np.ndarray:
        return matrix_represent(self.calc.conc(e), self.size, "grid", self.values, self.L)

    def num(self, t: TensorElement) -> Num:
        return {k: self.mat(v) for k, v in t.terms.items()}

    def _constant_theta(self, t: TensorElement) -> complex:
        if not t.terms:
            return 0.0
        if set(t.terms) != {(THETA,)}:
            raise OracleError("relations must be proportional to theta'")
        c = t.terms[(THETA,)]
        if any(f or P for (_, f, P) in c.terms):
            raise OracleError("relation coefficients must be constants")
        M = self.mat(c)
        return complex(M[0, 0])

    # -- derivations and pushing -----------------------------------------------
    def d_x(self, B):
        return (B @ self.P - self.P @ B) / self.ih

    def d_p(self, B):
        return (self.X @ B - B @ self.X) / self.ih

    def delta(self, G, B) -> np.ndarray:
        """Coefficient of theta' in [G, B]."""
        cx, cp = self.c[G]["x"], self.c[G]["p"]
        out = np.zeros_like(B)
        if cx:
            out = out + cx * self.d_x(B)
        if cp:
            out = out + cp * self.d_p(B)
        return out

    def rmul(self, t: Num, B: np.ndarray) -> Num:
        """``t . B`` for a tensor of any rank."""
        out: Num = {}
        for gens, M in t.items():
            *head, last = gens
            D = self.delta(last, B) if last != THETA else None
            if not head:
                _acc(out, (last,), M @ B)
                if D is not None:
                    _acc(out, (THETA,), M @ D)
                continue
            for k, v in self.rmul({tuple(head): M}, B).items():
                _acc(out, k + (last,), v)
            if D is not None:
                for k, v in self.rmul({tuple(head): M}, D).items():
                    _acc(out, k + (THETA,), v)
        return out

    def bracket(self, t: Num, B) -> Num:
        return sub(self.rmul(t, B), lmul(B, t))

    def form_bracket(self, G, B) -> Num:
        return self.bracket({(G,): self.I}, B)

    def basis(self, *gens, coeff=None) -> Num:
        return {tuple(gens): self.I if coeff is None else coeff}

    def tensor(self, s: Num, t: Num) -> Num:
        out: Num = {}
        for ka, A in s.items():
            for kb, B in t.items():
                for k, v in self.rmul({ka: A}, B).items():
                    _acc(out, k + kb, v)
        return out

    def d(self, B: np.ndarray) -> Num:
        """Exterior derivative of an arbitrary matrix."""
        bx, bp = self.d_x(B), self.d_p(B)
        c = self.c
        lam = 0.5 * (c[DX]["x"] * self.d_x(bx) + c[DX]["p"] * self.d_p(bx)
                     + c[DP]["x"] * self.d_x(bp) + c[DP]["p"] * self.d_p(bp))
        return {(DX,): bx, (DP,): bp, (THETA,): lam}

    # -- wedge ---------------------------------------------------------------
    def _pair(self, g1, g2) -> Dict[tuple, np.ndarray]:
        return {k: self.mat(v) for k, v in C._pair(self.calc, g1, g2).items()}

    def wedge_project(self, t: Num) -> Num:
        out: Num = {}
        for (g1, g2), M in t.items():
            for k, v in self._pair(g1, g2).items():
                _acc(out, k, M @ v)
        return out

    def wedge(self, a: Num, b: Num) -> Num:
        return self.wedge_project(self.tensor(a, b))

    def wedge23(self, t: Num) -> Num:
        out: Num = {}
        for (g1, g2, g3), M in t.items():
            for (h2, h3), v in self._pair(g2, g3).items():
                for (h1,), w in self.rmul({(g1,): M}, v).items():
                    _acc(out, (h1, h2, h3), w)
        return out

    def d_form(self, t: Num) -> Num:
        out: Num = {}
        for (g,), M in t.items():
            out = add(out, self.wedge(self.d(M), self.basis(g)))
        return out

    def _reduce3(self, word, M) -> Num:
        out: Num = {}
        stack = [(tuple(word), M)]
        while stack:
            w, c = stack.pop()
            if not np.any(c):
                continue
            pos = next((k for k in range(2) if not w[k] < w[k + 1]), None)
            if pos is None:
                _acc(out, w, c)
                continue
            for (h1, h2), v in self._pair(w[pos], w[pos + 1]).items():
                if pos == 0:
                    stack.append(((h1, h2, w[2]), c @ v))
                else:
                    for (g0,), cv in self.rmul({(w[0],): c}, v).items():
                        stack.append(((g0, h1, h2), cv))
        return out

    def d_two_form(self, t: Num) -> Num:
        out: Num = {}
        for (g1, g2), M in t.items():
            for (g0,), D in self.d(M).items():
                out = add(out, self._reduce3((g0, g1, g2), D))
        return out

    # -- connection and vector field ---------------------------------------------
    def connection_table(self, conn: K.Connection) -> Dict[tuple, Num]:
        return {G: self.num(conn.on_gen(G)) for G in FORMS}

    def sigma_from(self, nab: Dict[tuple, Num]) -> Dict[Tuple[tuple, tuple], Num]:
        """sigma(dy (x) w) = w (x) dy + [nabla w, y] - nabla([w, y]); theta' columns first."""
        sig: Dict[Tuple[tuple, tuple], Num] = {}
        for w in FORMS:
            sig[(THETA, w)] = self.basis(w, THETA)
        order = [THETA] + [g for g in FORMS if g != THETA]
        for w in order:
            for y, Y in (("x", self.X), ("p", self.P)):
                G = DX if y == "x" else DP
                val = add(self.basis(w, G), self.bracket(nab[w], Y))
                val = sub(val, self.nabla(nab, sig, self.form_bracket(w, Y)))
                sig[(G, w)] = val
        return sig

    def nabla(self, nab, sig, t: Num) -> Num:
        """Left twisted Leibniz rule: nabla(M g) = M nabla(g) + sigma(dM (x) g)."""
        out: Num = {}
        for (g,), M in t.items():
            if not np.any(M):
                continue
            out = add(out, lmul(M, nab[g]))
            for (l,), D in self.d(M).items():
                if np.any(np.abs(D) > 0):
                    out = add(out, lmul(D, sig[(l, g)]))
        return out

    def nabla2(self, nab, sig, t: Num) -> Num:
        out: Num = {}
        for (a, w), M in t.items():
            first = self.nabla(nab, sig, {(a,): M})
            for (b, g), N in first.items():
                out = add(out, self.tensor({(b,): N}, sig[(g, w)]))
            out = add(out, self.tensor({(a,): M}, nab[w]))
        return out

    def sigma_apply(self, sig, t: Num) -> Num:
        out: Num = {}
        for key, M in t.items():
            out = add(out, lmul(M, sig[key]))
        return out

    # -- norms -----------------------------------------------------------------
    def norm(self, x) -> float:
        if isinstance(x, (list, tuple)):
            return max((self.norm(y) for y in x), default=0.0)
        if isinstance(x, dict):
            return max((self.norm(v) for v in x.values()), default=0.0)
        MH = x @ self.probes
        return float(np.sqrt((np.abs(MH) ** 2).sum(axis=0) * self.dxw).max())


class VectorFieldModel:
    def __init__(self, model: MatrixModel, X: K.VectorField):
        self.model = model
        self.table = {G: model.mat(X.table[G]) for G in FORMS}

    def __call__(self, t: Num) -> np.ndarray:
        out = np.zeros_like(self.model.I)
        for (g,), M in t.items():
            out = out + M @ self.table[g]
        return out

    def pair(self, t: Num) -> np.ndarray:
        out = np.zeros_like(self.model.I)
        for (g1, g2), M in t.items():
            out = out + M @ self.table[g1] @ self.table[g2]
        return out

    def left(self, t: Num) -> Num:
        out: Num = {}
        for (g1, g2), M in t.items():
            _acc(out, (g2,), M @ self.table[g1])
        return out

    def right(self, t: Num) -> Num:
        out: Num = {}
        for (g1, g2), M in t.items():
            out = add(out, self.model.rmul({(g1,): M}, self.table[g2]))
        return out


# ---------------------------------------------------------------- identity replay

def oracle_identities(calc: CalculusSpec, size: int = 256, L: float = 10.0,
                      values: Optional[Mapping[str, float]] = None,
                      conn: Optional[K.Connection] = None, X: Optional[K.VectorField] = None
                      ) -> Dict[str, float]:
    """Matrix norms for every nonrelativistic suite identity, keyed by identity id."""
    mm = MatrixModel(calc, size, L, values)
    conn = conn or K.heisenberg_connection(calc)
    Xf = VectorFieldModel(mm, X or K.heisenberg_vector_field(calc))
    nab = mm.connection_table(conn)
    sig = mm.sigma_from(nab)
    Xm, Pm, I, ih, m = mm.X, mm.P, mm.I, mm.ih, mm.m
    V = mm.mat(calc.V())
    V1 = mm.mat(calc.V(1))
    V11 = mm.mat(calc.V(1, 1))
    H = Pm @ Pm / (2 * m) + V
    gens = (("x", 1), ("p", 1))
    out: Dict[str, Callable[[], object]] = {}

    def lbl(g):
        return f"{g[0]}{g[1]}"

    # stated objects, rebuilt from their recipes with matrix products
    dh_stated = add(mm.rmul(mm.basis(DX), V1), mm.basis(DP, coeff=Pm / m))
    omega = add(mm.basis(DP), mm.basis(THETA, coeff=V1))
    eta = sub(mm.basis(DX), mm.basis(THETA, coeff=Pm / m))
    th = mm.basis(THETA)
    G = add(mm.basis(DP, DX), scale(mm.basis(DX, DP), -1), mm.tensor(th, dh_stated),
            scale(mm.tensor(dh_stated, th), -1), mm.basis(THETA, THETA, coeff=ih / m * V11))

    # prop4.1
    comm = Xm @ Pm - Pm @ Xm
    out["calculus.d-relation[x1,p1]"] = lambda: sub(mm.d(comm), sub(mm.form_bracket(DX, Pm),
                                                                    mm.form_bracket(DP, Xm)))
    for Gf in FORMS:
        out[f"calculus.jacobi[{gen_name(Gf)},x1,p1]"] = lambda Gf=Gf: sub(
            sub(mm.bracket(mm.form_bracket(Gf, Xm), Pm), mm.bracket(mm.form_bracket(Gf, Pm), Xm)),
            mm.form_bracket(Gf, comm))
    for i, a in enumerate(gens):
        for b in gens[i:]:
            A, B = mm.gen_mat[a], mm.gen_mat[b]
            out[f"calculus.leibniz[{lbl(a)},{lbl(b)}]"] = lambda A=A, B=B: sub(
                mm.d(A @ B), add(mm.rmul(mm.d(A), B), lmul(A, mm.d(B))))
    for g in gens:
        out[f"calculus.theta-central[{lbl(g)}]"] = lambda g=g: mm.form_bracket(THETA, mm.gen_mat[g])
    for Gf in FORMS:
        for g in gens:
            Y = mm.gen_mat[g]
            out[f"vector-field.bimodule[{gen_name(Gf)},{lbl(g)}]"] = lambda Gf=Gf, Y=Y: (
                Xf(mm.form_bracket(Gf, Y)) - (Xf.table[Gf] @ Y - Y @ Xf.table[Gf]))
    out["calculus.d-hamiltonian"] = lambda: sub(mm.d(H), dh_stated)

    # prop4.2
    stated = K.stated_sigma_heisenberg(calc)
    for key in stated:
        out[f"braiding.sigma-table[{gen_name(key[0])},{gen_name(key[1])}]"] = (
            lambda key=key: sub(sig[key], mm.num(stated[key])))
    for (a, w) in sorted(sig):
        for g in gens:
            Y = mm.gen_mat[g]
            out[f"braiding.bimodule[{gen_name(a)},{gen_name(w)};{g[0]}{g[1]}]"] = (
                lambda a=a, w=w, Y=Y: sub(mm.sigma_apply(sig, mm.bracket(mm.basis(a, w), Y)),
                                          mm.bracket(sig[(a, w)], Y)))
    for (a, w) in sorted(sig):
        out[f"geodesic.XX(sigma-id)[{gen_name(a)},{gen_name(w)}]"] = (
            lambda a=a, w=w: Xf.pair(sub(sig[(a, w)], mm.basis(a, w))))
    for Gf in FORMS:
        out[f"geodesic.autoparallel[{gen_name(Gf)}]"] = lambda Gf=Gf: (
            Xf.pair(nab[Gf]) - (Xf.table[Gf] @ H - H @ Xf.table[Gf]) / ih)

    # prop4.3
    out["invariant.dh"] = out["calculus.d-hamiltonian"]
    for label, form in (("omega1", omega), ("eta1", eta)):
        out[f"invariant.central[{label}]"] = lambda form=form: [mm.bracket(form, Xm), mm.bracket(form, Pm)]
        out[f"invariant.X-annihilates[{label}]"] = lambda form=form: Xf(form)
        out[f"invariant.nabla-constant[{label}]"] = lambda form=form: mm.nabla(nab, sig, form)
    out["invariant.nabla-constant[theta']"] = lambda: mm.nabla(nab, sig, th)
    out["invariant.central[G]"] = lambda: [mm.bracket(G, Xm), mm.bracket(G, Pm)]
    out["invariant.(X(x)id)G"] = lambda: Xf.left(G)
    out["invariant.(id(x)X)G"] = lambda: Xf.right(G)
    out["invariant.nabla-G"] = lambda: mm.nabla2(nab, sig, G)
    out["invariant.G=omega.eta-eta.omega"] = lambda: sub(G, sub(mm.tensor(omega, eta), mm.tensor(eta, omega)))

    # cor4.4
    for Gf in FORMS:
        for g in gens:
            Y = mm.gen_mat[g]
            dg = mm.basis(DX if g[0] == "x" else DP)
            out[f"two-forms.d-bracket[{gen_name(Gf)},{lbl(g)}]"] = lambda Gf=Gf, Y=Y, dg=dg: add(
                mm.wedge(dg, mm.basis(Gf)), mm.wedge(mm.basis(Gf), dg), mm.d_form(mm.form_bracket(Gf, Y)))
    Ts = K.stated_torsion(calc)
    for Gf in FORMS:
        out[f"torsion.T[{gen_name(Gf)}]"] = lambda Gf=Gf: sub(mm.wedge_project(nab[Gf]), mm.num(Ts[Gf]))

    def curv(Gf):
        acc: Num = {}
        for (a, b), M in nab[Gf].items():
            acc = add(acc, mm.wedge23(mm.tensor(mm.nabla(nab, sig, {(a,): M}), mm.basis(b))))
        return acc

    for Gf in FORMS:
        out[f"curvature.R[{gen_name(Gf)}]"] = lambda Gf=Gf: curv(Gf)
    wt = mm.wedge_project(G)
    wt_stated = scale(add(mm.wedge(mm.basis(DX), mm.basis(DP)), mm.wedge(dh_stated, th)), -2)
    lam = scale(add(mm.basis(DP, coeff=Xm), mm.basis(THETA, coeff=H)), -2)
    out["omega-tilde.wedge-G"] = lambda: sub(wt, wt_stated)
    out["omega-tilde.closed"] = lambda: mm.d_two_form(wt)
    out["omega-tilde.exact"] = lambda: sub(mm.d_form(lam), wt)
    out["omega-tilde.covariant-constant"] = lambda: mm.wedge23(mm.nabla2(nab, sig, G))

    return {k: mm.norm(f()) for k, f in out.items()}


def sho_calculus(m: str = "m", nu: str = "nu") -> CalculusSpec:
    from .ncalg import AlgebraSpec, parse_expression

    alg = AlgebraSpec("nonrel", 1)
    return C.heisenberg_calculus(1, {"V": parse_expression(f"{m}*{nu}^2*x1^2/2", alg)})
