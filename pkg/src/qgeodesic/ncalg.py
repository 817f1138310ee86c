"""Exact normal-ordering engine for Heisenberg-type algebras.

Elements are finite sums of terms ``c * f(x) * p_{a1} ... p_{ak}`` where ``c`` is
a Gaussian rational times a Laurent monomial in formal symbols, ``f`` is a
commutative product of position atoms and the momentum word is nondecreasing.

Two algebras are supported at a fixed concrete dimension:

* ``nonrel``: ``[x^i, p_j] = i hbar delta``, ``[p_i, p_j] = 0``, with a generic
  potential ``V`` whose partial derivatives are position atoms.
* ``rel``: ``[x^a, p_b] = i hbar delta``, ``[p_a, p_b] = i hbar q F_ab`` with
  ``F_ab = A_{b,a} - A_{a,b}`` expanded in gauge-potential atoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

# Symbol order used for printing and canonical monomials. Unknown symbols sort
# after these by name.
SYMBOLS = ("hbar", "m", "q", "c", "nu", "u", "beta", "alpha", "kappa")
_SYMBOL_RANK = {s: k for k, s in enumerate(SYMBOLS)}

Gauss = Tuple[Fraction, Fraction]
Mono = Tuple[Tuple[str, int], ...]
Atom = tuple
Pos = Tuple[Atom, ...]
Mom = Tuple[int, ...]
Key = Tuple[Mono, Pos, Mom]

ONE: Gauss = (Fraction(1), Fraction(0))
I_UNIT: Gauss = (Fraction(0), Fraction(1))


class AlgebraError(ValueError):
    """Raised for invalid algebra operations (mixed specs, bad bindings)."""


# ---------------------------------------------------------------------------
# Gaussian rationals and monomials


def gmul(a: Gauss, b: Gauss) -> Gauss:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def gadd(a: Gauss, b: Gauss) -> Gauss:
    return (a[0] + b[0], a[1] + b[1])


def gneg(a: Gauss) -> Gauss:
    return (-a[0], -a[1])


def gzero(a: Gauss) -> bool:
    return a[0] == 0 and a[1] == 0


def ginv(a: Gauss) -> Gauss:
    n = a[0] * a[0] + a[1] * a[1]
    if n == 0:
        raise ZeroDivisionError("division by zero coefficient")
    return (Fraction(a[0]) / n, -Fraction(a[1]) / n)


def as_gauss(value) -> Gauss:
    if isinstance(value, tuple):
        return (Fraction(value[0]), Fraction(value[1]))
    if isinstance(value, complex):
        return (Fraction(value.real), Fraction(value.imag))
    return (Fraction(value), Fraction(0))


def _sym_key(item):
    name = item[0]
    return (_SYMBOL_RANK.get(name, len(SYMBOLS)), name)


def mono(**powers: int) -> Mono:
    return tuple(sorted(((s, e) for s, e in powers.items() if e), key=_sym_key))


@lru_cache(maxsize=None)
def mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for s, e in b:
        d[s] = d.get(s, 0) + e
    return tuple(sorted(((s, e) for s, e in d.items() if e), key=_sym_key))


def mono_inv(a: Mono) -> Mono:
    return tuple((s, -e) for s, e in a)


def mono_power(a: Mono, sym: str) -> int:
    for s, e in a:
        if s == sym:
            return e
    return 0


# ---------------------------------------------------------------------------
# Algebra definition


@dataclass(frozen=True)
class AlgebraSpec:
    """Concrete algebra: kind ``nonrel`` or ``rel``, dimension, static flag.

    For ``nonrel`` the dimension is the number of spatial coordinates and
    indices run over ``1..n``. For ``rel`` it is the spacetime dimension
    (2 for 1+1, 4 for 1+3) and indices run over ``0..n-1`` with
    ``eta = diag(-1, 1, ..., 1)``.
    """

    kind: str
    dim: int
    static: bool = False

    def __post_init__(self):
        if self.kind not in ("nonrel", "rel"):
            raise AlgebraError(f"unknown algebra kind {self.kind!r}")
        if self.kind == "nonrel" and not 1 <= self.dim <= 3:
            raise AlgebraError("nonrelativistic dimension must be 1, 2 or 3")
        if self.kind == "rel" and self.dim not in (2, 4):
            raise AlgebraError("relativistic dimension must be 2 (1+1) or 4 (1+3)")
        if self.static and self.kind != "rel":
            raise AlgebraError("static mode applies to the relativistic algebra")

    @property
    def relativistic(self) -> bool:
        return self.kind == "rel"

    @property
    def indices(self) -> range:
        return range(0, self.dim) if self.relativistic else range(1, self.dim + 1)

    @property
    def spatial(self) -> range:
        return range(1, self.dim) if self.relativistic else range(1, self.dim + 1)

    def eta(self, a: int) -> int:
        return -1 if (self.relativistic and a == 0) else 1

    @property
    def label(self) -> str:
        if self.relativistic:
            return f"1+{self.dim - 1}" + (" static" if self.static else "")
        return f"n={self.dim}"

    # generator constructors -------------------------------------------------
    def _check_index(self, a: int):
        if a not in self.indices:
            raise AlgebraError(f"index {a} out of range for {self.label}")

    def x(self, a: int) -> "AlgebraElement":
        self._check_index(a)
        return AlgebraElement(self, {((), (("x", a),), ()): ONE})

    def p(self, a: int) -> "AlgebraElement":
        self._check_index(a)
        return AlgebraElement(self, {((), (), (a,)): ONE})

    def V(self, *idx: int) -> "AlgebraElement":
        """Partial derivative ``V_{,idx}`` of the generic potential."""
        if self.relativistic:
            raise AlgebraError("the potential V belongs to the nonrelativistic algebra")
        for a in idx:
            self._check_index(a)
        return AlgebraElement(self, {((), (("V", tuple(sorted(idx))),), ()): ONE})

    def A(self, a: int, *idx: int) -> "AlgebraElement":
        """Partial derivative ``A_{a,idx}`` of the generic gauge potential."""
        if not self.relativistic:
            raise AlgebraError("gauge potentials belong to the relativistic algebra")
        self._check_index(a)
        for b in idx:
            self._check_index(b)
        atom = _gauge_atom(self.static, a, tuple(sorted(idx)))
        if atom is None:
            return self.zero()
        return AlgebraElement(self, {((), (atom,), ()): ONE})

    def F(self, a: int, b: int, *idx: int) -> "AlgebraElement":
        """Field strength ``F_{ab,idx} = A_{b,a idx} - A_{a,b idx}``."""
        return self.A(b, a, *idx) - self.A(a, b, *idx)

    def scalar(self, value=1, **powers: int) -> "AlgebraElement":
        g = as_gauss(value)
        if gzero(g):
            return self.zero()
        return AlgebraElement(self, {(mono(**powers), (), ()): g})

    def sym(self, name: str, power: int = 1) -> "AlgebraElement":
        return AlgebraElement(self, {(((name, power),) if power else (), (), ()): ONE})

    def ihbar(self) -> "AlgebraElement":
        return self.scalar(1j, hbar=1)

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, {})

    def one(self) -> "AlgebraElement":
        return self.scalar(1)

    def generators(self):
        """All algebraic generators ``x^a`` and ``p_a``."""
        return [self.x(a) for a in self.indices] + [self.p(a) for a in self.indices]


def _gauge_atom(static: bool, a: int, idx: Tuple[int, ...]):
    if static and 0 in idx:
        return None
    return ("A", a, idx)


# ---------------------------------------------------------------------------
# Position monomials


@lru_cache(maxsize=None)
def pos_mul(f: Pos, g: Pos) -> Pos:
    if not f:
        return g
    if not g:
        return f
    return tuple(sorted(f + g))


def _atom_deriv(atom: Atom, a: int, static: bool):
    """Derivative of a single atom: returns ``None`` (zero), ``()`` (one) or an atom."""
    tag = atom[0]
    if tag == "x":
        return () if atom[1] == a else None
    if tag == "V":
        return ("V", tuple(sorted(atom[1] + (a,))))
    return _gauge_atom(static, atom[1], tuple(sorted(atom[2] + (a,))))


@lru_cache(maxsize=None)
def pos_deriv(f: Pos, a: int, static: bool) -> Tuple[Tuple[int, Pos], ...]:
    """Partial derivative of a position monomial as ``((count, monomial), ...)``."""
    out: Dict[Pos, int] = {}
    seen = set()
    for k, atom in enumerate(f):
        if atom in seen:
            continue
        seen.add(atom)
        mult = f.count(atom)
        d = _atom_deriv(atom, a, static)
        if d is None:
            continue
        rest = f[:k] + f[k + 1:]
        new = rest if d == () else tuple(sorted(rest + (d,)))
        out[new] = out.get(new, 0) + mult
    return tuple((c, g) for g, c in out.items() if c)


# ---------------------------------------------------------------------------
# Core rewriting, on raw term dictionaries


def _acc(target: Dict[Key, Gauss], key: Key, c: Gauss):
    old = target.get(key)
    if old is None:
        target[key] = c
    else:
        s = (old[0] + c[0], old[1] + c[1])
        if s[0] == 0 and s[1] == 0:
            del target[key]
        else:
            target[key] = s


_MINUS_I_HBAR = ((Fraction(0), Fraction(-1)), (("hbar", 1),))


@lru_cache(maxsize=None)
def _mom_past_pos(P: Mom, g: Pos, static: bool):
    """Rewrite ``P * g`` as ``sum c * g' * P'`` with ``P'`` a subword of ``P``."""
    if not P:
        return (((ONE, ()), g, ()),)
    a, rest = P[0], P[1:]
    out: Dict[Tuple[Mono, Pos, Mom], Gauss] = {}
    for (c, mn), gp, R in _mom_past_pos(rest, g, static):
        _acc(out, (mn, gp, (a,) + R), c)
        # p_a g' = g' p_a - i hbar g'_{,a}
        for cnt, gd in pos_deriv(gp, a, static):
            c2 = gmul(c, _MINUS_I_HBAR[0])
            c2 = (c2[0] * cnt, c2[1] * cnt)
            _acc(out, (mono_mul(mn, _MINUS_I_HBAR[1]), gd, R), c2)
    return tuple(((c, mn), gp, R) for (mn, gp, R), c in out.items())


_MINUS_I_HBAR_Q = ((Fraction(0), Fraction(-1)), (("hbar", 1), ("q", 1)))


@lru_cache(maxsize=None)
def _order_word(word: Mom, relativistic: bool, static: bool):
    """Normal-order a momentum word; returns ``((c, mono), pos, mom)`` triples."""
    if not relativistic:
        return (((ONE, ()), (), tuple(sorted(word))),)
    j = next((k for k in range(len(word) - 1) if word[k] > word[k + 1]), None)
    if j is None:
        return (((ONE, ()), (), word),)
    u, b, a, v = word[:j], word[j], word[j + 1], word[j + 2:]
    out: Dict[Tuple[Mono, Pos, Mom], Gauss] = {}
    for (c, mn), f, w in _order_word(u + (a, b) + v, relativistic, static):
        _acc(out, (mn, f, w), c)
    # p_b p_a = p_a p_b - i hbar q F_ab, F_ab = A_{b,a} - A_{a,b}
    for sign, atom in ((1, _gauge_atom(static, b, (a,))), (-1, _gauge_atom(static, a, (b,)))):
        if atom is None:
            continue
        base = _MINUS_I_HBAR_Q[0] if sign > 0 else gneg(_MINUS_I_HBAR_Q[0])
        for (c1, m1), g1, u1 in _mom_past_pos(u, (atom,), static):
            for (c2, m2), g2, w in _order_word(u1 + v, relativistic, static):
                c = gmul(gmul(base, c1), c2)
                _acc(out, (mono_mul(mono_mul(_MINUS_I_HBAR_Q[1], m1), m2), pos_mul(g1, g2), w), c)
    return tuple(((c, mn), f, w) for (mn, f, w), c in out.items())


def _mul_terms(spec: AlgebraSpec, A: Mapping[Key, Gauss], B: Mapping[Key, Gauss]) -> Dict[Key, Gauss]:
    out: Dict[Key, Gauss] = {}
    rel, st = spec.relativistic, spec.static
    for (ma, fa, Pa), ca in A.items():
        for (mb, gb, Qb), cb in B.items():
            c0 = gmul(ca, cb)
            m0 = mono_mul(ma, mb)
            if not Pa:
                if not rel or not Qb:
                    _acc(out, (m0, pos_mul(fa, gb), Qb), c0)
                    continue
            for (c1, m1), g1, R in _mom_past_pos(Pa, gb, st):
                f1 = pos_mul(fa, g1)
                c01 = gmul(c0, c1)
                m01 = mono_mul(m0, m1)
                if not R:
                    _acc(out, (m01, f1, Qb), c01)
                    continue
                if not Qb:
                    _acc(out, (m01, f1, R), c01)
                    continue
                if not rel:
                    _acc(out, (m01, f1, tuple(sorted(R + Qb))), c01)
                    continue
                for (c2, m2), g2, W in _order_word(R + Qb, rel, st):
                    _acc(out, (mono_mul(m01, m2), pos_mul(f1, g2), W), gmul(c01, c2))
    return out


def _add_terms(A: Mapping[Key, Gauss], B: Mapping[Key, Gauss], sign: int = 1) -> Dict[Key, Gauss]:
    out = dict(A)
    for k, c in B.items():
        _acc(out, k, c if sign > 0 else gneg(c))
    return out


def _scale_terms(A: Mapping[Key, Gauss], c: Gauss, mn: Mono = ()) -> Dict[Key, Gauss]:
    if gzero(c):
        return {}
    return {(mono_mul(m, mn), f, P): gmul(v, c) for (m, f, P), v in A.items()}


# ---------------------------------------------------------------------------
# Public element type


class AlgebraElement:
    """Canonical normal-ordered element. Treat instances as immutable."""

    __slots__ = ("spec", "terms")

    def __init__(self, spec: AlgebraSpec, terms: Mapping[Key, Gauss]):
        self.spec = spec
        self.terms = {k: v for k, v in terms.items() if not gzero(v)}

    # arithmetic -------------------------------------------------------------
    def _coerce(self, other) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            if other.spec != self.spec:
                raise AlgebraError(f"mixed algebra specs: {self.spec.label} vs {other.spec.label}")
            return other
        return self.spec.scalar(other)

    def __add__(self, other):
        o = self._coerce(other)
        return AlgebraElement(self.spec, _add_terms(self.terms, o.terms))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return AlgebraElement(self.spec, _add_terms(self.terms, o.terms, -1))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return AlgebraElement(self.spec, {k: gneg(v) for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return mul(self, other)
        if hasattr(other, "lmul_by"):
            return NotImplemented
        return AlgebraElement(self.spec, _scale_terms(self.terms, as_gauss(other)))

    def __rmul__(self, other):
        return AlgebraElement(self.spec, _scale_terms(self.terms, as_gauss(other)))

    def __truediv__(self, other):
        o = self._coerce(other)
        if len(o.terms) != 1:
            raise AlgebraError("division only by a single scalar monomial")
        (mn, f, P), c = next(iter(o.terms.items()))
        if f or P:
            raise AlgebraError("division only by scalars")
        return AlgebraElement(self.spec, _scale_terms(self.terms, ginv(c), mono_inv(mn)))

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise AlgebraError("only nonnegative integer powers of elements")
        out = self.spec.one()
        for _ in range(k):
            out = out * self
        return out

    # comparison -------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, AlgebraElement):
            return self.spec == other.spec and self.terms == other.terms
        if isinstance(other, (int, Fraction, complex, float)):
            return (self - other).is_zero()
        return NotImplemented

    def __hash__(self):
        return hash((self.spec, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def is_scalar(self) -> bool:
        return all(not f and not P for (_, f, P) in self.terms)

    def is_position(self) -> bool:
        return all(not P for (_, _, P) in self.terms)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"AlgebraElement({format_element(self)})"

    def __str__(self):
        return format_element(self)


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Canonical product ``a * b``."""
    if a.spec != b.spec:
        raise AlgebraError(f"mixed algebra specs: {a.spec.label} vs {b.spec.label}")
    return AlgebraElement(a.spec, _mul_terms(a.spec, a.terms, b.terms))


def commutator(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return mul(a, b) - mul(b, a)


def normalize(spec: AlgebraSpec, raw: Iterable) -> AlgebraElement:
    """Normalize raw terms ``(coefficient, [factor, ...])`` with factors in any order.

    A factor is ``('x', a)``, ``('p', a)``, ``('V', idx)``, ``('A', a, idx)`` or
    an ``AlgebraElement``; the product is taken left to right.
    """
    total = spec.zero()
    for coeff, factors in raw:
        prod = coeff if isinstance(coeff, AlgebraElement) else spec.scalar(coeff)
        for fac in factors:
            prod = prod * _factor(spec, fac)
        total = total + prod
    return total


def _factor(spec: AlgebraSpec, fac) -> AlgebraElement:
    if isinstance(fac, AlgebraElement):
        return fac
    tag = fac[0]
    if tag == "x":
        return spec.x(fac[1])
    if tag == "p":
        return spec.p(fac[1])
    if tag == "V":
        return spec.V(*fac[1])
    if tag == "A":
        return spec.A(fac[1], *fac[2])
    raise AlgebraError(f"unknown factor {fac!r}")


def hbar_order(e: AlgebraElement, k: int) -> AlgebraElement:
    """Part of ``e`` of exact order ``hbar^k``."""
    return AlgebraElement(e.spec, {key: c for key, c in e.terms.items() if mono_power(key[0], "hbar") == k})


def deriv(e: AlgebraElement, a: int) -> AlgebraElement:
    """Partial derivative of a position-only element along ``x^a``."""
    if not e.is_position():
        raise AlgebraError("partial derivatives only of position functions")
    out: Dict[Key, Gauss] = {}
    for (mn, f, P), c in e.terms.items():
        for cnt, g in pos_deriv(f, a, e.spec.static):
            _acc(out, (mn, g, P), (c[0] * cnt, c[1] * cnt))
    return AlgebraElement(e.spec, out)


def laplacian(e: AlgebraElement) -> AlgebraElement:
    """``eta^{ab} f_{,ab}`` (Euclidean in the nonrelativistic algebra)."""
    spec = e.spec
    out = spec.zero()
    for a in spec.indices:
        out = out + spec.eta(a) * deriv(deriv(e, a), a)
    return out


def generic_atoms(e: AlgebraElement) -> set:
    return {atom for (_, f, _), _ in e.terms.items() for atom in f if atom[0] != "x"}


# ---------------------------------------------------------------------------
# Substitution


def _is_polynomial_binding(e: AlgebraElement) -> bool:
    return e.is_position() and not generic_atoms(e)


def substitute(e: AlgebraElement, bindings: Mapping, symbols: Optional[Mapping[str, object]] = None) -> AlgebraElement:
    """Replace generic atoms by concrete polynomials and renormalize.

    ``bindings`` may hold ``'V'``: polynomial in the coordinates, and/or
    ``'A'``: sequence of polynomials (one per component). Derivative atoms
    are resolved by differentiating the binding. ``symbols`` optionally maps
    formal symbols to exact values (``Fraction``/``int``/Gaussian pair).
    """
    spec = e.spec
    V = bindings.get("V")
    A = bindings.get("A")
    if V is not None:
        if not isinstance(V, AlgebraElement) or not _is_polynomial_binding(V):
            raise AlgebraError("binding for V must be a polynomial in the coordinates")
    if A is not None:
        A = list(A)
        if len(A) != spec.dim:
            raise AlgebraError(f"gauge binding needs {spec.dim} components")
        for comp in A:
            if not isinstance(comp, AlgebraElement) or not _is_polynomial_binding(comp):
                raise AlgebraError("gauge bindings must be polynomials in the coordinates")

    cache: Dict[Atom, AlgebraElement] = {}

    def atom_value(atom):
        if atom in cache:
            return cache[atom]
        tag = atom[0]
        if tag == "x":
            val = AlgebraElement(spec, {((), (atom,), ()): ONE})
        elif tag == "V" and V is not None:
            val = V
            for a in atom[1]:
                val = deriv(val, a)
        elif tag == "A" and A is not None:
            val = A[atom[1]]
            for a in atom[2]:
                val = deriv(val, a)
        else:
            val = AlgebraElement(spec, {((), (atom,), ()): ONE})
        cache[atom] = val
        return val

    out = spec.zero()
    for (mn, f, P), c in e.terms.items():
        term = AlgebraElement(spec, {(mn, (), ()): c})
        if symbols:
            term = _subst_symbols(term, symbols)
        for atom in f:
            term = term * atom_value(atom)
        if P:
            term = term * AlgebraElement(spec, {((), (), P): ONE})
        out = out + term
    return out


def _subst_symbols(e: AlgebraElement, symbols: Mapping[str, object]) -> AlgebraElement:
    out: Dict[Key, Gauss] = {}
    for (mn, f, P), c in e.terms.items():
        keep = []
        for s, k in mn:
            if s in symbols:
                v = as_gauss(symbols[s])
                base = v if k > 0 else ginv(v)
                for _ in range(abs(k)):
                    c = gmul(c, base)
            else:
                keep.append((s, k))
        _acc(out, (tuple(keep), f, P), c)
    return AlgebraElement(e.spec, out)


def substitute_symbols(e: AlgebraElement, symbols: Mapping[str, object]) -> AlgebraElement:
    return _subst_symbols(e, symbols)


# ---------------------------------------------------------------------------
# Expression parser


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


PARSE_SYMBOLS = ("hbar", "m", "q", "c", "nu", "kappa", "u", "beta", "alpha")


def _tokenize(text: str):
    toks = []
    k = 0
    while k < len(text):
        ch = text[k]
        if ch.isspace():
            k += 1
        elif ch.isdigit():
            j = k
            while j < len(text) and text[j].isdigit():
                j += 1
            if j < len(text) and text[j] == ".":
                raise ParseError("decimal literals not allowed; use a/b", j)
            toks.append(("num", int(text[k:j]), k))
            k = j
        elif ch.isalpha() or ch == "_":
            j = k
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[k:j], k))
            k = j
        elif ch in "+-*/^()":
            toks.append(("op", ch, k))
            k += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", k)
    toks.append(("end", None, len(text)))
    return toks


class _Parser:
    def __init__(self, spec: AlgebraSpec, text: str):
        self.spec = spec
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, value):
        t = self.take()
        if t[1] != value:
            raise ParseError(f"expected {value!r}", t[2])

    def parse(self):
        e = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected token {t[1]!r}", t[2])
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            r = self.term()
            e = e + r if op == "+" else e - r
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            r = self.unary()
            if op == "*":
                e = e * r
            else:
                if not r.is_scalar() or len(r.terms) != 1:
                    raise ParseError("division only by a nonzero scalar monomial", pos)
                e = e / r
        t = self.peek()
        if t[0] in ("num", "name") or (t[0] == "op" and t[1] == "("):
            raise ParseError("juxtaposition is not allowed; use '*'", t[2])
        return e

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] in ("+", "-"):
            self.take()
            e = self.unary()
            return -e if t[1] == "-" else e
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            _, _, pos = self.take()
            sign = 1
            if self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
                sign = -1 if self.take()[1] == "-" else 1
            t = self.take()
            if t[0] != "num":
                raise ParseError("exponent must be an integer literal", t[2])
            k = sign * t[1]
            if k < 0:
                if not base.is_scalar() or len(base.terms) != 1:
                    raise ParseError("negative exponents only on scalar monomials", pos)
                return self.spec.one() / (base ** (-k))
            return base ** k
        return base

    def atom(self):
        t = self.take()
        kind, val, pos = t
        if kind == "num":
            return self.spec.scalar(val)
        if kind == "name":
            return self._name(val, pos)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "op" and val == "^":
            raise ParseError("exponent without base", pos)
        raise ParseError("unexpected end of input" if kind == "end" else f"unexpected token {val!r}", pos)

    def _name(self, name, pos):
        spec = self.spec
        if name in PARSE_SYMBOLS:
            return spec.sym(name)
        if name[0] in "xp" and name[1:].isdigit():
            a = int(name[1:])
            if a not in spec.indices:
                raise ParseError(f"coordinate index {a} out of range for {spec.label}", pos)
            return spec.x(a) if name[0] == "x" else spec.p(a)
        raise ParseError(f"unknown symbol {name!r}", pos)


def parse_expression(text: str, spec: AlgebraSpec) -> AlgebraElement:
    """Parse an expression in the documented grammar into a canonical element."""
    tokens = _tokenize(text)
    # a parenthesised exponent (e.g. x1^(1/2)) is caught here with a clear message
    for k, (kind, val, pos) in enumerate(tokens[:-1]):
        if kind == "op" and val == "^" and tokens[k + 1][1] == "(":
            raise ParseError("exponent must be an integer literal", tokens[k + 1][2])
    return _Parser(spec, text).parse()


# ---------------------------------------------------------------------------
# Formatting


def _fmt_gauss(c: Gauss) -> str:
    re_, im_ = c
    if im_ == 0:
        return str(re_)
    if re_ == 0:
        return f"{im_}i" if im_ not in (1, -1) else ("i" if im_ == 1 else "-i")
    return f"({re_}{'+' if im_ > 0 else '-'}{abs(im_)}i)"


def _fmt_atom(atom: Atom) -> str:
    if atom[0] == "x":
        return f"x{atom[1]}"
    if atom[0] == "V":
        return "V" if not atom[1] else "V[" + ",".join(map(str, atom[1])) + "]"
    return f"A{atom[1]}" + ("" if not atom[2] else "[" + ",".join(map(str, atom[2])) + "]")


def format_key(mn: Mono, f: Pos, P: Mom) -> str:
    parts = [s if e == 1 else f"{s}^{e}" for s, e in mn]
    parts += [_fmt_atom(a) for a in f]
    parts += [f"p{a}" for a in P]
    return "*".join(parts)


def format_element(e: AlgebraElement) -> str:
    if not e.terms:
        return "0"
    out = []
    for key in sorted(e.terms, key=repr):
        c = e.terms[key]
        body = format_key(*key)
        cs = _fmt_gauss(c)
        if body:
            out.append(body if cs == "1" else ("-" + body if cs == "-1" else f"{cs}*{body}"))
        else:
            out.append(cs)
    return " + ".join(out)


# ---------------------------------------------------------------------------
# Matrix representation (numeric oracle)


DEFAULT_VALUES = {"hbar": 1.0, "m": 1.0, "nu": 1.0, "q": 1.0, "c": 1.0}


def _numeric_coeff(mn: Mono, c: Gauss, values: Mapping[str, float]) -> complex:
    z = complex(float(c[0]), float(c[1]))
    for s, k in mn:
        if s not in values:
            raise AlgebraError(f"no numeric value for symbol {s!r}")
        z *= float(values[s]) ** k
    return z


def _representation(kind: str, size: int, values: Mapping[str, float], L: float):
    import numpy as np

    hbar = float(values.get("hbar", 1.0))
    if kind == "grid":
        x = -L + 2.0 * L * np.arange(size) / size
        k = 2.0 * np.pi * np.fft.fftfreq(size, d=2.0 * L / size)
        Fm = np.fft.fft(np.eye(size), axis=0)
        Finv = np.fft.ifft(np.eye(size), axis=0)
        P = Finv @ np.diag(hbar * k) @ Fm
        return np.diag(x).astype(complex), P
    if kind == "levels":
        mass = float(values.get("m", 1.0))
        nu = float(values.get("nu", 1.0))
        a = np.diag(np.sqrt(np.arange(1, size)), 1).astype(complex)
        ad = a.conj().T
        X = np.sqrt(hbar / (2 * mass * nu)) * (a + ad)
        P = 1j * np.sqrt(hbar * mass * nu / 2) * (ad - a)
        return X, P
    raise AlgebraError(f"unknown truncation kind {kind!r}")


def matrix_represent(e: AlgebraElement, truncation: int, kind: str = "grid",
                     values: Optional[Mapping[str, float]] = None, L: float = 10.0):
    """Finite matrix of a concrete one-dimensional nonrelativistic element.

    ``kind='grid'``: periodic grid of ``truncation`` points on ``[-L, L)``, with
    ``x`` as multiplication and ``p = -i hbar d/dx`` by spectral differentiation.
    ``kind='levels'``: oscillator basis truncated to ``truncation`` levels, the
    product being formed in a padded basis so that the returned block is exact.
    """
    import numpy as np

    spec = e.spec
    if spec.relativistic or spec.dim != 1:
        raise AlgebraError("matrix representation needs the one-dimensional nonrelativistic algebra")
    if generic_atoms(e):
        raise AlgebraError("generic potential atoms present; substitute a concrete V first")
    vals = dict(DEFAULT_VALUES)
    if values:
        vals.update(values)
    degree = max((len(f) + len(P) for (_, f, P) in e.terms), default=0)
    size = truncation + (degree if kind == "levels" else 0)
    X, P = _representation(kind, size, vals, L)
    M = np.zeros((size, size), dtype=complex)
    powers_x = {0: np.eye(size, dtype=complex)}
    powers_p = {0: np.eye(size, dtype=complex)}
    for (mn, f, Pw), c in e.terms.items():
        kx, kp = len(f), len(Pw)
        for cache, base, k in ((powers_x, X, kx), (powers_p, P, kp)):
            while k not in cache:
                top = max(cache)
                cache[top + 1] = cache[top] @ base
        M += _numeric_coeff(mn, c, vals) * (powers_x[kx] @ powers_p[kp])
    return M[:truncation, :truncation]


def hermite_functions(size: int, count: int, L: float = 10.0, values: Optional[Mapping[str, float]] = None):
    """First ``count`` oscillator eigenfunctions sampled on the periodic grid (columns)."""
    import numpy as np

    vals = dict(DEFAULT_VALUES)
    if values:
        vals.update(values)
    hbar, mass, nu = float(vals["hbar"]), float(vals["m"]), float(vals["nu"])
    x = -L + 2.0 * L * np.arange(size) / size
    xi = x * np.sqrt(mass * nu / hbar)
    out = np.zeros((size, count))
    h0 = np.exp(-xi ** 2 / 2)
    h1 = np.sqrt(2.0) * xi * h0
    out[:, 0] = h0
    if count > 1:
        out[:, 1] = h1
    for n in range(2, count):
        out[:, n] = np.sqrt(2.0 / n) * xi * out[:, n - 1] - np.sqrt((n - 1) / n) * out[:, n - 2]
    dx = 2.0 * L / size
    out /= np.sqrt((out ** 2).sum(axis=0) * dx)
    return out


def oracle_norm(e: AlgebraElement, truncation: int = 256, kind: str = "grid",
                values: Optional[Mapping[str, float]] = None, L: float = 10.0, probes: int = 8) -> float:
    """Norm of ``e`` in the representation, measured away from the truncation edge.

    For the grid this is the largest 2-norm of ``M psi`` over the lowest
    ``probes`` oscillator eigenfunctions (which vanish at the grid boundary);
    for levels it is the spectral norm of the exact truncated block.
    """
    import numpy as np

    M = matrix_represent(e, truncation, kind=kind, values=values, L=L)
    if kind == "levels":
        return float(np.linalg.norm(M, 2)) if M.size else 0.0
    H = hermite_functions(truncation, probes, L=L, values=values)
    dx = 2.0 * L / truncation
    return float(max(np.sqrt((np.abs(M @ H[:, k]) ** 2).sum() * dx) for k in range(probes)))
