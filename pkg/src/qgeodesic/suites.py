"""Named verification suites over the symbolic engine.

Suite identifiers are part of the command-line interface; each maps to a
group of identities whose residuals must all be the canonical zero.
"""

from __future__ import annotations

from typing import Callable, Dict, Optional

from . import calculus as C
from . import connection as K
from .ncalg import AlgebraSpec, parse_expression
from .report import Report

NONREL_SUITES = ("prop4.1", "prop4.2", "prop4.3", "cor4.4")
REL_SUITES = ("prop5.1", "thm5.2", "appendixA", "prop5.3", "lemma5.4")
SUITE_IDS = NONREL_SUITES + REL_SUITES


class SuiteError(ValueError):
    pass


def parse_dim(text, relativistic: bool) -> int:
    """``'2'`` or ``'1+3'``; relativistic dimensions count spacetime coordinates."""
    s = str(text).strip()
    if "+" in s:
        a, b = s.split("+", 1)
        if a.strip() != "1":
            raise SuiteError(f"unsupported spacetime dimension {s!r}")
        return 1 + int(b)
    return int(s)


def build_calculus(suite: str, dim, potential: Optional[str] = None, gauge: str = "generic",
                   static: bool = False) -> C.CalculusSpec:
    if suite not in SUITE_IDS:
        raise SuiteError(f"unknown suite {suite!r}; expected one of {', '.join(SUITE_IDS)}")
    rel = suite in REL_SUITES
    n = parse_dim(dim, rel) if dim is not None else (4 if rel else 2)
    try:
        if not rel:
            bindings = None
            if potential not in (None, "generic"):
                alg = AlgebraSpec("nonrel", n)
                bindings = {"V": parse_expression(potential, alg)}
            return C.heisenberg_calculus(n, bindings)
        if potential not in (None, "generic"):
            raise SuiteError("--potential applies to the nonrelativistic suites")
        if gauge not in ("generic", "zero"):
            raise SuiteError("--gauge must be 'generic' or 'zero'")
        st = static or suite == "lemma5.4"
        alg = AlgebraSpec("rel", n, st)
        bindings = {"A": [alg.zero()] * n} if gauge == "zero" else None
        return C.kg_calculus(n, st, bindings)
    except ValueError as exc:
        if isinstance(exc, SuiteError):
            raise
        raise SuiteError(str(exc)) from exc


def _calculus_suite(calc, report):
    C.check_first_order_consistency(calc, report, prefix="calculus")
    X = K.heisenberg_vector_field(calc) if not calc.relativistic else K.kg_vector_field(calc)
    K.check_vector_field_bimodule(X, calc, report, prefix="vector-field")
    if not calc.relativistic:
        h = K.heisenberg_hamiltonian(calc)
        report.add("calculus.d-hamiltonian", calc, lambda: C.d_algebra(calc, h) - K.d_hamiltonian_stated(calc))


def _heisenberg_connection_suite(calc, report):
    conn = K.heisenberg_connection(calc)
    X = K.heisenberg_vector_field(calc)
    sigma = K.derive_sigma(conn)
    K.compare_sigma(sigma, K.stated_sigma_heisenberg(calc), report, "braiding", calc)
    K.check_sigma_bimodule(sigma, calc, report, prefix="braiding")
    K.geodesic_velocity_check(X, conn, K.heisenberg_hamiltonian(calc), calc, sigma, report, prefix="geodesic")


def _invariant_suite(calc, report):
    K.invariant_structure_check(calc, report=report, prefix="invariant")


def _torsion_suite(calc, report):
    C.check_two_form_relations(calc, report, prefix="two-forms")
    K.check_torsion_curvature(calc, report=report, prefix="torsion")
    K.omega_tilde_check(calc, report=report, prefix="omega-tilde")


def _kg_connection_suite(calc, report):
    conn = K.kg_connection(calc)
    X = K.kg_vector_field(calc)
    sigma = K.derive_sigma(conn)
    K.compare_sigma(sigma, K.stated_sigma_kg(calc), report, "braiding", calc)
    K.geodesic_velocity_check(X, conn, K.kg_hamiltonian(calc), calc, sigma, report, prefix="geodesic")


def _kg_bimodule_suite(calc, report):
    sigma = K.derive_sigma(K.kg_connection(calc))
    K.check_sigma_bimodule(sigma, calc, report, prefix="braiding")


def _reduced_suite(calc, report):
    C.check_quotient_consistency(calc, report, prefix="reduced")
    K.descent_check(calc, report=report, prefix="descent")


def _static_suite(calc, report):
    alg = calc.algebra
    u = -calc.p(0) - alg.sym("q") * calc.A(0)
    C.central_closed_check(calc, u, report, prefix="energy")
    report.add("energy.conjugate[x0]", calc, lambda: (u * calc.x(0) - calc.x(0) * u) - alg.ihbar())


SUITES: Dict[str, Callable] = {
    "prop4.1": _calculus_suite,
    "prop4.2": _heisenberg_connection_suite,
    "prop4.3": _invariant_suite,
    "cor4.4": _torsion_suite,
    "prop5.1": _calculus_suite,
    "thm5.2": _kg_connection_suite,
    "appendixA": _kg_bimodule_suite,
    "prop5.3": _reduced_suite,
    "lemma5.4": _static_suite,
}


def run_suite(suite: str, dim=None, potential: Optional[str] = None, gauge: str = "generic",
              static: bool = False, report: Optional[Report] = None,
              keep_residuals: bool = False) -> Report:
    calc = build_calculus(suite, dim, potential, gauge, static)
    report = report if report is not None else Report(keep_residuals)
    SUITES[suite](calc, report)
    return report
