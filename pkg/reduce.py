"""
Homotopy reduction: splitting off contractible pairs, excluding variables, and
the certificate-producing equivalence checker.

Every move records an EquivalenceCertificate; traces can be written out and
re-verified by plain matrix arithmetic.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from config import get_settings
from freemod import (
    PolyMatrix,
    exact_nullspace,
    exact_solve,
    generic_rank,
    matrix_from_dict,
    matrix_to_dict,
    monomials_up_to,
    format_matrix,
    parse_matrix,
    ring_symbols,
    to_sympy,
)
from mf import (
    EVEN,
    ODD,
    EquivalenceCertificate,
    MatrixFactorization,
    MFMorphism,
    ValidationReport,
    OK,
    format_mf,
    from_total,
    mf_from_dict,
    mf_from_sections,
    mf_pullback,
    mf_tensor,
    mf_zero,
    mf_to_dict,
    tensor_layout,
    split_sections,
    checked,
)
from polyring import (
    CertificateError,
    IneligibleEliminationError,
    ParseError,
    Poly,
    PotentialMismatchError,
    RingMap,
    RingMismatchError,
    divided_difference,
    format_poly,
    linear_shape,
)
from simple_cache import get_cache_manager

LOGGER = logging.getLogger(__name__)

UNIT_SPLIT = "unit-split"
VARIABLE_EXCLUSION = "variable-exclusion"


@dataclass(frozen=True)
class ReductionStep:
    """One move; `certificate` relates the step's source to `certificate.target`.

    For a unit split the certificate target is the result. For a variable exclusion it is
    K(u - g; 0) (x) result, the result lifted back to the ring containing u.
    """
    kind: str
    location: str
    certificate: EquivalenceCertificate
    result: MatrixFactorization

    def verify(self) -> ValidationReport:
        return self.certificate.verify()


@dataclass
class ReductionTrace:
    steps: List[ReductionStep] = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def extend(self, other: "ReductionTrace"):
        self.steps.extend(other.steps)

    def verify(self) -> ValidationReport:
        for k, step in enumerate(self.steps):
            report = step.verify()
            if not report.ok:
                return ValidationReport(False, f"step {k + 1} ({step.kind}): {report.message}")
        return OK

    def certificate(self, start: MatrixFactorization) -> EquivalenceCertificate:
        """Chain the steps into one certificate start ~ last result (unit splits only)."""
        cert = EquivalenceCertificate.identity(start)
        for step in self.steps:
            if step.kind != UNIT_SPLIT:
                raise CertificateError("a trace with variable exclusions does not chain over one ring")
            if step.certificate.source != cert.target:
                raise CertificateError("trace steps are not consecutive")
            cert = cert.then(step.certificate)
        return cert


@dataclass(frozen=True)
class NotFound:
    bound: int


@dataclass(frozen=True)
class DefinitelyDistinct:
    reason: str


EquivalenceResult = Union[EquivalenceCertificate, NotFound, DefinitelyDistinct]


def _require(cert: EquivalenceCertificate, what: str) -> EquivalenceCertificate:
    report = cert.verify()
    if not report.ok:
        raise CertificateError(f"{what}: {report.message}")
    return cert


# -- unit splitting --------------------------------------------------------------------

def _constant_pivot(D: PolyMatrix) -> Optional[Tuple[int, int, Fraction]]:
    for (r, c) in sorted(D.entries):
        p = D.entries[(r, c)]
        if p.is_constant():
            return r, c, p.constant_term()
    return None


def _split_once(m: MatrixFactorization) -> Optional[ReductionStep]:
    """Cancel one unit entry c = D[i, j] together with basis vectors i and j."""
    D = m.total_differential()
    pivot = _constant_pivot(D)
    if pivot is None:
        return None
    i, j, c = pivot
    ring = m.ring
    inv = Fraction(1) / c
    n = m.total_rank
    rest = [k for k in range(n) if k not in (i, j)]
    pos = {k: q for q, k in enumerate(rest)}
    alpha = {r: D.entries[(r, j)] for r in rest if (r, j) in D.entries}
    gamma = {s: D.entries[(i, s)] for s in rest if (i, s) in D.entries}

    reduced = D.submatrix(rest, rest)
    correction = {(pos[r], pos[s]): (a * g).scale(inv) for r, a in alpha.items() for s, g in gamma.items()}
    reduced = reduced - PolyMatrix(ring, len(rest), len(rest), correction)
    weights = None
    if m.graded:
        tw = m.total_weights()
        weights = [tw[k] for k in rest]
    n_odd = sum(1 for k in rest if k < m.rank_minus1)
    result = checked(from_total(ring, m.potential, n_odd, reduced, weights), "unit split")

    # backward: r -> r - (gamma_r / c) j ; forward: i -> -alpha / c, j -> 0, r -> r
    backward = {(r, pos[r]): ring.one() for r in rest}
    for s, g in gamma.items():
        backward[(j, pos[s])] = (-g).scale(inv)
    forward = {(pos[r], r): ring.one() for r in rest}
    for r, a in alpha.items():
        forward[(pos[r], i)] = (-a).scale(inv)
    homotopy = PolyMatrix(ring, n, n, {(j, i): ring.const(-inv)})
    cert = EquivalenceCertificate(
        MFMorphism.from_block(m, result, PolyMatrix(ring, len(rest), n, forward), EVEN),
        MFMorphism.from_block(result, m, PolyMatrix(ring, n, len(rest), backward), EVEN),
        MFMorphism.from_block(m, m, homotopy, ODD),
        MFMorphism.zero(result, result, ODD),
    )
    return ReductionStep(UNIT_SPLIT, f"pivot ({i},{j})", _require(cert, "unit split"), result)


def split_contractibles(m: MatrixFactorization) -> Tuple[MatrixFactorization, ReductionTrace]:
    """Cancel unit entries, smallest (row, col) first, until none is left."""
    trace = ReductionTrace()
    current = m
    while True:
        step = _split_once(current)
        if step is None:
            break
        trace.steps.append(step)
        current = step.result
    if trace.steps:
        LOGGER.debug("split %d contractible pairs: rank %d -> %d", len(trace), m.total_rank, current.total_rank)
    return current, trace


def reduce_cached(m: MatrixFactorization) -> Tuple[MatrixFactorization, ReductionTrace]:
    """split_contractibles behind the process-wide cache."""
    cache = get_cache_manager()
    key = format_mf(m)
    hit = cache.get_reduction(key)
    if hit is not None:
        return hit
    value = split_contractibles(m)
    cache.store_reduction(key, value)
    return value


# -- variable exclusion ------------------------------------------------------------------

def _pivot_groups(D: PolyMatrix, u: str) -> List[Tuple[Poly, List[Tuple[int, int, Fraction]]]]:
    """Entries of the shape c*(u - g), grouped by g in order of first appearance."""
    groups: Dict[Poly, List[Tuple[int, int, Fraction]]] = {}
    for (r, col) in sorted(D.entries):
        shape = linear_shape(D.entries[(r, col)], u)
        if shape is None:
            continue
        c, g = shape
        groups.setdefault(g, []).append((r, col, c))
    return list(groups.items())


def _clean_matching(D: PolyMatrix, pivots: List[Tuple[int, int, Fraction]]) -> Optional[Dict[int, Tuple[int, Fraction]]]:
    """Perfect matching I <- J by the pivots with D[I, J] consisting of the pivots alone."""
    rows = [r for r, _, _ in pivots]
    cols = [c for _, c, _ in pivots]
    if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        return None
    I, J = set(rows), set(cols)
    if I & J or len(I) + len(J) != D.rows:
        return None
    matched = {(r, c) for r, c, _ in pivots}
    for (r, c) in D.entries:
        if r in I and c in J and (r, c) not in matched:
            return None
    return {r: (c, val) for r, c, val in pivots}


def eliminate_variable(m: MatrixFactorization, u: str) -> Tuple[MatrixFactorization, ReductionTrace]:
    """Exclude u through a clean perfect matching of entries c*(u - g), substituting u -> g.

    The certificate identifies m with K(u - g; 0) (x) (result over the ring with u).
    """
    ring = m.ring
    ring.index(u)
    if m.potential.involves(u):
        raise IneligibleEliminationError(
            f"potential {format_poly(m.potential)} involves {u}; exclusion refused")
    if m.is_zero_object():
        small = ring.without([u])
        drop = RingMap.from_assignments(ring, small, {u: small.zero()})
        return mf_zero(small, drop(m.potential)), ReductionTrace()
    D = m.total_differential()
    choice = None
    for g, pivots in _pivot_groups(D, u):
        matching = _clean_matching(D, pivots)
        if matching is not None:
            choice = (g, matching)
            break
    if choice is None:
        raise IneligibleEliminationError(f"support condition violated: no eligible pivot entries in {u}")
    g, matching = choice

    small = ring.without([u])
    drop = RingMap.from_assignments(ring, small, {u: small.zero()})
    g_small = drop(g)
    to_small = RingMap.from_assignments(ring, small, {u: g_small})
    lift = RingMap.from_assignments(small, ring)

    I = sorted(matching)
    q_of = {i: q for q, i in enumerate(I)}
    reduced = PolyMatrix(small, len(I), len(I),
                         {(q_of[r], q_of[c]): to_small(p) for (r, c), p in D.entries.items() if r in q_of and c in q_of})
    weights = None
    if m.graded:
        tw = m.total_weights()
        weights = [tw[i] for i in I]
    n_odd = sum(1 for i in I if i < m.rank_minus1)
    result = checked(from_total(small, drop(m.potential), n_odd, reduced, weights), "variable exclusion")

    koszul = MatrixFactorization(ring, ring.zero(), PolyMatrix.from_rows(ring, [[ring.var(u) - g]]),
                                 PolyMatrix.zero(ring, 1, 1))
    pulled = mf_pullback(result, lift)
    lifted = mf_tensor(koszul, pulled)
    layout, _ = tensor_layout(koszul, pulled)
    t_pos = {pair: k for k, pair in enumerate(layout)}
    # divided differences of the I-block: D_II = D_II(u = g) + (u - g) * E
    E = {(q_of[r], q_of[c]): divided_difference(p, u, g) for (r, c), p in D.entries.items()
         if r in q_of and c in q_of}
    n = m.total_rank
    phi: Dict[Tuple[int, int], Poly] = {}
    phi_inv: Dict[Tuple[int, int], Poly] = {}
    for q, i in enumerate(I):
        j, c = matching[i]
        inv = Fraction(1) / c
        e_pos, one_pos = t_pos[(0, q)], t_pos[(1, q)]
        phi[(j, e_pos)] = ring.const(inv)
        phi[(i, one_pos)] = ring.one()
        phi_inv[(e_pos, j)] = ring.const(c)
        phi_inv[(one_pos, i)] = ring.one()
    for (p, q), value in E.items():
        if value.is_zero():
            continue
        j_p, c_p = matching[I[p]]
        key = (j_p, t_pos[(1, q)])
        phi[key] = phi.get(key, ring.zero()) - value.scale(Fraction(1) / c_p)
        key = (t_pos[(0, p)], I[q])
        phi_inv[key] = phi_inv.get(key, ring.zero()) + value
    cert = EquivalenceCertificate.from_isomorphism(
        MFMorphism.from_block(m, lifted, PolyMatrix(ring, n, n, phi_inv), EVEN),
        MFMorphism.from_block(lifted, m, PolyMatrix(ring, n, n, phi), EVEN),
    )
    location = f"{u} -> {format_poly(g)} pivots " + " ".join(f"({i},{matching[i][0]})" for i in I)
    step = ReductionStep(VARIABLE_EXCLUSION, location, _require(cert, f"exclusion of {u}"), result)
    LOGGER.debug("excluded %s: rank %d -> %d", u, m.total_rank, result.total_rank)
    return result, ReductionTrace([step])


def eliminate_variables(m: MatrixFactorization, names: Sequence[str]) -> Tuple[MatrixFactorization, ReductionTrace]:
    """Exclude each variable in turn, splitting contractibles after every exclusion."""
    trace = ReductionTrace()
    current, first = split_contractibles(m)
    trace.extend(first)
    for u in names:
        current, step = eliminate_variable(current, u)
        trace.extend(step)
        current, split = split_contractibles(current)
        trace.extend(split)
    return current, trace


# -- equivalence checking ---------------------------------------------------------------------

def _positively_graded(m: MatrixFactorization) -> bool:
    return m.graded and all(w > 0 for w in m.ring.weights)


def _is_minimal(m: MatrixFactorization) -> bool:
    return all(p.constant_term() == 0 for p in m.total_differential().entries.values())


def invariant_profile(m: MatrixFactorization) -> Dict:
    """Ranks, basis-weight multisets and generic ranks after setting each variable to zero."""
    profile = {
        "ranks": (m.rank_minus1, m.rank_zero),
        "generic": (generic_rank(m.d_minus1), generic_rank(m.d_zero)),
        "specialised": {},
    }
    if m.graded:
        profile["weights"] = (tuple(sorted(m.weights_minus1)), tuple(sorted(m.weights_zero)))
    for v in m.ring.variables:
        smaller = m.ring.without([v])
        kill = RingMap.from_assignments(m.ring, smaller, {v: smaller.zero()})
        special = mf_pullback(m, kill)
        profile["specialised"][v] = (generic_rank(special.d_minus1), generic_rank(special.d_zero))
    return profile


def profile_difference(m: MatrixFactorization, n: MatrixFactorization) -> Optional[str]:
    """A homotopy invariant separating two minimal factorizations, if one is found."""
    a, b = invariant_profile(m), invariant_profile(n)
    if a["ranks"] != b["ranks"]:
        return f"ranks {a['ranks']} vs {b['ranks']}"
    if "weights" in a and "weights" in b and a["weights"] != b["weights"]:
        return f"graded ranks per weight {a['weights']} vs {b['weights']}"
    if a["generic"] != b["generic"]:
        return f"generic ranks {a['generic']} vs {b['generic']}"
    for v in m.ring.variables:
        if a["specialised"][v] != b["specialised"][v]:
            return f"generic ranks with {v} = 0: {a['specialised'][v]} vs {b['specialised'][v]}"
    return None


def _entry_monomials(ring, degree: int, want: Optional[int]) -> List[Tuple[int, ...]]:
    monos = monomials_up_to(ring.nvars, [1] * ring.nvars, degree)
    if want is None:
        return monos
    return [e for e in monos if ring.monomial_weight(e) == want]


def _even_unknowns(source: MatrixFactorization, target: MatrixFactorization, degree: int,
                   graded: bool) -> List[Tuple[int, int, Tuple[int, ...]]]:
    ring = source.ring
    tw, sw = target.total_weights(), source.total_weights()
    unknowns = []
    cache: Dict[Optional[int], List[Tuple[int, ...]]] = {}
    for r in range(target.total_rank):
        for c in range(source.total_rank):
            if target.parity(r) != source.parity(c):
                continue
            want = tw[r] - sw[c] if graded else None
            if want not in cache:
                cache[want] = _entry_monomials(ring, degree, want)
            unknowns.extend((r, c, e) for e in cache[want])
    return unknowns


def _add_exps(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def _closed_map_equations(source, target, unknowns) -> List[Dict[int, Fraction]]:
    """Coefficient equations of D_t F - F D_s = 0 for F = sum x_k mono_k E_(r,c)."""
    Dt, Ds = target.total_differential(), source.total_differential()
    t_cols: Dict[int, List[Tuple[int, Poly]]] = {}
    for (r, c), p in Dt.entries.items():
        t_cols.setdefault(c, []).append((r, p))
    s_rows: Dict[int, List[Tuple[int, Poly]]] = {}
    for (r, c), p in Ds.entries.items():
        s_rows.setdefault(r, []).append((c, p))
    rows: Dict[Tuple, Dict[int, Fraction]] = {}
    for k, (r, c, e) in enumerate(unknowns):
        for r2, p in t_cols.get(r, ()):
            for e2, coeff in p.terms.items():
                eq = rows.setdefault((r2, c, _add_exps(e, e2)), {})
                eq[k] = eq.get(k, 0) + coeff
        for c2, p in s_rows.get(c, ()):
            for e2, coeff in p.terms.items():
                eq = rows.setdefault((r, c2, _add_exps(e, e2)), {})
                eq[k] = eq.get(k, 0) - coeff
    return list(rows.values())


def _assemble(ring, shape: Tuple[int, int], unknowns, values) -> PolyMatrix:
    entries: Dict[Tuple[int, int], Dict[Tuple[int, ...], Fraction]] = {}
    for (r, c, e), v in zip(unknowns, values):
        if v:
            entries.setdefault((r, c), {})[e] = v
    return PolyMatrix(ring, shape[0], shape[1], {k: Poly(ring, t) for k, t in entries.items()})


def _inverse(F: PolyMatrix, source: MatrixFactorization, target: MatrixFactorization, degree: int,
             graded: bool) -> Optional[PolyMatrix]:
    """Even G: target -> source with F G = id and G F = id, entries of degree <= `degree`."""
    ring = F.ring
    unknowns = _even_unknowns(target, source, degree, graded)
    if len(unknowns) > get_settings().max_unknowns:
        return None
    f_cols: Dict[int, List[Tuple[int, Poly]]] = {}
    f_rows: Dict[int, List[Tuple[int, Poly]]] = {}
    for (r, c), p in F.entries.items():
        f_cols.setdefault(c, []).append((r, p))
        f_rows.setdefault(r, []).append((c, p))
    rows: Dict[Tuple, Dict[int, Fraction]] = {}
    for k, (r, c, e) in enumerate(unknowns):
        # (F G)[r2, c] gets F[r2, r] * x_k mono; (G F)[r, c2] gets x_k mono * F[c, c2]
        for r2, p in f_cols.get(r, ()):
            for e2, coeff in p.terms.items():
                eq = rows.setdefault(("FG", r2, c, _add_exps(e, e2)), {})
                eq[k] = eq.get(k, 0) + coeff
        for c2, p in f_rows.get(c, ()):
            for e2, coeff in p.terms.items():
                eq = rows.setdefault(("GF", r, c2, _add_exps(e, e2)), {})
                eq[k] = eq.get(k, 0) + coeff
    zero = (0,) * ring.nvars
    for r in range(target.total_rank):
        rows.setdefault(("FG", r, r, zero), {})
    for r in range(source.total_rank):
        rows.setdefault(("GF", r, r, zero), {})
    keys = list(rows)
    rhs = [Fraction(1) if key[1] == key[2] and key[3] == zero else Fraction(0) for key in keys]
    solution = exact_solve([rows[k] for k in keys], rhs, len(unknowns))
    if solution is None:
        return None
    return _assemble(ring, (source.total_rank, target.total_rank), unknowns, solution)


def find_isomorphism(m: MatrixFactorization, n: MatrixFactorization, bound: int,
                     rng: Optional[np.random.Generator] = None) -> Optional[EquivalenceCertificate]:
    """Search closed even maps degree by degree for one with a polynomial inverse."""
    if (m.rank_minus1, m.rank_zero) != (n.rank_minus1, n.rank_zero):
        return None
    settings = get_settings()
    rng = rng if rng is not None else np.random.default_rng(settings.seed)
    modes = [True, False] if (m.graded and n.graded) else [False]
    for graded in modes:
        for degree in range(bound + 1):
            unknowns = _even_unknowns(m, n, degree, graded)
            if len(unknowns) > settings.max_unknowns:
                LOGGER.info("isomorphism search stopped at degree %d: %d unknowns", degree, len(unknowns))
                break
            basis = exact_nullspace(_closed_map_equations(m, n, unknowns), len(unknowns))
            if not basis:
                continue
            for _ in range(settings.iso_attempts):
                weights = rng.integers(1, 8, size=len(basis))
                values = [Fraction(0)] * len(unknowns)
                for wgt, vec in zip(weights, basis):
                    for idx, v in vec.items():
                        values[idx] += int(wgt) * v
                F = _assemble(m.ring, (n.total_rank, m.total_rank), unknowns, values)
                G = _inverse(F, m, n, degree, graded)
                if G is None:
                    continue
                cert = EquivalenceCertificate.from_isomorphism(MFMorphism.from_block(m, n, F, EVEN),
                                                               MFMorphism.from_block(n, m, G, EVEN))
                if cert.verify().ok:
                    LOGGER.debug("isomorphism found at degree %d (graded=%s)", degree, graded)
                    return cert
    return None


def _literal_identity(m: MatrixFactorization, n: MatrixFactorization) -> Optional[EquivalenceCertificate]:
    if m.total_differential() != n.total_differential() or m.rank_minus1 != n.rank_minus1:
        return None
    ident = PolyMatrix.identity(m.ring, m.total_rank)
    return EquivalenceCertificate.from_isomorphism(MFMorphism.from_block(m, n, ident, EVEN),
                                                   MFMorphism.from_block(n, m, ident, EVEN))


def equiv_check(m: MatrixFactorization, n: MatrixFactorization, bound: Optional[int] = None) -> EquivalenceResult:
    """Certificate m ~ n, NotFound(bound) or DefinitelyDistinct(reason).

    Negative answers are only given for positively graded inputs whose reduced forms
    have no unit-constant entries.
    """
    if m.ring != n.ring:
        raise RingMismatchError(f"equivalence check across rings {m.ring} and {n.ring}")
    if m.potential != n.potential:
        raise PotentialMismatchError(
            f"potentials differ: {format_poly(m.potential)} vs {format_poly(n.potential)}")
    bound = bound if bound is not None else get_settings().weight_bound
    m_red, m_trace = reduce_cached(m)
    n_red, n_trace = reduce_cached(n)
    to_m = m_trace.certificate(m)
    to_n = n_trace.certificate(n)

    middle = _literal_identity(m_red, n_red)
    if middle is None and _positively_graded(m_red) and _positively_graded(n_red) \
            and _is_minimal(m_red) and _is_minimal(n_red):
        reason = profile_difference(m_red, n_red)
        if reason is not None:
            LOGGER.info("definitely distinct: %s", reason)
            return DefinitelyDistinct(reason)
    if middle is None:
        middle = find_isomorphism(m_red, n_red, bound)
    if middle is None:
        return NotFound(bound)
    return _require(to_m.then(middle).then(to_n.inverse()), "equivalence certificate")


def oracle_equivalence_search(m: MatrixFactorization, n: MatrixFactorization, bound: int) -> bool:
    """Brute force with sympy: is there a closed even map m -> n (entries of total degree
    <= bound) whose constant part is invertible? For minimal factorizations this is
    exactly the existence of a homotopy equivalence within the bound."""
    m, _ = split_contractibles(m)
    n, _ = split_contractibles(n)
    if (m.rank_minus1, m.rank_zero) != (n.rank_minus1, n.rank_zero):
        return False
    ring = m.ring
    gens = ring_symbols(ring)
    unknowns = _even_unknowns(m, n, bound, False)
    coeffs = sympy.symbols(f"c0:{len(unknowns)}") if unknowns else ()
    size_t, size_s = n.total_rank, m.total_rank
    F = sympy.zeros(size_t, size_s)
    zero = (0,) * ring.nvars
    F0 = sympy.zeros(size_t, size_s)
    for sym, (r, c, e) in zip(coeffs, unknowns):
        mono = sympy.Integer(1)
        for g, k in zip(gens, e):
            mono = mono * g ** k
        F[r, c] += sym * mono
        if e == zero:
            F0[r, c] += sym

    def as_matrix(M: PolyMatrix):
        out = sympy.zeros(M.rows, M.cols)
        for (r, c), p in M.entries.items():
            out[r, c] = to_sympy(p, gens)
        return out

    residual = (as_matrix(n.total_differential()) * F - F * as_matrix(m.total_differential())).expand()
    equations = []
    for expr in residual:
        if expr == 0:
            continue
        if gens:
            equations.extend(sympy.Poly(expr, *gens).coeffs())
        else:
            equations.append(expr)
    solutions = sympy.linsolve(equations, list(coeffs)) if coeffs else sympy.FiniteSet(())
    if not solutions:
        return False
    (solution,) = tuple(solutions)
    general = F0.subs(dict(zip(coeffs, solution)))
    return sympy.simplify(general.det()) != 0


# -- serialization --------------------------------------------------------------------------

def format_certificate(cert: EquivalenceCertificate, prefix: str = "") -> str:
    parts = [format_mf(cert.source, prefix + "source."), format_mf(cert.target, prefix + "target.")]
    for name in ("forward", "backward", "h_source", "h_target"):
        parts.append(f"{prefix}{name}:\n" + format_matrix(getattr(cert, name).block()))
    return "".join(parts)


def certificate_from_sections(sections: Dict[str, List[str]], prefix: str = "") -> EquivalenceCertificate:
    source = mf_from_sections(sections, prefix + "source.")
    target = mf_from_sections(sections, prefix + "target.")
    try:
        blocks = {name: parse_matrix(sections[prefix + name], source.ring)
                  for name in ("forward", "backward", "h_source", "h_target")}
    except KeyError as exc:
        raise ParseError(f"certificate is missing section {exc}") from None
    return EquivalenceCertificate(
        MFMorphism.from_block(source, target, blocks["forward"], EVEN),
        MFMorphism.from_block(target, source, blocks["backward"], EVEN),
        MFMorphism.from_block(source, source, blocks["h_source"], ODD),
        MFMorphism.from_block(target, target, blocks["h_target"], ODD),
    )


def parse_certificate(text: str) -> EquivalenceCertificate:
    return certificate_from_sections(split_sections(text))


def format_trace(trace: ReductionTrace) -> str:
    parts = [f"steps: {len(trace)}\n"]
    for k, step in enumerate(trace.steps, start=1):
        prefix = f"step{k}."
        parts.append(f"{prefix}kind: {step.kind}\n{prefix}location: {step.location}\n")
        parts.append(format_certificate(step.certificate, prefix))
        parts.append(format_mf(step.result, prefix + "result."))
    return "".join(parts)


def parse_trace(text: str) -> ReductionTrace:
    sections = split_sections(text)
    try:
        count = int(sections["steps"][0])
    except (KeyError, IndexError, ValueError):
        raise ParseError("trace needs a `steps:` count") from None
    steps = []
    for k in range(1, count + 1):
        prefix = f"step{k}."
        try:
            kind = sections[prefix + "kind"][0]
            location = sections[prefix + "location"][0]
        except (KeyError, IndexError):
            raise ParseError(f"trace step {k} is incomplete") from None
        steps.append(ReductionStep(kind, location, certificate_from_sections(sections, prefix),
                                   mf_from_sections(sections, prefix + "result.")))
    return ReductionTrace(steps)


def certificate_to_dict(cert: EquivalenceCertificate) -> Dict:
    data = {"type": "certificate", "source": mf_to_dict(cert.source), "target": mf_to_dict(cert.target)}
    for name in ("forward", "backward", "h_source", "h_target"):
        data[name] = matrix_to_dict(getattr(cert, name).block())
    return data


def certificate_from_dict(data: Dict) -> EquivalenceCertificate:
    try:
        source, target = mf_from_dict(data["source"]), mf_from_dict(data["target"])
        blocks = {name: matrix_from_dict(data[name], source.ring)
                  for name in ("forward", "backward", "h_source", "h_target")}
    except KeyError as exc:
        raise ParseError(f"certificate object is missing {exc}") from None
    return EquivalenceCertificate(
        MFMorphism.from_block(source, target, blocks["forward"], EVEN),
        MFMorphism.from_block(target, source, blocks["backward"], EVEN),
        MFMorphism.from_block(source, source, blocks["h_source"], ODD),
        MFMorphism.from_block(target, target, blocks["h_target"], ODD),
    )


def trace_to_dict(trace: ReductionTrace) -> Dict:
    return {
        "type": "trace",
        "steps": [{"kind": s.kind, "location": s.location, "certificate": certificate_to_dict(s.certificate),
                   "result": mf_to_dict(s.result)} for s in trace.steps],
    }


def trace_from_dict(data: Dict) -> ReductionTrace:
    try:
        return ReductionTrace([ReductionStep(s["kind"], s["location"], certificate_from_dict(s["certificate"]),
                                             mf_from_dict(s["result"])) for s in data["steps"]])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad trace object: {exc}") from None
