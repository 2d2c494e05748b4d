"""
Free modules of finite rank and the polynomial matrices between them.

Also hosts the exact rational linear algebra (via sympy's DomainMatrix over QQ)
that base rewriting and the equivalence search rely on.
"""
import logging
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy import QQ, Expr
from sympy.polys.matrices import DomainMatrix

from polyring import (
    INHOMOGENEOUS,
    MFError,
    NotFiniteError,
    ParseError,
    Poly,
    Ring,
    RingMap,
    RingMismatchError,
    ShapeMismatchError,
    format_poly,
    format_rational,
    is_homogeneous,
    parse_poly,
    substitute,
    weight_degree,
)

LOGGER = logging.getLogger(__name__)

Entry = Union[Poly, str, int, Fraction]


class PolyMatrix:
    """Sparse matrix of polynomials; absent keys are zero entries."""

    __slots__ = ("ring", "rows", "cols", "entries", "row_weights", "col_weights")

    def __init__(self, ring: Ring, rows: int, cols: int, entries: Dict[Tuple[int, int], Poly] = None,
                 row_weights: Optional[Sequence[int]] = None, col_weights: Optional[Sequence[int]] = None):
        self.ring = ring
        self.rows = int(rows)
        self.cols = int(cols)
        clean = {}
        for (r, c), p in (entries or {}).items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ShapeMismatchError(f"entry ({r},{c}) outside a {self.rows}x{self.cols} matrix")
            if p.ring != ring:
                raise RingMismatchError("matrix entry over a different ring")
            if not p.is_zero():
                clean[(r, c)] = p
        self.entries = clean
        self.row_weights = tuple(row_weights) if row_weights is not None else None
        self.col_weights = tuple(col_weights) if col_weights is not None else None
        if self.row_weights is not None and len(self.row_weights) != self.rows:
            raise ShapeMismatchError("row weight vector has the wrong length")
        if self.col_weights is not None and len(self.col_weights) != self.cols:
            raise ShapeMismatchError("column weight vector has the wrong length")

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, ring: Ring, rows: int, cols: int) -> "PolyMatrix":
        return cls(ring, rows, cols, {})

    @classmethod
    def identity(cls, ring: Ring, n: int) -> "PolyMatrix":
        return cls.scalar(ring, n, ring.one())

    @classmethod
    def scalar(cls, ring: Ring, n: int, value: Entry) -> "PolyMatrix":
        p = ring.poly(value)
        return cls(ring, n, n, {(i, i): p for i in range(n)})

    @classmethod
    def from_rows(cls, ring: Ring, rows: Sequence[Sequence[Entry]], ncols: Optional[int] = None) -> "PolyMatrix":
        nrows = len(rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        entries = {}
        for r, row in enumerate(rows):
            if len(row) != ncols:
                raise ShapeMismatchError("ragged rows")
            for c, value in enumerate(row):
                entries[(r, c)] = ring.poly(value)
        return cls(ring, nrows, ncols, entries)

    @classmethod
    def block(cls, ring: Ring, blocks: Sequence[Sequence[Optional["PolyMatrix"]]],
              row_sizes: Sequence[int], col_sizes: Sequence[int]) -> "PolyMatrix":
        """Assemble a block matrix; None blocks are zero."""
        entries = {}
        r_off = 0
        for bi, block_row in enumerate(blocks):
            c_off = 0
            for bj, blk in enumerate(block_row):
                if blk is not None:
                    if (blk.rows, blk.cols) != (row_sizes[bi], col_sizes[bj]):
                        raise ShapeMismatchError(f"block ({bi},{bj}) has shape {blk.rows}x{blk.cols}")
                    for (r, c), p in blk.entries.items():
                        entries[(r_off + r, c_off + c)] = p
                c_off += col_sizes[bj]
            r_off += row_sizes[bi]
        return cls(ring, sum(row_sizes), sum(col_sizes), entries)

    # -- access ---------------------------------------------------------------
    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def get(self, r: int, c: int) -> Poly:
        p = self.entries.get((r, c))
        return p if p is not None else self.ring.zero()

    def is_zero(self) -> bool:
        return not self.entries

    def to_rows(self) -> List[List[Poly]]:
        return [[self.get(r, c) for c in range(self.cols)] for r in range(self.rows)]

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "PolyMatrix":
        rpos = {r: i for i, r in enumerate(row_idx)}
        cpos = {c: j for j, c in enumerate(col_idx)}
        entries = {(rpos[r], cpos[c]): p for (r, c), p in self.entries.items() if r in rpos and c in cpos}
        return PolyMatrix(self.ring, len(row_idx), len(col_idx), entries)

    def with_weights(self, row_weights, col_weights) -> "PolyMatrix":
        return PolyMatrix(self.ring, self.rows, self.cols, self.entries, row_weights, col_weights)

    def map_entries(self, fn, ring: Optional[Ring] = None) -> "PolyMatrix":
        ring = ring or self.ring
        return PolyMatrix(ring, self.rows, self.cols, {k: fn(p) for k, p in self.entries.items()},
                          self.row_weights, self.col_weights)

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix(self.ring, self.cols, self.rows, {(c, r): p for (r, c), p in self.entries.items()},
                          self.col_weights, self.row_weights)

    # -- arithmetic -------------------------------------------------------------
    def _check_same(self, other: "PolyMatrix"):
        if other.ring != self.ring:
            raise RingMismatchError("matrices over different rings")
        if other.shape != self.shape:
            raise ShapeMismatchError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        self._check_same(other)
        entries = dict(self.entries)
        for k, p in other.entries.items():
            entries[k] = entries[k] + p if k in entries else p
        if (self.row_weights, self.col_weights) == (other.row_weights, other.col_weights):
            return PolyMatrix(self.ring, self.rows, self.cols, entries, self.row_weights, self.col_weights)
        return PolyMatrix(self.ring, self.rows, self.cols, entries)

    def __neg__(self) -> "PolyMatrix":
        return PolyMatrix(self.ring, self.rows, self.cols, {k: -p for k, p in self.entries.items()},
                          self.row_weights, self.col_weights)

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        return self + (-other)

    def scale(self, value: Entry) -> "PolyMatrix":
        p = self.ring.poly(value) if not isinstance(value, Poly) else value
        return PolyMatrix(self.ring, self.rows, self.cols, {k: q * p for k, q in self.entries.items()})

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        return mat_compose(self, other)

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.ring == other.ring and self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.ring, self.shape, frozenset(self.entries.items())))

    def __repr__(self):
        return f"PolyMatrix({self.rows}x{self.cols}, {len(self.entries)} nonzero)"

    def __str__(self):
        return format_matrix(self)

    def homogeneity_violation(self, shift: int = 0) -> Optional[str]:
        """First entry not homogeneous of weight row_w - col_w + shift, if any."""
        if self.row_weights is None or self.col_weights is None or not self.ring.graded:
            return None
        for (r, c) in sorted(self.entries):
            want = self.row_weights[r] - self.col_weights[c] + shift
            if not is_homogeneous(self.entries[(r, c)], want):
                return f"entry ({r},{c}) = {format_poly(self.entries[(r, c)])} is not homogeneous of weight {want}"
        return None


def mat_compose(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    """Matrix product a*b (apply b first)."""
    if a.ring != b.ring:
        raise RingMismatchError("cannot compose matrices over different rings")
    if a.cols != b.rows:
        raise ShapeMismatchError(f"cannot compose {a.rows}x{a.cols} with {b.rows}x{b.cols}")
    by_row: Dict[int, List[Tuple[int, Poly]]] = {}
    for (r, c), p in b.entries.items():
        by_row.setdefault(r, []).append((c, p))
    entries: Dict[Tuple[int, int], Poly] = {}
    for (i, k), p in a.entries.items():
        for j, q in by_row.get(k, ()):
            key = (i, j)
            prod = p * q
            entries[key] = entries[key] + prod if key in entries else prod
    return PolyMatrix(a.ring, a.rows, b.cols, entries, a.row_weights, b.col_weights)


def base_change(m: PolyMatrix, phi: RingMap) -> PolyMatrix:
    """Entrywise substitution along phi; weights carry over unchanged."""
    if m.ring != phi.source:
        raise RingMismatchError("matrix ring differs from the map's source")
    return PolyMatrix(phi.target, m.rows, m.cols, {k: substitute(p, phi) for k, p in m.entries.items()},
                      m.row_weights, m.col_weights)


def kron(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    """Kronecker product, row-major: entry (i*rb+k, j*cb+l) = a[i,j]*b[k,l]."""
    if a.ring != b.ring:
        raise RingMismatchError("Kronecker product over different rings")
    entries = {}
    for (i, j), p in a.entries.items():
        for (k, l), q in b.entries.items():
            entries[(i * b.rows + k, j * b.cols + l)] = p * q
    return PolyMatrix(a.ring, a.rows * b.rows, a.cols * b.cols, entries)


def direct_sum(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    return PolyMatrix.block(a.ring, [[a, None], [None, b]], [a.rows, b.rows], [a.cols, b.cols])


def permutation_matrix(ring: Ring, perm: Sequence[int], signs: Optional[Sequence[int]] = None) -> PolyMatrix:
    """Matrix sending basis vector j to signs[j] * e_{perm[j]}."""
    n = len(perm)
    signs = signs or [1] * n
    return PolyMatrix(ring, n, n, {(perm[j], j): ring.const(signs[j]) for j in range(n)})


# -- exact rational linear algebra -------------------------------------------------

def _to_qq(c: Fraction):
    c = Fraction(c)
    return QQ(c.numerator, c.denominator)


def _from_qq(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def exact_solve(equations: Sequence[Dict[int, Fraction]], rhs: Sequence[Fraction], nunknowns: int) -> Optional[List[Fraction]]:
    """One solution of the sparse system (free unknowns set to zero), or None if inconsistent."""
    if nunknowns == 0:
        return [] if all(Fraction(b) == 0 for b in rhs) else None
    dok = {}
    for i, (eq, b) in enumerate(zip(equations, rhs)):
        for j, c in eq.items():
            if c:
                dok[(i, j)] = _to_qq(c)
        if b:
            dok[(i, nunknowns)] = _to_qq(b)
    if not equations:
        return [Fraction(0)] * nunknowns
    augmented = DomainMatrix.from_dok(dok, (len(equations), nunknowns + 1), QQ)
    reduced, pivots = augmented.rref()
    if nunknowns in pivots:
        return None
    values = reduced.to_dok()
    solution = [Fraction(0)] * nunknowns
    for row, col in enumerate(pivots):
        v = values.get((row, nunknowns))
        if v is not None:
            solution[col] = _from_qq(v)
    return solution


def exact_nullspace(equations: Sequence[Dict[int, Fraction]], nunknowns: int) -> List[Dict[int, Fraction]]:
    """Basis of the solution space of the homogeneous sparse system."""
    if nunknowns == 0:
        return []
    rows = [eq for eq in equations if any(eq.values())]
    if not rows:
        return [{j: Fraction(1)} for j in range(nunknowns)]
    dok = {(i, j): _to_qq(c) for i, eq in enumerate(rows) for j, c in eq.items() if c}
    matrix = DomainMatrix.from_dok(dok, (len(rows), nunknowns), QQ)
    basis = matrix.nullspace()
    vectors: Dict[int, Dict[int, Fraction]] = {}
    for (i, j), v in basis.to_dok().items():
        vectors.setdefault(i, {})[j] = _from_qq(v)
    return [vectors[i] for i in sorted(vectors)]


def to_sympy(p: Poly, gens: Sequence) -> Expr:
    """The polynomial as a sympy expression in the given generator symbols."""
    return p.element.as_expr(*gens)


def ring_symbols(ring: Ring) -> Tuple:
    return tuple(ring.sympy_ring().symbols)


def generic_rank(m: PolyMatrix) -> int:
    """Rank over the fraction field of the ring."""
    if m.is_zero():
        return 0
    gens = ring_symbols(m.ring)
    rows = [[to_sympy(p, gens) for p in row] for row in m.to_rows()]
    dm = DomainMatrix.from_list_sympy(m.rows, m.cols, rows)
    return int(dm.to_field().rank())


# -- finite restriction of scalars ----------------------------------------------------

def monomials_up_to(nvars: int, degree_of: Sequence[int], bound: int) -> List[Tuple[int, ...]]:
    """Exponent vectors with sum(e_i * degree_of[i]) <= bound; every degree_of[i] >= 1."""
    out: List[Tuple[int, ...]] = []

    def rec(i, prefix, budget):
        if i == nvars:
            out.append(tuple(prefix))
            return
        e = 0
        while e * degree_of[i] <= budget:
            rec(i + 1, prefix + [e], budget - e * degree_of[i])
            e += 1

    rec(0, [], bound)
    return out


def _image_degrees(phi: RingMap) -> List[int]:
    degrees = []
    for img in phi.images:
        d = img.degree()
        if d < 1:
            raise NotFiniteError("not finite over target: a generator maps to a constant")
        degrees.append(d)
    return degrees


def _spanning_family(phi: RingMap, basis: Sequence[Poly], top: int) -> List[Tuple[int, Tuple[int, ...], Poly]]:
    """(basis index, source monomial, phi(monomial) * basis element) of total degree <= top."""
    img_degrees = _image_degrees(phi)
    family = []
    for i, b in enumerate(basis):
        budget = top - b.degree()
        if budget < 0:
            continue
        for exps in monomials_up_to(phi.source.nvars, img_degrees, budget):
            mono = Poly(phi.source, {exps: 1})
            family.append((i, exps, substitute(mono, phi) * b))
    return family


def _coefficient_rows(family, extra: Iterable[Tuple[int, ...]] = ()) -> Tuple[List[Tuple[int, ...]], List[Dict[int, Fraction]]]:
    monomials = sorted({e for _, _, img in family for e in img.terms} | set(extra))
    row_of = {e: k for k, e in enumerate(monomials)}
    equations: List[Dict[int, Fraction]] = [dict() for _ in monomials]
    for j, (_, _, img) in enumerate(family):
        for e, c in img.terms.items():
            equations[row_of[e]][j] = c
    return monomials, equations


def check_free_basis(phi: RingMap, basis: Sequence[Poly]):
    """Raise NotFiniteError unless no phi.source-linear relation holds among the basis elements.

    Relations are searched among phi(s) * b_i up to the top basis degree plus the largest
    image degree.
    """
    if not basis:
        raise NotFiniteError("an empty basis cannot present a nonzero ring")
    if any(b.is_zero() for b in basis):
        raise NotFiniteError("a basis element is zero")
    top = max(b.degree() for b in basis) + max(_image_degrees(phi), default=0)
    family = _spanning_family(phi, basis, top)
    _, equations = _coefficient_rows(family)
    relations = exact_nullspace(equations, len(family))
    if relations:
        relation = relations[0]
        terms = [f"{format_rational(c)}*phi({format_poly(Poly(phi.source, {family[j][1]: 1}))})*"
                 f"({format_poly(basis[family[j][0]])})" for j, c in sorted(relation.items())]
        raise NotFiniteError(f"basis is not free over the source ring: {' + '.join(terms)} = 0")


def rewrite_in_basis(p: Poly, phi: RingMap, basis: Sequence[Poly]) -> List[Poly]:
    """Coefficients c_i over phi.source with p = sum_i phi(c_i) * basis[i]."""
    if p.ring != phi.target:
        raise RingMismatchError("rewriting needs a polynomial over the map's target")
    if p.is_zero():
        return [phi.source.zero() for _ in basis]
    family = _spanning_family(phi, basis, p.degree())
    monomials, equations = _coefficient_rows(family, p.terms)
    rhs = [p.terms.get(e, Fraction(0)) for e in monomials]
    solution = exact_solve(equations, rhs, len(family))
    if solution is None:
        raise NotFiniteError(f"not finite over target: {format_poly(p)} is not in the span of the basis")
    coeffs = [dict() for _ in basis]
    for (i, exps, _), value in zip(family, solution):
        if value:
            coeffs[i][exps] = value
    return [Poly(phi.source, c) for c in coeffs]


def restricted_weights(weights: Optional[Sequence[int]], phi: RingMap,
                       basis: Sequence[Poly]) -> Optional[List[int]]:
    """Weight of index r*len(basis)+i after restriction: weights[r] - wt(basis[i]).

    None unless the weights are given, phi is graded and every basis element is homogeneous.
    """
    if weights is None or not phi.is_graded():
        return None
    basis_weights = [weight_degree(b) for b in basis]
    if any(w == INHOMOGENEOUS for w in basis_weights):
        return None
    return [w - b for w in weights for b in basis_weights]


def restrict_scalars(m: PolyMatrix, phi: RingMap, basis: Sequence[Poly]) -> PolyMatrix:
    """View m (over phi.target) as a matrix over phi.source using a free monomial basis.

    Row/column (r, i) of the result is index r*len(basis)+i; block (r, c) is the
    matrix of multiplication by m[r, c] in the basis. Weights of m carry over shifted
    by the basis weights.
    """
    if m.ring != phi.target:
        raise RingMismatchError("restriction of scalars needs a matrix over the map's target")
    basis = [phi.target.poly(b) for b in basis]
    check_free_basis(phi, basis)
    size = len(basis)
    entries = {}
    for (r, c), p in m.entries.items():
        for j, b in enumerate(basis):
            coeffs = rewrite_in_basis(p * b, phi, basis)
            for i, q in enumerate(coeffs):
                if not q.is_zero():
                    entries[(r * size + i, c * size + j)] = q
    return PolyMatrix(phi.source, m.rows * size, m.cols * size, entries,
                      restricted_weights(m.row_weights, phi, basis),
                      restricted_weights(m.col_weights, phi, basis))


# -- text format ---------------------------------------------------------------

def format_matrix(m: PolyMatrix) -> str:
    lines = [f"{m.rows} {m.cols}"]
    for (r, c) in sorted(m.entries):
        lines.append(f"{r} {c} : {format_poly(m.entries[(r, c)])}")
    return "\n".join(lines) + "\n"


def parse_matrix(lines: Iterable[str], ring: Ring) -> PolyMatrix:
    """Parse a header line `rows cols` followed by `r c : poly` lines."""
    lines = [ln.strip() for ln in lines if ln.strip()]
    if not lines:
        raise ParseError("missing matrix header")
    try:
        rows, cols = (int(x) for x in lines[0].split())
    except ValueError:
        raise ParseError(f"bad matrix header {lines[0]!r}") from None
    entries = {}
    for ln in lines[1:]:
        if ":" not in ln:
            raise ParseError(f"bad matrix line {ln!r}")
        idx, body = ln.split(":", 1)
        try:
            r, c = (int(x) for x in idx.split())
        except ValueError:
            raise ParseError(f"bad matrix index {idx!r}") from None
        if (r, c) in entries:
            raise ParseError(f"duplicate entry ({r},{c})")
        entries[(r, c)] = parse_poly(body, ring)
    try:
        return PolyMatrix(ring, rows, cols, entries)
    except MFError as exc:
        raise ParseError(str(exc)) from exc


def matrix_to_dict(m: PolyMatrix) -> Dict:
    return {
        "rows": m.rows,
        "cols": m.cols,
        "entries": [[r, c, format_poly(m.entries[(r, c)])] for (r, c) in sorted(m.entries)],
    }


def matrix_from_dict(data: Dict, ring: Ring) -> PolyMatrix:
    try:
        entries = {(int(r), int(c)): parse_poly(text, ring) for r, c, text in data["entries"]}
        return PolyMatrix(ring, int(data["rows"]), int(data["cols"]), entries)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad matrix object: {exc}") from exc
