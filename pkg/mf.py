"""
Matrix factorizations and the operations on them.

A factorization is stored as (M^-1, M^0, d_minus1: M^-1 -> M^0, d_zero: M^0 -> M^-1).
Internally most operations work on the "total" module M^-1 + M^0 with basis order
(odd part, even part) and the single differential D = [[0, d_zero], [d_minus1, 0]],
so that D*D = w*id. Morphisms are block matrices on total modules; even ones are
block diagonal, odd ones block anti-diagonal.
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from freemod import (
    PolyMatrix,
    base_change,
    format_matrix,
    matrix_from_dict,
    matrix_to_dict,
    parse_matrix,
    permutation_matrix,
    restrict_scalars,
    restricted_weights,
    rewrite_in_basis,
)
from polyring import (
    MFError,
    NotClosedError,
    ParseError,
    Poly,
    PotentialMismatchError,
    Ring,
    RingMap,
    RingMismatchError,
    ShapeMismatchError,
    format_poly,
    format_ring,
    is_homogeneous,
    parse_poly,
    parse_ring,
    product_ring,
    substitute,
)

LOGGER = logging.getLogger(__name__)

EVEN, ODD = 0, 1


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    message: str = "ok"

    def __bool__(self):
        return self.ok


OK = ValidationReport(True)


@dataclass(frozen=True)
class MatrixFactorization:
    """(M^-1, M^0, d_minus1, d_zero) over `ring` with both composites equal to potential*id."""
    ring: Ring
    potential: Poly
    d_minus1: PolyMatrix
    d_zero: PolyMatrix
    weights_minus1: Optional[Tuple[int, ...]] = None
    weights_zero: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.potential.ring != self.ring or self.d_minus1.ring != self.ring or self.d_zero.ring != self.ring:
            raise RingMismatchError("factorization data over different rings")
        if self.d_minus1.shape != (self.d_zero.cols, self.d_zero.rows):
            raise ShapeMismatchError(
                f"d_minus1 is {self.d_minus1.shape} but d_zero is {self.d_zero.shape}")
        for name in ("weights_minus1", "weights_zero"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(int(v) for v in value))
        if self.weights_minus1 is not None and len(self.weights_minus1) != self.rank_minus1:
            raise ShapeMismatchError("weights_minus1 has the wrong length")
        if self.weights_zero is not None and len(self.weights_zero) != self.rank_zero:
            raise ShapeMismatchError("weights_zero has the wrong length")

    @property
    def rank_minus1(self) -> int:
        return self.d_minus1.cols

    @property
    def rank_zero(self) -> int:
        return self.d_minus1.rows

    @property
    def total_rank(self) -> int:
        return self.rank_minus1 + self.rank_zero

    @property
    def graded(self) -> bool:
        return self.ring.graded and self.weights_minus1 is not None and self.weights_zero is not None

    def parity(self, index: int) -> int:
        """MF parity of a total basis index: the -1 term is odd."""
        return ODD if index < self.rank_minus1 else EVEN

    def total_weights(self) -> Optional[Tuple[int, ...]]:
        if not self.graded:
            return None
        return self.weights_minus1 + self.weights_zero

    def total_differential(self) -> PolyMatrix:
        a, b = self.rank_minus1, self.rank_zero
        return PolyMatrix.block(self.ring, [[None, self.d_zero], [self.d_minus1, None]], [a, b], [a, b])

    def is_zero_object(self) -> bool:
        return self.total_rank == 0

    def __str__(self):
        return format_mf(self)


def from_total(ring: Ring, potential: Poly, n_odd: int, D: PolyMatrix,
               weights: Optional[Sequence[int]] = None) -> MatrixFactorization:
    """Split a total differential (odd basis first) back into d_minus1, d_zero."""
    n = D.rows
    for (r, c) in D.entries:
        if (r < n_odd) == (c < n_odd):
            raise ShapeMismatchError(f"total differential has a parity-preserving entry at ({r},{c})")
    odd, even = list(range(n_odd)), list(range(n_odd, n))
    w_minus1 = w_zero = None
    if weights is not None:
        w_minus1, w_zero = tuple(weights[:n_odd]), tuple(weights[n_odd:])
    return MatrixFactorization(ring, potential, D.submatrix(even, odd), D.submatrix(odd, even), w_minus1, w_zero)


def _first_scalar_violation(prod: PolyMatrix, w: Poly, label: str) -> Optional[str]:
    for r in range(prod.rows):
        for c in range(prod.cols):
            want = w if r == c else w.ring.zero()
            got = prod.get(r, c)
            if got != want:
                return f"{label} at ({r},{c}): {format_poly(got)} != {format_poly(want)}"
    return None


def mf_validate(m: MatrixFactorization) -> ValidationReport:
    """Check both composites equal potential*id, ranks and grading constraints."""
    w = m.potential
    msg = _first_scalar_violation(m.d_zero @ m.d_minus1, w, "d_zero*d_minus1")
    if msg is None:
        msg = _first_scalar_violation(m.d_minus1 @ m.d_zero, w, "d_minus1*d_zero")
    if msg is None and not w.is_zero() and m.rank_minus1 != m.rank_zero:
        msg = f"unequal ranks {m.rank_minus1} != {m.rank_zero} over a domain with nonzero potential"
    if msg is None and m.graded:
        if not is_homogeneous(w, 2):
            msg = f"potential {format_poly(w)} is not homogeneous of weight 2"
        else:
            msg = (m.d_minus1.with_weights(m.weights_zero, m.weights_minus1).homogeneity_violation(1)
                   or m.d_zero.with_weights(m.weights_minus1, m.weights_zero).homogeneity_violation(1))
    if msg is not None:
        LOGGER.debug("factorization rejected: %s", msg)
        return ValidationReport(False, msg)
    return OK


def checked(m: MatrixFactorization, context: str) -> MatrixFactorization:
    report = mf_validate(m)
    if not report.ok:
        raise MFError(f"{context} produced an invalid factorization: {report.message}")
    return m


# -- basic constructions ------------------------------------------------------

def mf_zero(ring: Ring, potential: Optional[Poly] = None) -> MatrixFactorization:
    w = potential if potential is not None else ring.zero()
    z = PolyMatrix.zero(ring, 0, 0)
    return MatrixFactorization(ring, w, z, z, (), ())


def mf_koszul_pair(ring: Ring, a, b, weight_minus1: Optional[int] = None) -> MatrixFactorization:
    """K(a; b): d_minus1 = [a], d_zero = [b], potential a*b."""
    a, b = ring.poly(a), ring.poly(b)
    weights = (None, None)
    if weight_minus1 is not None:
        wa = _homogeneous_weight(a)
        if wa is not None:
            weights = ((weight_minus1,), (weight_minus1 + wa - 1,))
    return checked(MatrixFactorization(ring, a * b, PolyMatrix.from_rows(ring, [[a]]),
                                       PolyMatrix.from_rows(ring, [[b]]), *weights), "koszul pair")


def _homogeneous_weight(p: Poly) -> Optional[int]:
    if not p.ring.graded or p.is_zero():
        return None
    weights = {p.ring.monomial_weight(e) for e in p.terms}
    return weights.pop() if len(weights) == 1 else None


def mf_bar(rank: int, ring: Ring, w: Optional[Poly] = None) -> MatrixFactorization:
    """The plain free module O^rank placed in the even term with zero maps.

    With zero maps this only factors w = 0, unless rank is 0 and the object is zero.
    """
    if rank < 0:
        raise ShapeMismatchError(f"negative rank {rank}")
    w = ring.zero() if w is None else ring.poly(w)
    if rank and not w.is_zero():
        raise PotentialMismatchError(f"a free module with zero maps does not factor {format_poly(w)}")
    return MatrixFactorization(ring, w, PolyMatrix.zero(ring, rank, 0), PolyMatrix.zero(ring, 0, rank),
                               (), (0,) * rank)


def mf_direct_sum(m: MatrixFactorization, n: MatrixFactorization) -> MatrixFactorization:
    _same_potential(m, n)
    am, bm, an, bn = m.rank_minus1, m.rank_zero, n.rank_minus1, n.rank_zero
    d1 = PolyMatrix.block(m.ring, [[m.d_minus1, None], [None, n.d_minus1]], [bm, bn], [am, an])
    d0 = PolyMatrix.block(m.ring, [[m.d_zero, None], [None, n.d_zero]], [am, an], [bm, bn])
    w1 = w0 = None
    if m.graded and n.graded:
        w1, w0 = m.weights_minus1 + n.weights_minus1, m.weights_zero + n.weights_zero
    return checked(MatrixFactorization(m.ring, m.potential, d1, d0, w1, w0), "direct sum")


def _same_potential(m: MatrixFactorization, n: MatrixFactorization):
    if m.ring != n.ring:
        raise RingMismatchError(f"factorizations over different rings: {m.ring} vs {n.ring}")
    if m.potential != n.potential:
        raise PotentialMismatchError(
            f"potential mismatch: {format_poly(m.potential)} vs {format_poly(n.potential)}")


def mf_shift(m: MatrixFactorization) -> MatrixFactorization:
    """Swap the two terms and negate: (d_minus1, d_zero) -> (-d_zero, -d_minus1)."""
    return MatrixFactorization(m.ring, m.potential, -m.d_zero, -m.d_minus1, m.weights_zero, m.weights_minus1)


# -- morphisms -----------------------------------------------------------------

@dataclass(frozen=True)
class MFMorphism:
    """Hom-complex element. Even: f_minus1: M^-1 -> N^-1, f_zero: M^0 -> N^0.
    Odd: f_minus1: M^-1 -> N^0, f_zero: M^0 -> N^-1."""
    source: MatrixFactorization
    target: MatrixFactorization
    f_minus1: PolyMatrix
    f_zero: PolyMatrix
    parity: int = EVEN

    def __post_init__(self):
        s, t = self.source, self.target
        if s.ring != t.ring:
            raise RingMismatchError("morphism between factorizations over different rings")
        if self.parity == EVEN:
            want = ((t.rank_minus1, s.rank_minus1), (t.rank_zero, s.rank_zero))
        elif self.parity == ODD:
            want = ((t.rank_zero, s.rank_minus1), (t.rank_minus1, s.rank_zero))
        else:
            raise MFError(f"parity must be 0 or 1, got {self.parity}")
        if (self.f_minus1.shape, self.f_zero.shape) != want:
            raise ShapeMismatchError(
                f"morphism blocks {self.f_minus1.shape}, {self.f_zero.shape} do not fit parity {self.parity}")

    @classmethod
    def from_block(cls, source: MatrixFactorization, target: MatrixFactorization, F: PolyMatrix,
                   parity: int) -> "MFMorphism":
        sa, ta = source.rank_minus1, target.rank_minus1
        if F.shape != (target.total_rank, source.total_rank):
            raise ShapeMismatchError(f"block of shape {F.shape} for a {source.total_rank}->{target.total_rank} map")
        for (r, c) in F.entries:
            if ((r < ta) == (c < sa)) != (parity == EVEN):
                raise ShapeMismatchError(f"entry ({r},{c}) has the wrong parity")
        s_odd, s_even = range(sa), range(sa, source.total_rank)
        t_odd, t_even = range(ta), range(ta, target.total_rank)
        if parity == EVEN:
            return cls(source, target, F.submatrix(t_odd, s_odd), F.submatrix(t_even, s_even), EVEN)
        return cls(source, target, F.submatrix(t_even, s_odd), F.submatrix(t_odd, s_even), ODD)

    @classmethod
    def identity(cls, m: MatrixFactorization) -> "MFMorphism":
        return cls(m, m, PolyMatrix.identity(m.ring, m.rank_minus1), PolyMatrix.identity(m.ring, m.rank_zero))

    @classmethod
    def zero(cls, source: MatrixFactorization, target: MatrixFactorization, parity: int = EVEN) -> "MFMorphism":
        return cls.from_block(source, target, PolyMatrix.zero(source.ring, target.total_rank, source.total_rank),
                              parity)

    def block(self) -> PolyMatrix:
        s, t = self.source, self.target
        sa, sb, ta, tb = s.rank_minus1, s.rank_zero, t.rank_minus1, t.rank_zero
        if self.parity == EVEN:
            return PolyMatrix.block(s.ring, [[self.f_minus1, None], [None, self.f_zero]], [ta, tb], [sa, sb])
        return PolyMatrix.block(s.ring, [[None, self.f_zero], [self.f_minus1, None]], [ta, tb], [sa, sb])

    def compose(self, other: "MFMorphism") -> "MFMorphism":
        """self o other."""
        if other.target != self.source:
            raise ShapeMismatchError("morphisms are not composable")
        return MFMorphism.from_block(other.source, self.target, self.block() @ other.block(),
                                     (self.parity + other.parity) % 2)

    def _combine(self, other: "MFMorphism", sign: int) -> "MFMorphism":
        if (other.source, other.target, other.parity) != (self.source, self.target, self.parity):
            raise ShapeMismatchError("cannot add morphisms of different type")
        block = self.block() + other.block() if sign > 0 else self.block() - other.block()
        return MFMorphism.from_block(self.source, self.target, block, self.parity)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return MFMorphism(self.source, self.target, -self.f_minus1, -self.f_zero, self.parity)

    def scale(self, value) -> "MFMorphism":
        return MFMorphism(self.source, self.target, self.f_minus1.scale(value), self.f_zero.scale(value),
                          self.parity)

    def is_zero(self) -> bool:
        return self.f_minus1.is_zero() and self.f_zero.is_zero()


def hom_diff(f: MFMorphism) -> MFMorphism:
    """d(f) = D_N f - (-1)^|f| f D_M; squares to zero when potentials agree."""
    F = f.block()
    left = f.target.total_differential() @ F
    right = F @ f.source.total_differential()
    result = left - right if f.parity == EVEN else left + right
    return MFMorphism.from_block(f.source, f.target, result, 1 - f.parity)


def is_closed(f: MFMorphism) -> bool:
    return hom_diff(f).is_zero()


@dataclass(frozen=True)
class EquivalenceCertificate:
    """forward: M -> N, backward: N -> M (even, closed) and odd homotopies with
    backward*forward - id = d(h_source), forward*backward - id = d(h_target)."""
    forward: MFMorphism
    backward: MFMorphism
    h_source: MFMorphism
    h_target: MFMorphism

    @property
    def source(self) -> MatrixFactorization:
        return self.forward.source

    @property
    def target(self) -> MatrixFactorization:
        return self.forward.target

    @classmethod
    def identity(cls, m: MatrixFactorization) -> "EquivalenceCertificate":
        ident = MFMorphism.identity(m)
        zero = MFMorphism.zero(m, m, ODD)
        return cls(ident, ident, zero, zero)

    @classmethod
    def from_isomorphism(cls, forward: MFMorphism, backward: MFMorphism) -> "EquivalenceCertificate":
        return cls(forward, backward, MFMorphism.zero(forward.source, forward.source, ODD),
                   MFMorphism.zero(forward.target, forward.target, ODD))

    def inverse(self) -> "EquivalenceCertificate":
        return EquivalenceCertificate(self.backward, self.forward, self.h_target, self.h_source)

    def then(self, other: "EquivalenceCertificate") -> "EquivalenceCertificate":
        """Chain M ~ N (self) with N ~ P (other) into M ~ P."""
        f1, g1, f2, g2 = self.forward, self.backward, other.forward, other.backward
        forward = f2.compose(f1)
        backward = g1.compose(g2)
        h_source = self.h_source + g1.compose(other.h_source).compose(f1)
        h_target = other.h_target + f2.compose(self.h_target).compose(g2)
        return EquivalenceCertificate(forward, backward, h_source, h_target)

    def verify(self) -> ValidationReport:
        """Recheck every identity with independent matrix arithmetic."""
        f, g = self.forward, self.backward
        if f.parity != EVEN or g.parity != EVEN:
            return ValidationReport(False, "certificate maps must be even")
        if self.h_source.parity != ODD or self.h_target.parity != ODD:
            return ValidationReport(False, "certificate homotopies must be odd")
        if not is_closed(f):
            return ValidationReport(False, "forward map is not closed")
        if not is_closed(g):
            return ValidationReport(False, "backward map is not closed")
        lhs = g.compose(f) - MFMorphism.identity(f.source)
        if lhs.block() != hom_diff(self.h_source).block():
            return ValidationReport(False, "backward*forward - id != d(h_source)")
        rhs = f.compose(g) - MFMorphism.identity(f.target)
        if rhs.block() != hom_diff(self.h_target).block():
            return ValidationReport(False, "forward*backward - id != d(h_target)")
        return OK


def permutation_certificate(source: MatrixFactorization, target: MatrixFactorization,
                            perm: Sequence[int], signs: Sequence[int]) -> EquivalenceCertificate:
    """Certificate from a signed basis permutation of total modules (source j -> target perm[j])."""
    P = permutation_matrix(source.ring, perm, signs)
    forward = MFMorphism.from_block(source, target, P, EVEN)
    backward = MFMorphism.from_block(target, source, P.transpose(), EVEN)
    cert = EquivalenceCertificate.from_isomorphism(forward, backward)
    report = cert.verify()
    if not report.ok:
        raise MFError(f"signed permutation is not an isomorphism: {report.message}")
    return cert


def permutation_signs(source: MatrixFactorization, target: MatrixFactorization,
                      perm: Sequence[int]) -> Optional[List[int]]:
    """Signs s with target D[perm r, perm c] == s_r * s_c * source D[r, c], if any exist.

    Each connected block of the source differential is anchored at +1.
    """
    Ds, Dt = source.total_differential(), target.total_differential()
    if {(perm[r], perm[c]) for (r, c) in Ds.entries} != set(Dt.entries):
        return None
    links: Dict[int, List[Tuple[int, int]]] = {}
    for (r, c), p in sorted(Ds.entries.items()):
        q = Dt.get(perm[r], perm[c])
        if q == p:
            rel = 1
        elif q == -p:
            rel = -1
        else:
            return None
        links.setdefault(r, []).append((c, rel))
        links.setdefault(c, []).append((r, rel))
    signs: List[Optional[int]] = [None] * len(perm)
    for start in range(len(perm)):
        if signs[start] is not None:
            continue
        signs[start] = 1
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j, rel in links.get(i, ()):
                want = signs[i] * rel
                if signs[j] is None:
                    signs[j] = want
                    queue.append(j)
                elif signs[j] != want:
                    return None
    return signs


def mf_shift_certificate(m: MatrixFactorization) -> EquivalenceCertificate:
    """shift(shift(m)) -> m; the two coincide, so the certificate is the identity."""
    twice = mf_shift(mf_shift(m))
    if twice != m:
        raise MFError("double shift differs from the original factorization")
    return EquivalenceCertificate.identity(m)


# -- cone and totalization -------------------------------------------------------

def mf_cone(f: MFMorphism) -> MatrixFactorization:
    """Cone N + shift(M) of a closed even map f: M -> N."""
    if f.parity != EVEN:
        raise MFError("cone needs an even morphism")
    m, n = f.source, f.target
    _same_potential(m, n)
    if not is_closed(f):
        raise NotClosedError("cone of a non-closed morphism")
    ring = m.ring
    d1 = PolyMatrix.block(ring, [[n.d_minus1, f.f_zero], [None, -m.d_zero]],
                          [n.rank_zero, m.rank_minus1], [n.rank_minus1, m.rank_zero])
    d0 = PolyMatrix.block(ring, [[n.d_zero, f.f_minus1], [None, -m.d_minus1]],
                          [n.rank_minus1, m.rank_zero], [n.rank_zero, m.rank_minus1])
    w1 = w0 = None
    if m.graded and n.graded:
        w1 = n.weights_minus1 + tuple(x + 1 for x in m.weights_zero)
        w0 = n.weights_zero + tuple(x + 1 for x in m.weights_minus1)
    return checked(MatrixFactorization(ring, m.potential, d1, d0, w1, w0), "cone")


def mf_tot(objects: Sequence[MatrixFactorization], maps: Sequence[MFMorphism]) -> MatrixFactorization:
    """Totalize a finite complex M_0 -> M_1 -> ... of closed even maps.

    Term of total parity p collects M_c's part of MF parity q with c + q = p (mod 2);
    the differential is the internal one plus (-1)^(MF parity) g_c.
    """
    if not objects:
        raise MFError("totalization of an empty complex")
    if len(maps) != len(objects) - 1:
        raise MFError("a complex of k objects needs k-1 maps")
    for obj in objects[1:]:
        _same_potential(objects[0], obj)
    for c, g in enumerate(maps):
        if g.source != objects[c] or g.target != objects[c + 1] or g.parity != EVEN:
            raise MFError(f"map {c} does not connect consecutive objects")
        if not is_closed(g):
            raise NotClosedError(f"map {c} is not closed")
        if c + 1 < len(maps) and not maps[c + 1].compose(g).is_zero():
            raise MFError(f"maps {c} and {c + 1} do not compose to zero")
    ring = objects[0].ring
    odd_slots: List[Tuple[int, int]] = []
    even_slots: List[Tuple[int, int]] = []
    for c, obj in enumerate(objects):
        for j in range(obj.total_rank):
            (odd_slots if (c + obj.parity(j)) % 2 else even_slots).append((c, j))
    slots = odd_slots + even_slots
    pos = {slot: k for k, slot in enumerate(slots)}
    entries: Dict[Tuple[int, int], Poly] = {}
    for c, obj in enumerate(objects):
        for (r, col), p in obj.total_differential().entries.items():
            entries[(pos[(c, r)], pos[(c, col)])] = p
    for c, g in enumerate(maps):
        for (r, col), p in g.block().entries.items():
            sign = -1 if objects[c].parity(col) == ODD else 1
            entries[(pos[(c + 1, r)], pos[(c, col)])] = p.scale(sign)
    D = PolyMatrix(ring, len(slots), len(slots), entries)
    weights = None
    if all(obj.graded for obj in objects):
        weights = [objects[c].total_weights()[j] - c for (c, j) in slots]
    return checked(from_total(ring, objects[0].potential, len(odd_slots), D, weights), "totalization")


# -- tensor products ------------------------------------------------------------------

def tensor_layout(m: MatrixFactorization, n: MatrixFactorization) -> Tuple[List[Tuple[int, int]], int]:
    """Total-index pairs (a, b) of M (x) N in basis order, and the odd-part size.

    Odd: M^-1(x)N^0 then M^0(x)N^-1; even: M^-1(x)N^-1 then M^0(x)N^0; row-major within blocks.
    """
    m_odd, m_even = range(m.rank_minus1), range(m.rank_minus1, m.total_rank)
    n_odd, n_even = range(n.rank_minus1), range(n.rank_minus1, n.total_rank)
    odd = [(a, b) for a in m_odd for b in n_even] + [(a, b) for a in m_even for b in n_odd]
    even = [(a, b) for a in m_odd for b in n_odd] + [(a, b) for a in m_even for b in n_even]
    return odd + even, len(odd)


def _columns(M: PolyMatrix) -> Dict[int, List[Tuple[int, Poly]]]:
    cols: Dict[int, List[Tuple[int, Poly]]] = {}
    for (r, c), p in M.entries.items():
        cols.setdefault(c, []).append((r, p))
    return cols


def mf_tensor(m: MatrixFactorization, n: MatrixFactorization) -> MatrixFactorization:
    """M (x) N over the same ring: d(a(x)b) = da(x)b + (-1)^|a| a(x)db, potential w1 + w2."""
    if m.ring != n.ring:
        raise RingMismatchError("tensor product needs a common ring (use mf_external_tensor)")
    layout, n_odd = tensor_layout(m, n)
    pos = {pair: k for k, pair in enumerate(layout)}
    dm_cols, dn_cols = _columns(m.total_differential()), _columns(n.total_differential())
    entries: Dict[Tuple[int, int], Poly] = {}
    for k, (a, b) in enumerate(layout):
        for r, p in dm_cols.get(a, ()):
            entries[(pos[(r, b)], k)] = p
        sign = -1 if m.parity(a) == ODD else 1
        for r, p in dn_cols.get(b, ()):
            key = (pos[(a, r)], k)
            q = p.scale(sign)
            entries[key] = entries[key] + q if key in entries else q
    D = PolyMatrix(m.ring, len(layout), len(layout), entries)
    weights = None
    if m.graded and n.graded:
        wm, wn = m.total_weights(), n.total_weights()
        weights = [wm[a] + wn[b] for (a, b) in layout]
    return checked(from_total(m.ring, m.potential + n.potential, n_odd, D, weights), "tensor product")


def mf_tensor_morphism(f: MFMorphism, g: MFMorphism) -> MFMorphism:
    """f (x) g with (f(x)g)(a(x)b) = (-1)^(|g||a|) f(a) (x) g(b)."""
    source = mf_tensor(f.source, g.source)
    target = mf_tensor(f.target, g.target)
    s_layout, _ = tensor_layout(f.source, g.source)
    t_layout, _ = tensor_layout(f.target, g.target)
    t_pos = {pair: k for k, pair in enumerate(t_layout)}
    f_cols, g_cols = _columns(f.block()), _columns(g.block())
    entries: Dict[Tuple[int, int], Poly] = {}
    for k, (a, b) in enumerate(s_layout):
        sign = -1 if (g.parity and f.source.parity(a) == ODD) else 1
        for ra, p in f_cols.get(a, ()):
            for rb, q in g_cols.get(b, ()):
                entries[(t_pos[(ra, rb)], k)] = (p * q).scale(sign)
    F = PolyMatrix(source.ring, target.total_rank, source.total_rank, entries)
    return MFMorphism.from_block(source, target, F, (f.parity + g.parity) % 2)


def mf_swap_certificate(m: MatrixFactorization, n: MatrixFactorization) -> EquivalenceCertificate:
    """M (x) N -> N (x) M, a(x)b -> (-1)^(|a||b|) b(x)a."""
    source, target = mf_tensor(m, n), mf_tensor(n, m)
    s_layout, _ = tensor_layout(m, n)
    t_pos = {pair: k for k, pair in enumerate(tensor_layout(n, m)[0])}
    perm, signs = [], []
    for (a, b) in s_layout:
        perm.append(t_pos[(b, a)])
        signs.append(-1 if (m.parity(a) == ODD and n.parity(b) == ODD) else 1)
    return permutation_certificate(source, target, perm, signs)


def mf_assoc_certificate(a: MatrixFactorization, b: MatrixFactorization,
                         c: MatrixFactorization) -> EquivalenceCertificate:
    """(A (x) B) (x) C -> A (x) (B (x) C), reassociation without signs."""
    ab, bc = mf_tensor(a, b), mf_tensor(b, c)
    source, target = mf_tensor(ab, c), mf_tensor(a, bc)
    ab_layout, _ = tensor_layout(a, b)
    bc_pos = {pair: k for k, pair in enumerate(tensor_layout(b, c)[0])}
    t_pos = {pair: k for k, pair in enumerate(tensor_layout(a, bc)[0])}
    perm = []
    for (i_ab, i_c) in tensor_layout(ab, c)[0]:
        i_a, i_b = ab_layout[i_ab]
        perm.append(t_pos[(i_a, bc_pos[(i_b, i_c)])])
    return permutation_certificate(source, target, perm, [1] * len(perm))


# -- change of rings ---------------------------------------------------------------

def mf_pullback(m: MatrixFactorization, phi: RingMap) -> MatrixFactorization:
    """Entrywise substitution; potential becomes phi(w)."""
    if m.ring != phi.source:
        raise RingMismatchError("pullback along a map whose source is not the factorization's ring")
    keep_weights = phi.target.graded and phi.is_graded()
    w1 = m.weights_minus1 if keep_weights else None
    w0 = m.weights_zero if keep_weights else None
    return checked(MatrixFactorization(phi.target, substitute(m.potential, phi), base_change(m.d_minus1, phi),
                                       base_change(m.d_zero, phi), w1, w0), "pullback")


def mf_external_tensor(m: MatrixFactorization, n: MatrixFactorization,
                       ring: Optional[Ring] = None) -> MatrixFactorization:
    """Box product: pull both factors into a ring containing both variable sets, then tensor."""
    if ring is None:
        ring = product_ring(m.ring, n.ring)
    left = mf_pullback(m, RingMap.from_assignments(m.ring, ring))
    right = mf_pullback(n, RingMap.from_assignments(n.ring, ring))
    return mf_tensor(left, right)


def mf_rename(m: MatrixFactorization, target: Ring, mapping: Dict[str, str]) -> MatrixFactorization:
    """Pull back along a variable renaming into `target`."""
    phi = RingMap.from_assignments(m.ring, target, {v: target.var(mapping.get(v, v)) for v in m.ring.variables})
    return mf_pullback(m, phi)


def mf_pushforward_finite(m: MatrixFactorization, phi: RingMap, basis: Sequence,
                          potential: Optional[Poly] = None) -> MatrixFactorization:
    """Restriction of scalars along phi: phi.source -> phi.target (m lives over the target).

    `basis` is a monomial basis of phi.target as a free phi.source-module.
    """
    if m.ring != phi.target:
        raise RingMismatchError("pushforward needs a factorization over the map's target")
    basis = [phi.target.poly(b) for b in basis]
    if potential is None:
        coeffs = rewrite_in_basis(m.potential, phi, basis)
        ones = [i for i, b in enumerate(basis) if b == phi.target.one()]
        if not ones or any(not c.is_zero() for i, c in enumerate(coeffs) if i != ones[0]):
            raise PotentialMismatchError("potential is not defined over the target ring")
        potential = coeffs[ones[0]]
    potential = phi.source.poly(potential)
    if substitute(potential, phi) != m.potential:
        raise PotentialMismatchError(
            f"declared potential {format_poly(potential)} does not pull back to {format_poly(m.potential)}")
    d1 = restrict_scalars(m.d_minus1, phi, basis)
    d0 = restrict_scalars(m.d_zero, phi, basis)
    w1 = w0 = None
    if m.graded and phi.source.graded:
        w1 = restricted_weights(m.weights_minus1, phi, basis)
        w0 = restricted_weights(m.weights_zero, phi, basis)
        if w1 is None or w0 is None:
            w1 = w0 = None
    return checked(MatrixFactorization(phi.source, potential, d1, d0, w1, w0), "pushforward")


# -- text and JSON formats --------------------------------------------------------------

def _format_weights(ws) -> str:
    return " ".join(str(w) for w in ws)


def format_mf(m: MatrixFactorization, prefix: str = "") -> str:
    """Canonical text; `prefix` namespaces the section keys when objects are embedded."""
    lines = [f"{prefix}ring: {format_ring(m.ring)}", f"{prefix}potential: {format_poly(m.potential)}"]
    if m.weights_minus1 is not None and m.weights_zero is not None:
        lines.append(f"{prefix}weights_minus1: {_format_weights(m.weights_minus1)}")
        lines.append(f"{prefix}weights_zero: {_format_weights(m.weights_zero)}")
    lines.append(f"{prefix}d_minus1:")
    lines.append(format_matrix(m.d_minus1).rstrip("\n"))
    lines.append(f"{prefix}d_zero:")
    lines.append(format_matrix(m.d_zero).rstrip("\n"))
    return "\n".join(lines) + "\n"


def split_sections(text: str) -> Dict[str, List[str]]:
    """Group lines under `key:` headers; `key: value` on one line stores [value]."""
    sections: Dict[str, List[str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        head, sep, rest = line.partition(":")
        if sep and head.strip() and " " not in head.strip() and not head.strip()[0].isdigit():
            current = head.strip()
            if current in sections:
                raise ParseError(f"duplicate section {current!r}")
            sections[current] = [rest.strip()] if rest.strip() else []
        elif current is None:
            raise ParseError(f"content before any section: {raw!r}")
        else:
            sections[current].append(line)
    return sections


def _weights_from(values: Optional[List[str]]) -> Optional[Tuple[int, ...]]:
    if values is None:
        return None
    try:
        return tuple(int(x) for x in " ".join(values).split())
    except ValueError:
        raise ParseError(f"bad weight vector {values!r}") from None


def parse_mf(text: str) -> MatrixFactorization:
    return mf_from_sections(split_sections(text))


def mf_from_sections(sections: Dict[str, List[str]], prefix: str = "") -> MatrixFactorization:
    try:
        ring = parse_ring(" ".join(sections.get(prefix + "ring", [""])))
        potential = parse_poly(sections[prefix + "potential"][0], ring)
        d1 = parse_matrix(sections[prefix + "d_minus1"], ring)
        d0 = parse_matrix(sections[prefix + "d_zero"], ring)
    except (KeyError, IndexError) as exc:
        raise ParseError(f"factorization is missing section {exc}") from None
    try:
        return MatrixFactorization(ring, potential, d1, d0, _weights_from(sections.get(prefix + "weights_minus1")),
                                   _weights_from(sections.get(prefix + "weights_zero")))
    except MFError as exc:
        raise ParseError(str(exc)) from exc


def mf_to_dict(m: MatrixFactorization) -> Dict:
    data = {
        "type": "mf",
        "ring": format_ring(m.ring),
        "potential": format_poly(m.potential),
        "d_minus1": matrix_to_dict(m.d_minus1),
        "d_zero": matrix_to_dict(m.d_zero),
    }
    if m.weights_minus1 is not None and m.weights_zero is not None:
        data["weights_minus1"] = list(m.weights_minus1)
        data["weights_zero"] = list(m.weights_zero)
    return data


def mf_from_dict(data: Dict) -> MatrixFactorization:
    try:
        ring = parse_ring(data["ring"])
        return MatrixFactorization(ring, parse_poly(data["potential"], ring),
                                   matrix_from_dict(data["d_minus1"], ring), matrix_from_dict(data["d_zero"], ring),
                                   data.get("weights_minus1"), data.get("weights_zero"))
    except KeyError as exc:
        raise ParseError(f"factorization object is missing {exc}") from None
    except ParseError:
        raise
    except MFError as exc:
        raise ParseError(str(exc)) from exc
