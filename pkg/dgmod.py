"""
Perfect DG-modules over O_Z (x) Lambda(V*), where xi_k sits in degree -1 and
d(xi_k) = rho_sharp(xi_k).

A module is a finite free graded O_Z-module stored on one basis: `degrees[i]` is
the cohomological degree of basis vector i, `d` the degree +1 differential and
`xi[k]` the degree -1 action of xi_k, all as square matrices over the base ring.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from freemod import PolyMatrix, base_change, format_matrix, matrix_from_dict, matrix_to_dict, parse_matrix
from polyring import (
    InvalidDGModuleError,
    MFError,
    ParseError,
    Poly,
    Ring,
    RingMap,
    RingMismatchError,
    ShapeMismatchError,
    divided_difference,
    format_poly,
    format_ring,
    parse_poly,
    parse_ring,
    product_ring,
    weight_degree,
)
from mf import ValidationReport, OK, split_sections

LOGGER = logging.getLogger(__name__)


def default_t_names(n: int) -> Tuple[str, ...]:
    return tuple(f"t{k + 1}" for k in range(n))


@dataclass(frozen=True)
class ExteriorData:
    """The O_Z part, the images rho_sharp(xi_k) and the names of the dual variables t_k."""
    base: Ring
    rho_sharp: Tuple[Poly, ...]
    t_names: Optional[Tuple[str, ...]] = None
    t_weights: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        rho = tuple(self.base.poly(p) for p in self.rho_sharp)
        object.__setattr__(self, "rho_sharp", rho)
        names = tuple(self.t_names) if self.t_names is not None else default_t_names(len(rho))
        if len(names) != len(rho):
            raise MFError("one t-variable per exterior generator")
        object.__setattr__(self, "t_names", names)
        weights = self.t_weights
        if weights is None and self.base.graded:
            weights = tuple(_dual_weight(p) for p in rho)
            if any(w is None for w in weights):
                weights = None
        if weights is not None:
            weights = tuple(int(w) for w in weights)
            if len(weights) != len(rho):
                raise MFError("one weight per t-variable")
        object.__setattr__(self, "t_weights", weights)

    @property
    def n(self) -> int:
        return len(self.rho_sharp)

    def extended_ring(self) -> Ring:
        """Base ring with the t-variables appended (Sym(V) absorbed into the ring)."""
        return product_ring(self.base, Ring(self.t_names, self.t_weights if self.base.graded else None))

    def potential(self) -> Poly:
        """h = sum_k rho_sharp(xi_k) * t_k over the extended ring."""
        ring = self.extended_ring()
        lift = RingMap.from_assignments(self.base, ring)
        h = ring.zero()
        for p, t in zip(self.rho_sharp, self.t_names):
            h = h + lift(p) * ring.var(t)
        return h


def _dual_weight(p: Poly) -> Optional[int]:
    """Weight making t * p homogeneous of weight 2; zero rho pairs with weight 2."""
    if p.is_zero():
        return 2
    w = weight_degree(p)
    return None if isinstance(w, str) else 2 - w


@dataclass(frozen=True)
class DGModule:
    ext: ExteriorData
    degrees: Tuple[int, ...]
    d: PolyMatrix
    xi: Tuple[PolyMatrix, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(k) for k in self.degrees))
        object.__setattr__(self, "xi", tuple(self.xi))
        n = len(self.degrees)
        if len(self.xi) != self.ext.n:
            raise ShapeMismatchError(f"{len(self.xi)} xi-actions for {self.ext.n} exterior generators")
        for mat in (self.d,) + self.xi:
            if mat.shape != (n, n):
                raise ShapeMismatchError(f"action of shape {mat.shape} on a module of rank {n}")
            if mat.ring != self.ext.base:
                raise RingMismatchError("DG-module action over a different ring")

    @property
    def rank(self) -> int:
        return len(self.degrees)

    @property
    def ranks(self) -> Dict[int, int]:
        return dict(sorted(Counter(self.degrees).items()))

    def __str__(self):
        return format_dg(self)


def _degree_violation(m: DGModule, mat: PolyMatrix, step: int, label: str) -> Optional[str]:
    for (r, c) in sorted(mat.entries):
        if m.degrees[r] != m.degrees[c] + step:
            return f"{label} entry ({r},{c}) maps degree {m.degrees[c]} to {m.degrees[r]}"
    return None


def _first_nonzero(mat: PolyMatrix, label: str) -> Optional[str]:
    if mat.is_zero():
        return None
    (r, c) = min(mat.entries)
    return f"{label} at ({r},{c}): {format_poly(mat.entries[(r, c)])} != 0"


def dg_validate(m: DGModule) -> ValidationReport:
    """d^2 = 0, xi_k xi_l + xi_l xi_k = 0, d xi_k + xi_k d = rho_sharp(xi_k), degrees respected."""
    msg = _degree_violation(m, m.d, 1, "d")
    for k, x in enumerate(m.xi):
        msg = msg or _degree_violation(m, x, -1, f"xi{k + 1}")
    msg = msg or _first_nonzero(m.d @ m.d, "d*d")
    for k in range(m.ext.n):
        for l in range(k, m.ext.n):
            if msg:
                break
            anti = m.xi[k] @ m.xi[l] + m.xi[l] @ m.xi[k]
            msg = _first_nonzero(anti, f"xi{k + 1}*xi{l + 1} + xi{l + 1}*xi{k + 1}")
    for k, x in enumerate(m.xi):
        if msg:
            break
        leibniz = m.d @ x + x @ m.d - PolyMatrix.scalar(m.ext.base, m.rank, m.ext.rho_sharp[k])
        msg = _first_nonzero(leibniz, f"Leibniz defect d*xi{k + 1} + xi{k + 1}*d - rho{k + 1}")
    if msg:
        LOGGER.debug("DG-module rejected: %s", msg)
        return ValidationReport(False, msg)
    return OK


def dg_checked(m: DGModule, context: str) -> DGModule:
    report = dg_validate(m)
    if not report.ok:
        raise InvalidDGModuleError(f"{context}: {report.message}")
    return m


# -- constructions ----------------------------------------------------------------

def dg_unit(base: Optional[Ring] = None) -> DGModule:
    """Rank one in degree 0, d = 0, no exterior generators."""
    ring = base if base is not None else Ring((), ())
    return DGModule(ExteriorData(ring, ()), (0,), PolyMatrix.zero(ring, 1, 1), ())


def _subsets_by_degree(r: int) -> List[Tuple[int, ...]]:
    """Subsets of range(r) ordered by cohomological degree -|S| ascending, then lexicographically."""
    out = [()]
    for i in range(r):
        out += [s + (i,) for s in out]
    return sorted(out, key=lambda s: (-len(s), s))


def koszul_resolution(ext: ExteriorData, sequence: Sequence, coefficients: Sequence[Sequence]) -> DGModule:
    """Koszul complex on `sequence` f_1..f_r with xi_k acting by sum_i coefficients[k][i] * (e_i wedge -).

    Requires sum_i coefficients[k][i] * f_i == rho_sharp(xi_k) for every k.
    """
    ring = ext.base
    f = [ring.poly(p) for p in sequence]
    coeffs = [[ring.poly(c) for c in row] for row in coefficients]
    if len(coeffs) != ext.n or any(len(row) != len(f) for row in coeffs):
        raise ShapeMismatchError("need an n x r coefficient table")
    for k, row in enumerate(coeffs):
        total = ring.zero()
        for c, fi in zip(row, f):
            total = total + c * fi
        if total != ext.rho_sharp[k]:
            raise InvalidDGModuleError(
                f"coefficients for xi{k + 1} give {format_poly(total)}, not {format_poly(ext.rho_sharp[k])}")
    subsets = _subsets_by_degree(len(f))
    pos = {s: i for i, s in enumerate(subsets)}
    n = len(subsets)
    d_entries: Dict[Tuple[int, int], Poly] = {}
    for s in subsets:
        for j, i in enumerate(s):
            rest = s[:j] + s[j + 1:]
            term = f[i] if j % 2 == 0 else -f[i]
            d_entries[(pos[rest], pos[s])] = term
    wedge = []
    for i in range(len(f)):
        entries = {}
        for s in subsets:
            if i in s:
                continue
            sign = -1 if sum(1 for j in s if j < i) % 2 else 1
            entries[(pos[tuple(sorted(s + (i,)))], pos[s])] = ring.const(sign)
        wedge.append(PolyMatrix(ring, n, n, entries))
    xi = []
    for row in coeffs:
        action = PolyMatrix.zero(ring, n, n)
        for c, e in zip(row, wedge):
            action = action + e.scale(c)
        xi.append(action)
    degrees = tuple(-len(s) for s in subsets)
    return dg_checked(DGModule(ext, degrees, PolyMatrix(ring, n, n, d_entries), tuple(xi)), "Koszul resolution")


def exterior_module(ext: ExteriorData) -> DGModule:
    """O_Z (x) Lambda(V*) itself: the Koszul complex of rho_sharp with xi acting by wedge."""
    identity = [[1 if i == k else 0 for i in range(ext.n)] for k in range(ext.n)]
    return koszul_resolution(ext, ext.rho_sharp, identity)


def telescoping_coefficients(p: Poly, pairs: Sequence[Tuple[str, str]]) -> List[Poly]:
    """c_i with p - p(y -> y') = sum_i c_i * (y_i - y'_i), by successive divided differences."""
    ring = p.ring
    current = p
    coeffs = []
    for y, yp in pairs:
        coeffs.append(divided_difference(current, y, ring.var(yp)))
        swap = RingMap.from_assignments(ring, ring, {y: ring.var(yp)})
        current = swap(current)
    return coeffs


def diagonal_module(ext: ExteriorData, pairs: Sequence[Tuple[str, str]], nu: Sequence[Poly]) -> DGModule:
    """Koszul resolution of the diagonal on y_i - y'_i, with xi_k extended through telescoping
    divided differences of nu_k so that Leibniz holds with rho_sharp(xi_k) = nu_k(y) - nu_k(y')."""
    ring = ext.base
    sequence = [ring.var(y) - ring.var(yp) for y, yp in pairs]
    coefficients = [telescoping_coefficients(ring.poly(v), pairs) for v in nu]
    return koszul_resolution(ext, sequence, coefficients)


def dg_direct_sum(m: DGModule, n: DGModule) -> DGModule:
    if m.ext != n.ext:
        raise RingMismatchError("direct sum of DG-modules over different algebras")
    ring = m.ext.base

    def both(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
        return PolyMatrix.block(ring, [[a, None], [None, b]], [m.rank, n.rank], [m.rank, n.rank])

    return DGModule(m.ext, m.degrees + n.degrees, both(m.d, n.d),
                    tuple(both(a, b) for a, b in zip(m.xi, n.xi)))


def dg_shift(m: DGModule) -> DGModule:
    """M[1]: degrees lowered by one, d and every xi negated."""
    return DGModule(m.ext, tuple(k - 1 for k in m.degrees), -m.d, tuple(-x for x in m.xi))


def dg_base_change(m: DGModule, phi: RingMap, t_names: Optional[Sequence[str]] = None) -> DGModule:
    """Substitute along a map of the O-part; rho_sharp is carried along phi."""
    if phi.source != m.ext.base:
        raise RingMismatchError("base change along a map from another ring")
    rho = tuple(phi(p) for p in m.ext.rho_sharp)
    weights = m.ext.t_weights if phi.target.graded else None
    ext = ExteriorData(phi.target, rho, tuple(t_names) if t_names is not None else m.ext.t_names, weights)
    return dg_checked(DGModule(ext, m.degrees, base_change(m.d, phi), tuple(base_change(x, phi) for x in m.xi)),
                      "base change")


def dg_rename(m: DGModule, mapping: Dict[str, str]) -> DGModule:
    """Rename base and t-variables."""
    target = m.ext.base.rename(mapping)
    phi = RingMap.from_assignments(m.ext.base, target, {v: target.var(mapping.get(v, v))
                                                        for v in m.ext.base.variables})
    return dg_base_change(m, phi, [mapping.get(t, t) for t in m.ext.t_names])


def _tensor_pairs(m: DGModule, n: DGModule) -> List[Tuple[int, int]]:
    return [(a, b) for a in range(m.rank) for b in range(n.rank)]


def _lift_left(mat: PolyMatrix, m: DGModule, n: DGModule, ring: Ring, lift: RingMap) -> PolyMatrix:
    """mat (x) id in the row-major pair basis."""
    entries = {}
    for (r, c), p in mat.entries.items():
        q = lift(p)
        for b in range(n.rank):
            entries[(r * n.rank + b, c * n.rank + b)] = q
    return PolyMatrix(ring, m.rank * n.rank, m.rank * n.rank, entries)


def _lift_right(mat: PolyMatrix, m: DGModule, n: DGModule, ring: Ring, lift: RingMap) -> PolyMatrix:
    """(-1)^|a| id (x) mat in the row-major pair basis."""
    entries = {}
    for (r, c), p in mat.entries.items():
        q = lift(p)
        for a in range(m.rank):
            entries[(a * n.rank + r, a * n.rank + c)] = -q if m.degrees[a] % 2 else q
    return PolyMatrix(ring, m.rank * n.rank, m.rank * n.rank, entries)


def dg_box(m: DGModule, n: DGModule) -> DGModule:
    """M (x) N over Z1 x Z2 and V1 + V2, on the row-major pair basis.

    d(a(x)b) = da(x)b + (-1)^|a| a(x)db; xi from V1 acts on a, xi from V2 with sign (-1)^|a|.
    """
    overlap = set(m.ext.t_names) & set(n.ext.t_names)
    if overlap:
        raise RingMismatchError(f"box product needs distinct t-variables, shared: {sorted(overlap)}")
    ring = product_ring(m.ext.base, n.ext.base)
    left = RingMap.from_assignments(m.ext.base, ring)
    right = RingMap.from_assignments(n.ext.base, ring)
    t_weights = None
    if m.ext.t_weights is not None and n.ext.t_weights is not None:
        t_weights = m.ext.t_weights + n.ext.t_weights
    ext = ExteriorData(ring, tuple(left(p) for p in m.ext.rho_sharp) + tuple(right(p) for p in n.ext.rho_sharp),
                       m.ext.t_names + n.ext.t_names, t_weights)
    d = _lift_left(m.d, m, n, ring, left) + _lift_right(n.d, m, n, ring, right)
    xi = tuple(_lift_left(x, m, n, ring, left) for x in m.xi) + tuple(_lift_right(x, m, n, ring, right) for x in n.xi)
    degrees = tuple(m.degrees[a] + n.degrees[b] for a, b in _tensor_pairs(m, n))
    return dg_checked(DGModule(ext, degrees, d, xi), "box product")


def dg_tensor(m: DGModule, n: DGModule) -> DGModule:
    """M (x) N over a common O-part and a common V, xi acting through the coproduct
    xi -> xi (x) 1 + 1 (x) xi; rho_sharp adds up."""
    if m.ext.base != n.ext.base or m.ext.t_names != n.ext.t_names:
        raise RingMismatchError("tensor over the base needs the same ring and the same V")
    ring = m.ext.base
    ident = RingMap.identity(ring)
    rho = tuple(a + b for a, b in zip(m.ext.rho_sharp, n.ext.rho_sharp))
    ext = ExteriorData(ring, rho, m.ext.t_names, m.ext.t_weights)
    d = _lift_left(m.d, m, n, ring, ident) + _lift_right(n.d, m, n, ring, ident)
    xi = tuple(_lift_left(a, m, n, ring, ident) + _lift_right(b, m, n, ring, ident) for a, b in zip(m.xi, n.xi))
    degrees = tuple(m.degrees[a] + n.degrees[b] for a, b in _tensor_pairs(m, n))
    return dg_checked(DGModule(ext, degrees, d, xi), "tensor product")


def dg_extend_exterior(m: DGModule, t_names: Sequence[str], t_weights: Optional[Sequence[int]] = None) -> DGModule:
    """View m over V + W with W acting by zero (rho_sharp of W is zero)."""
    weights = None
    if m.ext.t_weights is not None and t_weights is not None:
        weights = m.ext.t_weights + tuple(t_weights)
    ring = m.ext.base
    ext = ExteriorData(ring, m.ext.rho_sharp + tuple(ring.zero() for _ in t_names), m.ext.t_names + tuple(t_names),
                       weights)
    zeros = tuple(PolyMatrix.zero(ring, m.rank, m.rank) for _ in t_names)
    return dg_checked(DGModule(ext, m.degrees, m.d, m.xi + zeros), "exterior extension")


@dataclass(frozen=True)
class DGMorphism:
    """Degree-preserving map (degree 0) or homotopy (degree -1) between DG-modules."""
    source: DGModule
    target: DGModule
    matrix: PolyMatrix
    degree: int = 0

    def __post_init__(self):
        if self.matrix.shape != (self.target.rank, self.source.rank):
            raise ShapeMismatchError("DG morphism matrix has the wrong shape")
        for (r, c) in self.matrix.entries:
            if self.target.degrees[r] != self.source.degrees[c] + self.degree:
                raise ShapeMismatchError(f"entry ({r},{c}) does not have degree {self.degree}")

    def is_closed(self) -> bool:
        """Commutes with d and (graded-)commutes with every xi."""
        sign = -1 if self.degree % 2 else 1
        F = self.matrix
        if (self.target.d @ F - (F @ self.source.d).scale(sign)).entries:
            return False
        return all(not (xt @ F - (F @ xs).scale(sign)).entries for xt, xs in zip(self.target.xi, self.source.xi))

    def compose(self, other: "DGMorphism") -> "DGMorphism":
        return DGMorphism(other.source, self.target, self.matrix @ other.matrix, self.degree + other.degree)


# -- text and JSON formats ------------------------------------------------------------

def format_dg(m: DGModule) -> str:
    ext = m.ext
    t_ring = Ring(ext.t_names, ext.t_weights)
    lines = [f"base: {format_ring(ext.base)}", f"t: {format_ring(t_ring)}", "rho_sharp:"]
    lines += [format_poly(p) for p in ext.rho_sharp]
    lines.append("degrees: " + " ".join(str(k) for k in m.degrees))
    lines.append("d:")
    lines.append(format_matrix(m.d).rstrip("\n"))
    for k, x in enumerate(m.xi):
        lines.append(f"xi{k + 1}:")
        lines.append(format_matrix(x).rstrip("\n"))
    return "\n".join(lines) + "\n"


def parse_dg(text: str) -> DGModule:
    sections = split_sections(text)
    try:
        base = parse_ring(" ".join(sections.get("base", [])))
        t_ring = parse_ring(" ".join(sections.get("t", [])))
        rho = tuple(parse_poly(line, base) for line in sections.get("rho_sharp", []))
        degrees = tuple(int(x) for x in " ".join(sections["degrees"]).split())
        d = parse_matrix(sections["d"], base)
        xi = tuple(parse_matrix(sections[f"xi{k + 1}"], base) for k in range(len(rho)))
    except KeyError as exc:
        raise ParseError(f"DG-module file is missing section {exc}") from None
    except ValueError as exc:
        raise ParseError(f"bad degree list: {exc}") from None
    try:
        ext = ExteriorData(base, rho, t_ring.variables, t_ring.weights)
        return DGModule(ext, degrees, d, xi)
    except ParseError:
        raise
    except MFError as exc:
        raise ParseError(str(exc)) from exc


def dg_to_dict(m: DGModule) -> Dict:
    return {
        "type": "dg",
        "base": format_ring(m.ext.base),
        "t": format_ring(Ring(m.ext.t_names, m.ext.t_weights)),
        "rho_sharp": [format_poly(p) for p in m.ext.rho_sharp],
        "degrees": list(m.degrees),
        "d": matrix_to_dict(m.d),
        "xi": [matrix_to_dict(x) for x in m.xi],
    }


def dg_from_dict(data: Dict) -> DGModule:
    try:
        base = parse_ring(data["base"])
        t_ring = parse_ring(data.get("t", ""))
        ext = ExteriorData(base, tuple(parse_poly(p, base) for p in data["rho_sharp"]), t_ring.variables,
                           t_ring.weights)
        return DGModule(ext, data["degrees"], matrix_from_dict(data["d"], base),
                        tuple(matrix_from_dict(x, base) for x in data["xi"]))
    except KeyError as exc:
        raise ParseError(f"DG-module object is missing {exc}") from None
    except ParseError:
        raise
    except MFError as exc:
        raise ParseError(str(exc)) from exc
