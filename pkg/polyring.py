"""
Exact sparse multivariate polynomials over the rationals.

Rings carry an ordered variable list and optional integer weights. Arithmetic is
done by sympy's sparse `PolyElement` over QQ; the ring's weights, the canonical
graded-lex text and the error hierarchy live here.
"""
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from tokenize import TokenError
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy import QQ, Integer, Symbol
from sympy.core.sympify import SympifyError
from sympy.parsing.sympy_parser import auto_number, convert_xor, parse_expr
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

INHOMOGENEOUS = "inhomogeneous"

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class MFError(Exception):
    """Base class for every error raised by the calculus."""


class RingMismatchError(MFError):
    pass


class ParseError(MFError):
    pass


class ShapeMismatchError(MFError):
    pass


class NotFiniteError(MFError):
    pass


class PotentialMismatchError(MFError):
    pass


class NotClosedError(MFError):
    pass


class InvalidDGModuleError(MFError):
    pass


class SupportConditionError(MFError):
    pass


class IneligibleEliminationError(MFError):
    pass


class CertificateError(MFError):
    pass


class ScenarioError(MFError):
    pass


Coefficient = Union[int, Fraction]


@dataclass(frozen=True)
class Ring:
    """Polynomial ring Q[v1, ..., vk] with optional integer weights."""
    variables: Tuple[str, ...] = ()
    weights: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
            if len(self.weights) != len(self.variables):
                raise MFError("every variable of a graded ring needs a weight")
        seen = set()
        for name in self.variables:
            if not isinstance(name, str) or not _NAME_RE.match(name):
                raise MFError(f"invalid variable name {name!r}")
            if name in seen:
                raise MFError(f"duplicate variable {name!r}")
            seen.add(name)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def graded(self) -> bool:
        return self.weights is not None

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise RingMismatchError(f"variable {name!r} not in ring {self}") from None

    def weight(self, name: str) -> int:
        if self.weights is None:
            raise MFError("ring is not graded")
        return self.weights[self.index(name)]

    def monomial_weight(self, exps: Tuple[int, ...]) -> int:
        return sum(e * w for e, w in zip(exps, self.weights))

    def extend(self, names: Sequence[str], weights: Optional[Sequence[int]] = None) -> "Ring":
        """Append variables; the result is graded only if both parts are."""
        if self.graded and weights is not None:
            new_weights = self.weights + tuple(weights)
        else:
            new_weights = None
        return Ring(self.variables + tuple(names), new_weights)

    def without(self, names: Iterable[str]) -> "Ring":
        drop = set(names)
        keep = [i for i, v in enumerate(self.variables) if v not in drop]
        weights = None if self.weights is None else tuple(self.weights[i] for i in keep)
        return Ring(tuple(self.variables[i] for i in keep), weights)

    def rename(self, mapping: Dict[str, str]) -> "Ring":
        return Ring(tuple(mapping.get(v, v) for v in self.variables), self.weights)

    def ungraded(self) -> "Ring":
        return Ring(self.variables, None)

    def sympy_ring(self) -> PolyRing:
        return sympy_ring(self.variables)

    def zero(self) -> "Poly":
        return Poly(self, {})

    def one(self) -> "Poly":
        return self.const(1)

    def const(self, c: Coefficient) -> "Poly":
        return Poly(self, {(0,) * self.nvars: Fraction(c)})

    def var(self, name: str) -> "Poly":
        exps = [0] * self.nvars
        exps[self.index(name)] = 1
        return Poly(self, {tuple(exps): Fraction(1)})

    def gens(self) -> List["Poly"]:
        return [self.var(v) for v in self.variables]

    def poly(self, text: Union[str, int, Fraction, "Poly"]) -> "Poly":
        """Coerce text, a number or a polynomial into this ring."""
        if isinstance(text, Poly):
            if text.ring != self:
                raise RingMismatchError("polynomial belongs to another ring")
            return text
        if isinstance(text, (int, Fraction)):
            return self.const(text)
        return parse_poly(text, self)

    def __str__(self):
        return format_ring(self)


@lru_cache(maxsize=None)
def sympy_ring(variables: Tuple[str, ...]) -> PolyRing:
    """The sympy ring QQ[variables] in graded-lex order; shared by all rings on these names."""
    return PolyRing(tuple(Symbol(v) for v in variables), QQ, grlex)


def _qq(c: Coefficient):
    c = Fraction(c)
    return QQ(c.numerator, c.denominator)


def _fraction(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


class Poly:
    """Immutable polynomial over a `Ring`, backed by a sympy PolyElement."""

    __slots__ = ("ring", "element", "_terms")

    def __init__(self, ring: Ring, terms: Dict[Tuple[int, ...], Coefficient]):
        n = ring.nvars
        coeffs = {}
        for exps, c in terms.items():
            exps = tuple(exps)
            if len(exps) != n or any(e < 0 for e in exps):
                raise MFError(f"exponent vector {exps} does not fit ring {ring}")
            coeffs[exps] = _qq(c)
        self.ring = ring
        self.element = ring.sympy_ring().from_dict(coeffs)
        self._terms = None

    @classmethod
    def _wrap(cls, ring: Ring, element: PolyElement) -> "Poly":
        obj = cls.__new__(cls)
        obj.ring = ring
        obj.element = element
        obj._terms = None
        return obj

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> Dict[Tuple[int, ...], Fraction]:
        """Exponent tuple -> nonzero Fraction; read only."""
        if self._terms is None:
            self._terms = {m: _fraction(c) for m, c in self.element.items()}
        return self._terms

    def is_zero(self) -> bool:
        return not self.element

    def __bool__(self):
        return bool(self.element)

    def is_constant(self) -> bool:
        return self.element.is_ground

    def constant_term(self) -> Fraction:
        return _fraction(self.element.get(self.element.ring.zero_monom, QQ.zero))

    def degree(self) -> int:
        """Total (unweighted) degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.element.itermonoms()), default=-1)

    def degree_in(self, name: str) -> int:
        i = self.ring.index(name)
        return max((e[i] for e in self.element.itermonoms()), default=-1)

    def involves(self, name: str) -> bool:
        return self.degree_in(name) > 0

    def variables_used(self) -> List[str]:
        return [v for v in self.ring.variables if self.involves(v)]

    def sorted_terms(self) -> List[Tuple[Tuple[int, ...], Fraction]]:
        """Terms in canonical graded-lex order, leading term first."""
        return [(m, _fraction(c)) for m, c in self.element.terms(grlex)]

    def coefficients_in(self, name: str) -> Dict[int, "Poly"]:
        """Split p = sum_k c_k * name^k with c_k free of `name`."""
        i = self.ring.index(name)
        parts: Dict[int, Dict[Tuple[int, ...], object]] = {}
        for exps, c in self.element.items():
            stripped = exps[:i] + (0,) + exps[i + 1:]
            parts.setdefault(exps[i], {})[stripped] = c
        base = self.element.ring
        return {k: Poly._wrap(self.ring, base.from_dict(t)) for k, t in parts.items()}

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.ring is not self.ring and other.ring != self.ring:
                raise RingMismatchError(f"ring mismatch: {self.ring} vs {other.ring}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Poly._wrap(self.ring, self.element + other.element)

    __radd__ = __add__

    def __neg__(self):
        return Poly._wrap(self.ring, -self.element)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Poly._wrap(self.ring, self.element - other.element)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Poly._wrap(self.ring, other.element - self.element)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Poly._wrap(self.ring, self.element * other.element)

    __rmul__ = __mul__

    def scale(self, c: Coefficient) -> "Poly":
        return Poly._wrap(self.ring, self.element.mul_ground(_qq(c)))

    def __pow__(self, k: int):
        if k < 0:
            raise MFError("negative powers are not polynomials")
        if k == 0:
            return self.ring.one()
        return Poly._wrap(self.ring, self.element ** int(k))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.ring == other.ring and self.element == other.element

    def __hash__(self):
        return hash((self.ring, self.element))

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"


def poly_arith(a: Poly, b: Poly, op: str) -> Poly:
    """Add or multiply two polynomials over the same ring."""
    if a.ring != b.ring:
        raise RingMismatchError(f"ring mismatch: {a.ring} vs {b.ring}")
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise MFError(f"unknown polynomial operation {op!r}")


def weight_degree(p: Poly) -> Union[int, str]:
    """Weight of a homogeneous polynomial, or INHOMOGENEOUS. Zero counts as weight 0."""
    if not p.ring.graded:
        raise MFError("weight_degree needs a graded ring")
    degrees = {p.ring.monomial_weight(e) for e in p.terms}
    if not degrees:
        return 0
    if len(degrees) > 1:
        return INHOMOGENEOUS
    return degrees.pop()


def is_homogeneous(p: Poly, weight: int) -> bool:
    """True if p is zero or homogeneous of the given weight."""
    return all(p.ring.monomial_weight(e) == weight for e in p.terms)


def divided_difference(p: Poly, name: str, g: Poly) -> Poly:
    """Exact quotient (p - p|name->g) / (name - g), for g free of `name`."""
    if g.involves(name):
        raise MFError(f"divided difference needs g free of {name}")
    ring = p.ring
    u = ring.var(name)
    result = ring.zero()
    g_powers = [ring.one()]
    for k, coeff in sorted(p.coefficients_in(name).items()):
        if k == 0:
            continue
        while len(g_powers) < k:
            g_powers.append(g_powers[-1] * g)
        # (u^k - g^k)/(u - g) = sum_{a+b=k-1} u^a g^b
        block = ring.zero()
        for a in range(k):
            block = block + (u ** a) * g_powers[k - 1 - a]
        result = result + coeff * block
    return result


def linear_shape(p: Poly, name: str) -> Optional[Tuple[Fraction, Poly]]:
    """Return (c, g) when p == c*(name - g) with c rational and g free of name."""
    if p.degree_in(name) != 1:
        return None
    parts = p.coefficients_in(name)
    lead = parts.get(1)
    if lead is None or not lead.is_constant():
        return None
    c = lead.constant_term()
    rest = parts.get(0, p.ring.zero())
    return c, (-rest).scale(1 / c)


def product_ring(a: Ring, b: Ring) -> Ring:
    """Ring on the variables of a followed by those of b (which must be disjoint).

    Graded when both factors are; a factor without variables counts as graded.
    """
    overlap = set(a.variables) & set(b.variables)
    if overlap:
        raise RingMismatchError(f"rings share variables {sorted(overlap)}")
    a_w = a.weights if a.graded or a.nvars else ()
    b_w = b.weights if b.graded or b.nvars else ()
    weights = None if a_w is None or b_w is None else a_w + b_w
    if weights == () and not (a.graded or b.graded):
        weights = None
    return Ring(a.variables + b.variables, weights)


# -- ring maps --------------------------------------------------------------

@dataclass(frozen=True)
class RingMap:
    """Substitution homomorphism: source variable i goes to images[i] in target."""
    source: Ring
    target: Ring
    images: Tuple[Poly, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if len(self.images) != self.source.nvars:
            raise MFError("a ring map needs one image per source variable")
        for img in self.images:
            if img.ring != self.target:
                raise RingMismatchError("ring map image lives outside the target ring")

    @classmethod
    def identity(cls, ring: Ring) -> "RingMap":
        return cls(ring, ring, tuple(ring.gens()))

    @classmethod
    def from_assignments(cls, source: Ring, target: Ring, mapping: Dict[str, Union[str, Poly, int]] = None) -> "RingMap":
        """Unlisted source variables map to the target variable of the same name."""
        mapping = mapping or {}
        unknown = set(mapping) - set(source.variables)
        if unknown:
            raise RingMismatchError(f"assignments for unknown variables {sorted(unknown)}")
        images = []
        for v in source.variables:
            if v in mapping:
                images.append(target.poly(mapping[v]))
            elif v in target.variables:
                images.append(target.var(v))
            else:
                raise RingMismatchError(f"no image for {v!r} and no same-named target variable")
        return cls(source, target, tuple(images))

    def __call__(self, p: Poly) -> Poly:
        return substitute(p, self)

    def after(self, other: "RingMap") -> "RingMap":
        """Composite self o other (apply `other` first)."""
        if other.target != self.source:
            raise RingMismatchError("ring maps are not composable")
        return RingMap(other.source, self.target, tuple(self(img) for img in other.images))

    def is_graded(self) -> bool:
        """Each image homogeneous of its source variable's weight."""
        if not (self.source.graded and self.target.graded):
            return False
        return all(is_homogeneous(img, w) for img, w in zip(self.images, self.source.weights))

    def __str__(self):
        return format_ring_map(self)


def substitute(p: Poly, m: RingMap) -> Poly:
    """Image of p under the substitution m."""
    if p.ring != m.source:
        raise RingMismatchError(f"polynomial over {p.ring} cannot be substituted by a map from {m.source}")
    target = m.target.sympy_ring()
    powers: List[List[PolyElement]] = [[target.one] for _ in m.images]
    result = target.zero
    for exps, c in p.element.items():
        term = target.ground_new(c)
        for i, e in enumerate(exps):
            if e:
                cache = powers[i]
                while len(cache) <= e:
                    cache.append(cache[-1] * m.images[i].element)
                term = term * cache[e]
        result = result + term
    return Poly._wrap(m.target, result)


# -- text format --------------------------------------------------------------

def format_rational(c: Fraction) -> str:
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _format_monomial(ring: Ring, exps: Tuple[int, ...]) -> str:
    parts = []
    for name, e in zip(ring.variables, exps):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_poly(p: Poly) -> str:
    """Canonical text: signed sum of c*v1^e1*... terms in graded-lex order."""
    if p.is_zero():
        return "0"
    out = []
    for k, (exps, c) in enumerate(p.sorted_terms()):
        mono = _format_monomial(p.ring, exps)
        mag = abs(c)
        if not mono:
            body = format_rational(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{format_rational(mag)}*{mono}"
        if k == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


def format_ring(ring: Ring) -> str:
    if ring.weights is None:
        return " ".join(ring.variables)
    return " ".join(f"{v}:{w}" for v, w in zip(ring.variables, ring.weights))


def parse_ring(text: str) -> Ring:
    """Parse `x:1 y:1` (or `x, y`); weights must be given for all variables or none."""
    tokens = [t for t in re.split(r"[\s,]+", text.strip()) if t]
    names, weights = [], []
    for tok in tokens:
        if ":" in tok:
            name, w = tok.split(":", 1)
            try:
                weights.append(int(w))
            except ValueError:
                raise ParseError(f"bad weight in {tok!r}") from None
        else:
            name = tok
        names.append(name)
    if weights and len(weights) != len(names):
        raise ParseError("either every variable or no variable carries a weight")
    try:
        return Ring(tuple(names), tuple(weights) if weights else None)
    except MFError as exc:
        raise ParseError(str(exc)) from exc


_ALLOWED_RE = re.compile(r"^[A-Za-z0-9_+\-*/^()\s]*$")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TRANSFORMATIONS = (auto_number, convert_xor)
_PARSE_ERRORS = (SyntaxError, TokenError, TypeError, ValueError, AttributeError, ZeroDivisionError, SympifyError)


def parse_poly(text: str, ring: Ring) -> Poly:
    """Parse sums of products with rational coefficients, powers and parentheses.

    Ring variables are swapped for placeholders before sympy sees the text, so
    nothing but the ring's own symbols and integer literals can be evaluated.
    """
    text = text.strip()
    if not text:
        raise ParseError("empty polynomial")
    if not _ALLOWED_RE.match(text):
        bad = next(ch for ch in text if not _ALLOWED_RE.match(ch))
        raise ParseError(f"unexpected character {bad!r} in {text!r}")
    for name in _IDENT_RE.findall(text):
        if name not in ring.variables:
            raise ParseError(f"unknown variable {name!r} for ring {ring}")
    base = ring.sympy_ring()
    local = {f"_v{i}": sym for i, sym in enumerate(base.symbols)}
    coded = _IDENT_RE.sub(lambda m: f"_v{ring.index(m.group())}", text)
    try:
        expr = parse_expr(coded, local_dict=local, global_dict={"Integer": Integer},
                          transformations=_TRANSFORMATIONS)
        element = base.from_expr(expr)
    except _PARSE_ERRORS as exc:
        raise ParseError(f"cannot read polynomial {text!r}: {exc}") from None
    return Poly._wrap(ring, element)


def format_ring_map(m: RingMap) -> str:
    lines = [f"source: {format_ring(m.source)}", f"target: {format_ring(m.target)}"]
    for name, img in zip(m.source.variables, m.images):
        lines.append(f"{name} = {format_poly(img)}")
    return "\n".join(lines) + "\n"


def parse_ring_map(text: str) -> RingMap:
    source = target = None
    mapping: Dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("source:"):
            source = parse_ring(line[len("source:"):])
        elif line.startswith("target:"):
            target = parse_ring(line[len("target:"):])
        elif "=" in line:
            name, img = line.split("=", 1)
            mapping[name.strip()] = img.strip()
        else:
            raise ParseError(f"cannot read ring map line {raw!r}")
    if source is None or target is None:
        raise ParseError("ring map needs source: and target: lines")
    try:
        return RingMap.from_assignments(source, target, mapping)
    except ParseError:
        raise
    except MFError as exc:
        raise ParseError(str(exc)) from exc


def ring_map_to_dict(m: RingMap) -> Dict:
    return {
        "type": "map",
        "source": format_ring(m.source),
        "target": format_ring(m.target),
        "images": {name: format_poly(img) for name, img in zip(m.source.variables, m.images)},
    }


def ring_map_from_dict(data: Dict) -> RingMap:
    try:
        source, target = parse_ring(data["source"]), parse_ring(data["target"])
        return RingMap.from_assignments(source, target, dict(data.get("images", {})))
    except KeyError as exc:
        raise ParseError(f"ring map object is missing {exc}") from None
    except ParseError:
        raise
    except MFError as exc:
        raise ParseError(str(exc)) from exc
