"""
Affine toy geometries: Y and X affine spaces, V = k^n, polynomial maps nu: Y -> V and
mu: X -> V*. Builds the potentials w and h, the unit kernel, sample kernels and modules,
and the seeded random corpora used by the acceptance checks.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from dgmod import DGModule, ExteriorData, default_t_names, dg_direct_sum, dg_shift, diagonal_module, \
    exterior_module, koszul_resolution
from freemod import PolyMatrix, monomials_up_to
from koszul import kappa
from mf import (
    EVEN,
    MatrixFactorization,
    MFMorphism,
    checked,
    from_total,
    mf_koszul_pair,
    mf_tensor,
    split_sections,
)
from polyring import (
    MFError,
    ParseError,
    Poly,
    Ring,
    RingMap,
    ScenarioError,
    format_poly,
    format_ring,
    is_homogeneous,
    parse_poly,
    parse_ring,
    product_ring,
)

LOGGER = logging.getLogger(__name__)


def copy_name(var: str, index: int) -> str:
    """Name of `var` on the index-th copy of Y."""
    return f"{var}_{index}"


@dataclass(frozen=True)
class Scenario:
    """Y, X with optional weights, and the component polynomials of nu (over Y) and mu (over X)."""
    y_ring: Ring
    x_ring: Ring
    nu: Tuple[Poly, ...]
    mu: Tuple[Poly, ...]
    name: str = "scenario"

    def __post_init__(self):
        object.__setattr__(self, "nu", tuple(self.y_ring.poly(p) for p in self.nu))
        object.__setattr__(self, "mu", tuple(self.x_ring.poly(p) for p in self.mu))
        if len(self.nu) != len(self.mu):
            raise ScenarioError(f"nu has {len(self.nu)} components but mu has {len(self.mu)}")
        if set(self.y_ring.variables) & set(self.x_ring.variables):
            raise ScenarioError("Y and X must use distinct variable names")

    @property
    def n(self) -> int:
        return len(self.nu)

    @property
    def graded(self) -> bool:
        return self.y_ring.graded and self.x_ring.graded

    @property
    def t_names(self) -> Tuple[str, ...]:
        return default_t_names(self.n)

    # -- rings ---------------------------------------------------------------
    def module_ring(self) -> Ring:
        """O(Y x X)."""
        return product_ring(self.y_ring, self.x_ring)

    def y_copy(self, index: int) -> Ring:
        return self.y_ring.rename({v: copy_name(v, index) for v in self.y_ring.variables})

    def y_copies(self, indices: Sequence[int]) -> Ring:
        ring = Ring((), () if self.y_ring.graded else None)
        for i in indices:
            ring = product_ring(ring, self.y_copy(i))
        return ring

    def copy_map(self, index: int, target: Ring) -> Dict[str, Poly]:
        """nu-argument substitution y -> y_index into `target`."""
        return {v: target.var(copy_name(v, index)) for v in self.y_ring.variables}

    def nu_on(self, index: int, target: Ring) -> Tuple[Poly, ...]:
        phi = RingMap.from_assignments(self.y_ring, target, self.copy_map(index, target))
        return tuple(phi(p) for p in self.nu)

    def kernel_ext(self) -> ExteriorData:
        """Lambda(V*) over O(Y x Y) with rho_sharp(xi_k) = nu_k(y_1) - nu_k(y_2)."""
        base = self.y_copies((1, 2))
        rho = tuple(a - b for a, b in zip(self.nu_on(1, base), self.nu_on(2, base)))
        return ExteriorData(base, rho, self.t_names)

    def kernel_ring(self) -> Ring:
        """O(Y x Y x V*)."""
        return self.kernel_ext().extended_ring()

    def t_ring(self) -> Ring:
        ext = self.kernel_ext()
        return Ring(ext.t_names, ext.t_weights if self.y_ring.graded else None)

    def act_ring(self) -> Ring:
        """O(Y x Y x X), where kernels act on modules."""
        return product_ring(self.y_copies((1, 2)), self.x_ring)

    def composition_ring(self) -> Ring:
        """O(Y x Y x Y x V*), where kernels compose."""
        return product_ring(self.y_copies((1, 2, 3)), self.t_ring())

    # -- potentials ------------------------------------------------------------
    def w(self) -> Poly:
        """w(y, x) = sum_k mu_k(x) * nu_k(y)."""
        ring = self.module_ring()
        from_y = RingMap.from_assignments(self.y_ring, ring)
        from_x = RingMap.from_assignments(self.x_ring, ring)
        total = ring.zero()
        for a, b in zip(self.mu, self.nu):
            total = total + from_x(a) * from_y(b)
        return total

    def h(self) -> Poly:
        """h(y_1, y_2, t) = sum_k t_k * (nu_k(y_1) - nu_k(y_2))."""
        return self.kernel_ext().potential()

    def rho_sharp(self) -> Tuple[Poly, ...]:
        return self.kernel_ext().rho_sharp

    # -- the maps of the convolution diagrams -------------------------------------
    def p_map(self) -> RingMap:
        """Id x Id x mu: kernel ring -> act ring, t_k -> mu_k(x)."""
        target = self.act_ring()
        from_x = RingMap.from_assignments(self.x_ring, target)
        images = {t: from_x(m) for t, m in zip(self.t_names, self.mu)}
        return RingMap.from_assignments(self.kernel_ring(), target, images)

    def module_projection(self, index: int) -> RingMap:
        """Module ring -> act ring, y -> y_index."""
        target = self.act_ring()
        return RingMap.from_assignments(self.module_ring(), target, self.copy_map(index, target))

    def kernel_projection(self, first: int, second: int) -> RingMap:
        """Kernel ring -> composition ring, (y_1, y_2) -> (y_first, y_second)."""
        source, target = self.kernel_ring(), self.composition_ring()
        images = {}
        for v in self.y_ring.variables:
            images[copy_name(v, 1)] = target.var(copy_name(v, first))
            images[copy_name(v, 2)] = target.var(copy_name(v, second))
        return RingMap.from_assignments(source, target, images)

    def middle_variables(self) -> List[str]:
        return [copy_name(v, 2) for v in self.y_ring.variables]


# -- validation and loading ----------------------------------------------------------------

def scenario_check(s: Scenario):
    """Raise ScenarioError unless the potentials are weight-2 homogeneous (graded case)."""
    if not s.graded:
        return
    for k, p in enumerate(s.nu):
        if not p.is_zero() and not is_homogeneous(p, _weight_of(p)):
            raise ScenarioError(f"nu component {k + 1} = {format_poly(p)} is not homogeneous")
    if not s.kernel_ring().graded:
        raise ScenarioError("cannot grade the t-variables: some nu component is inhomogeneous")
    if not is_homogeneous(s.w(), 2):
        raise ScenarioError(f"w = {format_poly(s.w())} is not homogeneous of weight 2")
    if not is_homogeneous(s.h(), 2):
        raise ScenarioError(f"h = {format_poly(s.h())} is not homogeneous of weight 2")


def _weight_of(p: Poly) -> int:
    e = next(iter(p.terms))
    return p.ring.monomial_weight(e)


def make_scenario(y_ring: Ring, x_ring: Ring, nu: Sequence, mu: Sequence, name: str = "scenario") -> Scenario:
    """Build, check homogeneity and verify both potential identities."""
    from convolution import potential_identities

    try:
        s = Scenario(y_ring, x_ring, tuple(nu), tuple(mu), name)
    except ScenarioError:
        raise
    except MFError as exc:
        raise ScenarioError(str(exc)) from exc
    scenario_check(s)
    potential_identities(s)
    LOGGER.debug("scenario %s: w = %s, h = %s", name, format_poly(s.w()), format_poly(s.h()))
    return s


def load_scenario(text: str) -> Scenario:
    """Read `name:`, `y:`, `x:`, `nu:` and `mu:` sections (one component per line or one line)."""
    sections = split_sections(text)
    try:
        y_ring = parse_ring(" ".join(sections["y"]))
        x_ring = parse_ring(" ".join(sections.get("x", [])))
        nu = [parse_poly(line, y_ring) for line in sections.get("nu", [])]
        mu = [parse_poly(line, x_ring) for line in sections.get("mu", [])]
    except KeyError as exc:
        raise ParseError(f"scenario is missing section {exc}") from None
    name = sections.get("name", ["scenario"])[0]
    return make_scenario(y_ring, x_ring, nu, mu, name)


def format_scenario(s: Scenario) -> str:
    lines = [f"name: {s.name}", f"y: {format_ring(s.y_ring)}", f"x: {format_ring(s.x_ring)}", "nu:"]
    lines += [format_poly(p) for p in s.nu]
    lines.append("mu:")
    lines += [format_poly(p) for p in s.mu]
    return "\n".join(lines) + "\n"


def scenario_to_dict(s: Scenario) -> Dict:
    return {
        "type": "scenario",
        "name": s.name,
        "y": format_ring(s.y_ring),
        "x": format_ring(s.x_ring),
        "nu": [format_poly(p) for p in s.nu],
        "mu": [format_poly(p) for p in s.mu],
    }


def scenario_from_dict(data: Dict) -> Scenario:
    try:
        y_ring, x_ring = parse_ring(data["y"]), parse_ring(data.get("x", ""))
        return make_scenario(y_ring, x_ring, [parse_poly(p, y_ring) for p in data["nu"]],
                             [parse_poly(p, x_ring) for p in data["mu"]], data.get("name", "scenario"))
    except KeyError as exc:
        raise ParseError(f"scenario object is missing {exc}") from None


# -- built-in scenarios ---------------------------------------------------------------------

def line_scenario() -> Scenario:
    """Y = X = A^1, V = k, nu = id, mu = id: w = x*y."""
    y, x = Ring(("y",), (1,)), Ring(("x",), (1,))
    return make_scenario(y, x, ["y"], ["x"], "line")


def zero_scenario() -> Scenario:
    """nu = 0: both potentials vanish."""
    y, x = Ring(("y",), (1,)), Ring(("x",), (1,))
    return make_scenario(y, x, [0], ["x"], "zero")


def plane_scenario() -> Scenario:
    """Y = X = A^2, V = k^2, nu = (y1, y2^2), mu = (x1, x2)."""
    y, x = Ring(("y1", "y2"), (1, 1)), Ring(("x1", "x2"), (1, 0))
    return make_scenario(y, x, ["y1", "y2^2"], ["x1", "x2"], "plane")


def linear_plane_scenario() -> Scenario:
    """Y = X = A^2, V = k^2, nu = id, mu = id."""
    y, x = Ring(("y1", "y2"), (1, 1)), Ring(("x1", "x2"), (1, 1))
    return make_scenario(y, x, ["y1", "y2"], ["x1", "x2"], "plane-linear")


BUILTIN_SCENARIOS = {
    "line": line_scenario,
    "zero": zero_scenario,
    "plane": plane_scenario,
    "plane-linear": linear_plane_scenario,
}


def builtin_scenario(name: str) -> Scenario:
    try:
        return BUILTIN_SCENARIOS[name]()
    except KeyError:
        raise ScenarioError(f"unknown scenario {name!r}; choose from {sorted(BUILTIN_SCENARIOS)}") from None


# -- kernels and modules ----------------------------------------------------------------------

def unit_kernel(s: Scenario) -> MatrixFactorization:
    """kappa of the Koszul resolution of the diagonal, with potential h."""
    return kappa(unit_dg_module(s))


def unit_dg_module(s: Scenario) -> DGModule:
    ext = s.kernel_ext()
    pairs = [(copy_name(v, 1), copy_name(v, 2)) for v in s.y_ring.variables]
    nu = s.nu_on(1, ext.base)
    return diagonal_module(ext, pairs, nu)


def _koszul_product(ring: Ring, pairs: Sequence[Tuple[Poly, Poly]], potential: Poly) -> MatrixFactorization:
    """K(a_1; b_1) (x) ... (x) K(a_n; b_n); the empty product is the unit of the tensor product."""
    if not pairs:
        return unit_object(ring, potential)
    result = None
    for a, b in pairs:
        factor = mf_koszul_pair(ring, a, b, 0 if ring.graded else None)
        result = factor if result is None else mf_tensor(result, factor)
    return result


def unit_object(ring: Ring, potential: Poly) -> MatrixFactorization:
    """The rank-one even module with zero differential; only valid for zero potential."""
    if not potential.is_zero():
        raise ScenarioError("a rank-one module with zero differential needs zero potential")
    return MatrixFactorization(ring, potential, PolyMatrix.zero(ring, 1, 0), PolyMatrix.zero(ring, 0, 1),
                               () if ring.graded else None, (0,) if ring.graded else None)


def sample_kernels(s: Scenario) -> List[MatrixFactorization]:
    """The unit kernel followed by every K(rho_k; t_k) / K(t_k; rho_k) choice, without repeats."""
    ring = s.kernel_ring()
    lift = RingMap.from_assignments(s.kernel_ext().base, ring)
    rho = [lift(p) for p in s.rho_sharp()]
    t = [ring.var(name) for name in s.t_names]
    kernels = [unit_kernel(s)]
    for choice in itertools.product((0, 1), repeat=s.n):
        pairs = [(rho[k], t[k]) if c == 0 else (t[k], rho[k]) for k, c in enumerate(choice)]
        kernel = _koszul_product(ring, pairs, s.h())
        if all(kernel != other for other in kernels):
            kernels.append(kernel)
    return kernels


def sample_modules(s: Scenario) -> List[MatrixFactorization]:
    """Every K(mu_k; nu_k) / K(nu_k; mu_k) choice over O(Y x X)."""
    ring = s.module_ring()
    from_y = RingMap.from_assignments(s.y_ring, ring)
    from_x = RingMap.from_assignments(s.x_ring, ring)
    mu = [from_x(p) for p in s.mu]
    nu = [from_y(p) for p in s.nu]
    modules: List[MatrixFactorization] = []
    for choice in itertools.product((0, 1), repeat=s.n):
        pairs = [(mu[k], nu[k]) if c == 0 else (nu[k], mu[k]) for k, c in enumerate(choice)]
        module = _koszul_product(ring, pairs, s.w())
        if all(module != other for other in modules):
            modules.append(module)
    return modules


def sample_objects(s: Scenario) -> Tuple[List[MatrixFactorization], List[MatrixFactorization]]:
    """(kernels, modules) of the deterministic test corpus."""
    return sample_kernels(s), sample_modules(s)


def sample_dg_modules(s: Scenario) -> List[DGModule]:
    """Perf objects over O(Y x Y) (x) Lambda(V*): the diagonal, the exterior algebra itself,
    a doubled Koszul resolution and a shifted diagonal."""
    ext = s.kernel_ext()
    diagonal = unit_dg_module(s)
    modules = [diagonal, exterior_module(ext)]
    if s.n:
        doubled = list(ext.rho_sharp) + [ext.rho_sharp[0]]
        coefficients = [[1 if i == k else 0 for i in range(s.n + 1)] for k in range(s.n)]
        modules.append(koszul_resolution(ext, doubled, coefficients))
    modules.append(dg_shift(diagonal))
    modules.append(dg_direct_sum(diagonal, dg_shift(diagonal)))
    return modules


# -- seeded random corpora ------------------------------------------------------------------------

def random_poly(ring: Ring, rng: np.random.Generator, degree: int = 2, terms: int = 3,
                constant: bool = True) -> Poly:
    """A nonzero polynomial with up to `terms` monomials of total degree <= degree."""
    monos = monomials_up_to(ring.nvars, [1] * ring.nvars, degree)
    if not constant:
        monos = [e for e in monos if any(e)] or monos
    while True:
        picks = rng.choice(len(monos), size=min(terms, len(monos)), replace=False)
        coeffs = rng.integers(-3, 4, size=len(picks))
        p = Poly(ring, {monos[int(i)]: int(c) for i, c in zip(picks, coeffs) if c})
        if not p.is_zero():
            return p


def random_ring(rng: np.random.Generator, nvars: int, prefix: str) -> Ring:
    return Ring(tuple(f"{prefix}{i + 1}" for i in range(nvars)))


def random_ring_map(source: Ring, target: Ring, rng: np.random.Generator, degree: int = 2) -> RingMap:
    return RingMap(source, target, tuple(random_poly(target, rng, degree) for _ in source.variables))


def random_scenario(rng: np.random.Generator, index: int = 0) -> Scenario:
    """Ungraded scenario with nonlinear nu and mu of degree <= 2."""
    ny, nx, n = (int(v) for v in rng.integers(1, 3, size=3))
    y_ring = Ring(tuple(f"y{i + 1}" for i in range(ny)))
    x_ring = Ring(tuple(f"x{i + 1}" for i in range(nx)))
    nu = [random_poly(y_ring, rng, 2, 3, constant=False) for _ in range(n)]
    mu = [random_poly(x_ring, rng, 2, 3, constant=False) for _ in range(n)]
    return make_scenario(y_ring, x_ring, nu, mu, f"random-{index}")


def random_conjugate(m: MatrixFactorization, rng: np.random.Generator, steps: int = 2) -> MatrixFactorization:
    """Change of basis by even elementary matrices I + c*E_rs; basis weights are dropped."""
    ring = m.ring
    n = m.total_rank
    D = m.total_differential()
    for _ in range(steps):
        parity = int(rng.integers(0, 2))
        block = list(range(m.rank_minus1)) if parity else list(range(m.rank_minus1, n))
        if len(block) < 2:
            continue
        r, s = (int(v) for v in rng.choice(block, size=2, replace=False))
        c = random_poly(ring, rng, 1, 2)
        P = PolyMatrix.identity(ring, n) + PolyMatrix(ring, n, n, {(r, s): c})
        P_inv = PolyMatrix.identity(ring, n) - PolyMatrix(ring, n, n, {(r, s): c})
        D = P @ D @ P_inv
    return checked(from_total(ring, m.potential, m.rank_minus1, D), "random conjugation")


def random_factorization_pair(ring: Ring, rng: np.random.Generator) -> Tuple[MatrixFactorization, MatrixFactorization]:
    """Two factorizations of one random potential a1*b1 + a2*b2, total ranks <= 4."""
    a1, b1, a2, b2 = (random_poly(ring, rng, 1, 2) for _ in range(4))
    w = a1 * b1 + a2 * b2
    first = random_conjugate(mf_tensor(mf_koszul_pair(ring, a1, b1), mf_koszul_pair(ring, a2, b2)), rng)
    choice = int(rng.integers(0, 3))
    if choice == 0:
        second = mf_tensor(mf_koszul_pair(ring, b1, a1), mf_koszul_pair(ring, a2, b2))
    elif choice == 1:
        second = mf_tensor(mf_koszul_pair(ring, a1, b1), mf_koszul_pair(ring, b2, a2))
    else:
        second = mf_koszul_pair(ring, w, 1)
    return first, random_conjugate(second, rng)


def random_morphism(source: MatrixFactorization, target: MatrixFactorization, rng: np.random.Generator,
                    parity: Optional[int] = None, degree: int = 1) -> MFMorphism:
    """Arbitrary (not necessarily closed) element of the Hom complex."""
    parity = int(rng.integers(0, 2)) if parity is None else parity
    ring = source.ring
    entries = {}
    for r in range(target.total_rank):
        for c in range(source.total_rank):
            same = target.parity(r) == source.parity(c)
            if same == (parity == EVEN) and rng.random() < 0.7:
                entries[(r, c)] = random_poly(ring, rng, degree, 2)
    F = PolyMatrix(ring, target.total_rank, source.total_rank, entries)
    return MFMorphism.from_block(source, target, F, parity)
