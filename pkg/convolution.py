"""
Kernel convolutions: kernel * kernel on Y x Y x V* and kernel * module on Y x X.

Each product is pullback -> tensor -> exclusion of the middle copy of Y. Potentials
are tracked exactly; a middle variable that cannot be excluded means the kernel
violates the support condition.
"""
import logging
from dataclasses import dataclass
from typing import Optional

from dgmod import DGModule, dg_base_change, dg_tensor
from koszul import kappa
from mf import EquivalenceCertificate, MatrixFactorization, mf_pullback, mf_rename, mf_tensor
from polyring import (
    CertificateError,
    IneligibleEliminationError,
    MFError,
    PotentialMismatchError,
    RingMap,
    RingMismatchError,
    SupportConditionError,
    format_poly,
)
from reduce import DefinitelyDistinct, NotFound, ReductionTrace, eliminate_variables, equiv_check

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Kernel:
    """A factorization of h over O(Y x Y x V*)."""
    scenario: object
    mf: MatrixFactorization

    def __post_init__(self):
        s = self.scenario
        if self.mf.ring != s.kernel_ring():
            raise RingMismatchError(f"kernel over {self.mf.ring}, expected {s.kernel_ring()}")
        if self.mf.potential != s.h():
            raise PotentialMismatchError(
                f"kernel potential {format_poly(self.mf.potential)} differs from h = {format_poly(s.h())}")


@dataclass(frozen=True)
class ModuleObject:
    """A factorization of w over O(Y x X)."""
    scenario: object
    mf: MatrixFactorization

    def __post_init__(self):
        s = self.scenario
        if self.mf.ring != s.module_ring():
            raise RingMismatchError(f"module over {self.mf.ring}, expected {s.module_ring()}")
        if self.mf.potential != s.w():
            raise PotentialMismatchError(
                f"module potential {format_poly(self.mf.potential)} differs from w = {format_poly(s.w())}")


def potential_identities(s) -> bool:
    """h o p + w o p23 == w o p13 and h o p12 + h o p23 == h o p13, as exact polynomials."""
    w, h = s.w(), s.h()
    p = s.p_map()
    p13, p23 = s.module_projection(1), s.module_projection(2)
    lhs, rhs = p(h) + p23(w), p13(w)
    if lhs != rhs:
        raise MFError(f"action potentials disagree: {format_poly(lhs)} != {format_poly(rhs)}")
    k12, k23, k13 = s.kernel_projection(1, 2), s.kernel_projection(2, 3), s.kernel_projection(1, 3)
    lhs, rhs = k12(h) + k23(h), k13(h)
    if lhs != rhs:
        raise MFError(f"composition potentials disagree: {format_poly(lhs)} != {format_poly(rhs)}")
    return True


def _push_middle(s, big: MatrixFactorization, trace: Optional[ReductionTrace]) -> MatrixFactorization:
    """Exclude the middle copy of Y, or report a support violation."""
    try:
        result, steps = eliminate_variables(big, s.middle_variables())
    except IneligibleEliminationError as exc:
        raise SupportConditionError(f"support condition violated: {exc}") from exc
    if trace is not None:
        trace.extend(steps)
    LOGGER.debug("pushed forward along the middle factor: rank %d -> %d", big.total_rank, result.total_rank)
    return result


def convolve_kernel_module(k: Kernel, m: ModuleObject, trace: Optional[ReductionTrace] = None) -> ModuleObject:
    """k * m = p13_*(p^* k (x) p23^* m), with p = Id x Id x mu."""
    s = k.scenario
    big = mf_tensor(mf_pullback(k.mf, s.p_map()), mf_pullback(m.mf, s.module_projection(2)))
    if big.potential != s.module_projection(1)(s.w()):
        raise PotentialMismatchError("tensor potential differs from w o p13")
    pushed = _push_middle(s, big, trace)
    back = {f"{v}_1": v for v in s.y_ring.variables}
    return ModuleObject(s, mf_rename(pushed, s.module_ring(), back))


def _rename_outer(s, pushed: MatrixFactorization) -> MatrixFactorization:
    """Y_1 x Y_3 x V* -> Y_1 x Y_2 x V*."""
    back = {f"{v}_3": f"{v}_2" for v in s.y_ring.variables}
    return mf_rename(pushed, s.kernel_ring(), back)


def convolve_kernels(k1: Kernel, k2: Kernel, trace: Optional[ReductionTrace] = None) -> Kernel:
    """k1 * k2 = pi13_*(pi12^* k1 (x) pi23^* k2)."""
    s = k1.scenario
    if k2.scenario != s:
        raise RingMismatchError("kernels from different scenarios")
    big = mf_tensor(mf_pullback(k1.mf, s.kernel_projection(1, 2)), mf_pullback(k2.mf, s.kernel_projection(2, 3)))
    if big.potential != s.kernel_projection(1, 3)(s.h()):
        raise PotentialMismatchError("tensor potential differs from h o p13")
    return Kernel(s, _rename_outer(s, _push_middle(s, big, trace)))


def dg_convolve_kernels(s, m1: DGModule, m2: DGModule, trace: Optional[ReductionTrace] = None) -> Kernel:
    """kappa applied to the DG-side product: base change along q12 and q23, tensor over
    O(Y^3) with xi acting by the coproduct, then exclude the middle copy of Y."""
    base3 = s.y_copies((1, 2, 3))
    base2 = s.kernel_ext().base
    q12 = RingMap.from_assignments(base2, base3)
    images = {}
    for v in s.y_ring.variables:
        images[f"{v}_1"] = base3.var(f"{v}_2")
        images[f"{v}_2"] = base3.var(f"{v}_3")
    q23 = RingMap.from_assignments(base2, base3, images)
    product = dg_tensor(dg_base_change(m1, q12), dg_base_change(m2, q23))
    big = kappa(product)
    if big.ring != s.composition_ring():
        raise RingMismatchError(f"DG product over {big.ring}, expected {s.composition_ring()}")
    return Kernel(s, _rename_outer(s, _push_middle(s, big, trace)))


def certified(m: MatrixFactorization, n: MatrixFactorization, what: str,
              bound: Optional[int] = None) -> EquivalenceCertificate:
    """equiv_check, with anything but a certificate turned into CertificateError."""
    result = equiv_check(m, n, bound)
    if isinstance(result, DefinitelyDistinct):
        raise CertificateError(f"{what}: objects are distinct ({result.reason})")
    if isinstance(result, NotFound):
        raise CertificateError(f"{what}: no equivalence found up to weight {result.bound}")
    return result


def kappa_monoidal_check(s, m1: DGModule, m2: DGModule, bound: Optional[int] = None) -> EquivalenceCertificate:
    """kappa(m1 * m2) ~ kappa(m1) * kappa(m2), certified."""
    left = dg_convolve_kernels(s, m1, m2)
    right = convolve_kernels(Kernel(s, kappa(m1)), Kernel(s, kappa(m2)))
    return certified(left.mf, right.mf, "kappa monoidality", bound)
