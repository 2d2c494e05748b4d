"""
Tests for kernel convolutions and the action of kernels on modules
"""
import pytest

from convolution import (
    Kernel,
    ModuleObject,
    certified,
    convolve_kernel_module,
    convolve_kernels,
    dg_convolve_kernels,
    kappa_monoidal_check,
    potential_identities,
)
from mf import mf_koszul_pair, mf_validate
from polyring import CertificateError, PotentialMismatchError, Ring, RingMismatchError, SupportConditionError
from reduce import ReductionTrace
from scenario import (
    line_scenario,
    linear_plane_scenario,
    plane_scenario,
    sample_modules,
    unit_dg_module,
    unit_kernel,
    zero_scenario,
)


def test_potential_identities_hold_for_builtins():
    for s in (line_scenario(), zero_scenario(), plane_scenario(), linear_plane_scenario()):
        assert potential_identities(s)


def test_kernel_checks_potential():
    s = line_scenario()
    ring = s.kernel_ring()
    with pytest.raises(PotentialMismatchError):
        Kernel(s, mf_koszul_pair(ring, "t1", "t1"))
    with pytest.raises(RingMismatchError):
        Kernel(s, mf_koszul_pair(Ring(("y_1", "y_2", "t1")), "y_1 - y_2", "t1"))


def test_module_checks_potential():
    s = line_scenario()
    with pytest.raises(PotentialMismatchError):
        ModuleObject(s, mf_koszul_pair(s.module_ring(), "x", "x", 0))


def test_unit_acts_trivially_on_line():
    s = line_scenario()
    unit = Kernel(s, unit_kernel(s))
    for m in sample_modules(s):
        trace = ReductionTrace()
        result = convolve_kernel_module(unit, ModuleObject(s, m), trace)
        assert mf_validate(result.mf).ok
        assert trace.verify().ok
        assert certified(result.mf, m, "unit action").verify().ok


def test_unit_composes_trivially_on_line():
    s = line_scenario()
    unit = Kernel(s, unit_kernel(s))
    result = convolve_kernels(unit, unit)
    assert result.mf.potential == s.h()
    assert certified(result.mf, unit.mf, "unit composition").verify().ok


def test_dg_side_product_of_diagonals():
    s = line_scenario()
    diagonal = unit_dg_module(s)
    product = dg_convolve_kernels(s, diagonal, diagonal)
    assert mf_validate(product.mf).ok
    assert kappa_monoidal_check(s, diagonal, diagonal).verify().ok


def test_support_violation_is_reported():
    s = zero_scenario()
    kernel = Kernel(s, mf_koszul_pair(s.kernel_ring(), "y_2^2", "0"))
    module = ModuleObject(s, mf_koszul_pair(s.module_ring(), "x", "0"))
    with pytest.raises(SupportConditionError):
        convolve_kernel_module(kernel, module)


def test_certified_rejects_distinct_objects():
    ring = Ring(("x", "y"), (1, 1))
    with pytest.raises(CertificateError):
        certified(mf_koszul_pair(ring, "x", "y", 0), mf_koszul_pair(ring, "y", "x", 0), "negative control")


if __name__ == "__main__":
    test_potential_identities_hold_for_builtins()
    test_kernel_checks_potential()
    test_module_checks_potential()
    test_unit_acts_trivially_on_line()
    test_unit_composes_trivially_on_line()
    test_dg_side_product_of_diagonals()
    test_support_violation_is_reported()
    test_certified_rejects_distinct_objects()
    print("convolution tests passed")
