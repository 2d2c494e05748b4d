"""
Tests for DG-modules over O (x) Lambda(V*)
"""
import pytest

from dgmod import (
    DGModule,
    DGMorphism,
    ExteriorData,
    dg_base_change,
    dg_box,
    dg_direct_sum,
    dg_extend_exterior,
    dg_from_dict,
    dg_rename,
    dg_shift,
    dg_tensor,
    dg_to_dict,
    dg_unit,
    dg_validate,
    diagonal_module,
    exterior_module,
    format_dg,
    koszul_resolution,
    parse_dg,
    telescoping_coefficients,
)
from freemod import PolyMatrix
from koszul import kappa
from mf import permutation_certificate, permutation_signs
from polyring import InvalidDGModuleError, ParseError, Ring, RingMap, RingMismatchError

Y2 = Ring(("y_1", "y_2"), (1, 1))


def _line_ext() -> ExteriorData:
    return ExteriorData(Y2, (Y2.poly("y_1 - y_2"),))


def test_dual_weights():
    ext = _line_ext()
    assert ext.t_names == ("t1",)
    assert ext.t_weights == (1,)
    assert ext.extended_ring().variables == ("y_1", "y_2", "t1")
    assert ext.potential() == ext.extended_ring().poly("y_1*t1 - y_2*t1")


def test_unit_module():
    u = dg_unit()
    assert dg_validate(u).ok
    assert u.rank == 1


def test_exterior_module_is_valid():
    m = exterior_module(_line_ext())
    assert dg_validate(m).ok
    assert m.degrees == (-1, 0)
    assert m.ranks == {-1: 1, 0: 1}


def test_koszul_resolution_of_two_elements():
    ring = Ring(("a", "b"))
    ext = ExteriorData(ring, (ring.poly("a^2 + b"),))
    m = koszul_resolution(ext, ["a", "b"], [["a", "1"]])
    assert dg_validate(m).ok
    assert m.rank == 4
    assert m.degrees == (-2, -1, -1, 0)


def test_koszul_resolution_rejects_wrong_coefficients():
    ring = Ring(("a",))
    ext = ExteriorData(ring, (ring.poly("a"),))
    with pytest.raises(InvalidDGModuleError):
        koszul_resolution(ext, ["a"], [["2"]])


def test_validator_catches_leibniz_defect():
    ext = _line_ext()
    good = exterior_module(ext)
    bad = DGModule(ext, good.degrees, good.d, (PolyMatrix.zero(Y2, 2, 2),))
    report = dg_validate(bad)
    assert not report.ok
    assert "Leibniz" in report.message


def test_telescoping_coefficients():
    ring = Ring(("y1_1", "y2_1", "y1_2", "y2_2"))
    p = ring.poly("y1_1*y2_1^2")
    pairs = [("y1_1", "y1_2"), ("y2_1", "y2_2")]
    c = telescoping_coefficients(p, pairs)
    swap = RingMap.from_assignments(ring, ring, {"y1_1": "y1_2", "y2_1": "y2_2"})
    total = c[0] * ring.poly("y1_1 - y1_2") + c[1] * ring.poly("y2_1 - y2_2")
    assert total == p - swap(p)


def test_diagonal_module_for_square():
    ring = Ring(("y_1", "y_2"))
    ext = ExteriorData(ring, (ring.poly("y_1^2 - y_2^2"),))
    m = diagonal_module(ext, [("y_1", "y_2")], [ring.poly("y_1^2")])
    assert dg_validate(m).ok
    assert m.xi[0].get(0, 1) == ring.poly("y_1 + y_2")


def test_shift_and_sum():
    m = exterior_module(_line_ext())
    s = dg_direct_sum(m, dg_shift(m))
    assert dg_validate(s).ok
    assert s.degrees == (-1, 0, -2, -1)


def test_box_product():
    m = exterior_module(_line_ext())
    n = dg_rename(m, {"y_1": "z_1", "y_2": "z_2", "t1": "s1"})
    box = dg_box(m, n)
    assert dg_validate(box).ok
    assert box.ext.t_names == ("t1", "s1")
    assert box.rank == 4
    with pytest.raises(RingMismatchError):
        dg_box(m, m)


def test_box_is_associative():
    a = exterior_module(ExteriorData(Ring(("a",), (1,)), ("a",), ("t1",)))
    b = dg_shift(exterior_module(ExteriorData(Ring(("b",), (1,)), ("b^2",), ("t2",))))
    c = exterior_module(ExteriorData(Ring(("c",), (1,)), ("c",), ("t3",)))
    c = dg_direct_sum(c, dg_shift(c))
    left = dg_box(dg_box(a, b), c)
    right = dg_box(a, dg_box(b, c))
    assert left.degrees == right.degrees
    assert left.ext == right.ext
    k_left, k_right = kappa(left), kappa(right)
    perm = list(range(k_left.total_rank))
    signs = permutation_signs(k_left, k_right, perm)
    assert signs is not None
    assert permutation_certificate(k_left, k_right, perm, signs).verify().ok


def test_tensor_over_base_adds_rho():
    m = exterior_module(_line_ext())
    t = dg_tensor(m, m)
    assert dg_validate(t).ok
    assert t.ext.rho_sharp == (Y2.poly("2*y_1 - 2*y_2"),)


def test_base_change_and_extension():
    m = exterior_module(_line_ext())
    diag = RingMap.from_assignments(Y2, Y2, {"y_2": "y_1"})
    collapsed = dg_base_change(m, diag)
    assert collapsed.ext.rho_sharp == (Y2.zero(),)
    assert dg_validate(dg_extend_exterior(m, ["t2"], [2])).ok


def test_morphism_closedness():
    m = exterior_module(_line_ext())
    ident = DGMorphism(m, m, PolyMatrix.identity(Y2, 2))
    assert ident.is_closed()
    assert ident.compose(ident).matrix == PolyMatrix.identity(Y2, 2)


def test_text_format():
    m = exterior_module(_line_ext())
    text = format_dg(m)
    assert text.startswith("base: y_1:1 y_2:1\nt: t1:1\nrho_sharp:\ny_1 - y_2\n")
    assert parse_dg(text) == m
    assert dg_from_dict(dg_to_dict(m)) == m
    with pytest.raises(ParseError):
        parse_dg("base: y_1:1 y_2:1\nt: t1:1\nrho_sharp:\ny_1 - y_2\n")


if __name__ == "__main__":
    test_dual_weights()
    test_unit_module()
    test_exterior_module_is_valid()
    test_koszul_resolution_of_two_elements()
    test_koszul_resolution_rejects_wrong_coefficients()
    test_validator_catches_leibniz_defect()
    test_telescoping_coefficients()
    test_diagonal_module_for_square()
    test_shift_and_sum()
    test_box_product()
    test_box_is_associative()
    test_tensor_over_base_adds_rho()
    test_base_change_and_extension()
    test_morphism_closedness()
    test_text_format()
    print("dgmod tests passed")
