"""
Tests for matrix factorizations, the Hom complex and the standard constructions
"""
import numpy as np
import pytest

from freemod import PolyMatrix
from mf import (
    EVEN,
    ODD,
    EquivalenceCertificate,
    MatrixFactorization,
    MFMorphism,
    hom_diff,
    is_closed,
    mf_assoc_certificate,
    mf_bar,
    mf_cone,
    mf_direct_sum,
    mf_external_tensor,
    mf_from_dict,
    mf_koszul_pair,
    mf_pullback,
    mf_pushforward_finite,
    mf_shift,
    mf_shift_certificate,
    mf_swap_certificate,
    mf_tensor,
    mf_tensor_morphism,
    mf_to_dict,
    mf_tot,
    mf_validate,
    mf_zero,
    parse_mf,
    permutation_signs,
    format_mf,
)
from polyring import (
    NotClosedError,
    PotentialMismatchError,
    Ring,
    RingMap,
    RingMismatchError,
    ShapeMismatchError,
)
from scenario import random_factorization_pair, random_morphism

XY = Ring(("x", "y"), (1, 1))

KXY_TEXT = """ring: x:1 y:1
potential: x*y
weights_minus1: 0
weights_zero: 0
d_minus1:
1 1
0 0 : x
d_zero:
1 1
0 0 : y
"""


def test_koszul_pair_validates():
    k = mf_koszul_pair(XY, "x", "y", 0)
    assert mf_validate(k).ok
    assert k.potential == XY.poly("x*y")
    assert k.graded


def test_validator_reports_first_violation():
    bad = MatrixFactorization(XY, XY.poly("x*y"), PolyMatrix.from_rows(XY, [["x"]]),
                              PolyMatrix.from_rows(XY, [["x"]]))
    report = mf_validate(bad)
    assert not report.ok
    assert "d_zero*d_minus1" in report.message


def test_validator_checks_weights():
    k = MatrixFactorization(XY, XY.poly("x*y"), PolyMatrix.from_rows(XY, [["x"]]),
                            PolyMatrix.from_rows(XY, [["y"]]), (0,), (3,))
    assert not mf_validate(k).ok


def test_zero_object():
    z = mf_zero(XY, XY.poly("x*y"))
    assert mf_validate(z).ok
    assert z.is_zero_object()


def test_direct_sum_and_shift():
    k = mf_koszul_pair(XY, "x", "y", 0)
    s = mf_direct_sum(k, mf_koszul_pair(XY, "y", "x", 0))
    assert mf_validate(s).ok
    assert (s.rank_minus1, s.rank_zero) == (2, 2)
    shifted = mf_shift(k)
    assert mf_validate(shifted).ok
    assert shifted.d_minus1 == PolyMatrix.from_rows(XY, [["-y"]])
    assert mf_shift_certificate(k).verify().ok
    with pytest.raises(PotentialMismatchError):
        mf_direct_sum(k, mf_koszul_pair(XY, "x", "x"))


def test_hom_diff_squares_to_zero():
    rng = np.random.default_rng(7)
    ring = Ring(("a", "b", "c"))
    for _ in range(10):
        m, n = random_factorization_pair(ring, rng)
        f = random_morphism(m, n, rng)
        assert hom_diff(hom_diff(f)).is_zero()


def test_identity_is_closed_and_composes():
    k = mf_koszul_pair(XY, "x", "y")
    ident = MFMorphism.identity(k)
    assert is_closed(ident)
    assert ident.compose(ident) == ident
    assert EquivalenceCertificate.identity(k).verify().ok


def test_cone_of_identity_validates():
    k = mf_koszul_pair(XY, "x", "y", 0)
    c = mf_cone(MFMorphism.identity(k))
    assert mf_validate(c).ok
    assert c.total_rank == 4


def test_cone_rejects_open_map():
    k = mf_koszul_pair(XY, "x", "y")
    f = MFMorphism(k, k, PolyMatrix.from_rows(XY, [["x"]]), PolyMatrix.from_rows(XY, [["1"]]), EVEN)
    assert not is_closed(f)
    with pytest.raises(NotClosedError):
        mf_cone(f)


def test_totalization_of_two_term_complex():
    k = mf_koszul_pair(XY, "x", "y", 0)
    tot = mf_tot([k, k], [MFMorphism.identity(k)])
    assert mf_validate(tot).ok
    assert tot.total_rank == 4


def test_tensor_adds_potentials():
    k1 = mf_koszul_pair(XY, "x", "y", 0)
    k2 = mf_koszul_pair(XY, "x", "x", 0)
    t = mf_tensor(k1, k2)
    assert t.potential == XY.poly("x*y + x^2")
    assert (t.rank_minus1, t.rank_zero) == (2, 2)
    assert mf_validate(t).ok
    assert mf_swap_certificate(k1, k2).verify().ok
    assert mf_assoc_certificate(k1, k2, k1).verify().ok


def test_tensor_of_morphisms_is_closed():
    k1, k2 = mf_koszul_pair(XY, "x", "y"), mf_koszul_pair(XY, "y", "y")
    f = mf_tensor_morphism(MFMorphism.identity(k1), MFMorphism.identity(k2))
    assert is_closed(f)
    assert f == MFMorphism.identity(mf_tensor(k1, k2))


def test_external_tensor():
    a = mf_koszul_pair(Ring(("x",)), "x", "x")
    b = mf_koszul_pair(Ring(("y",)), "y", "1")
    box = mf_external_tensor(a, b)
    assert box.ring.variables == ("x", "y")
    assert box.potential == box.ring.poly("x^2 + y")
    with pytest.raises(RingMismatchError):
        mf_tensor(a, b)


def test_pullback_substitutes():
    src, tgt = Ring(("u", "v")), Ring(("s",))
    phi = RingMap.from_assignments(src, tgt, {"u": "s^2", "v": "s + 1"})
    k = mf_pullback(mf_koszul_pair(src, "u", "v"), phi)
    assert k.potential == tgt.poly("s^3 + s^2")
    assert mf_validate(k).ok


def test_pushforward_along_square():
    ru, rx = Ring(("u",)), Ring(("x",))
    phi = RingMap.from_assignments(ru, rx, {"u": "x^2"})
    k = mf_koszul_pair(rx, "x", "x")
    pushed = mf_pushforward_finite(k, phi, ["1", "x"])
    assert pushed.ring == ru
    assert pushed.potential == ru.var("u")
    assert (pushed.rank_minus1, pushed.rank_zero) == (2, 2)
    assert mf_validate(pushed).ok
    with pytest.raises(PotentialMismatchError):
        mf_pushforward_finite(mf_koszul_pair(rx, "x", "1"), phi, ["1", "x"])


def test_bar_is_a_tensor_unit():
    b = mf_bar(2, XY)
    assert (b.rank_minus1, b.rank_zero) == (0, 2)
    assert mf_validate(b).ok
    k = mf_koszul_pair(XY, "x", "y", 0)
    assert mf_tensor(mf_bar(1, XY), k) == k


def test_graded_pushforward_keeps_weights():
    ru, rx = Ring(("u",), (2,)), Ring(("x",), (1,))
    phi = RingMap.from_assignments(ru, rx, {"u": "x^2"})
    pushed = mf_pushforward_finite(mf_koszul_pair(rx, "x", "x", 0), phi, ["1", "x"])
    assert pushed.graded
    assert pushed.weights_minus1 == (0, -1)
    assert pushed.weights_zero == (0, -1)
    assert mf_validate(pushed).ok


def test_bar_checks_its_potential():
    w = XY.poly("x*y")
    empty = mf_bar(0, XY, w)
    assert empty.potential == w
    assert empty.is_zero_object()
    assert mf_bar(2, XY, XY.zero()) == mf_bar(2, XY)
    with pytest.raises(PotentialMismatchError):
        mf_bar(1, XY, w)
    with pytest.raises(ShapeMismatchError):
        mf_bar(-1, XY)


def test_permutation_signs():
    k = mf_koszul_pair(XY, "x", "y")
    assert permutation_signs(k, mf_koszul_pair(XY, "-x", "-y"), [0, 1]) == [1, -1]
    assert permutation_signs(k, k, [0, 1]) == [1, 1]
    assert permutation_signs(k, mf_koszul_pair(XY, "y", "x"), [0, 1]) is None


def test_text_format():
    k = parse_mf(KXY_TEXT)
    assert k == mf_koszul_pair(XY, "x", "y", 0)
    assert format_mf(k) == KXY_TEXT
    assert mf_from_dict(mf_to_dict(k)) == k


def test_odd_morphism_parity():
    k = mf_koszul_pair(XY, "x", "y")
    h = MFMorphism.zero(k, k, ODD)
    assert h.parity == ODD
    assert hom_diff(h).parity == EVEN


if __name__ == "__main__":
    test_koszul_pair_validates()
    test_validator_reports_first_violation()
    test_validator_checks_weights()
    test_zero_object()
    test_direct_sum_and_shift()
    test_hom_diff_squares_to_zero()
    test_identity_is_closed_and_composes()
    test_cone_of_identity_validates()
    test_cone_rejects_open_map()
    test_totalization_of_two_term_complex()
    test_tensor_adds_potentials()
    test_tensor_of_morphisms_is_closed()
    test_external_tensor()
    test_pullback_substitutes()
    test_pushforward_along_square()
    test_bar_is_a_tensor_unit()
    test_text_format()
    test_odd_morphism_parity()
    test_graded_pushforward_keeps_weights()
    test_bar_checks_its_potential()
    test_permutation_signs()
    print("mf tests passed")
