"""
Tests for polynomial matrices, the exact solver and restriction of scalars
"""
from fractions import Fraction

import numpy as np
import pytest

from freemod import (
    PolyMatrix,
    base_change,
    check_free_basis,
    exact_nullspace,
    exact_solve,
    format_matrix,
    generic_rank,
    kron,
    mat_compose,
    matrix_from_dict,
    matrix_to_dict,
    parse_matrix,
    permutation_matrix,
    restrict_scalars,
    restricted_weights,
    rewrite_in_basis,
)
from polyring import NotFiniteError, ParseError, Ring, RingMap, ShapeMismatchError
from scenario import random_poly

XY = Ring(("x", "y"))


def test_compose_and_identity():
    a = PolyMatrix.from_rows(XY, [["x", "1"], ["0", "y"]])
    b = PolyMatrix.from_rows(XY, [["y", "0"], ["1", "x"]])
    assert a @ PolyMatrix.identity(XY, 2) == a
    assert (a @ b).get(0, 0) == XY.poly("x*y + 1")
    assert (a @ b).get(1, 1) == XY.poly("x*y")
    with pytest.raises(ShapeMismatchError):
        a @ PolyMatrix.zero(XY, 3, 1)


def test_mat_compose_and_base_change():
    a = PolyMatrix.from_rows(XY, [["x", "y"]])
    b = PolyMatrix.from_rows(XY, [["y"], ["x"]])
    assert mat_compose(a, b) == PolyMatrix.from_rows(XY, [["2*x*y"]])
    phi = RingMap.from_assignments(XY, XY, {"x": "y"})
    assert base_change(mat_compose(a, b), phi) == mat_compose(base_change(a, phi), base_change(b, phi))
    with pytest.raises(ShapeMismatchError):
        mat_compose(a, a)


def test_zero_entries_are_dropped():
    m = PolyMatrix(XY, 2, 2, {(0, 0): XY.zero(), (1, 1): XY.var("x")})
    assert list(m.entries) == [(1, 1)]
    with pytest.raises(ShapeMismatchError):
        PolyMatrix(XY, 1, 1, {(1, 0): XY.one()})


def test_kron_and_permutation():
    a = PolyMatrix.from_rows(XY, [["x"]])
    b = PolyMatrix.from_rows(XY, [["1", "y"]])
    assert kron(a, b) == PolyMatrix.from_rows(XY, [["x", "x*y"]])
    p = permutation_matrix(XY, [1, 0], [1, -1])
    assert p @ p == PolyMatrix.scalar(XY, 2, -1)


def test_exact_solve():
    eqs = [{0: Fraction(1), 1: Fraction(1)}, {0: Fraction(1), 1: Fraction(-1)}]
    assert exact_solve(eqs, [Fraction(3), Fraction(1)], 2) == [Fraction(2), Fraction(1)]
    assert exact_solve([{0: Fraction(1)}, {0: Fraction(2)}], [Fraction(1), Fraction(3)], 1) is None


def test_exact_nullspace():
    basis = exact_nullspace([{0: Fraction(1), 1: Fraction(-1)}], 3)
    assert len(basis) == 2
    for v in basis:
        assert v.get(0, 0) - v.get(1, 0) == 0


def test_generic_rank():
    m = PolyMatrix.from_rows(XY, [["x", "y"], ["x^2", "x*y"]])
    assert generic_rank(m) == 1
    assert generic_rank(PolyMatrix.from_rows(XY, [["x", "0"], ["0", "y"]])) == 2
    assert generic_rank(PolyMatrix.zero(XY, 2, 2)) == 0


def test_rewrite_in_basis():
    ru, rx = Ring(("u",)), Ring(("x",))
    phi = RingMap.from_assignments(ru, rx, {"u": "x^2"})
    basis = [rx.one(), rx.var("x")]
    coeffs = rewrite_in_basis(rx.poly("x^3 + 2*x^2 + 5"), phi, basis)
    assert coeffs == [ru.poly("2*u + 5"), ru.poly("u")]


def test_rewrite_outside_span_fails():
    ru, rx = Ring(("u",)), Ring(("x",))
    phi = RingMap.from_assignments(ru, rx, {"u": "x^2"})
    with pytest.raises(NotFiniteError):
        rewrite_in_basis(rx.poly("x"), phi, [rx.one()])
    constant = RingMap.from_assignments(ru, rx, {"u": "1"})
    with pytest.raises(NotFiniteError):
        rewrite_in_basis(rx.poly("x"), constant, [rx.one()])


def test_restrict_scalars_multiplication_by_x():
    ru, rx = Ring(("u",)), Ring(("x",))
    phi = RingMap.from_assignments(ru, rx, {"u": "x^2"})
    m = restrict_scalars(PolyMatrix.from_rows(rx, [["x"]]), phi, ["1", "x"])
    # x*1 = x, x*x = u*1
    assert m == PolyMatrix.from_rows(ru, [["0", "u"], ["1", "0"]])


def test_dependent_basis_is_rejected():
    ru, rx = Ring(("u",)), Ring(("x",))
    phi = RingMap.from_assignments(ru, rx, {"u": "x^2"})
    with pytest.raises(NotFiniteError):
        restrict_scalars(PolyMatrix.from_rows(rx, [["x"]]), phi, ["1", "x", "x^2"])
    with pytest.raises(NotFiniteError):
        check_free_basis(phi, [rx.one(), rx.poly("2")])
    with pytest.raises(NotFiniteError):
        check_free_basis(phi, [])
    check_free_basis(phi, [rx.one(), rx.var("x")])


def test_restrict_scalars_keeps_weights():
    ru, rx = Ring(("u",), (2,)), Ring(("x",), (1,))
    phi = RingMap.from_assignments(ru, rx, {"u": "x^2"})
    m = PolyMatrix.from_rows(rx, [["x"]]).with_weights((1,), (0,))
    restricted = restrict_scalars(m, phi, ["1", "x"])
    assert restricted.row_weights == (1, 0)
    assert restricted.col_weights == (0, -1)
    assert restricted.homogeneity_violation() is None
    assert restricted_weights((1,), RingMap.from_assignments(ru, rx, {"u": "x"}), [rx.one()]) is None


def test_sum_keeps_matching_weights():
    a = PolyMatrix.from_rows(XY, [["x"]]).with_weights((1,), (0,))
    b = PolyMatrix.from_rows(XY, [["y"]]).with_weights((1,), (0,))
    assert (a + b).row_weights == (1,)
    assert (a - b).col_weights == (0,)
    assert (a + b.with_weights((2,), (1,))).row_weights is None


def test_restrict_scalars_is_multiplicative():
    rng = np.random.default_rng(5)
    ru, rx = Ring(("u", "v")), Ring(("x", "y"))
    phi = RingMap.from_assignments(ru, rx, {"u": "x^2", "v": "y^2"})
    basis = ["1", "x", "y", "x*y"]
    for _ in range(4):
        a = PolyMatrix.from_rows(rx, [[random_poly(rx, rng, degree=3) for _ in range(2)] for _ in range(2)])
        b = PolyMatrix.from_rows(rx, [[random_poly(rx, rng, degree=3)] for _ in range(2)])
        assert restrict_scalars(a @ b, phi, basis) == restrict_scalars(a, phi, basis) @ restrict_scalars(b, phi, basis)


def test_matrix_text():
    m = PolyMatrix.from_rows(XY, [["x", "0"], ["-1/2", "x*y"]])
    text = format_matrix(m)
    assert text == "2 2\n0 0 : x\n1 0 : -1/2\n1 1 : x*y\n"
    assert parse_matrix(text.splitlines(), XY) == m
    assert matrix_from_dict(matrix_to_dict(m), XY) == m
    with pytest.raises(ParseError):
        parse_matrix(["1 1", "0 0 : x", "0 0 : y"], XY)
    with pytest.raises(ParseError):
        parse_matrix(["1 x"], XY)


if __name__ == "__main__":
    test_compose_and_identity()
    test_mat_compose_and_base_change()
    test_zero_entries_are_dropped()
    test_kron_and_permutation()
    test_exact_solve()
    test_exact_nullspace()
    test_generic_rank()
    test_rewrite_in_basis()
    test_rewrite_outside_span_fails()
    test_restrict_scalars_multiplication_by_x()
    test_matrix_text()
    test_dependent_basis_is_rejected()
    test_restrict_scalars_keeps_weights()
    test_sum_keeps_matching_weights()
    test_restrict_scalars_is_multiplicative()
    print("freemod tests passed")
