"""
Tests for unit splitting, variable exclusion and equivalence checking
"""
import pytest

from mf import MFMorphism, mf_cone, mf_direct_sum, mf_koszul_pair, mf_tensor, mf_validate, mf_zero
from polyring import IneligibleEliminationError, PotentialMismatchError, Ring
from reduce import (
    UNIT_SPLIT,
    VARIABLE_EXCLUSION,
    DefinitelyDistinct,
    NotFound,
    certificate_from_dict,
    certificate_to_dict,
    eliminate_variable,
    eliminate_variables,
    equiv_check,
    format_certificate,
    format_trace,
    invariant_profile,
    oracle_equivalence_search,
    parse_certificate,
    parse_trace,
    profile_difference,
    reduce_cached,
    split_contractibles,
    trace_from_dict,
    trace_to_dict,
)
from simple_cache import SimpleCache, get_cache_manager

XY = Ring(("x", "y"))
XY_GRADED = Ring(("x", "y"), (1, 1))
UXY = Ring(("u", "x", "y"))


def _with_unit_summand():
    return mf_direct_sum(mf_koszul_pair(XY, "x", "y"), mf_koszul_pair(XY, "1", "x*y"))


def _excludable():
    # potential x*u + (u - y)*(-x) = x*y does not involve u
    return mf_tensor(mf_koszul_pair(UXY, "x", "u"), mf_koszul_pair(UXY, "u - y", "-x"))


def test_cone_of_identity_splits_to_zero():
    k = mf_koszul_pair(XY, "x", "y")
    result, trace = split_contractibles(mf_cone(MFMorphism.identity(k)))
    assert result.is_zero_object()
    assert len(trace) == 2
    assert all(step.kind == UNIT_SPLIT for step in trace.steps)
    assert trace.verify().ok


def test_split_removes_unit_summand():
    m = _with_unit_summand()
    result, trace = split_contractibles(m)
    assert result == mf_koszul_pair(XY, "x", "y")
    assert trace.certificate(m).verify().ok


def test_minimal_factorization_is_untouched():
    k = mf_koszul_pair(XY, "x", "y")
    result, trace = split_contractibles(k)
    assert result == k
    assert len(trace) == 0


def test_reduce_cached_hits_on_second_call():
    cache = get_cache_manager()
    cache.clear_cache()
    m = _with_unit_summand()
    first = reduce_cached(m)
    second = reduce_cached(m)
    assert first is second
    assert cache.get_cache_stats()["hits"] == 1


def test_cache_evicts_expired_and_oldest_entries():
    stale = SimpleCache(cache_ttl=0, max_entries=8)
    stale.store_reduction("k", ("m", "trace"))
    assert stale.get_reduction("k") is None
    assert stale.get_cache_stats()["total_entries"] == 0
    small = SimpleCache(cache_ttl=3600, max_entries=2)
    for key in ("a", "b", "c"):
        small.store_reduction(key, (key, None))
    assert list(small.cache) == ["b", "c"]
    assert small.get_reduction("a") is None
    assert small.get_cache_stats()["evictions"] == 1
    assert small.purge_expired() == 0


def test_exclusion_substitutes_pivot_value():
    result, trace = eliminate_variable(_excludable(), "u")
    assert result == mf_koszul_pair(XY, "x", "y")
    assert len(trace) == 1
    step = trace.steps[0]
    assert step.kind == VARIABLE_EXCLUSION
    assert step.location.startswith("u -> y")
    assert step.verify().ok


def test_exclusion_refuses_potential_with_variable():
    with pytest.raises(IneligibleEliminationError):
        eliminate_variable(mf_koszul_pair(UXY, "u", "x"), "u")


def test_exclusion_needs_linear_pivots():
    with pytest.raises(IneligibleEliminationError):
        eliminate_variable(mf_koszul_pair(UXY, "u^2", "0"), "u")


def test_exclusion_of_zero_object():
    result, trace = eliminate_variable(mf_zero(UXY, UXY.poly("x*y")), "u")
    assert result.ring == XY
    assert result.is_zero_object()
    assert len(trace) == 0


def test_eliminate_variables_chains_steps():
    result, trace = eliminate_variables(_excludable(), ["u"])
    assert mf_validate(result).ok
    assert result.potential == XY.poly("x*y")
    assert trace.verify().ok


def test_equivalence_through_reduction():
    cert = equiv_check(_with_unit_summand(), mf_koszul_pair(XY, "x", "y"))
    assert not isinstance(cert, (NotFound, DefinitelyDistinct))
    assert cert.verify().ok


def test_negative_control_is_definitely_distinct():
    m = mf_koszul_pair(XY_GRADED, "x", "y", 0)
    n = mf_koszul_pair(XY_GRADED, "y", "x", 0)
    result = equiv_check(m, n, 3)
    assert isinstance(result, DefinitelyDistinct)
    assert result.reason
    assert not oracle_equivalence_search(m, n, 2)


def test_weight_distribution_separates_minimal_factorizations():
    m = mf_koszul_pair(XY_GRADED, "x", "y", 0)
    n = mf_koszul_pair(XY_GRADED, "-x", "-y", 1)
    assert invariant_profile(m)["weights"] == ((0,), (0,))
    assert invariant_profile(n)["weights"] == ((1,), (1,))
    assert "weight" in profile_difference(m, n)
    result = equiv_check(m, n, 2)
    assert isinstance(result, DefinitelyDistinct)
    assert "weight" in result.reason


def test_ungraded_search_reports_bound():
    result = equiv_check(mf_koszul_pair(XY, "x", "y"), mf_koszul_pair(XY, "y", "x"), 1)
    assert result == NotFound(1)


def test_equivalence_needs_equal_potentials():
    with pytest.raises(PotentialMismatchError):
        equiv_check(mf_koszul_pair(XY, "x", "y"), mf_koszul_pair(XY, "x", "x"))


def test_oracle_accepts_equal_objects():
    k = mf_koszul_pair(XY, "x", "y")
    assert oracle_equivalence_search(k, k, 1)
    assert oracle_equivalence_search(_with_unit_summand(), k, 1)


def test_certificate_text_and_json():
    cert = equiv_check(_with_unit_summand(), mf_koszul_pair(XY, "x", "y"))
    text = format_certificate(cert)
    assert text.startswith("source.ring: x y")
    assert parse_certificate(text).verify().ok
    assert certificate_from_dict(certificate_to_dict(cert)).verify().ok


def test_trace_text_and_json():
    _, trace = eliminate_variables(_excludable(), ["u"])
    text = format_trace(trace)
    assert text.startswith(f"steps: {len(trace)}\n")
    parsed = parse_trace(text)
    assert len(parsed) == len(trace)
    assert parsed.verify().ok
    assert trace_from_dict(trace_to_dict(trace)).verify().ok


if __name__ == "__main__":
    test_cone_of_identity_splits_to_zero()
    test_split_removes_unit_summand()
    test_minimal_factorization_is_untouched()
    test_reduce_cached_hits_on_second_call()
    test_cache_evicts_expired_and_oldest_entries()
    test_exclusion_substitutes_pivot_value()
    test_exclusion_refuses_potential_with_variable()
    test_exclusion_needs_linear_pivots()
    test_exclusion_of_zero_object()
    test_eliminate_variables_chains_steps()
    test_equivalence_through_reduction()
    test_negative_control_is_definitely_distinct()
    test_weight_distribution_separates_minimal_factorizations()
    test_ungraded_search_reports_bound()
    test_equivalence_needs_equal_potentials()
    test_oracle_accepts_equal_objects()
    test_certificate_text_and_json()
    test_trace_text_and_json()
    print("reduce tests passed")
