from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from solovay_bench.constructions import piecewise_linear_R
from solovay_bench.kernel import Budget, FuelExhausted, Interval, PreconditionError, geometric_leftce, pow2
from solovay_bench.randomness import (
    FINITE,
    EntryState,
    Hit,
    SolovayTest,
    certified_hit,
    check_fails_on,
    check_hit_propagation,
    check_measure,
    default_rho,
    interval_list_test,
    nested_test,
    tolerance_query_g,
    total_measure_gap,
    transform_test,
    transform_total_test,
)
from solovay_bench.type2 import AffineMachine
from solovay_bench.witnesses import RealName, RWitness, Verdict

B = Budget(fuel=20_000, depth=12)


def reals():
    a, b = geometric_leftce(F(1, 4)), geometric_leftce(F(1, 2))
    alpha = RealName("alpha", lower=a, upper_bounds=lambda k: F(1, 4))
    beta = RealName("beta", lower=b, upper_bounds=lambda k: F(1, 2))
    return a, b, alpha, beta


def source_test(count=12):
    _, b, _, _ = reals()
    return interval_list_test([Interval(b[n + 2] - pow2(-(n + 3)), b[n + 2] + pow2(-(n + 3)))
                               for n in range(count)])


def half_witness(bound=F(1)):
    return RWitness(AffineMachine(0, F(1, 2)), 2, kind="cl-local", bound=bound, name="half")


intervals = st.lists(
    st.tuples(st.integers(0, 255), st.integers(0, 64)).map(
        lambda t: Interval(F(t[0], 256), F(t[0], 256) + F(t[1], 1024))),
    min_size=1, max_size=12)


class TestSourceTests:
    def test_list_test_measure_and_tail(self):
        s = interval_list_test([Interval(F(0), F(1, 4)), Interval(F(1, 2), F(5, 8))])
        assert s.declared_bound == F(3, 8)
        assert s.tail(1) == F(1, 8)
        with pytest.raises(FuelExhausted):
            s.interval(2)

    def test_partial_measure_guarded_by_declared_bound(self):
        s = SolovayTest(lambda n: Interval(F(0), F(1, 2)), F(1), FINITE)
        with pytest.raises(PreconditionError):
            s.partial_measure(3)

    def test_computable_kind_needs_tail(self):
        with pytest.raises(ValueError):
            SolovayTest(lambda n: Interval(F(0), F(0)), 1, "computable-measure")

    def test_nested_test_holds_its_center(self):
        x = RealName.rational("x", F(1, 3))
        s = nested_test(x)
        for n in range(10):
            assert s.interval(n).contains(F(1, 3))
        assert s.tail(0) == 2

    def test_source_fails_on_beta(self):
        _, _, _, beta = reals()
        rep = check_fails_on(source_test(), beta, B)
        assert rep.hits == 12 and rep.misses == 0

    def test_certified_hit_three_valued(self):
        x = RealName("x", lower=geometric_leftce(F(1, 2)))
        assert certified_hit(Interval(F(0), F(1, 8)), x, 4) is Hit.MISS
        assert certified_hit(Interval(F(1, 4), F(1)), x, 4) is Hit.UNKNOWN
        assert certified_hit(None, x, 4) is Hit.UNKNOWN


class TestTransform:
    def test_query_uses_next_output_index(self):
        r = tolerance_query_g(half_witness(), F(1, 2), 3, B)
        assert r.tolerance_index == 4 and r.value == F(1, 4)

    def test_measures_and_propagation(self):
        a, b, alpha, beta = reals()
        f = piecewise_linear_R(a, b, c=2)
        t = transform_test(source_test(), f, B)
        for e in t.entries:
            assert e.interval.measure == 2 * (2 * e.source.measure + pow2(-e.n))
        assert check_measure(t).verdict is Verdict.PASS
        assert check_hit_propagation(t, alpha, beta, B).verdict is Verdict.PASS
        assert t.partial_measure() <= 4 + 2 * 2 * source_test().declared_bound

    def test_undefined_entries_reported(self):
        a, b, _, _ = reals()
        s = interval_list_test([Interval(F(3, 4), F(7, 8))])
        t = transform_test(s, piecewise_linear_R(a, b, c=2), Budget(fuel=500, depth=4))
        assert t.entries[0].state in (EntryState.UNDEFINED, EntryState.UNKNOWN)
        assert t.entries[0].interval is None

    def test_total_needs_cl_local(self):
        a, b, _, _ = reals()
        with pytest.raises(PreconditionError):
            transform_total_test(source_test(), piecewise_linear_R(a, b, c=2), F(3, 4), B)

    def test_total_needs_rho_below_bound(self):
        with pytest.raises(PreconditionError):
            transform_total_test(source_test(), half_witness(F(3, 4)), F(3, 4), B)

    def test_total_needs_computable_source(self):
        s = SolovayTest(lambda n: Interval(F(0), F(0)), 1, FINITE)
        with pytest.raises(PreconditionError):
            transform_total_test(s, half_witness(), F(3, 4), B)

    def test_interval_above_rho_becomes_point(self):
        s = interval_list_test([Interval(F(7, 8), F(15, 16))])
        t = transform_total_test(s, half_witness(), F(3, 4), B)
        assert t.entries[0].source == Interval(F(3, 4), F(3, 4))

    def test_total_closed_form_and_gap(self):
        _, _, alpha, beta = reals()
        w = half_witness()
        rho = default_rho(beta, w, B.depth)
        assert rho == F(3, 4)
        t = transform_total_test(source_test(), w, rho, B)
        assert t.undefined == 0 and t.unknown == 0
        assert check_measure(t).verdict is Verdict.PASS
        gap, tail = total_measure_gap(t)
        assert gap <= tail
        assert check_hit_propagation(t, alpha, beta, B).verdict is Verdict.PASS

    @given(intervals)
    def test_total_partial_measure_identity(self, ivs):
        s = interval_list_test(ivs)
        t = transform_total_test(s, half_witness(), F(3, 4), B)
        N = len(t.entries)
        assert t.partial_measure() == 4 * (1 - pow2(-N)) + 4 * t.source_measure()

    @given(intervals)
    def test_open_transform_under_bound(self, ivs):
        w = RWitness(AffineMachine(0, F(1, 2)), 2, kind="cl-open")
        t = transform_test(interval_list_test(ivs), w, B)
        assert t.partial_measure() <= t.declared_bound()
        assert all(r[1] <= r[2] for r in t.measure_rows())
