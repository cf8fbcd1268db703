from fractions import Fraction as F
from itertools import islice

import pytest
from hypothesis import given
from hypothesis import strategies as st

from instances import geometric, paired_instances
from solovay_bench.constructions import (
    PairedApproximations,
    avoiding_bisection,
    build_prop4_instance,
    certified_domain,
    extraction_is_leftce,
    interp_Q_witness,
    leftce_from_monotone,
    leftce_from_R,
    monotone_from_leftce,
    piecewise_linear_R,
)
from solovay_bench.kernel import (
    Budget,
    ConstructionError,
    Interval,
    PreconditionError,
    geometric_leftce,
    pow2,
    table_leftce,
)
from solovay_bench.type2 import evaluate
from solovay_bench.witnesses import RealName, Verdict, check_monotone, check_solovay_condition

B16 = Budget(fuel=10**9, depth=16)


def quarter_half():
    return geometric_leftce(F(1, 4)), geometric_leftce(F(1, 2))


class TestDomain:
    def test_starts_at_zero_without_repeats(self):
        pts = list(islice(certified_domain(geometric_leftce(F(1, 2))), 300))
        assert pts[0] == 0
        assert len(set(pts)) == len(pts)

    def test_every_point_certified_below(self):
        b = geometric_leftce(F(1, 2))
        assert all(q < F(1, 2) for q in islice(certified_domain(b), 500))

    def test_dense_levels_appear(self):
        pts = set(islice(certified_domain(geometric_leftce(F(1, 2))), 400))
        assert {F(k, 16) for k in range(8)} <= pts


class TestInterpolation:
    def test_pairing_failure_detected(self):
        a, b = geometric_leftce(F(1, 2)), geometric_leftce(F(1, 4))
        with pytest.raises(ConstructionError):
            PairedApproximations(a, b, 1)

    def test_hits_breakpoints_exactly(self):
        a, b = quarter_half()
        g = interp_Q_witness(PairedApproximations(a, b, 1))
        for n in range(8):
            assert g(b[n]) == a[n]

    def test_chord_midpoint(self):
        a, b = quarter_half()
        g = interp_Q_witness(PairedApproximations(a, b, 1))
        # between (1/4, 1/8) and (3/8, 3/16)
        assert g(F(5, 16)) == F(5, 32)

    def test_solovay_with_c_equal_d(self):
        a, b = quarter_half()
        g = interp_Q_witness(PairedApproximations(a, b, 1))
        alpha = RealName("alpha", lower=a, upper_bounds=lambda k: F(1, 4))
        beta = RealName("beta", lower=b, upper_bounds=lambda k: F(1, 2))
        assert check_solovay_condition(g, alpha, beta, B16, slack_value=pow2(-14)).passed

    @given(st.integers(0, 10_000))
    def test_random_instances_strictly_increasing(self, seed):
        p, alpha, beta = paired_instances(1, seed)[0]
        g = interp_Q_witness(p)
        pts = sorted(set(islice(certified_domain(p.b), 40)))
        vals = [g(q) for q in pts]
        assert all(x < y for x, y in zip(vals, vals[1:]))
        assert all(v < alpha for v in vals)


class TestStepWitness:
    def test_backward_step_values(self):
        a, b = quarter_half()
        g = monotone_from_leftce(a, b, "backward")
        assert g(F(0)) == 0
        assert g(F(1, 4)) == F(1, 8)
        assert g(F(3, 10)) == F(3, 16)

    def test_streams_must_start_at_zero(self):
        a = table_leftce([F(1, 8), F(1, 4)])
        with pytest.raises(PreconditionError):
            monotone_from_leftce(a, geometric_leftce(F(1, 2)))

    def test_is_monotone(self):
        a, b = quarter_half()
        g = monotone_from_leftce(a, b, "forward")
        assert check_monotone(g, Budget(fuel=2_000, depth=8)).verdict is Verdict.PASS


class TestExtraction:
    def test_monotone_backward_recovers_beta(self):
        a, b = quarter_half()
        e = leftce_from_monotone(monotone_from_leftce(a, b), a, "backward", B16, 12)
        assert e.complete and extraction_is_leftce(e)
        assert F(1, 2) - e.prefix[-1] <= pow2(-11)

    def test_monotone_forward_recovers_alpha(self):
        a, b = quarter_half()
        e = leftce_from_monotone(monotone_from_leftce(a, b), b, "forward", B16, 12)
        assert extraction_is_leftce(e)
        assert F(1, 4) - e.prefix[-1] <= pow2(-12)

    def test_real_forward_recovers_alpha(self):
        a, b = quarter_half()
        e = leftce_from_R(piecewise_linear_R(a, b), b, "forward", B16, 12)
        assert e.complete and extraction_is_leftce(e)
        assert all(x < F(1, 4) for x in e.prefix)

    def test_real_backward_stays_below_beta(self):
        a, b = quarter_half()
        e = leftce_from_R(piecewise_linear_R(a, b), a, "backward", B16, 6)
        assert e.complete and extraction_is_leftce(e)
        assert all(x < F(1, 2) for x in e.prefix)

    def test_fuel_exhaustion_is_incomplete_not_error(self):
        a, b = quarter_half()
        e = leftce_from_R(piecewise_linear_R(a, b), a, "backward", Budget(fuel=50, depth=8), 6)
        assert e.inconclusive
        assert "fuel exhausted" in e.note

    def test_unknown_direction(self):
        a, b = quarter_half()
        with pytest.raises(ValueError):
            leftce_from_monotone(monotone_from_leftce(a, b), a, "sideways", B16, 2)


class TestPiecewiseLinear:
    def test_constant_is_next_power_of_two(self):
        a, b = quarter_half()
        assert piecewise_linear_R(a, b).c == 1
        a3 = geometric(F(3, 4), F(1, 2))
        assert piecewise_linear_R(a3, b).c == 2

    def test_matches_interp_on_dyadics(self):
        a, b = quarter_half()
        f = piecewise_linear_R(a, b)
        g = interp_Q_witness(PairedApproximations(a, b, 1))
        for q in (F(0), F(1, 8), F(5, 16), F(7, 16)):
            assert evaluate(f.machine, q, 10, B16).value == g(q)


class TestSeparationInstance:
    def test_partial_measure_closed_form(self):
        inst = build_prop4_instance(10)
        assert inst.partial_measure == (1 - pow2(-20)) / 3

    def test_first_intervals(self):
        inst = build_prop4_instance(3)
        assert inst.interval(1) == Interval(F(0), F(1, 4))
        assert inst.interval(2) == Interval(F(1, 2), F(9, 16))

    def test_beta_avoids_every_interval(self):
        inst = build_prop4_instance(10)
        lo, hi = inst.beta.enclosure(inst.beta_depth)
        assert all(hi < I.lo or I.hi < lo for I in inst.intervals)

    def test_not_monotone(self):
        inst = build_prop4_instance(10)
        rep = check_monotone(inst.witness, Budget(fuel=1_000, depth=10), samples=inst.qs)
        assert rep.verdict is Verdict.FAIL

    def test_bisection_is_effective(self):
        approx = avoiding_bisection([Interval(F(0), F(1, 4))])
        for k in range(1, 20):
            assert approx.stage(k).measure == pow2(-k)
            assert approx.stage(k - 1).contains_interval(approx.stage(k))

    def test_depth_must_be_positive(self):
        with pytest.raises(PreconditionError):
            build_prop4_instance(0)
