from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from instances import paired_instances
from solovay_bench.constructions import PairedApproximations, interp_Q_witness
from solovay_bench.kernel import Budget, FuelExhausted, PreconditionError, geometric_leftce, pow2
from solovay_bench.pipeline import (
    CLAIMS,
    Pipeline,
    PipelineConfig,
    brute_force_chain,
    check_claims,
    greatest_chain,
    h_machine,
    minimal_K,
    search_P,
)
from solovay_bench.witnesses import RealName, Verdict, affine_witness, table_witness

B = Budget(fuel=10**7, depth=8)
WORKED = [F(0), F(2, 5), F(7, 10)]


def interp_pipeline(cfg=None):
    a, b = geometric_leftce(F(1, 4)), geometric_leftce(F(1, 2))
    w = interp_Q_witness(PairedApproximations(a, b, 1))
    return Pipeline(w, cfg or PipelineConfig(w.c))


def reference_f(pipe, q, n):
    """min over the chain of g~(p) + d(q - p), straight from the definition."""
    chain = pipe.search_P(q, n)
    return min(pipe.gtilde(i) + pipe.cfg.d * (q - v) for i, v in zip(chain.indices, chain.values))


def reference_ftilde(pipe, q, n):
    chain = pipe.search_P(q, n)
    return max([reference_f(pipe, v, n) for v in chain.values] + [reference_f(pipe, q, n)])


prefixes = st.lists(st.integers(1, 31), max_size=11, unique=True).map(
    lambda ks: [F(0)] + [F(k, 32) for k in ks])


class TestConfig:
    @pytest.mark.parametrize("c, K", [(1, 2), (F(3, 2), 2), (4, 3), (F(9, 2), 3), (8, 4)])
    def test_minimal_K(self, c, K):
        assert minimal_K(c) == K

    def test_d_must_exceed_c(self):
        with pytest.raises(PreconditionError):
            PipelineConfig(F(2), K=1)

    def test_total_flag(self):
        assert PipelineConfig(1, domain_bound="one").total
        assert not PipelineConfig(1).total


class TestChains:
    def test_worked_example_chain(self):
        cfg = PipelineConfig(F(1, 2), K=1)
        chain = search_P(F(9, 10), 1, cfg, B, enumeration=WORKED)
        assert chain.values == tuple(WORKED) and chain.t == 2

    def test_greatest_chain_gap_rule(self):
        assert greatest_chain(WORKED, F(9, 10), 1) == tuple(WORKED)
        assert greatest_chain([F(0), F(7, 10)], F(9, 10), 1) is None

    def test_prefix_running_out_is_exhaustion(self):
        cfg = PipelineConfig(1)
        with pytest.raises(FuelExhausted):
            search_P(F(9, 10), 3, cfg, B, enumeration=WORKED)

    def test_enumeration_must_start_at_zero(self):
        cfg = PipelineConfig(1)
        with pytest.raises(PreconditionError):
            search_P(F(1, 10), 1, cfg, B, enumeration=[F(1, 2), F(0)])

    @given(prefixes, st.integers(0, 31), st.integers(1, 4))
    def test_matches_subset_oracle(self, prefix, k, n):
        q = F(k, 32) + F(1, 64)
        expected = brute_force_chain(prefix, q, n)
        cfg = PipelineConfig(1)
        if expected is None:
            with pytest.raises(FuelExhausted):
                search_P(q, n, cfg, B, enumeration=prefix)
        else:
            chain = search_P(q, n, cfg, B, enumeration=prefix)
            assert (chain.t, chain.values) == expected

    @given(st.integers(0, 120), st.integers(0, 120), st.integers(1, 6))
    def test_chains_nest(self, i, j, n):
        p, q = sorted((F(i, 256), F(j, 256)))
        pipe = interp_pipeline()
        Pp, Pq = pipe.search_P(p, n), pipe.search_P(q, n)
        assert Pp.t <= Pq.t
        assert set(Pp.values) <= set(Pq.values)


class TestValues:
    def test_worked_example_values(self):
        w = table_witness({F(0): F(1, 10), F(2, 5): F(1, 2), F(7, 10): F(3, 5)}, c=F(1, 2))
        pipe = Pipeline(w, PipelineConfig(F(1, 2), K=1), enumeration=lambda: iter(WORKED))
        assert pipe.f(F(9, 10), 1) == 1
        assert pipe.ftilde(F(9, 10), 1) == F(11, 10)

    def test_gtilde_is_running_max(self):
        w = table_witness({F(0): F(1, 10), F(3, 5): F(1, 2), F(3, 10): F(1, 5)})
        pipe = Pipeline(w, PipelineConfig(1), enumeration=lambda: iter([F(0), F(3, 5), F(3, 10)]))
        assert [pipe.gtilde(i) for i in range(3)] == [F(1, 10), F(1, 2), F(1, 5)]

    @given(st.integers(0, 127), st.integers(1, 6))
    def test_f_and_ftilde_match_definition(self, k, n):
        q = F(k, 256)
        pipe = interp_pipeline()
        assert pipe.f(q, n) == reference_f(pipe, q, n)
        assert pipe.ftilde(q, n) == reference_ftilde(pipe, q, n)

    @given(st.integers(0, 127), st.integers(1, 6))
    def test_ftilde_dominates_f(self, k, n):
        pipe = interp_pipeline()
        assert pipe.ftilde(F(k, 256), n) >= pipe.f(F(k, 256), n)

    def test_stage_row(self):
        q, n, size, f, ft = interp_pipeline().stage_row(F(1, 4), 3)
        assert (q, n) == (F(1, 4), 3) and size >= 1 and ft >= f


class TestClaims:
    def test_strict_lipschitz_step_can_be_an_equality(self):
        # p lies in P(q, n) and is the minimizer for both f(p, n) and f(q, n)
        pipe = interp_pipeline()
        q, p, n = F(27, 128), F(13, 64), 6
        assert pipe.f(q, n) - pipe.f(p, n) == pipe.cfg.d * (q - p)

    def test_claims_on_interp_instance(self):
        a, b = geometric_leftce(F(1, 4)), geometric_leftce(F(1, 2))
        pipe = interp_pipeline()
        alpha = RealName("alpha", lower=a, upper_bounds=lambda k: F(1, 4))
        beta = RealName("beta", lower=b, upper_bounds=lambda k: F(1, 2))
        tuples = [(F(k + 3, 128), F(k, 128), m, m + 2) for k in range(0, 60, 7) for m in (3, 5)]
        reps = check_claims(pipe, alpha, beta, tuples, Budget(fuel=10**7, depth=16))
        for key in CLAIMS:
            if key != "lipschitz-step":
                assert reps[key].verdict is Verdict.PASS, reps[key].line()
        assert reps["lipschitz-step-weak"].verdict is Verdict.PASS

    @given(st.integers(0, 10_000))
    def test_monotone_bounds_on_random_instances(self, seed):
        p, alpha, beta = paired_instances(1, seed)[0]
        w = interp_Q_witness(p)
        pipe = Pipeline(w, PipelineConfig(w.c))
        q = beta / 2
        for n in (3, 5):
            # for nondecreasing g, f~ overshoots g(max P) by at most d 2^-n
            top = max(pipe.search_P(q, n).values)
            assert 0 <= pipe.ftilde(q, n) - w(top) <= pipe.cfg.d * pow2(-n)


class TestHMachine:
    def test_kinds(self):
        a, b = geometric_leftce(F(1, 4)), geometric_leftce(F(1, 2))
        h = h_machine(interp_Q_witness(PairedApproximations(a, b, 1)))
        assert h.kind == "cl-open" and h.c == 4
        assert h.machine.nondecreasing
        total = h_machine(affine_witness(0, F(1, 2)))
        assert total.kind == "cl-local" and total.bound == 1

    def test_rejects_constant_at_d(self):
        w = affine_witness(0, F(1, 2), c=4)
        with pytest.raises(PreconditionError):
            h_machine(w, PipelineConfig(1))

    def test_stage_offset(self):
        h = h_machine(affine_witness(0, F(1, 2)))
        assert h.machine.stage(1) == 1 + h.machine.K + 4
