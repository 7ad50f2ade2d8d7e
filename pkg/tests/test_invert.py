import math

import pytest
from gmpy2 import mpfr
from hypothesis import given, settings
from hypothesis import strategies as st

from ksone import smirnov
from ksone.invert import (
    ConvergenceError,
    ProbabilityPair,
    RootBracket,
    SolveReport,
    bracket_and_seed,
    bracketed_newton,
    smirnov_isf,
    smirnov_ppf,
    smirnovi,
)
from ksone.oracle import oracle_isf

ACCURATE = ["hybrid", "full"]
LADDER = list(range(2, 11)) + list(range(20, 101, 10)) + [200, 500, 1000, 2000]


class TestExamples:
    def test_n1(self):
        assert smirnovi(1, p_sf=0.3, p_cdf=0.7).x == 0.7

    @pytest.mark.parametrize("mode", ["fast64", "hybrid", "full"])
    def test_closed_form_boundary(self, mode):
        r = smirnovi(4, p_sf=4.0**-4, mode=mode)
        assert r.x == 0.75
        assert smirnov(4, 0.75, mode).sf == 4.0**-4

    @pytest.mark.parametrize("mode", ["fast64", "hybrid", "full"])
    def test_known_root(self, mode):
        assert smirnovi(10, p_sf=1.055e-6, mode=mode).x == pytest.approx(0.753671966, abs=1e-8)

    def test_tiny_probability_converges(self):
        r = smirnovi(500, p_sf=2.0**-1023)
        assert r.converged
        assert r.iterations <= 100

    def test_tiny_probability_matches_oracle_root(self):
        root = oracle_isf(500, 2.0**-1023)
        assert abs(smirnovi(500, p_sf=2.0**-1023).x - float(root)) < 1e-12

    def test_endpoints(self):
        assert smirnovi(7, p_sf=0.0).x == 1.0
        assert smirnovi(7, p_cdf=0.0).x == 0.0
        assert smirnovi(7, p_sf=1.0).x == 0.0

    def test_cdf_input(self):
        assert smirnovi(6, p_cdf=0.8).x == smirnovi(6, p_sf=0.2).x

    def test_wrappers(self):
        assert smirnov_isf(10, 1.055e-6) == smirnovi(10, p_sf=1.055e-6).x
        assert smirnov_ppf(10, 0.3) == smirnovi(10, p_cdf=0.3).x

    def test_report_type(self):
        r = smirnovi(30, p_sf=0.1)
        assert isinstance(r, SolveReport)
        assert r.converged


class TestValidation:
    @pytest.mark.parametrize("kwargs", [{"p_sf": -0.1}, {"p_sf": 1.5}, {"p_cdf": math.nan}, {}])
    def test_bad_probability(self, kwargs):
        with pytest.raises(ValueError):
            smirnovi(5, **kwargs)

    def test_inconsistent_pair(self):
        with pytest.raises(ValueError):
            ProbabilityPair.make(0.3, 0.6)

    def test_consistent_pair(self):
        assert ProbabilityPair.make(0.3, 0.7) == (0.3, 0.7)

    def test_bad_n(self):
        with pytest.raises(ValueError):
            smirnovi(0, p_sf=0.5)

    def test_iteration_cap_raises(self):
        with pytest.raises(ConvergenceError) as info:
            smirnovi(400, p_sf=2.0**-500, max_iter=2)
        assert not info.value.report.converged

    def test_iteration_cap_reports(self):
        r = smirnovi(400, p_sf=2.0**-500, max_iter=2, raise_on_failure=False)
        assert not r.converged
        assert r.iterations == 2


class TestBracket:
    def test_tail_regime(self):
        br = bracket_and_seed(10, ProbabilityPair.make(p_sf=1.055e-6))
        b0 = math.sqrt(-math.log(1.055e-6) / 20)
        assert b0 == pytest.approx(0.829517, abs=1e-6)
        assert br.b == pytest.approx(b0, rel=1e-13)
        assert br.x0 == pytest.approx(b0 - 1 / 60, rel=1e-15)
        assert br.a <= 0.753671966 <= br.b

    def test_small_x_fixed_point(self):
        p1 = (1 + 1 / 4) ** 3 / 4
        br = bracket_and_seed(4, ProbabilityPair.make(p_cdf=p1))
        assert br.x0 == pytest.approx(0.25, rel=1e-14)

    def test_median_contains_oracle_root(self):
        br = bracket_and_seed(100, ProbabilityPair.make(p_cdf=0.5))
        root = oracle_isf(100, 0.5)
        assert br.a >= 0.01 * (1 - 1e-13)
        assert br.b <= 0.99 * (1 + 1e-13)
        assert br.a <= root <= br.b

    @settings(max_examples=300)
    @given(st.sampled_from(LADDER), st.floats(1e-10, 1 - 1e-10))
    def test_ordering(self, n, p):
        pair = ProbabilityPair.make(p_sf=p)
        if p <= n**-n:
            return
        br = bracket_and_seed(n, pair)
        assert 0.0 <= br.a <= br.x0 <= br.b <= 1.0

    @settings(max_examples=60)
    @given(st.sampled_from([2, 3, 5, 10, 20, 50, 100, 200]), st.floats(1e-10, 1 - 1e-10))
    def test_contains_oracle_root(self, n, p):
        if p <= n**-n:
            return
        br = bracket_and_seed(n, ProbabilityPair.make(p_sf=p))
        root = oracle_isf(n, p)
        assert br.a <= root <= br.b

    def test_rejects_n1(self):
        with pytest.raises(ValueError):
            bracket_and_seed(1, ProbabilityPair.make(p_sf=0.5))


class TestBracketedNewton:
    def test_quadratic(self):
        r = bracketed_newton(lambda x: (x * x - 0.25, 2 * x), RootBracket(0.0, 1.0, 0.9))
        assert r.converged
        assert r.x == 0.5

    @pytest.mark.parametrize("a", [0.125, 0.375, 0.5, 0.75])
    def test_linear(self, a):
        # the first Newton step is exact for these a
        r = bracketed_newton(lambda x: (x - a, 1.0), RootBracket(0.0, 1.0, 0.5))
        assert r.converged
        assert r.iterations <= 2
        assert r.x == a

    @pytest.mark.parametrize("a", [0.1, 0.37, 0.999])
    def test_linear_two_steps_reach_the_root(self, a):
        # a rounded first step leaves an ulp-sized correction, so the
        # stopping test may need one more evaluation than the two steps
        r = bracketed_newton(lambda x: (x - a, 1.0), RootBracket(0.0, 1.0, 0.5), max_iter=2)
        assert r.x == a
        assert bracketed_newton(lambda x: (x - a, 1.0), RootBracket(0.0, 1.0, 0.5)).iterations <= 3

    def test_bad_bracket(self):
        with pytest.raises(ValueError):
            bracketed_newton(lambda x: (x, 1.0), RootBracket(1.0, 0.0, 0.5))

    def test_flat_derivative_falls_back_to_bisection(self):
        r = bracketed_newton(lambda x: (x - 0.3, 0.0), RootBracket(0.0, 1.0, 0.9))
        assert r.converged
        assert r.bisection_steps == r.iterations
        assert r.x == pytest.approx(0.3, abs=1e-15)

    def test_smirnov_slow_regime(self):
        r = smirnovi(400, p_sf=2.0**-500)
        assert r.converged
        assert r.iterations <= 30
        assert r.bisection_steps > 0


class TestInvariants:
    @pytest.mark.parametrize("mode", ACCURATE)
    @pytest.mark.parametrize("n", [2, 5, 30, 300])
    def test_monotone_output(self, mode, n):
        ps = [10 ** (-e / 8) for e in range(1, 81)]
        xs = [smirnovi(n, p_sf=p, mode=mode).x for p in ps]
        for lo, hi in zip(xs, xs[1:]):
            assert hi >= lo - math.ulp(lo)

    @pytest.mark.parametrize("mode", ACCURATE)
    @pytest.mark.parametrize("n", LADDER)
    def test_round_trip(self, mode, n):
        ps = [10 ** (-e / 2) for e in range(2, 21)] + [0.3, 0.5, 0.7]
        ps += [1 - 10 ** (-e / 2) for e in range(2, 21)]
        for p in ps:
            x = smirnovi(n, p_sf=p, mode=mode).x
            assert abs(smirnov(n, x, mode).sf - p) <= 1e-14 * p

    @pytest.mark.parametrize("mode", ACCURATE)
    @pytest.mark.parametrize("n", LADDER)
    def test_round_trip_within_conditioning(self, mode, n):
        # the residual can never beat half an ulp of x times |sf'/sf|
        ps = [10 ** (-e / 2) for e in range(2, 21)] + [0.3, 0.5, 0.7]
        ps += [1 - 10 ** (-e / 2) for e in range(2, 21)]
        for p in ps:
            x = smirnovi(n, p_sf=p, mode=mode).x
            t = smirnov(n, x, mode)
            floor = t.pdf / p * math.ulp(x)
            assert abs(t.sf - p) <= (1e-14 + floor) * p

    @pytest.mark.parametrize("n", [2, 7, 40, 1000])
    def test_endpoint_exactness(self, n):
        p = math.pow(n, -n) * (1 - 2.0**-52)
        assert smirnovi(n, p_sf=p).x == 1.0 - math.pow(p, 1.0 / n)

    @settings(max_examples=40)
    @given(st.sampled_from([3, 10, 50, 200]), st.floats(1e-8, 1 - 1e-8))
    def test_iterates_stay_in_bracket(self, n, p):
        if p <= n**-n:
            return
        pair = ProbabilityPair.make(p_sf=p)
        br = bracket_and_seed(n, pair)
        root = float(oracle_isf(n, p))
        seen = []

        def f_and_df(x):
            seen.append(x)
            t = smirnov(n, x, "full")
            return (t.sf - p, -t.pdf) if p <= 0.5 else (pair.p_cdf - t.cdf, -t.pdf)

        r = bracketed_newton(f_and_df, br, decreasing=True)
        assert r.converged
        assert all(0.0 < x < 1.0 and br.a <= x <= br.b for x in seen)
        # the oracle root stays between the tightest iterates on each side
        slack = 1e-13 * root
        above = [x for x in seen if x > root + slack]
        below = [x for x in seen if x < root - slack]
        assert all(smirnov(n, x, "full").sf < p for x in above)
        assert all(smirnov(n, x, "full").sf > p for x in below)
        assert abs(r.x - root) <= 4e-15 * root + 1e-300

    @pytest.mark.parametrize("n, p", [(10, 1.055e-6), (100, 0.5), (3, 0.9), (2000, 1e-30)])
    def test_matches_oracle_root(self, n, p):
        root = oracle_isf(n, p)
        x = smirnovi(n, p_sf=p, mode="full").x
        assert abs(mpfr(x) - root) <= 4 * math.ulp(x)


@pytest.mark.parametrize("mode", ACCURATE)
def test_tiny_probabilities_reach_the_best_binary64(mode):
    # the stress grid: every root is at least as good as both neighbours
    for n in range(100, 1001, 100):
        for k in range(100, 1001, 100):
            p = 2.0**-k
            r = smirnovi(n, p_sf=p, mode=mode)
            assert r.converged and r.iterations <= 100
            err = [abs(smirnov(n, y, mode).sf - p)
                   for y in (r.x, math.nextafter(r.x, 0.0), math.nextafter(r.x, 1.0))]
            assert err[0] <= min(err[1:]), (n, k)
