import io
import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from qoecost.errors import DomainError, PricingFormatError
from qoecost.power_fit import PowerLaw
from qoecost.pricing import (
    PUBLISHED_COST_MODEL,
    UK_PRICING,
    CostModel,
    PricingTable,
    bandwidth_from_cost,
    cost_from_bandwidth,
    load_pricing,
    mos_from_cost,
    uk_pricing_path,
)
from qoecost.tcp_qoe import TcpScenario, mos_from_bandwidth

BASE = TcpScenario(n_sources=50, ack_ratio=1, rate_reduction=0.5, rtt=0.1, buffer_len=10)


def bisect_inverse(model, cost, lo=1e-9, hi=1e9):
    # forward map is increasing for a > 0, b > 0; bisect in log space
    lo, hi = math.log(lo), math.log(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cost_from_bandwidth(model, math.exp(mid)) < cost:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


def composed_mos(cost, n=50, q=10.0, rtt=0.1, b=1, m=0.5):
    bw = (cost / 27.13) ** (1 / 0.0986)
    c = bw * 1e6 / 12000
    p = min(1.0, 32 * n * n / (3 * b * (m + 1) ** 2 * (c * rtt + q) ** 2))
    return 1.46 * math.exp(-44 * p) + 4.14 * math.exp(-2.9 * p)


class TestCostModel:
    def test_at_unit_bandwidth(self):
        assert cost_from_bandwidth(PUBLISHED_COST_MODEL, 1) == 27.13

    def test_at_10(self):
        mpmath.mp.dps = 30
        exact = float(mpmath.mpf("27.13") * mpmath.power(10, mpmath.mpf("0.0986")))
        assert exact == pytest.approx(34.05, abs=0.01)
        assert cost_from_bandwidth(PUBLISHED_COST_MODEL, 10) == pytest.approx(exact, rel=1e-14)

    def test_at_100(self):
        assert cost_from_bandwidth(PUBLISHED_COST_MODEL, 100) == pytest.approx(43, abs=1)

    @pytest.mark.parametrize("bad", [0, -1, math.nan, math.inf])
    def test_rejects_bandwidth(self, bad):
        with pytest.raises(DomainError):
            cost_from_bandwidth(PUBLISHED_COST_MODEL, bad)

    def test_rejects_nonpositive_a(self):
        with pytest.raises(DomainError):
            CostModel(PowerLaw(0, 0.1))

    def test_rejects_zero_b(self):
        with pytest.raises(DomainError):
            CostModel(PowerLaw(1, 0))


class TestInverse:
    def test_at_a(self):
        assert bandwidth_from_cost(PUBLISHED_COST_MODEL, 27.13) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("cost, expected, tol", [(38, 30.5, 0.1), (45, 169.4, 0.5)])
    def test_against_bisection(self, cost, expected, tol):
        oracle = bisect_inverse(PUBLISHED_COST_MODEL, cost)
        assert oracle == pytest.approx(expected, abs=tol)
        assert bandwidth_from_cost(PUBLISHED_COST_MODEL, cost) == pytest.approx(oracle, rel=1e-9)

    def test_overflow_is_domain_error(self):
        with pytest.raises(DomainError, match="representable"):
            bandwidth_from_cost(CostModel(PowerLaw(0.1, 0.01)), 1000)

    @pytest.mark.parametrize("bad", [0, -5, math.nan])
    def test_rejects_cost(self, bad):
        with pytest.raises(DomainError):
            bandwidth_from_cost(PUBLISHED_COST_MODEL, bad)

    @settings(max_examples=300)
    @given(a=st.floats(0.01, 1000), b=st.floats(0.01, 2), bw=st.floats(1, 1e4))
    def test_round_trip(self, a, b, bw):
        m = CostModel(PowerLaw(a, b))
        assert bandwidth_from_cost(m, cost_from_bandwidth(m, bw)) == pytest.approx(bw, rel=1e-9)

    @given(a=st.floats(0.1, 100), b=st.floats(0.05, 2), c1=st.floats(0.1, 1000), c2=st.floats(0.1, 1000))
    def test_monotone(self, a, b, c1, c2):
        m = CostModel(PowerLaw(a, b))
        if c1 < c2 and max(c1, c2) / a < 1e10 ** b:
            assert bandwidth_from_cost(m, c1) <= bandwidth_from_cost(m, c2)
            assert cost_from_bandwidth(m, c1) <= cost_from_bandwidth(m, c2)


class TestMosFromCost:
    def test_cost_38(self):
        assert composed_mos(38) == pytest.approx(2.53, abs=0.02)
        m = mos_from_cost(38, PUBLISHED_COST_MODEL, BASE)
        assert m.value == pytest.approx(composed_mos(38), rel=1e-12)
        assert abs(m.value - 2) <= 0.75

    def test_cost_45(self):
        m = mos_from_cost(45, PUBLISHED_COST_MODEL, BASE)
        assert m.value == pytest.approx(5.20, abs=0.02)
        assert m.clamped_value == 5.0

    def test_round_trip_fixed_buffer_row(self):
        cost = cost_from_bandwidth(PUBLISHED_COST_MODEL, 15)
        assert mos_from_cost(cost, PUBLISHED_COST_MODEL, BASE).value == pytest.approx(0.628012, rel=1e-5)

    @given(bw=st.floats(1, 2000), n=st.integers(1, 1000))
    def test_composition(self, bw, n):
        s = TcpScenario(n_sources=n)
        via_cost = mos_from_cost(cost_from_bandwidth(PUBLISHED_COST_MODEL, bw), PUBLISHED_COST_MODEL, s).value
        assert via_cost == pytest.approx(mos_from_bandwidth(bw, s).value, abs=1e-9)

    @given(cost=st.floats(20, 60))
    def test_source_ordering(self, cost):
        mos = {n: mos_from_cost(cost, PUBLISHED_COST_MODEL, TcpScenario(n_sources=n)).value for n in (50, 80, 500)}
        assert mos[500] <= mos[80] <= mos[50]

    @given(c1=st.floats(40, 60), dc=st.floats(0.01, 5))
    def test_increasing_in_cost(self, c1, dc):
        assert mos_from_cost(c1 + dc, PUBLISHED_COST_MODEL, BASE).value > mos_from_cost(c1, PUBLISHED_COST_MODEL, BASE).value


class TestLoadPricing:
    def test_bundled_uk_table(self):
        t = load_pricing(uk_pricing_path())
        assert t.n == 9
        assert t.samples == UK_PRICING.samples

    def test_stream(self):
        t = load_pricing(io.StringIO("bandwidth_mbps,cost\n1,2\n3,4\n"))
        assert t.samples == ((1.0, 2.0), (3.0, 4.0))

    def test_empty(self):
        with pytest.raises(PricingFormatError, match="need at least 2 samples"):
            load_pricing(io.StringIO(""))

    def test_header_only(self):
        with pytest.raises(PricingFormatError, match="need at least 2 samples"):
            load_pricing(io.StringIO("bandwidth_mbps,cost\n"))

    def test_shuffled_rows_name_first_offender(self):
        text = "bandwidth_mbps,cost\n10,20\n50,40\n30,37\n100,42\n"
        with pytest.raises(PricingFormatError, match=r"line 4: bandwidth 30 is not greater than previous 50"):
            load_pricing(io.StringIO(text))

    def test_duplicate_bandwidth(self):
        with pytest.raises(PricingFormatError, match="line 3"):
            load_pricing(io.StringIO("bandwidth_mbps,cost\n10,20\n10,21\n"))

    @pytest.mark.parametrize(
        "body, match",
        [
            ("bandwidth_mbps,cost\n10,abc\n20,3\n", "line 2: not a number"),
            ("bandwidth_mbps,cost\n10,20,30\n20,3\n", "line 2: expected 2 columns"),
            ("bw,cost\n10,20\n", "line 1: expected header"),
            ("bandwidth_mbps,cost\n10,-1\n20,3\n", "line 2: cost must be positive"),
            ("bandwidth_mbps,cost\n0,1\n20,3\n", "line 2: bandwidth must be positive"),
        ],
    )
    def test_errors_carry_line_numbers(self, body, match):
        with pytest.raises(PricingFormatError, match=match):
            load_pricing(io.StringIO(body))

    def test_missing_file(self, tmp_path):
        with pytest.raises(PricingFormatError):
            load_pricing(tmp_path / "nope.csv")

    def test_table_invariants(self):
        with pytest.raises(PricingFormatError):
            PricingTable(((10, 20), (5, 30)))
