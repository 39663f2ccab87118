import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualstock.timeseries import (
    CsvFormat,
    PremiumSeries,
    PriceSeries,
    align_series,
    daily_returns,
    load_ohlc_csv,
    mid_price,
    premium_series,
    premium_summary,
    render_summary_csv,
    summary_to_dict,
)

from _oracles import sorted_quantile


def make_series(mids, ticker="T", start=dt.date(2020, 1, 1)):
    dates = tuple(start + dt.timedelta(days=i) for i in range(len(mids)))
    mids = np.asarray(mids, dtype=float)
    return PriceSeries(ticker=ticker, dates=dates, high=mids, low=mids)


class TestMidPrice:
    def test_arithmetic_mean(self):
        assert mid_price(10.0, 8.0) == 9.0

    def test_identity(self):
        assert mid_price(5.0, 5.0) == 5.0

    def test_hand_value(self):
        assert mid_price(2.34, 2.10) == pytest.approx(2.22, abs=1e-12)

    @pytest.mark.parametrize("high,low", [(1.0, 0.0), (1.0, -2.0), (2.0, 3.0)])
    def test_domain_errors(self, high, low):
        with pytest.raises(ValueError):
            mid_price(high, low)


class TestPriceSeries:
    def test_mid_is_derived(self):
        s = PriceSeries(
            ticker="X",
            dates=(dt.date(2020, 1, 1), dt.date(2020, 1, 2)),
            high=[10.0, 12.0],
            low=[8.0, 9.0],
        )
        assert np.array_equal(s.mid, [9.0, 10.5])

    def test_rejects_unsorted_dates(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            PriceSeries(
                ticker="X",
                dates=(dt.date(2020, 1, 2), dt.date(2020, 1, 1)),
                high=[1.0, 1.0],
                low=[1.0, 1.0],
            )

    def test_rejects_high_below_low(self):
        with pytest.raises(ValueError, match="high"):
            PriceSeries(
                ticker="X",
                dates=(dt.date(2020, 1, 1),),
                high=[1.0],
                low=[2.0],
            )

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError, match="positive"):
            make_series([0.0])

    def test_arrays_immutable(self):
        s = make_series([1.0, 2.0])
        with pytest.raises(ValueError):
            s.mid[0] = 5.0


class TestDailyReturns:
    def test_constant(self):
        r = daily_returns(make_series([1, 1, 1]))
        assert np.array_equal(r.values, [0.0, 0.0])

    def test_doubling(self):
        r = daily_returns(make_series([1, 2]))
        assert np.array_equal(r.values, [1.0])

    def test_hand_values(self):
        r = daily_returns(make_series([4, 5, 4]))
        assert r.values == pytest.approx([0.25, -0.2])

    def test_length_error(self):
        with pytest.raises(ValueError):
            daily_returns(make_series([1.0]))

    def test_dates_shift(self):
        s = make_series([1, 2, 3])
        assert daily_returns(s).dates == s.dates[1:]

    def test_cumulative_reconstruction(self):
        rng = np.random.default_rng(5)
        mids = np.exp(np.cumsum(rng.normal(0, 0.02, size=300))) * 20
        s = make_series(mids)
        r = daily_returns(s)
        rebuilt = np.cumprod(1.0 + r.values)
        assert np.abs(rebuilt - s.mid[1:] / s.mid[0]).max() < 1e-10


class TestAlign:
    def test_identity(self):
        a = make_series([1, 2, 3])
        b = make_series([4, 5, 6], ticker="U")
        ra, rb = align_series(a, b)
        assert ra is a and rb is b

    def test_intersection(self):
        d = dt.date(2020, 1, 1)
        a = PriceSeries("A", (d, d + dt.timedelta(1), d + dt.timedelta(2)), [1, 2, 3], [1, 2, 3])
        b = PriceSeries(
            "B",
            (d + dt.timedelta(1), d + dt.timedelta(2), d + dt.timedelta(3)),
            [4, 5, 6],
            [4, 5, 6],
        )
        ra, rb = align_series(a, b)
        assert ra.dates == rb.dates == (d + dt.timedelta(1), d + dt.timedelta(2))
        assert np.array_equal(ra.mid, [2, 3])
        assert np.array_equal(rb.mid, [4, 5])

    def test_disjoint_gives_empty(self):
        a = make_series([1], start=dt.date(2020, 1, 1))
        b = make_series([2], start=dt.date(2021, 1, 1))
        ra, rb = align_series(a, b)
        assert ra.n == 0 and rb.n == 0


class TestPremiumSeries:
    def test_self_premium_zero(self):
        s = make_series([1.5, 2.5, 3.5])
        p = premium_series(s, s)
        assert np.array_equal(p.values, np.zeros(3))

    def test_fifty_percent(self):
        a = make_series([1.5])
        b = make_series([1.0])
        assert premium_series(a, b).values[0] == pytest.approx(0.5)

    def test_stored_as_fraction(self):
        # a premium printed as 361.21% is stored as 3.6121
        b = make_series([2.0])
        a = make_series([2.0 * 4.6121])
        p = premium_series(a, b)
        assert p.values[0] == pytest.approx(3.6121, abs=1e-12)

    def test_antisymmetry_hand(self):
        a = make_series([1.3, 2.7, 0.9])
        b = make_series([1.1, 2.0, 1.4])
        vab = premium_series(a, b).values
        vba = premium_series(b, a).values
        assert np.abs((1 + vab) * (1 + vba) - 1).max() < 1e-12

    # Price range mirrors the domain (sub-200 currency units); ratios much
    # beyond 1e3 push the 1+v cancellation past the 1e-12 budget.
    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.floats(min_value=0.1, max_value=200.0),
                st.floats(min_value=0.1, max_value=200.0),
            ),
            min_size=1,
            max_size=40,
        )
    )
    def test_antisymmetry_property(self, pairs):
        a = make_series([p[0] for p in pairs])
        b = make_series([p[1] for p in pairs])
        vab = premium_series(a, b).values
        vba = premium_series(b, a).values
        assert np.abs((1 + vab) * (1 + vba) - 1).max() < 1e-12


class TestPremiumSummary:
    def test_singleton(self):
        s = premium_summary(PremiumSeries(dates=(dt.date(2020, 1, 1),), values=[0.1]))
        assert s.minimum == s.q1 == s.median == s.mean == s.q3 == s.maximum == 0.1
        assert (s.count_premium, s.count_discount, s.count_parity) == (1, 0, 0)

    def test_hand_values(self):
        dates = tuple(dt.date(2020, 1, 1) + dt.timedelta(days=i) for i in range(4))
        s = premium_summary(PremiumSeries(dates=dates, values=[-0.1, 0.0, 0.1, 0.2]))
        assert s.minimum == pytest.approx(-0.1)
        assert s.q1 == pytest.approx(-0.025)
        assert s.median == pytest.approx(0.05)
        assert s.mean == pytest.approx(0.05)
        assert s.q3 == pytest.approx(0.125)
        assert s.maximum == pytest.approx(0.2)
        assert (s.count_premium, s.count_discount, s.count_parity) == (2, 1, 1)

    def test_order_invariance(self):
        rng = np.random.default_rng(0)
        values = rng.normal(size=25)
        dates = tuple(dt.date(2020, 1, 1) + dt.timedelta(days=i) for i in range(25))
        base = premium_summary(PremiumSeries(dates=dates, values=values))
        perm = premium_summary(PremiumSeries(dates=dates, values=rng.permutation(values)))
        assert base == perm

    def test_empty_error(self):
        with pytest.raises(ValueError, match="empty"):
            premium_summary(PremiumSeries(dates=(), values=[]))

    def test_quartiles_match_sort_oracle(self):
        rng = np.random.default_rng(77)
        for _ in range(40):
            n = int(rng.integers(1, 1000))
            values = rng.normal(size=n)
            dates = tuple(dt.date(2000, 1, 1) + dt.timedelta(days=i) for i in range(n))
            s = premium_summary(PremiumSeries(dates=dates, values=values))
            assert s.q1 == sorted_quantile(values, 0.25)
            assert s.median == sorted_quantile(values, 0.5)
            assert s.q3 == sorted_quantile(values, 0.75)
            assert s.minimum == values.min() and s.maximum == values.max()

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(min_value=-5, max_value=5), min_size=1, max_size=60))
    def test_counts_partition(self, values):
        dates = tuple(dt.date(2000, 1, 1) + dt.timedelta(days=i) for i in range(len(values)))
        s = premium_summary(PremiumSeries(dates=dates, values=values))
        assert s.count_premium + s.count_discount + s.count_parity == s.n == len(values)


class TestCsvLoading:
    def write(self, tmp_path, text, name="prices.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    def test_happy_path(self, tmp_path):
        path = self.write(
            tmp_path,
            "date,high,low\n2020-01-01,10,8\n2020-01-02,11,9\n2020-01-03,12,10\n",
        )
        s = load_ohlc_csv(path)
        assert s.n == 3
        assert s.ticker == "prices"
        assert np.array_equal(s.mid, [9.0, 10.0, 11.0])

    def test_high_below_low_fail_names_row(self, tmp_path):
        path = self.write(tmp_path, "date,high,low\n2020-01-01,10,8\n2020-01-02,5,9\n")
        with pytest.raises(ValueError, match="line 3"):
            load_ohlc_csv(path)

    def test_high_below_low_skip_policy(self, tmp_path):
        path = self.write(
            tmp_path, "date,high,low\n2020-01-01,10,8\n2020-01-02,5,9\n2020-01-03,12,10\n"
        )
        s = load_ohlc_csv(path, CsvFormat(on_invalid="skip"))
        assert s.n == 2
        assert s.dates == (dt.date(2020, 1, 1), dt.date(2020, 1, 3))

    def test_non_numeric_fail(self, tmp_path):
        path = self.write(tmp_path, "date,high,low\n2020-01-01,abc,8\n")
        with pytest.raises(ValueError, match="line 2"):
            load_ohlc_csv(path)

    def test_missing_column(self, tmp_path):
        path = self.write(tmp_path, "date,close\n2020-01-01,10\n")
        with pytest.raises(ValueError, match="missing required columns"):
            load_ohlc_csv(path)

    def test_unsorted_dates_always_fail(self, tmp_path):
        path = self.write(
            tmp_path, "date,high,low\n2020-01-02,10,8\n2020-01-01,10,8\n"
        )
        with pytest.raises(ValueError, match="strictly increasing"):
            load_ohlc_csv(path, CsvFormat(on_invalid="skip"))

    def test_mid_column_mode(self, tmp_path):
        path = self.write(tmp_path, "date,price\n2020-01-01,10\n2020-01-02,12\n")
        s = load_ohlc_csv(path, CsvFormat(mid_col="price"), ticker="K")
        assert s.ticker == "K"
        assert np.array_equal(s.mid, [10.0, 12.0])

    def test_custom_date_format(self, tmp_path):
        path = self.write(tmp_path, "date,high,low\n01/02/2020,10,8\n")
        s = load_ohlc_csv(path, CsvFormat(date_format="%d/%m/%Y"))
        assert s.dates == (dt.date(2020, 2, 1),)

    def test_empty_file(self, tmp_path):
        path = self.write(tmp_path, "date,high,low\n")
        with pytest.raises(ValueError, match="no valid rows"):
            load_ohlc_csv(path)

    def test_bad_policy_rejected(self):
        with pytest.raises(ValueError):
            CsvFormat(on_invalid="ignore")


class TestSummaryRendering:
    def setup_method(self):
        dates = tuple(dt.date(2020, 1, 1) + dt.timedelta(days=i) for i in range(4))
        self.stats = premium_summary(PremiumSeries(dates=dates, values=[-0.1, 0.0, 0.1, 0.2]))

    def test_keys_and_rounding(self):
        d = summary_to_dict(self.stats)
        assert list(d) == [
            "min", "q1", "median", "mean", "q3", "max",
            "count_premium", "count_discount", "count_parity", "n",
        ]
        assert d["q1"] == -0.025
        assert d["n"] == 4

    def test_percent_flag(self):
        d = summary_to_dict(self.stats, percent=True)
        assert d["max"] == 20.0
        assert d["count_premium"] == 2

    def test_csv_six_decimals(self):
        text = render_summary_csv(self.stats)
        header, row = text.strip().split("\n")
        assert header.startswith("min,q1,")
        assert row.split(",")[1] == "-0.025000"
        assert row.split(",")[-1] == "4"
