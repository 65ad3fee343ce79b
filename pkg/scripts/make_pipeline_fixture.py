"""Generate the committed pipeline fixture (prices, CAPM table, config).

Ten synthetic stocks, calendar years 2009-2018 as the sample and the
first 22 trading days of 2019 as the holdout. Daily returns are crafted
so each year's estimates hit chosen targets exactly: the drift target
follows a recursion that plants a persistent (AR-coefficient 0.9) bias
series in the pipeline's records, and the holdout return is solved so
the smoothed-bias adjustment lands closest, the last-bias adjustment
second, and the raw conditional forecast worst, stock by stock. All the
conditional arithmetic below is written out inline on purpose, so the
fixture is not generated by the code it is meant to exercise.

Run from the repository root:

    python3 scripts/make_pipeline_fixture.py
"""

import datetime
import math
import pathlib

import numpy as np
from scipy import special

OUT_DIR = pathlib.Path(__file__).resolve().parent.parent / "fixtures"
SEED = 20240818

SAMPLE_YEARS = list(range(2009, 2019))
HOLDOUT_YEAR = 2019
ROWS_PER_YEAR = 253  # 252 returns, one full year at h = 1/252
HOLDOUT_ROWS = 22  # 21 returns, roughly January
H = 1.0 / 252.0
ALPHA = 0.2

RISK_FREE = {
    2009: 0.030, 2010: 0.032, 2011: 0.029, 2012: 0.027, 2013: 0.025,
    2014: 0.028, 2015: 0.030, 2016: 0.026, 2017: 0.024, 2018: 0.027,
    2019: 0.026,
}
MARKET = {
    2009: 0.075, 2010: 0.080, 2011: 0.070, 2012: 0.065, 2013: 0.072,
    2014: 0.078, 2015: 0.074, 2016: 0.068, 2017: 0.071, 2018: 0.076,
    2019: 0.073,
}


def hazard(d):
    """Inverse Mills ratio phi(d) / (1 - Phi(d))."""
    return math.sqrt(2.0 / math.pi) / special.erfcx(d / math.sqrt(2.0))


def conditional_expectation(nu, sigma, c):
    """E[nu_hat | R > c] for T = 1, written out from the truncated normal."""
    d = (c - nu) / sigma
    return nu + sigma * hazard(d)


def weekdays(year, count):
    day = datetime.date(year, 1, 1)
    out = []
    while len(out) < count:
        if day.weekday() < 5:
            out.append(day)
        day += datetime.timedelta(days=1)
    return out


def crafted_returns(rng, n, total, sigma):
    """n daily returns with exact sum `total` and exact ddof-1 variance."""
    u = rng.standard_normal(n)
    u = u - u.mean()
    u = u / u.std(ddof=1)
    r = total / n + sigma * math.sqrt(H) * u
    return r - (r.sum() - total) / n  # absorb rounding so the sum is exact


def main():
    rng = np.random.default_rng(SEED)
    price_lines = ["stock_id,date,close"]
    capm_lines = ["stock_id,year,beta,risk_free,market_return_expectation"]

    for k in range(10):
        stock_id = str(100001 + k)
        beta = round(0.80 + 0.05 * k, 2)
        sigma = 0.18 + 0.013 * k
        benchmarks = {
            year: RISK_FREE[year] + beta * (MARKET[year] - RISK_FREE[year])
            for year in SAMPLE_YEARS + [HOLDOUT_YEAR]
        }

        # Persistent bias targets around a common 0.10 level. The drift
        # targets then decay by roughly (0.10 - Mills term) per year toward
        # the stationary level where the Mills term matches the bias, which
        # stays comfortably above every benchmark.
        mean_bias = 0.10
        innovations = 0.006 * rng.standard_normal(8)
        bias_targets = [0.0]  # first record is never invested
        u = 0.0
        for i in range(8):
            u = 0.9 * u + innovations[i]
            bias_targets.append(mean_bias + u)

        # The last sample bias is constructed, not drawn: placing it at a
        # chosen distance from the running smoothed forecast pins the gap
        # between the simple and smoothed holdout adjustments exactly.
        forecasts = [bias_targets[0]]
        for b in bias_targets:
            forecasts.append(ALPHA * b + (1.0 - ALPHA) * forecasts[-1])
        sign = 1.0 if k % 2 == 0 else -1.0
        offset = sign * (0.009 + 0.0008 * k)
        gap = sign * (0.034 + 0.0013 * k)
        bias_targets.append(forecasts[-1] + (offset - gap) / (1.0 - ALPHA))

        # Solve the drift targets year by year: each year's conditional
        # forecast minus the wanted bias gives the next year's return.
        totals = [0.90 + 0.01 * k]
        for i in range(1, 10):
            forecast = conditional_expectation(
                totals[i - 1], sigma, benchmarks[SAMPLE_YEARS[i - 1]]
            )
            totals.append(forecast - bias_targets[i])
        for year, total in zip(SAMPLE_YEARS, totals):
            assert total > benchmarks[year] + 0.02, (stock_id, year, total)

        # Holdout: realized bias sits `offset` from the smoothed forecast
        # and `gap` from the last bias, so ES < simple < raw in squared
        # deviation for every stock as long as |offset| < |gap| < bias_next.
        forecasts.append(ALPHA * bias_targets[-1] + (1.0 - ALPHA) * forecasts[-1])
        smoothed_next = forecasts[-1]
        raw_next = conditional_expectation(totals[-1], sigma, benchmarks[2018])
        bias_next = smoothed_next + offset
        assert abs(bias_next - bias_targets[-1]) >= 2.0 * abs(offset), stock_id
        assert abs(bias_next) >= 1.3 * abs(gap), stock_id
        holdout_nu = raw_next - bias_next
        holdout_total = holdout_nu * (HOLDOUT_ROWS - 1) * H

        start_price = 20.0 * (1.0 + 0.7 * k)
        for year, total in zip(SAMPLE_YEARS, totals):
            dates = weekdays(year, ROWS_PER_YEAR)
            returns = crafted_returns(rng, ROWS_PER_YEAR - 1, total, sigma)
            prices = start_price * np.exp(np.concatenate(([0.0], np.cumsum(returns))))
            for date, price in zip(dates, prices.tolist()):
                price_lines.append(f"{stock_id},{date.isoformat()},{price!r}")
            start_price = float(prices[-1])
        dates = weekdays(HOLDOUT_YEAR, HOLDOUT_ROWS)
        returns = crafted_returns(rng, HOLDOUT_ROWS - 1, holdout_total, sigma)
        prices = start_price * np.exp(np.concatenate(([0.0], np.cumsum(returns))))
        for date, price in zip(dates, prices.tolist()):
            price_lines.append(f"{stock_id},{date.isoformat()},{price!r}")

        for year in SAMPLE_YEARS + [HOLDOUT_YEAR]:
            capm_lines.append(
                f"{stock_id},{year},{beta},{RISK_FREE[year]},{MARKET[year]}"
            )

    OUT_DIR.mkdir(exist_ok=True)
    (OUT_DIR / "prices.csv").write_text("\n".join(price_lines) + "\n")
    (OUT_DIR / "capm.csv").write_text("\n".join(capm_lines) + "\n")
    (OUT_DIR / "pipeline.cfg").write_text(
        "# settings for the shipped synthetic portfolio\n"
        "alpha = 0.2\n"
        "fit_alpha = false\n"
        "h_per_year = 252\n"
        "benchmark_mode = per_period\n"
    )
    print(f"wrote {len(price_lines) - 1} price rows for 10 stocks to {OUT_DIR}")


if __name__ == "__main__":
    main()
