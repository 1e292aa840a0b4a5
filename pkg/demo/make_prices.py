#!/usr/bin/env python3
"""Generate demo/prices.csv: four synthetic daily price series (a stock index,
a carbon allowance, a gas price, a power price) with GJR-type volatility and
slowly-moving cross correlations, spanning 2008-2010.
"""

import datetime as dt
from pathlib import Path

import numpy as np

from volspill.garch import GarchParams
from volspill.simulate import Dgp, simulate

HERE = Path(__file__).parent
NAMES = ("ase", "eua", "ngas", "smp")
LEVELS = (2500.0, 20.0, 25.0, 60.0)

uni = (
    GarchParams(0.04, (0.06,), (0.06,), (0.86,)),
    GarchParams(0.06, (0.08,), (0.02,), (0.85,)),
    GarchParams(0.08, (0.10,), (), (0.84,)),
    GarchParams(0.30, (0.12,), (), (0.70,)),
)
dgp = Dgp(
    univariate=uni,
    correlation="dcc",
    rho=0.35,
    corr_alpha=0.02,
    corr_beta=0.95,
    T=780,
    seed=20080102,
    asset_names=NAMES,
)

sim = simulate(dgp)
returns = sim.returns.values / 100.0  # scale to daily log-return magnitudes
prices = np.exp(np.cumsum(np.vstack([np.zeros(len(NAMES)), returns]), axis=0))
prices *= np.asarray(LEVELS)

start = dt.date(2008, 1, 2)
with open(HERE / "prices.csv", "w") as fh:
    fh.write("date," + ",".join(NAMES) + "\n")
    for i, row in enumerate(prices):
        date = start + dt.timedelta(days=i)
        fh.write(date.isoformat() + "," + ",".join(f"{v:.6f}" for v in row) + "\n")
print(f"wrote {HERE / 'prices.csv'} ({prices.shape[0]} rows)")
