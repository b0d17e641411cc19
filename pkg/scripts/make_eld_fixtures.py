"""Write the load-diagram fixtures used by the test suite.

    python scripts/make_eld_fixtures.py

Both files use the UCI layout: semicolon separated, comma decimals,
quoted timestamps and client names. Output is deterministic.
"""

from pathlib import Path

import numpy as np
import pandas as pd

from gwmds.ingest import LoadSeries, write_eld

OUT = Path(__file__).resolve().parents[1] / "tests" / "data"


def small():
    # 6 clients, two full days; client k reads 2.5 * k + slot / 4 so the
    # value at (MT_003, slot 0) is 7.5
    stamps = pd.date_range("2012-03-01", periods=192, freq="15min")
    slot = np.arange(192)
    values = np.array([2.5 * k + slot / 4 for k in range(1, 7)])
    values[5, :96] = 0.0
    clients = tuple(f"MT_{k:03d}" for k in range(1, 7))
    write_eld(LoadSeries(clients, stamps, values), OUT / "eld_small.txt")


def four_day(n_clients=48, seed=2014):
    rng = np.random.default_rng(seed)
    # Fri 3 Jan 2014 .. Mon 6 Jan 2014
    stamps = pd.date_range("2014-01-03", periods=4 * 96, freq="15min")
    hours = (np.arange(96) + 0.5) / 4
    weekend = [False, True, True, False]

    def bump(center, width):
        return np.exp(-0.5 * ((hours - center) / width) ** 2)

    values = np.zeros((n_clients, 4 * 96))
    kinds = np.arange(n_clients) % 4
    for c in range(n_clients):
        amp = rng.lognormal(mean=3.0, sigma=0.6)
        shift = rng.normal(0, 0.75)
        for d in range(4):
            day_scale = rng.lognormal(0, 0.25)
            if kinds[c] == 0:  # residential: morning and evening peaks
                prof = 0.3 + 0.6 * bump(7.5 + shift, 1.2) + bump(19.5 + shift, 1.8)
                prof *= 1.3 if weekend[d] else 1.0
            elif kinds[c] == 1:  # office: daytime plateau, idle at weekends
                prof = 0.15 + (0.0 if weekend[d] else 1.0) * (bump(10 + shift, 2.0) + bump(15 + shift, 2.0))
            elif kinds[c] == 2:  # shop: opens later, Sunday closed
                prof = 0.2 + (0.1 if d == 2 else 1.0) * bump(14 + shift, 3.5)
            else:  # night load: street lighting and cold storage
                prof = 0.4 + (hours < 7.5) + (hours > 17.5)
            noise = rng.normal(0, 0.08, size=96)
            values[c, d * 96:(d + 1) * 96] = np.maximum(amp * day_scale * (prof + noise), 0.0)
    values[-1] = 0.0  # a dead meter, dropped by the daily slicer
    values = np.round(values, 6)
    clients = tuple(f"MT_{k:03d}" for k in range(1, n_clients + 1))
    write_eld(LoadSeries(clients, stamps, values), OUT / "eld_4day.txt")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    small()
    four_day()
