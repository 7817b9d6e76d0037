"""Seed-driven random instances shared by property and acceptance tests."""

from __future__ import annotations

import numpy as np

from tsvrp import (
    CostSeries,
    DurationSeries,
    Instance,
    TimeGrid,
    VariationSeries,
    Vehicle,
    WindowSet,
)

KINDS = ("TS_VRP", "TS_MCVRP", "TS_SVRP", "TS_MCSVRP")


def random_instance(
    seed: int,
    kind: str | None = None,
    max_cities: int = 6,
    max_intervals: int = 6,
    max_vehicles: int = 2,
    with_windows: bool = True,
) -> Instance:
    rng = np.random.default_rng(seed)
    if kind is None:
        kind = KINDS[rng.integers(0, len(KINDS))]
    stateful = kind in ("TS_SVRP", "TS_MCSVRP")
    capacitated = kind in ("TS_MCVRP", "TS_MCSVRP")

    n = int(rng.integers(2, max_cities + 1))
    t = int(rng.integers(2, max_intervals + 1))
    k = int(rng.integers(1, max_vehicles + 1))
    m = int(rng.integers(1, 3)) if capacitated else 0

    costs = rng.uniform(1.0, 9.0, size=(t - 1, n, n))
    if rng.random() < 0.2:
        costs[:] = 5.0  # exercise the flat-cost rule
    durations = rng.integers(1, min(3, t) + 1, size=(t - 1, n, n))
    stays = rng.integers(1, 3, size=(t - 1, n)) if stateful else None

    variations = None
    lows = [tuple(int(x) for x in rng.integers(-1, 1, m)) for _ in range(k)]
    highs = [
        tuple(low + int(d) for low, d in zip(lo, rng.integers(1, 3, m)))
        for lo in lows
    ]
    if capacitated:
        variations = rng.integers(-1, 2, size=(t - 1, n, n, m))

    vehicles = []
    for i in range(1, k + 1):
        start = int(rng.integers(1, n + 1))
        end = None
        if not stateful and rng.random() < 0.3:
            choices = [c for c in range(1, n + 1) if c != start]
            end = int(rng.choice(choices))
        elif stateful and rng.random() < 0.5:
            end = int(rng.choice(range(1, n + 1)))
        lo, hi = lows[i - 1], highs[i - 1]
        vehicles.append(
            Vehicle(
                id=i,
                start_city=start,
                end_city=end,
                capacity_lower=lo if capacitated else (),
                capacity_upper=hi if capacitated else (),
            )
        )
    # Make sure end cities stay reachable from the start inside the horizon.
    for idx, v in enumerate(vehicles):
        if v.end_city is not None and v.end_city != v.start_city:
            durations[0, v.end_city - 1, v.start_city - 1] = 1

    forbidden = set()
    if with_windows and rng.random() < 0.5:
        for _ in range(int(rng.integers(1, 4))):
            i = int(rng.integers(1, k + 1))
            tau = int(rng.integers(2, t + 1))
            city = int(rng.integers(1, n + 1))
            forbidden.add((i, tau, city))

    return Instance(
        grid=TimeGrid(interval_count=t, unit_minutes=float(rng.integers(5, 30))),
        city_labels=tuple(f"c{i}" for i in range(1, n + 1)),
        vehicles=tuple(vehicles),
        costs=CostSeries(costs),
        durations=DurationSeries(durations, stays),
        variations=VariationSeries(variations) if capacitated else None,
        windows=WindowSet(frozenset(forbidden)),
        model_kind=kind,
        capacity_dims=m,
    )
