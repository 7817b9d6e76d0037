"""A reference delivery scenario: six customers, three vehicles, two hours.

The fleet shares one depot and serves every customer inside per-customer
delivery windows on a 15-minute grid.  City 5 accepts deliveries only in
the final interval and no on-time arrival can hit that slot, so every
feasible plan contains exactly one window-forced overtime leg.  Costs
are shaped so that plans with more on-time legs always win, which keeps
the energy ranking aligned with the route-cost ranking.
"""

from __future__ import annotations

import numpy as np

from .instance import (
    CostSeries,
    DurationSeries,
    Instance,
    TimeGrid,
    Vehicle,
    WindowSet,
)

#: Allowed arrival intervals per customer city (city 1 is the depot).
DEMO_WINDOWS = {
    2: (2, 3, 4),
    3: (2, 3, 4, 5),
    4: (3, 4, 5, 6),
    5: (7,),
    6: (2, 3, 4, 5, 6),
    7: (4, 5, 6, 7),
}

DEMO_LAMBDA = 2.0


def delivery_demo_instance() -> Instance:
    """Six customers, three vehicles, T=8 at 15-minute resolution."""
    t, n, k = 8, 7, 3
    labels = ("depot", "c1", "c2", "c3", "c4", "c5", "c6")

    # Usable legs cost 4..5, independent of the interval so waiting cannot
    # game the bill.  A handful of designated legs cost 4.0 and form the
    # unique cheapest structure; legs into the overtime city cost a flat
    # 4.5 so its (never rewarded) leg prices every plan identically.  Two
    # cells that windows make unusable pin the cost range to [1, 10],
    # which keeps every usable coefficient strictly inside the allowed
    # band.
    costs = np.zeros((t - 1, n, n))
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            if a != b:
                costs[:, a - 1, b - 1] = 4.6 + 0.1 * ((a + 2 * b) % 4)
    for a, b in ((2, 1), (3, 1), (6, 1), (4, 2), (7, 4)):
        costs[:, a - 1, b - 1] = 4.0
    costs[:, 5 - 1, :] = 4.5
    costs[5 - 1, 2 - 1, 4 - 1] = 10.0  # arrival at city 2 in interval 6: window-dead
    costs[6 - 1, 2 - 1, 3 - 1] = 1.0  # arrival at city 2 in interval 7: window-dead

    # One interval per leg, except that late departures towards city 5
    # take two: the only allowed arrival there can never be hit on time.
    durations = np.ones((t - 1, n, n), dtype=int)
    durations[6 - 1, 5 - 1, :] = 2
    durations[7 - 1, 5 - 1, :] = 2

    forbidden = set()
    for i in range(1, k + 1):
        for city, allowed in DEMO_WINDOWS.items():
            for tau in range(2, t + 1):
                if tau not in allowed:
                    forbidden.add((i, tau, city))

    return Instance(
        grid=TimeGrid(interval_count=t, unit_minutes=15.0, origin_label="09:00"),
        city_labels=labels,
        vehicles=tuple(Vehicle(id=i, start_city=1) for i in range(1, k + 1)),
        costs=CostSeries(values=costs),
        durations=DurationSeries(travel=durations),
        variations=None,
        windows=WindowSet(frozenset(forbidden)),
        model_kind="TS_VRP",
        capacity_dims=0,
    )
