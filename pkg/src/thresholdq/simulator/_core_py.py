"""Pure-Python event loop, reference implementation of the kernel contract.

The compiled kernel in _core.pyx must stay behaviorally identical: same
uniform-consumption order (two draws per event from 65536-long blocks), same
event ordering (arrival, departure, tick), so that a given Generator yields
bit-identical sample streams on both backends.
"""

import math

import numpy as np

CHUNK = 65536

BACKEND = "python"


def run_kernel(lam, mu0, mu1, gamma, K, regime, n_customers, warmup, rng,
               samples, occ, seen):
    """Simulate one replication; fills samples/occ/seen in place.

    regime: 0 continuous, 1 exponential inspection, 2 Erlang-2 inspection.
    samples: float array of length n_customers (sojourns after warmup).
    occ: time-in-level integrals, last slot aggregates deeper levels.
    seen: queue length found by arrivals after warmup, same binning.
    Returns the post-warmup simulated time span.
    """
    buf = rng.random(CHUNK)
    idx = 0
    levels = occ.shape[0]

    cap = 4096
    queue = np.empty(cap)
    head = 0
    tail = 0
    q = 0

    fast = False
    phase = 0
    t = 0.0
    departures = 0
    recorded = 0
    span = 0.0
    log1p = math.log1p

    while recorded < n_customers:
        mu = mu1 if fast else mu0
        dep = mu if q > 0 else 0.0
        if regime == 0:
            tick = 0.0
        elif regime == 1:
            tick = gamma if fast != (q > K) else 0.0
        else:
            tick = gamma
        total = lam + dep + tick

        if idx == CHUNK:
            buf = rng.random(CHUNK)
            idx = 0
        u1 = buf[idx]
        idx += 1
        if idx == CHUNK:
            buf = rng.random(CHUNK)
            idx = 0
        u2 = buf[idx]
        idx += 1

        dt = -log1p(-u1) / total
        t += dt
        if departures >= warmup:
            occ[q if q < levels else levels - 1] += dt
            span += dt

        x = u2 * total
        if x < lam:
            if departures >= warmup:
                seen[q if q < levels else levels - 1] += 1
            if tail - head == cap:
                bigger = np.empty(cap * 2)
                first = head % cap
                part = cap - first
                bigger[:part] = queue[first:]
                bigger[part:cap] = queue[:first]
                queue = bigger
                head = 0
                tail = cap
                cap *= 2
            queue[tail % cap] = t
            tail += 1
            q += 1
            if regime == 0:
                fast = q > K
        elif x < lam + dep:
            sojourn = t - queue[head % cap]
            head += 1
            q -= 1
            departures += 1
            if departures > warmup:
                samples[recorded] = sojourn
                recorded += 1
            if regime == 0:
                fast = q > K
        else:
            if regime == 1:
                fast = q > K
            else:
                if phase == 1:
                    fast = q > K
                phase ^= 1
    return span
