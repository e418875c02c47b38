"""Event-driven simulation kernel, compiled with numba.

Everything here operates on flat arrays so the whole event loop stays in
nopython mode: a manual binary heap keyed by (time, sequence number)
orders the events, and per-link state lives in parallel arrays. Events
are never removed from the heap when a countdown is frozen; instead each
link carries a version counter and stale events are skipped on pop.

Event kinds: 0 countdown expiry, 1 transmission end, 2 packet arrival.
Link states: 0 empty buffer, 1 counting down, 2 frozen, 3 transmitting.
"""

import numpy as np
from numba import njit

EV_COUNTDOWN = 0
EV_TX_END = 1
EV_ARRIVAL = 2

ST_EMPTY = 0
ST_COUNTING = 1
ST_FROZEN = 2
ST_TX = 3

TX_EXPONENTIAL = 0
TX_UNIFORM = 1
TX_CONSTANT = 2


@njit(cache=True)
def _sift_up(ht, hs, hk, hl, hv, i):
    while i > 0:
        p = (i - 1) >> 1
        if ht[p] > ht[i] or (ht[p] == ht[i] and hs[p] > hs[i]):
            ht[p], ht[i] = ht[i], ht[p]
            hs[p], hs[i] = hs[i], hs[p]
            hk[p], hk[i] = hk[i], hk[p]
            hl[p], hl[i] = hl[i], hl[p]
            hv[p], hv[i] = hv[i], hv[p]
            i = p
        else:
            break


@njit(cache=True)
def _sift_down(ht, hs, hk, hl, hv, size):
    i = 0
    while True:
        left = 2 * i + 1
        right = left + 1
        smallest = i
        if left < size and (
            ht[left] < ht[smallest]
            or (ht[left] == ht[smallest] and hs[left] < hs[smallest])
        ):
            smallest = left
        if right < size and (
            ht[right] < ht[smallest]
            or (ht[right] == ht[smallest] and hs[right] < hs[smallest])
        ):
            smallest = right
        if smallest == i:
            break
        ht[smallest], ht[i] = ht[i], ht[smallest]
        hs[smallest], hs[i] = hs[i], hs[smallest]
        hk[smallest], hk[i] = hk[i], hk[smallest]
        hl[smallest], hl[i] = hl[i], hl[smallest]
        hv[smallest], hv[i] = hv[i], hv[smallest]
        i = smallest


@njit(cache=True)
def _draw_tx_duration(tx_dist):
    if tx_dist == TX_EXPONENTIAL:
        return np.random.exponential(1.0)
    elif tx_dist == TX_UNIFORM:
        return np.random.uniform(0.0, 2.0)
    return 1.0


@njit(cache=True)
def _window_overlap(a, b, lo, hi):
    x = a if a > lo else lo
    y = b if b < hi else hi
    return y - x if y > x else 0.0


@njit(cache=True)
def run_events(
    n,
    adj_indptr,
    adj_indices,
    cd_scale,
    offered,
    arrival_scale,
    tx_dist,
    horizon,
    warmup,
    engine_seed,
):
    """Run one simulation; all randomness comes from ``engine_seed``.

    Returns (busy_time, tx_count, arrival_count, work_time, violation)
    where work_time is the per-link time with at least one packet queued
    or in service, and violation flags two adjacent links transmitting
    at once (always 0 unless the kernel itself is broken).
    """
    np.random.seed(engine_seed)

    cap = 4 * n + 1024
    ht = np.empty(cap, np.float64)
    hs = np.empty(cap, np.int64)
    hk = np.empty(cap, np.int8)
    hl = np.empty(cap, np.int32)
    hv = np.empty(cap, np.int64)
    size = 0
    seq = 0

    state = np.zeros(n, np.int8)
    version = np.zeros(n, np.int64)
    remaining = np.zeros(n, np.float64)
    expiry = np.zeros(n, np.float64)
    busy_neighbors = np.zeros(n, np.int32)
    queue = np.zeros(n, np.int64)
    tx_start = np.zeros(n, np.float64)

    busy = np.zeros(n, np.float64)
    tx_count = np.zeros(n, np.int64)
    arrivals = np.zeros(n, np.int64)
    work = np.zeros(n, np.float64)
    work_since = np.zeros(n, np.float64)

    if offered:
        for i in range(n):
            if arrival_scale[i] > 0.0:
                t0 = np.random.exponential(arrival_scale[i])
                ht[size] = t0; hs[size] = seq; hk[size] = EV_ARRIVAL
                hl[size] = i; hv[size] = 0
                _sift_up(ht, hs, hk, hl, hv, size)
                size += 1
                seq += 1
    else:
        # Saturated start: every link draws an initial countdown at t=0.
        for i in range(n):
            c = np.random.exponential(cd_scale[i])
            state[i] = ST_COUNTING
            expiry[i] = c
            ht[size] = c; hs[size] = seq; hk[size] = EV_COUNTDOWN
            hl[size] = i; hv[size] = version[i]
            _sift_up(ht, hs, hk, hl, hv, size)
            size += 1
            seq += 1

    while size > 0:
        t = ht[0]; kind = hk[0]; link = hl[0]; ver = hv[0]
        size -= 1
        if size > 0:
            ht[0] = ht[size]; hs[0] = hs[size]; hk[0] = hk[size]
            hl[0] = hl[size]; hv[0] = hv[size]
            _sift_down(ht, hs, hk, hl, hv, size)
        if t >= horizon:
            break

        if kind == EV_COUNTDOWN:
            if ver != version[link] or state[link] != ST_COUNTING:
                continue  # frozen or restarted since this was scheduled
            for p in range(adj_indptr[link], adj_indptr[link + 1]):
                if state[adj_indices[p]] == ST_TX:
                    return busy, tx_count, arrivals, work, 1
            state[link] = ST_TX
            version[link] += 1
            tx_start[link] = t
            if offered:
                queue[link] -= 1
            d = _draw_tx_duration(tx_dist)
            ht[size] = t + d; hs[size] = seq; hk[size] = EV_TX_END
            hl[size] = link; hv[size] = 0
            _sift_up(ht, hs, hk, hl, hv, size)
            size += 1
            seq += 1
            for p in range(adj_indptr[link], adj_indptr[link + 1]):
                j = adj_indices[p]
                busy_neighbors[j] += 1
                if state[j] == ST_COUNTING:
                    remaining[j] = expiry[j] - t
                    state[j] = ST_FROZEN
                    version[j] += 1

        elif kind == EV_TX_END:
            busy[link] += _window_overlap(tx_start[link], t, warmup, horizon)
            if tx_start[link] >= warmup:
                tx_count[link] += 1
            if (not offered) or queue[link] > 0:
                c = np.random.exponential(cd_scale[link])
                version[link] += 1
                if busy_neighbors[link] == 0:
                    state[link] = ST_COUNTING
                    expiry[link] = t + c
                    ht[size] = t + c; hs[size] = seq; hk[size] = EV_COUNTDOWN
                    hl[size] = link; hv[size] = version[link]
                    _sift_up(ht, hs, hk, hl, hv, size)
                    size += 1
                    seq += 1
                else:
                    state[link] = ST_FROZEN
                    remaining[link] = c
            else:
                state[link] = ST_EMPTY
                version[link] += 1
                work[link] += _window_overlap(work_since[link], t, warmup, horizon)
            for p in range(adj_indptr[link], adj_indptr[link + 1]):
                j = adj_indices[p]
                busy_neighbors[j] -= 1
                if state[j] == ST_FROZEN and busy_neighbors[j] == 0:
                    state[j] = ST_COUNTING
                    version[j] += 1
                    expiry[j] = t + remaining[j]
                    ht[size] = expiry[j]; hs[size] = seq; hk[size] = EV_COUNTDOWN
                    hl[size] = j; hv[size] = version[j]
                    _sift_up(ht, hs, hk, hl, hv, size)
                    size += 1
                    seq += 1

        else:  # EV_ARRIVAL
            if t >= warmup:
                arrivals[link] += 1
            queue[link] += 1
            nxt = t + np.random.exponential(arrival_scale[link])
            ht[size] = nxt; hs[size] = seq; hk[size] = EV_ARRIVAL
            hl[size] = link; hv[size] = 0
            _sift_up(ht, hs, hk, hl, hv, size)
            size += 1
            seq += 1
            if state[link] == ST_EMPTY:
                work_since[link] = t
                c = np.random.exponential(cd_scale[link])
                version[link] += 1
                if busy_neighbors[link] == 0:
                    state[link] = ST_COUNTING
                    expiry[link] = t + c
                    ht[size] = t + c; hs[size] = seq; hk[size] = EV_COUNTDOWN
                    hl[size] = link; hv[size] = version[link]
                    _sift_up(ht, hs, hk, hl, hv, size)
                    size += 1
                    seq += 1
                else:
                    state[link] = ST_FROZEN
                    remaining[link] = c

        # Keep slack for the worst case of one event pushing n+2 events.
        if size + n + 4 >= cap:
            cap *= 2
            ht2 = np.empty(cap, np.float64); ht2[:size] = ht[:size]; ht = ht2
            hs2 = np.empty(cap, np.int64); hs2[:size] = hs[:size]; hs = hs2
            hk2 = np.empty(cap, np.int8); hk2[:size] = hk[:size]; hk = hk2
            hl2 = np.empty(cap, np.int32); hl2[:size] = hl[:size]; hl = hl2
            hv2 = np.empty(cap, np.int64); hv2[:size] = hv[:size]; hv = hv2

    # Account for activity still in flight at the horizon.
    for i in range(n):
        if state[i] == ST_TX:
            busy[i] += _window_overlap(tx_start[i], horizon, warmup, horizon)
        if offered:
            if state[i] != ST_EMPTY:
                work[i] += _window_overlap(work_since[i], horizon, warmup, horizon)
        else:
            work[i] = horizon - warmup
    return busy, tx_count, arrivals, work, 0
