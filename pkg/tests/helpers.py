"""Shared test utilities: fixture builders and independent brute-force
reference implementations used for differential checks.

The brute-force functions here are deliberately literal (nested loops over
every window or pair) so they can serve as a second, independent route to
the same answers the library computes with pruned or vectorized scans.
"""
from __future__ import annotations

import math

import numpy as np

from sparsemob.core import METERS_PER_DEGREE, Trajectory


def traj_from_meters(times, xs, ys=None, device="dev") -> Trajectory:
    """Build a trajectory from planar meter coordinates at the equator.

    At ref_lat = 0 the projection is an exact scaling, so planar distances
    in tests equal the library's distances to float round-off.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.zeros_like(xs) if ys is None else np.asarray(ys, dtype=np.float64)
    return Trajectory(
        device=device,
        times=np.asarray(times, dtype=np.int64),
        lons=xs / METERS_PER_DEGREE,
        lats=ys / METERS_PER_DEGREE,
    )


def minutes(*values) -> list[int]:
    return [int(v * 60) for v in values]


def write_records_csv(path, trajs) -> str:
    """Records CSV in the command-line tool's input layout."""
    with open(path, "w") as fh:
        fh.write("time,lon,lat,mid\n")
        for traj in trajs:
            for t, lon, lat in zip(traj.times, traj.lons, traj.lats):
                fh.write(f"{int(t)},{float(lon)!r},{float(lat)!r},{traj.device}\n")
    return str(path)


def write_labels_csv(path, rows) -> str:
    """Labels CSV from (device, time, letter) rows."""
    with open(path, "w") as fh:
        fh.write("mid,time,label\n")
        for mid, t, letter in rows:
            fh.write(f"{mid},{int(t)},{letter}\n")
    return str(path)


def random_trajectory(rng: np.random.Generator, max_len: int = 30) -> Trajectory:
    """Random mixed dense/sparse trajectory in planar meters.

    Gaps mix short (seconds to minutes) and long (hours) intervals; steps mix
    small in-place wobble with multi-kilometer jumps, so stay windows, travel
    witnesses, and segment cuts all occur with useful frequency.
    """
    n = int(rng.integers(1, max_len + 1))
    gap_pool = np.where(
        rng.random(max(n - 1, 0)) < 0.7,
        rng.integers(10, 600, size=max(n - 1, 0)),
        rng.integers(1801, 40000, size=max(n - 1, 0)),
    )
    times = np.concatenate(([0], np.cumsum(gap_pool))).astype(np.int64)
    steps = np.where(
        rng.random(n) < 0.6,
        rng.normal(0.0, 120.0, size=n),
        rng.normal(0.0, 2500.0, size=n),
    )
    xs = np.cumsum(steps)
    ys = np.cumsum(
        np.where(
            rng.random(n) < 0.6,
            rng.normal(0.0, 120.0, size=n),
            rng.normal(0.0, 2500.0, size=n),
        )
    )
    return traj_from_meters(times, xs, ys, device="rand")


def _xy(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    # equator-built fixtures only: inverse of traj_from_meters
    return traj.lons * METERS_PER_DEGREE, traj.lats * METERS_PER_DEGREE


def brute_stay_oracle(traj: Trajectory, delta_s: float, delta_t: float) -> np.ndarray:
    """Literal window enumeration: record i is a stay iff some index window
    [p, q] containing i spans >= delta_t with all pairwise distances < delta_s."""
    x, y = _xy(traj)
    t = traj.times
    n = len(t)
    out = np.zeros(n, dtype=bool)
    for p in range(n):
        for q in range(p + 1, n):
            if t[q] - t[p] < delta_t:
                continue
            ok = True
            for a in range(p, q + 1):
                for b in range(a + 1, q + 1):
                    if math.hypot(x[a] - x[b], y[a] - y[b]) >= delta_s:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                out[p : q + 1] = True
    return out


def brute_dense_member(traj: Trajectory, delta_s: float, delta_t: float) -> np.ndarray:
    """Like brute_stay_oracle but the window must also have every
    consecutive gap <= delta_t."""
    x, y = _xy(traj)
    t = traj.times
    n = len(t)
    out = np.zeros(n, dtype=bool)
    for p in range(n):
        for q in range(p + 1, n):
            if t[q] - t[p] < delta_t:
                continue
            if any(t[k + 1] - t[k] > delta_t for k in range(p, q)):
                continue
            ok = True
            for a in range(p, q + 1):
                for b in range(a + 1, q + 1):
                    if math.hypot(x[a] - x[b], y[a] - y[b]) >= delta_s:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                out[p : q + 1] = True
    return out


def brute_travel_witness(
    traj: Trajectory, i: int, spatial: float, delta_t: float
) -> bool:
    """Literal pair scan for a bilateral witness around record i."""
    x, y = _xy(traj)
    t = traj.times
    n = len(t)
    for p in range(i):
        if math.hypot(x[i] - x[p], y[i] - y[p]) < spatial:
            continue
        for q in range(i + 1, n):
            if math.hypot(x[i] - x[q], y[i] - y[q]) < spatial:
                continue
            if t[q] - t[p] <= delta_t:
                return True
    return False


def fold_path_score(
    initial: np.ndarray,
    transition: np.ndarray,
    emission: np.ndarray,
    states: list[int],
    symbols: np.ndarray,
) -> float:
    """Log-probability of one state path, accumulated in the same order the
    decoder uses: (previous + log transition) + log emission at every step."""
    with np.errstate(divide="ignore"):
        log_init = np.log(initial)
        log_trans = np.log(transition)
        log_emis = np.log(emission)
    score = log_init[states[0]] + log_emis[states[0], symbols[0]]
    for k in range(1, len(states)):
        score = (score + log_trans[states[k - 1], states[k]]) + log_emis[
            states[k], symbols[k]
        ]
    return float(score)


def enumerate_best_score(
    initial: np.ndarray,
    transition: np.ndarray,
    emission: np.ndarray,
    symbols: np.ndarray,
) -> float:
    """Maximum path log-probability over all 2^L state paths."""
    n = len(symbols)
    best = -np.inf
    for mask in range(2**n):
        states = [(mask >> k) & 1 for k in range(n)]
        score = fold_path_score(initial, transition, emission, states, symbols)
        if score > best:
            best = score
    return best
