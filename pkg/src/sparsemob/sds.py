"""Single-trajectory stay/travel labeling for temporally sparse data.

The labeler answers, per record, one of three things: the device was
provably stopped (Stay), provably moving (Travel), or the data is too sparse
to certify either (Unlabeled). It never guesses: flagged labels carry a
geometric guarantee under the bounded-detour assumption that between two
observations close in time and space the device does not wander far from
them.

Pipeline: slice the trajectory at time gaps > delta_t (core.divide), then run
two passes over each dense segment:

* Stay pass: grow a window of consecutive records while every pair stays
  within one third of delta_s; when a new record breaks that bound against
  some window member, flush the window as Stay if it spans at least delta_t,
  and restart just past the offending member. One third of the diameter
  budget per hop (record-to-record plus the unobserved detours on either
  side) is what makes the certificate sound.
* Travel pass: a record not flagged Stay is Travel when it has a witness at
  distance >= delta_s on each side, with the two witnesses at most delta_t
  apart. Any fixed-length window covering the record then also covers a
  witness, so its diameter breaks the stay bound.

Both passes compare squared planar distances against squared thresholds; ties
resolve as: distance >= threshold escapes/witnesses, distance < threshold
keeps a window member.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    LABEL_STAY,
    LABEL_TRAVEL,
    LABEL_UNLABELED,
    DenseSegment,
    MobilityLabel,
    MobilityParams,
    Trajectory,
    codes_to_letters,
    default_ref_lat,
    label_for_code,
    project_to_meters,
    segment_bounds,
)

AdmitHook = Callable[[int, int], None]


@dataclass(frozen=True, eq=False)
class LabeledTrajectory:
    """A trajectory plus one label code per record (see core label codes)."""

    trajectory: Trajectory
    labels: np.ndarray

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int8)
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if len(labels) != len(self.trajectory):
            raise ValueError("labels length must match the trajectory")
        if len(labels) and (labels.min() < 0 or labels.max() > 2):
            raise ValueError("unknown label code")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.trajectory)

    def label(self, i: int) -> MobilityLabel:
        return label_for_code(int(self.labels[i]))

    def letters(self) -> list[str]:
        return codes_to_letters(self.labels)


@dataclass(frozen=True)
class RecallBounds:
    """Per-trajectory lower bounds on achievable stay/travel recall."""

    stay_bound: float
    travel_bound: float

    def __post_init__(self) -> None:
        for name, v in (("stay_bound", self.stay_bound), ("travel_bound", self.travel_bound)):
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} out of [0, 1]: {v}")


def _stay_pass(
    x: np.ndarray,
    y: np.ndarray,
    t: np.ndarray,
    escape: float,
    delta_t: float,
    tail_flush: bool = True,
    on_admit: AdmitHook | None = None,
) -> np.ndarray:
    """Windowed stay detection over one dense segment (planar coords).

    Returns a boolean flag per record. ``escape`` is the pairwise distance at
    which a window breaks. ``on_admit(head, cursor)`` fires whenever a cursor
    joins the window without an escape; tests use it to check the window
    invariant exhaustively.
    """
    n = len(t)
    flags = np.zeros(n, dtype=bool)
    if n < 2:
        return flags
    esc2 = escape * escape
    head = 0
    # Bounding box of window positions [head, cursor-1]. If the cursor is
    # closer than `escape` to the farthest box corner it cannot escape against
    # any member, which keeps the common grow-the-window step O(1).
    xmin = xmax = x[0]
    ymin = ymax = y[0]
    for cursor in range(1, n):
        cx = x[cursor]
        cy = y[cursor]
        dx = xmax - cx if xmax - cx > cx - xmin else cx - xmin
        dy = ymax - cy if ymax - cy > cy - ymin else cy - ymin
        if dx * dx + dy * dy < esc2:
            anchor = -1
        else:
            anchor = -1
            for a in range(cursor - 1, head - 1, -1):
                ddx = cx - x[a]
                ddy = cy - y[a]
                if ddx * ddx + ddy * ddy >= esc2:
                    anchor = a
                    break
        if anchor < 0:
            if on_admit is not None:
                on_admit(head, cursor)
            if cx < xmin:
                xmin = cx
            elif cx > xmax:
                xmax = cx
            if cy < ymin:
                ymin = cy
            elif cy > ymax:
                ymax = cy
            continue
        # The window up to the previous record is flushed if it already spans
        # the dwell threshold; the cursor itself is not part of that window.
        if t[cursor - 1] - t[head] >= delta_t:
            flags[head:cursor] = True
        head = anchor + 1
        xs = x[head : cursor + 1]
        ys = y[head : cursor + 1]
        xmin = xs.min()
        xmax = xs.max()
        ymin = ys.min()
        ymax = ys.max()
    if tail_flush and t[n - 1] - t[head] >= delta_t:
        # Without this flush the final window is silently dropped and the
        # detected set no longer matches the dense-window membership oracle.
        flags[head:] = True
    return flags


def _travel_pass(
    x: np.ndarray,
    y: np.ndarray,
    t: np.ndarray,
    stay_flags: np.ndarray,
    witness: float,
    delta_t: float,
) -> np.ndarray:
    """Bilateral-witness travel detection over one dense segment."""
    n = len(t)
    flags = np.zeros(n, dtype=bool)
    w2 = witness * witness
    for cursor in range(1, n - 1):
        if stay_flags[cursor]:
            continue
        cx = x[cursor]
        cy = y[cursor]
        ct = t[cursor]
        # Nearest left witness. Anything further back than delta_t cannot
        # close a window with a right witness, so the scan stops there; the
        # flag decision is unchanged because such witnesses always fail the
        # window test anyway.
        left = -1
        for a in range(cursor - 1, -1, -1):
            if ct - t[a] >= delta_t:
                break
            ddx = cx - x[a]
            ddy = cy - y[a]
            if ddx * ddx + ddy * ddy >= w2:
                left = a
                break
        if left < 0:
            continue
        right = -1
        for b in range(cursor + 1, n):
            if t[b] - ct >= delta_t:
                break
            ddx = cx - x[b]
            ddy = cy - y[b]
            if ddx * ddx + ddy * ddy >= w2:
                right = b
                break
        if right < 0:
            continue
        if t[right] - t[left] <= delta_t:
            flags[cursor] = True
    return flags


def _segment_xy(
    segment: DenseSegment, ref_lat: float | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if ref_lat is None:
        ref_lat = default_ref_lat(segment.parent)
    x, y = project_to_meters(segment.lons, segment.lats, ref_lat)
    return x, y, segment.times


def detect_stays(
    segment: DenseSegment,
    params: MobilityParams,
    *,
    ref_lat: float | None = None,
    spatial: float | None = None,
    tail_flush: bool = True,
    on_admit: AdmitHook | None = None,
) -> np.ndarray:
    """Stay flags for one dense segment.

    ``spatial`` overrides the escape distance (default ``params.delta_s / 3``);
    the recall-bound accounting runs this pass at other thresholds.
    ``tail_flush=False`` reproduces the bare sliding scan that never emits the
    final window.
    """
    x, y, t = _segment_xy(segment, ref_lat)
    escape = params.delta_s / 3.0 if spatial is None else spatial
    return _stay_pass(x, y, t, escape, params.delta_t, tail_flush, on_admit)


def detect_travels(
    segment: DenseSegment,
    stay_flags: np.ndarray,
    params: MobilityParams,
    *,
    ref_lat: float | None = None,
    witness: float | None = None,
) -> np.ndarray:
    """Travel flags for one dense segment; never set on stay-flagged records
    or segment endpoints."""
    x, y, t = _segment_xy(segment, ref_lat)
    w = params.delta_s if witness is None else witness
    return _travel_pass(x, y, t, np.asarray(stay_flags, dtype=bool), w, params.delta_t)


def _label_codes(
    x: np.ndarray,
    y: np.ndarray,
    t: np.ndarray,
    params: MobilityParams,
    tail_flush: bool,
) -> np.ndarray:
    codes = np.full(len(t), LABEL_UNLABELED, dtype=np.int8)
    for s, e in segment_bounds(t, params.delta_t):
        xs, ys, ts = x[s:e], y[s:e], t[s:e]
        stay = _stay_pass(xs, ys, ts, params.delta_s / 3.0, params.delta_t, tail_flush)
        travel = _travel_pass(xs, ys, ts, stay, params.delta_s, params.delta_t)
        seg = codes[s:e]
        seg[stay] = LABEL_STAY
        seg[travel] = LABEL_TRAVEL
    return codes


def sds_label(
    traj: Trajectory,
    params: MobilityParams,
    *,
    ref_lat: float | None = None,
    tail_flush: bool = True,
) -> LabeledTrajectory:
    """Label every record Stay, Travel, or Unlabeled.

    Deterministic: equal inputs give bitwise-equal labels. A single record (or
    any segment too sparse to certify anything) stays Unlabeled.
    """
    if len(traj) == 0:
        return LabeledTrajectory(traj, np.zeros(0, dtype=np.int8))
    if ref_lat is None:
        ref_lat = default_ref_lat(traj)
    x, y = project_to_meters(traj.lons, traj.lats, ref_lat)
    return LabeledTrajectory(traj, _label_codes(x, y, traj.times, params, tail_flush))


def stay_flags_at(
    traj: Trajectory,
    params: MobilityParams,
    spatial: float,
    *,
    ref_lat: float | None = None,
    tail_flush: bool = True,
) -> np.ndarray:
    """Whole-trajectory stay flags with the stay pass run at ``spatial``.

    With the tail flush on, this is exactly the set of records contained in
    some window of consecutive records with pairwise distances < ``spatial``,
    span >= delta_t, and internal gaps <= delta_t (the discrete dense-stay
    membership), which is what the recall accounting counts.
    """
    if len(traj) == 0:
        return np.zeros(0, dtype=bool)
    if ref_lat is None:
        ref_lat = default_ref_lat(traj)
    x, y = project_to_meters(traj.lons, traj.lats, ref_lat)
    flags = np.zeros(len(traj), dtype=bool)
    for s, e in segment_bounds(traj.times, params.delta_t):
        flags[s:e] = _stay_pass(
            x[s:e], y[s:e], traj.times[s:e], spatial, params.delta_t, tail_flush
        )
    return flags


def travel_flags_at(
    traj: Trajectory,
    params: MobilityParams,
    witness: float,
    *,
    ref_lat: float | None = None,
    tail_flush: bool = True,
) -> np.ndarray:
    """Whole-trajectory travel flags with the travel pass run at ``witness``.

    The stay skip uses the standard delta_s/3 stay flags. For witness
    thresholds >= delta_s/3 the skip never changes the outcome: a stay window
    containing the record keeps every in-window point below the witness
    distance, and out-of-window witness pairs straddle the window's >= delta_t
    span and so fail the window test.
    """
    if len(traj) == 0:
        return np.zeros(0, dtype=bool)
    if ref_lat is None:
        ref_lat = default_ref_lat(traj)
    x, y = project_to_meters(traj.lons, traj.lats, ref_lat)
    flags = np.zeros(len(traj), dtype=bool)
    for s, e in segment_bounds(traj.times, params.delta_t):
        xs, ys, ts = x[s:e], y[s:e], traj.times[s:e]
        stay = _stay_pass(xs, ys, ts, params.delta_s / 3.0, params.delta_t, tail_flush)
        flags[s:e] = _travel_pass(xs, ys, ts, stay, witness, params.delta_t)
    return flags


def recall_lower_bounds(
    traj: Trajectory,
    params: MobilityParams,
    *,
    ref_lat: float | None = None,
    tail_flush: bool = True,
) -> RecallBounds:
    """Lower-bound the recall achievable from this trajectory alone.

    Stay: records certified at the conservative escape distance delta_s/3,
    over records that are dense-window members at delta_s (no labeler relying
    only on this trajectory can do better than the latter set). Travel:
    records with bilateral witnesses at delta_s, over records with witnesses
    at delta_s/2 (the corresponding outer bound). Empty denominators yield a
    vacuous bound of 1.0.
    """
    s_num = int(stay_flags_at(traj, params, params.delta_s / 3.0, ref_lat=ref_lat, tail_flush=tail_flush).sum())
    s_den = int(stay_flags_at(traj, params, params.delta_s, ref_lat=ref_lat, tail_flush=tail_flush).sum())
    t_num = int(travel_flags_at(traj, params, params.delta_s, ref_lat=ref_lat, tail_flush=tail_flush).sum())
    t_den = int(travel_flags_at(traj, params, params.delta_s / 2.0, ref_lat=ref_lat, tail_flush=tail_flush).sum())
    stay_bound = 1.0 if s_den == 0 else s_num / s_den
    travel_bound = 1.0 if t_den == 0 else t_num / t_den
    return RecallBounds(stay_bound=stay_bound, travel_bound=travel_bound)
