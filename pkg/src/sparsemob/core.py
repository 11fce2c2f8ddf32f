"""Domain types and primitive operations for sparse location trajectories.

A trajectory is a time-ordered sequence of (timestamp, longitude, latitude)
records for one device. Timestamps are integer epoch seconds; sub-second
precision is truncated at ingestion. All distance computations in this package
go through a single planar approximation (:func:`planar_distance`) using a
fixed reference latitude per dataset, so that comparisons against thresholds
are consistent across modules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

import numpy as np

EARTH_RADIUS_M = 6_371_000.0
#: meters per degree of latitude (and of longitude at the equator)
METERS_PER_DEGREE = EARTH_RADIUS_M * math.pi / 180.0


class MetricUndefinedError(ValueError):
    """Raised when a metric's minimum-support precondition is not met."""


class MobilityLabel(Enum):
    """Per-record state: a confirmed stop, confirmed movement, or abstention."""

    STAY = "S"
    TRAVEL = "T"
    UNLABELED = "U"

    @property
    def letter(self) -> str:
        return self.value


# Compact integer codes used for label arrays in hot paths.
LABEL_UNLABELED = 0
LABEL_STAY = 1
LABEL_TRAVEL = 2

_LABEL_BY_CODE = (MobilityLabel.UNLABELED, MobilityLabel.STAY, MobilityLabel.TRAVEL)
_CODE_BY_LETTER = {"U": LABEL_UNLABELED, "S": LABEL_STAY, "T": LABEL_TRAVEL}


def label_for_code(code: int) -> MobilityLabel:
    return _LABEL_BY_CODE[code]


def codes_to_letters(codes: np.ndarray) -> list[str]:
    return [_LABEL_BY_CODE[int(c)].value for c in codes]


def letters_to_codes(letters: Iterable[str]) -> np.ndarray:
    try:
        return np.array([_CODE_BY_LETTER[s] for s in letters], dtype=np.int8)
    except KeyError as exc:  # pragma: no cover - defensive
        raise ValueError(f"unknown label letter: {exc.args[0]!r}") from None


@dataclass(frozen=True)
class GeoPoint:
    """A WGS-84 longitude/latitude pair in decimal degrees."""

    lon: float
    lat: float

    def __post_init__(self) -> None:
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude out of range: {self.lon}")
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude out of range: {self.lat}")


@dataclass(frozen=True)
class TrajectoryRecord:
    """One observation: where a device reported itself at one instant."""

    time: int
    location: GeoPoint
    device: str

    def __post_init__(self) -> None:
        if self.time < 0:
            raise ValueError(f"timestamp must be non-negative, got {self.time}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A single device's records in strictly increasing time order.

    Stored in columnar form (numpy arrays) because the labeling passes and the
    simulator work on millions of records. ``times`` are int64 epoch seconds,
    strictly increasing; duplicate timestamps must be rejected upstream at
    ingestion. A zero-length trajectory is permitted only as the output of
    down-sampling at rate 0; ingestion always yields at least one record.
    """

    device: str
    times: np.ndarray
    lons: np.ndarray
    lats: np.ndarray

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.int64)
        lons = np.asarray(self.lons, dtype=np.float64)
        lats = np.asarray(self.lats, dtype=np.float64)
        if not (times.ndim == lons.ndim == lats.ndim == 1):
            raise ValueError("times, lons, lats must be one-dimensional")
        if not (len(times) == len(lons) == len(lats)):
            raise ValueError("times, lons, lats must have equal length")
        if len(times) > 0:
            if times[0] < 0:
                raise ValueError("timestamps must be non-negative")
            if len(times) > 1 and not (np.diff(times) > 0).all():
                raise ValueError(
                    f"timestamps must be strictly increasing for device {self.device!r}"
                )
            if np.abs(lons).max() > 180.0 or np.abs(lats).max() > 90.0:
                raise ValueError("coordinates out of range")
        for name, arr in (("times", times), ("lons", lons), ("lats", lats)):
            arr = arr.copy() if not arr.flags.owndata else arr
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_records(cls, records: Sequence[TrajectoryRecord]) -> "Trajectory":
        if not records:
            raise ValueError("from_records requires at least one record")
        device = records[0].device
        if any(r.device != device for r in records):
            raise ValueError("records mix devices")
        return cls(
            device=device,
            times=np.array([r.time for r in records], dtype=np.int64),
            lons=np.array([r.location.lon for r in records], dtype=np.float64),
            lats=np.array([r.location.lat for r in records], dtype=np.float64),
        )

    def __len__(self) -> int:
        return len(self.times)

    def record(self, i: int) -> TrajectoryRecord:
        return TrajectoryRecord(
            time=int(self.times[i]),
            location=GeoPoint(float(self.lons[i]), float(self.lats[i])),
            device=self.device,
        )

    def records(self) -> Iterator[TrajectoryRecord]:
        for i in range(len(self)):
            yield self.record(i)


@dataclass(frozen=True)
class MobilityParams:
    """Spatial/temporal thresholds defining a stay: within ``delta_s`` meters
    for at least ``delta_t`` seconds."""

    delta_s: float = 800.0
    delta_t: float = 1800.0

    def __post_init__(self) -> None:
        if not self.delta_s > 0:
            raise ValueError(f"delta_s must be positive, got {self.delta_s}")
        if not self.delta_t > 0:
            raise ValueError(f"delta_t must be positive, got {self.delta_t}")


@dataclass(frozen=True, eq=False)
class DenseSegment:
    """A maximal run of consecutive records whose internal gaps are all
    <= the slicing threshold; spans ``[start, stop)`` of the parent."""

    parent: Trajectory
    start: int
    stop: int

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.stop <= len(self.parent)):
            raise ValueError(f"invalid segment span [{self.start}, {self.stop})")

    def __len__(self) -> int:
        return self.stop - self.start

    @property
    def times(self) -> np.ndarray:
        return self.parent.times[self.start : self.stop]

    @property
    def lons(self) -> np.ndarray:
        return self.parent.lons[self.start : self.stop]

    @property
    def lats(self) -> np.ndarray:
        return self.parent.lats[self.start : self.stop]


def planar_distance(a: GeoPoint, b: GeoPoint, ref_lat: float) -> float:
    """Planar-approximation distance in meters.

    Latitude differences map to meters at the constant rate
    ``EARTH_RADIUS_M * pi / 180`` per degree; longitude differences are scaled
    by cos(ref_lat). ``ref_lat`` is fixed per dataset so that the induced
    metric is a true metric (symmetry and the triangle inequality hold), which
    the labeling proofs rely on.
    """
    k = METERS_PER_DEGREE
    dy = (a.lat - b.lat) * k
    dx = (a.lon - b.lon) * k * math.cos(math.radians(ref_lat))
    return math.hypot(dx, dy)


def project_to_meters(
    lons: np.ndarray, lats: np.ndarray, ref_lat: float
) -> tuple[np.ndarray, np.ndarray]:
    """Project lon/lat arrays to planar (x, y) meters about ``ref_lat``.

    Pairwise Euclidean distances in this plane equal :func:`planar_distance`.
    """
    k = METERS_PER_DEGREE
    x = np.asarray(lons, dtype=np.float64) * (k * math.cos(math.radians(ref_lat)))
    y = np.asarray(lats, dtype=np.float64) * k
    return x, y


def default_ref_lat(traj: Trajectory) -> float:
    """Dataset reference latitude convention: latitude of the first record."""
    if len(traj) == 0:
        raise ValueError("cannot take a reference latitude from an empty trajectory")
    return float(traj.lats[0])


def segment_bounds(times: np.ndarray, delta_t: float) -> list[tuple[int, int]]:
    """Half-open [start, stop) bounds of maximal runs with gaps <= delta_t.

    Cuts fall exactly at consecutive gaps strictly greater than ``delta_t``.
    """
    n = len(times)
    if n == 0:
        return []
    cuts = np.nonzero(np.diff(times) > delta_t)[0] + 1
    starts = np.concatenate(([0], cuts))
    stops = np.concatenate((cuts, [n]))
    return list(zip(starts.tolist(), stops.tolist()))


def divide(traj: Trajectory, delta_t: float) -> list[DenseSegment]:
    """Slice a trajectory at every time gap exceeding ``delta_t`` seconds.

    The segments partition the records; no information is discarded. Within a
    segment every consecutive gap is <= delta_t, and the gaps adjacent to a
    segment boundary (where present) are > delta_t.
    """
    return [DenseSegment(traj, s, e) for s, e in segment_bounds(traj.times, delta_t)]


def global_sparsity(traj: Trajectory) -> float:
    """Mean consecutive time gap in seconds.

    Raises :class:`MetricUndefinedError` for trajectories with fewer than two
    records, where no gap exists.
    """
    if len(traj) < 2:
        raise MetricUndefinedError(
            f"global sparsity undefined for {len(traj)} record(s)"
        )
    return float(np.diff(traj.times).mean())


def local_coverage(traj: Trajectory, delta_t: float) -> float:
    """Fraction of records that are not temporally isolated.

    A record is isolated when both of its adjacent gaps exceed ``delta_t``.
    Endpoint records have only one adjacent gap and are never isolated, so
    trajectories with fewer than three records score 1.0.
    """
    n = len(traj)
    if n < 1:
        raise MetricUndefinedError("local coverage undefined for an empty trajectory")
    if n < 3:
        return 1.0
    gaps = np.diff(traj.times)
    isolated = int(((gaps[:-1] > delta_t) & (gaps[1:] > delta_t)).sum())
    return (n - isolated) / n
