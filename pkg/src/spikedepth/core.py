"""Domain types shared across the package: time windows, spike trains, samples."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class TimeDomain:
    """Closed observation window ``[t_start, t_end]``."""

    t_start: float
    t_end: float

    def __post_init__(self):
        if not (np.isfinite(self.t_start) and np.isfinite(self.t_end)):
            raise ValueError("time domain bounds must be finite")
        if not self.t_start < self.t_end:
            raise ValueError(
                f"t_start must be < t_end, got [{self.t_start}, {self.t_end}]")

    @property
    def length(self) -> float:
        return self.t_end - self.t_start


UNIT = TimeDomain(0.0, 1.0)


class SpikeTrain:
    """Strictly increasing event times inside the open window ``(t_start, t_end)``.

    Times are stored as a read-only float array. Events exactly on a window
    boundary and repeated times are rejected, since every downstream depth
    formula takes logs of inter-event gaps.
    """

    __slots__ = ("_times", "domain")

    def __init__(self, times: Iterable[float], domain: TimeDomain = UNIT):
        arr = np.array(list(times) if not isinstance(times, np.ndarray) else times,
                       dtype=float).reshape(-1)
        if arr.size:
            if not np.all(np.isfinite(arr)):
                raise ValueError("spike times must be finite")
            if arr[0] <= domain.t_start or arr[-1] >= domain.t_end:
                raise ValueError(
                    f"spike times must lie strictly inside ({domain.t_start}, "
                    f"{domain.t_end})")
            if arr.size > 1 and np.any(np.diff(arr) <= 0):
                raise ValueError("spike times must be strictly increasing")
        arr.setflags(write=False)
        self._times = arr
        self.domain = domain

    @property
    def times(self) -> np.ndarray:
        return self._times

    @property
    def k(self) -> int:
        return int(self._times.size)

    def __len__(self) -> int:
        return self.k

    def __iter__(self):
        return iter(self._times)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpikeTrain):
            return NotImplemented
        return self.domain == other.domain and np.array_equal(self._times, other._times)

    def __hash__(self):
        return hash((self.domain, self._times.tobytes()))

    def __repr__(self) -> str:
        return (f"SpikeTrain(k={self.k}, domain=[{self.domain.t_start:g}, "
                f"{self.domain.t_end:g}])")


def isi_vector(train: SpikeTrain) -> np.ndarray:
    """Inter-spike intervals including both boundary gaps.

    Returns the ``k + 1`` gaps ``(s_1 - T1, s_2 - s_1, ..., T2 - s_k)``.

    >>> isi_vector(SpikeTrain([0.25, 0.5]))
    array([0.25, 0.25, 0.5 ])
    """
    d = train.domain
    padded = np.concatenate(([d.t_start], train.times, [d.t_end]))
    return np.diff(padded)


@dataclass(frozen=True)
class TrainSample:
    """A non-empty collection of trains on one shared domain, optionally labelled."""

    trains: tuple
    labels: Optional[tuple] = None
    domain: TimeDomain = field(init=False)

    def __init__(self, trains: Sequence[SpikeTrain], labels: Optional[Sequence] = None):
        trains = tuple(trains)
        if not trains:
            raise ValueError("a sample needs at least one spike train")
        dom = trains[0].domain
        if any(tr.domain != dom for tr in trains):
            raise ValueError("all trains in a sample must share one domain")
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != len(trains):
                raise ValueError("labels and trains differ in length")
        object.__setattr__(self, "trains", trains)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "domain", dom)

    def __len__(self) -> int:
        return len(self.trains)

    def __iter__(self):
        return iter(self.trains)

    def __getitem__(self, idx):
        return self.trains[idx]

    @property
    def counts(self) -> np.ndarray:
        return np.array([tr.k for tr in self.trains], dtype=int)

    @property
    def mean_count(self) -> float:
        return float(self.counts.mean())

    def pooled_times(self) -> np.ndarray:
        if not any(tr.k for tr in self.trains):
            return np.empty(0)
        return np.concatenate([tr.times for tr in self.trains])

    def subset(self, idx) -> "TrainSample":
        idx = list(idx)
        labels = None if self.labels is None else [self.labels[i] for i in idx]
        return TrainSample([self.trains[i] for i in idx], labels)

    def concat(self, other: "TrainSample") -> "TrainSample":
        if self.domain != other.domain:
            raise ValueError("cannot concatenate samples on different domains")
        if (self.labels is None) != (other.labels is None):
            raise ValueError("cannot mix labelled and unlabelled samples")
        labels = None if self.labels is None else self.labels + other.labels
        return TrainSample(self.trains + other.trains, labels)

    def with_labels(self, label) -> "TrainSample":
        return TrainSample(self.trains, [label] * len(self.trains))
