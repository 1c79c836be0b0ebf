"""Plain-text spike-train files and result tables.

Train files are UTF-8 text::

    #domain 0 1
    0.12 0.4 0.93|F
    |G
    0.5

The header fixes the window, each following line is one train of ascending
times, an empty line is an empty train and an optional ``|label`` suffix
tags the train's group.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from .core import SpikeTrain, TimeDomain, TrainSample

TIE_SHIFT = 1e-9
PathLike = Union[str, Path]


@dataclass
class LoadedSample:
    sample: TrainSample
    perturbed: int


def _fmt(x: float) -> str:
    return repr(float(x))


def format_trains(sample: TrainSample) -> str:
    d = sample.domain
    lines = [f"#domain {_fmt(d.t_start)} {_fmt(d.t_end)}"]
    for i, tr in enumerate(sample):
        body = " ".join(_fmt(t) for t in tr.times)
        if sample.labels is not None:
            body += f"|{sample.labels[i]}"
        lines.append(body)
    return "\n".join(lines) + "\n"


def write_trains(path: PathLike, sample: TrainSample) -> None:
    Path(path).write_text(format_trains(sample), encoding="utf-8")


def _untie(times: np.ndarray, line_no: int) -> tuple:
    """Shift exact repeats forward by ``TIE_SHIFT``; reject true reversals."""
    out = times.copy()
    moved = 0
    for i in range(1, out.size):
        if times[i] < times[i - 1]:
            raise ValueError(f"line {line_no}: times are not in ascending order")
        if out[i] <= out[i - 1]:
            out[i] = out[i - 1] + TIE_SHIFT
            moved += 1
    return out, moved


def parse_trains(text: str) -> LoadedSample:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("#domain"):
        raise ValueError("train file must start with '#domain <t_start> <t_end>'")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError("malformed #domain header")
    try:
        domain = TimeDomain(float(head[1]), float(head[2]))
    except ValueError as exc:
        raise ValueError(f"bad #domain header: {exc}") from None
    trains: List[SpikeTrain] = []
    labels: List[Optional[str]] = []
    perturbed = 0
    for no, line in enumerate(lines[1:], start=2):
        if line.startswith("#domain"):
            # concatenated files repeat the header; it must agree
            if line.split() != head and [float(x) for x in line.split()[1:]] != [
                    domain.t_start, domain.t_end]:
                raise ValueError(f"line {no}: conflicting #domain header")
            continue
        body, sep, label = line.partition("|")
        labels.append(label.strip() if sep else None)
        try:
            times = np.array([float(tok) for tok in body.split()])
        except ValueError:
            raise ValueError(f"line {no}: non-numeric spike time") from None
        times, moved = _untie(times, no)
        perturbed += moved
        try:
            trains.append(SpikeTrain(times, domain))
        except ValueError as exc:
            raise ValueError(f"line {no}: {exc}") from None
    if not trains:
        raise ValueError("train file contains no trains")
    have = [lab is not None for lab in labels]
    if any(have) and not all(have):
        raise ValueError("either every train or no train must carry a label")
    return LoadedSample(TrainSample(trains, labels if all(have) else None), perturbed)


def read_trains(path: PathLike) -> LoadedSample:
    return parse_trains(Path(path).read_text(encoding="utf-8"))


def split_groups(sample: TrainSample, group_f: Optional[str] = None,
                 group_g: Optional[str] = None):
    """Split a labelled sample into two groups, in order of first appearance by default."""
    if sample.labels is None:
        raise ValueError("grouped input needs a |label on every train")
    seen = list(dict.fromkeys(sample.labels))
    if group_f is None or group_g is None:
        if len(seen) != 2:
            raise ValueError(f"expected exactly two labels, found {len(seen)}")
        group_f, group_g = seen
    out = []
    for lab in (group_f, group_g):
        idx = [i for i, x in enumerate(sample.labels) if x == lab]
        if not idx:
            raise ValueError(f"label {lab!r} does not occur in the file")
        out.append(sample.subset(idx))
    return out[0], out[1], (group_f, group_g)


def write_csv(path: PathLike, rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def read_csv(path: PathLike) -> List[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_json(path: PathLike, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n",
                          encoding="utf-8")


def read_json(path: PathLike):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serialisable")
