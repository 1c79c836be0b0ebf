"""Penalised elastic distance between spike trains.

For trains ``f = (t_1..t_M)`` and ``g = (s_1..s_N)`` the squared distance is

    M + N - 2 * (#matched pairs) + mu * int (1 - sqrt(gamma'))^2

minimised over time warpings ``gamma``. Warpings are restricted to
piecewise-linear maps with nodes at the window ends and at matched pairs;
for such a map a segment taking length ``ds`` to length ``dt`` contributes
``(sqrt(dt) - sqrt(ds))^2`` to the penalty, and the optimum over monotone
matchings is found by dynamic programming.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numba
import numpy as np

from .core import SpikeTrain


@dataclass(frozen=True)
class Alignment:
    pairs: Tuple[Tuple[int, int], ...]
    cost: float


@numba.njit(cache=True)
def _elastic_dp(t, s, lo, hi, mu):
    m, n = t.size, s.size
    tt = np.empty(m + 1)
    ss = np.empty(n + 1)
    tt[0] = lo
    ss[0] = lo
    tt[1:] = t
    ss[1:] = s
    inf = np.inf
    cost = np.full((m + 1, n + 1), inf)
    parent = np.full((m + 1, n + 1, 2), -1, dtype=np.int64)
    cost[0, 0] = 0.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            best = inf
            bi, bj = -1, -1
            # predecessor is the origin or any earlier matched pair
            for ip in range(0, i):
                for jp in range(0, j):
                    if (ip == 0) != (jp == 0):
                        continue
                    c0 = cost[ip, jp]
                    if c0 == inf:
                        continue
                    d = np.sqrt(tt[i] - tt[ip]) - np.sqrt(ss[j] - ss[jp])
                    c = c0 + mu * d * d - 2.0
                    if c < best:
                        best = c
                        bi, bj = ip, jp
            cost[i, j] = best
            parent[i, j, 0] = bi
            parent[i, j, 1] = bj
    best = inf
    ei, ej = 0, 0
    for i in range(0, m + 1):
        for j in range(0, n + 1):
            if (i == 0) != (j == 0):
                continue
            if cost[i, j] == inf:
                continue
            d = np.sqrt(hi - tt[i]) - np.sqrt(hi - ss[j])
            c = cost[i, j] + mu * d * d
            if c < best:
                best = c
                ei, ej = i, j
    return best + m + n, parent, ei, ej


def elastic_alignment(f: SpikeTrain, g: SpikeTrain, mu: float) -> Alignment:
    """Optimal matching and squared cost between two trains."""
    if f.domain != g.domain:
        raise ValueError("trains live on different time domains")
    if mu < 0:
        raise ValueError("penalty mu must be non-negative")
    d = f.domain
    sq, parent, i, j = _elastic_dp(np.ascontiguousarray(f.times, dtype=float),
                                   np.ascontiguousarray(g.times, dtype=float),
                                   float(d.t_start), float(d.t_end), float(mu))
    pairs = []
    while i > 0 and j > 0:
        pairs.append((int(i) - 1, int(j) - 1))
        i, j = parent[i, j]
    return Alignment(tuple(reversed(pairs)), max(float(sq), 0.0))


def d_mu(f: SpikeTrain, g: SpikeTrain, mu: float = 20.0) -> float:
    """Elastic spike-train distance with warping penalty ``mu``."""
    return float(np.sqrt(elastic_alignment(f, g, mu).cost))


def distance_matrix(trains_a, trains_b, mu: float = 20.0) -> np.ndarray:
    return np.array([[d_mu(a, b, mu) for b in trains_b] for a in trains_a])
