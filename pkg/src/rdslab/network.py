"""Partially directed networks with a binary node status.

A network holds a status vector plus two edge sets: one-way edges ``(i, j)``
and reciprocated edges ``{i, j}`` (stored with ``i < j``). Everything that
samplers and generators need (degrees, partial in-degrees, block counts,
summary ratios) is computed here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import DataError, DegenerateBlockError, InputError, StatsUndefinedError

__all__ = [
    "PartiallyDirectedNetwork",
    "EdgeBlockCounts",
    "NetworkStats",
    "canonical_edges",
    "partial_in_degree",
    "in_degree",
    "out_degree",
    "block_edge_counts",
    "edge_ratio_in",
    "in_ratio_matrix",
    "network_stats",
    "degree_vectors",
    "read_network",
    "write_network",
]


def _pairs(arr: Iterable | np.ndarray | None) -> np.ndarray:
    if arr is None:
        return np.empty((0, 2), dtype=np.int64)
    if not isinstance(arr, np.ndarray):
        arr = [tuple(p) for p in arr]
    a = np.asarray(arr, dtype=np.int64)
    if a.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if a.ndim != 2 or a.shape[1] != 2:
        raise InputError("edge arrays must have shape (m, 2)")
    return a


def _sort_pairs(a: np.ndarray) -> np.ndarray:
    if len(a) == 0:
        return a
    order = np.lexsort((a[:, 1], a[:, 0]))
    return a[order]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PartiallyDirectedNetwork:
    """Immutable canonical network.

    Invariants (checked on construction): no self pairs, no duplicates,
    no anti-parallel directed pairs, and no pair that is both directed and
    undirected. Edge arrays are kept lexicographically sorted.
    """

    n: int
    status: np.ndarray
    directed: np.ndarray
    undirected: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        if n < 0:
            raise InputError("node count must be non-negative")
        status = np.asarray(self.status, dtype=np.int8).reshape(-1)
        if status.shape[0] != n:
            raise InputError(f"status has length {status.shape[0]}, expected {n}")
        if np.any((status != 0) & (status != 1)):
            raise InputError("status values must be 0 or 1")
        d = _pairs(self.directed)
        u = _pairs(self.undirected)
        if len(u):
            u = np.sort(u, axis=1)
        d, u = _sort_pairs(d), _sort_pairs(u)
        _validate(n, d, u)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "status", _readonly(status))
        object.__setattr__(self, "directed", _readonly(d))
        object.__setattr__(self, "undirected", _readonly(u))

    @classmethod
    def empty(cls, status) -> "PartiallyDirectedNetwork":
        status = np.asarray(status, dtype=np.int8)
        return cls(len(status), status, None, None)

    def with_status(self, status) -> "PartiallyDirectedNetwork":
        return PartiallyDirectedNetwork(self.n, status, self.directed, self.undirected)

    def __eq__(self, other):
        if not isinstance(other, PartiallyDirectedNetwork):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.status, other.status)
            and np.array_equal(self.directed, other.directed)
            and np.array_equal(self.undirected, other.undirected)
        )

    __hash__ = None

    def __repr__(self):
        return (f"PartiallyDirectedNetwork(n={self.n}, infected={self.n1}, "
                f"directed={len(self.directed)}, undirected={len(self.undirected)})")

    @property
    def n1(self) -> int:
        return int(self.status.sum())

    @property
    def n0(self) -> int:
        return self.n - self.n1

    @property
    def n_entries(self) -> int:
        """Number of ones in the adjacency matrix."""
        return len(self.directed) + 2 * len(self.undirected)

    def check_node(self, i) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise InputError(f"node id {i} out of range [0, {self.n})")
        return i

    @cached_property
    def in_degrees(self) -> np.ndarray:
        deg = np.bincount(self.directed[:, 1], minlength=self.n)
        deg += np.bincount(self.undirected.ravel(), minlength=self.n)
        return _readonly(deg.astype(np.int64))

    @cached_property
    def out_degrees(self) -> np.ndarray:
        deg = np.bincount(self.directed[:, 0], minlength=self.n)
        deg += np.bincount(self.undirected.ravel(), minlength=self.n)
        return _readonly(deg.astype(np.int64))

    @cached_property
    def partial_in_degrees(self) -> np.ndarray:
        """Array ``P`` of shape (2, n); ``P[k, i]`` counts i's in/undirected ties from status k."""
        out = np.zeros((2, self.n), dtype=np.int64)
        z = self.status
        d, u = self.directed, self.undirected
        for k in (0, 1):
            src = d[z[d[:, 0]] == k]
            out[k] += np.bincount(src[:, 1], minlength=self.n)
            a = u[z[u[:, 0]] == k]
            out[k] += np.bincount(a[:, 1], minlength=self.n)
            b = u[z[u[:, 1]] == k]
            out[k] += np.bincount(b[:, 0], minlength=self.n)
        return _readonly(out)

    @cached_property
    def contacts(self) -> list[np.ndarray]:
        """Per-node sorted array of out-neighbours and undirected neighbours."""
        src = np.concatenate([self.directed[:, 0], self.undirected[:, 0], self.undirected[:, 1]])
        dst = np.concatenate([self.directed[:, 1], self.undirected[:, 1], self.undirected[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        bounds = np.searchsorted(src, np.arange(self.n + 1))
        return [dst[bounds[i]:bounds[i + 1]] for i in range(self.n)]

    def adjacency(self) -> np.ndarray:
        """Dense 0/1 adjacency matrix; meant for small networks and tests."""
        y = np.zeros((self.n, self.n), dtype=np.int8)
        if len(self.directed):
            y[self.directed[:, 0], self.directed[:, 1]] = 1
        if len(self.undirected):
            y[self.undirected[:, 0], self.undirected[:, 1]] = 1
            y[self.undirected[:, 1], self.undirected[:, 0]] = 1
        return y

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "status": [int(s) for s in self.status],
            "directed": self.directed.tolist(),
            "undirected": self.undirected.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PartiallyDirectedNetwork":
        try:
            return cls(obj["n"], obj["status"], obj["directed"], obj["undirected"])
        except KeyError as exc:
            raise InputError(f"network object is missing key {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _validate(n: int, d: np.ndarray, u: np.ndarray) -> None:
    for name, a in (("directed", d), ("undirected", u)):
        if len(a) == 0:
            continue
        if a.min() < 0 or a.max() >= n:
            raise InputError(f"{name} edge references a node outside [0, {n})")
        if np.any(a[:, 0] == a[:, 1]):
            raise InputError(f"{name} edge set contains a self pair")
        keys = a[:, 0] * n + a[:, 1]
        if len(np.unique(keys)) != len(keys):
            raise InputError(f"{name} edge set contains duplicates")
    if len(d):
        fwd = d[:, 0] * n + d[:, 1]
        rev = d[:, 1] * n + d[:, 0]
        if np.intersect1d(fwd, rev).size:
            raise InputError("directed edge set contains an anti-parallel pair")
        if len(u):
            lo = np.minimum(d[:, 0], d[:, 1]) * n + np.maximum(d[:, 0], d[:, 1])
            if np.intersect1d(lo, u[:, 0] * n + u[:, 1]).size:
                raise InputError("a pair is present in both the directed and undirected sets")


def canonical_edges(n: int, directed, undirected) -> tuple[np.ndarray, np.ndarray, dict[str, int]]:
    """Reduce arbitrary edge multisets to canonical form.

    Loops are dropped, repeated copies collapse, anti-parallel directed pairs
    become undirected, and a directed edge that coexists with an undirected
    one on the same pair is absorbed into it. Returns the sorted
    ``(directed, undirected)`` arrays and a tally of every rule applied.
    """
    d = _pairs(directed)
    u = _pairs(undirected)
    report = {"loops": 0, "parallel_directed": 0, "parallel_undirected": 0,
              "antiparallel": 0, "mixed": 0}

    loops_d = d[:, 0] == d[:, 1]
    loops_u = u[:, 0] == u[:, 1]
    report["loops"] = int(loops_d.sum() + loops_u.sum())
    d, u = d[~loops_d], u[~loops_u]

    dk = np.unique(d[:, 0] * n + d[:, 1])
    report["parallel_directed"] = int(len(d) - len(dk))
    lo, hi = np.minimum(u[:, 0], u[:, 1]), np.maximum(u[:, 0], u[:, 1])
    uk = np.unique(lo * n + hi)
    report["parallel_undirected"] = int(len(u) - len(uk))

    src, dst = dk // n, dk % n
    rev = dst * n + src
    anti = np.isin(rev, dk)
    report["antiparallel"] = int(anti.sum() // 2)
    keep = ~anti
    # canonical undirected key of every directed edge
    dlo = np.minimum(src, dst) * n + np.maximum(src, dst)
    mixed = keep & np.isin(dlo, uk)
    report["mixed"] = int(mixed.sum())
    keep &= ~mixed

    new_u = np.unique(np.concatenate([uk, dlo[anti]]))
    d_out = np.stack([src[keep], dst[keep]], axis=1) if keep.any() else np.empty((0, 2), np.int64)
    u_out = np.stack([new_u // n, new_u % n], axis=1) if len(new_u) else np.empty((0, 2), np.int64)
    return _sort_pairs(d_out), _sort_pairs(u_out), report


def partial_in_degree(net: PartiallyDirectedNetwork, i: int, k: int) -> int:
    i = net.check_node(i)
    if k not in (0, 1):
        raise InputError("status must be 0 or 1")
    return int(net.partial_in_degrees[k, i])


def in_degree(net: PartiallyDirectedNetwork, i: int) -> int:
    return int(net.in_degrees[net.check_node(i)])


def out_degree(net: PartiallyDirectedNetwork, i: int) -> int:
    return int(net.out_degrees[net.check_node(i)])


@dataclass(frozen=True)
class EdgeBlockCounts:
    """Adjacency-entry counts per (origin status, target status) block."""

    e11: int
    e10: int
    e01: int
    e00: int

    def __post_init__(self):
        if min(self.e11, self.e10, self.e01, self.e00) < 0:
            raise InputError("block counts must be non-negative")

    def get(self, k: int, l: int) -> int:
        return ((self.e00, self.e01), (self.e10, self.e11))[k][l]

    @property
    def matrix(self) -> np.ndarray:
        """``M[k, l] = e_kl``."""
        return np.array([[self.e00, self.e01], [self.e10, self.e11]], dtype=np.int64)

    @property
    def total(self) -> int:
        return self.e11 + self.e10 + self.e01 + self.e00


def block_edge_counts(net: PartiallyDirectedNetwork) -> EdgeBlockCounts:
    z = net.status.astype(np.int64)
    m = np.zeros(4, dtype=np.int64)
    d, u = net.directed, net.undirected
    m += np.bincount(2 * z[d[:, 0]] + z[d[:, 1]], minlength=4)
    m += np.bincount(2 * z[u[:, 0]] + z[u[:, 1]], minlength=4)
    m += np.bincount(2 * z[u[:, 1]] + z[u[:, 0]], minlength=4)
    return EdgeBlockCounts(e11=int(m[3]), e10=int(m[2]), e01=int(m[1]), e00=int(m[0]))


def edge_ratio_in(counts: EdgeBlockCounts, l: int, k: int, exact: bool = False):
    """Share of the entries pointing into status ``l`` that originate in status ``k``."""
    if l not in (0, 1) or k not in (0, 1):
        raise InputError("statuses must be 0 or 1")
    denom = counts.get(0, l) + counts.get(1, l)
    if denom == 0:
        raise DegenerateBlockError(f"no adjacency entries point into status {l}")
    r = Fraction(counts.get(k, l), denom)
    return r if exact else float(r)


def in_ratio_matrix(counts: EdgeBlockCounts, fallback: float | None = None) -> np.ndarray:
    """2x2 array ``R[l, k]`` of incoming-edge ratios.

    With ``fallback`` set, a status with no incoming entries gets the row
    ``(1 - fallback, fallback)`` instead of raising.
    """
    r = np.empty((2, 2))
    for l in (0, 1):
        try:
            r[l] = [edge_ratio_in(counts, l, 0), edge_ratio_in(counts, l, 1)]
        except DegenerateBlockError:
            if fallback is None:
                raise
            r[l] = [1.0 - fallback, fallback]
    return r


@dataclass(frozen=True)
class NetworkStats:
    h: float
    m: float
    w: float
    alpha: float
    lam: float
    mu: float

    def to_dict(self) -> dict:
        return {"h": self.h, "m": self.m, "w": self.w, "alpha": self.alpha,
                "lambda": self.lam, "mu": self.mu}


def network_stats(net: PartiallyDirectedNetwork) -> NetworkStats:
    """Realized homophily, attractiveness/activity ratios, directed share, mean degree, prevalence."""
    if net.n == 0:
        raise StatsUndefinedError("empty network")
    n1, n0 = net.n1, net.n0
    if n1 == 0 or n0 == 0:
        raise StatsUndefinedError("h, m and w need both status groups to be non-empty")
    c = block_edge_counts(net)
    cross = c.e10 + c.e01
    if cross == 0 or n1 < 2:
        raise StatsUndefinedError("h is undefined: no cross-status entries")
    h = (c.e11 / (n1 * (n1 - 1))) / (cross / (2 * n1 * n0))
    infected = net.status == 1
    din, dout = net.in_degrees, net.out_degrees
    if din[~infected].sum() == 0:
        raise StatsUndefinedError("m is undefined: uninfected mean in-degree is zero")
    if dout[~infected].sum() == 0:
        raise StatsUndefinedError("w is undefined: uninfected mean out-degree is zero")
    m = din[infected].mean() / din[~infected].mean()
    w = dout[infected].mean() / dout[~infected].mean()
    entries = net.n_entries
    if entries == 0:
        raise StatsUndefinedError("alpha is undefined: no edges")
    return NetworkStats(
        h=float(h), m=float(m), w=float(w),
        alpha=len(net.directed) / entries,
        lam=entries / net.n,
        mu=n1 / net.n,
    )


def degree_vectors(net: PartiallyDirectedNetwork) -> np.ndarray:
    """Realized six-component degrees, shape (n, 6).

    Column order is (in1, in0, out1, out0, und1, und0): directed in-edges by
    origin status, directed out-edges by target status, undirected ties by
    neighbour status.
    """
    z = net.status.astype(np.int64)
    out = np.zeros((net.n, 6), dtype=np.int64)
    d, u = net.directed, net.undirected
    # column index = base + (1 - other status)
    np.add.at(out, (d[:, 1], 1 - z[d[:, 0]]), 1)
    np.add.at(out, (d[:, 0], 3 - z[d[:, 1]]), 1)
    np.add.at(out, (u[:, 0], 5 - z[u[:, 1]]), 1)
    np.add.at(out, (u[:, 1], 5 - z[u[:, 0]]), 1)
    return out


def write_network(net: PartiallyDirectedNetwork, path) -> None:
    Path(path).write_text(net.to_json() + "\n", encoding="utf-8")


def read_network(path) -> PartiallyDirectedNetwork:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    try:
        return PartiallyDirectedNetwork.from_dict(obj)
    except InputError as exc:
        raise DataError(f"{path}: {exc}") from None
