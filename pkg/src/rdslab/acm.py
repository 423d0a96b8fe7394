"""Attributed configuration model for partially directed networks.

Every node carries six stub counts, indexed by direction and by the status
of the node at the other end::

    (in1, in0, out1, out0, und1, und0)

``in_k`` stubs accept edges from status-k nodes, ``out_k`` stubs send edges
to status-k nodes and ``und_k`` stubs form reciprocated ties with status-k
nodes. Stubs are paired pool by pool, then the multigraph is reduced to a
simple canonical network.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import stats

from .errors import DataError, InputError
from .network import PartiallyDirectedNetwork, canonical_edges, degree_vectors

COMPONENTS = ("in1", "in0", "out1", "out0", "und1", "und0")


class DegreeVector(NamedTuple):
    in1: int
    in0: int
    out1: int
    out0: int
    und1: int
    und0: int


@dataclass(frozen=True)
class DegreeDistributionSpec:
    """Per-status law of the stub vector.

    Only the ``"poisson"`` family is built in: six independent Poisson counts
    whose means are given per status in ``COMPONENTS`` order.
    """

    means: dict[int, tuple[float, ...]]
    family: str = "poisson"

    def __post_init__(self):
        if self.family != "poisson":
            raise InputError(f"unsupported degree family {self.family!r}")
        means = {}
        for z in (0, 1):
            if z not in self.means:
                raise InputError(f"missing means for status {z}")
            vec = tuple(float(x) for x in self.means[z])
            if len(vec) != 6:
                raise InputError("each status needs six component means")
            if not all(math.isfinite(x) for x in vec):
                raise InputError("component means must be finite")
            if any(x < 0 for x in vec):
                raise InputError("component means must be non-negative")
            means[z] = vec
        object.__setattr__(self, "means", means)

    def mean(self, z: int, component: str) -> float:
        return self.means[z][COMPONENTS.index(component)]

    def sample(self, z: int, size: int, rng: np.random.Generator) -> np.ndarray:
        return rng.poisson(self.means[z], size=(size, 6)).astype(np.int64)

    def pmf(self, z: int, vectors: np.ndarray) -> np.ndarray:
        """Exact probability of each row of ``vectors`` under the status-z law."""
        vectors = np.atleast_2d(vectors)
        p = np.ones(len(vectors))
        for c, lam in enumerate(self.means[z]):
            p *= stats.poisson.pmf(vectors[:, c], lam) if lam > 0 else (vectors[:, c] == 0)
        return p

    def to_dict(self) -> dict:
        return {"family": self.family,
                "means": {str(z): list(self.means[z]) for z in (1, 0)}}

    @classmethod
    def from_dict(cls, obj: dict) -> "DegreeDistributionSpec":
        try:
            raw = obj["means"]
            means = {int(k): v for k, v in raw.items()}
        except (KeyError, AttributeError, ValueError) as exc:
            raise InputError(f"bad degree spec: {exc}") from None
        return cls(means=means, family=obj.get("family", "poisson"))

    @classmethod
    def load(cls, path) -> "DegreeDistributionSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from None


@dataclass
class CompatibilityResult:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def check_mean_compatibility(spec: DegreeDistributionSpec, phi: float,
                             tol: float = 1e-9) -> CompatibilityResult:
    """Check the mean relations under which the degree law is reproduced as N grows.

    ``phi`` is N1/N0. Each relation ``a == b`` passes when
    ``|a - b| <= tol * max(|a|, |b|)``; all failures are reported.
    """
    if not (math.isfinite(phi) and phi > 0):
        raise InputError("phi must be finite and positive")
    if not math.isfinite(tol) or tol < 0:
        raise InputError("tol must be a finite non-negative number")
    d = spec.mean
    conditions = [
        ("delta[1->1] == delta[1<-1]", d(1, "out1"), d(1, "in1")),
        ("delta[0->0] == delta[0<-0]", d(0, "out0"), d(0, "in0")),
        ("delta[0->1] == phi*delta[1<-0]", d(0, "out1"), phi * d(1, "in0")),
        ("delta[0<-1] == phi*delta[1->0]", d(0, "in1"), phi * d(1, "out0")),
        ("delta[0<->1] == phi*delta[1<->0]", d(0, "und1"), phi * d(1, "und0")),
    ]
    bad = [name for name, a, b in conditions
           if abs(a - b) > tol * max(abs(a), abs(b))]
    return CompatibilityResult(ok=not bad, violations=bad)


def draw_degrees(spec: DegreeDistributionSpec, statuses, rng: np.random.Generator) -> np.ndarray:
    """Independent stub vectors, shape (n, 6), one row per node."""
    statuses = np.asarray(statuses, dtype=np.int8)
    if statuses.size < 1:
        raise InputError("need at least one node")
    out = np.zeros((len(statuses), 6), dtype=np.int64)
    for z in (1, 0):
        idx = np.flatnonzero(statuses == z)
        if len(idx):
            out[idx] = spec.sample(z, len(idx), rng)
    return out


@dataclass
class StubMultigraph:
    """Pairing result before simplification: may hold loops and repeated edges."""

    status: np.ndarray
    directed: np.ndarray
    undirected: np.ndarray
    leftovers: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_network(cls, net: PartiallyDirectedNetwork) -> "StubMultigraph":
        return cls(np.array(net.status), np.array(net.directed), np.array(net.undirected), {})


class _Pool:
    """Stub owners of one type; uniform draw with swap-remove."""

    __slots__ = ("items",)

    def __init__(self, owners):
        self.items = list(owners)

    def __len__(self):
        return len(self.items)

    def pop_random(self, rng) -> int:
        k = int(rng.integers(len(self.items)))
        items = self.items
        items[k], items[-1] = items[-1], items[k]
        return items.pop()


def _owners(degrees: np.ndarray, mask: np.ndarray, column: int) -> np.ndarray:
    idx = np.flatnonzero(mask)
    return np.repeat(idx, degrees[idx, column])


def _pair_pools(selectable: dict, partner_of: dict, rng) -> tuple[list, dict]:
    """Select a stub uniformly among all selectable stubs, then a partner uniformly
    from its counter-pool; repeat until nothing selectable remains.

    Returns the list of ``(selected_owner, partner_owner, selected_pool)`` and
    the leftover count per pool.
    """
    pairs = []
    leftovers = Counter()
    names = list(selectable)
    while True:
        sizes = np.array([len(selectable[k]) for k in names], dtype=float)
        total = sizes.sum()
        if total == 0:
            break
        name = names[int(np.searchsorted(np.cumsum(sizes), rng.random() * total, side="right"))]
        owner = selectable[name].pop_random(rng)
        counter = partner_of[name]
        if len(counter) == 0:
            leftovers[name] += 1
            continue
        pairs.append((owner, counter.pop_random(rng), name))
    return pairs, leftovers


def pair_stubs(degrees, statuses, rng: np.random.Generator) -> StubMultigraph:
    """Randomly pair stubs pool by pool.

    Undirected pools ``1<->1`` and ``0<->0`` pair internally, ``1<->0`` pairs
    with ``0<->1``. Every incoming stub ``z<-k`` is matched with an outgoing
    stub ``k->z`` of a status-k node. Unpaired stubs are tallied in
    ``leftovers`` and dropped.
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    statuses = np.asarray(statuses, dtype=np.int8)
    if degrees.shape != (len(statuses), 6):
        raise InputError("degrees must have shape (n, 6) aligned with statuses")
    if np.any(degrees < 0):
        raise InputError("stub counts must be non-negative")
    inf, uninf = statuses == 1, statuses == 0
    col = {c: i for i, c in enumerate(COMPONENTS)}

    # undirected stubs: pool "z<->k" lives on status-z nodes
    und = {
        "1<->1": _Pool(_owners(degrees, inf, col["und1"])),
        "0<->0": _Pool(_owners(degrees, uninf, col["und0"])),
        "1<->0": _Pool(_owners(degrees, inf, col["und0"])),
        "0<->1": _Pool(_owners(degrees, uninf, col["und1"])),
    }
    und_partner = {"1<->1": und["1<->1"], "0<->0": und["0<->0"],
                   "1<->0": und["0<->1"], "0<->1": und["1<->0"]}
    und_pairs, und_left = _pair_pools(und, und_partner, rng)

    incoming = {
        "1<-1": _Pool(_owners(degrees, inf, col["in1"])),
        "1<-0": _Pool(_owners(degrees, inf, col["in0"])),
        "0<-1": _Pool(_owners(degrees, uninf, col["in1"])),
        "0<-0": _Pool(_owners(degrees, uninf, col["in0"])),
    }
    outgoing = {
        "1->1": _Pool(_owners(degrees, inf, col["out1"])),
        "0->1": _Pool(_owners(degrees, uninf, col["out1"])),
        "1->0": _Pool(_owners(degrees, inf, col["out0"])),
        "0->0": _Pool(_owners(degrees, uninf, col["out0"])),
    }
    # in-stub "z<-k" takes an out-stub "k->z"
    in_partner = {name: outgoing[f"{name[-1]}->{name[0]}"] for name in incoming}
    dir_pairs, in_left = _pair_pools(incoming, in_partner, rng)

    leftovers = {name: 0 for name in (*und, *incoming, *outgoing)}
    leftovers.update(und_left)
    leftovers.update(in_left)
    for name, pool in outgoing.items():
        leftovers[name] = len(pool)

    directed = np.array([(src, dst) for dst, src, _ in dir_pairs], dtype=np.int64).reshape(-1, 2)
    undirected = np.array([(a, b) for a, b, _ in und_pairs], dtype=np.int64).reshape(-1, 2)
    return StubMultigraph(np.array(statuses), directed, undirected, leftovers)


@dataclass
class SimplificationReport:
    loops: int = 0
    parallel_directed: int = 0
    parallel_undirected: int = 0
    antiparallel: int = 0
    mixed: int = 0
    unconnected_stubs: dict[str, int] = field(default_factory=dict)

    @property
    def is_empty(self) -> bool:
        return not (self.loops or self.parallel_directed or self.parallel_undirected
                    or self.antiparallel or self.mixed or any(self.unconnected_stubs.values()))

    def to_dict(self) -> dict:
        return {
            "loops": self.loops,
            "parallel_directed": self.parallel_directed,
            "parallel_undirected": self.parallel_undirected,
            "antiparallel": self.antiparallel,
            "mixed": self.mixed,
            "unconnected_stubs": dict(sorted(self.unconnected_stubs.items())),
        }


def simplify(g: StubMultigraph) -> tuple[PartiallyDirectedNetwork, SimplificationReport]:
    """Drop loops and leftover stubs, collapse repeats, merge reciprocal pairs."""
    n = len(g.status)
    d, u, counts = canonical_edges(n, g.directed, g.undirected)
    report = SimplificationReport(**counts, unconnected_stubs=dict(g.leftovers))
    return PartiallyDirectedNetwork(n, g.status, d, u), report


def generate_acm(spec: DegreeDistributionSpec, n: int, n1: int, rng: np.random.Generator,
                 return_report: bool = False):
    """Sample one simple network; the first ``n1`` nodes are infected."""
    if not 0 < n1 < n:
        raise InputError("need 0 < n1 < n")
    statuses = np.zeros(n, dtype=np.int8)
    statuses[:n1] = 1
    degrees = draw_degrees(spec, statuses, rng)
    net, report = simplify(pair_stubs(degrees, statuses, rng))
    return (net, report) if return_report else net


def empirical_degree_distribution(net: PartiallyDirectedNetwork, status: int) -> dict[DegreeVector, float]:
    """Share of status-``status`` nodes holding each realized six-component degree."""
    if status not in (0, 1):
        raise InputError("status must be 0 or 1")
    rows = degree_vectors(net)[net.status == status]
    if len(rows) == 0:
        raise InputError(f"no nodes with status {status}")
    uniq, cnt = np.unique(rows, axis=0, return_counts=True)
    return {DegreeVector(*map(int, r)): c / len(rows) for r, c in zip(uniq, cnt)}


def total_variation(empirical: dict[DegreeVector, float], spec: DegreeDistributionSpec,
                    status: int) -> float:
    """Total-variation distance between an empirical law and the exact spec law.

    Mass the spec puts outside the empirical support is added in closed form,
    so the infinite support needs no truncation.
    """
    if not empirical:
        return 1.0
    vecs = np.array(list(empirical), dtype=np.int64)
    freq = np.array(list(empirical.values()))
    p = spec.pmf(status, vecs)
    return 0.5 * (np.abs(freq - p).sum() + max(0.0, 1.0 - p.sum()))
