"""Reading SNAP-style edge lists and the edge-thinning transformations."""

from __future__ import annotations

import gzip
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, InputError, ParseError
from .network import PartiallyDirectedNetwork, canonical_edges


@dataclass(frozen=True)
class RawEdgeList:
    """Directed ``(from, to)`` pairs with their original ids, duplicates included."""

    pairs: np.ndarray
    comments: int = 0
    lines: int = 0

    def __post_init__(self):
        p = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if len(p) and p.min() < 0:
            raise InputError("external ids must be non-negative")
        object.__setattr__(self, "pairs", p)

    def __len__(self):
        return len(self.pairs)


def read_snap_edgelist(path) -> RawEdgeList:
    """Parse ``from to`` integer pairs, skipping ``#`` comments and blank lines.

    Files ending in ``.gz`` are decompressed on the fly.
    """
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    pairs, comments, lineno = [], 0, 0
    try:
        with opener(path, "rt", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                s = line.strip()
                if not s:
                    continue
                if s.startswith("#"):
                    comments += 1
                    continue
                parts = s.split()
                try:
                    if len(parts) != 2:
                        raise ValueError
                    a, b = int(parts[0]), int(parts[1])
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: expected two integer ids, got {s!r}",
                                     line=lineno) from None
                if a < 0 or b < 0:
                    raise ParseError(f"{path}:{lineno}: negative node id", line=lineno)
                pairs.append((a, b))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    return RawEdgeList(np.array(pairs, dtype=np.int64).reshape(-1, 2), comments, lineno)


@dataclass(frozen=True)
class IngestReport:
    n: int
    external_ids: np.ndarray
    raw_pairs: int
    duplicates: int
    loops: int
    reciprocal: int
    directed: int
    undirected: int

    def to_dict(self) -> dict:
        return {"n": self.n, "raw_pairs": self.raw_pairs, "duplicates": self.duplicates,
                "loops": self.loops, "reciprocal": self.reciprocal,
                "directed": self.directed, "undirected": self.undirected}


def canonicalize(raw: RawEdgeList, status=None) -> tuple[PartiallyDirectedNetwork, IngestReport]:
    """Map external ids to ``0..n-1`` in ascending order and apply the canonical-form rules.

    Every id that appears in the file becomes a node, including ids seen only
    in self-loops. Without ``status`` all nodes start uninfected.
    """
    ext, inv = np.unique(raw.pairs, return_inverse=True)
    mapped = inv.reshape(-1, 2).astype(np.int64)
    n = len(ext)
    d, u, rep = canonical_edges(n, mapped, None)
    if status is None:
        status = np.zeros(n, dtype=np.int8)
    net = PartiallyDirectedNetwork(n, status, d, u)
    report = IngestReport(n, ext, len(raw), rep["parallel_directed"], rep["loops"],
                          rep["antiparallel"], len(d), len(u))
    return net, report


def assign_status_prefix(net: PartiallyDirectedNetwork, k: int) -> np.ndarray:
    """Status vector infecting the ``k`` lowest ids (lowest external ids after canonicalize)."""
    if not 0 < k < net.n:
        raise InputError(f"k must satisfy 0 < k < n={net.n}, got {k}")
    z = np.zeros(net.n, dtype=np.int8)
    z[:k] = 1
    return z


def thin_block_triangle(net: PartiallyDirectedNetwork, block: tuple[int, int], triangle: str,
                        fraction: float, rng: np.random.Generator) -> PartiallyDirectedNetwork:
    """Delete a share of the adjacency entries in one triangle of one status block.

    Candidates are entries ``y_ij`` with ``(z_i, z_j) == block`` and ``i < j``
    (upper) or ``i > j`` (lower). A reciprocated edge offers the single
    orientation that falls in the triangle; losing it leaves a one-way edge
    in the other direction.
    """
    if triangle not in ("upper", "lower"):
        raise InputError("triangle must be 'upper' or 'lower'")
    if not 0 <= fraction <= 1:
        raise InputError("fraction must lie in [0, 1]")
    k, l = (int(block[0]), int(block[1]))
    if k not in (0, 1) or l not in (0, 1):
        raise InputError("block statuses must be 0 or 1")
    z = net.status
    d, u = net.directed, net.undirected
    # every candidate as an oriented entry (row, col) plus where it came from
    u_oriented = u if triangle == "upper" else u[:, ::-1]
    rows = np.concatenate([d[:, 0], u_oriented[:, 0]])
    cols = np.concatenate([d[:, 1], u_oriented[:, 1]])
    in_tri = rows < cols if triangle == "upper" else rows > cols
    cand = np.flatnonzero(in_tri & (z[rows] == k) & (z[cols] == l))
    n_remove = round(fraction * len(cand))
    if n_remove == 0:
        return net
    gone = rng.choice(cand, size=n_remove, replace=False)
    drop_d = gone[gone < len(d)]
    drop_u = gone[gone >= len(d)] - len(d)
    keep_d = np.ones(len(d), dtype=bool)
    keep_d[drop_d] = False
    keep_u = np.ones(len(u), dtype=bool)
    keep_u[drop_u] = False
    demoted = u_oriented[drop_u][:, ::-1]
    new_d, new_u, _ = canonical_edges(net.n, np.concatenate([d[keep_d], demoted]), u[keep_u])
    return PartiallyDirectedNetwork(net.n, z, new_d, new_u)


# Removal recipes for a prefix-infected network. "upper" thins the infected
# rows (their out-ties), "lower" the infected columns (their in-ties).
THINNING_RECIPES = {
    "upper90": (((1, 1), "upper", 0.9), ((1, 0), "upper", 0.9)),
    "lower70": (((1, 1), "lower", 0.7), ((0, 1), "lower", 0.7)),
}


def apply_recipe(net: PartiallyDirectedNetwork, steps, rng: np.random.Generator
                 ) -> PartiallyDirectedNetwork:
    """Apply ``thin_block_triangle`` steps in order; ``steps`` may be a recipe name."""
    if isinstance(steps, str):
        try:
            steps = THINNING_RECIPES[steps]
        except KeyError:
            raise InputError(f"unknown recipe {steps!r}; known: {sorted(THINNING_RECIPES)}") from None
    for block, tri, frac in steps:
        net = thin_block_triangle(net, block, tri, frac, rng)
    return net
