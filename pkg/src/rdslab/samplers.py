"""Respondent-driven sampling and its four approximations.

* ``rds``   - coupon-based chain referral along out/undirected ties.
* ``wrpi``  - independent draws with probability proportional to in-degree.
* ``ss_in`` - successive sampling, sizes = in-degree.
* ``ss_pi`` - successive sampling, sizes = partial in-degree from the
  predecessor's status.
* ``ss_pa`` - as ``ss_pi`` with partial in-degrees replaced by
  ``R[z_j, z_prev] * d_in_j``.

The three successive samplers share one engine driven by a size matrix
``S`` of shape (2, n): at every step after the first, an unsampled node j is
drawn with probability ``S[z_prev, j]`` over the unsampled total of
``S[z_prev]``.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegenerateNetworkError, ExhaustionError, InputError
from .network import PartiallyDirectedNetwork, block_edge_counts, edge_ratio_in, in_ratio_matrix

log = logging.getLogger(__name__)

SAMPLERS = ("RDS", "WRPI", "SS_IN", "SS_PI", "SS_PA")
SEED_MARKER = -1


@dataclass
class SampleRecord:
    sampler: str
    nodes: list[int]
    seed: int | None = None
    target_n: int = 0
    recruiter: list[int] | None = None
    reseeds: int = 0
    restarts: int = 0

    def __post_init__(self):
        if self.sampler not in SAMPLERS:
            raise InputError(f"unknown sampler tag {self.sampler!r}")

    def distinct(self) -> np.ndarray:
        return np.unique(np.asarray(self.nodes, dtype=np.int64))

    def to_dict(self) -> dict:
        out = {"sampler": self.sampler, "seed": self.seed, "target_n": self.target_n,
               "nodes": [int(i) for i in self.nodes]}
        if self.recruiter is not None:
            out["recruiter"] = [int(r) for r in self.recruiter]
        if self.reseeds:
            out["reseeds"] = self.reseeds
        if self.restarts:
            out["restarts"] = self.restarts
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "SampleRecord":
        try:
            return cls(sampler=obj["sampler"], nodes=list(obj["nodes"]), seed=obj.get("seed"),
                       target_n=obj.get("target_n", len(obj["nodes"])),
                       recruiter=obj.get("recruiter"), reseeds=obj.get("reseeds", 0),
                       restarts=obj.get("restarts", 0))
        except KeyError as exc:
            raise InputError(f"sample record missing {exc}") from None


def _check_size(net: PartiallyDirectedNetwork, target_n: int) -> int:
    target_n = int(target_n)
    if target_n < 0:
        raise InputError("target sample size must be non-negative")
    if target_n > net.n:
        raise InputError(f"target size {target_n} exceeds population size {net.n}")
    return target_n


# ---------------------------------------------------------------------------
# RDS

def rds_sample(net: PartiallyDirectedNetwork, target_n: int, n_seeds: int = 10,
               n_coupons: int = 2, rng: np.random.Generator | None = None,
               seed: int | None = None) -> SampleRecord:
    """Breadth-first coupon referral.

    Seeds are drawn uniformly without replacement. Each participant, in order
    of entry, recruits up to ``n_coupons`` unsampled contacts uniformly at
    random (contacts = out-neighbours and undirected neighbours). When no
    participant can recruit any more, a fresh uniform seed is drawn from the
    unsampled nodes; these reseeds are counted on the record.
    """
    target_n = _check_size(net, target_n)
    if n_seeds < 1 or n_coupons < 1:
        raise InputError("need at least one seed and one coupon")
    rng = rng if rng is not None else np.random.default_rng(seed)
    contacts = net.contacts
    in_sample = np.zeros(net.n, dtype=bool)
    nodes: list[int] = []
    recruiter: list[int] = []

    def admit(i: int, by: int):
        in_sample[i] = True
        nodes.append(i)
        recruiter.append(by)
        queue.append(i)

    queue: deque[int] = deque()
    for s in rng.choice(net.n, size=min(n_seeds, target_n), replace=False):
        admit(int(s), SEED_MARKER)
    reseeds = 0
    while len(nodes) < target_n:
        if not queue:
            pool = np.flatnonzero(~in_sample)
            admit(int(pool[rng.integers(len(pool))]), SEED_MARKER)
            reseeds += 1
            continue
        i = queue.popleft()
        cand = contacts[i]
        cand = cand[~in_sample[cand]]
        if len(cand) == 0:
            continue
        k = min(n_coupons, len(cand), target_n - len(nodes))
        for j in rng.choice(cand, size=k, replace=False):
            admit(int(j), i)
    if reseeds:
        log.debug("rds sample reseeded %d time(s)", reseeds)
    return SampleRecord("RDS", nodes, seed=seed, target_n=target_n,
                        recruiter=recruiter, reseeds=reseeds)


# ---------------------------------------------------------------------------
# With-replacement draws

def wrpi_sample(net: PartiallyDirectedNetwork, target_n: int,
                rng: np.random.Generator | None = None, seed: int | None = None) -> SampleRecord:
    target_n = int(target_n)
    if target_n < 0:
        raise InputError("target sample size must be non-negative")
    din = net.in_degrees
    total = din.sum()
    if total == 0:
        raise DegenerateNetworkError("all in-degrees are zero")
    rng = rng if rng is not None else np.random.default_rng(seed)
    draws = rng.choice(net.n, size=target_n, replace=True, p=din / total)
    return SampleRecord("WRPI", draws.tolist(), seed=seed, target_n=target_n)


# ---------------------------------------------------------------------------
# Successive sampling

def size_matrix(net: PartiallyDirectedNetwork, kind: str, ratios=None) -> np.ndarray:
    """Unit sizes ``S[k, j]`` used when the predecessor has status ``k``."""
    kind = kind.upper()
    din = net.in_degrees.astype(float)
    if kind == "SS_IN":
        return np.vstack([din, din])
    if kind == "SS_PI":
        return net.partial_in_degrees.astype(float)
    if kind == "SS_PA":
        r = default_ratios(net) if ratios is None else check_ratios(ratios)
        z = net.status.astype(np.int64)
        # S[k, j] = R[z_j, k] * d_in_j
        return np.vstack([r[z, 0] * din, r[z, 1] * din])
    raise InputError(f"unknown successive sampler {kind!r}")


def check_ratios(ratios) -> np.ndarray:
    r = np.asarray(ratios, dtype=float)
    if r.shape != (2, 2):
        raise InputError("ratios must be a 2x2 array R[l, k]")
    if np.any(r < 0) or not np.allclose(r.sum(axis=1), 1.0, atol=1e-9):
        raise InputError("each ratio row R[l, :] must be non-negative and sum to 1")
    return r


def default_ratios(net: PartiallyDirectedNetwork) -> np.ndarray:
    """Incoming-edge ratios of the network itself; a status with no incoming
    entries gets an even split (its nodes have zero in-degree anyway)."""
    return in_ratio_matrix(block_edge_counts(net), fallback=0.5)


def exact_size_matrix(net: PartiallyDirectedNetwork, kind: str, ratios=None) -> list[list]:
    """Rational version of :func:`size_matrix` for exact kernel checks.

    For ``SS_PA`` without explicit ratios, the network's block ratios are
    used as Fractions.
    """
    kind = kind.upper()
    din = [int(x) for x in net.in_degrees]
    if kind == "SS_IN":
        return [din, list(din)]
    if kind == "SS_PI":
        return [[int(x) for x in row] for row in net.partial_in_degrees]
    if kind == "SS_PA":
        if ratios is None:
            counts = block_edge_counts(net)
            ratios = [[edge_ratio_in(counts, l, k, exact=True) for k in (0, 1)] for l in (0, 1)]
        z = [int(s) for s in net.status]
        return [[Fraction(ratios[z[j]][k]) * din[j] for j in range(net.n)] for k in (0, 1)]
    raise InputError(f"unknown successive sampler {kind!r}")


def transition_probabilities(sizes, status, sampled: Sequence[int], exact: bool = True) -> list:
    """Distribution of the next draw after the ordered prefix ``sampled``.

    ``sizes`` is a (2, n) size matrix (ints or Fractions for exact results).
    Already sampled nodes get probability 0.
    """
    if len(sampled) == 0:
        raise InputError("the first draw is not governed by the transition kernel")
    taken = {int(i) for i in sampled}
    row = sizes[int(status[int(sampled[-1])])]
    conv = Fraction if exact else float
    weights = [conv(0) if j in taken else conv(row[j]) for j in range(len(row))]
    total = sum(weights)
    if total == 0:
        raise ExhaustionError("no unsampled mass under the current kernel")
    return [w / total for w in weights]


def _draw_rows(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    """One categorical draw per row; ``u`` holds uniforms in [0, 1)."""
    cs = np.cumsum(weights, axis=1)
    idx = (cs <= (u * cs[:, -1])[:, None]).sum(axis=1)
    over = idx >= weights.shape[1]
    if over.any():
        # u * total rounded up to the total: take the last positive weight
        w = weights[over]
        idx[over] = w.shape[1] - 1 - np.argmax(w[:, ::-1] > 0, axis=1)
    return idx


def _single_chain(masked: np.ndarray, status: np.ndarray, out: np.ndarray,
                  fallback_uniform: bool, rng: np.random.Generator) -> int:
    """1-D version of the batch loop below; same kernel, less overhead."""
    n = masked.shape[1]
    restarts = 0
    layer = 2
    for step in range(len(out)):
        cs = np.cumsum(masked[layer])
        if cs[-1] <= 0 and step > 0 and layer < 2:
            restarts += 1
            layer = 2
            cs = np.cumsum(masked[2])
        if cs[-1] <= 0:
            if not fallback_uniform:
                raise ExhaustionError(f"eligible mass exhausted after {step} of {len(out)} draws")
            layer = 3
            cs = np.cumsum(masked[3])
        idx = int(np.searchsorted(cs, rng.random() * cs[-1], side="right"))
        if idx >= n:
            idx = int(np.flatnonzero(masked[layer] > 0)[-1])
        out[step] = idx
        masked[:, idx] = 0.0
        layer = int(status[idx])
    return restarts


def successive_sample_batch(sizes: np.ndarray, status: np.ndarray, first_sizes: np.ndarray,
                            target_n: int, reps: int, rng: np.random.Generator,
                            fallback_uniform: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Run ``reps`` independent successive-sampling chains side by side.

    The first node is drawn proportional to ``first_sizes``. Later steps use
    ``sizes[z_prev]`` restricted to unsampled nodes; if that leaves no mass,
    the step falls back to ``first_sizes`` (counted as a restart). With
    ``fallback_uniform`` a chain whose fallback mass is also zero continues
    uniformly instead of raising :class:`ExhaustionError`.

    Returns ``(samples, restarts)``; samples has shape (reps, target_n).
    """
    sizes = np.asarray(sizes, dtype=float)
    n = sizes.shape[1]
    if target_n > n:
        raise InputError(f"target size {target_n} exceeds population size {n}")
    status = np.asarray(status, dtype=np.int64)
    first_sizes = np.asarray(first_sizes, dtype=float)
    out = np.empty((reps, target_n), dtype=np.int64)
    restarts = np.zeros(reps, dtype=np.int64)
    if target_n == 0 or reps == 0:
        return out, restarts
    # masked[k, r, j]: size of unsampled node j for chain r after a status-k predecessor;
    # index 2 holds the fallback sizes, index 3 the uniform last resort
    masked = np.empty((4, reps, n))
    masked[:2] = sizes[:, None, :]
    masked[2] = first_sizes
    masked[3] = 1.0
    if reps == 1:
        restarts[0] = _single_chain(masked[:, 0, :], status, out[0], fallback_uniform, rng)
        return out, restarts
    rows = np.arange(reps)
    layer = np.full(reps, 2)
    for step in range(target_n):
        w = masked[layer, rows]
        totals = w.sum(axis=1)
        if step > 0:
            stuck = totals <= 0
            if stuck.any():
                restarts += stuck
                layer = np.where(stuck, 2, layer)
                w[stuck] = masked[2, stuck]
                totals[stuck] = w[stuck].sum(axis=1)
        dead = totals <= 0
        if dead.any():
            if not fallback_uniform:
                raise ExhaustionError(
                    f"eligible mass exhausted after {step} of {target_n} draws")
            w[dead] = masked[3, dead]
        pick = _draw_rows(w, rng.random(reps))
        out[:, step] = pick
        masked[:, rows, pick] = 0.0
        layer = status[pick]
    return out, restarts


def _ss_record(net, kind, target_n, rng, seed, ratios=None, first="in_degree",
               fallback_uniform=False) -> SampleRecord:
    target_n = _check_size(net, target_n)
    rng = rng if rng is not None else np.random.default_rng(seed)
    sizes = size_matrix(net, kind, ratios)
    first_sizes = first_draw_sizes(net, first)
    samples, restarts = successive_sample_batch(sizes, net.status, first_sizes, target_n, 1,
                                                rng, fallback_uniform=fallback_uniform)
    if restarts[0]:
        log.debug("%s chain restarted %d time(s)", kind, restarts[0])
    return SampleRecord(kind.upper(), samples[0].tolist(), seed=seed, target_n=target_n,
                        restarts=int(restarts[0]))


def first_draw_sizes(net: PartiallyDirectedNetwork, first: str = "in_degree") -> np.ndarray:
    if first == "in_degree":
        return net.in_degrees.astype(float)
    if first == "uniform":
        return np.ones(net.n)
    raise InputError(f"unknown first-draw rule {first!r}")


def ss_in_sample(net, target_n, rng=None, seed=None, **kw) -> SampleRecord:
    """Successive sampling proportional to in-degree."""
    return _ss_record(net, "SS_IN", target_n, rng, seed, **kw)


def ss_pi_sample(net, target_n, rng=None, seed=None, **kw) -> SampleRecord:
    """Successive sampling proportional to partial in-degree from the predecessor's status."""
    return _ss_record(net, "SS_PI", target_n, rng, seed, **kw)


def ss_pa_sample(net, target_n, ratios=None, rng=None, seed=None, **kw) -> SampleRecord:
    """Successive sampling with ratio-approximated partial in-degrees.

    ``ratios[l, k]`` is the share of entries into status ``l`` that come from
    status ``k``; defaults to the network's own block ratios.
    """
    return _ss_record(net, "SS_PA", target_n, rng, seed, ratios=ratios, **kw)


def draw_sample(net: PartiallyDirectedNetwork, sampler: str, target_n: int,
                seed: int | None = None, *, n_seeds: int = 10, n_coupons: int = 2,
                ratios=None, first: str = "in_degree") -> SampleRecord:
    """Dispatch on a sampler tag (case-insensitive; ``ss-in`` style accepted)."""
    tag = sampler.upper().replace("-", "_")
    rng = np.random.default_rng(seed)
    if tag == "RDS":
        return rds_sample(net, target_n, n_seeds, n_coupons, rng=rng, seed=seed)
    if tag == "WRPI":
        return wrpi_sample(net, target_n, rng=rng, seed=seed)
    if tag == "SS_IN":
        return ss_in_sample(net, target_n, rng=rng, seed=seed, first=first)
    if tag == "SS_PI":
        return ss_pi_sample(net, target_n, rng=rng, seed=seed, first=first)
    if tag == "SS_PA":
        return ss_pa_sample(net, target_n, ratios=ratios, rng=rng, seed=seed, first=first)
    raise InputError(f"unknown sampler {sampler!r}")
