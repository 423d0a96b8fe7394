"""Monte Carlo inclusion probabilities, Hajek prevalence estimates and error metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, UndefinedWeightError
from .samplers import SampleRecord


@dataclass(frozen=True)
class InclusionEstimate:
    """Share of replicate samples that contain each node."""

    sampler: str
    pi: np.ndarray
    n_samp: int

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        if np.any(pi < 0) or np.any(pi > 1):
            raise InputError("inclusion probabilities must lie in [0, 1]")
        object.__setattr__(self, "pi", pi)


def estimate_inclusion(records: Sequence[SampleRecord], n: int) -> InclusionEstimate:
    """Relative frequency of set membership; repeats within a record count once."""
    records = list(records)
    if not records:
        raise InputError("need at least one sample record")
    tags = {r.sampler for r in records}
    if len(tags) != 1:
        raise InputError(f"records mix samplers: {sorted(tags)}")
    counts = np.zeros(n, dtype=np.int64)
    for rec in records:
        idx = rec.distinct()
        if len(idx) and (idx.min() < 0 or idx.max() >= n):
            raise InputError("record contains a node id outside the population")
        counts[idx] += 1
    return InclusionEstimate(tags.pop(), counts / len(records), len(records))


def inclusion_from_samples(samples: Iterable[np.ndarray], n: int, sampler: str = "") -> InclusionEstimate:
    """Array-based twin of :func:`estimate_inclusion` for batches of node arrays."""
    counts = np.zeros(n, dtype=np.int64)
    reps = 0
    for s in samples:
        counts[np.unique(s)] += 1
        reps += 1
    if reps == 0:
        raise InputError("need at least one sample")
    return InclusionEstimate(sampler, counts / reps, reps)


def hajek(record: SampleRecord | Sequence[int], pi: InclusionEstimate | np.ndarray, z) -> float:
    """Ratio of inverse-probability weighted infected count to weighted sample size.

    Sums run over the distinct nodes of the record.
    """
    nodes = record.distinct() if isinstance(record, SampleRecord) else np.unique(np.asarray(record))
    pi = pi.pi if isinstance(pi, InclusionEstimate) else np.asarray(pi, dtype=float)
    z = np.asarray(z, dtype=float)
    if len(nodes) == 0:
        raise InputError("empty sample")
    p = pi[nodes]
    if np.any(p <= 0):
        bad = nodes[p <= 0]
        raise UndefinedWeightError(
            f"{len(bad)} sampled node(s) have zero inclusion probability (first: {int(bad[0])})")
    wts = 1.0 / p
    return float(np.dot(z[nodes], wts) / wts.sum())


@dataclass(frozen=True)
class MareResult:
    value: float
    n_prime: int

    def __float__(self):
        return self.value


def mare(pi_app, pi_rds) -> MareResult:
    """Mean absolute relative error against RDS inclusion probabilities.

    Nodes never reached by RDS (zero reference probability) are left out;
    ``n_prime`` is the number of nodes that enter the mean.
    """
    a = pi_app.pi if isinstance(pi_app, InclusionEstimate) else np.asarray(pi_app, dtype=float)
    r = pi_rds.pi if isinstance(pi_rds, InclusionEstimate) else np.asarray(pi_rds, dtype=float)
    if a.shape != r.shape:
        raise InputError("inclusion vectors differ in length")
    keep = r > 0
    n_prime = int(keep.sum())
    if n_prime == 0:
        raise UndefinedWeightError("no node has a positive RDS inclusion probability")
    return MareResult(float(np.mean(np.abs(a[keep] - r[keep]) / r[keep])), n_prime)


def rmse(estimates: Sequence[float], mu_true: float) -> float:
    est = np.asarray(list(estimates), dtype=float)
    if est.size == 0:
        raise InputError("need at least one estimate")
    return float(math.sqrt(np.mean((est - mu_true) ** 2)))


@dataclass
class EstimatorResult:
    """Per-replicate prevalence estimates with summary statistics."""

    mu_true: float
    estimates: np.ndarray
    failures: int = 0
    summary: dict = field(init=False)

    def __post_init__(self):
        est = np.asarray(self.estimates, dtype=float)
        self.estimates = est
        if est.size == 0:
            self.summary = {"n": 0, "failures": self.failures}
            return
        q = np.quantile(est, [0.0, 0.25, 0.5, 0.75, 1.0])
        self.summary = {
            "n": int(est.size),
            "failures": self.failures,
            "mean": float(est.mean()),
            "bias": float(est.mean() - self.mu_true),
            "rmse": rmse(est, self.mu_true),
            "quantiles": [float(x) for x in q],
        }


def hajek_many(records: Iterable[SampleRecord], pi, z, mu_true: float) -> EstimatorResult:
    """Hajek estimate for every record; undefined-weight runs are counted, not dropped silently."""
    vals, failed = [], 0
    for rec in records:
        try:
            vals.append(hajek(rec, pi, z))
        except UndefinedWeightError:
            failed += 1
    return EstimatorResult(mu_true, np.array(vals), failures=failed)
