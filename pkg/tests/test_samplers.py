from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from rdslab.errors import DegenerateNetworkError, ExhaustionError, InputError
from rdslab.network import PartiallyDirectedNetwork
from rdslab.samplers import (SEED_MARKER, SampleRecord, draw_sample, exact_size_matrix,
                             first_draw_sizes, rds_sample, size_matrix, ss_in_sample,
                             ss_pa_sample, ss_pi_sample, successive_sample_batch,
                             transition_probabilities, wrpi_sample)

from _oracle import dense_adjacency, inclusion_probabilities
from conftest import random_network

# in-degrees (1, 3, 0, 0, 0)
SKEWED = PartiallyDirectedNetwork(5, [1, 0, 0, 0, 0], [(2, 0), (2, 1), (3, 1), (4, 1)], None)


def mc_inclusion(net, kind, target_n, reps, seed, chunk=100_000):
    rng = np.random.default_rng(seed)
    sizes = size_matrix(net, kind)
    first = first_draw_sizes(net)
    counts = np.zeros(net.n)
    done = 0
    while done < reps:
        r = min(chunk, reps - done)
        s, _ = successive_sample_batch(sizes, net.status, first, target_n, r, rng)
        counts += np.bincount(s.ravel(), minlength=net.n)
        done += r
    return counts / reps


# ---------------------------------------------------------------------------
# RDS

def test_rds_seeds_only():
    net = random_network(np.random.default_rng(0), 20)
    rec = rds_sample(net, 5, n_seeds=5, rng=np.random.default_rng(1))
    assert len(rec.nodes) == 5 and rec.recruiter == [SEED_MARKER] * 5


def test_rds_star_center_recruits_two_leaves():
    net = PartiallyDirectedNetwork(6, [1, 0, 0, 0, 0, 0], [(0, j) for j in range(1, 6)], None)
    seen = set()
    for s in range(50):
        rec = rds_sample(net, 3, n_seeds=1, n_coupons=2, rng=np.random.default_rng(s))
        if rec.nodes[0] != 0:
            continue
        assert rec.recruiter == [SEED_MARKER, 0, 0] and len(set(rec.nodes)) == 3
        seen.add(frozenset(rec.nodes[1:]))
    assert len(seen) > 3


def test_rds_sink_recruits_nobody():
    # node 1 only receives; starting there forces a reseed
    net = PartiallyDirectedNetwork(3, [1, 0, 0], [(0, 1), (2, 1)], None)
    for s in range(20):
        rec = rds_sample(net, 2, n_seeds=1, rng=np.random.default_rng(s))
        if rec.nodes[0] == 1:
            assert rec.recruiter[1] == SEED_MARKER and rec.reseeds == 1


@pytest.mark.parametrize("seed", range(5))
def test_rds_recruiter_precedes_recruit(seed):
    net = random_network(np.random.default_rng(seed), 40, p_dir=0.08, p_und=0.03)
    rec = rds_sample(net, 30, n_seeds=3, n_coupons=2, rng=np.random.default_rng(seed))
    pos = {v: k for k, v in enumerate(rec.nodes)}
    assert len(pos) == 30
    for node, by in zip(rec.nodes, rec.recruiter):
        if by != SEED_MARKER:
            assert pos[by] < pos[node]
            assert node in net.contacts[by]
    assert rec.recruiter.count(SEED_MARKER) == 3 + rec.reseeds


def test_rds_rejects_oversize():
    with pytest.raises(InputError):
        rds_sample(SKEWED, 6)


# ---------------------------------------------------------------------------
# WRPI

def test_wrpi_draw_probabilities():
    rec = wrpi_sample(SKEWED, 100_000, rng=np.random.default_rng(3))
    freq = np.bincount(rec.nodes, minlength=5) / 100_000
    se = np.sqrt(0.25 * 0.75 / 100_000)
    assert set(rec.nodes) <= {0, 1}
    assert abs(freq[0] - 0.25) < 3 * se


def test_wrpi_empty_and_degenerate():
    assert wrpi_sample(SKEWED, 0, seed=1).nodes == []
    with pytest.raises(DegenerateNetworkError):
        wrpi_sample(PartiallyDirectedNetwork.empty([0, 1]), 3)


def test_wrpi_pairs_follow_multinomial_law():
    # in-degrees (1, 2, 1, 0); two draws per record
    net = PartiallyDirectedNetwork(4, [1, 0, 0, 0], [(3, 0), (3, 1), (0, 1), (3, 2)], None)
    p = np.array([1, 2, 1, 0]) / 4
    rng = np.random.default_rng(17)
    reps = 10_000
    obs = np.zeros((3, 3))
    for _ in range(reps):
        a, b = wrpi_sample(net, 2, rng=rng).nodes
        obs[a, b] += 1
    expected = np.outer(p[:3], p[:3]) * reps
    assert stats.chisquare(obs.ravel(), expected.ravel()).pvalue > 0.01
    repeat_rate = np.trace(obs) / reps
    assert abs(repeat_rate - (p ** 2).sum()) < 3 * np.sqrt(0.375 * 0.625 / reps)


# ---------------------------------------------------------------------------
# successive sampling kernels

def test_ss_in_two_node_orderings():
    sizes = np.array([[1.0, 3.0], [1.0, 3.0]])
    s, _ = successive_sample_batch(sizes, [0, 0], sizes[0], 2, 40_000, np.random.default_rng(0))
    share = (s[:, 0] == 1).mean()
    assert abs(share - 0.75) < 3 * np.sqrt(0.75 * 0.25 / 40_000)


def test_ss_pi_six_node_toy():
    # i1, i2, h1, h2 infected; i3, i4 uninfected. h1, h2 are already sampled.
    i1, i2, i3, i4, h1, h2 = range(6)
    net = PartiallyDirectedNetwork(
        6, [1, 1, 0, 0, 1, 1],
        [(h1, i2), (i1, i4), (h1, i4), (i4, i3)],
        [(h2, i2), (h2, i4)])
    probs = transition_probabilities(exact_size_matrix(net, "SS_PI"), net.status, [h1, h2, i1])
    assert (probs[i2], probs[i3], probs[i4]) == (Fraction(2, 5), 0, Fraction(3, 5))


def test_ss_pa_toy_example(toy3):
    probs = transition_probabilities(exact_size_matrix(toy3, "SS_PA"), toy3.status, [1])
    assert probs == [Fraction(1, 4), 0, Fraction(3, 4)]


def test_ss_pa_even_ratios_match_ss_in():
    net = random_network(np.random.default_rng(4), 7)
    half = [[Fraction(1, 2)] * 2] * 2
    pa = exact_size_matrix(net, "SS_PA", ratios=half)
    ssin = exact_size_matrix(net, "SS_IN")
    for prefix in ([0], [3, 1], [6, 2, 5]):
        assert (transition_probabilities(pa, net.status, prefix)
                == transition_probabilities(ssin, net.status, prefix))


def test_ss_pa_true_ratios_match_ss_pi():
    # every node receives one tie from each status, so partial splits equal the global 1/2
    net = PartiallyDirectedNetwork(4, [1, 1, 0, 0], [(3, 0), (2, 1), (0, 2), (1, 3)],
                                   [(0, 1), (2, 3)])
    pa, pi = exact_size_matrix(net, "SS_PA"), exact_size_matrix(net, "SS_PI")
    for prefix in ([0], [2], [1, 3]):
        assert (transition_probabilities(pa, net.status, prefix)
                == transition_probabilities(pi, net.status, prefix))


def test_ss_pi_equals_ss_in_when_splits_do_not_depend_on_status():
    net = PartiallyDirectedNetwork(4, [1, 1, 0, 0], [(3, 0), (2, 1), (0, 2), (1, 3)],
                                   [(0, 1), (2, 3)])
    a = transition_probabilities(exact_size_matrix(net, "SS_PI"), net.status, [0])
    b = transition_probabilities(exact_size_matrix(net, "SS_IN"), net.status, [0])
    assert a == b


@pytest.mark.parametrize("kind", ["SS_IN", "SS_PI", "SS_PA"])
@pytest.mark.parametrize("seed", range(3))
def test_step_distribution_sums_to_one(kind, seed):
    net = random_network(np.random.default_rng(seed), 12)
    sizes = size_matrix(net, kind)
    rng = np.random.default_rng(seed)
    for _ in range(10):
        prefix = list(rng.permutation(12)[:rng.integers(1, 6)])
        try:
            probs = transition_probabilities(sizes, net.status, prefix, exact=False)
        except ExhaustionError:
            continue
        assert abs(sum(probs) - 1) < 1e-12
        assert all(probs[i] == 0 for i in prefix)


def test_single_remaining_node_is_certain():
    net = random_network(np.random.default_rng(1), 5, p_dir=0.6, p_und=0.3)
    sizes = exact_size_matrix(net, "SS_IN")
    probs = transition_probabilities(sizes, net.status, [0, 1, 2, 3])
    assert probs[4] == 1


@pytest.mark.parametrize("sampler", [ss_in_sample, ss_pi_sample, ss_pa_sample])
def test_ss_records_are_distinct_and_deterministic(sampler):
    net = random_network(np.random.default_rng(2), 30)
    a = sampler(net, 15, seed=7)
    b = sampler(net, 15, seed=7)
    assert a.nodes == b.nodes and len(set(a.nodes)) == 15 == len(a.nodes)


def test_zero_in_degree_never_sampled_and_exhaustion():
    rng = np.random.default_rng(0)
    hits = set()
    for _ in range(200):
        hits.update(ss_in_sample(SKEWED, 2, rng=rng).nodes)
    assert hits == {0, 1}
    with pytest.raises(ExhaustionError):
        ss_in_sample(SKEWED, 3, seed=0)
    rec = ss_in_sample(SKEWED, 4, seed=0, fallback_uniform=True)
    assert len(set(rec.nodes)) == 4


def test_stuck_chain_restarts_are_counted():
    # node 0 (infected) receives only from uninfected, node 1 only from infected
    net = PartiallyDirectedNetwork(4, [1, 1, 0, 0], [(2, 0), (0, 1), (3, 2)], None)
    restarts = 0
    for s in range(50):
        rec = ss_pi_sample(net, 3, seed=s)
        restarts += rec.restarts
    assert restarts > 0


def test_draw_sample_dispatch_and_record_round_trip():
    net = random_network(np.random.default_rng(3), 25)
    for tag in ("rds", "wrpi", "ss-in", "ss_pi", "SS_PA"):
        rec = draw_sample(net, tag, 10, seed=5)
        assert rec == SampleRecord.from_dict(rec.to_dict())
        assert rec.nodes == draw_sample(net, tag, 10, seed=5).nodes
    with pytest.raises(InputError):
        draw_sample(net, "snowball", 3)


def test_batch_engine_matches_single_chain_law():
    net = random_network(np.random.default_rng(8), 6)
    sizes, first = size_matrix(net, "SS_PI"), first_draw_sizes(net)
    rng = np.random.default_rng(1)
    multi, _ = successive_sample_batch(sizes, net.status, first, 3, 30_000, rng)
    single = np.array([successive_sample_batch(sizes, net.status, first, 3, 1, rng)[0][0]
                       for _ in range(30_000)])
    a = np.bincount(multi.ravel(), minlength=6) / 30_000
    b = np.bincount(single.ravel(), minlength=6) / 30_000
    assert np.all(np.abs(a - b) < 4 * np.sqrt(2 * 0.25 / 30_000))


@pytest.mark.parametrize("kind", ["SS_IN", "SS_PI", "SS_PA"])
def test_enumeration_oracle_small(kind):
    net = random_network(np.random.default_rng(21), 6, p_dir=0.35, p_und=0.2)
    y = dense_adjacency(net.n, net.directed, net.undirected)
    exact = np.array([float(p) for p in inclusion_probabilities(y, list(net.status), kind, 3)])
    assert exact.sum() == pytest.approx(3)
    reps = 200_000
    mc = mc_inclusion(net, kind, 3, reps, seed=5)
    se = np.sqrt(np.maximum(exact * (1 - exact), 1e-12) / reps)
    assert np.all(np.abs(mc - exact) <= 3 * se + 1e-12)
