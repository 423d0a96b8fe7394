import numpy as np
import pytest

from rdslab.errors import InputError, UndefinedWeightError
from rdslab.estimators import (EstimatorResult, estimate_inclusion, hajek, hajek_many,
                               inclusion_from_samples, mare, rmse)
from rdslab.samplers import SampleRecord


def recs(*node_lists, tag="SS_IN"):
    return [SampleRecord(tag, list(n)) for n in node_lists]


def test_inclusion_direct_count():
    est = estimate_inclusion(recs([0, 1], [1, 2]), 3)
    assert est.pi.tolist() == [0.5, 1.0, 0.5] and est.n_samp == 2


def test_inclusion_always_and_never():
    est = estimate_inclusion(recs([0, 2], [2, 1], [2]), 4)
    assert est.pi[2] == 1.0 and est.pi[3] == 0.0


def test_inclusion_wrpi_repeats_count_once():
    est = estimate_inclusion(recs([0, 0, 0], [1, 0], tag="WRPI"), 2)
    assert est.pi.tolist() == [1.0, 0.5]


def test_inclusion_errors():
    with pytest.raises(InputError):
        estimate_inclusion([], 3)
    with pytest.raises(InputError):
        estimate_inclusion(recs([0]) + recs([1], tag="RDS"), 3)
    with pytest.raises(InputError):
        estimate_inclusion(recs([5]), 3)


def test_inclusion_permutation_equivariant():
    rng = np.random.default_rng(0)
    samples = [rng.choice(8, 4, replace=False) for _ in range(50)]
    perm = rng.permutation(8)
    a = inclusion_from_samples(samples, 8).pi
    b = inclusion_from_samples([perm[s] for s in samples], 8).pi
    assert np.array_equal(b[perm], a)


def test_hajek_all_infected():
    assert hajek([0, 1], np.array([0.3, 0.6, 0.1]), [1, 1, 0]) == 1.0


def test_hajek_uniform_pi_is_sample_mean():
    z = np.array([1, 0, 0, 1, 1])
    assert hajek([0, 1, 2, 3], np.full(5, 0.4), z) == pytest.approx(0.5)


@pytest.mark.parametrize("c", [0.1, 2.0, 37.5])
def test_hajek_scale_invariant(c):
    pi = np.array([0.2, 0.5, 0.1, 0.4])
    z = [1, 0, 1, 0]
    assert hajek([0, 1, 2], pi * c, z) == pytest.approx(hajek([0, 1, 2], pi, z), rel=1e-14)


def test_hajek_weights_by_inverse_pi():
    # weights 1/0.2 = 5 (infected) and 1/0.5 = 2 -> 5/7
    assert hajek([0, 1], np.array([0.2, 0.5]), [1, 0]) == pytest.approx(5 / 7)


def test_hajek_distinct_nodes_only():
    pi = np.array([0.2, 0.5])
    assert hajek(SampleRecord("WRPI", [0, 0, 1]), pi, [1, 0]) == hajek([0, 1], pi, [1, 0])


def test_hajek_zero_weight():
    with pytest.raises(UndefinedWeightError):
        hajek([0, 1], np.array([0.0, 0.5]), [1, 0])


def test_hajek_many_counts_failures():
    pi = np.array([0.0, 0.5, 0.5])
    res = hajek_many(recs([0, 1], [1, 2], [2]), pi, [1, 1, 0], mu_true=2 / 3)
    assert res.failures == 1 and res.summary["n"] == 2
    assert res.summary["rmse"] == pytest.approx(rmse([0.5, 0.0], 2 / 3))


def test_mare_examples():
    assert mare([0.3, 0.2], [0.3, 0.2]).value == 0
    assert mare([0.4, 0.2], [0.2, 0.1]).value == pytest.approx(1.0)
    assert mare([0.2, 0.4], [0.4, 0.4]).value == pytest.approx(0.25)


def test_mare_excludes_zero_reference():
    res = mare([0.5, 0.2, 0.3], [0.0, 0.4, 0.3])
    assert res.n_prime == 2 and res.value == pytest.approx(0.25)
    with pytest.raises(UndefinedWeightError):
        mare([0.1], [0.0])


def test_mare_scales_with_deviation():
    ref = np.array([0.2, 0.3, 0.5])
    dev = np.array([0.05, -0.02, 0.01])
    assert mare(ref + 2 * dev, ref).value == pytest.approx(2 * mare(ref + dev, ref).value)


def test_rmse_examples():
    assert rmse([0.2, 0.2], 0.2) == 0
    assert rmse([0.0, 0.4], 0.2) == pytest.approx(0.2)
    assert rmse([0.35], 0.2) == pytest.approx(0.15)
    with pytest.raises(InputError):
        rmse([], 0.2)


def test_estimator_result_summary():
    res = EstimatorResult(0.2, [0.1, 0.2, 0.3])
    assert res.summary["bias"] == pytest.approx(0.0)
    assert res.summary["rmse"] ** 2 == pytest.approx(np.mean((np.array([0.1, 0.2, 0.3]) - 0.2) ** 2))
    assert res.summary["quantiles"][2] == pytest.approx(0.2)
