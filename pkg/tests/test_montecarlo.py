import math

import numpy as np
import pytest

from conftest import sigma_check
from rnsens import oracle
from rnsens.errors import SampleError
from rnsens.estimators import EstimatorConfig, MeanSampler, SecondOrderSampler
from rnsens.montecarlo import EstimateResult, Welford, run_estimator, summarize, welford_update


class Alternating:
    def __call__(self, key):
        return 1.0 if key.path[-1] % 2 == 0 else -1.0


class Failing:
    def __init__(self, bad):
        self.bad = bad

    def __call__(self, key):
        if key.path[-1] == self.bad:
            raise ZeroDivisionError("boom")
        return 0.0


def test_welford_small():
    acc = Welford()
    for x in (1.0, 2.0, 3.0):
        acc = welford_update(acc, x)
    assert acc.mean == 2.0
    assert acc.variance == 1.0


def test_welford_constant():
    acc = Welford()
    for _ in range(1000):
        acc.push(0.1)
    assert acc.variance == 0.0


def test_welford_normals():
    x = np.random.default_rng(0).standard_normal(10**6)
    res = summarize(x)
    assert abs(res.mean) < 0.004
    assert abs(res.variance - 1.0) < 0.01


@pytest.mark.parametrize("shift", [0.0, 1e3, 1e6])
def test_welford_matches_two_pass(shift):
    x = np.random.default_rng(1).exponential(2.0, 50_000) + shift
    res = summarize(x)
    mean = math.fsum(x) / len(x)
    var = math.fsum((v - mean) ** 2 for v in x) / (len(x) - 1)
    assert res.mean == pytest.approx(mean, rel=1e-12)
    assert res.variance == pytest.approx(var, rel=1e-9 if shift else 1e-12)


def test_constant_sampler():
    res = run_estimator(lambda key: 0.0, 100, 0)
    assert (res.mean, res.variance, res.stderr) == (0.0, 0.0, 0.0)
    assert res.ci_low == res.ci_high == 0.0


def test_alternating_sampler():
    n = 1000
    res = run_estimator(Alternating(), n, 0)
    assert abs(res.mean) < 1e-15
    assert res.variance == pytest.approx(n / (n - 1), rel=1e-12)


def test_ci_is_normal_interval():
    res = run_estimator(Alternating(), 10, 0, z=2.0)
    assert res.ci_high - res.mean == pytest.approx(2.0 * res.stderr)
    assert res.stderr == pytest.approx(math.sqrt(res.variance / 10))


def test_requires_two_samples():
    with pytest.raises(ValueError):
        run_estimator(lambda key: 0.0, 1, 0)


@pytest.mark.parametrize("workers", [1, 3])
def test_failing_sample_reports_index(workers):
    with pytest.raises(SampleError) as info:
        run_estimator(Failing(4321), 6000, 0, workers=workers)
    assert info.value.index == 4321
    assert isinstance(info.value.cause, ZeroDivisionError)


def test_worker_count_does_not_change_result(bd):
    s = SecondOrderSampler(bd.network, bd.initial_state, bd.output, bd.parameters,
                           EstimatorConfig(1.0, 0, 1))
    results = [run_estimator(s, 5000, 17, workers=w) for w in (1, 2, 4)]
    first = results[0]
    for r in results[1:]:
        assert (r.mean, r.variance, r.n) == (first.mean, first.variance, first.n)


def test_python_sampler_keys_match_block(bd):
    s = MeanSampler(bd.network, bd.initial_state, bd.output, bd.parameters, 1.0)
    keep = []
    run_estimator(s, 50, 3, keep=keep)
    # a plain callable without block() uses the same keys
    keep2 = []
    run_estimator(lambda key: s(key), 50, 3, keep=keep2)
    assert np.array_equal(keep[0], keep2[0])


def test_birth_death_mixed_estimate(bd):
    s = SecondOrderSampler(bd.network, bd.initial_state, bd.output, bd.parameters,
                           EstimatorConfig(1.0, 0, 1))
    res = run_estimator(s, 10**5, 7)
    sigma_check(res, oracle.linear_bd_sens(0, 10, 1, 1, ["th1", "th2"]))
    assert isinstance(res, EstimateResult)
    assert set(res.to_dict()) >= {"mean", "variance", "stderr", "ci_low", "ci_high", "n"}
